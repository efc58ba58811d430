"""Bottom-up grammar enumeration over a vocabulary mined from training trees.

Programs come out in non-decreasing size (constants are free), ties broken by
the printed body.  A few semantic duplicates are never generated: a constant
``true`` node filter (it makes the merge condition dead, so it behaves like
``false``/``false``), double negation, ``not`` over text emptiness, and the
mirror image of a commutative ``and``/``or``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator

from ..tree import FLAG_NAMES, UITree
from . import ast as A

VIEW_COUNT_ATOMS = (A.ViewCount("=", 2), A.ViewCount("<=", 3))
CHILD_COUNT_ATOMS = (A.ChildCount("=", 1),)


@dataclass(frozen=True)
class Vocabulary:
    tags: tuple = ()
    flags: tuple = ()
    attr_keys: tuple = ()

    @classmethod
    def from_trees(cls, trees: Iterable[UITree]) -> "Vocabulary":
        tags, flags = set(), set()
        key_counts: dict = {}
        total = 0
        for t in trees:
            for n in t.nodes():
                total += 1
                tags.add(n.tag)
                flags |= n.flags
                for k in n.attributes:
                    key_counts[k] = key_counts.get(k, 0) + 1
        # keys present on every node cannot discriminate anything
        keys = sorted(k for k, c in key_counts.items() if c < total)
        return cls(tuple(sorted(tags)), tuple(f for f in FLAG_NAMES if f in flags), tuple(keys))

    def node_atoms(self) -> list[A.Expr]:
        atoms: list[A.Expr] = [A.TagEquals(t) for t in self.tags]
        atoms += [A.Flag(f) for f in self.flags]
        atoms += [A.AttrExists(k) for k in self.attr_keys]
        atoms += [A.TextEmpty(), A.TextNonEmpty()]
        atoms += list(CHILD_COUNT_ATOMS)
        return atoms

    def view_atoms(self) -> list[A.Expr]:
        atoms: list[A.Expr] = [A.TextEmpty(), A.TextNonEmpty(), A.Interactive()]
        atoms += [A.TypeEquals(t) for t in self.tags]
        return atoms


def _key(e: A.Expr) -> str:
    return A.format_expr(e)


def _negatable(e: A.Expr) -> bool:
    return not isinstance(e, (A.Not, A.Const, A.TextEmpty, A.TextNonEmpty, A.AllViews,
                              A.AnyView, A.ViewCount))


class _Grammar:
    """Memoized predicate pools by exact size for the three contexts."""

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self.pools = {
            "node": lru_cache(maxsize=None)(self._node),
            "view": lru_cache(maxsize=None)(self._view),
            "merge": lru_cache(maxsize=None)(self._merge),
        }

    def of_size(self, ctx: str, size: int) -> tuple:
        return self.pools[ctx](size)

    def _combine(self, ctx: str, size: int, atoms, negatable_pool: str) -> tuple:
        if size <= 0:
            return ()
        if size == 1:
            return tuple(atoms)
        out = [A.Not(e) for e in self.of_size(negatable_pool, size - 1) if _negatable(e)]
        for lsize in range(1, size - 1):
            rsize = size - 1 - lsize
            for left in self.of_size(ctx, lsize):
                for right in self.of_size(ctx, rsize):
                    if lsize == rsize and _key(left) >= _key(right):
                        continue
                    for op in (A.And, A.Or):
                        # left-nest same-operator chains only
                        if isinstance(right, op):
                            continue
                        out.append(op(left, right))
        return tuple(out)

    def _node(self, size: int) -> tuple:
        return self._combine("node", size, self.vocab.node_atoms(), "node")

    def _view(self, size: int) -> tuple:
        return self._combine("view", size, self.vocab.view_atoms(), "view")

    def _merge(self, size: int) -> tuple:
        out = list(self._combine("merge", size, list(VIEW_COUNT_ATOMS) + self.vocab.node_atoms(),
                                 "node"))
        for inner in self.of_size("view", size - 1):
            if isinstance(inner, A.Const):
                continue
            out.append(A.AllViews(inner))
            out.append(A.AnyView(inner))
        return tuple(out)


def _hole_options(grammar: _Grammar, ctx: str, size: int) -> tuple:
    if size == 0:
        if ctx == "node-filter":
            return (A.FALSE,)
        return (A.FALSE, A.TRUE)
    pool = "merge" if ctx == "merge-when" else "node"
    return grammar.of_size(pool, size)


def programs_of_size(vocab: Vocabulary, size: int, grammar: _Grammar | None = None
                     ) -> list[A.TransformProgram]:
    grammar = grammar or _Grammar(vocab)
    found = []
    for ls in range(size + 1):
        for ns in range(size - ls + 1):
            ms = size - ls - ns
            for lf in _hole_options(grammar, "leaf-filter", ls):
                for nf in _hole_options(grammar, "node-filter", ns):
                    for mw in _hole_options(grammar, "merge-when", ms):
                        found.append(A.TransformProgram("candidate", lf, nf, mw,
                                                        provenance="enumerated"))
    keyed = sorted((p.body(), p) for p in found)
    return [p for _, p in keyed]


def enumerate_grammar(vocab: Vocabulary, budget: int) -> Iterator[A.TransformProgram]:
    """Yield every program of size <= budget, smallest first, each exactly once."""
    if budget < 0:
        return
    grammar = _Grammar(vocab)
    index = 0
    seen = set()
    for size in range(budget + 1):
        for p in programs_of_size(vocab, size, grammar):
            body = p.body()
            if body in seen:
                continue
            seen.add(body)
            yield p.with_id(f"g{index:05d}")
            index += 1
