"""Synthesize and apply programs that shrink UI trees into compact prompt views."""

from .interpreter import View, ViewList, apply, apply_library, lift, serialize_views
from .tree import UINode, UITree, load_tree, parse_android_xml, parse_canonical, serialize_canonical

__version__ = "0.1.0"

__all__ = [
    "UINode",
    "UITree",
    "View",
    "ViewList",
    "apply",
    "apply_library",
    "lift",
    "load_tree",
    "parse_android_xml",
    "parse_canonical",
    "serialize_canonical",
    "serialize_views",
]
