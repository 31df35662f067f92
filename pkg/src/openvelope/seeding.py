"""Seed derivation.

Every random stream in the package is derived from one root seed plus a
tuple of labels ``(module, purpose, index, ...)``. The mapping is a SHA-256
hash of the label tuple, so it is stable across platforms and Python
versions (unlike ``hash()``).
"""

import hashlib


def derive_seed(root: int, *labels) -> int:
    """Return a 63-bit seed for the stream named by ``labels`` under ``root``."""
    key = repr((int(root),) + tuple(labels)).encode("utf-8")
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "little") >> 1
