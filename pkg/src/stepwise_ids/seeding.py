"""Derive independent child seeds from the single root seed."""

import hashlib


def derive_seed(root: int, *tags) -> int:
    key = "/".join([str(int(root))] + [str(t) for t in tags]).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little") >> 1
