"""Seeds that depend only on their inputs, never on process state or scheduling."""

import hashlib

UINT64_MAX = (1 << 64) - 1


def stable_seed(master_seed: int, key: str) -> int:
    """64-bit seed from (master_seed, key); unlike hash() it does not vary with PYTHONHASHSEED."""
    digest = hashlib.blake2b(f"{master_seed}:{key}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")
