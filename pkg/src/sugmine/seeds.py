"""Deterministic fan-out of a single master seed into named sub-seeds.

Every source of randomness in the package (fold shuffles, parameter init,
dropout, epoch shuffles) derives its seed from the run's master seed plus a
stable label, so one integer reproduces a whole run.
"""

from __future__ import annotations

import hashlib


def derive_seed(master: int, label: str) -> int:
    """Derive a 32-bit sub-seed from a master seed and a label.

    Uses SHA-256 (not the built-in ``hash``, which is salted per process) so
    derived seeds are stable across processes and machines.
    """
    digest = hashlib.sha256(f"{master}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")
