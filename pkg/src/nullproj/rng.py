"""Seed derivation on top of numpy's counter-based Philox generator.

Every random draw in the package goes through :func:`make_rng`, and every
derived seed through :func:`derive_seed`, so a trial's data depends only on
its key and never on execution order.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key_int(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("seed components must be non-negative")
        return int(part)
    return zlib.crc32(str(part).encode("utf-8"))


def derive_seed(*parts) -> int:
    """Map an ordered key (ints and/or strings) to a 63-bit seed."""
    ss = np.random.SeedSequence([_key_int(p) for p in parts])
    hi, lo = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32 | int(lo)) & ((1 << 63) - 1)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_key_int(seed))))
