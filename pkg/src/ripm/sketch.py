"""Seeded sign-sketch bank.

A bank holds `count` independent b-by-n sketches with i.i.d. entries
+-1/sqrt(b), drawn up front from a counter-based generator (Philox) so a run
is reproducible from its seed alone.  The solver consumes one fresh sketch
per step and regenerates the bank (under a deterministic child seed) at each
rebuild.

R^T R is an unbiased estimator of the identity:  E[R^T R v] = v with
per-coordinate second moment at most v_i^2 + ||v||^2/b; the test suite checks
both moments and the tail bound empirically.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SketchBank", "create_bank", "identity_bank", "child_seed", "apply",
           "apply_transpose"]


@dataclass
class SketchBank:
    b: int
    n: int
    count: int
    seed: int
    entries: np.ndarray = field(repr=False)   # (count, b, n), entries +-1/sqrt(b)
    cursor: int = 0

    def sub(self, l: int) -> np.ndarray:
        """The l-th sub-sketch (0-based), shape (b, n)."""
        return self.entries[l]

    @property
    def exhausted(self) -> bool:
        return self.cursor >= self.count

    def take(self) -> np.ndarray:
        """Return the next unused sub-sketch and advance the cursor."""
        if self.exhausted:
            raise IndexError(f"sketch bank exhausted after {self.count} draws")
        R = self.entries[self.cursor]
        self.cursor += 1
        return R


def create_bank(b: int, n: int, count: int, seed) -> SketchBank:
    """Draw a bank of `count` sign sketches, reproducible from `seed`.

    `seed` may be an int or a numpy SeedSequence (used for child banks).
    """
    if b < 1 or count < 1:
        raise ValueError("b and count must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    signs = rng.integers(0, 2, size=(count, b, n), dtype=np.int8)
    entries = (2.0 * signs - 1.0) / np.sqrt(b)
    seed_int = seed if isinstance(seed, (int, np.integer)) else -1
    return SketchBank(b=b, n=n, count=count, seed=int(seed_int), entries=entries)


def identity_bank(n: int, count: int) -> SketchBank:
    """Bank of `count` identity sketches (b = n, R_l = I).

    With the identity sketch R^T R v = v exactly, so the estimator noise
    vanishes; used to isolate maintenance algebra from sketch variance in
    differential tests.  The entries are a broadcast view of one eye(n), so
    the bank costs O(n^2) memory regardless of count.
    """
    if count < 1 or n < 1:
        raise ValueError("n and count must be >= 1")
    entries = np.broadcast_to(np.eye(n), (count, n, n))
    return SketchBank(b=n, n=n, count=count, seed=-1, entries=entries)


def child_seed(root_seed: int, index: int) -> np.random.SeedSequence:
    """Deterministic per-rebuild seed derived from the run's root seed."""
    return np.random.SeedSequence(entropy=int(root_seed), spawn_key=(int(index),))


def apply(R_l: np.ndarray, v: np.ndarray) -> np.ndarray:
    """R_l v  (b-vector from an n-vector)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (R_l.shape[1],):
        raise ValueError(f"vector has shape {v.shape}, sketch needs ({R_l.shape[1]},)")
    return R_l @ v


def apply_transpose(R_l: np.ndarray, w: np.ndarray) -> np.ndarray:
    """R_l^T w  (n-vector from a b-vector); exact adjoint of `apply`."""
    w = np.asarray(w, dtype=float)
    if w.shape != (R_l.shape[0],):
        raise ValueError(f"vector has shape {w.shape}, sketch needs ({R_l.shape[0]},)")
    return R_l.T @ w
