"""Finite measurable spaces, signed measures, and exact gap functionals.

Atoms are indexed 0..n-1; the sigma-algebra is the full power set, with
measurable sets encoded as bitmasks.  Closed-form fast paths (Jordan split,
total variation, sup-over-sets gap) are paired with brute-force subset
enumerations from :mod:`varmeas.kernels` that serve as independent oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels

ENUM_ATOM_LIMIT = 24  # 2^24 subset sweeps are the desk-scale ceiling
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class AtomSpace:
    """A finite atom space; the sigma-algebra is implicitly the power set."""

    n_atoms: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")
        if self.labels is not None and len(self.labels) != self.n_atoms:
            raise ValueError("labels must match n_atoms")

    @property
    def full_mask(self) -> int:
        return (1 << self.n_atoms) - 1


@dataclass(frozen=True)
class MeasurableSet:
    space: AtomSpace
    mask: int

    def __post_init__(self):
        if not 0 <= self.mask <= self.space.full_mask:
            raise ValueError("bitmask exceeds atom space width")

    @classmethod
    def from_indices(cls, space: AtomSpace, indices) -> "MeasurableSet":
        mask = 0
        for i in indices:
            if not 0 <= i < space.n_atoms:
                raise ValueError(f"atom index {i} out of range")
            mask |= 1 << i
        return cls(space, mask)

    @classmethod
    def full(cls, space: AtomSpace) -> "MeasurableSet":
        return cls(space, space.full_mask)

    @classmethod
    def empty(cls, space: AtomSpace) -> "MeasurableSet":
        return cls(space, 0)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.space.n_atoms) if self.mask >> i & 1)

    def indicator(self) -> np.ndarray:
        out = np.zeros(self.space.n_atoms, dtype=np.float64)
        for i in self.indices:
            out[i] = 1.0
        return out

    def complement(self) -> "MeasurableSet":
        return MeasurableSet(self.space, self.space.full_mask ^ self.mask)

    def union(self, other: "MeasurableSet") -> "MeasurableSet":
        _same_space(self.space, other.space)
        return MeasurableSet(self.space, self.mask | other.mask)

    def intersection(self, other: "MeasurableSet") -> "MeasurableSet":
        _same_space(self.space, other.space)
        return MeasurableSet(self.space, self.mask & other.mask)

    def is_disjoint(self, other: "MeasurableSet") -> bool:
        return (self.mask & other.mask) == 0

    def to_json(self) -> list[int]:
        return list(self.indices)


@dataclass(frozen=True)
class SignedMeasure:
    """A finite signed measure as a weight per atom (finite values)."""

    space: AtomSpace
    weights: np.ndarray = field(compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.space.n_atoms,):
            raise ValueError("weights shape must equal (n_atoms,)")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def eval(self, A: MeasurableSet) -> float:
        _same_space(self.space, A.space)
        total = 0.0
        m = A.mask
        i = 0
        w = self.weights
        while m:
            if m & 1:
                total += w[i]
            m >>= 1
            i += 1
        return total

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def is_nonnegative(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.weights >= -tol))

    def abs(self) -> "SignedMeasure":
        return SignedMeasure(self.space, np.abs(self.weights))

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        _same_space(self.space, other.space)
        return SignedMeasure(self.space, self.weights + other.weights)

    def __sub__(self, other: "SignedMeasure") -> "SignedMeasure":
        _same_space(self.space, other.space)
        return SignedMeasure(self.space, self.weights - other.weights)

    def scaled(self, a: float) -> "SignedMeasure":
        return SignedMeasure(self.space, a * self.weights)

    def to_json(self) -> dict:
        return {"atoms": self.space.n_atoms, "weights": [float(x) for x in self.weights]}

    @classmethod
    def from_json(cls, obj: dict) -> "SignedMeasure":
        return cls(AtomSpace(int(obj["atoms"])), np.asarray(obj["weights"], dtype=np.float64))


@dataclass(frozen=True)
class JordanPair:
    pos: SignedMeasure
    neg: SignedMeasure


@dataclass(frozen=True)
class HahnSplit:
    p_set: MeasurableSet
    n_set: MeasurableSet


@dataclass(frozen=True)
class AtomFunction:
    """A scalar or R^d-valued function on the atoms."""

    space: AtomSpace
    values: np.ndarray = field(compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim not in (1, 2) or v.shape[0] != self.space.n_atoms:
            raise ValueError("values must be (n_atoms,) or (n_atoms, d)")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2

    @property
    def dim(self) -> int:
        return self.values.shape[1] if self.is_vector else 1

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def abs(self) -> "AtomFunction":
        return AtomFunction(self.space, np.abs(self.values))

    def __sub__(self, other: "AtomFunction") -> "AtomFunction":
        _same_space(self.space, other.space)
        if self.values.shape != other.values.shape:
            raise ValueError("dimension mismatch")
        return AtomFunction(self.space, self.values - other.values)


def _same_space(a: AtomSpace, b: AtomSpace) -> None:
    if a.n_atoms != b.n_atoms:
        raise ValueError(f"space mismatch: {a.n_atoms} atoms vs {b.n_atoms}")


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------


def jordan(m: SignedMeasure) -> JordanPair:
    """Minimal decomposition m = pos - neg with disjoint supports."""
    w = m.weights
    return JordanPair(SignedMeasure(m.space, np.maximum(w, 0.0)),
                      SignedMeasure(m.space, np.maximum(-w, 0.0)))


def hahn(m: SignedMeasure) -> HahnSplit:
    """Hahn split; zero-weight atoms go to the positive set."""
    mask_p = 0
    for i, w in enumerate(m.weights):
        if w >= 0.0:
            mask_p |= 1 << i
    p = MeasurableSet(m.space, mask_p)
    return HahnSplit(p, p.complement())


def total_variation_distance(m1: SignedMeasure, m2: SignedMeasure) -> float:
    """|m1 - m2|(Omega)."""
    _same_space(m1.space, m2.space)
    return float(np.sum(np.abs(m1.weights - m2.weights)))


def sup_set_gap(m1: SignedMeasure, m2: SignedMeasure) -> float:
    """Exact sup over all sets A of |m1(A) - m2(A)| (closed form)."""
    _same_space(m1.space, m2.space)
    nu = m1.weights - m2.weights
    return float(max(np.sum(np.maximum(nu, 0.0)), np.sum(np.maximum(-nu, 0.0))))


def integrate(f: AtomFunction, m: SignedMeasure, A: MeasurableSet | None = None):
    """sum over A of f[i] * w[i]; scalar f -> float, vector f -> ndarray."""
    _same_space(f.space, m.space)
    if A is None:
        wa = m.weights
    else:
        _same_space(m.space, A.space)
        wa = m.weights * A.indicator()
    if f.is_vector:
        return wa @ f.values
    return float(wa @ f.values)


# --------------------------------------------------------------------------
# enumerative oracles (independent route; gated at 24 atoms)
# --------------------------------------------------------------------------


def sup_set_gap_enumerated(m1: SignedMeasure, m2: SignedMeasure) -> tuple[float, MeasurableSet]:
    """Brute-force sup over all 2^n sets of |m1(A) - m2(A)| with a witness set."""
    _same_space(m1.space, m2.space)
    value, mask = kernels.max_abs_subset_sum(m1.weights - m2.weights)
    return value, MeasurableSet(m1.space, int(mask))


def total_variation_enumerated(m: SignedMeasure) -> float:
    """|m|(Omega) as the sup over two-block partitions of sum |m(E_i)|.

    The sup over all finite measurable partitions is attained by a
    two-block partition, so enumerating complement pairs is exhaustive.
    """
    return kernels.two_block_variation(m.weights)


def sign_function(m: SignedMeasure) -> AtomFunction:
    """The +/-1 atom function aligned with the sign of the weights.

    It attains sup over ||f||_inf <= 1 of integral f dm = |m|(Omega).
    """
    s = np.where(m.weights >= 0.0, 1.0, -1.0)
    return AtomFunction(m.space, s)


@lru_cache(maxsize=32)
def subset_matrix(n_atoms: int) -> np.ndarray:
    """(2^n, n) dense 0/1 membership matrix, row index = bitmask."""
    if n_atoms > 20:
        raise ValueError("dense subset matrix gated at 20 atoms")
    masks = np.arange(1 << n_atoms, dtype=np.uint32)
    return ((masks[:, None] >> np.arange(n_atoms, dtype=np.uint32)[None, :]) & 1).astype(np.float64)


def all_sets(space: AtomSpace):
    """Iterate every measurable set (gated)."""
    if space.n_atoms > ENUM_ATOM_LIMIT:
        raise ValueError("exhaustive set iteration gated at 24 atoms")
    for mask in range(1 << space.n_atoms):
        yield MeasurableSet(space, mask)
