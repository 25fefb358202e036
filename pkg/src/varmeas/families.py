"""Certified sequence families of measures, functions and multifunctions.

A family evaluates lazily at any index n >= 1 and carries closed-form decay
certificates drawn from a fixed grammar, so limit statements become finite
checks over a horizon plus certified tails.  Evaluation is a pure function
of (family spec, n); families are safe to evaluate far beyond the horizon,
which the checkers exploit to probe "eventually" behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .measure_core import (
    AtomFunction,
    AtomSpace,
    SignedMeasure,
    jordan,
    sup_set_gap,
    total_variation_distance,
)

DEFAULT_HORIZON = 512
DEFAULT_DELTA_GRID = (1e-1, 1e-2, 1e-3)


def probe_indices(horizon: int) -> list[int]:
    """Sparse indices beyond the horizon used to test 'eventually' claims."""
    probes = [2 * horizon, 4 * horizon, 16 * horizon, 256 * horizon, 1 << 20]
    return sorted({p for p in probes if p > horizon})


@dataclass(frozen=True)
class DecayCertificate:
    """Closed-form nonincreasing bound n -> c * n^-p, c * q^n, or 0."""

    kind: str  # "power" | "geometric" | "zero"
    c: float = 0.0
    p: float = 1.0
    q: float = 0.5
    description: str = ""

    def __post_init__(self):
        if self.kind not in ("power", "geometric", "zero"):
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if self.c < 0:
            raise ValueError("certificate constant must be >= 0")
        if self.kind == "power" and self.p <= 0:
            raise ValueError("power certificate needs p > 0")
        if self.kind == "geometric" and not 0 < self.q < 1:
            raise ValueError("geometric certificate needs 0 < q < 1")

    def bound(self, n: int) -> float:
        if n < 1:
            raise ValueError("indices start at 1")
        if self.kind == "zero" or self.c == 0.0:
            return 0.0
        if self.kind == "power":
            return self.c * float(n) ** (-self.p)
        return self.c * self.q ** n

    def scale(self, k: float) -> "DecayCertificate":
        if k < 0:
            raise ValueError("scale factor must be >= 0")
        if k == 0.0 or self.kind == "zero":
            return DecayCertificate("zero", description=self.description)
        return replace(self, c=self.c * k)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "c": self.c, "description": self.description}
        if self.kind == "power":
            out["p"] = self.p
        elif self.kind == "geometric":
            out["q"] = self.q
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "DecayCertificate":
        return cls(kind=obj["kind"], c=float(obj.get("c", 0.0)), p=float(obj.get("p", 1.0)),
                   q=float(obj.get("q", 0.5)), description=obj.get("description", ""))


ZERO_CERT = DecayCertificate("zero", description="identically zero")


def power_cert(c: float, p: float = 1.0, description: str = "") -> DecayCertificate:
    return DecayCertificate("power", c=c, p=p, description=description)


@dataclass(frozen=True)
class MeasureFamily:
    """n -> SignedMeasure with a declared limit and optional decay certificates."""

    space: AtomSpace
    at_fn: Callable[[int], SignedMeasure] = field(compare=False)
    limit: SignedMeasure
    setwise_cert: DecayCertificate | None = None
    tv_cert: DecayCertificate | None = None
    nonneg: bool = False
    mass_bound: float | None = None  # certified sup_n |m_n|(Omega), when known
    name: str = "measure-family"

    def at(self, n: int) -> SignedMeasure:
        if n < 1:
            raise ValueError("indices start at 1")
        m = self.at_fn(n)
        if m.space.n_atoms != self.space.n_atoms:
            raise ValueError("family produced a measure on the wrong space")
        return m

    def verify_certificates(self, horizon: int = DEFAULT_HORIZON) -> list[str]:
        """Empirically check every attached certificate on [1, horizon] + probes."""
        bad = []
        for n in list(range(1, horizon + 1)) + probe_indices(horizon):
            mn = self.at(n)
            if self.setwise_cert is not None:
                gap = sup_set_gap(mn, self.limit)
                if gap > self.setwise_cert.bound(n) + 1e-12:
                    bad.append(f"setwise cert violated at n={n}: {gap}")
            if self.tv_cert is not None:
                tv = total_variation_distance(mn, self.limit)
                if tv > self.tv_cert.bound(n) + 1e-12:
                    bad.append(f"tv cert violated at n={n}: {tv}")
            if self.nonneg and not mn.is_nonnegative():
                bad.append(f"nonneg claim violated at n={n}")
        return bad

    def jordan_parts(self) -> tuple["MeasureFamily", "MeasureFamily"]:
        """The (m_n^+) and (m_n^-) families; a tv certificate transfers.

        |m_n^+ - m^+|(E) <= |m_n - m|(E) for every E, so a tv certificate
        on the parent bounds the parts' setwise gaps (and their tv, since
        on atoms |pos(w1) - pos(w2)| <= |w1 - w2| pointwise).
        """
        lim = jordan(self.limit)
        inherited = self.tv_cert

        def pos_at(n, _self=self):
            return jordan(_self.at(n)).pos

        def neg_at(n, _self=self):
            return jordan(_self.at(n)).neg

        pos = MeasureFamily(self.space, pos_at, lim.pos, setwise_cert=inherited,
                            tv_cert=inherited, nonneg=True, mass_bound=self.mass_bound,
                            name=self.name + "+")
        neg = MeasureFamily(self.space, neg_at, lim.neg, setwise_cert=inherited,
                            tv_cert=inherited, nonneg=True, mass_bound=self.mass_bound,
                            name=self.name + "-")
        return pos, neg

    def abs_family(self) -> "MeasureFamily":
        """The total-variation measures |m_n| (atomwise absolute weights)."""
        inherited = self.tv_cert

        def abs_at(n, _self=self):
            return _self.at(n).abs()

        return MeasureFamily(self.space, abs_at, self.limit.abs(), setwise_cert=inherited,
                             tv_cert=inherited, nonneg=True, mass_bound=self.mass_bound,
                             name="|" + self.name + "|")

    def shifted(self, base: SignedMeasure) -> "MeasureFamily":
        """The family base + m_n (gap certificates are translation invariant)."""

        def at(n, _self=self):
            return base + _self.at(n)

        nonneg = self.nonneg and base.is_nonnegative()
        mass = None if self.mass_bound is None else self.mass_bound + base.total_variation()
        return MeasureFamily(self.space, at, base + self.limit, setwise_cert=self.setwise_cert,
                             tv_cert=self.tv_cert, nonneg=nonneg, mass_bound=mass,
                             name=self.name + "+base")


@dataclass(frozen=True)
class FunctionFamily:
    """n -> AtomFunction with a declared limit and decay metadata."""

    space: AtomSpace
    at_fn: Callable[[int], AtomFunction] = field(compare=False)
    limit: AtomFunction
    inmeasure_cert: DecayCertificate | None = None
    delta_grid: tuple[float, ...] = DEFAULT_DELTA_GRID
    deviation_cert: DecayCertificate | None = None  # bounds sup_t |f_n(t) - f(t)|
    sup_norm_bound: float | None = None  # certified sup_n ||f_n||_inf, when known
    is_constant: bool = False
    name: str = "function-family"

    def at(self, n: int) -> AtomFunction:
        if n < 1:
            raise ValueError("indices start at 1")
        f = self.at_fn(n)
        if f.space.n_atoms != self.space.n_atoms:
            raise ValueError("family produced a function on the wrong space")
        return f

    def verify_certificates(self, horizon: int = DEFAULT_HORIZON) -> list[str]:
        bad = []
        for n in list(range(1, horizon + 1)) + probe_indices(horizon):
            fn = self.at(n)
            if self.deviation_cert is not None:
                dev = (fn - self.limit).sup_norm()
                if dev > self.deviation_cert.bound(n) + 1e-12:
                    bad.append(f"deviation cert violated at n={n}: {dev}")
            if self.sup_norm_bound is not None and fn.sup_norm() > self.sup_norm_bound + 1e-12:
                bad.append(f"sup-norm bound violated at n={n}")
        return bad


@dataclass(frozen=True)
class MultiFamily:
    """n -> (atom -> polytope) map with a declared limit map.

    The values are MultiMap objects (see the set-valued integration module);
    this container only stores the lazy evaluation rule and certificates.
    """

    space: AtomSpace
    dim: int
    at_fn: Callable[[int], object] = field(compare=False)
    limit: object = None
    equiconv_cert: DecayCertificate | None = None
    support_gap_cert: DecayCertificate | None = None  # bounds sup_{t,u} |s(u,G_n)-s(u,G)|
    radius_bound: float | None = None  # certified sup over n, atoms of body radius
    is_constant: bool = False
    is_singleton: bool = False
    name: str = "multi-family"

    def at(self, n: int):
        if n < 1:
            raise ValueError("indices start at 1")
        return self.at_fn(n)


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------


def constant_measure_family(m: SignedMeasure, name: str = "constant") -> MeasureFamily:
    return MeasureFamily(m.space, lambda n: m, m, setwise_cert=ZERO_CERT, tv_cert=ZERO_CERT,
                         nonneg=m.is_nonnegative(), mass_bound=m.total_variation(), name=name)


def constant_function_family(f: AtomFunction, name: str = "constant-f") -> FunctionFamily:
    return FunctionFamily(f.space, lambda n: f, f, deviation_cert=ZERO_CERT,
                          sup_norm_bound=f.sup_norm(), is_constant=True, name=name)


def convex_mix(m: SignedMeasure, mu: SignedMeasure, rate: DecayCertificate,
               name: str = "convex-mix") -> MeasureFamily:
    """m_n = (1 - a_n) m + a_n mu with a_n = min(1, rate(n)); limit m."""
    if not (m.is_nonnegative() and mu.is_nonnegative()):
        raise ValueError("convex_mix requires nonnegative measures")
    if m.space.n_atoms != mu.space.n_atoms:
        raise ValueError("space mismatch")
    gap = total_variation_distance(mu, m)

    def at(n):
        a = min(1.0, rate.bound(n))
        return SignedMeasure(m.space, (1.0 - a) * m.weights + a * mu.weights)

    cert = rate.scale(gap)
    return MeasureFamily(m.space, at, m, setwise_cert=cert, tv_cert=cert, nonneg=True,
                         mass_bound=max(m.total_variation(), mu.total_variation()), name=name)


def perturbation_family(m: SignedMeasure, direction: SignedMeasure, rate: DecayCertificate,
                        name: str = "perturbation") -> MeasureFamily:
    """m_n = m + min(1, rate(n)) * direction; limit m (signed allowed)."""
    if m.space.n_atoms != direction.space.n_atoms:
        raise ValueError("space mismatch")

    def at(n):
        a = min(1.0, rate.bound(n))
        return SignedMeasure(m.space, m.weights + a * direction.weights)

    # nonnegativity for every a in (0, a1] is linear in a, so endpoints decide
    a1 = min(1.0, rate.bound(1))
    nonneg = m.is_nonnegative() \
        and bool(np.all(m.weights + a1 * np.minimum(direction.weights, 0.0) >= 0.0))
    cert = rate.scale(direction.total_variation())
    return MeasureFamily(m.space, at, m, setwise_cert=cert, tv_cert=cert, nonneg=nonneg,
                         mass_bound=m.total_variation() + a1 * direction.total_variation(),
                         name=name)


def function_mix(f: AtomFunction, g: AtomFunction, rate: DecayCertificate,
                 delta_grid: tuple[float, ...] = DEFAULT_DELTA_GRID,
                 m_ref: SignedMeasure | None = None,
                 name: str = "function-mix") -> FunctionFamily:
    """f_n = f + min(1, rate(n)) g; limit f."""
    if f.space.n_atoms != g.space.n_atoms:
        raise ValueError("space mismatch")
    if f.values.shape != g.values.shape:
        raise ValueError("dimension mismatch")

    def at(n):
        a = min(1.0, rate.bound(n))
        return AtomFunction(f.space, f.values + a * g.values)

    dev = rate.scale(g.sup_norm())
    inmeas = None
    if m_ref is not None and delta_grid:
        # Markov: m{ a_n |g| > delta } <= a_n * integral |g| d m / delta
        gint = float(np.abs(m_ref.weights) @ np.abs(g.values)) if not g.is_vector \
            else float(np.abs(m_ref.weights) @ np.max(np.abs(g.values), axis=1))
        inmeas = rate.scale(gint / min(delta_grid))
    return FunctionFamily(f.space, at, f, inmeasure_cert=inmeas, delta_grid=delta_grid,
                          deviation_cert=dev,
                          sup_norm_bound=f.sup_norm() + min(1.0, rate.bound(1)) * g.sup_norm(),
                          name=name)


def rademacher_family(level: int) -> MeasureFamily:
    """Signed measures m_k(E) = integral over E of the k-th Rademacher function.

    Atoms are the 2^level dyadic cells of [0,1].  |m_k|(Omega) = 1 for every
    k <= level while m_k vanishes on every set of any coarser dyadic algebra,
    so the family separates setwise-on-subalgebra behaviour from total
    variation.  Indices above `level` are clamped (the construction is exact
    only down to the atom width).
    """
    if not 1 <= level <= 16:
        raise ValueError("level must be in [1, 16]")
    n = 1 << level
    space = AtomSpace(n)

    def at(k):
        kk = min(max(k, 1), level)
        block = 1 << (level - kk)
        idx = np.arange(n) // block
        signs = np.where(idx % 2 == 0, 1.0, -1.0)
        return SignedMeasure(space, signs * (1.0 / n))

    zero = SignedMeasure(space, np.zeros(n))
    return MeasureFamily(space, at, zero, nonneg=False, mass_bound=1.0,
                         name=f"rademacher-{level}")


def dyadic_coarsen(m: SignedMeasure, level: int) -> SignedMeasure:
    """Project a measure on 2^L dyadic atoms onto the 2^level coarser cells."""
    n = m.space.n_atoms
    coarse = 1 << level
    if n % coarse != 0:
        raise ValueError("atom count not divisible by coarse cell count")
    block = n // coarse
    sums = m.weights.reshape(coarse, block).sum(axis=1)
    return SignedMeasure(AtomSpace(coarse), sums)


def mass_escape_family(space: AtomSpace, power: float = 1.0,
                       ) -> tuple[MeasureFamily, FunctionFamily]:
    """The uniform-integrability counterexample: height n^power, mass n^-power.

    f_n = n^power on the atom (n mod n_atoms) and 0 elsewhere; m_n puts mass
    n^-power on the same atom, so every integral of |f_n| equals 1 while the
    measures vanish in total variation.
    """
    if space.n_atoms < 2:
        raise ValueError("mass escape needs at least 2 atoms")
    if power <= 0:
        raise ValueError("power must be > 0")
    n_atoms = space.n_atoms

    def m_at(n):
        w = np.zeros(n_atoms)
        w[n % n_atoms] = float(n) ** (-power)
        return SignedMeasure(space, w)

    def f_at(n):
        v = np.zeros(n_atoms)
        v[n % n_atoms] = float(n) ** power
        return AtomFunction(space, v)

    zero_m = SignedMeasure(space, np.zeros(n_atoms))
    zero_f = AtomFunction(space, np.zeros(n_atoms))
    cert = power_cert(1.0, power, "escaping atom mass")
    mf = MeasureFamily(space, m_at, zero_m, setwise_cert=cert, tv_cert=cert, nonneg=True,
                       mass_bound=1.0, name="mass-escape")
    ff = FunctionFamily(space, f_at, zero_f, name="mass-escape-f")
    return mf, ff


def vacuous_uac_family(space: AtomSpace) -> tuple[MeasureFamily, FunctionFamily]:
    """Unit atom weights with f_n identically n: u.a.c. holds vacuously
    (no nonempty set has measure < 1) while sup_n of the integrals diverges."""
    ones = SignedMeasure(space, np.ones(space.n_atoms))
    mf = constant_measure_family(ones, name="vacuous-uac-m")

    def f_at(n):
        return AtomFunction(space, np.full(space.n_atoms, float(n)))

    zero_f = AtomFunction(space, np.zeros(space.n_atoms))
    ff = FunctionFamily(space, f_at, zero_f, name="vacuous-uac-f")
    return mf, ff
