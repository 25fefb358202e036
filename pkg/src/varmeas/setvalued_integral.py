"""Set-valued integration on finite spaces via support functions, with the
multivalued convergence checkers and their vector specializations.

The integral of a polytope-valued map against a nonnegative measure is
represented by its support values: s(u, M(A)) = integral_A s(u, G(.)) dm,
computed as exact finite sums.  Sublinearity of the resulting support
vector is the finite-dimensional certificate standing in for "the integral
is a weakly compact convex set", and it is verified, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .convex_geom import (
    DirectionGrid,
    Polytope,
    SupportVector,
    default_grid,
    minkowski_combine,
    support,
    support_values,
)
from .families import (
    ZERO_CERT,
    DecayCertificate,
    FunctionFamily,
    MeasureFamily,
    MultiFamily,
    constant_measure_family,
    mass_escape_family,
    probe_indices,
)
from .integrability import (
    EPSILON_GRID,
    ZERO_TOL,
    _effective_tolerance,
    _setwise_hypothesis,
    check_uac,
)
from .measure_core import AtomFunction, AtomSpace, MeasurableSet, SignedMeasure
from .reports import FAILS, HOLDS, INCONCLUSIVE, HypothesisResult, TheoremReport

SUBLINEARITY_TOL = 1e-9
EXHAUSTIVE_SET_LIMIT = 12


@dataclass(frozen=True)
class MultiMap:
    """atom -> nonempty polytope, uniform dimension."""

    space: AtomSpace
    dim: int
    bodies: tuple[Polytope, ...] = field(compare=False)

    def __post_init__(self):
        if len(self.bodies) != self.space.n_atoms:
            raise ValueError("one body per atom required")
        if any(b.dim != self.dim for b in self.bodies):
            raise ValueError("uniform dimension required")

    @classmethod
    def constant(cls, space: AtomSpace, body: Polytope) -> "MultiMap":
        return cls(space, body.dim, tuple(body for _ in range(space.n_atoms)))

    @classmethod
    def from_points(cls, space: AtomSpace, points) -> "MultiMap":
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[0] != space.n_atoms:
            raise ValueError("one point per atom required")
        return cls(space, pts.shape[1], tuple(Polytope.point(p) for p in pts))

    def body_at(self, i: int) -> Polytope:
        return self.bodies[i]

    def radius(self) -> float:
        return max(b.radius() for b in self.bodies)

    @property
    def is_singleton(self) -> bool:
        return all(b.canonicalize().vertices.shape[0] == 1 for b in self.bodies)

    def scaled(self, a: float) -> "MultiMap":
        return MultiMap(self.space, self.dim, tuple(b.scaled(a) for b in self.bodies))

    def support_matrix(self, grid: DirectionGrid) -> np.ndarray:
        """(n_atoms, M) matrix of s(u_j, body_i)."""
        return np.stack([support_values(b, grid) for b in self.bodies])

    def to_json(self) -> dict:
        return {"atoms": self.space.n_atoms, "dim": self.dim,
                "bodies": [b.to_json() for b in self.bodies]}

    @classmethod
    def from_json(cls, obj: dict) -> "MultiMap":
        return cls(AtomSpace(int(obj["atoms"])), int(obj["dim"]),
                   tuple(Polytope.from_json(b) for b in obj["bodies"]))


def scalar_integrand(u, G: MultiMap) -> AtomFunction:
    """The scalar function t -> s(u, G(t))."""
    return AtomFunction(G.space, np.array([support(u, b) for b in G.bodies]))


def sublinearity_defect(G: MultiMap, weights: np.ndarray, n_pairs: int = 64,
                        seed: int = 7) -> float:
    """Max positive defect h(u+v) - h(u) - h(v) over sampled direction pairs,
    where h(u) = sum_i weights[i] * s(u, G_i) evaluated directly at u, v, u+v."""
    grid = default_grid(G.dim)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, grid.size, size=(n_pairs, 2))
    worst = 0.0
    for j, k in idx:
        u = grid.dirs[j]
        v = grid.dirs[k]
        uv = u + v
        if np.linalg.norm(uv) < 1e-9:
            continue
        h = [float(weights @ np.array([support(x, b) for b in G.bodies]))
             for x in (uv, u, v)]
        worst = max(worst, h[0] - h[1] - h[2])
    return worst


def pettis_integral(G: MultiMap, m: SignedMeasure, A: MeasurableSet | None,
                    grid: DirectionGrid, verify: bool = True) -> SupportVector:
    """Support values of the set-valued integral over A: exact finite sums.

    Nonnegative measures only: signed weights break sublinearity of the
    candidate support function, which is exactly what the verification
    step would flag.
    """
    if G.space.n_atoms != m.space.n_atoms:
        raise ValueError("space mismatch")
    if not m.is_nonnegative():
        raise ValueError("negative measure")
    wa = m.weights if A is None else m.weights * A.indicator()
    values = wa @ G.support_matrix(grid)
    if verify:
        defect = sublinearity_defect(G, wa)
        if defect > SUBLINEARITY_TOL * max(1.0, float(np.abs(values).max())):
            raise RuntimeError(f"sublinearity violated (defect {defect}); "
                               "precondition or implementation bug")
    return SupportVector(grid, values)


def pettis_body(G: MultiMap, m: SignedMeasure, A: MeasurableSet | None = None) -> Polytope:
    """Materialized integral body for d <= 2 (Minkowski combination)."""
    wa = m.weights if A is None else m.weights * A.indicator()
    if not m.is_nonnegative():
        raise ValueError("negative measure")
    live = [(float(w), b) for w, b in zip(wa, G.bodies)]
    coeffs = [w for w, _ in live]
    bodies = [b for _, b in live]
    if all(c == 0.0 for c in coeffs):
        return Polytope(G.dim, np.zeros((1, G.dim)))
    return minkowski_combine(coeffs, bodies)


class SetIntegral:
    """Lazy per-set support vectors of a fixed (multifunction, measure) pair."""

    def __init__(self, G: MultiMap, m: SignedMeasure, grid: DirectionGrid | None = None):
        self.G = G
        self.m = m
        self.grid = grid or default_grid(G.dim)
        self._cache: dict[int, SupportVector] = {}

    def at(self, A: MeasurableSet) -> SupportVector:
        if A.mask not in self._cache:
            self._cache[A.mask] = pettis_integral(self.G, self.m, A, self.grid, verify=False)
        return self._cache[A.mask]

    def materialized(self, A: MeasurableSet) -> Polytope | None:
        if self.G.dim > 2:
            return None
        return pettis_body(self.G, self.m, A)


# --------------------------------------------------------------------------
# multifunction family constructors
# --------------------------------------------------------------------------


def constant_multi_family(G: MultiMap, name: str = "constant-G") -> MultiFamily:
    return MultiFamily(G.space, G.dim, lambda n: G, G, support_gap_cert=ZERO_CERT,
                       radius_bound=G.radius(), is_constant=True,
                       is_singleton=G.is_singleton, name=name)


def scaled_multi_family(G: MultiMap, rate: DecayCertificate,
                        name: str = "scaled-G") -> MultiFamily:
    """Gamma_n = (1 + rate(n)) Gamma; the support gap is rate(n) |s| <= rate(n) R."""

    def at(n):
        return G.scaled(1.0 + rate.bound(n))

    r = G.radius()
    return MultiFamily(G.space, G.dim, at, G, support_gap_cert=rate.scale(r),
                       radius_bound=r * (1.0 + rate.bound(1)),
                       is_singleton=G.is_singleton, name=name)


def singleton_multi_family(ff: FunctionFamily, name: str | None = None) -> MultiFamily:
    """View a vector-valued function family as a singleton multifunction family."""
    if not ff.limit.is_vector:
        raise ValueError("vector-valued function family required")
    dim = ff.limit.dim
    space = ff.space

    def at(n):
        return MultiMap.from_points(space, ff.at(n).values)

    limit = MultiMap.from_points(space, ff.limit.values)
    rb = None if ff.sup_norm_bound is None else ff.sup_norm_bound * np.sqrt(dim)
    # |<u, f_n - f>| <= ||f_n - f||_2 <= sqrt(d) * componentwise deviation
    sg = None if ff.deviation_cert is None else ff.deviation_cert.scale(np.sqrt(dim))
    return MultiFamily(space, dim, at, limit, support_gap_cert=sg, radius_bound=rb,
                       is_constant=ff.is_constant, is_singleton=True,
                       name=name or ff.name + "-singleton")


def multi_mass_escape(space: AtomSpace, dim: int = 2,
                      ) -> tuple[MultiFamily, MeasureFamily]:
    """Multivalued escaping-mass family: a body of radius n on the active atom."""
    mf, _ = mass_escape_family(space)
    unit = Polytope.box(-np.ones(dim), np.ones(dim)) if dim > 1 else Polytope.interval(-1, 1)
    tiny = Polytope.point(np.zeros(dim))

    def at(n):
        bodies = [unit.scaled(float(n)) if i == n % space.n_atoms else tiny
                  for i in range(space.n_atoms)]
        return MultiMap(space, dim, tuple(bodies))

    limit = MultiMap.constant(space, tiny)
    gf = MultiFamily(space, dim, at, limit, name="multi-mass-escape")
    return gf, mf


# --------------------------------------------------------------------------
# hypothesis machinery
# --------------------------------------------------------------------------


def _envelope_family(MF: MultiFamily, grid: DirectionGrid) -> FunctionFamily:
    """The pointwise worst-direction envelope t -> max_u |s(u, Gamma_n(t))|."""

    def at(n):
        S = MF.at(n).support_matrix(grid)
        return AtomFunction(MF.space, np.max(np.abs(S), axis=1))

    S_lim = MF.limit.support_matrix(grid)
    limit = AtomFunction(MF.space, np.max(np.abs(S_lim), axis=1))
    return FunctionFamily(MF.space, at, limit, sup_norm_bound=MF.radius_bound,
                          name=MF.name + "-envelope")


def check_uac_scalar(MF: MultiFamily, mf: MeasureFamily, epsilon: float,
                     horizon: int = 512, grid: DirectionGrid | None = None):
    """Uniform absolute continuity of the scalar integrals, uniformly over the
    direction ball:  'holds' through the envelope over-approximation,
    'fails' through a per-direction exact witness."""
    grid = grid or default_grid(MF.dim)
    env = _envelope_family(MF, grid)
    cert = check_uac(env, mf, epsilon, horizon)
    if cert.verdict != FAILS:
        details = dict(cert.details)
        details["via"] = "worst-direction envelope"
        return replace(cert, details=details)
    # refine the envelope witness to an explicit direction
    w = dict(cert.witness or {})
    n = w["n"]
    A = MeasurableSet.from_indices(MF.space, w["atoms"])
    S = MF.at(n).support_matrix(grid)
    wa = mf.at(n).weights * A.indicator()
    per_dir = np.abs(S).T @ wa  # integral_A |s(u, G_n)| dm_n per direction
    j = int(np.argmax(per_dir))
    if per_dir[j] >= epsilon:
        w["direction_index"] = j
        w["value"] = float(per_dir[j])
        return replace(cert, witness=w, details={"via": "per-direction refinement"})
    return replace(cert, verdict=INCONCLUSIVE,
                   details={"via": "envelope witness did not survive per-direction check"})


def equiconvergence_curves(MF: MultiFamily, mf: MeasureFamily,
                           m_limit: SignedMeasure | None = None,
                           delta_grid: tuple[float, ...] = (1e-1, 1e-2, 1e-3),
                           horizon: int = 512,
                           grid: DirectionGrid | None = None):
    """Scalar equi-convergence in measure with respect to (m_n) and m:
    n -> sup_u max(m_n, m){ |s(u, G_n) - s(u, G)| > delta } per delta."""
    grid = grid or default_grid(MF.dim)
    m_limit = m_limit if m_limit is not None else mf.limit
    S_lim = MF.limit.support_matrix(grid)

    def values_at(n) -> tuple[dict[float, float], float]:
        D = np.abs(MF.at(n).support_matrix(grid) - S_lim)
        mn = mf.at(n).weights
        out = {}
        for delta in delta_grid:
            over = D > delta  # (atoms, M)
            out[delta] = float(np.maximum(mn @ over, m_limit.weights @ over).max(initial=0.0))
        return out, float(D.max(initial=0.0))

    ns = list(range(1, horizon + 1))
    probes = probe_indices(horizon)
    curves: dict[float, list] = {delta: [] for delta in delta_grid}
    sup_gap_ok = MF.support_gap_cert is not None
    for n in ns:
        vals, dmax = values_at(n)
        if sup_gap_ok and dmax > MF.support_gap_cert.bound(n) + 1e-12:
            sup_gap_ok = False
        for delta in delta_grid:
            curves[delta].append((n, vals[delta]))
    probe_vals = {}
    for p in probes:
        vals, dmax = values_at(p)
        probe_vals[p] = vals
        if sup_gap_ok and dmax > MF.support_gap_cert.bound(p) + 1e-12:
            sup_gap_ok = False
    ok = True
    detail = {}
    for delta in delta_grid:
        tail = [curves[delta][-1][1]] + [probe_vals[p][delta] for p in probes]
        cert_ok = False
        if MF.equiconv_cert is not None:
            cert_ok = all(v <= MF.equiconv_cert.bound(n) + 1e-12
                          for (n, v) in curves[delta]) and \
                all(probe_vals[p][delta] <= MF.equiconv_cert.bound(p) + 1e-12
                    for p in probes)
        zero_tail = max(tail) <= ZERO_TOL
        # a verified vanishing sup-gap certificate empties every exceedance
        # set once its bound drops below delta
        detail[str(delta)] = {"certified": cert_ok or sup_gap_ok, "zero_tail": zero_tail,
                              "residual": max(tail)}
        ok = ok and (cert_ok or zero_tail or sup_gap_ok)
    return (HOLDS if ok else FAILS), curves, detail


def check_equiconvergence(MF: MultiFamily, mf: MeasureFamily,
                          m_limit: SignedMeasure | None = None,
                          delta_grid: tuple[float, ...] = (1e-1, 1e-2, 1e-3),
                          horizon: int = 512, grid: DirectionGrid | None = None):
    verdict, curves, detail = equiconvergence_curves(MF, mf, m_limit, delta_grid,
                                                     horizon, grid)
    return verdict, curves


def _scalar_inmeasure_hypothesis(MF: MultiFamily, m: SignedMeasure, horizon: int,
                                 grid: DirectionGrid,
                                 delta_grid=(1e-1, 1e-2, 1e-3)) -> HypothesisResult:
    """s(u, Gamma_n) -> s(u, Gamma) in m-measure for every grid direction."""
    S_lim = MF.limit.support_matrix(grid)
    scan = list(range(1, horizon + 1)) + probe_indices(horizon)
    sup_gap_ok = MF.support_gap_cert is not None
    if sup_gap_ok:
        for n in scan:
            dmax = float(np.abs(MF.at(n).support_matrix(grid) - S_lim).max(initial=0.0))
            if dmax > MF.support_gap_cert.bound(n) + 1e-12:
                sup_gap_ok = False
                break

    def value(n, delta):
        D = np.abs(MF.at(n).support_matrix(grid) - S_lim)
        return float((m.weights @ (D > delta)).max(initial=0.0))

    ok = True
    detail = {"sup_gap_certified": sup_gap_ok}
    for delta in delta_grid:
        tail = [value(n, delta) for n in [horizon] + probe_indices(horizon)]
        zero_tail = max(tail) <= ZERO_TOL
        detail[str(delta)] = {"zero_tail": zero_tail, "residual": max(tail)}
        ok = ok and (zero_tail or sup_gap_ok)
    return HypothesisResult("scalar-inmeasure", HOLDS if ok else FAILS, detail)


def _integrability_hypothesis(MF: MultiFamily, mf: MeasureFamily, horizon: int,
                              grid: DirectionGrid) -> HypothesisResult:
    """Per-n Pettis integrability, asserted through the sublinearity certificate."""
    worst = 0.0
    for n in (1, max(1, horizon // 2), horizon):
        G = MF.at(n)
        defect = sublinearity_defect(G, mf.at(n).weights)
        worst = max(worst, defect)
    ok = worst <= SUBLINEARITY_TOL * max(1.0, MF.radius_bound or 1.0)
    return HypothesisResult("pettis-integrability-sublinearity",
                            HOLDS if ok else FAILS, {"max_defect": worst})


# --------------------------------------------------------------------------
# conclusion curves
# --------------------------------------------------------------------------


def _support_gap_matrix(MF: MultiFamily, mf: MeasureFamily, n: int,
                        grid: DirectionGrid, S_lim: np.ndarray,
                        w_lim: np.ndarray) -> np.ndarray:
    """(atoms, M) per-atom contributions s_n w_n - s w to the integral gap."""
    return MF.at(n).support_matrix(grid) * mf.at(n).weights[:, None] \
        - S_lim * w_lim[:, None]


def supset_gap_curve(MF: MultiFamily, mf: MeasureFamily, horizon: int,
                     grid: DirectionGrid | None = None,
                     A: MeasurableSet | None = None) -> list[tuple[int, float]]:
    """n -> sup over sets (all sets if A is None; closed form) and directions of
    |s(u, M_n(A)) - s(u, M(A))|  —  the grid lower bound of d_H, uniform in A."""
    grid = grid or default_grid(MF.dim)
    S_lim = MF.limit.support_matrix(grid)
    w_lim = mf.limit.weights
    ind = None if A is None else A.indicator()
    out = []
    for n in range(1, horizon + 1):
        D = _support_gap_matrix(MF, mf, n, grid, S_lim, w_lim)
        if ind is None:
            pos = np.maximum(D, 0.0).sum(axis=0)
            neg = np.maximum(-D, 0.0).sum(axis=0)
            gap = float(np.maximum(pos, neg).max(initial=0.0))
        else:
            gap = float(np.abs(ind @ D).max(initial=0.0))
        out.append((n, gap))
    return out


def supset_gap_enumerated(MF: MultiFamily, mf: MeasureFamily, n: int,
                          grid: DirectionGrid | None = None) -> float:
    """Brute-force oracle for the sup over all sets at one index (gated)."""
    grid = grid or default_grid(MF.dim)
    D = _support_gap_matrix(MF, mf, n, grid, MF.limit.support_matrix(grid),
                            mf.limit.weights)
    return kernels.max_set_gap_matrix(D)


def direction_gap_curve(MF: MultiFamily, mf: MeasureFamily, u,
                        A: MeasurableSet | None, horizon: int) -> list[tuple[int, float]]:
    """Per fixed direction: |integral_A s(u,G_n) dm_n - integral_A s(u,G) dm|.

    Deliberately routed through scalar_integrand and measure evaluation so it
    is an independent computation from the batched matrix path.
    """
    from .measure_core import integrate

    s_lim = scalar_integrand(u, MF.limit)
    base = integrate(s_lim, mf.limit, A)
    out = []
    for n in range(1, horizon + 1):
        v = integrate(scalar_integrand(u, MF.at(n)), mf.at(n), A)
        out.append((n, abs(v - base)))
    return out


# --------------------------------------------------------------------------
# theorem checkers
# --------------------------------------------------------------------------


def _multi_tail_bound(MF: MultiFamily, mf: MeasureFamily, horizon: int) -> float | None:
    """Certified bound on the horizon gap: sup-gap cert times mass plus the
    limit radius times the tv certificate (triangle split of the finite sums)."""
    if MF.support_gap_cert is None or mf.tv_cert is None or mf.mass_bound is None:
        return None
    r_lim = MF.limit.radius()
    return (MF.support_gap_cert.bound(horizon) * mf.mass_bound
            + r_lim * mf.tv_cert.bound(horizon))


def check_thmulti(MF: MultiFamily, mf: MeasureFamily, tol: float | None = None,
                  horizon: int = 512, grid: DirectionGrid | None = None,
                  theorem_id: str = "thmulti") -> TheoremReport:
    """Weak-sense multivalued limit: per-direction, per-set convergence of the
    set-valued integrals under u.a.c. + convergence in measure + setwise
    convergence; Pettis integrability of the limit is certified by
    sublinearity (the desk-scale content of the integrability theorem)."""
    grid = grid or default_grid(MF.dim)
    hyps = [
        _as_hypothesis("thmulti.j-uac-scalar-Gn",
                       check_uac_scalar(MF, mf, min(EPSILON_GRID), horizon, grid)),
        _scalar_inmeasure_hypothesis(MF, mf.limit, horizon, grid),
        _as_hypothesis("thmulti.jjj-uac-scalar-G",
                       check_uac_scalar(constant_multi_family(MF.limit), mf,
                                        min(EPSILON_GRID), horizon, grid)),
        _setwise_hyp("thmulti.jv-setwise", mf, horizon, "setwise"),
        _integrability_hypothesis(MF, mf, horizon, grid),
    ]
    curve = supset_gap_curve(MF, mf, horizon, grid)
    final_gap = curve[-1][1]
    meta = {"grid": grid.grid_id, "sup_over": "all sets and grid directions"}
    if MF.is_singleton:
        meta["specializes"] = "th2v (vector case, weak convergence)"
    if MF.is_constant:
        meta["specializes"] = "th3 (constant integrand)"
    tail = _multi_tail_bound(MF, mf, horizon)
    if tail is not None:
        meta["certified_tail_bound"] = tail
    tol, rule = _effective_tolerance(tol, tail)
    meta["tolerance_rule"] = rule
    return TheoremReport.build(theorem_id, f"{MF.name}/{mf.name}", hyps, curve,
                               final_gap, tol, meta)


def check_thmulti2(MF: MultiFamily, mf: MeasureFamily, tol: float | None = None,
                   horizon: int = 512, grid: DirectionGrid | None = None,
                   test_sets: list[MeasurableSet] | None = None,
                   theorem_id: str = "thmulti2") -> TheoremReport:
    """Strong-sense limit: d_H(M_n(A), M(A)) -> 0 uniformly in A, under scalar
    equi-convergence in measure and total-variation convergence."""
    grid = grid or default_grid(MF.dim)
    n_atoms = MF.space.n_atoms
    if n_atoms > EXHAUSTIVE_SET_LIMIT and test_sets is None:
        raise ValueError("above 12 atoms a declared family of test sets is required")
    equi_verdict, _, equi_detail = equiconvergence_curves(MF, mf, mf.limit,
                                                          horizon=horizon, grid=grid)
    limit_const = constant_multi_family(MF.limit)
    uac_limit_mn = check_uac_scalar(limit_const, mf, min(EPSILON_GRID), horizon, grid)
    uac_limit_m = check_uac_scalar(limit_const, constant_measure_family(mf.limit),
                                   min(EPSILON_GRID), horizon, grid)
    jjj_ok = uac_limit_mn.holds and uac_limit_m.holds
    hyps = [
        _as_hypothesis("thmulti2.j-uac-scalar-Gn",
                       check_uac_scalar(MF, mf, min(EPSILON_GRID), horizon, grid)),
        HypothesisResult("thmulti2.jj-equiconvergence", equi_verdict, equi_detail),
        HypothesisResult("thmulti2.jjj-uac-scalar-G", HOLDS if jjj_ok else FAILS,
                         {"against_mn": uac_limit_mn.verdict,
                          "against_m": uac_limit_m.verdict}),
        _setwise_hyp("thmulti2.jv-tv", mf, horizon, "tv"),
        _integrability_hypothesis(MF, mf, horizon, grid),
    ]
    curve = supset_gap_curve(MF, mf, horizon, grid)  # exact sup over all sets
    meta = {"grid": grid.grid_id, "uniform_in_sets": True,
            "exhaustive_sets": n_atoms <= EXHAUSTIVE_SET_LIMIT}
    if test_sets is not None:
        declared = []
        for A in test_sets:
            g = supset_gap_curve(MF, mf, horizon, grid, A)[-1][1]
            declared.append([list(A.indices), g])
        meta["declared_sets_final_gaps"] = declared
    final_gap = curve[-1][1]
    if MF.is_singleton:
        meta["specializes"] = "th1m (vector case, uniform convergence)"
    tail = _multi_tail_bound(MF, mf, horizon)
    if tail is not None:
        meta["certified_tail_bound"] = tail
    tol, rule = _effective_tolerance(tol, tail)
    meta["tolerance_rule"] = rule
    return TheoremReport.build(theorem_id, f"{MF.name}/{mf.name}", hyps, curve,
                               final_gap, tol, meta)


def _as_hypothesis(label: str, cert) -> HypothesisResult:
    verdict = cert.verdict if cert.verdict in (HOLDS, FAILS) else FAILS
    return HypothesisResult(label, verdict, cert.to_dict())


def _setwise_hyp(label, mf, horizon, mode):
    return _setwise_hypothesis(label, mf, horizon, mode)
