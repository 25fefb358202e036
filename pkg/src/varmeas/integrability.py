"""Uniform absolute continuity, uniform integrability, and the scalar
Vitali-type convergence engine for varying measures.

Verdict discipline: "holds" is established through sound over-approximation
(the fractional-knapsack relaxation) or exact enumeration; "fails" always
carries an exactly evaluated witness (n, A).  Anything in between is
"inconclusive" and every theorem checker treats it as hypothesis failure,
so no false confirmation can be produced.

Because families evaluate lazily at any index, 'eventually' clauses are
probed beyond the horizon: each candidate threshold delta is additionally
tested at indices of order 1/delta, which is what exposes escaping-mass
counterexamples at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .families import (
    DecayCertificate,
    FunctionFamily,
    MeasureFamily,
    constant_function_family,
    probe_indices,
)
from .measure_core import AtomFunction, MeasurableSet, MeasurableSet as _Set, SignedMeasure, sup_set_gap, total_variation_distance
from .reports import FAILS, HOLDS, INCONCLUSIVE, NOT_APPLICABLE, HypothesisResult, TheoremReport

DELTA_GRID = tuple(2.0 ** -k for k in range(0, 41))
EPSILON_GRID = tuple(10.0 ** -k for k in range(1, 7))
EXACT_ATOM_LIMIT = 20
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class UacCertificate:
    epsilon: float
    delta: float | None
    verdict: str  # holds | fails | inconclusive
    method: str  # "fractional-relaxation" | "exact-knapsack"
    witness: dict | None = None  # {"n": ..., "atoms": [...], "value": ..., "set_measure": ...}
    details: dict = field(default_factory=dict, compare=False)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta, "verdict": self.verdict,
                "method": self.method, "witness": self.witness, "details": self.details}


@dataclass(frozen=True)
class UiCurve:
    alphas: tuple[float, ...]
    values: tuple[float, ...]
    tail_cert: DecayCertificate | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if np.any(np.diff(v) > 1e-12):
            raise ValueError("uniform-integrability curve must be nonincreasing")

    @property
    def final_value(self) -> float:
        return self.values[-1]

    def decays(self, tol: float = 1e-9) -> bool:
        return self.final_value <= tol

    def to_dict(self) -> dict:
        return {"alphas": list(self.alphas), "values": list(self.values),
                "tail_cert": None if self.tail_cert is None else self.tail_cert.to_dict()}


def _scan_indices(horizon: int) -> list[int]:
    return list(range(1, horizon + 1)) + probe_indices(horizon)


def _delta_probes(delta: float, cap: int = 1 << 120) -> list[int]:
    """Indices where an 'eventually' violation at threshold delta would show.

    The ladder covers decay exponents down to 1/2 (n, n^1.5 and n^2 scales of
    1/delta); families evaluate in closed form, so huge indices are cheap.
    """
    base = math.ceil(1.0 / delta)
    ladder = [base + 1, 2 * base + 1, 4 * base + 1,
              math.ceil(base ** 1.5) + 1, base * base + 1, 2 * base * base + 1]
    return sorted({min(p, cap) for p in ladder})


# --------------------------------------------------------------------------
# worst-set integral
# --------------------------------------------------------------------------


def _fractional_worst(absf: np.ndarray, w: np.ndarray, delta: float) -> float:
    """LP relaxation of max{ integral_A |f| dm : m(A) <= delta }, filled greedily
    by |f| (the value density), with one fractional atom.  Upper-bounds the
    exact strict-budget value."""
    order = np.argsort(-absf, kind="stable")
    remaining = delta
    total = 0.0
    for i in order:
        wi = w[i]
        if wi <= remaining:
            total += absf[i] * wi
            remaining -= wi
        else:
            if wi > 0.0:
                total += absf[i] * remaining
            break
    return total


def _fractional_profile(absf: np.ndarray, w: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """Vectorized `_fractional_worst` over a delta grid."""
    order = np.argsort(-absf, kind="stable")
    ws = w[order]
    gains = absf[order] * ws
    cw = np.concatenate([[0.0], np.cumsum(ws)])
    cg = np.concatenate([[0.0], np.cumsum(gains)])
    k = np.searchsorted(cw, deltas, side="right") - 1  # full atoms taken
    k = np.clip(k, 0, len(ws))
    out = cg[k]
    frac_idx = np.minimum(k, len(ws) - 1)
    room = deltas - cw[k]
    has_more = k < len(ws)
    out = out + np.where(has_more, absf[order][frac_idx] * np.maximum(room, 0.0), 0.0)
    return out


def worst_set_integral(f: AtomFunction, m: SignedMeasure, delta: float) -> tuple[float, str]:
    """max{ integral_A |f| dm : m(A) < delta }; exact by enumeration when the
    space is small, otherwise the fractional-knapsack upper bound."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if not m.is_nonnegative():
        raise ValueError("negative measure")
    if f.is_vector:
        raise ValueError("worst_set_integral expects a scalar function")
    absf = np.abs(f.values)
    w = m.weights
    if m.space.n_atoms <= EXACT_ATOM_LIMIT:
        value, _ = kernels.budget_knapsack(absf * w, w, delta)
        return value, "exact-knapsack"
    return _fractional_worst(absf, w, delta), "fractional-relaxation"


# --------------------------------------------------------------------------
# uniform absolute continuity
# --------------------------------------------------------------------------


def check_uac(ff: FunctionFamily, mf: MeasureFamily, epsilon: float,
              horizon: int = 512) -> UacCertificate:
    """Search the geometric delta grid for a uniform modulus of absolute
    continuity; single-function and single-measure families are the
    degenerate (constant) cases of the same search."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    scan = _scan_indices(horizon)
    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def data(n: int) -> tuple[np.ndarray, np.ndarray]:
        if n not in cache:
            fn = ff.at(n)
            if fn.is_vector:
                raise ValueError("scalar function family required")
            mn = mf.at(n)
            if not mn.is_nonnegative():
                raise ValueError("negative measure in family")
            cache[n] = (np.abs(fn.values), mn.weights)
        return cache[n]

    deltas = np.asarray(DELTA_GRID)
    relax_table = np.zeros(len(deltas))
    for n in scan:
        absf, w = data(n)
        relax_table = np.maximum(relax_table, _fractional_profile(absf, w, deltas))

    n_atoms = ff.space.n_atoms
    refuted: list[dict] = []
    any_inconclusive = False
    for k, delta in enumerate(DELTA_GRID):
        probes = [p for p in _delta_probes(delta) if p > horizon]
        relax_max = relax_table[k]
        for p in probes:
            absf, w = data(p)
            relax_max = max(relax_max, _fractional_worst(absf, w, delta))
        if relax_max < epsilon:
            return UacCertificate(epsilon, delta, HOLDS, "fractional-relaxation",
                                  details={"relaxation_sup": relax_max,
                                           "indices_scanned": len(scan) + len(probes)})
        candidates = probes + scan
        if n_atoms <= EXACT_ATOM_LIMIT:
            witness = None
            for n in candidates:
                absf, w = data(n)
                value, mask = kernels.budget_knapsack(absf * w, w, delta)
                if value >= epsilon:
                    A = _Set(ff.space, int(mask))
                    witness = {"n": n, "atoms": list(A.indices), "value": value,
                               "set_measure": float(w @ A.indicator()), "delta": delta}
                    break
            if witness is None:
                return UacCertificate(epsilon, delta, HOLDS, "exact-knapsack",
                                      details={"indices_scanned": len(candidates)})
            refuted.append(witness)
        else:
            # greedy integer witness: exact evaluation, heuristic optimality
            witness = None
            for n in candidates:
                absf, w = data(n)
                order = np.argsort(-absf, kind="stable")
                cost = 0.0
                val = 0.0
                mask = 0
                for i in order:
                    if cost + w[i] < delta:
                        cost += w[i]
                        val += absf[i] * w[i]
                        mask |= 1 << int(i)
                if val >= epsilon:
                    A = _Set(ff.space, mask)
                    witness = {"n": n, "atoms": list(A.indices), "value": float(val),
                               "set_measure": float(cost), "delta": delta}
                    break
            if witness is None:
                any_inconclusive = True
            else:
                refuted.append(witness)
    if refuted and not any_inconclusive:
        return UacCertificate(epsilon, None, FAILS, "exact-knapsack", witness=refuted[-1],
                              details={"deltas_refuted": len(refuted)})
    return UacCertificate(epsilon, None, INCONCLUSIVE, "fractional-relaxation",
                          details={"deltas_refuted": len(refuted)})


# --------------------------------------------------------------------------
# uniform integrability
# --------------------------------------------------------------------------


def check_ui(ff: FunctionFamily, mf: MeasureFamily, horizon: int = 512,
             alphas: tuple[float, ...] | None = None) -> UiCurve:
    """The truncation-tail curve alpha -> sup_n integral_{|f_n|>alpha} |f_n| dm_n."""
    if alphas is None:
        alphas = tuple(2.0 ** k for k in range(0, 21))
    scan = set(_scan_indices(horizon))
    for a in alphas:
        scan.update(p for p in _delta_probes(1.0 / max(a, 1.0)) if p <= 1 << 41)
    scan_sorted = sorted(scan)
    pairs = []
    for n in scan_sorted:
        fn = ff.at(n)
        mn = mf.at(n)
        if not mn.is_nonnegative():
            raise ValueError("negative measure in family")
        pairs.append((np.abs(fn.values), mn.weights))
    values = []
    for a in alphas:
        v = 0.0
        for absf, w in pairs:
            sel = absf > a
            if sel.any():
                v = max(v, float(absf[sel] @ w[sel]))
        values.append(v)
    tail = None
    if ff.sup_norm_bound is not None and mf.mass_bound is not None:
        b, kmass = ff.sup_norm_bound, mf.mass_bound
        tail = DecayCertificate("power", c=b * b * kmass, p=1.0,
                                description="Markov bound from uniform sup-norm and mass")
    return UiCurve(tuple(float(a) for a in alphas), tuple(values), tail)


# --------------------------------------------------------------------------
# hypothesis helpers shared by the theorem checkers
# --------------------------------------------------------------------------


def _uac_hypothesis(label: str, ff: FunctionFamily, mf: MeasureFamily,
                    horizon: int) -> HypothesisResult:
    cert = check_uac(ff, mf, min(EPSILON_GRID), horizon)
    verdict = cert.verdict if cert.verdict in (HOLDS, FAILS) else FAILS
    return HypothesisResult(label, verdict, cert.to_dict())


def _inmeasure_hypothesis(label: str, ff: FunctionFamily, m: SignedMeasure,
                          horizon: int) -> HypothesisResult:
    """f_n -> f in m-measure: exact weight sums per delta on the declared grid."""
    if not m.is_nonnegative():
        raise ValueError("convergence in measure needs a nonnegative reference measure")
    scan = list(range(1, horizon + 1))
    probes = probe_indices(horizon)
    # a verified vanishing sup-norm deviation certificate empties every
    # exceedance set once its bound drops below delta
    dev_ok = ff.deviation_cert is not None
    if dev_ok:
        for n in scan + probes:
            if (ff.at(n) - ff.limit).sup_norm() > ff.deviation_cert.bound(n) + 1e-12:
                dev_ok = False
                break
    results = {}
    ok = True
    for delta in ff.delta_grid:
        def measure_at(n):
            diff = np.abs((ff.at(n) - ff.limit).values)
            if diff.ndim == 2:
                diff = np.max(diff, axis=1)
            return float(m.weights[diff > delta].sum())

        cert_ok = False
        if ff.inmeasure_cert is not None:
            cert_ok = all(measure_at(n) <= ff.inmeasure_cert.bound(n) + 1e-12
                          for n in scan + probes)
        tail_vals = [measure_at(n) for n in [horizon] + probes]
        zero_tail = all(v <= ZERO_TOL for v in tail_vals)
        results[delta] = {"certified": cert_ok or dev_ok, "zero_tail": zero_tail,
                          "residual": max(tail_vals)}
        ok = ok and (cert_ok or zero_tail or dev_ok)
    return HypothesisResult(label, HOLDS if ok else FAILS,
                            {"per_delta": {str(d): r for d, r in results.items()}})


def _setwise_hypothesis(label: str, mf: MeasureFamily, horizon: int,
                        mode: str = "setwise") -> HypothesisResult:
    """Setwise (or total-variation) convergence of m_n to its declared limit."""
    gap_fn = sup_set_gap if mode == "setwise" else total_variation_distance
    cert = mf.tv_cert if (mode == "tv" or mf.setwise_cert is None) else mf.setwise_cert
    scan = list(range(1, horizon + 1)) + probe_indices(horizon)
    if cert is not None:
        bad = [n for n in scan if gap_fn(mf.at(n), mf.limit) > cert.bound(n) + 1e-12]
        if not bad:
            return HypothesisResult(label, HOLDS, {"certificate": cert.to_dict(),
                                                   "mode": mode})
        return HypothesisResult(label, FAILS, {"certificate": cert.to_dict(), "mode": mode,
                                               "violations": bad[:5]})
    tail = [gap_fn(mf.at(n), mf.limit) for n in [horizon] + probe_indices(horizon)]
    if max(tail) <= ZERO_TOL:
        return HypothesisResult(label, HOLDS, {"mode": mode, "zero_tail": True})
    return HypothesisResult(label, FAILS, {"mode": mode, "residual": max(tail)})


def _gap_curve(ff: FunctionFamily, mf: MeasureFamily, A: MeasurableSet | None,
               horizon: int) -> list[tuple[int, float]]:
    """n -> |integral_A f_n dm_n - integral_A f dm|; A=None takes the exact
    sup over all measurable sets (closed form via positive/negative parts)."""
    f_lim = ff.limit.values
    w_lim = mf.limit.weights
    base = f_lim * w_lim
    ind = None if A is None else A.indicator()
    curve = []
    for n in range(1, horizon + 1):
        d = ff.at(n).values * mf.at(n).weights - base
        if ind is None:
            gap = max(float(np.maximum(d, 0.0).sum()), float(np.maximum(-d, 0.0).sum()))
        else:
            gap = abs(float(d @ ind))
        curve.append((n, gap))
    return curve


# --------------------------------------------------------------------------
# theorem checkers
# --------------------------------------------------------------------------


def check_p4_equivalence(ff: FunctionFamily, mf: MeasureFamily,
                         epsilon_grid: tuple[float, ...] = EPSILON_GRID,
                         horizon: int = 512) -> TheoremReport:
    """Uniform integrability <=> [u.a.c. + uniformly bounded integrals],
    for a bounded sequence of nonnegative measures."""
    scan = _scan_indices(horizon)
    masses = [mf.at(n).total_variation() for n in scan]
    if mf.mass_bound is None:
        horizon_max = max(masses[:horizon])
        if max(masses) > 1.25 * horizon_max + 1e-9:
            raise ValueError("unbounded measure family rejected")
    bounded_hyp = HypothesisResult("p4.bounded-measures", HOLDS,
                                   {"sup_mass_scanned": max(masses),
                                    "certified": mf.mass_bound is not None})

    ui = check_ui(ff, mf, horizon)
    ui_ok = ui.decays()
    uac_ok = all(check_uac(ff, mf, eps, horizon).holds for eps in epsilon_grid)

    integrals = [float(np.abs(ff.at(n).values) @ mf.at(n).weights) for n in scan]
    horizon_sup = max(integrals[:horizon])
    probe_sup = max(integrals)
    if ff.sup_norm_bound is not None and mf.mass_bound is not None:
        e12_ok = True
        e12_bound = ff.sup_norm_bound * mf.mass_bound
    else:
        e12_ok = probe_sup <= 1.25 * horizon_sup + 1e-9
        e12_bound = probe_sup

    equivalent = ui_ok == (uac_ok and e12_ok)
    return TheoremReport.build(
        "p4", mf.name, [bounded_hyp],
        curve=list(zip(ui.alphas, ui.values)),
        final_gap=0.0 if equivalent else 1.0, tolerance=0.0,
        meta={"ui_decays": ui_ok, "uac_holds": uac_ok, "e12_bounded": e12_ok,
              "e12_reported_bound": e12_bound, "ui_final": ui.final_value})


def _effective_tolerance(tol: float | None, tail_bound: float | None) -> tuple[float, str]:
    """tol=None derives the pass bar from the certified tail: max(10 tail, 1e-9)."""
    if tol is not None:
        return float(tol), "explicit"
    if tail_bound is None:
        return 1e-9, "floor (no certified tail bound)"
    return max(10.0 * tail_bound, 1e-9), "max(10 x certified tail bound, 1e-9)"


def vitali_limit(ff: FunctionFamily, mf: MeasureFamily, A: MeasurableSet | None = None,
                 tol: float | None = None, horizon: int = 512) -> TheoremReport:
    """The scalar Vitali-type limit: under u.a.c. of (f_n) and f, convergence
    in m-measure, and setwise convergence of the measures, the integrals over
    every set converge.  A=None checks the sup over all measurable sets."""
    if not mf.nonneg or not mf.limit.is_nonnegative():
        raise ValueError("vitali_limit expects nonnegative measures (see signed_vitali)")
    hyps = [
        _uac_hypothesis("th1.i-uac-fn", ff, mf, horizon),
        _inmeasure_hypothesis("th1.ii-inmeasure", ff, mf.limit, horizon),
        _uac_hypothesis("th1.iii-uac-f", constant_function_family(ff.limit), mf, horizon),
        _setwise_hypothesis("th1.iv-setwise", mf, horizon),
    ]
    curve = _gap_curve(ff, mf, A, horizon)
    final_gap = curve[-1][1]
    meta: dict = {"set": "all-sets-sup" if A is None else list(A.indices)}
    if ff.is_constant:
        meta["specializes"] = "p1"
    tail = None
    if ff.deviation_cert is not None and mf.tv_cert is not None \
            and mf.mass_bound is not None:
        tail = (ff.deviation_cert.bound(horizon) * mf.mass_bound
                + ff.limit.sup_norm() * mf.tv_cert.bound(horizon))
        meta["certified_tail_bound"] = tail
    tol, rule = _effective_tolerance(tol, tail)
    meta["tolerance_rule"] = rule
    return TheoremReport.build("th1", f"{ff.name}/{mf.name}", hyps, curve, final_gap, tol, meta)


def signed_vitali(ff: FunctionFamily, mf: MeasureFamily, A: MeasurableSet | None = None,
                  tol: float | None = None, horizon: int = 512) -> TheoremReport:
    """Signed-measure corollary: run the engine on both Jordan part pairs and
    combine; hypotheses are stated against |m_n|, m^+/- as in the source."""
    pos, neg = mf.jordan_parts()
    absf = mf.abs_family()
    hyps = [
        _uac_hypothesis("th1s.i-uac-fn-absm", ff, absf, horizon),
        _inmeasure_hypothesis("th1s.ii-inmeasure-absm", ff, mf.limit.abs(), horizon),
    ]
    fconst = constant_function_family(ff.limit)
    for tag, part in (("pos", pos), ("neg", neg)):
        ui = check_ui(fconst, part, horizon)
        hyps.append(HypothesisResult(f"th1s.iii-ui-f-{tag}",
                                     HOLDS if ui.decays() else FAILS,
                                     {"final": ui.final_value}))
    hyps.append(_setwise_hypothesis("th1s.iv-setwise-pos", pos, horizon))
    hyps.append(_setwise_hypothesis("th1s.iv-setwise-neg", neg, horizon))

    curve = _gap_curve(ff, mf, A, horizon)
    final_gap = curve[-1][1]
    pos_curve = _gap_curve(ff, pos, A, horizon)
    neg_curve = _gap_curve(ff, neg, A, horizon)
    meta = {"pos_final_gap": pos_curve[-1][1], "neg_final_gap": neg_curve[-1][1],
            "set": "all-sets-sup" if A is None else list(A.indices)}
    tail = None
    if ff.deviation_cert is not None and mf.tv_cert is not None \
            and mf.mass_bound is not None:
        tail = (ff.deviation_cert.bound(horizon) * mf.mass_bound
                + 2.0 * ff.limit.sup_norm() * mf.tv_cert.bound(horizon))
        meta["certified_tail_bound"] = tail
    tol, rule = _effective_tolerance(tol, tail)
    meta["tolerance_rule"] = rule
    return TheoremReport.build("th1s", f"{ff.name}/{mf.name}", hyps, curve, final_gap, tol, meta)


def domination_transfer(ff: FunctionFamily, mf: MeasureFamily,
                        epsilon_grid: tuple[float, ...] = EPSILON_GRID,
                        horizon: int = 512) -> TheoremReport:
    """Partial answer under domination m_n <= m: u.a.c. of (f_n) plus
    convergence in m-measure and setwise convergence force u.a.c. of f."""
    scan = _scan_indices(horizon)
    dominated = all(bool(np.all(mf.at(n).weights <= mf.limit.weights + 1e-15)) for n in scan)
    if not dominated:
        hyp = HypothesisResult("quest.domination", NOT_APPLICABLE, {"dominated": False})
        return TheoremReport.build("quest-domination", f"{ff.name}/{mf.name}", [hyp], [],
                                   final_gap=0.0, tolerance=0.0,
                                   meta={"not_applicable": True})
    hyps = [
        HypothesisResult("quest.domination", HOLDS, {"dominated": True}),
        _uac_hypothesis("th1.i-uac-fn", ff, mf, horizon),
        _inmeasure_hypothesis("th1.ii-inmeasure", ff, mf.limit, horizon),
        _setwise_hypothesis("th1.iv-setwise", mf, horizon),
    ]
    certs = {eps: check_uac(constant_function_family(ff.limit), mf, eps, horizon)
             for eps in epsilon_grid}
    transferred = all(c.holds for c in certs.values())
    return TheoremReport.build(
        "quest-domination", f"{ff.name}/{mf.name}", hyps, [],
        final_gap=0.0 if transferred else 1.0, tolerance=0.0,
        meta={"uac_of_limit": {f"{eps:g}": c.verdict for eps, c in certs.items()}})
