"""Hot numeric kernels: subset enumeration, exact knapsack, partition trials.

Every kernel has two interchangeable implementations:

* a numba ``@njit`` version (default when numba imports cleanly), and
* a pure-numpy fallback.

The active backend is chosen once at import time from the environment
variable ``VARMEAS_NUMBA`` (``0``/``false``/``off`` forces the numpy path)
and can be switched at runtime with :func:`set_backend`.  Both paths are
exact enumerations (no sampling, no approximation); they are the slow
independent route that cross-checks the closed-form fast paths elsewhere
in the package.

Subset indexing convention: subsets of an ``n``-atom space are encoded as
integer bitmasks, bit ``i`` <-> atom ``i``.  All enumeration kernels are
gated at ``n <= 24`` by their callers.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

_MASK64 = (1 << 64) - 1

# --------------------------------------------------------------------------
# splitmix64 counter-based randomness, identical across backends
# --------------------------------------------------------------------------


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer (pure function)."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1FE4E7B8) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def unit_rand(seed: int, trial: int, counter: int) -> float:
    """Deterministic uniform in [0, 1) addressed by (seed, trial, counter)."""
    z = mix64((seed ^ mix64(trial * 0x9E3779B97F4A7C15 + 0x632BE59BD9B4E019)) + counter)
    return (z >> 11) * 2.0**-53


# --------------------------------------------------------------------------
# numpy fallback implementations
# --------------------------------------------------------------------------

_CHUNK_BITS = 18


def _dense_subset_sums(weights: np.ndarray) -> np.ndarray:
    # index = bitmask over the given atoms
    sums = np.zeros(1, dtype=np.float64)
    for w in weights:
        sums = np.concatenate([sums, sums + w])
    return sums


def subset_sums(weights: np.ndarray) -> np.ndarray:
    """All 2^n subset sums, index = bitmask.  Dense; keep n <= 22."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.size > 22:
        raise ValueError("dense subset table limited to 22 atoms")
    return _dense_subset_sums(weights)


def _chunk_iter(weights: np.ndarray):
    """Yield (high_mask_base, chunk_sums) covering all subsets in mask order."""
    n = weights.size
    k = min(n, _CHUNK_BITS)
    low = _dense_subset_sums(weights[:k])
    high = weights[k:]
    for hi_mask in range(1 << (n - k)):
        offset = 0.0
        m = hi_mask
        j = 0
        while m:
            if m & 1:
                offset += high[j]
            m >>= 1
            j += 1
        yield hi_mask << k, low + offset


def _np_max_abs_subset_sum(weights: np.ndarray) -> tuple[float, int]:
    best = -1.0
    best_mask = 0
    for base, sums in _chunk_iter(weights):
        a = np.abs(sums)
        idx = int(np.argmax(a))
        if a[idx] > best:
            best = float(a[idx])
            best_mask = base | idx
    return best, best_mask


def _np_two_block_variation(weights: np.ndarray) -> float:
    total = float(np.sum(weights))
    best = 0.0
    for _, sums in _chunk_iter(weights):
        v = np.abs(sums) + np.abs(total - sums)
        best = max(best, float(np.max(v)))
    return best


def _np_budget_knapsack(gains: np.ndarray, costs: np.ndarray, budget: float) -> tuple[float, int]:
    gains = np.asarray(gains, dtype=np.float64)
    costs = np.asarray(costs, dtype=np.float64)
    best = -np.inf
    best_mask = 0
    k = min(gains.size, _CHUNK_BITS)
    low_gain = _dense_subset_sums(gains[:k])
    low_cost = _dense_subset_sums(costs[:k])
    for hi_mask in range(1 << (gains.size - k)):
        g_off = 0.0
        c_off = 0.0
        m = hi_mask
        j = k
        while m:
            if m & 1:
                g_off += gains[j]
                c_off += costs[j]
            m >>= 1
            j += 1
        feasible = (low_cost + c_off) < budget
        if not feasible.any():
            continue
        g = np.where(feasible, low_gain + g_off, -np.inf)
        idx = int(np.argmax(g))
        if g[idx] > best:
            best = float(g[idx])
            best_mask = (hi_mask << k) | idx
    if best == -np.inf:
        # the empty set is feasible only when budget > 0; callers ensure that
        best, best_mask = 0.0, 0
    return best, best_mask


def _np_max_set_gap_matrix(delta: np.ndarray) -> float:
    """max over subsets A, columns j of |sum_{i in A} delta[i, j]|, enumerated."""
    n = delta.shape[0]
    if n > 20:
        raise ValueError("matrix subset enumeration limited to 20 atoms")
    masks = np.arange(1 << n, dtype=np.uint32)
    members = (masks[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1
    gaps = np.abs(members.astype(np.float64) @ delta)
    return float(gaps.max(initial=0.0))


# McShane random-partition walk (shared logic; numpy/python version).


def _walk_cells(z_lo, z_hi, z_rad, seed: int, trial: int, max_cells: int):
    """One gauge-subordinate random partition of [0,1]: list of (x, y, tag).

    Only zones within max-radius reach of the walk front can host a tag for
    the next cell, so the scan is windowed (fine gauges carry thousands of
    zones).
    """
    cells = []
    x = 0.0
    counter = 0
    nz = len(z_lo)
    max_rad = float(np.max(z_rad))
    while x < 1.0:
        if len(cells) >= max_cells:
            return None
        w0 = int(np.searchsorted(z_hi, x - max_rad, side="right"))
        w1 = int(np.searchsorted(z_lo, x + max_rad, side="left"))
        if w1 <= w0:
            return None
        # farthest reachable cover end over the zones in the window
        y_max = x
        for z in range(w0, w1):
            if 2.0 * z_rad[z] <= y_max - x:
                continue  # zone too small to improve the cover
            t_hi = min(z_hi[z], x + z_rad[z])
            if t_hi > z_lo[z]:
                y_max = max(y_max, t_hi + z_rad[z])
        y_max = min(y_max, 1.0)
        u = unit_rand(seed, trial, counter)
        y = x + (0.35 + 0.63 * u) * (y_max - x)
        if y_max >= 1.0 and (1.0 - y) < 0.25 * (y_max - x):
            y = 1.0
        # candidate tag intervals: t in (y - rad, x + rad) within the zone
        lo0 = lo1 = hi0 = hi1 = 0.0
        ncand = 0
        pick = unit_rand(seed, trial, counter + 1)
        tpos = unit_rand(seed, trial, counter + 2)
        for z in range(w0, w1):
            if 2.0 * z_rad[z] <= y - x:
                continue  # zone radius cannot contain the cell
            lo = max(z_lo[z], y - z_rad[z])
            hi = min(z_hi[z], x + z_rad[z])
            if hi > lo:
                if ncand == 0:
                    lo0, hi0 = lo, hi
                else:
                    lo1, hi1 = lo, hi
                ncand += 1
                if ncand == 2:
                    break
        if ncand == 0:
            return None
        if ncand == 2 and pick >= 0.5:
            lo0, hi0 = lo1, hi1
        tag = lo0 + (0.05 + 0.9 * tpos) * (hi0 - lo0)
        cells.append((x, y, tag))
        x = y
        counter += 3
    return cells


def _step_lookup(breaks, idx_len, t):
    j = int(np.searchsorted(breaks, t, side="right")) - 1
    if j < 0:
        j = 0
    if j > idx_len - 1:
        j = idx_len - 1
    return j


def _np_mcshane_trial_sums(z_lo, z_hi, z_rad, f_breaks, f_vals, m_breaks, m_cum, m_dens,
                           seed: int, n_trials: int, max_cells: int):
    d = f_vals.shape[1]
    sums = np.zeros((n_trials, d), dtype=np.float64)
    counts = np.zeros(n_trials, dtype=np.int64)
    nf = f_vals.shape[0]

    def cum_at(t):
        j = _step_lookup(m_breaks, m_dens.shape[0], t)
        return m_cum[j] + m_dens[j] * (t - m_breaks[j])

    for trial in range(n_trials):
        cells = _walk_cells(z_lo, z_hi, z_rad, seed, trial, max_cells)
        if cells is None:
            counts[trial] = -1
            continue
        acc = np.zeros(d, dtype=np.float64)
        for (x, y, tag) in cells:
            mass = cum_at(y) - cum_at(x)
            fj = _step_lookup(f_breaks, nf, tag)
            for c in range(d):
                acc[c] += f_vals[fj, c] * mass
        sums[trial] = acc
        counts[trial] = len(cells)
    return sums, counts


_NUMPY_IMPL = SimpleNamespace(
    name="numpy",
    max_abs_subset_sum=_np_max_abs_subset_sum,
    two_block_variation=_np_two_block_variation,
    budget_knapsack=_np_budget_knapsack,
    max_set_gap_matrix=_np_max_set_gap_matrix,
    mcshane_trial_sums=_np_mcshane_trial_sums,
)


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------


def _build_numba_impl():
    from numba import njit

    @njit(cache=True)
    def nb_mix64(z):
        z = (z + np.uint64(0x9E3779B97F4A7C15))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1FE4E7B8)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    @njit(cache=True)
    def nb_unit_rand(seed, trial, counter):
        z = nb_mix64((seed ^ nb_mix64(trial * np.uint64(0x9E3779B97F4A7C15)
                                      + np.uint64(0x632BE59BD9B4E019))) + counter)
        return (z >> np.uint64(11)) * 2.0**-53

    @njit(cache=True)
    def nb_max_abs_subset_sum(weights):
        n = weights.shape[0]
        total = np.int64(1) << n
        s = 0.0
        best = 0.0
        best_mask = np.int64(0)
        gray = np.int64(0)
        for i in range(1, total):
            j = 0
            ii = i
            while ii & 1 == 0:
                ii >>= 1
                j += 1
            bit = np.int64(1) << j
            gray ^= bit
            if gray & bit:
                s += weights[j]
            else:
                s -= weights[j]
            a = abs(s)
            if a > best or (a == best and gray < best_mask):
                best = a
                best_mask = gray
        return best, best_mask

    @njit(cache=True)
    def nb_two_block_variation(weights):
        n = weights.shape[0]
        total_mass = 0.0
        for i in range(n):
            total_mass += weights[i]
        total = np.int64(1) << n
        s = 0.0
        best = abs(total_mass)
        gray = np.int64(0)
        for i in range(1, total):
            j = 0
            ii = i
            while ii & 1 == 0:
                ii >>= 1
                j += 1
            bit = np.int64(1) << j
            gray ^= bit
            if gray & bit:
                s += weights[j]
            else:
                s -= weights[j]
            v = abs(s) + abs(total_mass - s)
            if v > best:
                best = v
        return best

    @njit(cache=True)
    def nb_budget_knapsack(gains, costs, budget):
        n = gains.shape[0]
        total = np.int64(1) << n
        g = 0.0
        c = 0.0
        best = -np.inf
        best_mask = np.int64(0)
        if 0.0 < budget:
            best = 0.0
        gray = np.int64(0)
        for i in range(1, total):
            j = 0
            ii = i
            while ii & 1 == 0:
                ii >>= 1
                j += 1
            bit = np.int64(1) << j
            gray ^= bit
            if gray & bit:
                g += gains[j]
                c += costs[j]
            else:
                g -= gains[j]
                c -= costs[j]
            if c < budget:
                if g > best or (g == best and gray < best_mask):
                    best = g
                    best_mask = gray
        if best == -np.inf:
            best = 0.0
            best_mask = np.int64(0)
        return best, best_mask

    @njit(cache=True)
    def nb_max_set_gap_matrix(delta):
        n = delta.shape[0]
        m = delta.shape[1]
        total = np.int64(1) << n
        acc = np.zeros(m, dtype=np.float64)
        best = 0.0
        gray = np.int64(0)
        for i in range(1, total):
            j = 0
            ii = i
            while ii & 1 == 0:
                ii >>= 1
                j += 1
            bit = np.int64(1) << j
            gray ^= bit
            if gray & bit:
                for k in range(m):
                    acc[k] += delta[j, k]
            else:
                for k in range(m):
                    acc[k] -= delta[j, k]
            for k in range(m):
                a = abs(acc[k])
                if a > best:
                    best = a
        return best

    @njit(cache=True)
    def nb_mcshane_trial_sums(z_lo, z_hi, z_rad, f_breaks, f_vals, m_breaks, m_cum, m_dens,
                              seed, n_trials, max_cells):
        d = f_vals.shape[1]
        nf = f_vals.shape[0]
        nm = m_dens.shape[0]
        max_rad = np.max(z_rad)
        sums = np.zeros((n_trials, d), dtype=np.float64)
        counts = np.zeros(n_trials, dtype=np.int64)
        for trial in range(n_trials):
            x = 0.0
            counter = np.uint64(0)
            ncells = 0
            ok = True
            acc = np.zeros(d, dtype=np.float64)
            while x < 1.0:
                if ncells >= max_cells:
                    ok = False
                    break
                w0 = np.searchsorted(z_hi, x - max_rad, side="right")
                w1 = np.searchsorted(z_lo, x + max_rad, side="left")
                if w1 <= w0:
                    ok = False
                    break
                y_max = x
                for z in range(w0, w1):
                    if 2.0 * z_rad[z] <= y_max - x:
                        continue
                    t_hi = min(z_hi[z], x + z_rad[z])
                    if t_hi > z_lo[z]:
                        cover = t_hi + z_rad[z]
                        if cover > y_max:
                            y_max = cover
                if y_max > 1.0:
                    y_max = 1.0
                u = nb_unit_rand(seed, np.uint64(trial), counter)
                y = x + (0.35 + 0.63 * u) * (y_max - x)
                if y_max >= 1.0 and (1.0 - y) < 0.25 * (y_max - x):
                    y = 1.0
                lo0 = 0.0
                hi0 = 0.0
                lo1 = 0.0
                hi1 = 0.0
                ncand = 0
                pick = nb_unit_rand(seed, np.uint64(trial), counter + np.uint64(1))
                tpos = nb_unit_rand(seed, np.uint64(trial), counter + np.uint64(2))
                for z in range(w0, w1):
                    if 2.0 * z_rad[z] <= y - x:
                        continue
                    lo = max(z_lo[z], y - z_rad[z])
                    hi = min(z_hi[z], x + z_rad[z])
                    if hi > lo:
                        if ncand == 0:
                            lo0 = lo
                            hi0 = hi
                        else:
                            lo1 = lo
                            hi1 = hi
                        ncand += 1
                        if ncand == 2:
                            break
                if ncand == 0:
                    ok = False
                    break
                if ncand == 2 and pick >= 0.5:
                    lo0 = lo1
                    hi0 = hi1
                tag = lo0 + (0.05 + 0.9 * tpos) * (hi0 - lo0)
                # mass of [x, y) under the piecewise-constant density
                jx = np.searchsorted(m_breaks, x, side="right") - 1
                if jx < 0:
                    jx = 0
                if jx > nm - 1:
                    jx = nm - 1
                jy = np.searchsorted(m_breaks, y, side="right") - 1
                if jy < 0:
                    jy = 0
                if jy > nm - 1:
                    jy = nm - 1
                mass = (m_cum[jy] + m_dens[jy] * (y - m_breaks[jy])) \
                    - (m_cum[jx] + m_dens[jx] * (x - m_breaks[jx]))
                jf = np.searchsorted(f_breaks, tag, side="right") - 1
                if jf < 0:
                    jf = 0
                if jf > nf - 1:
                    jf = nf - 1
                for c in range(d):
                    acc[c] += f_vals[jf, c] * mass
                ncells += 1
                x = y
                counter += np.uint64(3)
            if ok:
                sums[trial] = acc
                counts[trial] = ncells
            else:
                counts[trial] = -1
        return sums, counts

    def wrap_trials(z_lo, z_hi, z_rad, f_breaks, f_vals, m_breaks, m_cum, m_dens,
                    seed, n_trials, max_cells):
        return nb_mcshane_trial_sums(
            np.ascontiguousarray(z_lo, dtype=np.float64),
            np.ascontiguousarray(z_hi, dtype=np.float64),
            np.ascontiguousarray(z_rad, dtype=np.float64),
            np.ascontiguousarray(f_breaks, dtype=np.float64),
            np.ascontiguousarray(f_vals, dtype=np.float64),
            np.ascontiguousarray(m_breaks, dtype=np.float64),
            np.ascontiguousarray(m_cum, dtype=np.float64),
            np.ascontiguousarray(m_dens, dtype=np.float64),
            np.uint64(seed), n_trials, max_cells)

    def wrap_knapsack(gains, costs, budget):
        v, m = nb_budget_knapsack(np.ascontiguousarray(gains, dtype=np.float64),
                                  np.ascontiguousarray(costs, dtype=np.float64),
                                  float(budget))
        return float(v), int(m)

    def wrap_maxabs(weights):
        v, m = nb_max_abs_subset_sum(np.ascontiguousarray(weights, dtype=np.float64))
        return float(v), int(m)

    def wrap_twoblock(weights):
        return float(nb_two_block_variation(np.ascontiguousarray(weights, dtype=np.float64)))

    def wrap_setgap(delta):
        return float(nb_max_set_gap_matrix(np.ascontiguousarray(delta, dtype=np.float64)))

    return SimpleNamespace(
        name="numba",
        max_abs_subset_sum=wrap_maxabs,
        two_block_variation=wrap_twoblock,
        budget_knapsack=wrap_knapsack,
        max_set_gap_matrix=wrap_setgap,
        mcshane_trial_sums=wrap_trials,
    )


def _env_wants_numba() -> bool:
    return os.environ.get("VARMEAS_NUMBA", "1").strip().lower() not in ("0", "false", "off", "no")


BACKENDS: dict[str, SimpleNamespace | None] = {"numpy": _NUMPY_IMPL, "numba": None}

if _env_wants_numba():
    try:
        BACKENDS["numba"] = _build_numba_impl()
    except ImportError:
        BACKENDS["numba"] = None

_ACTIVE = BACKENDS["numba"] if (_env_wants_numba() and BACKENDS["numba"] is not None) \
    else _NUMPY_IMPL


def active_backend() -> str:
    return _ACTIVE.name


def set_backend(name: str) -> None:
    """Switch kernel backend at runtime ("numpy" or "numba")."""
    global _ACTIVE
    impl = BACKENDS.get(name)
    if impl is None:
        if name == "numba" and _env_wants_numba() is False:
            BACKENDS["numba"] = _build_numba_impl()
            impl = BACKENDS["numba"]
        else:
            raise ValueError(f"backend {name!r} unavailable")
    _ACTIVE = impl


def max_abs_subset_sum(weights) -> tuple[float, int]:
    """Enumerated sup over subsets A of |sum_{i in A} w_i|; returns (value, mask)."""
    w = np.asarray(weights, dtype=np.float64)
    _gate(w.size)
    return _ACTIVE.max_abs_subset_sum(w)


def two_block_variation(weights) -> float:
    """Enumerated sup over subsets E of |m(E)| + |m(complement E)|."""
    w = np.asarray(weights, dtype=np.float64)
    _gate(w.size)
    return _ACTIVE.two_block_variation(w)


def budget_knapsack(gains, costs, budget) -> tuple[float, int]:
    """Exact max of sum(gains over A) subject to sum(costs over A) < budget."""
    g = np.asarray(gains, dtype=np.float64)
    c = np.asarray(costs, dtype=np.float64)
    if g.shape != c.shape:
        raise ValueError("gains and costs must align")
    _gate(g.size)
    return _ACTIVE.budget_knapsack(g, c, float(budget))


def max_set_gap_matrix(delta) -> float:
    """Enumerated sup over subsets A and columns j of |sum_{i in A} delta[i,j]|."""
    d = np.asarray(delta, dtype=np.float64)
    if d.ndim != 2:
        raise ValueError("delta must be 2-d")
    _gate(d.shape[0], limit=20)
    return _ACTIVE.max_set_gap_matrix(d)


def mcshane_trial_sums(z_lo, z_hi, z_rad, f_breaks, f_vals, m_breaks, m_cum, m_dens,
                       seed: int, n_trials: int, max_cells: int = 4096):
    """Riemann sums of ``n_trials`` random gauge-subordinate partitions.

    Returns (sums, cell_counts); a count of -1 flags a failed walk.
    """
    return _ACTIVE.mcshane_trial_sums(
        np.asarray(z_lo, dtype=np.float64), np.asarray(z_hi, dtype=np.float64),
        np.asarray(z_rad, dtype=np.float64), np.asarray(f_breaks, dtype=np.float64),
        np.atleast_2d(np.asarray(f_vals, dtype=np.float64)),
        np.asarray(m_breaks, dtype=np.float64), np.asarray(m_cum, dtype=np.float64),
        np.asarray(m_dens, dtype=np.float64), int(seed), int(n_trials), int(max_cells))


def walk_cells(z_lo, z_hi, z_rad, seed: int, trial: int, max_cells: int = 4096):
    """Replay one random-partition walk as explicit (x, y, tag) cells.

    Backend-independent: both kernel paths consume the same splitmix64
    stream, so this python replay matches the batched trial sums.
    """
    return _walk_cells(np.asarray(z_lo, dtype=np.float64), np.asarray(z_hi, dtype=np.float64),
                       np.asarray(z_rad, dtype=np.float64), int(seed), int(trial), max_cells)


def _gate(n_atoms: int, limit: int = 24) -> None:
    if n_atoms > limit:
        raise ValueError(f"enumeration gated at {limit} atoms, got {n_atoms}")
