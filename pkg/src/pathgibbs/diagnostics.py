"""Quantitative stability diagnostics for the sampled path measures.

Each diagnostic operationalizes one estimate used in the existence analysis:
uniform-in-T tightness of the time-zero marginal against the ground-state
tail, convergence of window marginals as the volume grows, exponential
moments of the hitting time of a centered ball for the doubled reference
process, sup/inf ratios of doubled interaction moments over a ball of
starting points, and almost-sure path growth at integer times.

Uniform-in-T statements are operationalized as "no statistically significant
upward trend over the tested ladder"; a finite experiment cannot certify a
supremum, so constants are fitted and trends tested, never proved.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .grids import TimeGrid
from .potentials import PairPotential
from .spectral import GroundState, HeatKernel
from .reference import make_rng, stationary_weights, transfer_matrix, _sample_rows, PathEnsemble
from .stats import (total_variation, integrated_autocorr_time,
                    proportion_from_indicators, upward_trend_pvalue, log_log_slope,
                    wilson_interval)
from .sampler import (GibbsSpec, ChainConfig, Smeared, Pinned, run_ensemble,
                      brute_force_measure, _enumerated_columns, MAX_ORACLE_CONFIGS)


# ---------------------------------------------------------------------------
# ground-state tails


def psi_tail(gs: GroundState, radius: float) -> float:
    """Integral of the ground state over {|y| > radius} (trapezoid rule).

    The one-dimensional case integrates the interpolated profile over both
    tails; the radial case integrates psi over the complement ball in R^3,
    using the stored profile u(r) = r psi(r).
    """
    radius = max(float(radius), 0.0)
    if gs.radial:
        # the stored profile u has unit L2 norm on the half-line, so the
        # normalized wavefunction is u / (r sqrt(4 pi)) and its integral
        # over {|y| > R} reduces to sqrt(4 pi) * int_R r u(r) dr
        r = np.concatenate([[0.0], gs.grid.x])
        vals = np.concatenate([[0.0], gs.psi * gs.grid.x])
        return np.sqrt(4.0 * np.pi) * _beyond(r, vals, radius)
    x, psi = gs.grid.x, gs.psi
    return _beyond(x, psi, radius) + _beyond(-x[::-1], psi[::-1], radius)


def _beyond(x: np.ndarray, vals: np.ndarray, a: float) -> float:
    """Integral of the piecewise-linear interpolant over {x >= a}."""
    if a >= x[-1]:
        return 0.0
    if a <= x[0]:
        return float(np.trapezoid(vals, x))
    va = float(np.interp(a, x, vals))
    keep = x > a
    xs = np.concatenate([[a], x[keep]])
    vs = np.concatenate([[va], vals[keep]])
    return float(np.trapezoid(vs, xs))


@dataclass
class DecayFit:
    """Fit of log psi against |y|^(s+1) on a tail window."""

    amplitude: float
    beta: float
    s: int
    residual: float


def psi_decay_fit(gs: GroundState, s: int = 1, window=(2.0, 5.0)) -> DecayFit:
    """Log-linear tail fit psi ~ A exp(-beta |y|^(s+1))."""
    x = gs.grid.x
    prof = gs.psi / x if gs.radial else gs.psi
    keep = (x >= window[0]) & (x <= window[1]) & (prof > 1e-290)
    if keep.sum() < 3:
        raise ValueError("decay fit window contains fewer than 3 usable nodes")
    u = x[keep] ** (s + 1)
    logs = np.log(prof[keep])
    slope, intercept = np.polyfit(u, logs, 1)
    resid = float(np.max(np.abs(slope * u + intercept - logs)))
    return DecayFit(float(np.exp(intercept)), float(-slope), s, resid)


# ---------------------------------------------------------------------------
# tightness of the time-zero marginal


@dataclass
class TightnessCell:
    T: float
    R: float
    p_hat: float
    half_width: float
    tail: float
    flagged: bool

    @property
    def ratio(self) -> float:
        return self.p_hat / self.tail if self.tail > 0 else float("nan")


@dataclass
class TightnessReport:
    cells: list
    k_hat: float
    k_per_t: dict
    trend_pvalue: float
    domination_holds: bool

    def cell(self, T: float, R: float) -> TightnessCell:
        for c in self.cells:
            if c.T == T and c.R == R:
                return c
        raise KeyError((T, R))


def tightness_profile(gs: GroundState, kernel: HeatKernel, w: PairPotential,
                      t_values, r_values, config: ChainConfig) -> TightnessReport:
    """Exceedance table of |x_0| over R per volume T, with a fitted constant.

    Cells whose relative confidence half-width exceeds 50% (or that saw no
    exceedance at all) are flagged and excluded from the fit and the trend
    test; K-hat is the smallest constant dominating every unflagged cell.
    """
    cells = []
    k_per_t = {}
    for T in t_values:
        spec = GibbsSpec(gs, kernel, w, TimeGrid(T, kernel.dt), Smeared())
        center = spec.timegrid.n
        result = run_ensemble(spec, config, record_indices=[center])
        series = np.abs(result.chain_series(center))
        best = None
        for R in r_values:
            est = proportion_from_indicators((series > R).astype(float))
            tail = psi_tail(gs, R)
            flagged = (est.value == 0.0 or tail == 0.0
                       or est.half_width > 0.5 * est.value)
            cell = TightnessCell(T, R, est.value, est.half_width, tail, flagged)
            cells.append(cell)
            if not flagged and (best is None or cell.ratio > best[0]):
                best = (cell.ratio, est.stderr / tail)
        if best is not None:
            k_per_t[T] = best
    unflagged = [c for c in cells if not c.flagged]
    k_hat = max((c.ratio for c in unflagged), default=float("nan"))
    ts = sorted(k_per_t)
    trend_p = upward_trend_pvalue(ts, [k_per_t[t][0] for t in ts],
                                  [k_per_t[t][1] for t in ts])
    holds = all(c.p_hat <= k_hat * c.tail * (1 + 1e-12) for c in unflagged)
    return TightnessReport(cells, k_hat, k_per_t, trend_p, holds)


# ---------------------------------------------------------------------------
# window convergence along a volume ladder


@dataclass
class WindowDistance:
    t_small: float
    t_large: float
    tv: float
    stderr: float


@dataclass
class WindowReport:
    s_half: float
    distances: list

    @property
    def strictly_decreasing(self) -> bool:
        tvs = [d.tv for d in self.distances]
        return all(a > b for a, b in zip(tvs, tvs[1:]))

    @property
    def nonincreasing_within_ci(self) -> bool:
        return all(b.tv <= a.tv + 1.96 * (a.stderr + b.stderr)
                   for a, b in zip(self.distances, self.distances[1:]))


def _window_ids(tg: TimeGrid, s_half: float) -> np.ndarray:
    k = int(round(s_half / tg.dt))
    if abs(k * tg.dt - s_half) > 1e-9 or k > tg.n:
        raise ValueError(f"window half-width {s_half} does not fit the time grid")
    return np.arange(tg.n - k, tg.n + k + 1)


def window_convergence_exact(gs: GroundState, kernel: HeatKernel, w: PairPotential,
                             t_values, s_half: float) -> WindowReport:
    """Exact TV distances between successive window laws (oracle sizes)."""
    joints = []
    for T in t_values:
        spec = GibbsSpec(gs, kernel, w, TimeGrid(T, kernel.dt), Smeared())
        table = brute_force_measure(spec)
        ids = _window_ids(spec.timegrid, s_half)
        joints.append(table.window_marginal(ids).reshape(-1))
    dists = [WindowDistance(a, b, total_variation(p, q), 0.0)
             for (a, p), (b, q) in zip(zip(t_values, joints), zip(t_values[1:], joints[1:]))]
    return WindowReport(s_half, dists)


def window_convergence_mc(gs: GroundState, kernel: HeatKernel, w: PairPotential,
                          t_values, s_half: float, config: ChainConfig) -> WindowReport:
    """Sampled TV distances between successive window laws, with stderr."""
    m = gs.grid.points
    laws = []
    for T in t_values:
        spec = GibbsSpec(gs, kernel, w, TimeGrid(T, kernel.dt), Smeared())
        ids = _window_ids(spec.timegrid, s_half)
        if m ** ids.size > MAX_ORACLE_CONFIGS:
            raise ValueError("window occupancy table would exceed the size cap")
        result = run_ensemble(spec, config, record_indices=ids)
        codes = np.zeros(result.positions.shape[0] * result.positions.shape[1],
                         dtype=np.int64)
        for col in range(ids.size):
            nodes = gs.grid.nearest_index(result.positions[:, :, col].reshape(-1))
            codes = codes * m + nodes
        probs = np.bincount(codes, minlength=m ** ids.size) / codes.size
        iat = integrated_autocorr_time(result.chain_series(ids[ids.size // 2]).reshape(-1))
        n_eff = codes.size / iat
        laws.append((probs, n_eff))
    dists = []
    for (ta, (p, na)), (tb, (q, nb)) in zip(zip(t_values, laws), zip(t_values[1:], laws[1:])):
        se = 0.5 * float(np.sqrt(np.sum(p * (1 - p)) / na + np.sum(q * (1 - q)) / nb))
        dists.append(WindowDistance(ta, tb, total_variation(p, q), se))
    return WindowReport(s_half, dists)


def boundary_sensitivity_exact(gs: GroundState, kernel: HeatKernel, w: PairPotential,
                               t_values, s_half: float, pin: float = 0.0) -> list:
    """TV between smeared and pinned window laws per volume (reported only)."""
    out = []
    for T in t_values:
        tg = TimeGrid(T, kernel.dt)
        ids = _window_ids(tg, s_half)
        free = brute_force_measure(GibbsSpec(gs, kernel, w, tg, Smeared()))
        pinned = brute_force_measure(GibbsSpec(gs, kernel, w, tg, Pinned(pin, pin)))
        out.append((T, total_variation(free.window_marginal(ids).reshape(-1),
                                       pinned.window_marginal(ids).reshape(-1))))
    return out


# ---------------------------------------------------------------------------
# hitting-time exponential moment for the doubled reference process


@dataclass
class HittingReport:
    radius: float
    gamma: float
    growth_rate: float  # exponential moment rate C
    estimate: float
    stderr: float
    tail_bound: float
    rhs_bound: float
    hit_fraction: float

    @property
    def certified(self) -> bool:
        return self.estimate + self.tail_bound <= self.rhs_bound


def hitting_radius(gs: GroundState, threshold: float) -> float:
    """Smallest grid-aligned r with V > threshold outside radius r/sqrt(2)."""
    failing = np.abs(gs.grid.x[gs.v_grid <= threshold])
    rho = float(failing.max()) if failing.size else 0.0
    h = gs.grid.h
    return h * max(1.0, np.ceil(np.sqrt(2.0) * rho / h - 1e-12))


def hitting_time_moment(gs: GroundState, kernel: HeatKernel, start,
                        growth_rate: float, horizon: float, n_paths: int,
                        seed=0, alpha: float = float("inf"),
                        gamma: float | None = None) -> HittingReport:
    """MC estimate of E[exp(C tau)] for the doubled chain entering a ball.

    tau is the first time the pair of independent stationary chains, started
    at the two given points, enters {|x| <= r} in R^2.  The ball radius and
    the decay rate gamma follow the coercivity construction: gamma below
    alpha - C, and V > C + gamma outside r/sqrt(2).  The truncated horizon
    is certified by the analytic tail bound at rate gamma.
    """
    c = growth_rate
    if c < 0:
        raise ValueError("exponential moment rate must be nonnegative")
    if c >= alpha:
        raise ValueError(f"rate {c} must stay below the coercivity level {alpha}")
    if gamma is None:
        gamma = (alpha - c) / 2.0 if np.isfinite(alpha) else 1.0
    if gamma <= 0 or (np.isfinite(alpha) and gamma >= alpha - c):
        raise ValueError("gamma must lie strictly between 0 and alpha - C")
    radius = hitting_radius(gs, c + gamma)
    grid = gs.grid
    nodes = grid.nearest_index(np.asarray(start, dtype=float))
    z = grid.x[nodes]
    psi_sup = float(gs.psi.max())
    amplitude = psi_sup * float(np.sum(1.0 / gs.psi[nodes]))
    rhs = 1.0 + (c / gamma) * amplitude if c > 0 else 1.0

    if float(np.hypot(z[0], z[1])) <= radius or c == 0.0:
        # already inside, or a zeroth moment: the answer is exact
        return HittingReport(radius, gamma, c, 1.0, 0.0, 0.0, rhs, 1.0)

    tail_bound = amplitude * (1.0 + c / gamma) * np.exp(-gamma * horizon)
    steps = int(round(horizon / kernel.dt))
    p = transfer_matrix(gs, kernel)
    cdf_rows = np.cumsum(p, axis=1)
    rng = make_rng(seed, 31)
    state = np.tile(nodes, (n_paths, 1))
    tau = np.full(n_paths, np.inf)
    alive = np.ones(n_paths, dtype=bool)
    for k in range(1, steps + 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        for comp in (0, 1):
            state[idx, comp] = _sample_rows(cdf_rows, state[idx, comp],
                                            rng.random(idx.size))
        pos = grid.x[state[idx]]
        hit = np.hypot(pos[:, 0], pos[:, 1]) <= radius
        tau[idx[hit]] = k * kernel.dt
        alive[idx[hit]] = False
    weights = np.exp(c * np.minimum(tau, horizon))
    survivors = float(np.mean(~np.isfinite(tau)))
    estimate = float(weights.mean())
    stderr = float(weights.std(ddof=1) / np.sqrt(n_paths))
    if tail_bound > 0.1 * estimate:
        need = np.log(amplitude * (1.0 + c / gamma) / (0.05 * estimate)) / gamma
        raise ValueError(f"horizon {horizon} too short: tail bound {tail_bound:.3g} "
                         f"exceeds 10% of the estimate; use horizon >= {need:.1f}")
    return HittingReport(radius, gamma, c, estimate, stderr, float(tail_bound),
                         rhs, 1.0 - survivors)


# ---------------------------------------------------------------------------
# sup/inf ratio of doubled interaction moments (exact, oracle sizes)


@dataclass
class RatioBoundReport:
    t_values: tuple
    radius: float
    m_hats: tuple          # sup/inf over starts in the ball, per T
    k_hat: float           # max of E / (1/psi(y1) + 1/psi(y2)) over all starts
    start_values: np.ndarray
    moments: np.ndarray    # (len(t_values), n_starts) conditional expectations

    @property
    def bounded(self) -> bool:
        return max(self.m_hats) < 2.0 * self.m_hats[0]


def doubled_moment_exact(gs: GroundState, kernel: HeatKernel, w: PairPotential,
                         T: float) -> np.ndarray:
    """E[exp(doubled interaction)] given each start pair, by enumeration.

    Returns an (m, m) table over start pairs (y1, y2) of the conditional
    expectation of exp(H-doubled) where both legs run the stationary chain
    forward over [0, T] and the four interaction terms couple same-leg pairs
    at lag |s-t| and cross-leg pairs at lag s+t.
    """
    grid = gs.grid
    m = grid.points
    n_steps = int(round(T / kernel.dt))
    if abs(n_steps * kernel.dt - T) > 1e-9 or n_steps < 1:
        raise ValueError("T must be a positive multiple of the kernel step")
    if m ** (2 * n_steps + 2) > MAX_ORACLE_CONFIGS:
        raise ValueError("doubled enumeration exceeds the oracle size cap")
    if w.kind in ("zero", "constant"):
        # a configuration-independent interaction factors out of the
        # conditional expectation
        area = (n_steps * kernel.dt) ** 2 if n_steps else 0.0
        value = np.exp(-4.0 * (w.value if w.kind == "constant" else 0.0) * area)
        return np.full((m, m), value)

    cols = _enumerated_columns(m, 2 * n_steps + 2)
    leg_a = np.concatenate([cols[:, :1], cols[:, 2:n_steps + 2]], axis=1)
    leg_b = np.concatenate([cols[:, 1:2], cols[:, n_steps + 2:]], axis=1)
    p = transfer_matrix(gs, kernel)
    with np.errstate(divide="ignore"):
        log_p = np.log(p)
    log_ref = np.zeros(cols.shape[0])
    for k in range(n_steps):
        log_ref += log_p[leg_a[:, k], leg_a[:, k + 1]]
        log_ref += log_p[leg_b[:, k], leg_b[:, k + 1]]

    times = kernel.dt * np.arange(n_steps + 1)
    wt = np.full(n_steps + 1, kernel.dt)
    wt[0] = wt[-1] = kernel.dt / 2.0
    quad = wt[:, None] * wt[None, :]
    lag_same = np.abs(times[:, None] - times[None, :])
    lag_cross = times[:, None] + times[None, :]
    xa = grid.x[leg_a]
    xb = grid.x[leg_b]
    h_vals = np.empty(cols.shape[0])
    chunk = 50_000
    for lo in range(0, cols.shape[0], chunk):
        a = xa[lo:lo + chunk]
        b = xb[lo:lo + chunk]
        vals = (w.evaluate(a[:, :, None], a[:, None, :], lag_same)
                + w.evaluate(b[:, :, None], b[:, None, :], lag_same)
                + w.evaluate(a[:, :, None], b[:, None, :], lag_cross)
                + w.evaluate(b[:, :, None], a[:, None, :], lag_cross))
        h_vals[lo:lo + chunk] = -np.einsum("cij,ij->c", vals, quad)

    per_start = m ** (2 * n_steps)
    lw = (log_ref + h_vals).reshape(m * m, per_start)
    lr = log_ref.reshape(m * m, per_start)
    return np.exp(logsumexp(lw, axis=1) - logsumexp(lr, axis=1)).reshape(m, m)


def ratio_bound_check(gs: GroundState, kernel: HeatKernel, w: PairPotential,
                      t_values, radius: float) -> RatioBoundReport:
    """Sup/inf of doubled moments over starts in a ball, per volume T."""
    grid = gs.grid
    y1, y2 = np.meshgrid(grid.x, grid.x, indexing="ij")
    in_ball = (y1 ** 2 + y2 ** 2) <= radius ** 2 * (1 + 1e-12)
    if not in_ball.any():
        raise ValueError(f"no grid start pairs inside radius {radius}")
    inv_weight = 1.0 / gs.psi[:, None] + 1.0 / gs.psi[None, :]
    m_hats = []
    moments = []
    k_hat = 0.0
    for T in t_values:
        table = doubled_moment_exact(gs, kernel, w, T)
        vals = table[in_ball]
        m_hats.append(float(vals.max() / vals.min()))
        k_hat = max(k_hat, float((table / inv_weight).max()))
        moments.append(table[in_ball])
    return RatioBoundReport(tuple(t_values), radius, tuple(m_hats), k_hat,
                            np.stack([y1[in_ball], y2[in_ball]], axis=1),
                            np.asarray(moments))


# ---------------------------------------------------------------------------
# path growth at integer times


@dataclass
class GrowthRow:
    n: int
    threshold: float
    p_hat: float
    ci_low: float
    ci_high: float
    exact: float

    @property
    def consistent(self) -> bool:
        return self.ci_low - 1e-12 <= self.exact <= self.ci_high + 1e-12


@dataclass
class SummabilityReport:
    gamma: float
    slope: float
    partial_sum: float
    summable: bool


@dataclass
class GrowthReport:
    fit: DecayFit
    gamma: float
    rows: list
    limsup_proxy: float
    summability: SummabilityReport
    fit_ok: bool

    @property
    def all_consistent(self) -> bool:
        return all(r.consistent for r in self.rows)


def tail_summability(gs: GroundState, gamma: float, s: int = 1,
                     n_max: int = 10_000) -> SummabilityReport:
    """Partial sums and decay slope of psi-tails at the growth envelope.

    The n-th term integrates the ground state beyond (gamma ln n)^(1/(s+1));
    a fitted log-log slope below -1 indicates a summable series.
    """
    ns = np.arange(2, n_max + 1)
    thresholds = (gamma * np.log(ns)) ** (1.0 / (s + 1))
    terms = np.array([psi_tail(gs, t) for t in thresholds])
    partial = float(terms.sum())
    keep = (ns >= max(10, n_max // 100)) & (terms > 1e-290)
    slope = log_log_slope(ns[keep], terms[keep])
    return SummabilityReport(gamma, slope, partial, slope < -1.05)


def path_growth_check(ensemble: PathEnsemble, gs: GroundState, gamma: float,
                      s: int = 1, fit_window=(2.0, 5.0),
                      max_fit_residual: float = 0.1) -> GrowthReport:
    """Exceedance of the logarithmic growth envelope at integer times.

    Compares the per-time exceedance fraction of |x_n| over
    f(n) = (gamma ln n)^(1/(s+1)) with the exact stationary tail, and
    reports a limsup proxy (fraction of paths below the envelope at every
    tested time).  The envelope is meaningful when gamma exceeds the inverse
    of the fitted decay exponent.
    """
    fit = psi_decay_fit(gs, s, fit_window)
    fit_ok = fit.residual <= max_fit_residual
    tg = ensemble.timegrid
    pi = stationary_weights(gs)
    n_paths = ensemble.positions.shape[0]
    rows = []
    below = np.ones(n_paths, dtype=bool)
    for k, t in enumerate(tg.times):
        n = int(round(t))
        if n < 2 or abs(t - n) > 1e-9:
            continue
        threshold = (gamma * np.log(n)) ** (1.0 / (s + 1))
        samples = np.abs(ensemble.positions[:, k])
        exceed = samples > threshold
        below &= ~exceed
        p_hat = float(exceed.mean())
        lo, hi = wilson_interval(p_hat, n_paths)
        exact = float(pi[np.abs(gs.grid.x) > threshold].sum())
        rows.append(GrowthRow(n, threshold, p_hat, lo, hi, exact))
    if not rows:
        raise ValueError("ensemble contains no integer times n >= 2")
    summ = tail_summability(gs, gamma, s)
    return GrowthReport(fit, gamma, rows, float(below.mean()), summ, fit_ok)
