"""Pair-interaction energies over two-time regions, path shifts, doubling.

The energy of a path over a region R of the (t, s) plane is the 2D
trapezoid quadrature of -W(x_t, x_s, |t-s|). Regions are weight masks on
the path's own time grid, built by inclusion-exclusion from rectangles so
all regions share one quadrature order. The unbounded regions truncate at
a finite horizon and report an analytic envelope bound for the remainder.
"""

import math
from dataclasses import dataclass

import numpy as np

from .grids import Path, TimeGrid
from .potentials import PairPotential, SitePotential, interaction_budget


def _rect(tg: TimeGrid, t_int, s_int) -> np.ndarray:
    return np.outer(tg.interval_weights(*t_int), tg.interval_weights(*s_int))


@dataclass(frozen=True)
class SquareRegion:
    """[-T, T] x [-T, T]."""

    T: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("square region needs T > 0")

    def span(self) -> float:
        return self.T

    def weights(self, tg: TimeGrid) -> np.ndarray:
        return _rect(tg, (-self.T, self.T), (-self.T, self.T))

    def envelope_bound(self, w: PairPotential) -> float:
        return 2.0 * self.T * interaction_budget(w)

    def truncation_tail(self, w: PairPotential) -> float:
        return 0.0

    def label(self) -> str:
        return f"square(T={self.T})"


@dataclass(frozen=True)
class FrameRegion:
    """([-T,T] x [-S,S]) union ([-S,S] x [-T,T])."""

    S: float
    T: float

    def __post_init__(self):
        if not 0 < self.S <= self.T:
            raise ValueError("frame region needs 0 < S <= T")

    def span(self) -> float:
        return self.T

    def weights(self, tg: TimeGrid) -> np.ndarray:
        return (_rect(tg, (-self.T, self.T), (-self.S, self.S))
                + _rect(tg, (-self.S, self.S), (-self.T, self.T))
                - _rect(tg, (-self.S, self.S), (-self.S, self.S)))

    def envelope_bound(self, w: PairPotential) -> float:
        return 4.0 * self.S * interaction_budget(w)

    def truncation_tail(self, w: PairPotential) -> float:
        return 0.0

    def label(self) -> str:
        return f"frame(S={self.S}, T={self.T})"


@dataclass(frozen=True)
class StripRegion:
    """(R x [-S,S]) truncated to |t| <= t_max."""

    S: float
    t_max: float

    def __post_init__(self):
        if not 0 < self.S <= self.t_max:
            raise ValueError("strip region needs 0 < S <= t_max")

    def span(self) -> float:
        return self.t_max

    def weights(self, tg: TimeGrid) -> np.ndarray:
        return _rect(tg, (-self.t_max, self.t_max), (-self.S, self.S))

    def envelope_bound(self, w: PairPotential) -> float:
        return 2.0 * self.S * interaction_budget(w)

    def truncation_tail(self, w: PairPotential) -> float:
        return 4.0 * self.S * w.envelope_tail(self.t_max - self.S)

    def label(self) -> str:
        return f"strip(S={self.S}, t_max={self.t_max})"


@dataclass(frozen=True)
class InfiniteFrameRegion:
    """((R x [-S,S]) union ([-S,S] x R)) truncated to the square |t|,|s| <= t_max."""

    S: float
    t_max: float

    def __post_init__(self):
        if not 0 < self.S <= self.t_max:
            raise ValueError("infinite frame needs 0 < S <= t_max")

    def span(self) -> float:
        return self.t_max

    def weights(self, tg: TimeGrid) -> np.ndarray:
        return (_rect(tg, (-self.t_max, self.t_max), (-self.S, self.S))
                + _rect(tg, (-self.S, self.S), (-self.t_max, self.t_max))
                - _rect(tg, (-self.S, self.S), (-self.S, self.S)))

    def envelope_bound(self, w: PairPotential) -> float:
        return 4.0 * self.S * interaction_budget(w)

    def truncation_tail(self, w: PairPotential) -> float:
        return 8.0 * self.S * w.envelope_tail(self.t_max - self.S)

    def label(self) -> str:
        return f"infinite_frame(S={self.S}, t_max={self.t_max})"


def interaction_energy(w: PairPotential, path: Path, region) -> float:
    """-(2D quadrature of W over the region) on the path's time grid."""
    tg = path.timegrid
    if region.span() > tg.T + 1e-12:
        raise ValueError(f"path covers [-{tg.T}, {tg.T}] but region {region.label()} "
                         f"extends to {region.span()}")
    mask = region.weights(tg)
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    x = path.positions
    lag = np.abs(tg.times[rows][:, None] - tg.times[cols][None, :])
    vals = w.evaluate(x[rows][:, None], x[cols][None, :], lag)
    return -float(np.sum(mask[np.ix_(rows, cols)] * vals))


def energy_report(w: PairPotential, path: Path, region) -> dict:
    """JSON-ready record: value, envelope bound, truncation interval."""
    value = interaction_energy(w, path, region)
    bound = region.envelope_bound(w)
    tail = region.truncation_tail(w)
    report = {
        "region": region.label(),
        "value": value,
        "bound": None if math.isinf(bound) else bound,
        "tail_interval": None if tail == 0.0 else [value - tail, value + tail],
    }
    return report


def apply_shift(path: Path, tau: float) -> Path:
    """Outward two-sided time shift: value at t >= 0 comes from t + tau,
    value at t < 0 from t - tau; the result spans [-T + tau, T - tau]."""
    tg = path.timegrid
    k = round(tau / tg.dt)
    if k < 0 or abs(k * tg.dt - tau) > 1e-12 * max(1.0, tau):
        raise ValueError(f"shift {tau} is not a nonnegative multiple of dt = {tg.dt}")
    if k == 0:
        return Path(tg, path.positions.copy())
    if tg.n - k < 1:
        raise ValueError(f"shift {tau} leaves no interior window of the path")
    out_tg = TimeGrid((tg.n - k) * tg.dt, tg.dt)
    m = out_tg.n
    idx = np.arange(-m, m + 1)
    src = np.where(idx >= 0, idx + k, idx - k) + tg.n
    return Path(out_tg, path.positions[src])


@dataclass
class ShiftInequalityReport:
    """Outcome of testing energy(x) <= energy(shifted x) + C tau + D."""

    taus: list
    worst_gap_per_tau: list
    violations: list
    c_star: float
    d_star: float

    @property
    def holds(self) -> bool:
        return not self.violations


def _feasible_line(taus: np.ndarray, gaps: np.ndarray) -> tuple[float, float]:
    """Least-squares slope/intercept through the per-tau worst gaps, lifted
    to feasibility and clipped to the nonnegative quadrant."""
    if taus.size == 1:
        c = 0.0
    else:
        tc = taus - taus.mean()
        c = float(np.dot(tc, gaps - gaps.mean()) / np.dot(tc, tc))
    c = max(c, 0.0)
    d = max(0.0, float(np.max(gaps - c * taus)))
    return c, d


def check_shift_inequality(w: PairPotential, paths, T: float, taus,
                           C: float | None = None, D: float | None = None,
                           tol: float = 1e-9) -> ShiftInequalityReport:
    """Check the shift stability inequality on an ensemble.

    Each path must span [-T - max(tau), T + max(tau)]. When C and D are
    given, violations are reported against them; the fitted (c_star,
    d_star) is the smallest feasible line over the sampled gaps either way.
    """
    paths = list(paths)
    taus = np.asarray(sorted(float(t) for t in taus), dtype=float)
    if not paths or taus.size == 0 or taus[0] <= 0:
        raise ValueError("need paths and positive shift values")
    region = SquareRegion(T)
    base = [interaction_energy(w, p, region) for p in paths]
    worst = np.full(taus.size, -math.inf)
    gaps = np.empty((len(paths), taus.size))
    for j, tau in enumerate(taus):
        for i, p in enumerate(paths):
            shifted = apply_shift(p, tau)
            gaps[i, j] = base[i] - interaction_energy(w, shifted, region)
        worst[j] = gaps[:, j].max()
    c_star, d_star = _feasible_line(taus, worst)
    violations = []
    if C is None or D is None:
        C, D = c_star, d_star
    for i in range(len(paths)):
        for j, tau in enumerate(taus):
            if gaps[i, j] > C * tau + D + tol:
                violations.append((i, float(tau), float(gaps[i, j] - C * tau - D)))
    return ShiftInequalityReport(list(taus), [float(g) for g in worst],
                                 violations, c_star, d_star)


@dataclass
class LagDampingReport:
    """Half-plane lag-increase comparison: quadrature of
    W(|s-t|) - W(|s-t| + 2 tau) over [-T,0] x [0,T], fitted L tau + M."""

    taus: list
    values: np.ndarray
    l_star: float
    m_star: float

    @property
    def all_nonpositive(self) -> bool:
        return bool(np.max(self.values) <= 1e-12)


def check_lag_damping(w: PairPotential, paths, T: float, taus) -> LagDampingReport:
    """Evaluate the lag-damping integrals on an ensemble and fit (L, M)."""
    paths = list(paths)
    taus = np.asarray(sorted(float(t) for t in taus), dtype=float)
    if not paths or taus.size == 0 or taus[0] <= 0:
        raise ValueError("need paths and positive shift values")
    values = np.empty((len(paths), taus.size))
    for i, p in enumerate(paths):
        tg = p.timegrid
        if T > tg.T + 1e-12:
            raise ValueError(f"path covers [-{tg.T}, {tg.T}], cannot integrate to T = {T}")
        w_neg = tg.interval_weights(-T, 0.0)
        w_pos = tg.interval_weights(0.0, T)
        rows = np.flatnonzero(w_neg)
        cols = np.flatnonzero(w_pos)
        xs = p.positions[rows][:, None]
        xt = p.positions[cols][None, :]
        lag = np.abs(tg.times[rows][:, None] - tg.times[cols][None, :])
        mask = np.outer(w_neg[rows], w_pos[cols])
        for j, tau in enumerate(taus):
            diff = w.evaluate(xs, xt, lag) - w.evaluate(xs, xt, lag + 2.0 * tau)
            values[i, j] = float(np.sum(mask * diff))
    worst = values.max(axis=0)
    l_star, m_star = _feasible_line(taus, worst)
    return LagDampingReport(list(taus), values, l_star, m_star)


@dataclass
class DoubledPath:
    """One-sided pair of branches on 0..N; index 0 carries the same value
    on both branches when the pair is the fold of a two-sided path."""

    timegrid: TimeGrid
    forward: np.ndarray
    backward: np.ndarray

    def __post_init__(self):
        self.forward = np.asarray(self.forward, dtype=float)
        self.backward = np.asarray(self.backward, dtype=float)
        n = self.timegrid.n + 1
        if self.forward.shape != (n,) or self.backward.shape != (n,):
            raise ValueError(f"doubled path needs two branches of length {n}")


def fold_path(path: Path) -> DoubledPath:
    """Fold a two-sided path into (forward, backward) one-sided branches."""
    n = path.timegrid.n
    return DoubledPath(path.timegrid, path.positions[n:], path.positions[n::-1])


def doubled_energy(w: PairPotential, dp: DoubledPath, T: float) -> float:
    """Energy of the folded pair: same-branch terms at lag |s-t| plus
    cross-branch terms at lag s+t, integrated over [0,T]^2."""
    tg = dp.timegrid
    if T > tg.T + 1e-12:
        raise ValueError(f"doubled path covers [0, {tg.T}], got T = {T}")
    k = tg.index_of_time(T) - tg.n
    wt = np.full(k + 1, tg.dt)
    wt[0] = wt[-1] = 0.5 * tg.dt
    t = np.arange(k + 1) * tg.dt
    f = dp.forward[:k + 1]
    b = dp.backward[:k + 1]
    lag_diff = np.abs(t[:, None] - t[None, :])
    lag_sum = t[:, None] + t[None, :]
    total = (w.evaluate(f[:, None], f[None, :], lag_diff)
             + w.evaluate(b[:, None], b[None, :], lag_diff)
             + w.evaluate(f[:, None], b[None, :], lag_sum)
             + w.evaluate(b[:, None], f[None, :], lag_sum))
    return -float(np.sum(np.outer(wt, wt) * total))


def mean_field_energy(v: SitePotential, pair_fn, path: Path, T: float) -> float:
    """Comparison functional: -int V(x_s) ds - (1/2T) int int pair(x_s, x_t)."""
    tg = path.timegrid
    if T > tg.T + 1e-12:
        raise ValueError(f"path covers [-{tg.T}, {tg.T}], got T = {T}")
    wts = tg.interval_weights(-T, T)
    idx = np.flatnonzero(wts)
    x = path.positions[idx]
    single = -float(np.sum(wts[idx] * v.evaluate(x)))
    if pair_fn is None:
        return single
    vals = np.asarray(pair_fn(x[:, None], x[None, :]), dtype=float)
    double = float(np.sum(np.outer(wts[idx], wts[idx]) * vals))
    return single - double / (2.0 * T)
