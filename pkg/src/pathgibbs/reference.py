"""Stationary reference diffusion built from a ground state.

The primary sampler is the exact discrete chain on the space grid, whose
one-step law is the heat kernel reweighted by the ground state. An
Euler-Maruyama integrator for the corresponding SDE serves as an
independent cross-check, and a Trotter-product evaluator verifies the
kernel representation of expectations.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .grids import Path, TimeGrid
from .spectral import GroundState, HeatKernel
from .stats import log_log_slope

_ENSEMBLE_MAGIC = b"PGPATH01"

DRIFT_PSI_FLOOR = 1e-12


def make_rng(seed, *stream) -> np.random.Generator:
    """Counter-based generator; (seed, stream ids) fully determine draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(
        seed, spawn_key=tuple(int(s) for s in stream))))


def stationary_density(gs: GroundState) -> np.ndarray:
    """Pointwise stationary density psi^2 (unit trapezoid mass)."""
    dens = gs.psi**2
    w = np.full(gs.grid.points, gs.grid.h)
    w[0] = w[-1] = 0.5 * gs.grid.h
    mass = float(dens @ w)
    if abs(mass - 1.0) > 1e-10:
        raise ValueError(f"stationary density mass {mass} deviates from 1; "
                         "box too small for this potential")
    return dens


def stationary_weights(gs: GroundState) -> np.ndarray:
    """Atom masses of the discrete stationary law (sums to 1 exactly)."""
    pi = gs.psi**2 * gs.grid.h
    return pi / pi.sum()


def transition_density(gs: GroundState, kernel: HeatKernel, y: float) -> np.ndarray:
    """Pointwise density over z of one step from y (a grid node)."""
    iy = gs.grid.index_of(y)
    dens = kernel.matrix[iy] * gs.psi / (gs.psi[iy] * gs.grid.h)
    w = np.full(gs.grid.points, gs.grid.h)
    w[0] = w[-1] = 0.5 * gs.grid.h
    mass = float(dens @ w)
    if abs(mass - 1.0) > 1e-4:
        raise ValueError(f"transition mass {mass} deviates from 1 beyond 1e-4: "
                         "kernel and ground state are inconsistent")
    return dens


def transfer_matrix(gs: GroundState, kernel: HeatKernel) -> np.ndarray:
    """Row-stochastic one-step matrix P(i,j) = K(i,j) psi_j / psi_i.

    Rows are clipped at zero and renormalized: rounding can leave entries
    of order -1e-17 in rows whose stationary mass is below 1e-25, and the
    samplers need exact simplex rows.
    """
    p = kernel.matrix * gs.psi[None, :] / gs.psi[:, None]
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=1, keepdims=True)


def _sample_rows(cdf_rows: np.ndarray, current: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Vectorized inverse-CDF step: for each path, draw from its current row.

    Groups paths by current node so each distinct row is searched once.
    """
    out = np.empty(current.size, dtype=np.int64)
    order = np.argsort(current, kind="stable")
    sorted_nodes = current[order]
    starts = np.flatnonzero(np.concatenate([[True], sorted_nodes[1:] != sorted_nodes[:-1]]))
    bounds = np.append(starts, current.size)
    for k in range(starts.size):
        sel = order[bounds[k]:bounds[k + 1]]
        row = cdf_rows[sorted_nodes[starts[k]]]
        out[sel] = np.searchsorted(row, u[sel], side="right")
    return np.minimum(out, cdf_rows.shape[1] - 1)


@dataclass
class PathEnsemble:
    """Positions (and grid indices in grid mode) for a batch of paths."""

    timegrid: TimeGrid
    positions: np.ndarray
    indices: np.ndarray | None = None

    def path(self, i: int) -> Path:
        return Path(self.timegrid, self.positions[i])

    def __len__(self) -> int:
        return self.positions.shape[0]

    def paths(self):
        return [self.path(i) for i in range(len(self))]


def sample_paths(gs: GroundState, kernel: HeatKernel, timegrid: TimeGrid,
                 n_paths: int, seed, mode: str = "grid") -> PathEnsemble:
    """Stationary ensemble of reference paths on the time grid.

    mode "grid": exact chain on the space nodes. mode "interp": the same
    chain emitted with independent uniform within-cell offsets, giving
    atom-free positions whose law is the node law smoothed over cells.
    """
    if abs(kernel.dt - timegrid.dt) > 1e-12:
        raise ValueError(f"kernel step {kernel.dt} does not match time grid step {timegrid.dt}")
    if mode not in ("grid", "interp"):
        raise ValueError(f"unknown sampling mode {mode!r}")
    rng = make_rng(seed)
    pi = stationary_weights(gs)
    p = transfer_matrix(gs, kernel)
    cdf_rows = np.cumsum(p, axis=1)
    n_times = timegrid.n_times
    idx = np.empty((n_paths, n_times), dtype=np.int64)
    idx[:, 0] = np.searchsorted(np.cumsum(pi), rng.random(n_paths), side="right")
    idx[:, 0] = np.minimum(idx[:, 0], pi.size - 1)
    for t in range(1, n_times):
        idx[:, t] = _sample_rows(cdf_rows, idx[:, t - 1], rng.random(n_paths))
    positions = gs.grid.x[idx]
    if mode == "interp":
        jitter = (rng.random(idx.shape) - 0.5) * gs.grid.h
        positions = np.clip(positions + jitter, gs.grid.lower, gs.grid.upper)
        return PathEnsemble(timegrid, positions, None)
    return PathEnsemble(timegrid, positions, idx)


def sample_path(gs: GroundState, kernel: HeatKernel, timegrid: TimeGrid,
                seed, mode: str = "grid") -> Path:
    return sample_paths(gs, kernel, timegrid, 1, seed, mode).path(0)


def bridge_conditional(kernel: HeatKernel, current: int, pin: int,
                       steps_left: int) -> np.ndarray:
    """Law of the next node given the current node and the pin after
    `steps_left` further steps (probabilities over the grid)."""
    if steps_left < 1:
        raise ValueError("bridge conditional needs at least one step to the pin")
    if steps_left == 1:
        weights = kernel.matrix[current] * (np.arange(kernel.grid.points) == pin)
    else:
        col = (kernel.eigvecs * np.exp(-(steps_left - 1) * kernel.dt * kernel.eigvals)) \
            @ kernel.eigvecs[pin]
        weights = kernel.matrix[current] * np.clip(col, 0.0, None)
    total = weights.sum()
    if total <= 0.0:
        raise ValueError("zero conditional mass between the endpoints; "
                         "increase dt or the number of bridge steps")
    return weights / total


def sample_bridge(gs: GroundState, kernel: HeatKernel, timegrid: TimeGrid,
                  a: float, b: float, seed) -> Path:
    """Exact conditional chain given x at -T equals a and x at +T equals b."""
    ia, ib = gs.grid.index_of(a), gs.grid.index_of(b)
    rng = make_rng(seed)
    m = timegrid.n_times - 1
    idx = np.empty(timegrid.n_times, dtype=np.int64)
    idx[0] = ia
    idx[-1] = ib
    for k in range(1, m):
        probs = bridge_conditional(kernel, int(idx[k - 1]), ib, m - k + 1)
        idx[k] = min(np.searchsorted(np.cumsum(probs), rng.random(), side="right"),
                     probs.size - 1)
    return Path(timegrid, gs.grid.x[idx])


def bridge_marginal(kernel: HeatKernel, ia: int, ib: int, k: int, m: int) -> np.ndarray:
    """Exact law of the bridge at interior step k of m (matrix computation)."""
    if not 0 < k < m:
        raise ValueError("bridge marginal needs an interior index")
    fwd = kernel.power(k)[ia]
    bwd = kernel.power(m - k)[:, ib]
    w = fwd * bwd
    return w / w.sum()


@dataclass
class DriftTable:
    """Tabulated drift log-derivative of the ground state, with the clamp."""

    x: np.ndarray
    drift: np.ndarray

    def at(self, pos):
        return np.interp(pos, self.x, self.drift)


def drift_table(gs: GroundState) -> DriftTable:
    """Central-difference d/dx log psi, constant beyond the psi floor."""
    valid = gs.psi >= DRIFT_PSI_FLOOR
    x = gs.grid.x[valid]
    lp = np.log(gs.psi[valid])
    d = np.gradient(lp, x)
    if gs.radial:
        # stored profile is u(r) = r psi(r); drift of psi needs -1/r
        d = d - 1.0 / x
    return DriftTable(x, d)


@dataclass
class SdeResult:
    times: np.ndarray
    positions: np.ndarray
    reflections: int


def simulate_sde(gs: GroundState, duration: float, dt: float, x_init,
                 seed, noise_scale: float = 1.0) -> SdeResult:
    """Euler-Maruyama cross-check of the reference diffusion.

    d=1 for ordinary ground states; for radial ground states the state is
    a point in R^3 with isotropic noise and radial drift. Excursions past
    the grid edge are reflected and counted.
    """
    if dt <= 0 or duration <= 0:
        raise ValueError("SDE simulation needs positive duration and dt")
    steps = int(round(duration / dt))
    table = drift_table(gs)
    rng = make_rng(seed)
    dim = 3 if gs.radial else 1
    pos = np.empty((steps + 1, dim))
    pos[0] = np.asarray(x_init, dtype=float).reshape(dim)
    reflections = 0
    lo, hi = gs.grid.lower, gs.grid.upper
    sq = np.sqrt(dt)
    for n in range(steps):
        x = pos[n]
        if gs.radial:
            r = float(np.sqrt(np.sum(x * x)))
            drift = table.at(r) * (x / r) if r > 0 else np.zeros(dim)
        else:
            drift = table.at(x)
        nxt = x + drift * dt + noise_scale * sq * rng.standard_normal(dim)
        if gs.radial:
            r = float(np.sqrt(np.sum(nxt * nxt)))
            if r > hi:
                nxt = nxt * (2 * hi - r) / r
                reflections += 1
        else:
            if nxt[0] > hi:
                nxt[0] = 2 * hi - nxt[0]
                reflections += 1
            elif nxt[0] < lo:
                nxt[0] = 2 * lo - nxt[0]
                reflections += 1
        pos[n + 1] = nxt
    times = np.arange(steps + 1) * dt
    return SdeResult(times, pos if gs.radial else pos[:, 0], reflections)


@dataclass
class FkfReport:
    dts: list
    residuals: list
    chain_value: float
    order: float


def _trotter_expectation(gs: GroundState, f_vals: np.ndarray, T: float, dt: float) -> float:
    """psi-weighted Strang product of (half potential, free Gaussian kernel,
    half potential) steps, normalized so f = 1 returns exactly 1."""
    n_steps = round(T / dt)
    if abs(n_steps * dt - T) > 1e-12:
        raise ValueError(f"T = {T} is not a multiple of dt = {dt}")
    x = gs.grid.x
    h = gs.grid.h
    v_sh = gs.v_grid - gs.energy
    half = np.exp(-0.5 * dt * v_sh)
    gauss = h * np.exp(-((x[:, None] - x[None, :]) ** 2) / (2.0 * dt)) \
        / np.sqrt(2.0 * np.pi * dt)
    num = f_vals * gs.psi
    den = gs.psi.copy()
    for _ in range(n_steps):
        num = half * (gauss @ (half * num))
        den = half * (gauss @ (half * den))
    return float(gs.psi @ num) / float(gs.psi @ den)


def verify_fkf(gs: GroundState, f, T: float, dt: float) -> float:
    """|stationary chain expectation - Trotter-product expectation| of f."""
    f_vals = np.asarray(f(gs.grid.x) if callable(f) else f, dtype=float)
    chain = float(stationary_weights(gs) @ f_vals)
    return abs(_trotter_expectation(gs, f_vals, T, dt) - chain)


def fkf_convergence(gs: GroundState, f, T: float, dts) -> FkfReport:
    """Residuals over a dt ladder plus the fitted convergence order."""
    f_vals = np.asarray(f(gs.grid.x) if callable(f) else f, dtype=float)
    chain = float(stationary_weights(gs) @ f_vals)
    residuals = [abs(_trotter_expectation(gs, f_vals, T, dt) - chain) for dt in dts]
    order = log_log_slope(dts, residuals)
    return FkfReport(list(dts), residuals, chain, order)


def export_path_csv(path: Path, file) -> None:
    data = np.column_stack([path.timegrid.times, path.positions])
    np.savetxt(file, data, delimiter=",", header="time,position", comments="")


def save_ensemble(ens: PathEnsemble, file) -> None:
    """Little-endian binary dump of an ensemble (times then positions)."""
    with open(file, "wb") as f:
        f.write(_ENSEMBLE_MAGIC)
        f.write(struct.pack("<qqd", len(ens), ens.timegrid.n_times, ens.timegrid.dt))
        f.write(np.ascontiguousarray(ens.positions, dtype="<f8").tobytes())


def load_ensemble(file) -> PathEnsemble:
    with open(file, "rb") as f:
        if f.read(8) != _ENSEMBLE_MAGIC:
            raise ValueError(f"{file}: not an ensemble file")
        n_paths, n_times, dt = struct.unpack("<qqd", f.read(24))
        positions = np.frombuffer(f.read(8 * n_paths * n_times), dtype="<f8")
    n = (n_times - 1) // 2
    tg = TimeGrid(n * dt, dt)
    return PathEnsemble(tg, positions.reshape(n_paths, n_times).astype(float))
