"""MCMC sampling of pair-interaction path measures, with exact small oracles.

The target measure reweights the stationary reference chain on the time grid
by exp(H), where H is the negative double-time interaction integral over the
square region (see the energy module for the sign convention).  Moves are
Metropolis-within-Gibbs with reference-conditional (heat-bath) proposals, so
the acceptance ratio only involves interaction differences.

Small instances (few space nodes, few time slices) are enumerated exactly:
`brute_force_measure` returns the full normalized table, and
`window_conditional_exact` the exact conditional law of a time window given
the configuration outside it.  These serve as oracles for the chain.
"""

from dataclasses import dataclass, field
import json
import warnings

import numpy as np
from scipy.special import logsumexp

from .grids import SpaceGrid, TimeGrid, Path
from .potentials import PairPotential
from .spectral import GroundState, HeatKernel, ground_state, heat_kernel, build_hamiltonian
from .reference import make_rng, stationary_weights, sample_paths, sample_bridge
from .energy import SquareRegion, FrameRegion


@dataclass(frozen=True)
class Smeared:
    """Free endpoints; the left end is drawn from the stationary density."""


@dataclass(frozen=True)
class Pinned:
    """Both endpoints held fixed at the given positions."""

    left: float
    right: float


@dataclass
class GibbsSpec:
    """Everything needed to sample one finite-volume path measure."""

    gs: GroundState
    kernel: HeatKernel
    w: PairPotential
    timegrid: TimeGrid
    boundary: object = field(default_factory=Smeared)

    def __post_init__(self):
        if abs(self.kernel.dt - self.timegrid.dt) > 1e-12:
            raise ValueError(
                f"kernel step {self.kernel.dt} does not match time step {self.timegrid.dt}")
        if self.gs.grid.points != self.kernel.grid.points:
            raise ValueError("ground state and kernel live on different grids")
        if isinstance(self.boundary, Pinned):
            self.gs.grid.index_of(self.boundary.left)
            self.gs.grid.index_of(self.boundary.right)
        elif not isinstance(self.boundary, Smeared):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")

    @property
    def grid(self) -> SpaceGrid:
        return self.gs.grid

    @classmethod
    def build(cls, v, w, T, dt, boundary=None, grid=None):
        """Solve the spectral problem for `v` and assemble a spec."""
        from .spectral import default_grid
        grid = grid if grid is not None else default_grid()
        gs = ground_state(v, grid)
        return cls(gs, heat_kernel(gs, dt), w, TimeGrid(T, dt),
                   boundary if boundary is not None else Smeared())


@dataclass
class ChainConfig:
    sweeps: int
    burnin: int = 100
    block_len: int = 5
    seed: int = 0
    n_chains: int = 1
    mode: str = "interp"
    record_every: int = 1

    def __post_init__(self):
        if self.sweeps < 1 or self.burnin < 0:
            raise ValueError("need sweeps >= 1 and burnin >= 0")
        if self.block_len < 1:
            raise ValueError("block length must be at least 1")
        if self.mode not in ("grid", "interp"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.n_chains < 1 or self.record_every < 1:
            raise ValueError("need n_chains >= 1 and record_every >= 1")


@dataclass
class ChainState:
    """Snapshot of a single chain after a sweep."""

    path: Path
    sweep: int
    accepted_single: int
    proposed_single: int
    accepted_block: int
    proposed_block: int
    rng: np.random.Generator


@dataclass
class EnsembleResult:
    """Recorded positions of a batch of chains, one row per recorded sweep."""

    timegrid: TimeGrid
    record_indices: np.ndarray
    positions: np.ndarray  # (records, chains, len(record_indices))
    accept_single: float
    accept_block: float
    config: ChainConfig

    def pooled(self, time_index: int) -> np.ndarray:
        """All recorded samples of the coordinate at one time index."""
        where = np.flatnonzero(self.record_indices == time_index)
        if where.size != 1:
            raise ValueError(f"time index {time_index} was not recorded")
        return self.positions[:, :, where[0]].reshape(-1)

    def chain_series(self, time_index: int) -> np.ndarray:
        """(chains, records) series of one coordinate, for autocorrelation."""
        where = np.flatnonzero(self.record_indices == time_index)
        if where.size != 1:
            raise ValueError(f"time index {time_index} was not recorded")
        return self.positions[:, :, where[0]].T.copy()


def _sample_categorical_rows(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One draw per row of an unnormalized probability matrix."""
    cdf = np.cumsum(probs, axis=1)
    total = cdf[:, -1]
    if np.any(total <= 0.0):
        raise ValueError("proposal distribution has zero mass; "
                         "anchors are too far apart for this time step")
    draws = u * total
    idx = np.sum(cdf < draws[:, None], axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def interaction_action(w: PairPotential, positions: np.ndarray,
                       mask: np.ndarray, lags: np.ndarray) -> np.ndarray:
    """H = -sum_ij mask_ij W(x_i, x_j, |t_i - t_j|) for a batch of paths."""
    positions = np.atleast_2d(positions)
    live = np.flatnonzero(np.any(mask != 0.0, axis=1) | np.any(mask != 0.0, axis=0))
    sub = np.ix_(live, live)
    vals = w.evaluate(positions[:, live, None], positions[:, None, live], lags[sub])
    return -np.einsum("cij,ij->c", np.atleast_3d(vals), mask[sub])


class _Engine:
    """Batched Metropolis-within-Gibbs kernel over a set of chains.

    `frozen` marks time indices that never move (pinned endpoints, or the
    exterior of a conditioning window); `mask` is the quadrature weight
    matrix of the interaction region (the full square by default).
    """

    def __init__(self, spec: GibbsSpec, config: ChainConfig, init: np.ndarray,
                 mask: np.ndarray | None = None, frozen: np.ndarray | None = None):
        self.spec = spec
        self.w = spec.w
        self.grid = spec.grid
        self.k = spec.kernel.matrix
        self.psi = spec.gs.psi
        self.mode = config.mode
        tg = spec.timegrid
        self.n_t = tg.n_times
        self.lags = np.abs(tg.times[:, None] - tg.times[None, :])
        self.mask = SquareRegion(tg.T).weights(tg) if mask is None else np.asarray(mask)
        if frozen is None:
            frozen = np.zeros(self.n_t, dtype=bool)
            if isinstance(spec.boundary, Pinned):
                frozen[0] = frozen[-1] = True
        self.frozen = frozen
        self.free = np.flatnonzero(~frozen)
        if self.free.size == 0:
            raise ValueError("no free time indices to update")
        # off-diagonal weights, read as rows (first slot) or columns (second)
        self.offdiag_w = self.mask.copy()
        np.fill_diagonal(self.offdiag_w, 0.0)
        self.diag_w = np.diag(self.mask).copy()
        self.pos = np.array(init, dtype=float, copy=True)
        if self.pos.shape != (config.n_chains, self.n_t):
            raise ValueError("initial positions have the wrong shape")
        self.rng = make_rng(config.seed, 11)
        self.block_len = config.block_len
        self._kpow = {1: self.k}
        self._block_starts = self._valid_block_starts()
        self.accepted_single = 0
        self.proposed_single = 0
        self.accepted_block = 0
        self.proposed_block = 0

    def _valid_block_starts(self):
        """Starts s such that sites s..s+L-1 are free and both anchors exist."""
        starts = []
        length = self.block_len
        for s in range(1, self.n_t - length):
            if not self.frozen[s:s + length].any():
                starts.append(s)
        return np.asarray(starts, dtype=int)

    def _power(self, p: int) -> np.ndarray:
        if p not in self._kpow:
            self._kpow[p] = self.spec.kernel.power(p)
        return self._kpow[p]

    def _cells(self, values: np.ndarray) -> np.ndarray:
        return self.grid.nearest_index(values)

    def _emit(self, nodes: np.ndarray) -> np.ndarray:
        z = self.grid.x[nodes]
        if self.mode == "interp":
            z = z + (self.rng.random(nodes.shape) - 0.5) * self.grid.h
            z = np.clip(z, self.grid.lower, self.grid.upper)
        return z

    def _site_proposal_probs(self, i: int) -> np.ndarray:
        if i > 0:
            left = self.k[self._cells(self.pos[:, i - 1])]
        if i < self.n_t - 1:
            right = self.k[self._cells(self.pos[:, i + 1])]
        if i == 0:
            return self.psi[None, :] * right
        if i == self.n_t - 1:
            return left * self.psi[None, :]
        return left * right

    def _delta_h_single(self, i: int, z: np.ndarray) -> np.ndarray:
        xi = self.pos[:, i]
        lag = self.lags[i][None, :]
        d_row = (self.w.evaluate(z[:, None], self.pos, lag)
                 - self.w.evaluate(xi[:, None], self.pos, lag)) @ self.offdiag_w[i]
        d_col = (self.w.evaluate(self.pos, z[:, None], lag)
                 - self.w.evaluate(self.pos, xi[:, None], lag)) @ self.offdiag_w[:, i]
        d_diag = self.diag_w[i] * (self.w.evaluate(z, z, 0.0)
                                   - self.w.evaluate(xi, xi, 0.0))
        return -(d_row + d_col + d_diag)

    def _touching_part(self, pos: np.ndarray, lo: int, hi: int) -> np.ndarray:
        """Interaction sum over pairs with at least one index in [lo, hi).

        Rows inside the block are summed over every column, so block-block
        pairs are counted there; column sums are restricted to rows outside
        the block to avoid counting those pairs twice.
        """
        n_c = pos.shape[0]
        out = np.zeros(n_c)
        outside = np.ones(self.n_t, dtype=bool)
        outside[lo:hi] = False
        for i in range(lo, hi):
            lag = self.lags[i][None, :]
            out += self.w.evaluate(pos[:, i, None], pos, lag) @ self.offdiag_w[i]
            out += (self.w.evaluate(pos, pos[:, i, None], lag)
                    @ (self.offdiag_w[:, i] * outside))
            out += self.diag_w[i] * self.w.evaluate(pos[:, i], pos[:, i], 0.0)
        return out

    def _delta_h_block(self, s: int, length: int, znew: np.ndarray) -> np.ndarray:
        pos_new = self.pos.copy()
        pos_new[:, s:s + length] = znew
        return -(self._touching_part(pos_new, s, s + length)
                 - self._touching_part(self.pos, s, s + length))

    def _site_move(self, i: int):
        n_c = self.pos.shape[0]
        probs = self._site_proposal_probs(i)
        nodes = _sample_categorical_rows(probs, self.rng.random(n_c))
        z = self._emit(nodes)
        dh = self._delta_h_single(i, z)
        accept = np.log(self.rng.random(n_c)) < dh
        self.pos[accept, i] = z[accept]
        self.proposed_single += n_c
        self.accepted_single += int(accept.sum())

    def _block_move(self):
        if self._block_starts.size == 0:
            return
        n_c = self.pos.shape[0]
        length = self.block_len
        s = int(self._block_starts[self.rng.integers(self._block_starts.size)])
        a = self._cells(self.pos[:, s - 1])
        b = self._cells(self.pos[:, s + length])
        nodes = np.empty((n_c, length), dtype=np.int64)
        cur = a
        for k in range(length):
            back = self._power(length - k)
            probs = self.k[cur] * back[b]
            cur = _sample_categorical_rows(probs, self.rng.random(n_c))
            nodes[:, k] = cur
        znew = self._emit(nodes)
        dh = self._delta_h_block(s, length, znew)
        accept = np.log(self.rng.random(n_c)) < dh
        self.pos[accept, s:s + length] = znew[accept]
        self.proposed_block += n_c
        self.accepted_block += int(accept.sum())

    def sweep(self):
        for i in self.free:
            self._site_move(i)
        self._block_move()

    def acceptance_rates(self):
        single = self.accepted_single / max(self.proposed_single, 1)
        block = self.accepted_block / max(self.proposed_block, 1)
        return single, block

    def warn_if_stuck(self):
        proposed = self.proposed_single + self.proposed_block
        accepted = self.accepted_single + self.accepted_block
        if proposed > 0 and accepted / proposed < 0.01:
            warnings.warn(
                f"acceptance rate {accepted / proposed:.2%} over burn-in is below 1%; "
                f"consider reducing block_len from {self.block_len} to "
                f"{max(1, self.block_len // 2)}", RuntimeWarning)

    def reset_counters(self):
        self.accepted_single = self.proposed_single = 0
        self.accepted_block = self.proposed_block = 0


def _initial_positions(spec: GibbsSpec, config: ChainConfig) -> np.ndarray:
    """Exact reference draw per chain (bridge draw when pinned)."""
    ens = sample_paths(spec.gs, spec.kernel, spec.timegrid, config.n_chains,
                       seed=(config.seed, 12), mode=config.mode)
    pos = ens.positions.copy()
    if isinstance(spec.boundary, Pinned):
        for c in range(config.n_chains):
            br = sample_bridge(spec.gs, spec.kernel, spec.timegrid,
                               spec.boundary.left, spec.boundary.right,
                               seed=(config.seed, 13, c))
            pos[c] = br.positions
    return pos


def _run_engine(engine: _Engine, spec: GibbsSpec, config: ChainConfig,
                record_indices) -> EnsembleResult:
    if record_indices is None:
        record_indices = np.arange(spec.timegrid.n_times)
    record_indices = np.asarray(record_indices, dtype=int)
    for _ in range(config.burnin):
        engine.sweep()
    engine.warn_if_stuck()
    engine.reset_counters()
    n_records = config.sweeps // config.record_every
    out = np.empty((n_records, config.n_chains, record_indices.size))
    row = 0
    for sweep in range(config.sweeps):
        engine.sweep()
        if (sweep + 1) % config.record_every == 0 and row < n_records:
            out[row] = engine.pos[:, record_indices]
            row += 1
    single, block = engine.acceptance_rates()
    return EnsembleResult(spec.timegrid, record_indices, out[:row], single, block, config)


def run_ensemble(spec: GibbsSpec, config: ChainConfig,
                 record_indices=None) -> EnsembleResult:
    """Run a batch of chains and record positions at the given time indices."""
    engine = _Engine(spec, config, _initial_positions(spec, config))
    return _run_engine(engine, spec, config, record_indices)


def gibbs_chain(spec: GibbsSpec, config: ChainConfig):
    """Single-chain sweep stream; yields a ChainState after every sweep."""
    cfg = ChainConfig(config.sweeps, config.burnin, config.block_len, config.seed,
                      1, config.mode, config.record_every)
    engine = _Engine(spec, cfg, _initial_positions(spec, cfg))
    for _ in range(cfg.burnin):
        engine.sweep()
    engine.warn_if_stuck()
    for sweep in range(cfg.sweeps):
        engine.sweep()
        yield ChainState(Path(spec.timegrid, engine.pos[0].copy()), sweep + 1,
                         engine.accepted_single, engine.proposed_single,
                         engine.accepted_block, engine.proposed_block, engine.rng)


def pinned_chain(spec: GibbsSpec, config: ChainConfig):
    """Chain stream for a pinned spec (endpoints frozen)."""
    if not isinstance(spec.boundary, Pinned):
        raise ValueError("pinned_chain needs a spec with Pinned boundary")
    return gibbs_chain(spec, config)


def empirical_node_marginals(result: EnsembleResult, grid: SpaceGrid) -> np.ndarray:
    """Occupancy frequencies per recorded time index (rows sum to 1)."""
    out = np.empty((result.record_indices.size, grid.points))
    for row, _ in enumerate(result.record_indices):
        nodes = grid.nearest_index(result.positions[:, :, row].reshape(-1))
        out[row] = np.bincount(nodes, minlength=grid.points) / nodes.size
    return out


def write_snapshots_jsonl(result: EnsembleResult, file) -> None:
    """One JSON object per recorded sweep and chain."""
    for row in range(result.positions.shape[0]):
        for c in range(result.positions.shape[1]):
            rec = {"record": row, "chain": c,
                   "time_indices": result.record_indices.tolist(),
                   "positions": [float(v) for v in result.positions[row, c]]}
            file.write(json.dumps(rec, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# exact enumeration oracle


MAX_ORACLE_CONFIGS = 10 ** 7
MAX_ORACLE_NODES = 9
MAX_ORACLE_TIMES = 7


@dataclass
class BruteForceTable:
    """Exact distribution of a fully enumerated instance.

    `log_z` is the log of the expected interaction weight under the
    normalized reference law; `ref_log_mass` is the log of the unnormalized
    reference mass (pinned: the 2N-step kernel entry between the pins).
    """

    spec: GibbsSpec
    configs: np.ndarray      # (n_cfg, n_times) node indices, int8
    probs: np.ndarray
    log_weights: np.ndarray
    log_z: float
    ref_log_mass: float

    @property
    def node_values(self) -> np.ndarray:
        return self.spec.grid.x

    def marginal(self, time_index: int) -> np.ndarray:
        return self.window_marginal([time_index]).reshape(-1)

    def window_marginal(self, time_indices) -> np.ndarray:
        m = self.spec.grid.points
        ids = list(time_indices)
        if m ** len(ids) > MAX_ORACLE_CONFIGS:
            raise ValueError("window marginal table would exceed the size cap")
        codes = np.zeros(self.configs.shape[0], dtype=np.int64)
        for t in ids:
            codes = codes * m + self.configs[:, t]
        flat = np.bincount(codes, weights=self.probs, minlength=m ** len(ids))
        return flat.reshape((m,) * len(ids))

    def conditional_window(self, window_indices, outside_config) -> np.ndarray:
        """Exact law of the window given the configuration elsewhere."""
        outside_config = np.asarray(outside_config)
        window_indices = list(window_indices)
        keep = np.ones(self.configs.shape[0], dtype=bool)
        for t in range(self.configs.shape[1]):
            if t in window_indices:
                continue
            keep &= self.configs[:, t] == outside_config[t]
        total = self.probs[keep].sum()
        if total <= 0.0:
            raise ValueError("conditioning configuration has zero probability")
        m = self.spec.grid.points
        codes = np.zeros(int(keep.sum()), dtype=np.int64)
        for t in window_indices:
            codes = codes * m + self.configs[keep, t]
        flat = np.bincount(codes, weights=self.probs[keep], minlength=m ** len(window_indices))
        return (flat / total).reshape((m,) * len(window_indices))


def _enumerated_columns(m: int, count: int) -> np.ndarray:
    n_cfg = m ** count
    idx = np.arange(n_cfg)
    cols = [(idx // m ** (count - 1 - k)) % m for k in range(count)]
    return np.stack(cols, axis=1).astype(np.int8)


def brute_force_measure(spec: GibbsSpec) -> BruteForceTable:
    """Enumerate every configuration of a small instance exactly."""
    grid, tg = spec.grid, spec.timegrid
    m, n_t = grid.points, tg.n_times
    if m > MAX_ORACLE_NODES:
        raise ValueError(f"oracle instances need at most {MAX_ORACLE_NODES} space nodes, got {m}")
    if n_t > MAX_ORACLE_TIMES:
        raise ValueError(f"oracle instances need at most {MAX_ORACLE_TIMES} time slices, got {n_t}")
    pinned = isinstance(spec.boundary, Pinned)
    free = n_t - 2 if pinned else n_t
    if m ** free > MAX_ORACLE_CONFIGS:
        raise ValueError("free configuration count exceeds the oracle size cap")

    configs = np.empty((m ** free, n_t), dtype=np.int8)
    if pinned:
        configs[:, 0] = grid.index_of(spec.boundary.left)
        configs[:, -1] = grid.index_of(spec.boundary.right)
        configs[:, 1:-1] = _enumerated_columns(m, free)
    else:
        configs[:] = _enumerated_columns(m, free)

    with np.errstate(divide="ignore"):
        log_k = np.log(spec.kernel.matrix)
        log_psi = np.log(spec.gs.psi)
    steps = np.zeros(configs.shape[0])
    for k in range(n_t - 1):
        steps += log_k[configs[:, k], configs[:, k + 1]]
    if pinned:
        log_ref = steps
    else:
        log_ref = np.log(grid.h) + log_psi[configs[:, 0]] + log_psi[configs[:, -1]] + steps

    lags = np.abs(tg.times[:, None] - tg.times[None, :])
    mask = SquareRegion(tg.T).weights(tg)
    x = grid.x[configs]
    h_vals = np.empty(configs.shape[0])
    chunk = 200_000
    for lo in range(0, configs.shape[0], chunk):
        h_vals[lo:lo + chunk] = interaction_action(spec.w, x[lo:lo + chunk], mask, lags)

    log_weights = log_ref + h_vals
    ref_log_mass = float(logsumexp(log_ref))
    norm = float(logsumexp(log_weights))
    probs = np.exp(log_weights - norm)
    table = BruteForceTable(spec, configs, probs, log_weights,
                            log_z=norm - ref_log_mass, ref_log_mass=ref_log_mass)
    if not np.isfinite(table.log_z):
        raise ValueError("degenerate instance: zero total weight")
    return table


# ---------------------------------------------------------------------------
# exact and sampled window conditionals


@dataclass
class WindowConditional:
    """Conditional law of a time window given the path outside it."""

    window_indices: np.ndarray
    probs: np.ndarray         # shaped (m,)*window
    bridge_probs: np.ndarray  # reference conditional, same shape
    frame_bound: float        # envelope bound on the window interaction


def _window_indices(tg: TimeGrid, s_half: float) -> np.ndarray:
    k = int(round(s_half / tg.dt))
    if abs(k * tg.dt - s_half) > 1e-9 or k < 1:
        raise ValueError(f"window half-width {s_half} is not a positive grid multiple")
    if k >= tg.n:
        raise ValueError("window must be strictly inside the time interval")
    center = tg.n
    return np.arange(center - k + 1, center + k)


def window_conditional_exact(spec: GibbsSpec, s_half: float,
                             outside_config) -> WindowConditional:
    """Enumerated conditional of the window |t| < s_half given the rest.

    `outside_config` fixes node indices for every time slice; entries inside
    the window are ignored.  The interaction mask is the frame region of
    pairs with at least one time in [-s_half, s_half], which includes the
    cross terms between the window and the fixed exterior.
    """
    grid, tg = spec.grid, spec.timegrid
    ids = _window_indices(tg, s_half)
    m = grid.points
    if m ** ids.size > MAX_ORACLE_CONFIGS:
        raise ValueError("window enumeration exceeds the oracle size cap")
    outside_config = np.asarray(outside_config, dtype=np.int64)
    composite = np.tile(outside_config, (m ** ids.size, 1))
    composite[:, ids] = _enumerated_columns(m, ids.size)

    with np.errstate(divide="ignore"):
        log_k = np.log(spec.kernel.matrix)
    log_ref = np.zeros(composite.shape[0])
    for k in range(ids[0] - 1, ids[-1] + 1):
        log_ref += log_k[composite[:, k], composite[:, k + 1]]

    frame = FrameRegion(s_half, tg.T)
    mask = frame.weights(tg)
    lags = np.abs(tg.times[:, None] - tg.times[None, :])
    h_vals = interaction_action(spec.w, grid.x[composite], mask, lags)

    log_weights = log_ref + h_vals
    shape = (m,) * ids.size
    probs = np.exp(log_weights - logsumexp(log_weights)).reshape(shape)
    bridge = np.exp(log_ref - logsumexp(log_ref)).reshape(shape)
    return WindowConditional(ids, probs, bridge, frame.envelope_bound(spec.w))


def window_conditional_chain(spec: GibbsSpec, s_half: float, outside_path,
                             config: ChainConfig) -> EnsembleResult:
    """MCMC sampler of the window conditional for non-enumerable sizes."""
    tg = spec.timegrid
    ids = _window_indices(tg, s_half)
    frozen = np.ones(tg.n_times, dtype=bool)
    frozen[ids] = False
    mask = FrameRegion(s_half, tg.T).weights(tg)
    outside_path = np.asarray(outside_path, dtype=float)
    init = np.tile(outside_path, (config.n_chains, 1))
    left = spec.grid.x[spec.grid.nearest_index(outside_path[ids[0] - 1])]
    right = spec.grid.x[spec.grid.nearest_index(outside_path[ids[-1] + 1])]
    window_tg = TimeGrid(T=(ids.size + 1) * tg.dt / 2.0, dt=tg.dt)
    for c in range(config.n_chains):
        br = sample_bridge(spec.gs, spec.kernel, window_tg, left, right,
                           seed=(config.seed, 14, c))
        init[c, ids] = br.positions[1:-1]
    engine = _Engine(spec, config, init, mask=mask, frozen=frozen)
    return _run_engine(engine, spec, config, record_indices=ids)


def single_move_distribution(spec: GibbsSpec, config_nodes, site: int,
                             mask: np.ndarray | None = None) -> np.ndarray:
    """Exact one-site transition law of the grid-mode chain at `site`.

    Returns the distribution of the node at `site` after one proposal and
    accept/reject step from the given configuration (rejection mass folded
    into the current node).  Used to verify detailed balance exactly.
    """
    grid = spec.grid
    m = grid.points
    cfg = ChainConfig(sweeps=1, burnin=0, seed=0, n_chains=m, mode="grid")
    init = np.tile(grid.x[np.asarray(config_nodes, dtype=int)], (m, 1))
    engine = _Engine(spec, cfg, init, mask=mask)
    q = engine._site_proposal_probs(site)[0]
    q = q / q.sum()
    dh = engine._delta_h_single(site, grid.x[np.arange(m)])
    acc = np.minimum(1.0, np.exp(dh))
    cur = int(np.asarray(config_nodes)[site])
    out = q * acc
    out[cur] += 1.0 - out.sum()
    return out
