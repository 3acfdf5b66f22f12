"""Catalog of single-site potentials V and two-time pair potentials W.

Catalog entries carry declared asymptotic data (the liminf of V at infinity,
envelope functions dominating |W|) because those quantities are not
observable from finite grids; every declaration is checkable numerically on
verification grids.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

SINGULARITY_CLAMP_DEFAULT = -1.0e6

# cutoff between numeric quadrature and the analytic envelope tail
_ENVELOPE_SPLIT = 50.0


@dataclass
class SitePotential:
    """Single-site potential with declared growth metadata.

    `alpha` is the declared liminf of the potential at spatial infinity
    before the additive `shift`; `effective_alpha` accounts for the shift
    (normally chosen so the associated Schroedinger operator has bottom
    spectrum zero).
    """

    kind: str
    dim: int = 1
    shift: float = 0.0
    alpha: float = math.inf
    clamp: float | None = None
    table_x: np.ndarray | None = None
    table_v: np.ndarray | None = None

    @property
    def effective_alpha(self) -> float:
        return self.alpha + self.shift

    def with_shift(self, delta: float) -> "SitePotential":
        """Copy with `delta` added to the additive shift."""
        return replace(self, shift=self.shift + delta)

    def evaluate(self, x):
        """V(x) + shift, elementwise.

        For dim == 1, `x` is a scalar or array of positions. For dim == 3,
        `x` is a length-3 vector or an (..., 3) array; evaluation is radial.
        """
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ValueError("potential evaluated at non-finite point")
        if self.dim == 1:
            r = np.abs(x)
        else:
            if x.shape[-1] != self.dim:
                raise ValueError(f"expected points in R^{self.dim}, got shape {x.shape}")
            r = np.sqrt(np.sum(x * x, axis=-1))
        return self.evaluate_radial(r)

    def evaluate_radial(self, r):
        """V as a function of |x|, plus shift (all catalog kinds are radial)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "harmonic":
            v = 0.5 * r * r
        elif self.kind == "box_zero":
            v = np.zeros_like(r)
        elif self.kind == "coulomb3d":
            if np.any(r == 0.0):
                if self.clamp is None:
                    raise ValueError("coulomb potential at the origin without a clamp value")
                v = np.where(r == 0.0, self.clamp, -1.0 / np.where(r == 0.0, 1.0, r))
            else:
                v = -1.0 / r
        elif self.kind == "table":
            if r.size and (np.min(r) < self.table_x[0] or np.max(r) > self.table_x[-1]):
                raise ValueError("tabulated potential evaluated outside its abscissa range")
            v = np.interp(r, self.table_x, self.table_v)
        else:
            raise ValueError(f"unknown site potential kind {self.kind!r}")
        out = v + self.shift
        return float(out) if out.ndim == 0 else out


def harmonic(shift: float = 0.0) -> SitePotential:
    """V(x) = x^2 / 2 (confining; liminf at infinity is +inf)."""
    return SitePotential("harmonic", dim=1, shift=shift, alpha=math.inf)


def box_zero() -> SitePotential:
    """V = 0 inside the truncation box (confinement via Dirichlet walls)."""
    return SitePotential("box_zero", dim=1, alpha=0.0)


def coulomb_3d(clamp: float | None = SINGULARITY_CLAMP_DEFAULT, shift: float = 0.0) -> SitePotential:
    """Attractive Coulomb well V(x) = -1/|x| in three dimensions.

    The origin is singular; grid evaluation replaces it by the configured
    clamp value (a large negative constant) so quadrature stays finite.
    """
    return SitePotential("coulomb3d", dim=3, shift=shift, alpha=0.0, clamp=clamp)


def site_from_table(x, v, alpha: float, dim: int = 1) -> SitePotential:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.ndim != 1 or x.shape != v.shape or x.size < 2:
        raise ValueError("potential table needs matching 1-d abscissa/value columns")
    if np.any(np.diff(x) <= 0):
        raise ValueError("potential table abscissae must be strictly increasing")
    return SitePotential("table", dim=dim, alpha=alpha, table_x=x, table_v=v)


def load_site_table(path, alpha: float, dim: int = 1) -> SitePotential:
    """Site potential from a whitespace-separated two-column text file."""
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two numeric columns (x, V)")
    return site_from_table(data[:, 0], data[:, 1], alpha=alpha, dim=dim)


@dataclass
class PairPotential:
    """Two-time pair potential W(x, y, t) with a declared envelope.

    The envelope dominates |W(x, y, t)| uniformly in (x, y); whether its
    half-line integral converges is part of the catalog entry
    (`envelope_integrable`).
    """

    kind: str
    coupling: float = 1.0
    value: float = 0.0
    monotone_in_t: bool = False
    envelope_integrable: bool = True
    table_u: np.ndarray | None = None
    table_t: np.ndarray | None = None
    table_w: np.ndarray | None = None

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError("pair coupling must be nonnegative")

    def evaluate(self, x, y, t):
        """W(x, y, t), broadcasting over array inputs; requires t >= 0."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("pair potential needs t >= 0")
        if self.kind == "zero":
            out = np.zeros(np.broadcast(x, y, t).shape)
        elif self.kind == "constant":
            out = np.full(np.broadcast(x, y, t).shape, self.value)
        elif self.kind == "nelson":
            out = -self.coupling / ((x - y) ** 2 + t * t + 1.0)
        elif self.kind == "step":
            out = np.where(np.abs(x - y) <= 2.0 * t, -self.coupling / (t * t + 1.0), 0.0)
        elif self.kind == "table":
            out = self._table_eval(np.abs(x - y), t)
        else:
            raise ValueError(f"unknown pair potential kind {self.kind!r}")
        return float(out) if out.ndim == 0 else out

    def _table_eval(self, u, t):
        u = np.clip(u, self.table_u[0], self.table_u[-1])
        tc = np.clip(t, self.table_t[0], self.table_t[-1])
        iu = np.clip(np.searchsorted(self.table_u, u) - 1, 0, self.table_u.size - 2)
        it = np.clip(np.searchsorted(self.table_t, tc) - 1, 0, self.table_t.size - 2)
        du = (u - self.table_u[iu]) / (self.table_u[iu + 1] - self.table_u[iu])
        dt_ = (tc - self.table_t[it]) / (self.table_t[it + 1] - self.table_t[it])
        w = self.table_w
        out = (w[iu, it] * (1 - du) * (1 - dt_) + w[iu + 1, it] * du * (1 - dt_)
               + w[iu, it + 1] * (1 - du) * dt_ + w[iu + 1, it + 1] * du * dt_)
        # beyond the tabulated time range the potential is declared zero
        return np.where(t > self.table_t[-1], 0.0, out)

    def envelope(self, t):
        """Pointwise dominating function for |W| at time separation t."""
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(t)
        elif self.kind == "constant":
            out = np.full_like(t, abs(self.value))
        elif self.kind in ("nelson", "step"):
            out = self.coupling / (t * t + 1.0)
        elif self.kind == "table":
            col_max = np.max(np.abs(self.table_w), axis=0)
            out = np.where(t > self.table_t[-1], 0.0,
                           np.interp(t, self.table_t, col_max))
        else:
            raise ValueError(f"unknown pair potential kind {self.kind!r}")
        return float(out) if out.ndim == 0 else out

    def envelope_tail(self, a: float) -> float:
        """Closed-form integral of the envelope over [a, infinity)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return 0.0 if self.value == 0.0 else math.inf
        if self.kind in ("nelson", "step"):
            return self.coupling * (0.5 * math.pi - math.atan(a))
        if self.kind == "table":
            if a >= self.table_t[-1]:
                return 0.0
            hi = self.table_t[-1]
            val, _ = integrate.quad(self.envelope, a, hi, limit=200)
            return val
        raise ValueError(f"unknown pair potential kind {self.kind!r}")


def zero_pair() -> PairPotential:
    return PairPotential("zero", coupling=0.0, monotone_in_t=True)


def constant_pair(value: float) -> PairPotential:
    integrable = value == 0.0
    return PairPotential("constant", value=value, monotone_in_t=True,
                         envelope_integrable=integrable)


def nelson_pair(coupling: float = 1.0) -> PairPotential:
    """W(x, y, t) = -coupling / (|x-y|^2 + t^2 + 1): bounded, increasing in t."""
    return PairPotential("nelson", coupling=coupling, monotone_in_t=True)


def step_pair(coupling: float = 1.0) -> PairPotential:
    """W = -coupling/(t^2+1) on {|x-y| <= 2t}, else 0: not monotone in t.

    Its envelope is integrable, but the interaction between the two half
    lines diverges along linear paths, so it serves as the catalog's
    counterexample entry.
    """
    return PairPotential("step", coupling=coupling, monotone_in_t=False)


def pair_from_table(u, t, w, monotone_in_t: bool = False) -> PairPotential:
    u = np.asarray(u, dtype=float)
    t = np.asarray(t, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.ndim != 1 or t.ndim != 1 or w.shape != (u.size, t.size):
        raise ValueError("pair table needs 1-d axes and a (len(u), len(t)) value grid")
    if np.any(np.diff(u) <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("pair table abscissae must be strictly increasing")
    return PairPotential("table", table_u=u, table_t=t, table_w=w,
                         monotone_in_t=monotone_in_t)


def load_pair_table(path, monotone_in_t: bool = False) -> PairPotential:
    """Pair potential from a three-column text file (|x-y|, t, W).

    Rows must enumerate a rectangular (|x-y|, t) product grid.
    """
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError(f"{path}: expected three numeric columns (|x-y|, t, W)")
    u = np.unique(data[:, 0])
    t = np.unique(data[:, 1])
    if u.size * t.size != data.shape[0]:
        raise ValueError(f"{path}: rows do not form a rectangular (|x-y|, t) grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    w = data[order, 2].reshape(u.size, t.size)
    return pair_from_table(u, t, w, monotone_in_t=monotone_in_t)


def interaction_budget(w: PairPotential) -> float:
    """Twice the half-line envelope integral, 2 * int_0^inf envelope(t) dt.

    This bounds the interaction collected by any single instant against the
    whole time axis, uniformly over paths. Returns inf when the envelope is
    declared non-integrable.
    """
    if not w.envelope_integrable:
        return math.inf
    if w.kind == "zero":
        return 0.0
    head, _ = integrate.quad(w.envelope, 0.0, _ENVELOPE_SPLIT, epsabs=1e-13, limit=400)
    return 2.0 * (head + w.envelope_tail(_ENVELOPE_SPLIT))


def verify_envelope(w: PairPotential, xs, ys, ts) -> float:
    """Worst violation of |W| <= envelope over the product verification grid.

    Nonpositive result means the envelope dominates everywhere on the grid.
    """
    xs = np.asarray(xs, dtype=float)[:, None, None]
    ys = np.asarray(ys, dtype=float)[None, :, None]
    ts = np.asarray(ts, dtype=float)[None, None, :]
    vals = np.abs(w.evaluate(xs, ys, ts))
    env = w.envelope(np.asarray(ts, dtype=float))
    return float(np.max(vals - env))


@dataclass
class MonotoneReport:
    monotone: bool
    witness: tuple | None


def check_time_monotone(w: PairPotential, pairs, ts, tol: float = 1e-12) -> MonotoneReport:
    """Check that t -> W(x, y, t) is nondecreasing along every grid line.

    `pairs` is a sequence of (x, y); `ts` the increasing time samples. The
    witness, when present, is (x, y, t_k, t_{k+1}, W_k, W_{k+1}).
    """
    ts = np.asarray(ts, dtype=float)
    if len(pairs) == 0 or ts.size < 2:
        raise ValueError("monotonicity check needs a nonempty (pairs, ts) grid")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("time samples must be strictly increasing")
    for x, y in pairs:
        line = np.asarray(w.evaluate(x, y, ts))
        drops = np.nonzero(np.diff(line) < -tol)[0]
        if drops.size:
            k = int(drops[0])
            return MonotoneReport(False, (float(x), float(y), float(ts[k]),
                                          float(ts[k + 1]), float(line[k]), float(line[k + 1])))
    return MonotoneReport(True, None)


@dataclass
class SufficientConditionReport:
    holds: bool
    margin: float
    threshold: float
    alpha: float
    budget: float
    mode: str
    note: str = ""


def sufficient_condition_report(v: SitePotential, w: PairPotential,
                                mode: str = "monotone") -> SufficientConditionReport:
    """Margin test for the path-shift stability condition.

    mode "finite_interaction": requires 8 * budget < alpha (valid when the
    half-line interaction is finite). mode "monotone": requires the pair
    potential to be nondecreasing in t and 12 * budget < alpha. The margin
    is alpha minus the threshold.
    """
    alpha = v.effective_alpha
    if alpha == -math.inf:
        raise ValueError("site potential with liminf -inf at infinity is not admissible")
    budget = interaction_budget(w)
    if mode == "finite_interaction":
        factor = 8.0
    elif mode == "monotone":
        factor = 12.0
    else:
        raise ValueError(f"unknown sufficiency mode {mode!r}")
    note = ""
    if mode == "monotone" and not w.monotone_in_t:
        return SufficientConditionReport(False, -math.inf, math.nan, alpha, budget, mode,
                                         "pair potential is not monotone in t")
    threshold = factor * budget
    if math.isinf(threshold) and math.isinf(alpha):
        return SufficientConditionReport(False, -math.inf, threshold, alpha, budget, mode,
                                         "envelope budget diverges")
    margin = alpha - threshold
    # a vanishing interaction never constrains the growth budget
    holds = threshold < alpha or (budget == 0.0 and alpha >= 0.0)
    return SufficientConditionReport(holds, margin, threshold, alpha, budget, mode, note)


def split_interaction(w: PairPotential, path, T: float) -> float:
    """|quadrature of W over [-T, 0] x [0, T]| for one path."""
    tg = path.timegrid
    if T > tg.T + 1e-12:
        raise ValueError(f"path covers [-{tg.T}, {tg.T}], cannot integrate to T = {T}")
    w_neg = tg.interval_weights(-T, 0.0)
    w_pos = tg.interval_weights(0.0, T)
    i_neg = np.nonzero(w_neg)[0]
    i_pos = np.nonzero(w_pos)[0]
    xs = path.positions[i_neg][:, None]
    xt = path.positions[i_pos][None, :]
    lag = np.abs(tg.times[i_neg][:, None] - tg.times[i_pos][None, :])
    vals = w.evaluate(xs, xt, lag)
    return float(abs(np.sum(w_neg[i_neg][:, None] * w_pos[i_pos][None, :] * vals)))


def estimate_split_interaction(w: PairPotential, paths, T: float) -> float:
    """Largest half-line interaction magnitude over a path ensemble.

    An empirical lower bound for the supremum over all continuous paths;
    never a certified supremum.
    """
    paths = list(paths)
    if not paths:
        raise ValueError("need a nonempty path ensemble")
    return max(split_interaction(w, p, T) for p in paths)
