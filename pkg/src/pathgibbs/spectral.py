"""Tridiagonal Schroedinger solve, heat kernels, and their binary cache.

The operator is -1/2 d^2/dx^2 + V on a uniform grid with homogeneous
Dirichlet values one spacing outside both grid ends. After the ground
solve the potential is shifted by -E0 so the bottom of the spectrum is
zero; heat kernels always refer to the shifted operator.
"""

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .grids import SpaceGrid
from .potentials import SitePotential

_CACHE_MAGIC = b"PGSPEC01"

# entries of a heat kernel below this are a discretization error, above
# (i.e. less negative) are clamped to zero
NEGATIVE_ENTRY_TOLERANCE = -1e-12


@dataclass
class Tridiagonal:
    """Symmetric tridiagonal operator (main diagonal and one off diagonal)."""

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        self.diag = np.asarray(self.diag, dtype=float)
        self.off = np.asarray(self.off, dtype=float)
        if self.diag.ndim != 1 or self.off.shape != (self.diag.size - 1,):
            raise ValueError("tridiagonal needs diag of length n and off-diagonal of length n-1")

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out

    def shifted(self, delta: float) -> "Tridiagonal":
        return Tridiagonal(self.diag + delta, self.off.copy())


def build_hamiltonian(v: SitePotential, grid: SpaceGrid, radial: bool = False) -> Tridiagonal:
    """Discretize -1/2 d^2/dx^2 + V on the grid (second-order stencil).

    With radial=True the grid lives on (0, r_max] and the unknown is the
    radial profile u(r) = r * psi(r); the u(0) = 0 condition is the
    Dirichlet ghost just below the first node.
    """
    if v.dim != 1 and not radial:
        raise ValueError(f"potential lives in d={v.dim}; only d=1 grids are supported "
                         "(use the radial solver for spherically symmetric d=3)")
    h = grid.h
    vals = np.asarray(v.evaluate_radial(np.abs(grid.x)) if radial else v.evaluate(grid.x),
                      dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = grid.x[~np.isfinite(vals)][0]
        raise ValueError(f"potential is not finite at grid point x = {bad}")
    diag = 1.0 / h**2 + vals
    off = np.full(grid.points - 1, -0.5 / h**2)
    return Tridiagonal(diag, off)


@dataclass
class GroundState:
    """Bottom eigenpair of the discretized operator.

    `energy` is the pre-shift eigenvalue; `operator` stores the shifted
    tridiagonal (diagonal minus energy), so operator.matvec(psi) vanishes.
    `psi` is strictly positive with sum(psi^2) * h = 1.
    """

    grid: SpaceGrid
    energy: float
    psi: np.ndarray
    operator: Tridiagonal
    v_grid: np.ndarray
    radial: bool = False
    _log_psi: np.ndarray = field(init=False, repr=False, default=None)

    def psi_at(self, x):
        """Linear interpolation of psi between grid nodes (0 outside)."""
        return np.interp(x, self.grid.x, self.psi, left=0.0, right=0.0)

    def log_psi(self) -> np.ndarray:
        if self._log_psi is None:
            self._log_psi = np.log(self.psi)
        return self._log_psi

    def residual(self) -> float:
        """Max-norm of the shifted eigenvalue equation (H - E0) psi = 0."""
        return float(np.max(np.abs(self.operator.matvec(self.psi))))


def _solve_bottom(op: Tridiagonal, grid: SpaceGrid, v_grid: np.ndarray,
                  radial: bool) -> GroundState:
    w, vecs = eigh_tridiagonal(op.diag, op.off, select="i", select_range=(0, 0))
    energy = float(w[0])
    psi = vecs[:, 0]
    if psi.sum() < 0:
        psi = -psi
    if np.min(psi) <= 0.0:
        i = int(np.argmin(psi))
        raise ValueError(
            f"ground state is not strictly positive at x = {grid.x[i]} "
            "(grid too coarse or box too large for this potential)")
    psi = psi / np.sqrt(np.sum(psi**2) * grid.h)
    return GroundState(grid, energy, psi, op.shifted(-energy), v_grid, radial)


def ground_state(v: SitePotential, grid: SpaceGrid) -> GroundState:
    """Bottom eigenpair via bisection + inverse iteration; psi positive."""
    op = build_hamiltonian(v, grid)
    return _solve_bottom(op, grid, np.asarray(v.evaluate(grid.x), dtype=float), radial=False)


def ground_state_radial(v: SitePotential, grid: SpaceGrid) -> GroundState:
    """Radial s-wave solve on (0, r_max]: psi here is the profile u(r) = r R(r)."""
    if grid.lower <= 0:
        raise ValueError("radial solve needs a grid on (0, r_max]")
    op = build_hamiltonian(v, grid, radial=True)
    return _solve_bottom(op, grid, np.asarray(v.evaluate_radial(grid.x), dtype=float),
                         radial=True)


@dataclass
class HeatKernel:
    """Matrix of the shifted-operator semigroup over one time step.

    The h-weight is folded into the matrix: row-vector times `matrix` is
    one transfer step, and matrix @ psi = psi. Dividing by h recovers
    pointwise kernel values.
    """

    grid: SpaceGrid
    dt: float
    matrix: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray

    def power(self, m: int) -> np.ndarray:
        """Kernel of m steps (exact semigroup power via the eigenbasis)."""
        if m < 0:
            raise ValueError("kernel power needs m >= 0")
        if m == 0:
            return np.eye(self.grid.points)
        return _clamp_kernel((self.eigvecs * np.exp(-m * self.dt * self.eigvals))
                             @ self.eigvecs.T)

    def at(self, dt: float) -> np.ndarray:
        """Kernel matrix for an arbitrary positive time from the same eigenbasis."""
        if dt <= 0:
            raise ValueError("kernel time must be positive")
        return _clamp_kernel((self.eigvecs * np.exp(-dt * self.eigvals)) @ self.eigvecs.T)


def _clamp_kernel(k: np.ndarray) -> np.ndarray:
    low = k.min()
    if low < NEGATIVE_ENTRY_TOLERANCE:
        raise ValueError(f"heat kernel entry {low} below tolerance; "
                         "decrease dt or refine the grid")
    return np.where(k < 0.0, 0.0, k)


def heat_kernel(gs: GroundState, dt: float) -> HeatKernel:
    """Full eigendecomposition of the shifted operator, exponentiated."""
    if dt <= 0:
        raise ValueError("heat kernel needs dt > 0")
    lam, vecs = eigh_tridiagonal(gs.operator.diag, gs.operator.off)
    # the bottom eigenvalue is zero by construction; remove its residual
    lam = lam - lam[0]
    matrix = _clamp_kernel((vecs * np.exp(-dt * lam)) @ vecs.T)
    return HeatKernel(gs.grid, dt, matrix, lam, vecs)


def save_cache(gs: GroundState, kernel: HeatKernel, path) -> None:
    """Binary cache (little-endian doubles) for a ground state + kernel pair."""
    n = gs.grid.points
    with open(path, "wb") as f:
        f.write(_CACHE_MAGIC)
        f.write(struct.pack("<qB", n, 1 if gs.radial else 0))
        f.write(struct.pack("<4d", gs.grid.lower, gs.grid.upper, gs.energy, kernel.dt))
        for arr in (gs.psi, gs.v_grid, gs.operator.diag, gs.operator.off,
                    kernel.eigvals, kernel.eigvecs):
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_cache(path) -> tuple[GroundState, HeatKernel]:
    with open(path, "rb") as f:
        if f.read(8) != _CACHE_MAGIC:
            raise ValueError(f"{path}: not a spectral cache file")
        n, radial = struct.unpack("<qB", f.read(9))
        lower, upper, energy, dt = struct.unpack("<4d", f.read(32))

        def block(count):
            return np.frombuffer(f.read(8 * count), dtype="<f8").astype(float)

        psi = block(n)
        v_grid = block(n)
        diag = block(n)
        off = block(n - 1)
        eigvals = block(n)
        eigvecs = block(n * n).reshape(n, n)
    grid = SpaceGrid(lower, upper, n)
    gs = GroundState(grid, energy, psi, Tridiagonal(diag, off), v_grid, bool(radial))
    matrix = _clamp_kernel((eigvecs * np.exp(-dt * eigvals)) @ eigvecs.T)
    return gs, HeatKernel(grid, dt, matrix, eigvals, eigvecs)


DEFAULT_BOX = (-8.0, 8.0, 801)


def default_grid() -> SpaceGrid:
    """Truncation box wide enough that catalog ground states decay below 1e-12."""
    return SpaceGrid(*DEFAULT_BOX)
