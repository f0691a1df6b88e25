"""Time propagation of one-partite and bipartite states.

One-partite states evolve under i hbar dpsi/dt = H psi; bipartite kernels
Psi(x, y) evolve under i hbar dPsi/dt = (H(x) - H(y)) Psi, which is realized
as Psi <- U Psi U^dagger with U the one-step single-particle propagator.
Two methods are provided: Crank-Nicolson (Cayley form, exactly unitary up to
solver tolerance) and exact eigenbasis phase evolution as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np
from scipy.sparse import diags, identity
from scipy.sparse.linalg import splu

from .errors import GridMismatchError, SimulationError, UnnormalizedStateError
from .lattice import Grid1D, HamiltonianMatrix
from .spectra import EigenSystem, eigensystem

if TYPE_CHECKING:
    from .bipartite import TransitionAmplitudes

NORM_TOL = 1e-6

METHODS = ("crank-nicolson", "eigenbasis")


@dataclass(frozen=True)
class WaveFunction:
    """One-partite complex amplitude vector psi(x) at a given time."""

    amplitudes: np.ndarray
    grid: Grid1D
    time: float = 0.0

    def norm(self) -> float:
        return self.grid.norm(self.amplitudes)


@dataclass(frozen=True)
class BipartiteWave:
    """Complex kernel Psi(x, y) on the grid square at a given time."""

    kernel: np.ndarray
    grid: Grid1D
    time: float = 0.0

    def norm_squared(self) -> float:
        return bipartite_norm(self)


@dataclass(frozen=True)
class PropagatorConfig:
    """Time step, step count, and integration method.

    dt may be negative to run time-reversed; it must be nonzero.
    """

    dt: float
    steps: int
    method: str = "crank-nicolson"

    def __post_init__(self):
        if self.dt == 0:
            raise SimulationError("dt must be nonzero")
        if self.steps < 0:
            raise SimulationError(f"steps must be >= 0, got {self.steps}")
        if self.method not in METHODS:
            raise SimulationError(f"unknown method {self.method!r}; expected one of {METHODS}")


def normalize(psi: WaveFunction) -> WaveFunction:
    return replace(psi, amplitudes=psi.amplitudes / psi.norm())


def gaussian_packet(grid: Grid1D, center: float, sigma: float, momentum: float = 0.0) -> WaveFunction:
    """Normalized Gaussian wave packet exp(-(x-x0)^2/(4 sigma^2) + i k x)."""
    x = grid.points
    amp = np.exp(-((x - center) ** 2) / (4.0 * sigma**2) + 1j * momentum * x)
    return normalize(WaveFunction(amp.astype(complex), grid))


class CrankNicolsonStepper:
    """One Cayley step (I + i dt H / 2 hbar)^-1 (I - i dt H / 2 hbar).

    The LU factorization is computed once and reused for every step; apply()
    accepts a vector or a matrix of column vectors.
    """

    def __init__(self, H: HamiltonianMatrix, dt: float):
        n = H.grid.n_points
        Hs = diags(
            [H.off_diagonal, H.diagonal, H.off_diagonal], [-1, 0, 1], dtype=complex
        )
        alpha = 0.5j * dt / H.hbar
        eye = identity(n, dtype=complex, format="csc")
        self._lu = splu((eye + alpha * Hs).tocsc())
        self._B = (eye - alpha * Hs).tocsr()

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self._lu.solve(self._B @ v)


def _check_grid(a_grid: Grid1D, b_grid: Grid1D) -> None:
    if a_grid != b_grid:
        raise GridMismatchError("state and Hamiltonian were built on different grids")


def _check_normalized(norm_sq: float, what: str) -> None:
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise UnnormalizedStateError(f"{what} is not normalized: |psi|^2 = {norm_sq}")


def propagate_schrodinger(psi: WaveFunction, H: HamiltonianMatrix, cfg: PropagatorConfig) -> WaveFunction:
    """Evolve psi to time t + steps*dt under the single-particle equation."""
    _check_grid(psi.grid, H.grid)
    _check_normalized(psi.norm() ** 2, "wave function")
    if cfg.steps == 0:
        return psi
    t = cfg.steps * cfg.dt
    if cfg.method == "eigenbasis":
        eigs = eigensystem(H, H.grid.n_points)
        amp = _eigenbasis_evolve_columns(psi.amplitudes, eigs, t, H.hbar)
    else:
        stepper = CrankNicolsonStepper(H, cfg.dt)
        amp = psi.amplitudes.astype(complex)
        for _ in range(cfg.steps):
            amp = stepper.apply(amp)
    return WaveFunction(amp, psi.grid, psi.time + t)


def _eigenbasis_evolve_columns(columns: np.ndarray, eigs: EigenSystem, t: float, hbar: float) -> np.ndarray:
    """Apply exp(-i H t / hbar) to columns via the full eigenbasis."""
    S = eigs.states
    dx = eigs.grid.dx
    coeff = dx * (S.conj().T @ columns)
    phases = np.exp(-1j * eigs.energies * t / hbar)
    if coeff.ndim == 1:
        return S @ (phases * coeff)
    return S @ (phases[:, None] * coeff)


def propagate_vnl(Psi: BipartiteWave, H: HamiltonianMatrix, cfg: PropagatorConfig) -> BipartiteWave:
    """Evolve a bipartite kernel under i hbar dPsi/dt = (H(x) - H(y)) Psi."""
    _check_grid(Psi.grid, H.grid)
    _check_normalized(bipartite_norm(Psi), "bipartite wave")
    if cfg.steps == 0:
        return Psi
    t = cfg.steps * cfg.dt
    K = Psi.kernel.astype(complex)
    if cfg.method == "eigenbasis":
        eigs = eigensystem(H, H.grid.n_points)
        K = _eigenbasis_evolve_columns(K, eigs, t, H.hbar)
        # right-multiplication by U^dagger via K U^dagger = (U K^H)^H
        K = _eigenbasis_evolve_columns(K.conj().T, eigs, t, H.hbar).conj().T
    else:
        stepper = CrankNicolsonStepper(H, cfg.dt)
        for _ in range(cfg.steps):
            K = stepper.apply(K)
            K = stepper.apply(K.conj().T).conj().T
    return BipartiteWave(K, Psi.grid, Psi.time + t)


def eigenbasis_bipartite_evolution(
    amplitudes: "TransitionAmplitudes", eigs: EigenSystem, t: float, hbar: float = 1.0
) -> BipartiteWave:
    """Closed-form state at time t from transition amplitudes over the eigenbasis.

    Reconstructs sum_{n,m} c_{n,m} exp(-i (E_n - E_m) t / hbar) psi_n(x) psi_m^*(y);
    at t = 0 this is the plain eigenbasis reconstruction of the kernel.
    """
    C = np.asarray(getattr(amplitudes, "c", amplitudes), dtype=complex)
    if C.shape != (eigs.k, eigs.k):
        raise SimulationError(
            f"amplitude matrix shape {C.shape} does not match k={eigs.k}"
        )
    phases = np.exp(-1j * eigs.energies * t / hbar)
    S = eigs.states
    K = S @ (phases[:, None] * C * phases.conj()[None, :]) @ S.conj().T
    return BipartiteWave(K, eigs.grid, float(t))


def bipartite_norm(Psi: BipartiteWave) -> float:
    """Squared norm sum |Psi_ij|^2 dx^2; the quantity conserved by the evolution."""
    return float(np.sum(np.abs(Psi.kernel) ** 2) * Psi.grid.dx**2)
