"""Crank-Nicolson evolution of the full quantum dynamics.

This is the benchmark side: the unrestricted Schrodinger flow
i hbar dpsi/dt = Hop psi against which the restricted (coherent-sheet)
dynamics is compared.  Supported Hamiltonians are tridiagonal on the grid:

  * kinetic terms  c * D D          -> 3-point stencil of -hbar^2 d2/dx2,
  * potentials     c * X^k          -> diagonal,
  * ordered forms  c * D X^k D      -> symmetric -hbar^2 d(x^k d.) with the
                                       coefficient evaluated at half nodes.

Boundaries are homogeneous Dirichlet, either at both window ends (full
line) or at x = 0 and the far end (half line).  Crank-Nicolson is the
Cayley form of the discrete Hamiltonian, hence unitary in the discrete
norm up to solver roundoff; a solve-residual check guards every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO

import numpy as np
from scipy.sparse import csc_matrix, diags
from scipy.sparse.linalg import splu

from .dynamics import Trajectory
from .errors import (
    DomainError,
    GridMismatchError,
    NumericError,
    PreconditionError,
)
from .grids import (
    FULL_LINE,
    Grid,
    WaveFunction,
    derivative,
    half_line_grid,
    uniform_grid,
)
from .states import Fiducial
from .symbols import D_FACTOR, X_FACTOR, OperatorExpr

DIRICHLET_BOTH = "dirichlet-both"
DIRICHLET_AT_ZERO = "dirichlet-at-zero"


@dataclass(frozen=True)
class EvolutionSetup:
    hamiltonian: OperatorExpr
    grid: Grid
    boundary: str
    dt: float
    steps: int
    hbar: float = 1.0

    def __post_init__(self):
        if self.boundary not in (DIRICHLET_BOTH, DIRICHLET_AT_ZERO):
            raise DomainError(f"unknown boundary {self.boundary!r}")
        if self.dt <= 0:
            raise DomainError("dt must be positive")
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if not self.grid.is_uniform():
            raise DomainError("evolution requires a uniform grid")
        diag, off = hamiltonian_tridiagonal(self)  # validates the operator form
        rho = spectral_radius_estimate(diag, off)
        if self.dt * rho / (2 * self.hbar) > 1e6:
            raise PreconditionError(
                f"dt * spectral radius = {self.dt * rho:.3e} is unreasonably large; "
                "reduce dt or coarsen the grid"
            )

    def unknown_slice(self) -> slice:
        # pinned Dirichlet nodes are excluded from the evolving vector; on
        # the half line x = 0 is not a node (ghost zero), so only the far
        # end is pinned
        if self.boundary == DIRICHLET_BOTH:
            return slice(1, self.grid.n - 1)
        return slice(0, self.grid.n - 1)


def _term_shape(factors) -> tuple[str, int]:
    kinds = [f.kind for f in factors]
    if all(k == X_FACTOR for k in kinds):
        return "potential", sum(f.power for f in factors)
    if kinds == [D_FACTOR, D_FACTOR]:
        return "kinetic", 0
    if (
        len(kinds) >= 3
        and kinds[0] == D_FACTOR
        and kinds[-1] == D_FACTOR
        and all(k == X_FACTOR for k in kinds[1:-1])
    ):
        return "dxd", sum(f.power for f in factors[1:-1])
    raise DomainError(
        "operator term "
        + " ".join(str(f) for f in factors)
        + " is not tridiagonal (supported: D D, X^k, D X^k D)"
    )


def hamiltonian_tridiagonal(setup: EvolutionSetup) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and symmetric off-diagonal of the discrete Hamiltonian."""
    grid = setup.grid
    h = grid.spacing
    sl = setup.unknown_slice()
    x = grid.nodes[sl]
    m = x.size
    hb2 = setup.hbar**2
    diag = np.zeros(m)
    off = np.zeros(m - 1)
    for coeff, factors in setup.hamiltonian.terms:
        shape, power = _term_shape(factors)
        if shape == "potential":
            diag += coeff * x**power
        elif shape == "kinetic":
            diag += coeff * 2 * hb2 / h**2
            off += -coeff * hb2 / h**2
        else:
            left = (x - h / 2) ** power
            right = (x + h / 2) ** power
            diag += coeff * hb2 * (left + right) / h**2
            off += -coeff * hb2 * right[:-1] / h**2
    return diag, off


def spectral_radius_estimate(diag: np.ndarray, off: np.ndarray) -> float:
    """Gershgorin bound for the tridiagonal Hamiltonian."""
    row = np.abs(diag).copy()
    row[:-1] += np.abs(off)
    row[1:] += np.abs(off)
    return float(np.max(row))


@dataclass
class EvolutionResult:
    """Snapshots of a Crank-Nicolson run (always includes t=0 and the end)."""

    times: np.ndarray
    states: list[WaveFunction]
    setup: EvolutionSetup

    def final(self) -> WaveFunction:
        return self.states[-1]


def evolve(
    psi0: WaveFunction,
    setup: EvolutionSetup,
    snapshot_every: int | None = None,
    backward: bool = False,
) -> EvolutionResult:
    """Run Crank-Nicolson and return strided snapshots.

    ``snapshot_every`` defaults to about 512 snapshots per run; pass 1 to
    keep every step.  ``backward`` negates the time step.
    """
    if not psi0.grid.same_as(setup.grid):
        raise GridMismatchError("initial state must live on the setup grid")
    psi0.require_normalized(1e-6)
    if snapshot_every is None:
        snapshot_every = max(1, setup.steps // 512)

    sl = setup.unknown_slice()
    diag, off = hamiltonian_tridiagonal(setup)
    lam = setup.dt / (2 * setup.hbar) * (-1 if backward else 1)
    m = diag.size
    a_mat = csc_matrix(
        diags(
            [1j * lam * off, 1 + 1j * lam * diag, 1j * lam * off],
            offsets=[-1, 0, 1],
            format="csc",
        )
    )
    b_mat = csc_matrix(
        diags(
            [-1j * lam * off, 1 - 1j * lam * diag, -1j * lam * off],
            offsets=[-1, 0, 1],
            format="csc",
        )
    )
    solver = splu(a_mat)

    u = np.array(psi0.values[sl], dtype=complex)
    h = setup.grid.spacing
    norm0 = math.sqrt(float(np.sum(np.abs(u) ** 2)) * h)

    def embed(vec: np.ndarray) -> WaveFunction:
        full = np.zeros(setup.grid.n, dtype=complex)
        full[sl] = vec
        return WaveFunction(setup.grid, full, setup.hbar)

    sign = -1.0 if backward else 1.0
    times = [0.0]
    states = [embed(u)]
    for step in range(1, setup.steps + 1):
        b = b_mat @ u
        u = solver.solve(b)
        res = np.linalg.norm(a_mat @ u - b)
        if res > 1e-10 * max(np.linalg.norm(b), 1.0):
            raise NumericError(
                f"tridiagonal solve residual {res:.2e} at step {step} "
                f"(dt={setup.dt:g}, n={m})"
            )
        if step % snapshot_every == 0 or step == setup.steps:
            times.append(sign * step * setup.dt)
            states.append(embed(u))

    norm1 = math.sqrt(float(np.sum(np.abs(u) ** 2)) * h)
    budget = 1e-8 * (setup.steps / 1000 + 1)
    if abs(norm1 - norm0) > budget:
        raise NumericError(
            f"unitarity violated: norm drift {abs(norm1 - norm0):.2e} "
            f"over {setup.steps} steps"
        )
    return EvolutionResult(np.array(times), states, setup)


def track_expectations(result: EvolutionResult) -> Trajectory:
    """Per-snapshot <x>, <-i hbar d/dx> and <H> as a Trajectory record."""
    setup = result.setup
    sl = setup.unknown_slice()
    diag, off = hamiltonian_tridiagonal(setup)
    h = setup.grid.spacing
    qs, ps, es = [], [], []
    for state in result.states:
        w = state.grid.weights
        x = state.grid.nodes
        rho = np.abs(state.values) ** 2
        qs.append(float(np.sum(w * x * rho)))
        dpsi = derivative(state, 1)
        ps.append(
            float(
                (-1j * setup.hbar * np.sum(w * np.conj(state.values) * dpsi.values)).real
            )
        )
        u = state.values[sl]
        hu = diag * u
        hu[:-1] += off * u[1:]
        hu[1:] += off * u[:-1]
        es.append(float((np.sum(np.conj(u) * hu) * h).real))
    return Trajectory(result.times.copy(), np.array(ps), np.array(qs), np.array(es))


def snapshot_csv(state: WaveFunction, stream: IO[str]) -> None:
    stream.write("x,Re(psi),Im(psi)\n")
    for x, v in zip(state.grid.nodes, state.values):
        stream.write(f"{x:.17g},{v.real:.17g},{v.imag:.17g}\n")


# ---------------------------------------------------------------------------
# window helpers for the benchmarks


def oscillation_window(f: Fiducial, p0: float, q0: float, n: int) -> Grid:
    """Full-line grid covering the classical oscillation with 10-sigma margins."""
    amp = math.sqrt(q0**2 + (p0 / f.omega) ** 2)
    half = amp + 10 * f.sigma
    return uniform_grid(-half, half, n, kind=FULL_LINE)


def half_line_window(f: Fiducial, q_max: float, n: int) -> Grid:
    """Half-line grid covering dilated states up to q_max with 10-sigma margins."""
    sigma_rel = math.sqrt(f.hbar / (2 * f.beta))
    upper = q_max * (1 + 10 * sigma_rel)
    return half_line_grid(upper, n)
