"""Grids, quadrature, finite differences and complex inner products.

Everything downstream (coherent states, symbols, geometry, PDE evolution)
works on the two value types defined here: a uniform :class:`Grid` with
trapezoid quadrature weights, and a :class:`WaveFunction` holding complex
values on such a grid together with the Planck parameter it was built with.

All quantities are dimensionless; ``hbar`` is an explicit positive number
(default 1) rather than a physical constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridMismatchError, PreconditionError

FULL_LINE = "full-line"
HALF_LINE = "half-line"


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D grid with trapezoid quadrature weights.

    ``kind`` is ``"full-line"`` or ``"half-line"``; half-line grids never
    include x = 0 (the first node sits at the grid spacing).
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if self.kind not in (FULL_LINE, HALF_LINE):
            raise DomainError(f"unknown grid kind {self.kind!r}")
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("grid needs at least two nodes")
        if weights.shape != nodes.shape:
            raise DomainError("weights and nodes must have equal length")
        if not np.all(np.diff(nodes) > 0):
            raise DomainError("grid nodes must be strictly increasing")
        if not np.all(weights > 0):
            raise DomainError("quadrature weights must be strictly positive")
        if self.kind == HALF_LINE and nodes[0] < 0:
            raise DomainError("half-line grid has negative nodes")

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def lower(self) -> float:
        return float(self.nodes[0])

    @property
    def upper(self) -> float:
        return float(self.nodes[-1])

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        d = np.diff(self.nodes)
        return bool(np.all(np.abs(d - d[0]) <= rtol * d[0]))

    def integrate(self, values: np.ndarray) -> complex:
        """Quadrature of sampled values with the grid's weights."""
        return complex(np.sum(self.weights * np.asarray(values)))

    def same_as(self, other: "Grid") -> bool:
        return (
            self.kind == other.kind
            and self.n == other.n
            and np.array_equal(self.nodes, other.nodes)
        )


def uniform_grid(lower: float, upper: float, n: int, kind: str = FULL_LINE) -> Grid:
    """Uniform grid on [lower, upper] with trapezoid weights."""
    if upper <= lower:
        raise DomainError("upper must exceed lower")
    if n < 2:
        raise DomainError("need at least two nodes")
    nodes = np.linspace(lower, upper, n)
    h = nodes[1] - nodes[0]
    weights = np.full(n, h)
    weights[0] = weights[-1] = h / 2
    return Grid(kind, nodes, weights)


def half_line_grid(upper: float, n: int) -> Grid:
    """Half-line grid (epsilon, upper] with epsilon equal to the spacing.

    The offset keeps integrands of the form x**(a - 1/2) finite at the first
    node; x = 0 itself is never a grid point.
    """
    if upper <= 0:
        raise DomainError("upper must be positive")
    h = upper / n
    return uniform_grid(h, upper, n, kind=HALF_LINE)


@dataclass(frozen=True)
class WaveFunction:
    """Complex-valued function sampled on a grid."""

    grid: Grid
    values: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.nodes.shape:
            raise GridMismatchError("values length must match grid node count")
        if self.hbar <= 0:
            raise DomainError("hbar must be positive")

    def norm_squared(self) -> float:
        return float(np.sum(self.grid.weights * np.abs(self.values) ** 2))

    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared()))

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.values / self.norm(), self.hbar)

    def require_normalized(self, tol: float = 1e-8) -> None:
        dev = abs(self.norm() - 1.0)
        if dev > tol:
            raise PreconditionError(f"wave function norm deviates by {dev:.3e}")


def inner_product(phi: WaveFunction, psi: WaveFunction) -> complex:
    """Quadrature inner product  integral conj(phi) * psi dx."""
    if not phi.grid.same_as(psi.grid):
        raise GridMismatchError("inner product requires identical grids")
    return complex(np.sum(phi.grid.weights * np.conj(phi.values) * psi.values))


def _uniform_spacing(grid: Grid) -> float:
    if not grid.is_uniform():
        raise DomainError("finite differences require a uniform grid")
    return grid.spacing


def derivative(psi: WaveFunction, order: int = 1) -> WaveFunction:
    """First or second derivative by central differences.

    Interior nodes use the 3-point central stencils, edges the matching
    one-sided second-order stencils, so degree-2 polynomials differentiate
    exactly on uniform grids.
    """
    if order not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")
    if psi.grid.n < 5:
        raise PreconditionError("derivative needs at least 5 nodes")
    h = _uniform_spacing(psi.grid)
    v = psi.values
    out = np.empty_like(v)
    if order == 1:
        out[1:-1] = (v[2:] - v[:-2]) / (2 * h)
        out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
        out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    else:
        out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
        out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h**2
        out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h**2
    return WaveFunction(psi.grid, out, psi.hbar)


def position_moment(psi: WaveFunction, power: int = 1) -> float:
    """Expectation of x**power in the state |psi|^2."""
    x = psi.grid.nodes
    return float(np.real(psi.grid.integrate(x**power * np.abs(psi.values) ** 2)))


def momentum_expectation(psi: WaveFunction, dpsi: WaveFunction | None = None) -> float:
    """Expectation of -i hbar d/dx; optionally with a supplied derivative."""
    if dpsi is None:
        dpsi = derivative(psi, 1)
    val = inner_product(psi, dpsi)
    return float((-1j * psi.hbar * val).real)


def dilation_expectation(psi: WaveFunction, dpsi: WaveFunction | None = None) -> float:
    """Expectation of the dilation generator -(i hbar / 2)(x d/dx + d/dx x)."""
    if dpsi is None:
        dpsi = derivative(psi, 1)
    x = psi.grid.nodes
    w = psi.grid.weights
    # x d/dx + d/dx x = 2 x d/dx + 1
    val = np.sum(w * np.conj(psi.values) * (2 * x * dpsi.values + psi.values))
    return float((-0.5j * psi.hbar * val).real)
