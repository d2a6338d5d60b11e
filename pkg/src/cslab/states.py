"""Fiducial vectors and their canonical / affine coherent-state families.

A fiducial is a basic normalized wave function.  Transporting it by a phase
point (p, q) produces either the canonical family

    eta_{p,q}(x) = exp(i p (x - q) / hbar) * eta(x - q)

on the full line, or the affine family

    xi_{p,q}(x) = q**(-1/2) * exp(i p (x - q) / hbar) * xi(x / q)

on the half line (q > 0).  The phase factor exp(-i p q / hbar) inside the
affine definition is kept exactly as written; every ray-based quantity is
insensitive to it.

Physical centering (zero position/momentum moments for the canonical
fiducial; unit position moment and zero dilation moment for the affine one)
is what makes the labels (p, q) read back as position and momentum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CoverageError, DomainError
from .grids import (
    FULL_LINE,
    Grid,
    WaveFunction,
    derivative,
    dilation_expectation,
    half_line_grid,
    momentum_expectation,
    position_moment,
    uniform_grid,
)

GAUSSIAN = "GaussianCanonical"
AFFINE = "AffineBeta"
SAMPLED = "Sampled"

CANONICAL_DOMAIN = "canonical"
AFFINE_DOMAIN = "affine"


@dataclass(frozen=True)
class PhasePoint:
    """Phase-space label (p, q); affine-domain points require q > 0."""

    p: float
    q: float
    domain: str = CANONICAL_DOMAIN

    def __post_init__(self):
        if self.domain not in (CANONICAL_DOMAIN, AFFINE_DOMAIN):
            raise DomainError(f"unknown phase-point domain {self.domain!r}")
        if self.domain == AFFINE_DOMAIN and self.q <= 0:
            raise DomainError("affine phase points require q > 0")


@dataclass(frozen=True)
class Fiducial:
    """Basic wave function from which a coherent family is generated.

    Use the factory functions :func:`gaussian_fiducial`,
    :func:`affine_fiducial` and :func:`sampled_fiducial`.
    """

    kind: str
    hbar: float = 1.0
    omega: float | None = None
    beta: float | None = None
    sample: WaveFunction | None = None

    def __post_init__(self):
        if self.hbar <= 0:
            raise DomainError("hbar must be positive")
        if self.kind == GAUSSIAN:
            if self.omega is None or self.omega <= 0:
                raise DomainError("Gaussian fiducial requires omega > 0")
        elif self.kind == AFFINE:
            if self.beta is None or self.beta <= 0:
                raise DomainError("affine fiducial requires beta > 0")
            if self.beta / self.hbar < 1.0:
                # keeps x**(beta/hbar - 1/2) bounded near 0 and the
                # kinetic-moment integrals convergent
                raise DomainError("affine fiducial requires beta/hbar >= 1")
        elif self.kind == SAMPLED:
            if self.sample is None:
                raise DomainError("sampled fiducial requires a wave function")
            self.sample.require_normalized(1e-6)
        else:
            raise DomainError(f"unknown fiducial kind {self.kind!r}")

    @property
    def sigma(self) -> float:
        """Position spread used for window sizing."""
        if self.kind == GAUSSIAN:
            return math.sqrt(self.hbar / (2 * self.omega))
        if self.kind == AFFINE:
            return math.sqrt(self.hbar / (2 * self.beta))
        return math.sqrt(
            max(
                position_moment(self.sample, 2) - position_moment(self.sample, 1) ** 2,
                1e-12,
            )
        )


def gaussian_fiducial(omega: float = 1.0, hbar: float = 1.0) -> Fiducial:
    return Fiducial(GAUSSIAN, hbar=hbar, omega=omega)


def affine_fiducial(beta: float = 1.0, hbar: float = 1.0) -> Fiducial:
    return Fiducial(AFFINE, hbar=hbar, beta=beta)


def sampled_fiducial(sample: WaveFunction) -> Fiducial:
    return Fiducial(SAMPLED, hbar=sample.hbar, sample=sample)


# ---------------------------------------------------------------------------
# pointwise evaluation


def gaussian_values(omega: float, hbar: float, x: np.ndarray) -> np.ndarray:
    return (omega / (math.pi * hbar)) ** 0.25 * np.exp(-omega * x**2 / (2 * hbar))


def affine_log_norm(beta: float, hbar: float) -> float:
    """log M for the affine fiducial M x**(b-1/2) exp(-b x), b = beta/hbar."""
    nu = 2.0 * beta / hbar
    return 0.5 * (nu * math.log(nu) - math.lgamma(nu))


def affine_values(beta: float, hbar: float, u: np.ndarray) -> np.ndarray:
    b = beta / hbar
    a = b - 0.5
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise DomainError("affine fiducial is defined for x > 0 only")
    return np.exp(affine_log_norm(beta, hbar) + a * np.log(u) - b * u)


def _affine_moment(beta: float, hbar: float, power: int) -> float:
    """Exact moment of x**power in |xi|^2 via Gamma-function ratios."""
    nu = 2.0 * beta / hbar
    if power >= 0:
        out = 1.0
        for t in range(power):
            out *= (nu + t) / nu
        return out
    k = -power
    if nu <= k:
        raise DomainError(f"moment x**{power} diverges for beta/hbar = {beta/hbar}")
    out = 1.0
    for t in range(1, k + 1):
        out *= nu / (nu - t)
    return out


# ---------------------------------------------------------------------------
# default grids


def default_canonical_grid(
    f: Fiducial, q: float = 0.0, p: float = 0.0, n: int | None = None
) -> Grid:
    """Full-line window [-L, L] with L = max(10 sqrt(hbar/omega), |q| + 10 sqrt(hbar/omega))."""
    width = (
        10 * math.sqrt(f.hbar / f.omega) if f.kind == GAUSSIAN else 14.2 * f.sigma
    )
    L = max(width, abs(q) + width)
    if n is None:
        # keep ~40 nodes per phase wavelength on top of the envelope default
        n = max(4097, int(16 * L * abs(p) / f.hbar) | 1)
    return uniform_grid(-L, L, n, kind=FULL_LINE)


def affine_node_count(
    beta: float, hbar: float, upper: float, norm_tol: float = 1e-8
) -> int:
    """Node count keeping the missed [0, eps) probability mass below norm_tol."""
    nu = 2.0 * beta / hbar
    log_m2 = 2 * affine_log_norm(beta, hbar)
    # integral_0^eps |xi|^2 ~ M^2 eps^nu / nu  ->  eps
    log_eps = (math.log(norm_tol) + math.log(nu) - log_m2) / nu
    eps = math.exp(log_eps)
    n = int(math.ceil(upper / eps))
    return min(max(n, 20_000), 2_000_000)


def default_affine_grid(f: Fiducial, q: float = 1.0, n: int | None = None) -> Grid:
    """Half-line window (eps, q (1 + 20 hbar / beta)] with eps = spacing.

    The probability mass a dilated state keeps below the first node scales
    with eps/q, so the node count is chosen per unit dilation and the
    resolution is q-independent.
    """
    upper = q * (1 + 20 * f.hbar / f.beta)
    if n is None:
        n = affine_node_count(f.beta, f.hbar, upper / q)
    return half_line_grid(upper, n)


def fiducial_wavefunction(f: Fiducial, grid: Grid | None = None) -> WaveFunction:
    """The fiducial itself as a WaveFunction (identity transport).

    Sampled fiducials are spline-resampled when a different grid is given.
    """
    if f.kind == GAUSSIAN:
        grid = grid or default_canonical_grid(f)
        return WaveFunction(grid, gaussian_values(f.omega, f.hbar, grid.nodes), f.hbar)
    if f.kind == AFFINE:
        grid = grid or default_affine_grid(f)
        return WaveFunction(grid, affine_values(f.beta, f.hbar, grid.nodes), f.hbar)
    if grid is None or grid.same_as(f.sample.grid):
        return f.sample
    src = f.sample
    spline_re = CubicSpline(src.grid.nodes, src.values.real)
    spline_im = CubicSpline(src.grid.nodes, src.values.imag)
    inside = (grid.nodes >= src.grid.lower) & (grid.nodes <= src.grid.upper)
    vals = np.zeros(grid.n, dtype=complex)
    vals[inside] = spline_re(grid.nodes[inside]) + 1j * spline_im(grid.nodes[inside])
    return WaveFunction(grid, vals, f.hbar)


# ---------------------------------------------------------------------------
# transported states


def canonical_coherent(
    f: Fiducial, pt: PhasePoint, grid: Grid | None = None
) -> WaveFunction:
    """Canonical coherent state eta_{p,q} on a full-line grid.

    With no explicit grid, a window re-centered around q is chosen; an
    explicit grid must cover [q - 8 sigma, q + 8 sigma].
    """
    if pt.domain != CANONICAL_DOMAIN:
        raise DomainError("canonical transport needs a canonical phase point")
    if f.kind == AFFINE:
        raise DomainError("affine fiducials transport with affine_coherent")
    if grid is None:
        grid = default_canonical_grid(f, q=pt.q, p=pt.p)
    sigma = f.sigma
    if grid.lower > pt.q - 8 * sigma or grid.upper < pt.q + 8 * sigma:
        raise CoverageError(
            f"grid [{grid.lower}, {grid.upper}] does not cover "
            f"[{pt.q - 8 * sigma:.3g}, {pt.q + 8 * sigma:.3g}]"
        )
    x = grid.nodes
    phase = np.exp(1j * pt.p * (x - pt.q) / f.hbar)
    if f.kind == GAUSSIAN:
        envelope = gaussian_values(f.omega, f.hbar, x - pt.q)
    else:
        sample = f.sample
        spline_re = CubicSpline(sample.grid.nodes, sample.values.real)
        spline_im = CubicSpline(sample.grid.nodes, sample.values.imag)
        shifted = x - pt.q
        inside = (shifted >= sample.grid.lower) & (shifted <= sample.grid.upper)
        envelope = np.zeros_like(shifted, dtype=complex)
        envelope[inside] = spline_re(shifted[inside]) + 1j * spline_im(shifted[inside])
    return WaveFunction(grid, phase * envelope, f.hbar)


def affine_coherent(
    f: Fiducial, pt: PhasePoint, grid: Grid | None = None
) -> WaveFunction:
    """Affine coherent state xi_{p,q} on a half-line grid (q > 0)."""
    if f.kind != AFFINE:
        raise DomainError("affine transport requires an AffineBeta fiducial")
    if pt.q <= 0:
        raise DomainError("affine transport requires q > 0")
    if grid is None:
        grid = default_affine_grid(f, q=pt.q)
    x = grid.nodes
    values = (
        pt.q**-0.5
        * np.exp(1j * pt.p * (x - pt.q) / f.hbar)
        * affine_values(f.beta, f.hbar, x / pt.q)
    )
    return WaveFunction(grid, values, f.hbar)


def coherent_state(f: Fiducial, pt: PhasePoint, grid: Grid | None = None) -> WaveFunction:
    if pt.domain == AFFINE_DOMAIN:
        return affine_coherent(f, pt, grid)
    return canonical_coherent(f, pt, grid)


def canonical_log_derivative(f: Fiducial, pt: PhasePoint, x: np.ndarray) -> np.ndarray:
    """d/dx log eta_{p,q}(x) for the Gaussian family (exact)."""
    if f.kind != GAUSSIAN:
        raise DomainError("closed-form log derivative needs a Gaussian fiducial")
    return 1j * pt.p / f.hbar - f.omega * (x - pt.q) / f.hbar


def affine_log_derivative(f: Fiducial, pt: PhasePoint, x: np.ndarray) -> np.ndarray:
    """d/dx log xi_{p,q}(x) (exact)."""
    b = f.beta / f.hbar
    a = b - 0.5
    return 1j * pt.p / f.hbar + a / x - b / pt.q


def analytic_derivative(f: Fiducial, pt: PhasePoint, state: WaveFunction) -> WaveFunction:
    """Exact spatial derivative of a transported analytic fiducial."""
    x = state.grid.nodes
    if f.kind == GAUSSIAN:
        ld = canonical_log_derivative(f, pt, x)
    elif f.kind == AFFINE:
        ld = affine_log_derivative(f, pt, x)
    else:
        return derivative(state, 1)
    return WaveFunction(state.grid, ld * state.values, state.hbar)


# ---------------------------------------------------------------------------
# families on a common grid (for geometry)


def canonical_family(f: Fiducial, grid: Grid):
    """(p, q) -> eta_{p,q} on one fixed grid (required for overlaps)."""

    def family(p: float, q: float) -> WaveFunction:
        return canonical_coherent(f, PhasePoint(p, q), grid=grid)

    return family


def affine_family(f: Fiducial, grid: Grid):
    """(p, q) -> xi_{p,q} on one fixed half-line grid."""

    def family(p: float, q: float) -> WaveFunction:
        return affine_coherent(f, PhasePoint(p, q, domain=AFFINE_DOMAIN), grid=grid)

    return family


# ---------------------------------------------------------------------------
# centering


@dataclass(frozen=True)
class CenteringReport:
    kind: str
    x_moment: float
    x_expected: float
    conjugate_moment: float  # momentum (canonical) or dilation moment (affine)
    conjugate_expected: float
    tolerance: float
    passed: bool


def verify_centering(f: Fiducial, grid: Grid | None = None, tol: float = 1e-7) -> CenteringReport:
    """Moment report that gives (p, q) their physical meaning.

    Canonical fiducials must have vanishing position and momentum moments;
    the affine fiducial must have unit position moment and vanishing
    dilation moment.  Failures are reported, never corrected.
    """
    if f.kind == AFFINE:
        pt = PhasePoint(0.0, 1.0, domain=AFFINE_DOMAIN)
        state = affine_coherent(f, pt, grid=grid)
        dpsi = analytic_derivative(f, pt, state)
        x_mom = position_moment(state, 1)
        dil = dilation_expectation(state, dpsi)
        passed = abs(x_mom - 1.0) <= tol and abs(dil) <= tol
        return CenteringReport(f.kind, x_mom, 1.0, dil, 0.0, tol, passed)

    pt = PhasePoint(0.0, 0.0)
    state = canonical_coherent(f, pt, grid=grid)
    dpsi = analytic_derivative(f, pt, state)
    x_mom = position_moment(state, 1)
    p_mom = momentum_expectation(state, dpsi)
    passed = abs(x_mom) <= tol and abs(p_mom) <= tol
    return CenteringReport(f.kind, x_mom, 0.0, p_mom, 0.0, tol, passed)


def state_labels(f: Fiducial, state: WaveFunction, pt: PhasePoint) -> tuple[float, float]:
    """Read back (p, q) from a transported state by its moments."""
    dpsi = analytic_derivative(f, pt, state)
    if pt.domain == AFFINE_DOMAIN:
        q = position_moment(state, 1)
        pq = dilation_expectation(state, dpsi)
        return pq / q, q
    return momentum_expectation(state, dpsi), position_moment(state, 1)
