"""Ordered operator expressions and their classical symbols.

An operator Hamiltonian is an ordered product of factors, each either a
position power ``X^k`` or the momentum factor ``D = -i hbar d/dx``.  Order
is significant and never rearranged: ``D X D`` and ``X D D`` are different
operators that differ at order hbar.

Restricting the quantum action to a coherent-state sheet turns an operator
into a classical Hamiltonian H(p, q):

  canonical sheet:  H(p,q) = <eta| Hop(p + D, q + x) |eta>
  affine sheet:     H(p,q) = <xi | Hop(p + D/q, q x)  |xi>

For the Gaussian and affine-Beta fiducials both maps are evaluated in
closed form by pushing the factors through the fiducial exactly (the
fiducial's log-derivative is a Laurent polynomial) and then applying the
known Gaussian / Gamma-function moments.  A numerical-quadrature route is
kept alongside as an independent cross-check and as the only route for
sampled fiducials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import AccuracyError, ConfigError, DomainError, PreconditionError
from .grids import Grid, WaveFunction, derivative, inner_product, uniform_grid
from .states import (
    AFFINE,
    GAUSSIAN,
    SAMPLED,
    Fiducial,
    _affine_moment,
    affine_log_norm,
    default_canonical_grid,
    fiducial_wavefunction,
    verify_centering,
)

X_FACTOR = "X"
D_FACTOR = "D"

CANONICAL = "canonical"
AFFINE_MAP = "affine"


@dataclass(frozen=True)
class Factor:
    """One ordered factor: a position power X^k (k >= 1) or D."""

    kind: str
    power: int = 1

    def __post_init__(self):
        if self.kind not in (X_FACTOR, D_FACTOR):
            raise DomainError(f"unknown factor kind {self.kind!r}")
        if self.kind == X_FACTOR and self.power < 1:
            raise DomainError("position powers require k >= 1")
        if self.kind == D_FACTOR and self.power != 1:
            raise DomainError("D factors carry no power; repeat the factor")

    def __str__(self):
        if self.kind == D_FACTOR:
            return "D"
        return "X" if self.power == 1 else f"X^{self.power}"


def X(power: int = 1) -> Factor:
    return Factor(X_FACTOR, power)


def D() -> Factor:
    return Factor(D_FACTOR)


@dataclass(frozen=True)
class OperatorExpr:
    """Sum of real-coefficient ordered factor products."""

    terms: tuple[tuple[float, tuple[Factor, ...]], ...]

    def __post_init__(self):
        for coeff, factors in self.terms:
            if not np.isfinite(coeff):
                raise DomainError("operator coefficients must be finite")
            for f in factors:
                if not isinstance(f, Factor):
                    raise DomainError("factors must be Factor instances")

    @staticmethod
    def from_terms(*terms: tuple[float, tuple[Factor, ...]]) -> "OperatorExpr":
        return OperatorExpr(tuple((float(c), tuple(fs)) for c, fs in terms))

    def _canonical_dict(self) -> dict[tuple[Factor, ...], float]:
        out: dict[tuple[Factor, ...], float] = {}
        for coeff, factors in self.terms:
            out[factors] = out.get(factors, 0.0) + coeff
        return {k: v for k, v in out.items() if abs(v) > 1e-300}

    def adjoint(self) -> "OperatorExpr":
        """Formal adjoint: reverse each factor sequence (factors are self-adjoint)."""
        return OperatorExpr(tuple((c, tuple(reversed(fs))) for c, fs in self.terms))

    def is_hermitian(self, rtol: float = 1e-12) -> bool:
        mine = self._canonical_dict()
        theirs = self.adjoint()._canonical_dict()
        if mine.keys() != theirs.keys():
            return False
        scale = max((abs(v) for v in mine.values()), default=1.0)
        return all(abs(mine[k] - theirs[k]) <= rtol * scale for k in mine)

    def max_degrees(self) -> tuple[int, int]:
        """(max D count, max position degree) over the terms."""
        d_deg = x_deg = 0
        for _, factors in self.terms:
            d = sum(1 for f in factors if f.kind == D_FACTOR)
            x = sum(f.power for f in factors if f.kind == X_FACTOR)
            d_deg = max(d_deg, d)
            x_deg = max(x_deg, x)
        return d_deg, x_deg

    def scaled(self, a: float) -> "OperatorExpr":
        return OperatorExpr(tuple((a * c, fs) for c, fs in self.terms))

    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        return OperatorExpr(self.terms + other.terms)

    def __str__(self):
        parts = []
        for coeff, factors in self.terms:
            fs = " ".join(str(f) for f in factors) if factors else "1"
            parts.append(f"{coeff:g} * {fs}")
        return " + ".join(parts)


def parse_operator(text: str) -> OperatorExpr:
    """Parse the textual form, e.g. ``1.0 * D X D`` or ``0.5 * D D + 0.5 * X X``.

    Factors are whitespace-separated and read left to right in operator
    order; ``X^k`` abbreviates k adjacent position factors.
    """
    terms = []
    for raw in text.split("+"):
        part = raw.strip()
        if not part:
            raise ConfigError("empty operator term")
        if "*" not in part:
            raise ConfigError(f"term {part!r} must look like '<coeff> * <factors>'")
        coeff_text, _, factor_text = part.partition("*")
        try:
            coeff = float(coeff_text.strip())
        except ValueError as exc:
            raise ConfigError(f"bad coefficient {coeff_text.strip()!r}") from exc
        factors = []
        for token in factor_text.split():
            if token == D_FACTOR:
                factors.append(D())
            elif token == X_FACTOR:
                factors.append(X(1))
            elif token.startswith("X^"):
                try:
                    power = int(token[2:])
                except ValueError as exc:
                    raise ConfigError(f"bad factor {token!r}") from exc
                factors.append(X(power))
            else:
                raise ConfigError(f"unknown factor token {token!r}")
        if not factors:
            raise ConfigError(f"term {part!r} has no factors")
        terms.append((coeff, tuple(factors)))
    return OperatorExpr(tuple(terms))


# ---------------------------------------------------------------------------
# symbol functions


def _fd_gradient(evaluator: Callable[[float, float], float], affine: bool):
    def gradient(p: float, q: float) -> tuple[float, float]:
        h = (1 + abs(p) + abs(q)) * 1e-5
        hq = min(h, q / 2) if affine else h
        dp = (evaluator(p + h, q) - evaluator(p - h, q)) / (2 * h)
        dq = (evaluator(p, q + hq) - evaluator(p, q - hq)) / (2 * hq)
        return dp, dq

    return gradient


@dataclass
class SymbolFn:
    """Classical Hamiltonian H(p, q) with evaluation and gradient."""

    evaluator: Callable[[float, float], float]
    gradient: Callable[[float, float], tuple[float, float]]
    hbar: float
    provenance: str  # "canonical" or "affine"
    closed_form: bool
    poly: dict[tuple[int, int], float] | None = field(default=None, repr=False)

    def __call__(self, p: float, q: float) -> float:
        if self.provenance == AFFINE_MAP and q <= 0:
            raise DomainError("affine symbols are defined for q > 0 only")
        return self.evaluator(p, q)

    def grad(self, p: float, q: float) -> tuple[float, float]:
        if self.provenance == AFFINE_MAP and q <= 0:
            raise DomainError("affine symbols are defined for q > 0 only")
        return self.gradient(p, q)

    @staticmethod
    def from_poly(
        poly: dict[tuple[int, int], float], hbar: float, provenance: str
    ) -> "SymbolFn":
        """Closed-form symbol from (p-power, q-power) -> coefficient.

        q powers may be negative (Laurent) for affine symbols.
        """
        poly = {k: float(v) for k, v in poly.items() if abs(v) > 1e-300}

        def evaluator(p: float, q: float) -> float:
            return sum(c * p**i * q**j for (i, j), c in poly.items())

        def gradient(p: float, q: float) -> tuple[float, float]:
            dp = sum(c * i * p ** (i - 1) * q**j for (i, j), c in poly.items() if i)
            dq = sum(c * j * p**i * q ** (j - 1) for (i, j), c in poly.items() if j)
            return dp, dq

        return SymbolFn(evaluator, gradient, hbar, provenance, True, poly=poly)

    @staticmethod
    def from_callable(
        evaluator: Callable[[float, float], float],
        hbar: float,
        provenance: str,
        gradient: Callable[[float, float], tuple[float, float]] | None = None,
    ) -> "SymbolFn":
        if gradient is None:
            gradient = _fd_gradient(evaluator, provenance == AFFINE_MAP)
        return SymbolFn(evaluator, gradient, hbar, provenance, False)


def polynomial_symbol(
    poly: dict[tuple[int, int], float], hbar: float = 1.0, provenance: str = CANONICAL
) -> SymbolFn:
    return SymbolFn.from_poly(poly, hbar, provenance)


# ---------------------------------------------------------------------------
# exact factor pushing
#
# The working representation is a Laurent polynomial
#     f(p, q, x) = sum c[i, j, k] p^i q^j x^k
# such that the state reached so far is f * fiducial.  Applying D uses the
# fiducial's exact log-derivative, applying X^k multiplies by the mapped
# position factor.  At the end <fiducial| f |fiducial> is a moment sum.

Poly = dict[tuple[int, int, int], complex]


def _poly_add(poly: Poly, key: tuple[int, int, int], value: complex) -> None:
    poly[key] = poly.get(key, 0.0 + 0.0j) + value


def _apply_x_canonical(poly: Poly, m: int) -> Poly:
    # multiply by (q + x)^m
    out: Poly = {}
    for r in range(m + 1):
        binom = math.comb(m, r)
        for (i, j, k), c in poly.items():
            _poly_add(out, (i, j + m - r, k + r), binom * c)
    return out


def _apply_d_canonical(poly: Poly, omega: float, hbar: float) -> Poly:
    # (p + D) (f eta) = [p f - i hbar f' + i omega x f] eta
    out: Poly = {}
    for (i, j, k), c in poly.items():
        _poly_add(out, (i + 1, j, k), c)
        if k != 0:
            _poly_add(out, (i, j, k - 1), -1j * hbar * k * c)
        _poly_add(out, (i, j, k + 1), 1j * omega * c)
    return out


def _apply_x_affine(poly: Poly, m: int) -> Poly:
    # multiply by (q x)^m
    return {(i, j + m, k + m): c for (i, j, k), c in poly.items()}


def _apply_d_affine(poly: Poly, a: float, b: float, hbar: float) -> Poly:
    # (p + D/q)(f xi) = [p f - (i hbar / q)(f' + (a/x - b) f)] xi
    out: Poly = {}
    for (i, j, k), c in poly.items():
        _poly_add(out, (i + 1, j, k), c)
        if k != 0:
            _poly_add(out, (i, j - 1, k - 1), -1j * hbar * k * c)
        _poly_add(out, (i, j - 1, k - 1), -1j * hbar * a * c)
        _poly_add(out, (i, j - 1, k), 1j * hbar * b * c)
    return out


def _push_factors(factors: tuple[Factor, ...], f: Fiducial) -> Poly:
    poly: Poly = {(0, 0, 0): 1.0 + 0.0j}
    for factor in reversed(factors):
        if f.kind == GAUSSIAN:
            if factor.kind == X_FACTOR:
                poly = _apply_x_canonical(poly, factor.power)
            else:
                poly = _apply_d_canonical(poly, f.omega, f.hbar)
        else:
            if factor.kind == X_FACTOR:
                poly = _apply_x_affine(poly, factor.power)
            else:
                b = f.beta / f.hbar
                poly = _apply_d_affine(poly, b - 0.5, b, f.hbar)
    return poly


def _gaussian_moment(omega: float, hbar: float, k: int) -> float:
    if k < 0:
        raise DomainError("negative position powers on the full line")
    if k % 2:
        return 0.0
    val = 1.0
    var = hbar / (2 * omega)
    for t in range(1, k, 2):  # (k-1)!! var^(k/2)
        val *= t
    return val * var ** (k // 2)


def _reduce_moments(poly: Poly, f: Fiducial) -> dict[tuple[int, int], complex]:
    out: dict[tuple[int, int], complex] = {}
    for (i, j, k), c in poly.items():
        if f.kind == GAUSSIAN:
            mom = _gaussian_moment(f.omega, f.hbar, k)
        else:
            mom = _affine_moment(f.beta, f.hbar, k)
        if mom == 0.0:
            continue
        key = (i, j)
        out[key] = out.get(key, 0.0 + 0.0j) + c * mom
    return out


def _closed_form_symbol(op: OperatorExpr, f: Fiducial) -> SymbolFn:
    total: dict[tuple[int, int], complex] = {}
    for coeff, factors in op.terms:
        reduced = _reduce_moments(_push_factors(factors, f), f)
        for key, val in reduced.items():
            total[key] = total.get(key, 0.0 + 0.0j) + coeff * val
    scale = max((abs(v) for v in total.values()), default=1.0)
    max_imag = max((abs(v.imag) for v in total.values()), default=0.0)
    if op.is_hermitian() and max_imag > 1e-10 * scale:
        raise AccuracyError(
            f"closed-form symbol of a Hermitian operator has imaginary part {max_imag:.2e}"
        )
    provenance = CANONICAL if f.kind == GAUSSIAN else AFFINE_MAP
    return SymbolFn.from_poly({k: v.real for k, v in total.items()}, f.hbar, provenance)


# ---------------------------------------------------------------------------
# quadrature routes

CLOSED_FORM_D_DEGREE = 4
CLOSED_FORM_X_DEGREE = 4


def _apply_on_grid(op_factors, values, grid: Grid, p: float, q: float, hbar: float):
    """Apply canonical-map factors to grid samples with finite differences."""
    s = np.array(values, dtype=complex)
    x = grid.nodes
    for factor in reversed(op_factors):
        if factor.kind == X_FACTOR:
            s = (q + x) ** factor.power * s
        else:
            ds = derivative(WaveFunction(grid, s, hbar), 1).values
            s = p * s - 1j * hbar * ds
    return s


def symbol_quadrature_canonical(
    op: OperatorExpr, f: Fiducial, p: float, q: float, grid: Grid | None = None
) -> complex:
    """Grid evaluation of the canonical symbol (finite-difference D factors)."""
    base = fiducial_wavefunction(f, grid)
    total = 0.0 + 0.0j
    for coeff, factors in op.terms:
        applied = _apply_on_grid(factors, base.values, base.grid, p, q, f.hbar)
        total += coeff * inner_product(base, WaveFunction(base.grid, applied, f.hbar))
    return total


def _affine_integrand_coeffs(op: OperatorExpr, f: Fiducial, p: float, q: float):
    """Collapse (p, q) out of the pushed factors: x-power -> complex coeff."""
    coeffs: dict[int, complex] = {}
    for term_coeff, factors in op.terms:
        for (i, j, k), c in _push_factors(factors, f).items():
            coeffs[k] = coeffs.get(k, 0.0 + 0.0j) + term_coeff * c * p**i * q**j
    return coeffs


def symbol_quadrature_affine(op: OperatorExpr, f: Fiducial, p: float, q: float) -> complex:
    """Adaptive-quadrature evaluation of the affine symbol.

    The integrand xi*(x) [mapped operator xi](x) is assembled exactly
    (pointwise) and the half-line integral is done numerically; only the
    Gamma-function moment identities of the closed form are bypassed.
    """
    if q <= 0:
        raise DomainError("affine symbols are defined for q > 0 only")
    coeffs = _affine_integrand_coeffs(op, f, p, q)
    nu = 2.0 * f.beta / f.hbar
    log_m2 = 2 * affine_log_norm(f.beta, f.hbar)
    for k in coeffs:
        if k + nu <= 0:
            raise DomainError(f"integrand x**{k + nu - 1} is not integrable at 0")
    # each term is evaluated in log form so negative x-powers stay finite
    terms = [(k, c) for k, c in coeffs.items()]

    def density(x: float, part) -> float:
        total = 0.0
        for k, c in terms:
            total += part(c) * math.exp(log_m2 + (nu - 1 + k) * math.log(x) - nu * x)
        return total

    scale = sum(abs(c) for c in coeffs.values()) + 1.0
    kwargs = {"limit": 400, "epsabs": 1e-12 * scale, "epsrel": 1e-11}
    re, re_err = quad(density, 0, np.inf, args=(lambda z: z.real,), **kwargs)
    im, im_err = quad(density, 0, np.inf, args=(lambda z: z.imag,), **kwargs)
    if re_err + im_err > 1e-9 * (abs(re) + abs(im) + scale):
        raise AccuracyError("affine symbol quadrature did not converge")
    return re + 1j * im


def _check_real(value: complex, hermitian: bool) -> float:
    if hermitian and abs(value.imag) > 1e-10 * (1 + abs(value.real)):
        raise AccuracyError(f"Hermitian symbol has imaginary part {value.imag:.2e}")
    return value.real


def weak_symbol_canonical(op: OperatorExpr, f: Fiducial) -> SymbolFn:
    """Enhanced classical symbol on the canonical sheet.

    Gaussian fiducials with polynomial operators inside the degree caps use
    the exact moment calculus; otherwise each evaluation integrates on the
    fiducial's grid and is verified against one grid refinement.
    """
    if f.kind == AFFINE:
        raise PreconditionError("use weak_symbol_affine for affine fiducials")
    if f.kind == SAMPLED:
        f.sample.require_normalized(1e-8)
        report = verify_centering(f, tol=1e-6)
        if not report.passed:
            raise PreconditionError(
                f"sampled fiducial is not centered: <x>={report.x_moment:.3e}, "
                f"<p>={report.conjugate_moment:.3e}"
            )
    d_deg, x_deg = op.max_degrees()
    if f.kind == GAUSSIAN and d_deg <= CLOSED_FORM_D_DEGREE and x_deg <= CLOSED_FORM_X_DEGREE:
        return _closed_form_symbol(op, f)

    hermitian = op.is_hermitian()

    def evaluator(p: float, q: float) -> float:
        if f.kind == GAUSSIAN:
            coarse_grid = default_canonical_grid(f)
            fine_grid = uniform_grid(
                coarse_grid.lower, coarse_grid.upper, 2 * coarse_grid.n - 1
            )
        else:
            coarse_grid = f.sample.grid
            fine_grid = _respline(f.sample)
        coarse = symbol_quadrature_canonical(op, f, p, q, coarse_grid)
        fine = symbol_quadrature_canonical(op, f, p, q, fine_grid)
        if abs(fine - coarse) > 1e-6 * (1 + abs(fine)):
            raise AccuracyError(
                f"symbol quadrature not converged: {coarse:.8e} vs {fine:.8e}"
            )
        # the finite differences are second order, so one Richardson step
        # cancels their leading h^2 error
        return _check_real((4.0 * fine - coarse) / 3.0, hermitian)

    return SymbolFn.from_callable(evaluator, f.hbar, CANONICAL)


def _respline(sample: WaveFunction) -> Grid:
    g = sample.grid
    return uniform_grid(g.lower, g.upper, 2 * g.n - 1, kind=g.kind)


def weak_symbol_affine(op: OperatorExpr, f: Fiducial) -> SymbolFn:
    """Enhanced classical symbol on the affine sheet (q > 0)."""
    if f.kind != AFFINE:
        raise PreconditionError("affine symbols require an AffineBeta fiducial")
    d_deg, x_deg = op.max_degrees()
    if d_deg <= CLOSED_FORM_D_DEGREE and x_deg <= CLOSED_FORM_X_DEGREE:
        return _closed_form_symbol(op, f)

    hermitian = op.is_hermitian()

    def evaluator(p: float, q: float) -> float:
        return _check_real(symbol_quadrature_affine(op, f, p, q), hermitian)

    return SymbolFn.from_callable(evaluator, f.hbar, AFFINE_MAP)


def weak_symbol(op: OperatorExpr, f: Fiducial) -> SymbolFn:
    if f.kind == AFFINE:
        return weak_symbol_affine(op, f)
    return weak_symbol_canonical(op, f)


# ---------------------------------------------------------------------------
# the kinetic-dilation constant C


@dataclass(frozen=True)
class KineticDilationConstant:
    """C = hbar^2 integral x |xi'(x)|^2 dx, by quadrature and closed form."""

    quadrature: float
    closed_form: float

    def __float__(self):
        return self.closed_form


def compute_C(f: Fiducial, rtol: float = 1e-8) -> KineticDilationConstant:
    """The q**-1 coefficient the affine sheet adds to kinetic terms.

    The closed form hbar * beta / 2 follows from the Gamma-function moments
    of |xi|^2; the quadrature value integrates the defining expression with
    the exact derivative xi'(x) = xi(x) ((b - 1/2)/x - b).
    """
    if f.kind != AFFINE:
        raise PreconditionError("C is defined for AffineBeta fiducials")
    b = f.beta / f.hbar
    a = b - 0.5
    nu = 2.0 * b
    log_m2 = 2 * affine_log_norm(f.beta, f.hbar)

    def integrand(x: float) -> float:
        return x * math.exp(log_m2 + (nu - 1) * math.log(x) - nu * x) * (a / x - b) ** 2

    val, err = quad(integrand, 0, np.inf, limit=400)
    quad_value = f.hbar**2 * val
    closed = f.hbar * f.beta / 2.0
    if abs(quad_value - closed) > rtol * abs(closed):
        raise AccuracyError(
            f"C quadrature {quad_value!r} disagrees with closed form {closed!r}"
        )
    return KineticDilationConstant(quad_value, closed)


# ---------------------------------------------------------------------------
# hbar -> 0 comparison


@dataclass(frozen=True)
class HbarLimitReport:
    hbars: tuple[float, ...]
    residuals: tuple[float, ...]
    fitted_exponent: float | None
    monotone: bool
    at_least_linear: bool
    exact: bool

    @property
    def passed(self) -> bool:
        return self.exact or (self.monotone and self.at_least_linear)


def hbar_limit_check(
    op: OperatorExpr,
    fiducial_family: Callable[[float], Fiducial],
    classical_symbol: Callable[[float, float], float],
    p: float,
    q: float,
    hbars: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125),
) -> HbarLimitReport:
    """Residual |H_hbar(p,q) - H_classical(p,q)| over a decreasing hbar ladder.

    The residual must shrink at least linearly in hbar; an identically zero
    residual (exact symbol) is reported as such.
    """
    classical = classical_symbol(p, q)
    residuals = []
    for hb in hbars:
        f = fiducial_family(hb)
        symbol = weak_symbol(op, f)
        residuals.append(abs(symbol(p, q) - classical))
    residuals = tuple(residuals)
    scale = 1 + abs(classical)
    if all(r <= 1e-12 * scale for r in residuals):
        return HbarLimitReport(tuple(hbars), residuals, None, True, True, True)
    monotone = all(
        residuals[i + 1] < residuals[i] + 1e-14 * scale for i in range(len(residuals) - 1)
    )
    logs_h = np.log(np.asarray(hbars))
    logs_r = np.log(np.maximum(residuals, 1e-300))
    slope = float(np.polyfit(logs_h, logs_r, 1)[0])
    return HbarLimitReport(
        tuple(hbars), residuals, slope, monotone, slope >= 0.95, False
    )
