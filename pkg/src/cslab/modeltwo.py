"""Exact ladder-operator calculus for the reducible quartic oscillator.

A second, independent set of canonical pairs (R, S) is coupled to (P, Q)
through a correlated Gaussian ground state with correlation 0 <= zeta < 1.
The annihilators of that ground state are

    A_n = P_n - i m (Q_n + zeta S_n),    B_n = R_n - i m (S_n + zeta Q_n),

and coherent displacement by (p, q) shifts their eigenvalues to

    <A_n> = p_n - i m q_n,               <B_n> = -i m zeta q_n.

Because displaced coherent states are joint eigenstates of all A_n and B_n,
the expectation of any normal-ordered polynomial is the polynomial evaluated
at those c-numbers; everything in this module is exact arithmetic, valid
uniformly in the number of degrees of freedom N.

The quartic Hamiltonian  H1 = H_p + H_r + 4 nu :H_r^2:  (with
H_p = (1/2) sum A+A and H_r = (1/2) sum B+B) then reproduces

    <p,q| H1 |p,q> = (1/2)[p^2 + (1+zeta^2) m^2 q^2] + nu zeta^4 m^4 (q^2)^2

so an arbitrary quartic target (m0^2, lambda0 > 0) is matched by choosing
m^2 = m0^2/(1+zeta^2) and nu = lambda0/(zeta^4 m^4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import AccuracyError, DomainError, PreconditionError

MultiIndex = tuple[tuple[int, int], ...]  # sorted ((site, power), ...)


@dataclass(frozen=True)
class ReducibleRep:
    """Reducible representation parameters; zeta = 0 is the irreducible case."""

    N: int
    m: float
    zeta: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("N must be a positive integer")
        if self.m <= 0 or self.hbar <= 0:
            raise DomainError("m and hbar must be positive")
        if not 0.0 <= self.zeta < 1.0:
            raise DomainError("zeta must lie in [0, 1)")

    @property
    def K(self) -> float:
        """Overlap-width parameter K = (1 - zeta^2)^-1 >= 1."""
        return 1.0 / (1.0 - self.zeta**2)

    def alpha(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        return p - 1j * self.m * q

    def beta(self, q: np.ndarray) -> np.ndarray:
        return -1j * self.m * self.zeta * q


def _normalize_index(index) -> MultiIndex:
    if isinstance(index, dict):
        items = index.items()
    else:
        items = index
    out: dict[int, int] = {}
    for site, power in items:
        if power < 0:
            raise DomainError("multi-index powers must be non-negative")
        if power:
            out[site] = out.get(site, 0) + power
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class LadderTerm:
    coeff: complex
    adag: MultiIndex = ()
    bdag: MultiIndex = ()
    a: MultiIndex = ()
    b: MultiIndex = ()

    def dagger(self) -> "LadderTerm":
        return LadderTerm(np.conj(self.coeff), self.a, self.b, self.adag, self.bdag)


@dataclass(frozen=True)
class LadderPolynomial:
    """Normal-ordered polynomial: every term has daggers left of annihilators."""

    terms: tuple[LadderTerm, ...]

    @staticmethod
    def build(terms) -> "LadderPolynomial":
        built = tuple(
            LadderTerm(
                complex(c),
                _normalize_index(adag),
                _normalize_index(bdag),
                _normalize_index(a),
                _normalize_index(b),
            )
            for c, adag, bdag, a, b in terms
        )
        return LadderPolynomial(built)

    @staticmethod
    def from_factors(coeff: complex, factors: Sequence[tuple[str, int]]) -> "LadderPolynomial":
        """Single term from an ordered factor list like [("A+", 1), ("A", 1)].

        Raises a structural error if any daggered factor appears to the
        right of an annihilator (the input would not be normal ordered).
        """
        adag: list = []
        bdag: list = []
        a: list = []
        b: list = []
        seen_annihilator = False
        for kind, site in factors:
            if kind in ("A+", "B+"):
                if seen_annihilator:
                    raise DomainError(
                        f"factor {kind} right of an annihilator: not normal ordered"
                    )
                (adag if kind == "A+" else bdag).append((site, 1))
            elif kind in ("A", "B"):
                seen_annihilator = True
                (a if kind == "A" else b).append((site, 1))
            else:
                raise DomainError(f"unknown ladder factor {kind!r}")
        return LadderPolynomial.build([(coeff, adag, bdag, a, b)])

    def __add__(self, other: "LadderPolynomial") -> "LadderPolynomial":
        return LadderPolynomial(self.terms + other.terms)

    def scaled(self, factor: complex) -> "LadderPolynomial":
        return LadderPolynomial(
            tuple(
                LadderTerm(t.coeff * factor, t.adag, t.bdag, t.a, t.b)
                for t in self.terms
            )
        )

    def _as_dict(self) -> dict:
        out: dict = {}
        for t in self.terms:
            key = (t.adag, t.bdag, t.a, t.b)
            out[key] = out.get(key, 0.0 + 0.0j) + t.coeff
        return {k: v for k, v in out.items() if abs(v) > 1e-300}

    def is_hermitian(self, rtol: float = 1e-12) -> bool:
        mine = self._as_dict()
        theirs = LadderPolynomial(tuple(t.dagger() for t in self.terms))._as_dict()
        if mine.keys() != theirs.keys():
            return False
        scale = max((abs(v) for v in mine.values()), default=1.0)
        return all(abs(mine[k] - theirs[k]) <= rtol * scale for k in mine)


def _eval_index(index: MultiIndex, values: np.ndarray) -> complex:
    out = 1.0 + 0.0j
    for site, power in index:
        out *= values[site] ** power
    return out


def _evaluate(
    poly: LadderPolynomial,
    left_alpha: np.ndarray,
    left_beta: np.ndarray,
    right_alpha: np.ndarray,
    right_beta: np.ndarray,
) -> complex:
    la = np.conj(left_alpha)
    lb = np.conj(left_beta)
    total = 0.0 + 0.0j
    for t in poly.terms:
        total += (
            t.coeff
            * _eval_index(t.adag, la)
            * _eval_index(t.bdag, lb)
            * _eval_index(t.a, right_alpha)
            * _eval_index(t.b, right_beta)
        )
    return total


def _vectors(rep: ReducibleRep, p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if p.shape != (rep.N,) or q.shape != (rep.N,):
        raise DomainError(f"p and q must be vectors of length N = {rep.N}")
    return p, q


def displaced_expectation(poly: LadderPolynomial, rep: ReducibleRep, p, q) -> float:
    """<p,q| :poly: |p,q> = poly at <A_n> = p_n - i m q_n, <B_n> = -i m zeta q_n."""
    p, q = _vectors(rep, p, q)
    alpha = rep.alpha(p, q)
    beta = rep.beta(q)
    value = _evaluate(poly, alpha, beta, alpha, beta)
    if poly.is_hermitian() and abs(value.imag) > 1e-12 * (1 + abs(value.real)):
        raise AccuracyError(
            f"Hermitian polynomial produced imaginary residue {value.imag:.2e}"
        )
    return float(value.real)


# ---------------------------------------------------------------------------
# the quartic model


def h_p_operator(rep: ReducibleRep) -> LadderPolynomial:
    """(1/2) sum_n A+_n A_n (free-looking kinetic-plus-trap block)."""
    return LadderPolynomial.build(
        [(0.5, [(n, 1)], [], [(n, 1)], []) for n in range(rep.N)]
    )


def h_r_operator(rep: ReducibleRep) -> LadderPolynomial:
    """(1/2) sum_n B+_n B_n (the partner block)."""
    return LadderPolynomial.build(
        [(0.5, [], [(n, 1)], [], [(n, 1)]) for n in range(rep.N)]
    )


def quartic_operator(rep: ReducibleRep, nu: float) -> LadderPolynomial:
    """4 nu :H_r^2: = nu sum_{m,n} B+_m B+_n B_m B_n."""
    terms = []
    for mm in range(rep.N):
        for nn in range(rep.N):
            terms.append((nu, [], [(mm, 1), (nn, 1)], [], [(mm, 1), (nn, 1)]))
    return LadderPolynomial.build(terms)


def h1_operator(rep: ReducibleRep, nu: float) -> LadderPolynomial:
    if nu < 0:
        raise DomainError("nu must be non-negative")
    return h_p_operator(rep) + h_r_operator(rep) + quartic_operator(rep, nu)


def h1_closed_form(rep: ReducibleRep, nu: float, p, q) -> float:
    p, q = _vectors(rep, p, q)
    p2 = float(p @ p)
    q2 = float(q @ q)
    m0_sq = (1 + rep.zeta**2) * rep.m**2
    lam0 = nu * rep.zeta**4 * rep.m**4
    return 0.5 * (p2 + m0_sq * q2) + lam0 * q2**2


def h1_expectation(rep: ReducibleRep, nu: float, p, q) -> float:
    """Diagonal expectation of H1, evaluated through the ladder engine."""
    return displaced_expectation(h1_operator(rep, nu), rep, p, q)


def match_target(m0_sq: float, lambda0: float, zeta: float) -> tuple[float, float]:
    """Solve (m, nu) so that the quartic model reproduces (m0^2, lambda0)."""
    if not 0 < zeta < 1:
        raise DomainError("target matching needs zeta in (0, 1)")
    if m0_sq <= 0 or lambda0 <= 0:
        raise DomainError("target parameters must be positive")
    m_sq = m0_sq / (1 + zeta**2)
    nu = lambda0 / (zeta**4 * m_sq**2)
    return math.sqrt(m_sq), nu


# ---------------------------------------------------------------------------
# overlaps and matrix elements


def overlap_reducible(rep: ReducibleRep, p_left, q_left, p_right, q_right) -> complex:
    """<p',q';zeta|p,q;zeta> in closed form; K = (1-zeta^2)^-1 widens momentum."""
    pl, ql = _vectors(rep, p_left, q_left)
    pr, qr = _vectors(rep, p_right, q_right)
    hbar, m = rep.hbar, rep.m
    phase = np.dot(pl + pr, ql - qr) / (2 * hbar)
    decay = np.dot(pl - pr, pl - pr) * rep.K / (4 * m * hbar) + m * np.dot(
        ql - qr, ql - qr
    ) / (4 * hbar)
    return complex(np.exp(1j * phase - decay))


def matrix_element(
    poly: LadderPolynomial, rep: ReducibleRep, p_left, q_left, p_right, q_right
) -> complex:
    """<p',q'| :poly: |p,q> = poly(conj-left, right eigenvalues) * overlap."""
    pl, ql = _vectors(rep, p_left, q_left)
    pr, qr = _vectors(rep, p_right, q_right)
    factor = _evaluate(
        poly, rep.alpha(pl, ql), rep.beta(ql), rep.alpha(pr, qr), rep.beta(qr)
    )
    return factor * overlap_reducible(rep, pl, ql, pr, qr)


def h1_matrix_element(
    rep: ReducibleRep, nu: float, p_left, q_left, p_right, q_right
) -> complex:
    return matrix_element(h1_operator(rep, nu), rep, p_left, q_left, p_right, q_right)


# ---------------------------------------------------------------------------
# rotationally symmetric characteristic functions


def solid_angle(dim: int) -> float:
    """Surface area of the unit sphere S^(dim-1) in R^dim."""
    return 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)


@dataclass(frozen=True)
class RadialDensity:
    """Rotationally symmetric ground-state density rho(|x|) in N dimensions."""

    rho: Callable[[np.ndarray], np.ndarray]
    N: int
    r_max: float

    def weight(self, r: np.ndarray) -> np.ndarray:
        """Induced radial weight rho(r) r^(N-1) times the full solid angle."""
        return self.rho(r) * r ** (self.N - 1) * solid_angle(self.N)

    def normalization(self, n_nodes: int = 2000) -> float:
        x, w = leggauss(n_nodes)
        r = (x + 1) / 2 * self.r_max
        return float(np.sum(w / 2 * self.r_max * self.weight(r)))

    def require_normalized(self, tol: float = 1e-8) -> None:
        dev = abs(self.normalization() - 1.0)
        if dev > tol:
            raise PreconditionError(f"radial density normalization off by {dev:.3e}")


def gaussian_radial_density(N: int, m_prime: float, hbar: float = 1.0) -> RadialDensity:
    """Ground-state density of N independent oscillators of mass m_prime."""
    if m_prime <= 0:
        raise DomainError("m_prime must be positive")

    def rho(r):
        r = np.asarray(r, dtype=float)
        return np.exp(0.5 * N * math.log(m_prime / (math.pi * hbar)) - m_prime * r**2 / hbar)

    r_max = 2.5 * math.sqrt((N + 10 * math.sqrt(N) + 10) * hbar / (2 * m_prime))
    return RadialDensity(rho, N, r_max)


def characteristic_exact_gaussian(p_r: float, m_prime: float, hbar: float = 1.0) -> float:
    """Characteristic function of a free ground state: exp[-p^2 / 4 m' hbar]."""
    if m_prime <= 0:
        raise DomainError("m_prime must be positive")
    return math.exp(-(p_r**2) / (4 * m_prime * hbar))


@dataclass(frozen=True)
class CharacteristicResult:
    exact: float
    descent: float

    @property
    def difference(self) -> float:
        return abs(self.exact - self.descent)


def characteristic_radial(
    density: RadialDensity,
    p_r: float,
    hbar: float = 1.0,
    n_r: int = 800,
    n_theta: int = 800,
) -> CharacteristicResult:
    """Exact radial-angular quadrature of the characteristic function and
    its steepest-descent companion.

    The angular integral int exp(i lambda cos theta) sin^(N-2) theta dtheta
    concentrates at theta = pi/2 for large N; its quadratic-order descent
    approximation is exp(-lambda^2 / 2N), which replaces the oscillatory
    kernel by a Gaussian in the remaining radial integral.
    """
    N = density.N
    if N < 3:
        raise DomainError("the angular reduction requires N >= 3")
    density.require_normalized()

    xr, wr = leggauss(n_r)
    r = (xr + 1) / 2 * density.r_max
    wr = wr / 2 * density.r_max
    radial = density.rho(r) * r ** (N - 1) * solid_angle(N - 1)

    xt, wt = leggauss(n_theta)
    theta = (xt + 1) / 2 * math.pi
    wt = wt / 2 * math.pi
    angular = np.sin(theta) ** (N - 2) * wt

    kernel = np.exp(1j * np.outer(p_r * r / hbar, np.cos(theta)))
    exact = complex(np.einsum("i,j,ij->", radial * wr, angular, kernel))

    weight = density.weight(r) * wr
    descent = float(np.sum(weight * np.exp(-(p_r**2) * r**2 / (2 * N * hbar**2))))
    if abs(exact.imag) > 1e-10:
        raise AccuracyError(f"characteristic function has imaginary part {exact.imag:.2e}")
    return CharacteristicResult(float(exact.real), descent)


def measure_superposition(
    weights: Sequence[tuple[float, float]], p_r: float, hbar: float = 1.0
) -> float:
    """Convex Gaussian mixture C(p) = sum_i mu_i exp(-b_i p^2 / hbar).

    A single atom at b = 1/(4 m') reproduces the free ground state.
    """
    total = sum(mu for _, mu in weights)
    if abs(total - 1.0) > 1e-9:
        raise PreconditionError(f"measure weights sum to {total!r}, not 1")
    for b, mu in weights:
        if b <= 0 or mu < 0:
            raise DomainError("weights must have b > 0 and mu >= 0")
    return float(sum(mu * math.exp(-b * p_r**2 / hbar) for b, mu in weights))


def scenario_record(rep: ReducibleRep, nu: float, p, q) -> dict:
    """JSON-ready record of one quartic-model evaluation."""
    p, q = _vectors(rep, p, q)
    return {
        "N": rep.N,
        "m": rep.m,
        "zeta": rep.zeta,
        "nu": nu,
        "p": [float(v) for v in p],
        "q": [float(v) for v in q],
        "H1": h1_expectation(rep, nu, p, q),
        "m0_sq": (1 + rep.zeta**2) * rep.m**2,
        "lambda0": nu * rep.zeta**4 * rep.m**4,
    }
