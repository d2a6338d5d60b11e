"""Hamiltonian flow of enhanced classical symbols.

Stationary variation of the restricted action  A = integral [p qdot - H] dt
gives Hamilton's equations for the symbol H, integrated here with fixed-step
RK4.  The affine Model-One symbol  H = q p^2 + C / q  is handled specially:
its C = 0 trajectories collapse to q = 0 in finite time, while any C > 0
keeps q above the energy floor C / E, so the integrator carries an explicit
singularity flag instead of failing silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, IO

import numpy as np

from .errors import DomainError, IntegrationError, PreconditionError
from .states import PhasePoint
from .symbols import AFFINE_MAP, SymbolFn

Q_FLOOR = 1e-6
GRADIENT_OVERFLOW = 1e12


@dataclass
class Trajectory:
    """Sampled phase-space path with its energy record."""

    times: np.ndarray
    p: np.ndarray
    q: np.ndarray
    energy: np.ndarray
    singular: bool = False
    singular_reason: str | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.energy = np.asarray(self.energy, dtype=float)

    @property
    def n(self) -> int:
        return self.times.size

    def energy_drift(self) -> float:
        e0 = self.energy[0]
        return float(np.max(np.abs(self.energy - e0)) / (1 + abs(e0)))

    def min_q(self) -> float:
        return float(np.min(self.q))

    def write_csv(self, stream: IO[str]) -> None:
        stream.write("t,p,q,H\n")
        for t, p, q, e in zip(self.times, self.p, self.q, self.energy):
            stream.write(f"{t:.17g},{p:.17g},{q:.17g},{e:.17g}\n")


def integrate(
    symbol: SymbolFn,
    start: PhasePoint,
    t_final: float,
    dt: float,
    q_floor: float = Q_FLOOR,
) -> Trajectory:
    """Classic RK4 for pdot = -dH/dq, qdot = dH/dp.

    ``t_final`` may be negative (backward run; the step is negated).  For
    affine symbols the run halts with the singularity flag once q crosses
    ``q_floor`` or a step leaves the domain; a gradient overflow is flagged
    the same way.  Non-finite state is an error carrying the last point.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    affine = symbol.provenance == AFFINE_MAP
    if affine and start.q <= 0:
        raise DomainError("affine dynamics requires q > 0")

    n_steps = int(round(abs(t_final) / dt))
    h = dt if t_final >= 0 else -dt
    p, q = float(start.p), float(start.q)

    times = [0.0]
    ps = [p]
    qs = [q]
    energies = [symbol(p, q)]
    singular = False
    reason = None

    def rhs(pp, qq):
        dp, dq = symbol.grad(pp, qq)
        if not (math.isfinite(dp) and math.isfinite(dq)):
            raise IntegrationError(
                "non-finite gradient", last_state=(times[-1], ps[-1], qs[-1])
            )
        if abs(dp) > GRADIENT_OVERFLOW or abs(dq) > GRADIENT_OVERFLOW:
            raise _Overflow()
        return -dq, dp

    for i in range(n_steps):
        try:
            k1p, k1q = rhs(p, q)
            k2p, k2q = rhs(p + 0.5 * h * k1p, q + 0.5 * h * k1q)
            k3p, k3q = rhs(p + 0.5 * h * k2p, q + 0.5 * h * k2q)
            k4p, k4q = rhs(p + h * k3p, q + h * k3q)
        except _Overflow:
            singular, reason = True, "gradient overflow"
            break
        except DomainError:
            singular, reason = True, "step left the affine domain"
            break
        p_new = p + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        q_new = q + h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        if not (math.isfinite(p_new) and math.isfinite(q_new)):
            raise IntegrationError(
                "non-finite state", last_state=(times[-1], ps[-1], qs[-1])
            )
        if affine and q_new < q_floor:
            p, q = p_new, max(q_new, 0.0)
            times.append((i + 1) * h)
            ps.append(p)
            qs.append(q)
            energies.append(energies[-1])  # symbol undefined at/below the floor
            singular, reason = True, f"q crossed the floor {q_floor:g}"
            break
        p, q = p_new, q_new
        times.append((i + 1) * h)
        ps.append(p)
        qs.append(q)
        energies.append(symbol(p, q))

    return Trajectory(
        np.array(times), np.array(ps), np.array(qs), np.array(energies),
        singular=singular, singular_reason=reason,
    )


class _Overflow(Exception):
    pass


def restricted_action(path: Trajectory, symbol: SymbolFn) -> float:
    """Trapezoid value of  integral [p dq - H dt]  along the sampled path.

    Along a solution of Hamilton's equations this is stationary under
    fixed-endpoint variations.
    """
    if path.n < 100:
        raise PreconditionError("restricted_action needs >= 100 samples")
    p, q, t = path.p, path.q, path.times
    pdq = float(np.sum(0.5 * (p[1:] + p[:-1]) * np.diff(q)))
    h_vals = np.array([symbol(pi, qi) for pi, qi in zip(p, q)])
    h_int = float(np.trapezoid(h_vals, t))
    return pdq - h_int


def perturbed(path: Trajectory, delta_q: Callable[[np.ndarray], np.ndarray]) -> Trajectory:
    """Path with q shifted by delta_q(t) (p and times unchanged)."""
    q = path.q + delta_q(path.times)
    return Trajectory(path.times.copy(), path.p.copy(), q, np.zeros_like(q))


# ---------------------------------------------------------------------------
# canonical transformations


@dataclass(frozen=True)
class CanonicalTransform:
    """Coordinate change (p, q) -> (ptilde, qtilde) with its generator.

    ``generator_increment`` evaluates the total change of the generating
    function along a path, so that  integral p dq  =  integral pt dqt + dG.
    """

    forward: Callable[[float, float], tuple[float, float]]
    inverse: Callable[[float, float], tuple[float, float]]
    generator_increment: Callable[[Trajectory], float]
    name: str = "transform"


def identity_transform() -> CanonicalTransform:
    return CanonicalTransform(
        lambda p, q: (p, q), lambda p, q: (p, q), lambda path: 0.0, "identity"
    )


def shift_transform(a: float) -> CanonicalTransform:
    return CanonicalTransform(
        lambda p, q: (p, q + a),
        lambda p, q: (p, q - a),
        lambda path: 0.0,
        f"shift(q + {a:g})",
    )


def affine_log_transform() -> CanonicalTransform:
    """ptilde = p q, qtilde = ln q (valid for q > 0); p dq = pt dqt exactly."""

    def forward(p, q):
        if q <= 0:
            raise DomainError("log transform requires q > 0")
        return p * q, math.log(q)

    return CanonicalTransform(
        forward,
        lambda pt, qt: (pt * math.exp(-qt), math.exp(qt)),
        lambda path: 0.0,
        "affine-log",
    )


def exchange_transform() -> CanonicalTransform:
    """ptilde = q, qtilde = -p; the generator increment is Delta(p q)."""

    def generator(path: Trajectory) -> float:
        return float(path.p[-1] * path.q[-1] - path.p[0] * path.q[0])

    return CanonicalTransform(
        lambda p, q: (q, -p), lambda pt, qt: (-qt, pt), generator, "exchange"
    )


@dataclass(frozen=True)
class TransformReport:
    p_dq: float
    pt_dqt: float
    generator_delta: float
    residual: float
    tolerance: float
    passed: bool


def transform_invariance_check(
    path: Trajectory, tf: CanonicalTransform, rtol: float = 1e-6
) -> TransformReport:
    """Verify  integral p dq - integral pt dqt - dG = 0  along the path."""
    try:
        mapped = [tf.forward(p, q) for p, q in zip(path.p, path.q)]
        back = [tf.inverse(pt, qt) for pt, qt in mapped]
    except (ValueError, ArithmeticError) as exc:
        raise DomainError(f"transform not valid on the path: {exc}") from exc
    scale = float(np.max(np.abs(path.p)) + np.max(np.abs(path.q)) + 1)
    worst = max(
        max(abs(bp - p), abs(bq - q))
        for (bp, bq), p, q in zip(back, path.p, path.q)
    )
    if worst > 1e-10 * scale:
        raise PreconditionError(
            f"forward/inverse round trip off by {worst:.2e} on the path"
        )
    pt = np.array([m[0] for m in mapped])
    qt = np.array([m[1] for m in mapped])
    p_dq = float(np.sum(0.5 * (path.p[1:] + path.p[:-1]) * np.diff(path.q)))
    pt_dqt = float(np.sum(0.5 * (pt[1:] + pt[:-1]) * np.diff(qt)))
    d_gen = tf.generator_increment(path)
    residual = abs(p_dq - pt_dqt - d_gen)
    tol = rtol * (1 + abs(p_dq))
    return TransformReport(p_dq, pt_dqt, d_gen, residual, tol, residual <= tol)


# ---------------------------------------------------------------------------
# Model One reference solution


def model_one_reference(p0: float, q0: float, c: float) -> Callable[[float], tuple[float, float]]:
    """Closed-form flow of H = q p^2 + c / q (c >= 0, q0 > 0).

    Energy conservation gives q(t) = [c + (|p0| q0 + s E t)^2] / E with
    s = sign(p0), which reduces to q0 (1 + p0 t)^2 at c = 0.
    """
    if q0 <= 0:
        raise DomainError("Model One requires q0 > 0")
    energy = q0 * p0**2 + (c / q0 if c else 0.0)
    if energy <= 0:
        raise DomainError("reference solution assumes positive energy")
    u0 = abs(p0) * q0  # sqrt(E q0 - c)
    s = 1.0 if p0 >= 0 else -1.0

    def at(t: float) -> tuple[float, float]:
        w = u0 + s * energy * t
        q = (c + w * w) / energy
        return s * w / q, q

    return at


def model_one_floor(p0: float, q0: float, c: float) -> float:
    """Turning-point floor q_min = C / E of the enhanced flow."""
    energy = q0 * p0**2 + c / q0
    return c / energy
