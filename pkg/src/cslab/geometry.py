"""Ray distance, Fubini-Study metric and curvature of coherent-state sheets.

The squared distance between two state rays (phases quotiented out) is

    d2(psi1, psi2) = 2 hbar min_alpha ||psi1 - exp(i alpha) psi2||^2
                   = 4 hbar (1 - |<psi1|psi2>|),

and its infinitesimal version on a two-parameter family psi(p, q),

    dsigma^2 = 2 hbar [ <dpsi|dpsi> - |<psi|dpsi>|^2 ],

is the pulled-back Fubini-Study metric.  On the Gaussian canonical sheet it
is the constant diag(1/omega, omega); on the affine sheet it is the
Poincare half-plane metric diag(q^2/beta, beta/q^2) with scalar curvature
-2/beta.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AccuracyError, DomainError
from .grids import WaveFunction, inner_product
from .states import AFFINE_DOMAIN, PhasePoint


@dataclass(frozen=True)
class MetricTensor:
    """Symmetric 2x2 phase-space metric at one point."""

    g_pp: float
    g_pq: float
    g_qq: float

    @property
    def det(self) -> float:
        return self.g_pp * self.g_qq - self.g_pq**2

    def require_positive_definite(self) -> None:
        if self.g_pp <= 0 or self.det <= 0:
            raise AccuracyError(f"metric not positive definite: {self}")


@dataclass(frozen=True)
class RayDistance:
    """Squared ray distance and the aligning phase."""

    d_squared: float
    alpha: float
    overlap_abs: float

    def __float__(self):
        return self.d_squared


def ray_distance(psi1: WaveFunction, psi2: WaveFunction, hbar: float | None = None) -> RayDistance:
    """2 hbar min_alpha ||psi1 - e^{i alpha} psi2||^2 via the closed form.

    ``alpha`` is the minimizing phase: e^{i alpha} psi2 aligned with psi1.
    """
    psi1.require_normalized(1e-8)
    psi2.require_normalized(1e-8)
    if hbar is None:
        hbar = psi1.hbar
    overlap = inner_product(psi1, psi2)
    d2 = 4.0 * hbar * (1.0 - abs(overlap))
    alpha = -cmath.phase(overlap) if overlap != 0 else 0.0
    return RayDistance(max(d2, 0.0), alpha, abs(overlap))


def _tangent(family, p, q, dp, dq, step) -> WaveFunction:
    plus = family(p + dp * step, q + dq * step)
    minus = family(p - dp * step, q - dq * step)
    values = (plus.values - minus.values) / (2 * step)
    return WaveFunction(plus.grid, values, plus.hbar)


def _metric_at_step(family, p, q, step_p, step_q, hbar) -> MetricTensor:
    psi = family(p, q)
    tp = _tangent(family, p, q, 1, 0, step_p)
    tq = _tangent(family, p, q, 0, 1, step_q)
    a = inner_product(psi, tp)
    b = inner_product(psi, tq)
    g_pp = 2 * hbar * (inner_product(tp, tp).real - abs(a) ** 2)
    g_qq = 2 * hbar * (inner_product(tq, tq).real - abs(b) ** 2)
    g_pq = 2 * hbar * (inner_product(tp, tq).real - (np.conj(a) * b).real)
    return MetricTensor(g_pp, g_pq, g_qq)


def fs_metric(
    family: Callable[[float, float], WaveFunction],
    pt: PhasePoint,
    step: float | None = None,
    hbar: float | None = None,
    rtol: float = 1e-5,
) -> MetricTensor:
    """Fubini-Study metric of a coherent family by central differences.

    One Richardson extrapolation is applied; two consecutive extrapolants
    must agree to ``rtol`` or an accuracy error is raised.  The family must
    return states on one fixed grid.
    """
    p, q = pt.p, pt.q
    if hbar is None:
        hbar = family(p, q).hbar
    if step is None:
        step = 1e-4 * (1 + abs(p) + abs(q))
    # keep the q-direction step inside the affine domain; the ratio stays
    # fixed across halvings so Richardson extrapolation remains valid
    q_ratio = min(1.0, q / (8 * step)) if pt.domain == AFFINE_DOMAIN else 1.0

    def levels(h):
        return _metric_at_step(family, p, q, h, h * q_ratio, hbar)

    g1, g2, g4 = levels(step), levels(step / 2), levels(step / 4)

    def richardson(coarse, fine):
        return MetricTensor(
            (4 * fine.g_pp - coarse.g_pp) / 3,
            (4 * fine.g_pq - coarse.g_pq) / 3,
            (4 * fine.g_qq - coarse.g_qq) / 3,
        )

    r1 = richardson(g1, g2)
    r2 = richardson(g2, g4)
    scale = max(abs(r2.g_pp), abs(r2.g_qq), 1e-30)
    dev = max(
        abs(r1.g_pp - r2.g_pp), abs(r1.g_pq - r2.g_pq), abs(r1.g_qq - r2.g_qq)
    )
    if dev > rtol * scale:
        raise AccuracyError(
            f"metric extrapolation not converged (dev {dev:.2e} vs scale {scale:.2e})"
        )
    r2.require_positive_definite()
    return r2


# ---------------------------------------------------------------------------
# curvature

_FIVE_POINT_FIRST = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_FIVE_POINT_SECOND = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def scalar_curvature(
    metric_field: Callable[[float, float], MetricTensor],
    pt: PhasePoint,
    step: float = 1e-2,
) -> float:
    """Scalar curvature (twice the Gauss curvature) via the Brioschi formula.

    The metric field is sampled on a 5x5 stencil around ``pt`` with steps
    scaled by the local metric, and differentiated with fourth-order
    central stencils.
    """
    center = metric_field(pt.p, pt.q)
    center_t = MetricTensor(center.g_pp, center.g_pq, center.g_qq)
    center_t.require_positive_definite()
    h_p = step / math.sqrt(center.g_pp)
    h_q = step / math.sqrt(center.g_qq)
    if pt.domain == AFFINE_DOMAIN and pt.q - 2 * h_q <= 0:
        raise DomainError("curvature stencil leaves the affine domain q > 0")

    offsets = (-2, -1, 0, 1, 2)
    E = np.empty((5, 5))
    F = np.empty((5, 5))
    G = np.empty((5, 5))
    for i, di in enumerate(offsets):
        for j, dj in enumerate(offsets):
            g = metric_field(pt.p + di * h_p, pt.q + dj * h_q)
            E[i, j], F[i, j], G[i, j] = g.g_pp, g.g_pq, g.g_qq

    def d_u(values):  # derivative in p at the stencil center column
        return float(_FIVE_POINT_FIRST @ values[:, 2]) / h_p

    def d_v(values):
        return float(_FIVE_POINT_FIRST @ values[2, :]) / h_q

    def d_uu(values):
        return float(_FIVE_POINT_SECOND @ values[:, 2]) / h_p**2

    def d_vv(values):
        return float(_FIVE_POINT_SECOND @ values[2, :]) / h_q**2

    def d_uv(values):
        rows = values @ _FIVE_POINT_FIRST / h_q  # v-derivative at each u-offset
        return float(_FIVE_POINT_FIRST @ rows) / h_p

    e, f, g = E[2, 2], F[2, 2], G[2, 2]
    e_u, e_v, e_vv = d_u(E), d_v(E), d_vv(E)
    f_u, f_v, f_uv = d_u(F), d_v(F), d_uv(F)
    g_u, g_v, g_uu = d_u(G), d_v(G), d_uu(G)

    m1 = np.array(
        [
            [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
            [f_v - 0.5 * g_u, e, f],
            [0.5 * g_v, f, g],
        ]
    )
    m2 = np.array(
        [
            [0.0, 0.5 * e_v, 0.5 * g_u],
            [0.5 * e_v, e, f],
            [0.5 * g_u, f, g],
        ]
    )
    det_g = e * g - f**2
    gauss = (np.linalg.det(m1) - np.linalg.det(m2)) / det_g**2
    return 2.0 * gauss


def metric_field_from_family(
    family: Callable[[float, float], WaveFunction],
    domain: str,
    step: float | None = None,
    hbar: float | None = None,
) -> Callable[[float, float], MetricTensor]:
    """Wrap a coherent family as a (p, q) -> MetricTensor field."""

    def field(p: float, q: float) -> MetricTensor:
        return fs_metric(family, PhasePoint(p, q, domain=domain), step=step, hbar=hbar)

    return field
