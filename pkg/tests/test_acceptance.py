"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the report lines.
"""

import math
import time

import numpy as np

from oracles import quadrature_expectations, quadrature_overlap

from cslab.dynamics import integrate, model_one_reference
from cslab.geometry import fs_metric, metric_field_from_family, scalar_curvature
from cslab.modeltwo import (
    ReducibleRep,
    characteristic_exact_gaussian,
    characteristic_radial,
    displaced_expectation,
    gaussian_radial_density,
    h1_closed_form,
    h1_expectation,
    h_p_operator,
    h_r_operator,
    measure_superposition,
    overlap_reducible,
    quartic_operator,
)
from cslab.schrodinger import (
    DIRICHLET_BOTH,
    EvolutionSetup,
    evolve,
    oscillation_window,
    track_expectations,
)
from cslab.states import (
    AFFINE_DOMAIN,
    PhasePoint,
    affine_coherent,
    affine_family,
    affine_fiducial,
    canonical_coherent,
    canonical_family,
    default_affine_grid,
    default_canonical_grid,
    gaussian_fiducial,
    state_labels,
)
from cslab.symbols import (
    compute_C,
    hbar_limit_check,
    parse_operator,
    polynomial_symbol,
    weak_symbol_canonical,
)


def report(number: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {number}: {detail}"


def test_01_centering_reproduces_labels():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20)
    worst = 0.0
    f_can = gaussian_fiducial(1.0, 1.0)
    for _ in range(10):
        p, q = rng.uniform(-2, 2, 2)
        pt = PhasePoint(p, q)
        p_read, q_read = state_labels(f_can, canonical_coherent(f_can, pt), pt)
        worst = max(worst, abs(p_read - p), abs(q_read - q))
    f_aff = affine_fiducial(1.0, 1.0)
    for _ in range(10):
        p = float(rng.uniform(-2, 2))
        q = float(rng.uniform(0.3, 2.5))
        pt = PhasePoint(p, q, domain=AFFINE_DOMAIN)
        p_read, q_read = state_labels(f_aff, affine_coherent(f_aff, pt), pt)
        worst = max(worst, abs(p_read - p), abs(q_read - q))
    elapsed = time.perf_counter() - t0
    report(
        1,
        worst <= 1e-7 and elapsed < 5.0,
        f"20-point label error {worst:.2e} (<= 1e-7), {elapsed:.2f}s (< 5s)",
    )


def test_02_cartesian_metric():
    worst_diag = worst_off = 0.0
    for omega in (0.5, 1.0, 2.0):
        f = gaussian_fiducial(omega, 1.0)
        grid = default_canonical_grid(f, q=2.0, p=2.0)
        fam = canonical_family(f, grid)
        for p in (-1.5, 0.0, 1.5):
            for q in (-1.0, 0.0, 1.0):
                g = fs_metric(fam, PhasePoint(p, q), hbar=1.0)
                worst_diag = max(
                    worst_diag, abs(g.g_pp - 1 / omega), abs(g.g_qq - omega)
                )
                worst_off = max(worst_off, abs(g.g_pq))
    report(
        2,
        worst_diag <= 1e-6 and worst_off <= 1e-8,
        f"diag err {worst_diag:.2e} (<= 1e-6), off-diag {worst_off:.2e} (<= 1e-8)",
    )


def test_03_poincare_geometry():
    worst_metric = worst_curv = 0.0
    for beta in (1.0, 4.0):
        f = affine_fiducial(beta, 1.0)
        for q in (0.5, 1.0, 4.0):
            grid = default_affine_grid(f, q=q, n=150_000)
            fam = affine_family(f, grid)
            g = fs_metric(fam, PhasePoint(0.4, q, domain=AFFINE_DOMAIN), hbar=1.0)
            worst_metric = max(
                worst_metric,
                abs(g.g_pp - q**2 / beta),
                abs(g.g_qq - beta / q**2),
                abs(g.g_pq),
            )
            field = metric_field_from_family(fam, AFFINE_DOMAIN)
            curv = scalar_curvature(field, PhasePoint(0.0, q, domain=AFFINE_DOMAIN))
            worst_curv = max(worst_curv, abs(curv - (-2.0 / beta)))
    report(
        3,
        worst_metric <= 1e-5 and worst_curv <= 1e-3,
        f"metric err {worst_metric:.2e} (<= 1e-5), curvature err {worst_curv:.2e} (<= 1e-3)",
    )


def test_04_model_one_singularity_avoidance():
    hbar = beta = 1.0
    c = hbar * beta / 2
    classical = polynomial_symbol({(2, 1): 1.0}, hbar, "affine")
    enhanced = polynomial_symbol({(2, 1): 1.0, (0, -1): c}, hbar, "affine")

    # collapse of the strictly classical flow, flagged near t = -1/p0
    collapse_ok = True
    for p0, q0 in [(1.0, 1.0), (0.8, 1.5)]:
        run = integrate(classical, PhasePoint(p0, q0, domain=AFFINE_DOMAIN), -1.5, 1e-3)
        collapse_ok &= run.singular and run.min_q() < 1e-3
        collapse_ok &= abs(run.times[-1] - (-1 / p0)) < 0.05

    # positive-energy floor of the regularized flow
    rng = np.random.default_rng(4)
    floor_worst = 0.0
    for _ in range(10):
        p0 = float(rng.uniform(0.4, 1.5)) * (1 if rng.random() < 0.5 else -1)
        q0 = float(rng.uniform(0.4, 2.5))
        energy = q0 * p0**2 + c / q0
        floor = c / energy
        start = PhasePoint(p0, q0, domain=AFFINE_DOMAIN)
        q_min = min(
            integrate(enhanced, start, -10.0, 1e-3).min_q(),
            integrate(enhanced, start, 10.0, 1e-3).min_q(),
        )
        floor_worst = max(floor_worst, abs(q_min - floor) / floor)

    # RK4 against the closed-form flow at dt = 1e-3
    reference = model_one_reference(1.0, 1.0, 0.0)
    run = integrate(classical, PhasePoint(1.0, 1.0, domain=AFFINE_DOMAIN), 1.0, 1e-3)
    rk4_err = max(
        max(abs(p - reference(t)[0]), abs(q - reference(t)[1]))
        for t, p, q in zip(run.times, run.p, run.q)
    )
    report(
        4,
        collapse_ok and floor_worst <= 1e-3 and rk4_err <= 1e-6,
        f"collapse flagged {collapse_ok}, floor rel err {floor_worst:.2e} (<= 1e-3), "
        f"RK4 err {rk4_err:.2e} (<= 1e-6)",
    )


def test_05_kinetic_dilation_constant():
    worst = 0.0
    for beta, hbar in [(1.0, 1.0), (2.0, 1.0), (1.0, 0.5)]:
        c = compute_C(affine_fiducial(beta, hbar))
        worst = max(worst, abs(c.quadrature - c.closed_form) / c.closed_form)
    report(5, worst <= 1e-8, f"quadrature vs hbar*beta/2 rel err {worst:.2e} (<= 1e-8)")


def test_06_hbar_scaling_of_symbols():
    omega = 1.0
    harmonic = hbar_limit_check(
        parse_operator(f"0.5 * D D + {0.5 * omega**2} * X X"),
        lambda hb: gaussian_fiducial(omega, hb),
        lambda p, q: 0.5 * (p**2 + omega**2 * q**2),
        p=1.0,
        q=1.0,
    )
    model_one = hbar_limit_check(
        parse_operator("1.0 * D X D"),
        lambda hb: affine_fiducial(1.0, hb),
        lambda p, q: q * p**2,
        p=1.0,
        q=2.0,
    )
    ok = (
        harmonic.fitted_exponent is not None
        and abs(harmonic.fitted_exponent - 1.0) <= 0.05
        and model_one.fitted_exponent is not None
        and abs(model_one.fitted_exponent - 1.0) <= 0.05
    )
    report(
        6,
        ok,
        f"fitted exponents {harmonic.fitted_exponent:.3f}, "
        f"{model_one.fitted_exponent:.3f} (1.0 +- 0.05)",
    )


def test_07_restricted_vs_full_harmonic():
    t0 = time.perf_counter()
    omega, hbar = 1.0, 1.0
    p0, q0 = 0.5, 0.3
    op = parse_operator("0.5 * D D + 0.5 * X X")
    f = gaussian_fiducial(omega, hbar)
    grid = oscillation_window(f, p0, q0, 4096)
    psi0 = canonical_coherent(f, PhasePoint(p0, q0), grid=grid).normalized()
    period = 2 * math.pi / omega
    dt = 1e-4
    setup = EvolutionSetup(op, grid, DIRICHLET_BOTH, dt, int(round(period / dt)), hbar)
    traj = track_expectations(evolve(psi0, setup, snapshot_every=100))

    symbol = weak_symbol_canonical(op, f)
    # run the restricted flow past the quantum endpoint so the time
    # interpolation below never clamps
    classical = integrate(symbol, PhasePoint(p0, q0), period + 0.01, 1e-3)
    cq = np.interp(traj.times, classical.times, classical.q)
    cp = np.interp(traj.times, classical.times, classical.p)
    err = max(np.max(np.abs(traj.q - cq)), np.max(np.abs(traj.p - cp)))
    elapsed = time.perf_counter() - t0
    report(
        7,
        err <= 1e-4 and elapsed < 60.0,
        f"<x>,<p> vs restricted flow err {err:.2e} (<= 1e-4), {elapsed:.1f}s (< 60s)",
    )


def test_08_model_two_exactness():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        rep = ReducibleRep(n, float(rng.uniform(0.5, 2.5)), float(rng.uniform(0, 0.95)))
        nu = float(rng.uniform(0, 2))
        p = rng.normal(0, 1.5, n)
        q = rng.normal(0, 1.5, n)
        closed = h1_closed_form(rep, nu, p, q)
        worst = max(worst, abs(h1_expectation(rep, nu, p, q) - closed) / (1 + abs(closed)))

    wick_worst = 0.0
    for m, zeta, hbar in [(1, 0.3, 1), (2, 0.6, 1), (1, 0.9, 0.5)]:
        rep = ReducibleRep(1, m, zeta, hbar)
        p, q = 0.8, -1.1
        h_p_q, h_r_q, quartic_q = quadrature_expectations(m, zeta, hbar, p, q)
        wick_worst = max(
            wick_worst,
            abs(displaced_expectation(h_p_operator(rep), rep, [p], [q]) - h_p_q),
            abs(displaced_expectation(h_r_operator(rep), rep, [p], [q]) - h_r_q),
            abs(displaced_expectation(quartic_operator(rep, 1.0), rep, [p], [q]) - quartic_q),
        )
    report(
        8,
        worst <= 1e-12 and wick_worst <= 1e-6,
        f"closed-form dev {worst:.2e} (<= 1e-12) over 1000 draws, "
        f"N=1 quadrature dev {wick_worst:.2e} (<= 1e-6)",
    )


def test_09_reducible_overlap():
    worst = 0.0
    for zeta in (0.3, 0.6, 0.9):
        rng = np.random.default_rng(int(zeta * 1000))
        rep = ReducibleRep(1, 1.0, zeta)
        for _ in range(20):
            pl, pr = rng.normal(0, 1.5, 2)
            ql, qr = rng.normal(0, 1.5, 2)
            closed = overlap_reducible(rep, [pl], [ql], [pr], [qr])
            brute = quadrature_overlap(1.0, zeta, 1.0, pl, ql, pr, qr)
            worst = max(worst, abs(closed - brute))
    report(9, worst <= 1e-8, f"closed vs double-integral dev {worst:.2e} (<= 1e-8)")


def test_10_characteristic_function():
    monotone = True
    for p_r in (0.5, 1.0, 2.0):
        errors = [
            characteristic_radial(gaussian_radial_density(n, 1.0), p_r).difference
            for n in (4, 8, 16, 32, 64)
        ]
        monotone &= all(b < a for a, b in zip(errors, errors[1:]))
    atom_worst = 0.0
    for p_r in (0.0, 0.5, 1.0, 2.0):
        got = measure_superposition([(0.25, 1.0)], p_r)
        atom_worst = max(
            atom_worst, abs(got - characteristic_exact_gaussian(p_r, 1.0))
        )
    report(
        10,
        monotone and atom_worst <= 1e-12,
        f"descent error monotone {monotone}, single-atom dev {atom_worst:.2e} (<= 1e-12)",
    )
