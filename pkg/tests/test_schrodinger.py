"""Crank-Nicolson benchmarks against the restricted dynamics."""

import math

import numpy as np
import pytest

from cslab.dynamics import integrate
from cslab.errors import DomainError, GridMismatchError, PreconditionError
from cslab.grids import uniform_grid
from cslab.schrodinger import (
    DIRICHLET_AT_ZERO,
    DIRICHLET_BOTH,
    EvolutionSetup,
    evolve,
    half_line_window,
    hamiltonian_tridiagonal,
    oscillation_window,
    track_expectations,
)
from cslab.states import (
    AFFINE_DOMAIN,
    PhasePoint,
    affine_coherent,
    affine_fiducial,
    canonical_coherent,
    gaussian_fiducial,
)
from cslab.symbols import parse_operator, weak_symbol_affine

HARMONIC = parse_operator("0.5 * D D + 0.5 * X X")
DXD = parse_operator("1.0 * D X D")


class TestEvolutionSetup:
    def test_unsupported_operator_rejected(self):
        grid = uniform_grid(-8, 8, 256)
        with pytest.raises(DomainError):
            EvolutionSetup(parse_operator("1.0 * X D"), grid, DIRICHLET_BOTH, 1e-3, 10)

    def test_grid_mismatch_rejected(self):
        f = gaussian_fiducial(1.0, 1.0)
        grid = uniform_grid(-8, 8, 512)
        other = uniform_grid(-8, 8, 513)
        psi0 = canonical_coherent(f, PhasePoint(0, 0), grid=other)
        setup = EvolutionSetup(HARMONIC, grid, DIRICHLET_BOTH, 1e-3, 10)
        with pytest.raises(GridMismatchError):
            evolve(psi0, setup)

    def test_unnormalized_rejected(self):
        grid = uniform_grid(-8, 8, 512)
        f = gaussian_fiducial(1.0, 1.0)
        psi0 = canonical_coherent(f, PhasePoint(0, 0), grid=grid)
        bad = psi0.normalized()
        from cslab.grids import WaveFunction

        bad = WaveFunction(grid, 1.01 * bad.values)
        setup = EvolutionSetup(HARMONIC, grid, DIRICHLET_BOTH, 1e-3, 10)
        with pytest.raises(PreconditionError):
            evolve(bad, setup)

    def test_absurd_time_step_rejected(self):
        grid = uniform_grid(-8, 8, 8192)
        with pytest.raises(PreconditionError):
            EvolutionSetup(HARMONIC, grid, DIRICHLET_BOTH, 1e4, 10)

    def test_dxd_discretization_is_symmetric(self):
        f = affine_fiducial(2.0, 1.0)
        grid = half_line_window(f, 2.0, 512)
        setup = EvolutionSetup(DXD, grid, DIRICHLET_AT_ZERO, 1e-4, 10)
        diag, off = hamiltonian_tridiagonal(setup)
        assert diag.size == grid.n - 1
        assert np.all(diag > 0)
        assert np.all(off < 0)


class TestEvolve:
    def test_ground_state_is_stationary(self):
        f = gaussian_fiducial(1.0, 1.0)
        grid = uniform_grid(-7, 7, 8193)
        psi0 = canonical_coherent(f, PhasePoint(0.0, 0.0), grid=grid).normalized()
        setup = EvolutionSetup(HARMONIC, grid, DIRICHLET_BOTH, 5e-4, 2000)
        result = evolve(psi0, setup, snapshot_every=2000)
        drift = np.max(np.abs(np.abs(result.final().values) - np.abs(psi0.values)))
        assert drift <= 1e-6

    def test_unitarity_over_many_steps(self):
        f = gaussian_fiducial(1.0, 1.0)
        grid = uniform_grid(-9, 9, 512)
        psi0 = canonical_coherent(f, PhasePoint(0.4, 0.2), grid=grid).normalized()
        setup = EvolutionSetup(HARMONIC, grid, DIRICHLET_BOTH, 1e-3, 10_000)
        result = evolve(psi0, setup, snapshot_every=10_000)
        assert abs(result.final().norm() - 1.0) <= 1e-8

    def test_free_packet_conserves_momentum(self):
        f = gaussian_fiducial(1.0, 1.0)
        grid = uniform_grid(-24, 24, 4096)
        psi0 = canonical_coherent(f, PhasePoint(1.0, 0.0), grid=grid).normalized()
        setup = EvolutionSetup(parse_operator("0.5 * D D"), grid, DIRICHLET_BOTH, 1e-3, 2000)
        traj = track_expectations(evolve(psi0, setup, snapshot_every=200))
        assert np.max(np.abs(traj.p - traj.p[0])) <= 1e-8

    def test_ehrenfest_match_for_matched_oscillator(self):
        omega, hbar = 1.0, 1.0
        p0, q0 = 0.5, 0.3
        f = gaussian_fiducial(omega, hbar)
        grid = oscillation_window(f, p0, q0, 2048)
        psi0 = canonical_coherent(f, PhasePoint(p0, q0), grid=grid).normalized()
        period = 2 * math.pi / omega
        dt = 2e-4
        setup = EvolutionSetup(HARMONIC, grid, DIRICHLET_BOTH, dt, int(round(period / dt)))
        traj = track_expectations(evolve(psi0, setup, snapshot_every=100))
        x_exact = q0 * np.cos(omega * traj.times) + (p0 / omega) * np.sin(omega * traj.times)
        assert np.max(np.abs(traj.q - x_exact)) <= 1e-4


class TestHalfLineModelOne:
    def test_energy_conserved_and_matches_symbol(self):
        beta, hbar = 4.0, 1.0
        f = affine_fiducial(beta, hbar)
        grid = half_line_window(f, q_max=3.0, n=2048)
        psi0 = affine_coherent(f, PhasePoint(1.0, 1.0, domain=AFFINE_DOMAIN), grid=grid)
        psi0 = psi0.normalized()
        setup = EvolutionSetup(DXD, grid, DIRICHLET_AT_ZERO, 2e-4, 2500, hbar)
        traj = track_expectations(evolve(psi0, setup, snapshot_every=125))
        assert traj.energy_drift() <= 1e-6
        symbol = weak_symbol_affine(DXD, f)
        assert traj.energy[0] == pytest.approx(symbol(1.0, 1.0), rel=1e-4)

    def test_restricted_matches_full_and_improves_with_sharpness(self):
        # classical limit: hbar decreases at fixed beta, so beta/hbar grows
        # while the flow's energy stays O(1)
        beta = 1.0
        worst = []
        for hbar in (0.5, 0.25, 0.125):
            f = affine_fiducial(beta, hbar)
            symbol = weak_symbol_affine(DXD, f)
            grid = half_line_window(f, q_max=3.0, n=4096)
            start = PhasePoint(1.0, 1.0, domain=AFFINE_DOMAIN)
            psi0 = affine_coherent(f, start, grid=grid).normalized()
            setup = EvolutionSetup(DXD, grid, DIRICHLET_AT_ZERO, 1e-4, 5000, hbar)
            errs = []
            for backward in (False, True):
                result = evolve(psi0, setup, snapshot_every=250, backward=backward)
                traj = track_expectations(result)
                ref = integrate(symbol, start, -0.5 if backward else 0.5, 1e-4)
                order = np.argsort(ref.times)
                classical_q = np.interp(traj.times, ref.times[order], ref.q[order])
                errs.append(np.max(np.abs(traj.q - classical_q) / np.abs(classical_q)))
            worst.append(max(errs))
        # 5 % bound once beta/hbar >= 4, monotone improvement along the ladder
        assert worst[1] <= 0.05 and worst[2] <= 0.05
        assert worst[0] > worst[1] > worst[2]


class TestRefinement:
    def test_halving_dt_and_dx_reduces_discrepancy(self):
        omega, hbar = 1.0, 1.0
        p0, q0 = 0.5, 0.3
        f = gaussian_fiducial(omega, hbar)
        period = 2 * math.pi / omega

        def discrepancy(n, dt):
            grid = oscillation_window(f, p0, q0, n)
            psi0 = canonical_coherent(f, PhasePoint(p0, q0), grid=grid).normalized()
            setup = EvolutionSetup(HARMONIC, grid, DIRICHLET_BOTH, dt, int(round(period / dt)))
            traj = track_expectations(evolve(psi0, setup, snapshot_every=250))
            x_exact = q0 * np.cos(omega * traj.times) + p0 * np.sin(omega * traj.times)
            return np.max(np.abs(traj.q - x_exact))

        coarse = discrepancy(1024, 8e-4)
        fine = discrepancy(2048, 4e-4)
        assert coarse <= 1e-3
        assert coarse / fine >= 4.0
