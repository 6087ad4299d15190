import math

import numpy as np
import pytest
from scipy.linalg import expm

from hfosc import fixtures
from hfosc.errors import BoundaryUndecidable, NonUniqueError
from hfosc.expansion import expand
from hfosc.model import ProblemSpec
from hfosc.oracle import (
    error_slope,
    floquet_verdict,
    integrate,
    monodromy,
    periodic_solution,
)


def test_scalar_relaxation_closed_form():
    # x' = -x + cos(omega t) + 1 has the periodic solution
    # 1 + (cos(omega t) + omega sin(omega t)) / (1 + omega^2).
    spec = fixtures.scalar_decay()
    omega = 3.0
    ps = periodic_solution(spec, omega)
    closed = 1.0 + (np.cos(omega * ps.t) + omega * np.sin(omega * ps.t)) / (
        1.0 + omega**2
    )
    assert np.allclose(ps.x[:, 0], closed, atol=1e-10)
    T = 2 * np.pi / omega
    assert ps.multipliers[0] == pytest.approx(math.exp(-T), abs=1e-10)
    assert ps.unique_margin == pytest.approx(1.0 - math.exp(-T), abs=1e-10)
    assert ps.periodicity_defect < 1e-10
    assert ps.ode_defect < 1e-10
    verdict = floquet_verdict(spec, omega)
    assert verdict.kind == "Stable"
    assert verdict.margin == pytest.approx(math.exp(-T) - 1.0, abs=1e-10)


def test_autonomous_monodromy_is_matrix_exponential():
    spec = fixtures.borderline_stable()
    omega = 10.0
    T = 2 * np.pi / omega
    M = spec.A0 + spec.B0 / omega
    assert np.allclose(monodromy(spec, omega), expm(M * T), atol=1e-9)


def test_integrate_matches_variation_of_constants():
    spec = fixtures.forced_borderline()
    omega = 25.0
    M = (spec.A0 + spec.B0 / omega).astype(complex)
    x0 = np.array([0.3, -0.2, 0.5], dtype=complex)
    t1 = 0.4
    got = integrate(spec, omega, x0, 0.0, t1)
    E = expm(M * t1)
    want = E @ x0 + np.linalg.solve(M, (E - np.eye(3)) @ spec.d0)
    assert np.allclose(got, want, atol=1e-9)
    assert np.array_equal(integrate(spec, omega, x0, 0.7, 0.7), x0)


def test_unit_multiplier_raises_nonunique():
    # A rotation block makes two multipliers hit 1 exactly at omega = 1,
    # although the kernel-geometry side of the problem stays admissible.
    spec = ProblemSpec(
        n=3,
        m=0,
        A0=[[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]],
        B0=np.diag([1.0, 0.0, 0.0]),
        d={0: [1.0, 0.0, 0.0]},
    )
    with pytest.raises(NonUniqueError):
        periodic_solution(spec, 1.0)


def test_periodic_solution_invariants():
    spec = fixtures.random_admissible(seed=2, n=3, m=1)
    omega = 80.0
    ps = periodic_solution(spec, omega, n_samples=128)
    assert ps.t.shape == (129,)
    assert ps.x.shape == (129, 3)
    assert ps.period == pytest.approx(2 * np.pi / omega)
    assert np.array_equal(ps.x[0], ps.x0)
    scale = float(np.max(np.abs(ps.x)))
    assert np.linalg.norm(ps.x[-1] - ps.x0) <= ps.periodicity_defect + 1e-15
    assert ps.periodicity_defect < 1e-8 * max(1.0, scale)
    assert ps.ode_defect < 1e-8 * max(1.0, scale)
    assert ps.unique_margin > 1e-10
    assert np.allclose(
        np.sort(ps.multipliers), np.sort(np.linalg.eigvals(ps.monodromy)), atol=1e-12
    )
    # Independent spot check: integrating from x0 over a third of the period
    # lands on the interpolated samples.
    k = 42
    got = integrate(spec, omega, ps.x0, 0.0, float(ps.t[k]))
    assert np.allclose(got, ps.x[k], atol=1e-8 * max(1.0, scale))


def test_real_systems_give_conjugate_multipliers():
    spec = fixtures.random_admissible(seed=4, n=4, m=1, s=2)
    ps = periodic_solution(spec, 60.0, n_samples=32)
    assert float(np.max(np.abs(ps.monodromy.imag))) < 1e-9
    assert float(np.max(np.abs(ps.x.imag))) < 1e-9 * float(np.max(np.abs(ps.x)))
    mult = ps.multipliers
    paired = np.sort_complex(np.conj(mult))
    assert np.allclose(np.sort_complex(mult), paired, atol=1e-9)


def test_floquet_separates_the_borderline_pair():
    omega = 100.0
    stable = floquet_verdict(fixtures.borderline_stable(), omega)
    assert stable.kind == "Stable"
    assert abs(stable.margin) < 1e-10
    unstable = floquet_verdict(fixtures.borderline_unstable(), omega)
    assert unstable.kind == "Unstable"
    # The growing multiplier is exp(2 pi / omega^2) for this fixture.
    assert unstable.margin == pytest.approx(np.expm1(2 * np.pi / omega**2), rel=1e-6)


def test_defective_unit_cluster_is_undecidable():
    spec = ProblemSpec(
        n=2, m=0, A0=[[0.0, 1.0], [0.0, 0.0]], B0=np.zeros((2, 2)), d={},
    )
    with pytest.raises(BoundaryUndecidable):
        floquet_verdict(spec, 5.0)


def test_semisimple_unit_cluster_is_stable():
    spec = ProblemSpec(n=2, m=0, A0=np.zeros((2, 2)), B0=np.zeros((2, 2)), d={})
    verdict = floquet_verdict(spec, 5.0)
    assert verdict.kind == "Stable"
    assert abs(verdict.margin) < 1e-12


def test_error_slope_tracks_partial_sum_order():
    spec = fixtures.random_admissible(seed=1, n=3, m=1)
    exp = expand(spec, order=2)
    omegas = (100.0, 200.0, 400.0)
    solutions = {w: periodic_solution(spec, w) for w in omegas}
    for r in (0, 1):
        report = error_slope(spec, exp, r, omegas, solutions=solutions)
        assert abs(report.slope + (r + 1)) < 0.4, (r, report.slope, report.errors)
        assert report.order == r
        assert len(report.errors) == 3
        assert all(e > 0 for e in report.errors)


def test_error_slope_is_nan_when_errors_vanish():
    spec = fixtures.random_admissible(seed=0, n=3, m=1, forced=False)
    exp = expand(spec, order=1)
    report = error_slope(spec, exp, 1, (20.0, 40.0))
    assert math.isnan(report.slope)
    assert report.errors == (0.0, 0.0)


def test_error_slope_needs_two_frequencies():
    spec = fixtures.random_admissible(seed=1, n=3, m=1)
    exp = expand(spec, order=1)
    with pytest.raises(ValueError):
        error_slope(spec, exp, 1, (100.0,))
