import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavityfeedback import fock, liouville as L
from cavityfeedback.errors import TraceDriftError
from cavityfeedback.liouville import DiffusionKind, FeedbackParams, IntegratorConfig

from conftest import propagate_superop, pure_with_clear_top


def test_params_validation():
    with pytest.raises(ValueError):
        FeedbackParams(0.0, 0.5)
    with pytest.raises(ValueError):
        FeedbackParams(1.0, 1.5)
    with pytest.raises(ValueError):
        IntegratorConfig(t_final=0.1, dt=1.0)


def test_rhs_standard_loss():
    p = FeedbackParams(2.0, 0.0)
    out = L.rhs(fock.fock_dm(1, 4), p)
    np.testing.assert_allclose(out, 2.0 * (fock.fock_dm(0, 4) - fock.fock_dm(1, 4)), atol=1e-15)


@pytest.mark.parametrize("n", range(6))
def test_rhs_fock_fixed_under_ideal_feedback(n):
    assert np.max(np.abs(L.rhs(fock.fock_dm(n, 6), FeedbackParams(1.0, 1.0)))) < 1e-15


@pytest.mark.parametrize("eta", [0.0, 0.25, 0.7, 1.0])
def test_rhs_coherence_10(eta):
    rho = np.zeros((4, 4), complex)
    rho[1, 0] = 1.0
    out = L.rhs(rho, FeedbackParams(1.7, eta))
    assert out[1, 0] == pytest.approx(-0.5 * 1.7)


@pytest.mark.parametrize("eta", [0.0, 0.3, 1.0])
def test_rhs_matches_operator_form(eta, rng):
    o = fock.mode_ops(9)
    p = FeedbackParams(0.8, eta)
    for _ in range(10):
        rho = fock.random_density(9, rng)
        ref = (eta * p.gamma * o.sqrt_n @ rho @ o.sqrt_n
               + (1 - eta) * p.gamma * o.a @ rho @ o.a_dag
               - 0.5 * p.gamma * (o.n_hat @ rho + rho @ o.n_hat))
        out = L.rhs(rho, p)
        assert np.max(np.abs(out - ref)) < 1e-12
        assert abs(np.trace(out)) < 1e-12


def test_rhs_dims_mismatch():
    with pytest.raises(ValueError):
        L.rhs(np.eye(6) / 6, FeedbackParams(1, 0.5), dims=(2, 2))


def test_integrate_zero_time(rng):
    rho0 = fock.random_density(5, rng)
    ev = L.integrate(rho0, FeedbackParams(1, 0.4), IntegratorConfig(t_final=0.0))
    np.testing.assert_array_equal(ev.final, rho0)


def test_integrate_ideal_matches_sqrt_dephasing(rng):
    rho0 = fock.projector(fock.random_ket(12, rng))
    ev = L.integrate(rho0, FeedbackParams(1.0, 1.0), IntegratorConfig(t_final=1.0, dt=1e-3))
    ref = L.propagate_analytic(rho0, DiffusionKind.SQUARE_ROOT, 1.0)
    assert np.max(np.abs(ev.final - ref)) < 1e-8


def test_integrate_damping_matches_binomial():
    rho0 = fock.fock_dm(2, 6)
    ev = L.integrate(rho0, FeedbackParams(1.0, 0.0), IntegratorConfig(t_final=0.5))
    assert np.max(np.abs(ev.final - L.damped_cavity_analytic(rho0, 0.5))) < 1e-8


@pytest.mark.parametrize("eta", [0.0, 0.5, 1.0])
def test_integrate_matches_superoperator_expm(eta, rng):
    p = FeedbackParams(1.3, eta)
    rho0 = fock.random_density(7, rng)
    ev = L.integrate(rho0, p, IntegratorConfig(t_final=0.8, sample_points=4))
    for t, rho in zip(ev.times, ev.states):
        assert np.max(np.abs(rho - propagate_superop(rho0, p, t))) < 1e-9
    assert ev.times[-1] == pytest.approx(0.8)


def test_integrate_trace_drift_guard(rng):
    rho0 = fock.random_density(10, rng)
    # RK4 is unstable far beyond its stability region
    with pytest.raises(TraceDriftError):
        L.integrate(rho0, FeedbackParams(50.0, 0.0), IntegratorConfig(t_final=1.0, dt=0.5))


def test_integrate_two_mode_factorizes(rng):
    p = FeedbackParams(1.0, 0.6)
    r1, r2 = fock.random_density(3, rng), fock.random_density(4, rng)
    cfg = IntegratorConfig(t_final=0.7)
    joint = L.integrate(np.kron(r1, r2), p, cfg, dims=(3, 4)).final
    sep = np.kron(L.integrate(r1, p, cfg).final, L.integrate(r2, p, cfg).final)
    assert np.max(np.abs(joint - sep)) < 1e-10


def test_positivity_and_qnd(rng):
    rho0 = fock.random_density(10, rng)
    ev = L.integrate(rho0, FeedbackParams(1, 1), IntegratorConfig(t_final=2.0, sample_points=20))
    for rho in ev.states:
        assert np.linalg.eigvalsh(rho).min() > -1e-9
        assert np.max(np.abs(np.diag(rho) - np.diag(rho0))) < 1e-9


@pytest.mark.parametrize("n,m,gt,sq,std", [
    (1, 0, 1.0, 0.6065306597126334, 0.6065306597126334),
    (2, 0, 1.0, 0.36787944117144233, 0.1353352832366127),
])
def test_propagate_analytic_factors(n, m, gt, sq, std):
    rho = np.ones((4, 4), complex)
    assert L.propagate_analytic(rho, DiffusionKind.SQUARE_ROOT, gt)[n, m] == pytest.approx(sq, rel=1e-14)
    assert L.propagate_analytic(rho, DiffusionKind.STANDARD, gt)[n, m] == pytest.approx(std, rel=1e-14)


def test_propagate_analytic_diagonal_fixed(rng):
    rho = fock.random_density(6, rng)
    for kind in DiffusionKind:
        np.testing.assert_array_equal(np.diag(L.propagate_analytic(rho, kind, 3.0)), np.diag(rho))


def test_damped_limits(rng):
    rho = fock.random_density(6, rng)
    np.testing.assert_allclose(L.damped_cavity_analytic(rho, 0.0), rho, atol=1e-15)
    late = L.damped_cavity_analytic(rho, 30.0)
    np.testing.assert_allclose(np.diag(late).real, np.eye(6)[0], atol=1e-10)
    # coherences with the vacuum only fall as exp(-gamma t / 2)
    assert np.max(np.abs(late - np.diag(np.diag(late)))) < np.exp(-15.0)
    diag_state = np.diag(np.diag(rho))
    np.testing.assert_allclose(L.damped_cavity_analytic(diag_state, 30.0), fock.fock_dm(0, 6), atol=1e-10)
    np.testing.assert_allclose(L.damped_cavity_analytic(fock.fock_dm(1, 3), np.log(2)),
                               np.diag([0.5, 0.5, 0]), atol=1e-15)


def test_damped_matches_superoperator(rng):
    rho = fock.random_density(6, rng)
    ref = propagate_superop(rho, FeedbackParams(1.0, 0.0), 0.9)
    assert np.max(np.abs(L.damped_cavity_analytic(rho, 0.9) - ref)) < 1e-12


def test_offdiag_rate():
    assert L.offdiag_rate(1, 0, FeedbackParams(2.0, 0.3)) == pytest.approx(1.0)
    assert L.offdiag_rate(4, 1, FeedbackParams(2.0, 1.0)) == pytest.approx(1.0)
    assert L.offdiag_rate(5, 5, FeedbackParams(2.0, 1.0)) == 0


def test_offdiag_rate_is_exact_top_of_support():
    # only rho[n, m] populated: nothing flows in from above
    p = FeedbackParams(1.0, 0.4)
    rho = np.zeros((6, 6), complex)
    rho[4, 2] = 1.0
    out = propagate_superop(rho, p, 0.6)
    assert out[4, 2] == pytest.approx(np.exp(-L.offdiag_rate(4, 2, p) * 0.6), rel=1e-12)


def test_decay_inequality():
    assert L.decay_inequality_check(4, 1) == (1.0, 9)
    assert L.decay_inequality_check(3, 3) == (0.0, 0)
    for n in range(33):
        for m in range(33):
            sq, std = L.decay_inequality_check(n, m)
            assert sq <= std


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 50), st.integers(0, 50), st.floats(0, 1))
def test_rate_ordering(n, m, eta):
    p = FeedbackParams(1.0, eta)
    r = L.offdiag_rate(n, m, p)
    assert r >= (1 - eta) * (n + m) / 2 - 1e-12
    assert L.offdiag_rate(n, m, FeedbackParams(1.0, 1.0)) <= 0.5 * (n - m) ** 2 + 1e-12


def test_mean_amplitude():
    psi = fock.coherent_state(1.5, 32)
    assert L.mean_amplitude(fock.projector(psi)) == pytest.approx(1.5, abs=1e-6)
    assert L.mean_amplitude(fock.fock_dm(3, 6)) == 0
    assert L.mean_amplitude(fock.fock_dm(0, 6)) == 0


def test_semiclassical():
    fac, large = L.semiclassical_amplitude(25, 1.0)
    assert large == pytest.approx(0.9950124791926823, rel=1e-14)
    e16, e17 = L.semiclassical_amplitude(100, 1.0)
    assert abs(np.log(e16) - np.log(e17)) / abs(np.log(e17)) < 0.02
    assert L.ordinary_amplitude_factor(1.0) == pytest.approx(np.exp(-0.5))


def test_ordinary_diffusion_amplitude_independent_of_nbar():
    for alpha in (1.0, 2.0, 3.0):
        rho = fock.projector(fock.coherent_state(alpha, 48))
        a0 = L.mean_amplitude(rho)
        a1 = L.mean_amplitude(L.propagate_analytic(rho, DiffusionKind.STANDARD, 0.7))
        assert a1 / a0 == pytest.approx(np.exp(-0.35), rel=1e-12)
