import numpy as np
import pytest

from nicrn import State, availability, equilibrium_in_class, parse_network, build_matrices, reference_equilibrium
from nicrn.dynamics import (
    DynamicsError,
    IntegratorOptions,
    class_drift,
    converged_state,
    dissipation_rate,
    fit_relaxation_rate,
    integrate,
    lyapunov_trace,
)
from nicrn.integrator import InvalidState, dopri5, dopri5_fixed

from conftest import REVERSIBLE_NETWORKS, net, random_state


def test_equilibrium_trajectory_is_constant():
    n = net("example_isolated")
    traj = integrate(n.spec, n.M, n.ref.state, IntegratorOptions(t_end=100.0, stop_on_convergence=False))
    assert traj.times[-1] == 100.0
    assert np.max(np.abs(traj.y - n.ref.state.vector())) < 1e-10
    rep = lyapunov_trace(n.ref, n.spec, n.M, traj)
    assert np.max(np.abs(rep.S_A)) < 1e-14


@pytest.mark.parametrize("U, N0", [(6.0, [2.0, 2.0, 1.0]), (5.0, [1.0, 2.0, 1.0])])
def test_example_relaxes_to_class_equilibrium(U, N0):
    n = net("example_isolated")
    origin = State(U, N0)
    target = equilibrium_in_class(n.spec, n.M, n.ref, origin).state
    traj = integrate(n.spec, n.M, origin, IntegratorOptions(t_end=200.0), ref=n.ref)
    rep = converged_state(traj, target, 1e-6)
    assert rep.converged and rep.first_time is not None and rep.first_time < 200.0
    assert class_drift(n.M, traj) < 1e-8
    assert np.max(np.abs(traj.y[:, 0] - U)) < 1e-10 * (1 + U)
    assert np.all(traj.y[:, 1:] > 0) and np.all(np.diff(traj.times) > 0)
    np.testing.assert_array_equal(traj.y[0], origin.vector())


def test_example_availability_decreases_to_zero():
    n = net("example_isolated")
    traj = integrate(n.spec, n.M, State(6.0, [2.0, 2.0, 1.0]), IntegratorOptions(t_end=200.0), ref=n.ref)
    rep = lyapunov_trace(n.ref, n.spec, n.M, traj)
    assert rep.monotone and rep.dissipative
    assert traj.S_A[-1] < 1e-10
    # Strictly decreasing while S_A is resolvable.
    resolved = traj.S_A > 1e-12
    assert np.all(np.diff(traj.S_A[resolved]) < 0)


@pytest.mark.parametrize("N", [1.0, 2.5])
def test_heat_exchange_relaxation_rate(N):
    n = net("he_only")
    spec = n.spec
    state0 = State(spec.thermo.energy(0.5, [N]), [N])
    traj = integrate(spec, n.M, state0, IntegratorOptions(t_end=40.0, stop_on_convergence=False, max_step=0.5))
    rate = fit_relaxation_rate(traj.times, traj.T, spec.T_env)
    C = spec.kappa * 1.5 * N
    assert rate == pytest.approx(0.5 / C, rel=0.02)


def test_heat_exchange_dissipation_closed_form(rng):
    n = net("he_only")
    for T in np.exp(rng.uniform(np.log(0.2), np.log(8.0), 50)):
        s = State(n.spec.thermo.energy(T, [1.3]), [1.3])
        dS, _ = dissipation_rate(n.spec, n.M, n.ref, s)
        Ts = n.ref.T_star
        assert dS == pytest.approx(-0.5 * (Ts - T) ** 2 / (Ts * T), rel=1e-12, abs=1e-15)


def test_isothermal_surface_is_invariant(rng):
    n = net("example_isothermal")
    u = n.spec.thermo.u(n.spec.T_env)
    for _ in range(5):
        s = random_state(n.spec, rng)
        traj = integrate(n.spec, n.M, s, IntegratorOptions(t_end=50.0), ref=n.ref)
        gap = traj.y[:, 0] - traj.y[:, 1:] @ u
        assert np.max(np.abs(gap)) < 1e-8 * (1 + abs(s.U))
        assert class_drift(n.M, traj) < 1e-8
        rep = lyapunov_trace(n.ref, n.spec, n.M, traj)
        assert rep.monotone and rep.dissipative


def test_isothermal_start_off_surface_rejected():
    n = net("example_isothermal")
    with pytest.raises(DynamicsError):
        integrate(n.spec, n.M, State(20.0, [1.0, 1.0, 1.0]))


def test_invalid_options():
    with pytest.raises(DynamicsError):
        IntegratorOptions(rtol=0.0)
    with pytest.raises(DynamicsError):
        IntegratorOptions(t_end=-1.0)


def test_open_network_dissipation_from_off_environment_temperature(rng):
    n = net("open_io_he")
    for T0 in (0.5, 3.0):
        s = random_state(n.spec, rng, T=T0)
        traj = integrate(n.spec, n.M, s, IntegratorOptions(t_end=300.0), ref=n.ref)
        rep = lyapunov_trace(n.ref, n.spec, n.M, traj)
        assert np.all(rep.dS_A <= 1e-12 * rep.scale)
        assert rep.monotone
        assert traj.T[-1] == pytest.approx(n.spec.T_env, rel=1e-6)


@pytest.mark.parametrize("name", REVERSIBLE_NETWORKS)
def test_bundled_networks_drift_and_lyapunov(name, rng):
    n = net(name)
    for _ in range(5):
        s = random_state(n.spec, rng)
        traj = integrate(n.spec, n.M, s, IntegratorOptions(t_end=100.0), ref=n.ref)
        assert traj.status in ("converged", "t_end")
        assert class_drift(n.M, traj) < 1e-8
        rep = lyapunov_trace(n.ref, n.spec, n.M, traj)
        assert rep.monotone and rep.dissipative, (rep.max_increase, rep.max_rate)


def test_analytic_dissipation_matches_series_slope(rng):
    n = net("open_io_he")
    s = random_state(n.spec, rng, T=2.5)
    traj = integrate(n.spec, n.M, s, IntegratorOptions(t_end=5.0, dense=True, stop_on_convergence=False), ref=n.ref)
    h = 1e-4
    for t in np.linspace(0.5, 4.5, 9):
        Sp = availability(n.ref, State.from_vector(traj.solution.sol(t + h)))
        Sm = availability(n.ref, State.from_vector(traj.solution.sol(t - h)))
        dS, scale = dissipation_rate(n.spec, n.M, n.ref, State.from_vector(traj.solution.sol(t)))
        assert (Sp - Sm) / (2 * h) == pytest.approx(dS, rel=1e-5, abs=1e-9)


def test_converged_state_reports():
    n = net("example_isolated")
    traj = integrate(n.spec, n.M, n.ref.state, IntegratorOptions(t_end=10.0))
    rep = converged_state(traj, n.ref.state, 1e-6)
    assert rep.converged and rep.first_time == 0.0
    rep = converged_state(traj, n.ref.state, 0.0)
    assert not rep.converged and rep.first_time is None


def test_convergence_event_stops_early():
    n = net("example_isolated")
    traj = integrate(n.spec, n.M, State(6.0, [2.0, 2.0, 1.0]), IntegratorOptions(t_end=1e4))
    assert traj.status == "converged" and traj.times[-1] < 1e4


# --- integrator --------------------------------------------------------------


def _frozen_linear():
    # A <-> B at frozen T: N' = A N with rates a, b.
    a, b = 2.0, 0.7
    A = np.array([[-a, b], [a, -b]])
    y0 = np.array([1.0, 0.2])
    w, V = np.linalg.eig(A)

    def exact(t):
        return (V @ (np.exp(w * t) * np.linalg.solve(V, y0))).real

    return (lambda t, y: A @ y), y0, exact


def test_fixed_step_order():
    f, y0, exact = _frozen_linear()
    steps = [8, 16, 32, 64]
    errs = [np.max(np.abs(dopri5_fixed(f, 0.0, y0, 2.0, k) - exact(2.0))) for k in steps]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.min(orders) >= 4.5, orders


def test_adaptive_error_tracks_tolerance():
    f, y0, exact = _frozen_linear()
    errs = []
    for tol in (1e-6, 1e-8, 1e-10):
        sol = dopri5(f, 0.0, y0, 2.0, rtol=tol, atol=tol * 1e-2)
        assert sol.status == "t_end"
        errs.append(np.max(np.abs(sol.y[-1] - exact(2.0))))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-9


def test_dense_output_interpolates_steps():
    f, y0, exact = _frozen_linear()
    sol = dopri5(f, 0.0, y0, 2.0, rtol=1e-10, atol=1e-12, dense=True)
    for t, y in zip(sol.t, sol.y):
        np.testing.assert_allclose(sol.sol(t), y, rtol=1e-13, atol=1e-15)
    for t in np.linspace(0.0, 2.0, 37):
        np.testing.assert_allclose(sol.sol(t), exact(t), rtol=1e-7, atol=1e-9)


def test_positivity_guard_rejects_steps():
    # y' = -1 from y = 1 leaves the domain at t = 1.
    sol = dopri5(lambda t, y: -np.ones_like(y), 0.0, np.array([1.0]), 5.0, valid=lambda y: bool(y[0] > 0))
    assert sol.status == "step_underflow"
    assert np.all(sol.y[:, 0] > 0)
    assert sol.t[-1] == pytest.approx(1.0, abs=1e-6)
    assert sol.n_rejected > 0


def test_invalid_stage_is_rejected():
    def f(t, y):
        if y[0] <= 0:
            raise InvalidState("negative")
        return -np.sqrt(y)

    sol = dopri5(f, 0.0, np.array([1.0]), 5.0)
    assert sol.status == "step_underflow"
    assert np.all(sol.y[:, 0] > 0)


def test_trajectory_near_boundary_stays_positive():
    text = "[species]\nA { p = 1.5 }\nB { p = 1.5 }\n[reactions]\nA <-> B { kf = 50, kb = 1e-3 }\n"
    spec = parse_network(text)
    M = build_matrices(spec)
    ref = reference_equilibrium(spec, M)
    traj = integrate(spec, M, State(3.0, [1.0, 1e-3]), IntegratorOptions(t_end=20.0), ref=ref)
    assert np.all(traj.y[:, 1:] > 0)
    assert lyapunov_trace(ref, spec, M, traj).monotone
