import numpy as np
import pytest

from nicrn import KineticsError, State, build_matrices, parse_network, reference_equilibrium, temperature_of
from nicrn.kinetics import (
    compact_vector_field,
    conductance_matrices,
    energy_changes,
    general_rates_at,
    io_dissipation_terms,
    isothermal_compact_field,
    laplacian,
    rates_at,
    reaction_rates,
    vector_field,
)

from conftest import REVERSIBLE_NETWORKS, net, random_state

BOUNDARY = """[constants]
kappa = 1.0
T_env = 2.0
[species]
X1 { p = 1.5 }
X2 { z = 3, p = 2.5, e = 0.4 }
[reactions]
X1 <-> X2 { kf = 1, kb = 1 }
@in X1 { k = 0.5 }
@out X1 { k = 0.3 }
@heat { k = 0.5 }
"""


def _boundary():
    spec = parse_network(BOUNDARY)
    return spec, build_matrices(spec)


def test_example_rates_at_reference():
    n = net("example_isolated")
    r = reaction_rates(n.spec, n.M, State(6.0, [1.0, 1.0, 2.0]))
    assert r.T == 1.0
    np.testing.assert_allclose(r.v, [2.0, 2.0], rtol=1e-15)
    dU, dN = vector_field(n.spec, n.M, State(6.0, [1.0, 1.0, 2.0]))
    assert dU == 0.0 and np.all(dN == 0.0)


def test_example_vector_field_off_equilibrium():
    n = net("example_isolated")
    # T = 6 / (1.5 * 5) = 0.8: forward 2 T N1 N2 exp(0), backward T N3.
    dU, dN = vector_field(n.spec, n.M, State(6.0, [2.0, 2.0, 1.0]))
    T = 0.8
    vf = 2 * T * np.exp(-2 * 1.5 * np.log(T)) * 4
    vb = 1 * T * np.exp(-1.5 * np.log(T)) * 1
    assert dU == 0.0
    np.testing.assert_allclose(dN, [vb - vf, vb - vf, vf - vb], rtol=1e-13)


def test_boundary_rates_closed_forms():
    spec, M = _boundary()
    v = rates_at(spec, M, 1.7, np.array([4.0, 1.0]))
    assert v[2] == 0.5
    assert v[3] == pytest.approx(1.2, rel=1e-15)
    assert v[4] == 0.5


@pytest.mark.parametrize("name", REVERSIBLE_NETWORKS + ["triangle_wegscheider_fail"])
def test_closed_forms_match_general_expression(name, rng):
    n = net(name)
    for _ in range(50):
        s = random_state(n.spec, rng)
        T = temperature_of(s, n.spec.thermo)
        np.testing.assert_allclose(rates_at(n.spec, n.M, T, s.N), general_rates_at(n.spec, n.M, T, s.N), rtol=1e-12)


def test_energy_changes_of_boundary_reactions():
    spec, M = _boundary()
    dU = energy_changes(spec, 1.0)
    u_env = spec.thermo.u(2.0)
    assert dU[2] == pytest.approx(u_env[0])
    assert dU[3] == pytest.approx(-spec.thermo.u(1.0)[0])
    assert dU[4] == 1.0
    assert energy_changes(spec, 2.0)[4] == 0.0


def test_heat_exchange_alone():
    n = net("he_only")
    # X alone, T_env = 2, k = 0.5: dU = k (T_env - T).
    for T in (0.5, 2.0, 3.0):
        s = State(n.spec.thermo.energy(T, [1.0]), [1.0])
        dU, dN = vector_field(n.spec, n.M, s)
        assert dU == pytest.approx(0.5 * (2.0 - T), abs=1e-15)
        assert np.all(dN == 0.0)


def test_open_reactor_at_T_env_feed_balance():
    spec, M = _boundary()
    # At T = T_env with X1 = k_in/k_out the feed balances and heat exchange is idle.
    N = np.array([0.5 / 0.3, 1.0])
    s = State(spec.thermo.energy(2.0, N), N)
    v = reaction_rates(spec, M, s).v
    assert v[2] == pytest.approx(v[3])
    # With X1 = 1 the net feed is 0.5 - 0.3 and the chemical flux is added on top.
    N = np.array([1.0, 1.0])
    dU, dN = vector_field(spec, M, State(spec.thermo.energy(2.0, N), N))
    v = rates_at(spec, M, 2.0, N)
    assert dN[0] == pytest.approx(v[1] - v[0] + 0.5 - 0.3)


def test_isothermal_energy_rate_is_u_dot_N():
    n = net("example_isothermal")
    rng = np.random.default_rng(1)
    u = n.spec.thermo.u(n.spec.T_env)
    for _ in range(100):
        s = random_state(n.spec, rng)
        dU, dN = vector_field(n.spec, n.M, s)
        assert dU == pytest.approx(u @ dN, abs=1e-12 * (1 + np.abs(dN).sum()))


def test_example_conductances():
    n = net("example_isolated")
    cond = conductance_matrices(n.spec, n.M, n.ref)
    np.testing.assert_allclose(cond.K_CR_diag(1.0), [2.0], rtol=1e-15)
    for T in (0.5, 2.0, 3.0):
        np.testing.assert_allclose(cond.K_CR_diag(T), [2.0 * T], rtol=1e-14)
    spec, M = _boundary()
    cond = conductance_matrices(spec, M, reference_equilibrium(spec, M))
    np.testing.assert_allclose(cond.K_IO_diag, [0.5])


def test_conductances_refuse_non_balanced_reference():
    n = net("example_isolated")
    with pytest.raises(KineticsError, match="not detailed balanced"):
        conductance_matrices(n.spec, n.M, State(6.0, [2.0, 2.0, 1.0]))
    n = net("open_io_he")
    off = n.ref.N_star
    with pytest.raises(KineticsError):
        conductance_matrices(n.spec, n.M, State(n.spec.thermo.energy(1.0, off), off))


def test_mismatched_activation_is_refused():
    text = "[species]\nA { p = 1.5 }\nB { p = 1.5 }\n[reactions]\nA -> B { k = 1, gas = (0, 0, 0) }\nB -> A { k = 1, gas = (1, 0, 0) }\n"
    spec = parse_network(text, strict=False)
    M = build_matrices(spec)
    with pytest.raises(KineticsError, match="activation"):
        conductance_matrices(spec, M, State(3.0, [1.0, 1.0]))


@pytest.mark.parametrize("name", REVERSIBLE_NETWORKS)
def test_compact_form_matches_direct_form(name, rng):
    n = net(name)
    cond = conductance_matrices(n.spec, n.M, n.ref)
    for _ in range(1000):
        s = random_state(n.spec, rng)
        dU, dN = vector_field(n.spec, n.M, s)
        cU, cN = compact_vector_field(n.spec, n.M, cond, s)
        v = reaction_rates(n.spec, n.M, s)
        # Errors are measured against the gross flux through each coordinate.
        scale_N = np.abs(n.M.Gamma) @ v.v
        scale_U = np.abs(energy_changes(n.spec, v.T)) @ v.v
        assert abs(cU - dU) <= 1e-12 * scale_U
        assert np.all(np.abs(cN - dN) <= 1e-12 * scale_N)


def test_isothermal_single_conductance_form(rng):
    n = net("example_isothermal")
    cond = conductance_matrices(n.spec, n.M, n.ref)
    for _ in range(500):
        s = random_state(n.spec, rng)
        dU, dN = vector_field(n.spec, n.M, s)
        iU, iN = isothermal_compact_field(n.spec, n.M, cond, s.N)
        scale = np.abs(n.M.Gamma) @ reaction_rates(n.spec, n.M, s).v
        np.testing.assert_array_less(np.abs(iN - dN), 1e-12 * scale + 1e-300)
        assert abs(iU - dU) <= 1e-12 * (1 + np.abs(dN).sum() * 10)
    with pytest.raises(KineticsError):
        isothermal_compact_field(net("example_isolated").spec, net("example_isolated").M, cond, [1.0, 1.0, 1.0])


def test_laplacian_examples():
    B = np.array([[-1], [1]])
    np.testing.assert_array_equal(laplacian(B, [2.0]), [[2, -2], [-2, 2]])
    with pytest.raises(KineticsError):
        laplacian(B, [0.0])


@pytest.mark.parametrize("name", ["example_isolated", "triangle_symmetric", "luxr", "open_io_he"])
def test_laplacian_properties(name, rng):
    M = net(name).M
    B = M.B.astype(float)
    for _ in range(1000):
        K = np.exp(rng.normal(size=B.shape[1]))
        L = laplacian(B, K)
        np.testing.assert_allclose(L, L.T)
        np.testing.assert_allclose(L.sum(axis=0), 0.0, atol=1e-12)
        a = rng.normal(size=B.shape[0])
        # The balanced Laplacian is monotone on exponentials: a.L.exp(a) >= 0.
        q = a @ L @ np.exp(a)
        assert q >= -1e-12
        if np.allclose(B.T @ a, 0.0):
            assert abs(q) < 1e-10


def test_boundary_dissipation_sign(rng):
    for spec, M in [_boundary(), (net("open_io_he").spec, net("open_io_he").M), (net("luxr").spec, net("luxr").M)]:
        np.testing.assert_allclose(io_dissipation_terms(spec, M, spec.T_env), 0.0, atol=1e-14)
        for T in spec.T_env * np.exp(rng.uniform(np.log(0.1), np.log(10.0), 200)):
            xi = io_dissipation_terms(spec, M, T)
            assert np.all(xi <= 1e-14 * (1 + np.abs(xi)))
            if abs(T - spec.T_env) > 1e-3:
                assert np.all(xi < 0)


@pytest.mark.parametrize("name", REVERSIBLE_NETWORKS)
def test_rates_finite_over_wide_temperature_range(name):
    n = net(name)
    N = np.ones(n.spec.n)
    for T in np.logspace(-6, 6, 61):
        with np.errstate(under="ignore"):
            v = rates_at(n.spec, n.M, T, N)
        # Positive barriers underflow to zero at the cold end; nothing may overflow.
        assert np.all(np.isfinite(v)) and np.all(v >= 0), T
        if 1e-2 <= T <= 1e2:
            assert np.all(v > 0), T
