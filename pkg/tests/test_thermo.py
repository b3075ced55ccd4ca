import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from nicrn import (
    SpeciesThermo,
    State,
    ThermoConstants,
    ThermoDomainError,
    ThermoModel,
    entropy_gradient,
    entropy_of_state,
    molar_quantities,
    system_potentials,
    temperature_of,
)

UNIT = SpeciesThermo("X", 1.0, 1.5, 0.0)
THREE = ThermoModel((SpeciesThermo("X1"), SpeciesThermo("X2"), SpeciesThermo("X3")))

species_st = st.builds(
    SpeciesThermo,
    st.just("S"),
    st.floats(0.05, 20.0),
    st.floats(0.1, 6.0),
    st.floats(0.0, 5.0),
)


def test_unit_species_at_unit_temperature():
    q = molar_quantities(UNIT, 1.0)
    assert q == pytest.approx((1.0, 1.5, 0.0, 1.5, 1.5), abs=1e-15)


def test_free_energy_tends_to_ground_energy():
    sp = SpeciesThermo("Y", 3.0, 2.0, 0.7)
    assert abs(molar_quantities(sp, 1e-6).g - sp.e) < 1e-4


def _quadrature_oracle(z, e, T, kappa=1.0):
    """Three quadratic modes with energy offset e; prefactor chosen so Z -> z*T^1.5*exp(-e/kT)."""
    pref = z / (np.pi * kappa) ** 1.5
    kT = kappa * T
    w = lambda r: 4 * np.pi * r * r * np.exp(-(e + r * r) / kT)  # noqa: E731
    Z = pref * quad(w, 0, np.inf, epsabs=0, epsrel=1e-13)[0]
    m1 = pref * quad(lambda r: (e + r * r) * w(r), 0, np.inf, epsabs=0, epsrel=1e-13)[0] / Z
    m2 = pref * quad(lambda r: (e + r * r) ** 2 * w(r), 0, np.inf, epsabs=0, epsrel=1e-13)[0] / Z
    g = -kT * np.log(Z)
    return Z, m1, g, (m1 - g) / T, (m2 - m1 * m1) / (kappa * T * T)


def test_closed_forms_match_quadrature_oracle():
    oracle = _quadrature_oracle(z=2.0, e=1.0, T=2.0)
    got = molar_quantities(SpeciesThermo("Q", 2.0, 1.5, 1.0), 2.0)
    for a, b in zip(got, oracle):
        assert a == pytest.approx(b, rel=1e-6)


def test_nonpositive_temperature_rejected():
    with pytest.raises(ThermoDomainError):
        molar_quantities(UNIT, 0.0)
    with pytest.raises(ThermoDomainError):
        molar_quantities(UNIT, -1.0)


@given(species_st, st.floats(-3, 3))
@settings(max_examples=200, deadline=None)
def test_molar_identities(sp, logT):
    T = 10.0**logT
    q = molar_quantities(sp, T)
    assert q.s * T == pytest.approx(q.u - q.g, rel=1e-12, abs=1e-12 * (abs(q.u) + abs(q.g)))
    assert q.c > 0
    # dZ/dT = Z * u / (kappa T^2) >= 0
    h = 1e-6 * T
    assert molar_quantities(sp, T + h).Z >= molar_quantities(sp, T - h).Z * (1 - 1e-12)


def test_temperature_inversion_examples():
    assert temperature_of(State(6.0, (1, 1, 2)), THREE) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ThermoDomainError, match="nonpositive temperature"):
        temperature_of(State(0.0, (1, 1, 2)), THREE)
    model = ThermoModel((SpeciesThermo("A", 1, 1, 1), SpeciesThermo("B", 1, 2, 3)))
    T = temperature_of(State(10.0, (2, 1)), model)
    assert T == pytest.approx(1.25, rel=1e-15)
    assert model.energy(T, (2, 1)) == pytest.approx(10.0, rel=1e-15)
    with pytest.raises(ThermoDomainError, match="nonpositive amount"):
        temperature_of(State(10.0, (2, 0)), model)


@given(st.lists(species_st, min_size=1, max_size=4), st.floats(-2, 2), st.data())
@settings(max_examples=150, deadline=None)
def test_temperature_round_trip(species, logT, data):
    model = ThermoModel(tuple(species))
    N = data.draw(st.lists(st.floats(0.01, 100), min_size=len(species), max_size=len(species)))
    T = 10.0**logT
    assert temperature_of(State(model.energy(T, N), N), model) == pytest.approx(T, rel=1e-12)


def test_system_potentials_hand_evaluation():
    res = system_potentials(State(6.0, (1, 1, 2)), THREE)
    assert res.T == pytest.approx(1.0)
    np.testing.assert_allclose(res.mu, [0, 0, np.log(2)], atol=1e-15)
    assert res.G == pytest.approx(2 * np.log(2) - 4, rel=1e-14)
    assert res.S == pytest.approx(6 - (2 * np.log(2) - 4), rel=1e-14)
    assert res.C == pytest.approx(6.0)


def test_single_species_entropy_is_molar_entropy_plus_kappa():
    for kappa in (1.0, 2.5):
        model = ThermoModel((SpeciesThermo("A", 1.7, 2.2, 0.4),), ThermoConstants(kappa))
        T = 1.3
        S = entropy_of_state(model.energy(T, [1.0]), [1.0], model)
        assert S == pytest.approx(molar_quantities(model.species[0], T, model.constants).s + kappa, rel=1e-13)


def _random_model_state(rng, n=3):
    species = tuple(
        SpeciesThermo(f"S{i}", rng.uniform(0.2, 5), rng.uniform(0.5, 4), rng.uniform(0, 2)) for i in range(n)
    )
    model = ThermoModel(species, ThermoConstants(rng.uniform(0.5, 2)))
    N = rng.uniform(0.2, 5, n)
    T = rng.uniform(0.3, 3)
    return model, State(model.energy(T, N), N)


def test_entropy_relation_and_gradient_examples(rng):
    dU, dN = entropy_gradient(State(6.0, (1, 1, 2)), THREE)
    np.testing.assert_allclose(np.concatenate(([dU], dN)), [1, 0, 0, -np.log(2)], atol=1e-15)
    for _ in range(20):
        model, state = _random_model_state(rng)
        res = system_potentials(state, model)
        assert res.S == pytest.approx((state.U - res.G) / res.T, rel=1e-12)
    # At N = 1 the amount gradient is kappa ln Z(T).
    model, _ = _random_model_state(rng)
    T = 1.7
    dU, dN = entropy_gradient(State(model.energy(T, np.ones(3)), np.ones(3)), model)
    np.testing.assert_allclose(dN, model.kappa * model.ln_Z(T), rtol=1e-12)


def _fd_gradient(model, x, h=1e-6):
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h * max(1.0, abs(x[k]))
        g[k] = (entropy_of_state(x[0] + e[0], x[1:] + e[1:], model) - entropy_of_state(x[0] - e[0], x[1:] - e[1:], model)) / (2 * e[k])
    return g


def test_entropy_gradient_matches_finite_differences(rng):
    for _ in range(100):
        model, state = _random_model_state(rng)
        dU, dN = entropy_gradient(state, model)
        an = np.concatenate(([dU], dN))
        fd = _fd_gradient(model, state.vector())
        assert np.max(np.abs(an - fd)) <= 1e-5 * np.max(np.abs(an)) + 1e-9


def fd_hessian(model, x, h=1e-4):
    n = x.size
    H = np.empty((n, n))
    S = lambda y: entropy_of_state(y[0], y[1:], model)  # noqa: E731
    steps = h * np.maximum(1.0, np.abs(x))
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = steps[i]
            ej[j] = steps[j]
            H[i, j] = (S(x + ei + ej) - S(x + ei - ej) - S(x - ei + ej) + S(x - ei - ej)) / (4 * steps[i] * steps[j])
    return 0.5 * (H + H.T)


def scaled_max_eigenvalue(model, state):
    """Largest eigenvalue of D H D with D = diag(|x|): the Hessian in relative coordinates."""
    x = state.vector()
    D = np.diag(np.abs(x))
    return np.max(np.linalg.eigvalsh(D @ fd_hessian(model, x) @ D))


def test_entropy_is_strictly_concave(rng):
    for _ in range(100):
        model, state = _random_model_state(rng)
        assert scaled_max_eigenvalue(model, state) < -1e-9


def test_amount_block_of_hessian_uses_true_derivative(rng):
    # d2S/dN_i^2 at fixed T contribution: the amount block carries -kappa/N_i, never ln N_i.
    model, state = _random_model_state(rng, n=1)
    H = fd_hessian(model, state.vector(), h=1e-4)
    res = system_potentials(state, model)
    N = state.N[0]
    c = model.kappa * model.p[0]
    u = model.u(res.T)[0]
    # Exact Hessian of S(U, N) for one species.
    expected_NN = -model.kappa / N - u * u / (c * N * res.T**2)
    assert H[1, 1] == pytest.approx(expected_NN, rel=1e-4)


def test_invalid_species_parameters():
    with pytest.raises(ThermoDomainError):
        SpeciesThermo("bad", z=0.0)
    with pytest.raises(ThermoDomainError):
        SpeciesThermo("bad", p=0.0)
    with pytest.raises(ThermoDomainError):
        SpeciesThermo("bad", e=-1.0)
    with pytest.raises(ThermoDomainError):
        ThermoConstants(0.0)
