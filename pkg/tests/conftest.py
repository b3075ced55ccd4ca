import numpy as np
import pytest

from nicrn import State, build_matrices, load_bundled, reference_equilibrium

REVERSIBLE_NETWORKS = ["example_isolated", "example_isothermal", "open_io_he", "triangle_symmetric", "he_only", "luxr"]


def random_state(spec, rng, T=None):
    """Positive state with log-uniform amounts; isothermal networks land on U = N.u(T_env)."""
    N = np.exp(rng.uniform(np.log(0.2), np.log(5.0), spec.n))
    if T is None:
        T = spec.T_env if spec.energy_mode.value == "isothermal" else float(np.exp(rng.uniform(np.log(0.3), np.log(3.0))))
    return State(spec.thermo.energy(T, N), N)


class Net:
    def __init__(self, name):
        self.name = name
        self.spec = load_bundled(name)
        self.M = build_matrices(self.spec)
        self._ref = None

    @property
    def ref(self):
        if self._ref is None:
            self._ref = reference_equilibrium(self.spec, self.M)
        return self._ref


_cache = {}


def net(name):
    if name not in _cache:
        _cache[name] = Net(name)
    return _cache[name]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
