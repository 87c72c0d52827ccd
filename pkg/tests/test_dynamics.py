import numpy as np
import pytest

from subchain import dynamics, states
from subchain.dickespace import DipoleState, density
from subchain.dynamics import (DriveConfig, IntegrationConfig, IntegrationError, integrate,
                               mean_excitation, rhs)
from subchain.greenkernel import ChainConfig, coupling_matrix
from subchain.spectrum import SpectralGrid


def test_rhs_single_atom():
    out = rhs(DipoleState([1.0]), ChainConfig(1, 1.0), DriveConfig(detuning=0.7))
    assert out[0] == pytest.approx(0.7j - 0.5)


def test_rhs_two_atom_symmetric():
    a = 1.2
    cfg = ChainConfig(2, a)
    beta = np.array([1, 1]) / np.sqrt(2)
    g = np.sin(a) / a - 1j * np.cos(a) / a
    assert np.allclose(rhs(DipoleState(beta), cfg, DriveConfig()), -0.5 * (1 + g) * beta)


def test_rhs_matches_dense_oracle():
    rng = np.random.default_rng(5)
    cfg = ChainConfig(3, 0.8, 0.4)
    beta = rng.normal(size=3) + 1j * rng.normal(size=3)
    drive = DriveConfig(rabi=0.3, detuning=1.1)
    m = coupling_matrix(cfg)
    src = 0.5j * 0.3 * np.exp(1j * 0.8 * np.arange(3))
    expected = (1.1j * np.eye(3) - 0.5 * m) @ beta - src
    assert np.allclose(rhs(DipoleState(beta), cfg, drive), expected, atol=1e-15)
    # switched off
    off = DriveConfig(rabi=0.3, detuning=1.1, t_off=1.0)
    assert np.allclose(rhs(DipoleState(beta), cfg, off, t=2.0), (1.1j * np.eye(3) - 0.5 * m) @ beta)


def test_single_atom_exponential_decay():
    traj = integrate(DipoleState([1.0]), ChainConfig(1, 1.0), DriveConfig(), IntegrationConfig(5.0))
    assert abs(traj.mean_excitation[-1] - np.exp(-5.0)) < 1e-10


def test_two_atom_antisymmetric_rate():
    a = np.pi / 2
    traj = integrate(DipoleState(np.array([1, -1]) / np.sqrt(2)), ChainConfig(2, a),
                     DriveConfig(), IntegrationConfig(4.0))
    rate = -np.log(traj.mean_excitation[-1] / traj.mean_excitation[0]) / 4.0
    assert rate == pytest.approx(1 - 2 / np.pi, rel=1e-9)


def test_mean_excitation_examples():
    cfg = ChainConfig(100, 1.0)
    assert mean_excitation(states.single_excited(cfg, 50)) == pytest.approx(0.01)
    assert mean_excitation(states.uniform(ChainConfig(7, 1.0))) == pytest.approx(1 / 7)
    assert mean_excitation(states.zero(cfg)) == 0


def test_config_validation():
    with pytest.raises(ValueError):
        IntegrationConfig(1.0, dt=0.1)
    with pytest.raises(ValueError):
        IntegrationConfig(1.0, dt=0.0)
    with pytest.raises(ValueError):
        DriveConfig(t_off=-1)


def test_t_off_is_a_node_and_snapshots():
    traj = integrate(states.zero(ChainConfig(4, 1.0)), ChainConfig(4, 1.0),
                     DriveConfig(0.1, 0.0, t_off=0.0105), IntegrationConfig(0.03, 0.01, (0.0, 0.02)))
    assert np.any(np.isclose(traj.times, 0.0105))
    assert [s.time for s in traj.snapshots] == [0.0, pytest.approx(0.02)]


def test_divergence_is_reported(monkeypatch):
    cfg = ChainConfig(3, 1.0)
    monkeypatch.setattr(dynamics, "coupling_matrix", lambda c: -1e6 * np.eye(c.n_atoms))
    with pytest.raises(IntegrationError, match="non-finite"):
        integrate(states.uniform(cfg), cfg, DriveConfig(), IntegrationConfig(1.0, 0.01))


def test_energy_balance_small_and_fourth_power():
    cfg = ChainConfig(1, 1.0)
    res = []
    for dt in (1e-3, 5e-4):
        traj = integrate(DipoleState([1.0]), cfg, DriveConfig(), IntegrationConfig(1.0, dt),
                         record_dissipation=True)
        res.append(dynamics.energy_balance_residual(traj))
    assert res[0] < 1e-6
    assert res[0] / res[1] > 3.5


def test_energy_balance_needs_dissipation():
    traj = integrate(DipoleState([1.0]), ChainConfig(1, 1.0), DriveConfig(), IntegrationConfig(0.1))
    with pytest.raises(ValueError):
        dynamics.energy_balance_residual(traj)


def test_spectral_rhs_examples():
    assert dynamics.spectral_rhs_check(DipoleState([0.3 + 0.2j]), ChainConfig(1, 1.0),
                                       DriveConfig(0.2, 0.5), 0.4) < 1e-15
    rng = np.random.default_rng(8)
    st = DipoleState(rng.normal(size=20) + 1j * rng.normal(size=20))
    cfg = ChainConfig(20, 1.1)
    assert dynamics.spectral_rhs_check(st, cfg, DriveConfig(), 1.3) < 1e-10
    assert dynamics.spectral_rhs_check(st, cfg, DriveConfig(0.1, 2.0), cfg.a) < 1e-10


def test_infinite_chain_examples():
    a = np.pi / 2
    sol = dynamics.infinite_chain_solution(a, 2.5, DriveConfig(), t=7.0)
    assert abs(sol.regular) == pytest.approx(1.0)
    sol = dynamics.infinite_chain_solution(a, 0.5, DriveConfig(), t=np.log(2) / 2)
    assert abs(sol.regular) ** 2 == pytest.approx(0.5)
    with pytest.raises(ValueError):
        dynamics.infinite_chain_solution(a, a, DriveConfig(), t=1.0)


def test_infinite_chain_driven_transient_dies():
    drive = DriveConfig(0.1, 0.0)
    early = dynamics.infinite_chain_solution(np.pi / 2, 0.5, drive, t=1.0)
    late = dynamics.infinite_chain_solution(np.pi / 2, 0.5, drive, t=40.0)
    assert abs(late.regular) < 1e-8 < abs(early.regular)
    assert late.steady_weight(100, drive) > 0


def test_single_atom_generates_subradiance():
    """Mass inside the light line drops below 0.05 after t = 10."""
    cfg = ChainConfig(100, np.pi / 2, np.pi / 2)
    traj = integrate(states.single_excited(cfg, 50), cfg, DriveConfig(),
                     IntegrationConfig(10.0, 1e-3, (10.0,)))
    grid = SpectralGrid.uniform(1024)
    dens = density(traj.snapshots[0], grid)
    assert dens.mass(np.abs(grid.points) < cfg.a) < 0.05
