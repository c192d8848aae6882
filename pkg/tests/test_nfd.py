import numpy as np
import pytest

from evacgate.nfd import SpeedDensityModel


@pytest.fixture(scope="module")
def triangular():
    return SpeedDensityModel.triangular(v_f=65.0, q_max=1600.0, rho_j=120.0)


def test_triangular_free_flow_and_jam(triangular):
    assert triangular.speed(0.0) == 65.0
    assert triangular.speed(120.0) == 0.0
    assert triangular.speed(150.0) == 0.0


def test_linear_counterexample_speed():
    lin = SpeedDensityModel.linear(1.0, 1.0)
    assert lin.speed(1.0 / 3.0) == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_flow_at_critical_density(triangular):
    rho_c = triangular.critical_density()
    assert rho_c == pytest.approx(24.6, abs=0.1)
    assert triangular.flow(rho_c) == pytest.approx(1600.0, abs=1.0)


def test_flow_zero_density_and_linear_max():
    lin = SpeedDensityModel.linear(1.0, 1.0)
    assert lin.flow(0.0) == 0.0
    # parabola rho*(1-rho) peaks at 1/2 with value 1/4
    assert lin.critical_density() == pytest.approx(0.5)
    assert lin.flow(0.5) == pytest.approx(0.25)


def test_trapezoidal_midpoint_and_grid_argmax():
    trap = SpeedDensityModel.trapezoidal(v_f=50.0, rho_1=20.0, rho_2=40.0, rho_j=120.0)
    assert trap.critical_density() == pytest.approx(30.0)
    assert trap.critical_interval() == (20.0, 40.0)
    rho = np.linspace(0.0, 120.0, 2401)
    q = trap.flow(rho)
    assert q.max() == pytest.approx(trap.q_max, rel=1e-9)
    # the grid argmax lies inside the plateau that the midpoint represents
    assert 20.0 <= rho[np.argmax(q)] <= 40.0


@pytest.mark.parametrize("model", [
    SpeedDensityModel.triangular(65.0, 1600.0, 120.0),
    SpeedDensityModel.trapezoidal(50.0, 20.0, 40.0, 120.0),
    SpeedDensityModel.linear(65.0, 120.0),
])
def test_speed_monotone_and_flow_concave(model):
    rho = np.linspace(0.0, model.rho_j, 1201)
    v = model.speed(rho)
    assert np.all(np.diff(v) <= 1e-12)
    q = model.flow(rho)
    assert np.all(np.diff(q, 2) <= 1e-9)
    assert model.flow(model.critical_density()) >= q.max() - 1e-9


def test_negative_density_rejected(triangular):
    with pytest.raises(ValueError):
        triangular.speed(-1.0)
    with pytest.raises(ValueError):
        triangular.flow(np.array([1.0, -0.5]))


def test_triangular_consistency_check():
    # v_f * rho_c = w * (rho_j - rho_c) must hold for an explicit w
    SpeedDensityModel.triangular(65.0, 1600.0, 120.0, w=1600.0 / (120.0 - 1600.0 / 65.0))
    with pytest.raises(ValueError, match="inconsistent"):
        SpeedDensityModel.triangular(65.0, 1600.0, 120.0, w=20.0)
    with pytest.raises(ValueError):
        SpeedDensityModel.triangular(65.0, 1600.0, rho_j=20.0)  # rho_c >= rho_j


def test_vector_and_scalar_forms(triangular):
    assert isinstance(triangular.speed(10.0), float)
    out = triangular.speed(np.array([0.0, 30.0, 120.0]))
    assert out.shape == (3,)
