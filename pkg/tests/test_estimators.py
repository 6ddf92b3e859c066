import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from emdensys.estimators import DecayRegressor, GroundStateSolver


def test_solver_get_params_and_clone():
    est = GroundStateSolver(n=3, p=5, q=5)
    params = est.get_params()
    assert params["p"] == 5 and params["method"] == "shooting"
    assert clone(est).get_params() == params


def test_solver_predicts_bubble():
    est = GroundStateSolver(n=3, p=5, q=5).fit()
    rho = np.array([0.0, 1.0, 10.0])
    out = est.predict(rho)
    assert out.shape == (3, 2)
    assert np.allclose(out[:, 0], (1 + rho**2 / 3) ** -0.5, rtol=1e-6)
    assert est.beta_star_ == pytest.approx(1.0, abs=1e-8)


def test_solver_rejects_unknown_method():
    with pytest.raises(ValueError):
        GroundStateSolver(method="newton").fit()


def test_solver_requires_fit():
    with pytest.raises(NotFittedError):
        GroundStateSolver().predict([1.0])


def test_solver_rejects_negative_radii():
    est = GroundStateSolver(n=3, p=5, q=5).fit()
    with pytest.raises(ValueError):
        est.predict([-1.0])


def test_decay_regressor_recovers_model():
    rho = np.geomspace(10, 1e6, 200)
    y = 3.0 * rho**-1.5 * np.log(rho) ** 0.5
    reg = DecayRegressor(expected_log=True).fit(rho, y)
    assert reg.exponent_ == pytest.approx(1.5, abs=1e-9)
    assert reg.log_power_ == pytest.approx(0.5, abs=1e-8)
    assert reg.amplitude_ == pytest.approx(3.0, rel=1e-8)
    assert reg.score(rho, y) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(reg.predict(rho), y, rtol=1e-8)


def test_decay_regressor_pinned_exponent():
    rho = np.geomspace(10, 1e4, 50)
    reg = DecayRegressor(exponent=2.0).fit(rho.reshape(-1, 1), 5.0 / rho**2)
    assert reg.exponent_ == 2.0 and reg.amplitude_ == pytest.approx(5.0, rel=1e-12)


def test_decay_regressor_validation():
    with pytest.raises(ValueError):
        DecayRegressor().fit([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        DecayRegressor().fit([1.0, 2.0], [1.0, -1.0])
