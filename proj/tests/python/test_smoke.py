import math

import pytest

import _swingid as sw


def test_scenario_names():
    names = sw.scenario_names()
    assert set(names) == {"fd1", "fd2", "sd1", "sd2"}


def test_equilibrium():
    delta, omega = sw.equilibrium("fd1")
    assert delta == pytest.approx(math.asin(0.5), abs=1e-12)
    assert omega == 0.0


def test_simulate_shape_and_determinism():
    traj = sw.simulate("fd1", duration=27.0, rate=10.0)
    assert len(traj["t"]) == 271
    assert traj["t"][0] == 0.0
    assert traj["t"][-1] == pytest.approx(27.0)
    noisy_a = sw.simulate("fd1", noise=0.05, seed=3)
    noisy_b = sw.simulate("fd1", noise=0.05, seed=3)
    assert noisy_a["delta"] == noisy_b["delta"]
    assert noisy_a["omega"] != traj["omega"]


def test_simulate_rejects_bad_input():
    with pytest.raises(ValueError):
        sw.simulate("nope")
    with pytest.raises(ValueError):
        sw.simulate("fd1", rate=-1.0)


def test_sindy_recovers_noiseless_fd1():
    traj = sw.simulate("fd1")
    est = sw.estimate_sindy(traj)
    assert est["m_hat"] == pytest.approx(0.3, rel=0.01)
    assert est["d_hat"] == pytest.approx(0.15, rel=0.01)


def test_pinn_short_run_returns_finite_estimates():
    traj = sw.simulate("fd1")
    res = sw.estimate_pinn(traj, epochs=500, seed=1)
    assert res["m_hat"] > 0.0
    assert res["d_hat"] > 0.0
    assert math.isfinite(res["final_data_loss"])


def test_bpinn_small_run_reports_posterior():
    traj = sw.simulate("fd1")
    post = sw.estimate_bpinn(traj, n_particles=4, iterations=1000,
                             seed=2, lambda_true=(0.3, 0.15))
    assert post["m_mean"] > 0.0
    assert post["m_std"] > 0.0
    assert post["tau_m"] > 0.0
    assert not post["blind"]


def test_percent_error():
    em, ed = sw.percent_error((0.33, 0.12), (0.3, 0.15))
    assert em == pytest.approx(10.0)
    assert ed == pytest.approx(20.0)
