import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bipedkit.contextual_kick import KickEpisode, SurrogateKick
from bipedkit.optimizers import (
    ALGORITHMS,
    CMAES,
    BudgetError,
    ConstantRewardTask,
    EpisodeFinished,
    NonFiniteObjective,
    Objective,
    optimize,
    repair_spd,
    rosenbrock,
    run_episode,
    sphere,
)
from bipedkit.model_core import ValidationError

ALGOS = sorted(ALGORITHMS)


@pytest.mark.parametrize("algo", ALGOS)
def test_deterministic(algo):
    a = optimize(algo, sphere(4), 1500, seed=7)
    b = optimize(algo, sphere(4), 1500, seed=7)
    np.testing.assert_array_equal(a.best_theta, b.best_theta)
    assert a.history == b.history and a.evals_used == b.evals_used


@pytest.mark.parametrize("algo", ALGOS)
def test_workers_do_not_change_result(algo):
    a = optimize(algo, sphere(3), 800, seed=3, workers=1)
    b = optimize(algo, sphere(3), 800, seed=3, workers=4)
    np.testing.assert_array_equal(a.best_theta, b.best_theta)


@pytest.mark.parametrize("algo", ALGOS)
def test_budget_respected_and_history_monotone(algo):
    res = optimize(algo, rosenbrock(3), 2000, seed=1)
    assert res.evals_used <= 2000
    assert np.all(np.diff(res.history) <= 0)
    assert res.best_cost == res.history[-1]
    assert np.all(np.abs(res.best_theta) <= 5.0)


@settings(max_examples=15)
@given(st.sampled_from(ALGOS), st.integers(0, 2**32 - 1))
def test_history_monotone_any_seed(algo, seed):
    res = optimize(algo, sphere(2), 300, seed=seed)
    assert all(b <= a for a, b in zip(res.history, res.history[1:]))


@pytest.mark.parametrize("algo,size", [("ga", 50), ("pso", 40), ("cmaes", 8)])
def test_budget_equal_to_population(algo, size):
    obj = sphere(5)
    res = optimize(algo, obj, size, seed=11)
    assert res.evals_used == size and len(res.history) == 1
    # the best of one generation of uniform samples is the reported best
    assert res.best_cost == pytest.approx(float(np.dot(res.best_theta, res.best_theta)), abs=0)


@pytest.mark.parametrize("algo", ["ga", "pso", "cmaes"])
def test_budget_below_population(algo):
    with pytest.raises(BudgetError):
        optimize(algo, sphere(5), 3, seed=0)


def test_unknown_algorithm():
    with pytest.raises(ValidationError):
        optimize("anneal", sphere(2), 100, seed=0)


def test_hill_climb_from_optimum():
    res = optimize("hc", sphere(4), 400, seed=0, x0=np.zeros(4))
    assert res.best_cost == 0.0
    assert set(res.history) == {0.0}


def test_non_finite_objective():
    obj = Objective(2, (-1, 1), lambda x: math.nan, "nan")
    with pytest.raises(NonFiniteObjective):
        optimize("hc", obj, 10, seed=0)


def test_bad_bounds():
    with pytest.raises(ValidationError):
        Objective(2, (1, -1), lambda x: 0.0)


def test_cmaes_small_sphere_converges():
    res = optimize("cmaes", sphere(4), 6000, seed=2)
    assert res.best_cost < 1e-12
    assert min(res.extras["min_eigs"]) >= 1e-14


def test_repair_spd_fixes_indefinite():
    C = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3 and -1
    fixed, d, B = repair_spd(C)
    assert np.all(d >= 1e-14)
    np.testing.assert_allclose(fixed, fixed.T)
    np.linalg.cholesky(fixed)
    np.testing.assert_allclose(B @ np.diag(d) @ B.T, fixed, atol=1e-14)


def test_cmaes_ask_tell_interface(rng):
    es = CMAES(sphere(3), rng)
    xs = es.ask(es.lam)
    es.tell(xs, np.sum(xs**2, axis=1))
    assert xs.shape == (es.lam, 3)


# -- episodic interface -----------------------------------------------------

def test_single_step_episode():
    assert run_episode(ConstantRewardTask(1, 1.0), lambda obs: 0) == 1.0


def test_zero_reward_episode():
    assert run_episode(ConstantRewardTask(25, 0.0), lambda obs: 0) == 0.0


def test_step_after_done():
    task = ConstantRewardTask(1, 1.0)
    run_episode(task, lambda obs: 0)
    with pytest.raises(EpisodeFinished):
        task.step(0)


def test_kick_episode_score():
    task = SurrogateKick()
    theta = task.theta_star(6.0)
    theta[3] += 0.2
    ep = KickEpisode(6.0, task)
    score = run_episode(ep, lambda s: theta)
    achieved = 6.0 - 0.2**2  # s_lin = 6, one rest parameter off by 0.2
    assert ep.last_achieved == pytest.approx(achieved, abs=1e-12)
    assert score == pytest.approx(-abs(achieved - 6.0), abs=1e-12)
