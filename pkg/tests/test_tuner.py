"""Classifier-pruned optimization loop: budget, bookkeeping, determinism."""

import math

import numpy as np
import pytest

from beamtune.rng import derive_run_seed
from beamtune.tuner import TunerConfig, cbol_tune, default_objective, multi_run
from beamtune.types import BoundsBox
from beamtune.validation import LATENT_DIM, MODULE_COUNT


def small_cfg(**kw):
    base = dict(iterations=12, runs=2, seed=3, initial_design=4)
    base.update(kw)
    return TunerConfig(**base)


def test_budget_and_bookkeeping(system):
    res = cbol_tune(small_cfg(), 0, system)
    assert len(res.all_entries) == 12
    assert res.gp_observations == 12
    assert [e.iteration for e in res.all_entries] == list(range(12))
    # the physical history is exactly the classifier-passing entries
    assert res.pruned == [e for e in res.all_entries if e.passed_classifier]
    for entry in res.all_entries:
        assert entry.z1.shape == (LATENT_DIM,)
        assert entry.trajectory.shape == (MODULE_COUNT, LATENT_DIM)
        assert entry.losses.shape == (MODULE_COUNT,)
        assert isinstance(entry.passed_classifier, bool)


def test_best_is_min_over_pruned(system):
    # box inside the manifold, so every entry passes and best is meaningful
    box = BoundsBox(np.full(LATENT_DIM, -0.5), np.full(LATENT_DIM, 0.5))
    res = cbol_tune(small_cfg(bounds=box), 0, system)
    assert len(res.pruned) == 12
    want = min(e.total_loss for e in res.pruned)
    assert res.best.total_loss == want
    assert res.best_loss() == want


def test_all_pruned_run_has_nan_best(system):
    # box entirely outside the manifold: nothing can pass the classifier
    box = BoundsBox(np.full(LATENT_DIM, 0.7), np.full(LATENT_DIM, 1.0))
    res = cbol_tune(small_cfg(iterations=6, initial_design=2, bounds=box), 0, system)
    assert res.pruned == []
    assert res.best is None
    assert math.isnan(res.best_loss())
    assert len(res.all_entries) == 6


def test_runs_are_deterministic(system):
    a = cbol_tune(small_cfg(), 0, system)
    b = cbol_tune(small_cfg(), 0, system)
    for ea, eb in zip(a.all_entries, b.all_entries):
        assert np.array_equal(ea.z1, eb.z1)
        assert ea.total_loss == eb.total_loss
        assert ea.passed_classifier == eb.passed_classifier


def test_run_index_changes_the_run(system):
    a = cbol_tune(small_cfg(), 0, system)
    b = cbol_tune(small_cfg(), 1, system)
    assert not np.array_equal(a.all_entries[0].z1, b.all_entries[0].z1)
    assert a.seed == derive_run_seed(3, 0)
    assert b.seed == derive_run_seed(3, 1)


def test_objective_called_once_per_iteration(system):
    calls = []
    inner = default_objective(system, small_cfg().weights)

    def counting(z1):
        calls.append(np.array(z1))
        return inner(z1)

    res = cbol_tune(small_cfg(), 0, system, objective=counting)
    assert len(calls) == 12
    for entry, z in zip(res.all_entries, calls):
        assert np.array_equal(entry.z1, z)


def test_multi_run_matches_individual_runs(system):
    cfg = small_cfg(iterations=10, initial_design=4, runs=2)
    runs = multi_run(cfg, system)
    assert [r.run_index for r in runs] == [0, 1]
    for i, run in enumerate(runs):
        solo = cbol_tune(cfg, i, system)
        assert run.seed == solo.seed
        for ea, eb in zip(run.all_entries, solo.all_entries):
            assert np.array_equal(ea.z1, eb.z1)


def test_initial_design_points_are_uniform_draws(system):
    """The first ``initial_design`` entries come straight from the sampler."""
    cfg = small_cfg()
    res = cbol_tune(cfg, 0, system)
    from beamtune.rng import make_rng
    from beamtune.tuner import sample_initial

    rng = make_rng(derive_run_seed(cfg.seed, 0))
    for i in range(cfg.initial_design):
        assert np.array_equal(res.all_entries[i].z1, sample_initial(cfg.bounds, rng))


@pytest.mark.parametrize(
    "kw",
    [
        dict(iterations=0),
        dict(runs=0),
        dict(initial_design=0),
        dict(iterations=4, initial_design=5),
        dict(candidate_count=0),
        dict(refine_steps=-1),
        dict(xi=-0.5),
        dict(xi=float("nan")),
        dict(seed=-1),
        dict(weights=-np.ones(MODULE_COUNT)),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        TunerConfig(**{**dict(iterations=12, initial_design=4), **kw})


def test_acquisition_config_mirrors_tuner_config():
    cfg = small_cfg(xi=0.25, candidate_count=77, refine_steps=5)
    acq = cfg.acquisition()
    assert acq.xi == 0.25
    assert acq.candidate_count == 77
    assert acq.refine_steps == 5
