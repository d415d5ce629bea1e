import json
import math

import numpy as np
import pytest

from brdf_sampler.brdf import BrdfClass, CookTorrance, Lambertian, Phong
from brdf_sampler.efficiency import (
    ExperimentPlan,
    InadmissibleError,
    cell_seed,
    compare_strategies,
    error_curve,
    expected_error_curve,
    pick_winner,
    ratio_verdict,
    select_best_strategy,
)
from brdf_sampler.estimation import Estimator, fit
from brdf_sampler.measurement import Measurer, NoiseModel, simulate_measurements
from brdf_sampler.objectives import CostSpec, DistSpec, Majorant, QuadratureSpec, dist
from brdf_sampler.sampling import SamplingStrategy

US = SamplingStrategy("uniform_sphere")
EQ = SamplingStrategy("equispaced_grid")
FAST = DistSpec(2.0, QuadratureSpec("product_gauss", 6))


def plan(truth, strategies, budgets, **kw):
    kw.setdefault("dist", FAST)
    return ExperimentPlan(truth=truth, strategies=strategies, budgets=budgets, **kw)


def recompute_error(p, strategy, truth, budget_index, draw=0):
    """Independent rerun of one cell from its seed."""
    seed = cell_seed(p.seed, budget_index, draw, 0)
    c = strategy.generate(p.budgets[budget_index], Measurer(truth, p.noise, seed))
    m = simulate_measurements(truth, c, p.noise, seed)
    return dist(p.dist, fit(p.estimator, m), truth)


# -- error curves -------------------------------------------------------------------


def test_exact_model_class_has_zero_error():
    p = plan(Lambertian(0.5), [US], [16, 64, 256], estimator=Estimator("parametric_fit", {"family": "lambertian"}))
    assert all(pt.error <= 1e-9 for pt in error_curve(p, US))


def test_lambertian_nearest_neighbor_is_exact():
    # a constant BRDF is reproduced exactly by nearest-neighbor lookup, so the error is 0 at every budget
    p = plan(Lambertian(0.5), [US], [16, 1024], estimator=Estimator("nearest_neighbor"))
    assert [pt.error for pt in error_curve(p, US)] == [0.0, 0.0]


def test_nearest_neighbor_error_decreases_for_phong():
    p = plan(Phong(0.5, 0.3, 4.0), [US], [16, 64, 256, 1024], estimator=Estimator("nearest_neighbor"))
    errs = [pt.error for pt in error_curve(p, US)]
    assert errs == sorted(errs, reverse=True) and errs[-1] < errs[0]


def test_single_budget_curve():
    assert len(error_curve(plan(Phong(), [US], [64]), US)) == 1


def test_curve_matches_recomputation():
    p = plan(CookTorrance(), [US], [16, 64, 144], noise=NoiseModel("additive_gaussian", 0.02))
    curve = error_curve(p, US)
    for i, pt in enumerate(curve):
        assert pt.error == recompute_error(p, US, p.truth, i)
        assert pt.n == US.generate(p.budgets[i]).n and pt.cost == pt.n


def test_replicates_average_and_stderr():
    p = plan(Phong(), [US], [64], noise=NoiseModel("additive_gaussian", 0.05), replicates=4)
    (pt,) = error_curve(p, US)
    assert pt.stderr > 0
    p1 = plan(Phong(), [US], [64], noise=NoiseModel("additive_gaussian", 0.05))
    assert error_curve(p1, US)[0].stderr == 0.0


def test_non_convergence_is_flagged_not_fatal():
    p = plan(CookTorrance(), [US], [64, 128], estimator=Estimator("parametric_fit", {"family": "cook_torrance", "max_iter": 1}))
    curve = error_curve(p, US)
    assert len(curve) == 2 and all(pt.flagged for pt in curve)


def test_cell_seeds_distinct():
    seeds = {cell_seed(0, i, d, r) for i in range(5) for d in range(3) for r in range(3)}
    assert len(seeds) == 45


# -- verdict rule ---------------------------------------------------------------------


def test_ratio_verdict_rules():
    r, tail, stat, v = ratio_verdict([1, 1, 0.5, 0.5, 0.5], [1, 1, 1, 1, 1])
    assert tail == [2, 3, 4] and stat == 0.5 and v == "strategy1_more_efficient"
    assert ratio_verdict([1, 1, 1], [1, 0.5, 0.5])[3] == "strategy2_more_efficient"
    assert ratio_verdict([1, 0.97, 0.97], [1, 1, 1])[3] == "inconclusive"
    assert ratio_verdict([1, 1, 0.6, 1.1], [1, 1, 1, 1])[3] == "inconclusive"


def test_ratio_verdict_zero_denominators():
    r, tail, stat, v = ratio_verdict([0, 0, 0], [0, 0, 0])
    assert r == [None, None, None] and stat is None and v == "inconclusive"
    # one excluded point out of a three-point tail still allows a verdict
    assert ratio_verdict([1, 1, 0.1, 0.1, 0.1, 0.1], [1, 1, 1, 1, 0, 1])[3] == "strategy1_more_efficient"
    assert ratio_verdict([1, 1, 0.1, 0.1, 0.1, 0.1], [1, 1, 1, 0, 0, 1])[3] == "inconclusive"


@pytest.mark.parametrize("scale", [1e-6, 0.3, 7.0, 1e5])
def test_verdict_scale_equivariance(scale, rng):
    e1, e2 = rng.uniform(0.1, 1, 6), rng.uniform(0.1, 1, 6)
    base = ratio_verdict(e1, e2)
    scaled = ratio_verdict(e1 * scale, e2 * scale)
    np.testing.assert_allclose(scaled[0], base[0], rtol=1e-12)
    assert scaled[3] == base[3]


# -- comparisons ------------------------------------------------------------------------


def test_self_comparison():
    rep = compare_strategies(plan(CookTorrance(), [US, US], [16, 64, 256]))
    assert rep.ratios == [1.0, 1.0, 1.0] and rep.verdict == "inconclusive"


def test_both_exact_all_flagged():
    p = plan(Lambertian(0.5), [US, EQ], [16, 64, 256], estimator=Estimator("nearest_neighbor"))
    rep = compare_strategies(p)
    assert rep.verdict == "inconclusive" and rep.flagged_budgets == [16, 64, 256]


def test_comparison_requires_admissibility():
    p = plan(Phong(), [US, EQ], [100], majorant=Majorant("constant", c=200))
    with pytest.raises(InadmissibleError):
        compare_strategies(p)


def test_comparison_needs_two_strategies():
    with pytest.raises(ValueError):
        compare_strategies(plan(Phong(), [US], [16]))


def test_report_is_deterministic():
    p = plan(Phong(), [US, EQ], [16, 64], noise=NoiseModel("relative_gaussian", 0.1))
    a = json.dumps(compare_strategies(p).to_dict(), sort_keys=True)
    b = json.dumps(compare_strategies(p).to_dict(), sort_keys=True)
    assert a == b


# -- classes --------------------------------------------------------------------------------


def test_degenerate_class_matches_single_brdf():
    cls = BrdfClass("phong", {"kd": 0.2, "ks": 0.5, "exponent": 20.0}, seed=1)
    pc = plan(cls, [US], [16, 64], draws=3)
    single = error_curve(plan(Phong(0.2, 0.5, 20.0), [US], [16, 64]), US)
    curve = expected_error_curve(pc, US)
    assert [pt.error for pt in curve] == pytest.approx([pt.error for pt in single], rel=1e-15)
    assert all(pt.stderr == 0.0 for pt in curve)


def test_exact_class_mean_error():
    cls = BrdfClass("lambertian", {"albedo": (0.0, 1.0)}, seed=5)
    p = plan(cls, [US], [16, 64], draws=100, estimator=Estimator("parametric_fit", {"family": "lambertian"}))
    assert all(pt.error <= 1e-9 for pt in expected_error_curve(p, US))


def test_class_needs_two_draws():
    with pytest.raises(ValueError):
        expected_error_curve(plan(BrdfClass("lambertian", {"albedo": (0, 1)}), [US], [16], draws=1), US)
    with pytest.raises(ValueError):
        expected_error_curve(plan(Phong(), [US], [16]), US)


def test_class_comparison_matches_brute_force():
    cls = BrdfClass("phong", {"kd": (0.1, 0.3), "ks": (0.3, 0.6), "exponent": (5.0, 100.0)}, seed=11)
    p = plan(cls, [US, EQ], [128, 512], draws=50)
    rep = compare_strategies(p)
    truths = cls.draw(50)
    means = []
    for s in (US, EQ):
        means.append([np.mean([recompute_error(p, s, f, i, d) for d, f in enumerate(truths)]) for i in range(2)])
    assert [pt.error for pt in rep.curve1] == pytest.approx(means[0], rel=1e-12)
    assert [pt.error for pt in rep.curve2] == pytest.approx(means[1], rel=1e-12)
    assert rep.verdict == ratio_verdict(means[0], means[1])[3]
    assert rep.mode == "class"


# -- selection -------------------------------------------------------------------------------


def test_single_candidate_wins_everywhere():
    res = select_best_strategy(plan(Phong(), [US], [16, 64]))
    assert [w["strategy"] for w in res.winners] == ["uniform_sphere", "uniform_sphere"]


def test_violator_excluded():
    res = select_best_strategy(plan(Phong(), [EQ, US], [100], majorant=Majorant("constant", c=200)))
    assert res.excluded == ["equispaced_grid"] and res.winner == "uniform_sphere"


def test_all_inadmissible_raises():
    with pytest.raises(InadmissibleError):
        select_best_strategy(plan(Phong(), [EQ, US], [100], majorant=Majorant("constant", c=50)))


def test_selection_matches_exhaustive_recomputation():
    cands = [US, EQ, SamplingStrategy("specular_grid", {"concentration": 2.0})]
    p = plan(Phong(0.2, 0.7, 40.0), cands, [64, 256])
    res = select_best_strategy(p)
    for i, b in enumerate(p.budgets):
        errs = [recompute_error(p, s, p.truth, i) for s in cands]
        costs = [s.generate(b).n for s in cands]
        best = min(range(3), key=lambda k: (errs[k], costs[k], k))
        assert res.winners[i]["strategy"] == cands[best].label


def test_selection_permutation_invariant():
    cands = [US, EQ, SamplingStrategy("specular_grid", {"concentration": 2.0})]
    a = select_best_strategy(plan(Phong(0.2, 0.7, 40.0), cands, [64, 256]))
    b = select_best_strategy(plan(Phong(0.2, 0.7, 40.0), cands[::-1], [64, 256]))
    assert a.winners == b.winners


def test_tie_break_cost_then_order():
    assert pick_winner(["a", "b", "c"], [1.0, 1.0, 1.0], [5, 3, 3]) == 1
    assert pick_winner(["a", "b"], [1.0, 1.0], [3, 3]) == 0


def test_selection_rejects_duplicate_labels():
    with pytest.raises(ValueError):
        select_best_strategy(plan(Phong(), [US, US], [16]))


def test_plan_validation():
    with pytest.raises(ValueError):
        plan(Phong(), [US], [64, 16])
    with pytest.raises(ValueError):
        plan(Phong(), [], [16])
    with pytest.raises(ValueError):
        plan(Phong(), [US], [16], margin=1.0)
