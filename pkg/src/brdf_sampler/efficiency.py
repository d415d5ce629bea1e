"""Empirical comparison of sampling strategies.

For every budget a strategy produces a configuration; the ground truth is
measured on it, an estimator is fitted and the distance of the estimate to
the truth is the error at that budget. Two strategies are compared through
the ratio of their error curves, a class of BRDFs through mean errors.

The limit superior of the error ratio is not computable from finitely many
budgets. Verdicts use the maximum ratio over the upper half of the
evaluated budgets and require it to clear ``1 - margin``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .brdf import Brdf, BrdfClass
from .estimation import Estimator, FitWarning, ParametricEstimate, fit
from .measurement import Measurer, NoiseModel, simulate_measurements
from .objectives import CostSpec, DistSpec, Majorant, admissibility_from_configs, cost, dist
from .sampling import SamplingStrategy

DEFAULT_MARGIN = 0.05
VERDICTS = ("strategy1_more_efficient", "strategy2_more_efficient", "inconclusive")
TAIL_NOTE = (
    "tail_statistic is the maximum error ratio over the upper half of the evaluated budgets, "
    "a finite-budget surrogate for the limit superior; inspect the full ratio trajectory "
    "before drawing asymptotic conclusions"
)


class InadmissibleError(RuntimeError):
    """A strategy violates its cost majorant (or every candidate does)."""


@dataclass
class ExperimentPlan:
    truth: Brdf | BrdfClass
    strategies: list
    budgets: list
    estimator: Estimator = field(default_factory=Estimator)
    dist: DistSpec = field(default_factory=DistSpec)
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int = 0
    draws: int = 1
    cost: CostSpec = field(default_factory=CostSpec)
    majorant: Majorant | None = None
    admissibility: str = "uniform"
    replicates: int = 1
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        self.budgets = [int(b) for b in self.budgets]
        if not self.budgets:
            raise ValueError("plan needs at least one budget")
        if any(b2 <= b1 for b1, b2 in zip(self.budgets, self.budgets[1:])):
            raise ValueError(f"budgets must be strictly ascending, got {self.budgets}")
        if not self.strategies:
            raise ValueError("plan needs at least one strategy")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.is_class and self.draws < 1:
            raise ValueError("class plans need at least one draw")
        if not 0 <= self.margin < 1:
            raise ValueError("margin must lie in [0, 1)")

    @property
    def is_class(self) -> bool:
        return isinstance(self.truth, BrdfClass)

    def truths(self) -> list:
        return self.truth.draw(self.draws) if self.is_class else [self.truth]

    def describe(self) -> dict:
        truth = {"brdf_class": self.truth.describe(), "draws": self.draws} if self.is_class else {"brdf": self.truth.describe()}
        return {
            **truth,
            "strategies": [s.describe() for s in self.strategies],
            "budgets": list(self.budgets),
            "estimator": self.estimator.describe(),
            "dist": {
                "p": "inf" if math.isinf(self.dist.p) else self.dist.p,
                "quadrature": {
                    "rule": self.dist.quadrature.rule,
                    "node_count": self.dist.quadrature.node_count,
                    "seed": self.dist.quadrature.seed,
                    "cosine_weighting": self.dist.quadrature.cosine_weighting,
                },
            },
            "noise": self.noise.describe(),
            "cost": {"kind": self.cost.kind, "weight": None if callable(self.cost.weight) else self.cost.weight},
            "majorant": None if self.majorant is None else self.majorant.describe(),
            "admissibility": self.admissibility,
            "replicates": self.replicates,
            "margin": self.margin,
            "seed": self.seed,
        }


def cell_seed(seed: int, budget_index: int, draw: int = 0, replicate: int = 0) -> int:
    """Noise seed of one (budget, draw, replicate) cell.

    The budget seed is ``seed XOR budget_index``; draw and replicate indices
    are mixed in through a SeedSequence. The strategy never enters, so two
    strategies see the same noise stream at the same budget.
    """
    ss = np.random.SeedSequence([int(seed) ^ int(budget_index), int(draw), int(replicate)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class CurvePoint:
    budget: int
    n: int
    error: float
    stderr: float = 0.0
    cost: float = 0.0
    flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "budget": self.budget,
            "n": self.n,
            "error": self.error,
            "stderr": self.stderr,
            "cost": self.cost,
            "flagged": self.flagged,
        }


@dataclass
class Cell:
    """One budget evaluated for one truth: configuration, data, estimate and errors."""

    budget: int
    configuration: object
    measurements: object
    errors: list
    flagged: bool


def run_cell(plan: ExperimentPlan, strategy: SamplingStrategy, truth, budget_index: int, draw: int = 0) -> Cell:
    budget = plan.budgets[budget_index]
    errors = []
    flagged = False
    ms0 = None
    for rep in range(plan.replicates):
        seed = cell_seed(plan.seed, budget_index, draw, rep)
        c = strategy.generate(budget, Measurer(truth, plan.noise, seed))
        ms = simulate_measurements(truth, c, plan.noise, seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FitWarning)
            est = fit(plan.estimator, ms)
        if isinstance(est, ParametricEstimate) and not est.converged:
            flagged = True
        errors.append(dist(plan.dist, est, truth))
        if rep == 0:
            ms0, config0 = ms, c
    return Cell(budget, config0, ms0, errors, flagged)


def _configs_for_admissibility(plan, strategy, truth):
    return [strategy.generate(b, Measurer(truth, plan.noise, cell_seed(plan.seed, i))) for i, b in enumerate(plan.budgets)]


def check_plan_admissibility(plan: ExperimentPlan, strategy: SamplingStrategy, truth=None):
    """Admissibility of ``strategy`` on the configurations the plan will use."""
    truth = truth if truth is not None else plan.truths()[0]
    configs = _configs_for_admissibility(plan, strategy, truth)
    return admissibility_from_configs(plan.budgets, configs, plan.cost, plan.majorant, plan.admissibility), configs


def _mean_stderr(errs):
    # identical values give exactly that value and zero spread, free of rounding
    if len(errs) == 1 or np.all(errs == errs[0]):
        return float(errs[0]), 0.0
    return float(errs.mean()), float(errs.std(ddof=1) / math.sqrt(len(errs)))


def error_curve(plan: ExperimentPlan, strategy: SamplingStrategy, truth=None, draw: int = 0, cells=None) -> list[CurvePoint]:
    """Errors ``Dist(E_n(f; Omega(n)), f)`` along the plan's budgets.

    ``truth`` defaults to the plan's single ground truth; for class plans pass
    one drawn member. Replicates are averaged; ``stderr`` is their standard
    error (0 for a single replicate). If ``cells`` is a list, the evaluated
    cells are appended to it.
    """
    if truth is None:
        if plan.is_class:
            raise ValueError("class plans need an explicit truth; use expected_error_curve")
        truth = plan.truth
    points = []
    for i, b in enumerate(plan.budgets):
        cell = run_cell(plan, strategy, truth, i, draw)
        if cells is not None:
            cells.append(cell)
        mean, se = _mean_stderr(np.asarray(cell.errors))
        points.append(CurvePoint(b, cell.configuration.n, mean, se, cost(plan.cost, cell.configuration), cell.flagged))
    return points


def expected_error_curve(plan: ExperimentPlan, strategy: SamplingStrategy, cells=None) -> list[CurvePoint]:
    """Mean error over ``plan.draws`` members of the plan's BRDF class.

    ``stderr`` is the standard error of the mean over draws.
    """
    if not plan.is_class:
        raise ValueError("expected_error_curve needs a plan whose truth is a BrdfClass")
    if plan.draws < 2:
        raise ValueError("expected errors need at least 2 class draws")
    curves = []
    for d, f in enumerate(plan.truths()):
        sub = [] if cells is not None and d == 0 else None
        curves.append(error_curve(plan, strategy, truth=f, draw=d, cells=sub))
        if sub is not None:
            cells.extend(sub)
    points = []
    for i, b in enumerate(plan.budgets):
        errs = np.array([c[i].error for c in curves])
        mean, se = _mean_stderr(errs)
        points.append(
            CurvePoint(
                b,
                curves[0][i].n,
                mean,
                se,
                curves[0][i].cost,
                any(c[i].flagged for c in curves),
            )
        )
    return points


def curve_for(plan, strategy, cells=None):
    return expected_error_curve(plan, strategy, cells) if plan.is_class else error_curve(plan, strategy, cells=cells)


def ratio_verdict(errors1, errors2, margin=DEFAULT_MARGIN):
    """Ratio trajectory, tail statistic and verdict for two error curves.

    Budgets where the second error is 0 have no ratio and are flagged. The
    tail is the upper half of the budgets (``ceil(m / 2)`` points). Strategy 1
    wins when the tail maximum of ``e1/e2`` is below ``1 - margin``; strategy 2
    wins when the tail maximum of ``e2/e1`` is. A tail with more than half of
    its ratios excluded is inconclusive.

    Returns ``(ratios, tail_indices, tail_statistic, verdict)``.
    """
    e1 = [float(e) for e in errors1]
    e2 = [float(e) for e in errors2]
    if len(e1) != len(e2) or not e1:
        raise ValueError("error curves must be nonempty and of equal length")
    ratios = [a / b if b > 0 else None for a, b in zip(e1, e2)]
    m = len(e1)
    tail = list(range(m - (m + 1) // 2, m))
    included = [ratios[i] for i in tail if ratios[i] is not None]
    if len(tail) - len(included) > len(tail) / 2 or not included:
        return ratios, tail, None, "inconclusive"
    stat = max(included)
    if stat < 1.0 - margin:
        return ratios, tail, stat, "strategy1_more_efficient"
    inverse = [e2[i] / e1[i] if e1[i] > 0 else math.inf for i in tail if ratios[i] is not None]
    if max(inverse) < 1.0 - margin:
        return ratios, tail, stat, "strategy2_more_efficient"
    return ratios, tail, stat, "inconclusive"


@dataclass
class StrategyComparisonReport:
    strategies: list
    mode: str
    curve1: list
    curve2: list
    ratios: list
    tail_budgets: list
    tail_statistic: float | None
    verdict: str
    margin: float
    admissibility: list
    plan: dict

    @property
    def flagged_budgets(self) -> list:
        return [p1.budget for p1, p2, r in zip(self.curve1, self.curve2, self.ratios) if r is None or p1.flagged or p2.flagged]

    def to_dict(self) -> dict:
        return {
            "kind": "comparison",
            "mode": self.mode,
            "strategies": self.strategies,
            "curves": [[p.to_dict() for p in self.curve1], [p.to_dict() for p in self.curve2]],
            "ratios": [{"budget": p.budget, "ratio": r} for p, r in zip(self.curve1, self.ratios)],
            "tail_budgets": self.tail_budgets,
            "tail_statistic": self.tail_statistic,
            "margin": self.margin,
            "verdict": self.verdict,
            "flagged_budgets": self.flagged_budgets,
            "admissibility": [a.to_dict() for a in self.admissibility],
            "note": TAIL_NOTE,
            "plan": self.plan,
        }


def _require_admissible(plan, strategies):
    truth0 = plan.truths()[0]
    results = []
    for s in strategies:
        adm, _ = check_plan_admissibility(plan, s, truth0)
        if not adm.admissible:
            raise InadmissibleError(
                f"strategy {s.label} violates the cost majorant (first violation at budget {adm.first_violation})"
            )
        results.append(adm)
    return results


def compare_strategies(plan: ExperimentPlan, cells=None) -> StrategyComparisonReport:
    """Compare the plan's two strategies on shared budgets and noise seeds.

    Per-BRDF comparison for a single truth, expected-error comparison for a
    BRDF class. ``cells``, if given, must be a dict; it receives the evaluated
    cells per strategy index.
    """
    if len(plan.strategies) != 2:
        raise ValueError(f"comparison needs exactly 2 strategies, got {len(plan.strategies)}")
    adm = _require_admissible(plan, plan.strategies)
    curves = []
    for k, s in enumerate(plan.strategies):
        sub = [] if cells is not None else None
        curves.append(curve_for(plan, s, sub))
        if cells is not None:
            cells[k] = sub
    ratios, tail, stat, verdict = ratio_verdict([p.error for p in curves[0]], [p.error for p in curves[1]], plan.margin)
    return StrategyComparisonReport(
        strategies=[s.describe() for s in plan.strategies],
        mode="class" if plan.is_class else "per_brdf",
        curve1=curves[0],
        curve2=curves[1],
        ratios=ratios,
        tail_budgets=[plan.budgets[i] for i in tail],
        tail_statistic=stat,
        verdict=verdict,
        margin=plan.margin,
        admissibility=adm,
        plan=plan.describe(),
    )


@dataclass
class SelectionResult:
    candidates: list
    admissibility: list
    excluded: list
    curves: dict
    winners: list
    plan: dict

    @property
    def winner(self) -> str:
        """Winner at the largest budget."""
        return self.winners[-1]["strategy"]

    def to_dict(self) -> dict:
        return {
            "kind": "selection",
            "candidates": self.candidates,
            "admissibility": [a.to_dict() for a in self.admissibility],
            "excluded": self.excluded,
            "curves": {k: [p.to_dict() for p in v] for k, v in self.curves.items()},
            "winners": self.winners,
            "winner": self.winner,
            "plan": self.plan,
        }


def pick_winner(labels, errors, costs) -> int:
    """Index minimizing ``(error, cost, declaration order)``."""
    return min(range(len(labels)), key=lambda k: (errors[k], costs[k], k))


def select_best_strategy(plan: ExperimentPlan, cells=None) -> SelectionResult:
    """Pick the admissible candidate with the lowest (mean) error at each budget.

    Ties go to the lower cost, then to the earlier declared candidate.
    Inadmissible candidates are excluded and reported.
    """
    labels = [s.label for s in plan.strategies]
    if len(set(labels)) != len(labels):
        raise ValueError(f"strategy labels must be unique, got {labels}")
    truth0 = plan.truths()[0]
    adm = [check_plan_admissibility(plan, s, truth0)[0] for s in plan.strategies]
    keep = [k for k, a in enumerate(adm) if a.admissible]
    excluded = [labels[k] for k, a in enumerate(adm) if not a.admissible]
    if not keep:
        raise InadmissibleError("every candidate strategy violates the cost majorant")
    curves = {}
    for k in keep:
        sub = [] if cells is not None else None
        curves[labels[k]] = curve_for(plan, plan.strategies[k], sub)
        if cells is not None:
            cells[k] = sub
    winners = []
    kept = [labels[k] for k in keep]
    for i, b in enumerate(plan.budgets):
        errs = [curves[lab][i].error for lab in kept]
        costs = [curves[lab][i].cost for lab in kept]
        w = pick_winner(kept, errs, costs)
        winners.append({"budget": b, "strategy": kept[w], "error": errs[w]})
    return SelectionResult([s.describe() for s in plan.strategies], adm, excluded, curves, winners, plan.describe())
