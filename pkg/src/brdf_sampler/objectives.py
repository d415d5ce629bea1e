"""Distances between BRDFs, measurement costs and cost majorants."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .geometry import TWO_PI

QUADRATURE_RULES = ("product_gauss", "monte_carlo")


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration rule over one hemisphere or the product of two.

    For ``product_gauss`` ``node_count`` is the number of nodes per angular
    dimension (Gauss-Legendre in theta, equispaced in phi); for
    ``monte_carlo`` it is the total number of uniform samples.
    """

    rule: str = "product_gauss"
    node_count: int = 8
    seed: int = 0
    cosine_weighting: bool = False

    def __post_init__(self):
        if self.rule not in QUADRATURE_RULES:
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if int(self.node_count) < 1:
            raise ValueError("node_count must be at least 1")


def _gauss_theta(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    theta = 0.25 * math.pi * (x + 1.0)
    return theta, 0.25 * math.pi * w * np.sin(theta)


def _equispaced_phi(n: int):
    return np.arange(n) * (TWO_PI / n), np.full(n, TWO_PI / n)


def _uniform_hemisphere(rng, size):
    theta = np.arccos(rng.uniform(0.0, 1.0, size))
    phi = rng.uniform(0.0, TWO_PI, size)
    return theta, phi


@lru_cache(maxsize=32)
def hemisphere_nodes(spec: QuadratureSpec):
    """Nodes ``(theta, phi, weight)`` for integrating over one hemisphere.

    Weights carry the solid-angle measure, so they sum to approximately 2pi.
    ``cosine_weighting`` is ignored here; callers add the cosines they need.
    """
    if spec.rule == "product_gauss":
        t, wt = _gauss_theta(spec.node_count)
        p, wp = _equispaced_phi(spec.node_count)
        T, P = np.meshgrid(t, p, indexing="ij")
        W = np.outer(wt, wp)
        out = T.ravel(), P.ravel(), W.ravel()
    else:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        theta, phi = _uniform_hemisphere(rng, spec.node_count)
        out = theta, phi, np.full(spec.node_count, TWO_PI / spec.node_count)
    for a in out:
        a.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def pair_nodes(spec: QuadratureSpec):
    """Nodes over (hemisphere)^2: ``(pairs (N, 4), weights (N,))``.

    With ``cosine_weighting`` the weights include ``cos(theta_i) cos(theta_r)``.
    """
    if spec.rule == "product_gauss":
        t, p, w = hemisphere_nodes(spec)
        m = t.size
        ii, rr = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        ii, rr = ii.ravel(), rr.ravel()
        pairs = np.column_stack([t[ii], p[ii], t[rr], p[rr]])
        weights = w[ii] * w[rr]
    else:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        ti, pi_ = _uniform_hemisphere(rng, spec.node_count)
        tr, pr = _uniform_hemisphere(rng, spec.node_count)
        pairs = np.column_stack([ti, pi_, tr, pr])
        weights = np.full(spec.node_count, TWO_PI * TWO_PI / spec.node_count)
    if spec.cosine_weighting:
        weights = weights * np.cos(pairs[:, 0]) * np.cos(pairs[:, 2])
    pairs.setflags(write=False)
    weights.setflags(write=False)
    return pairs, weights


@dataclass(frozen=True)
class DistSpec:
    p: float = 2.0
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if not self.p >= 1.0:
            raise ValueError(f"p={self.p} must be at least 1")


def _eval_chunked(f, pairs, chunk=65536):
    if len(pairs) <= chunk:
        return np.asarray(f.eval_pairs(pairs), dtype=float)
    return np.concatenate([np.asarray(f.eval_pairs(pairs[s:s + chunk]), dtype=float) for s in range(0, len(pairs), chunk)])


def dist(spec: DistSpec, f, g) -> float:
    """Weight-normalized L_p distance between two BRDFs.

    Computes ``(sum w |f-g|^p / sum w)^(1/p)`` over the quadrature nodes, or the
    maximum absolute difference on the nodes for ``p = inf``.
    """
    pairs, w = pair_nodes(spec.quadrature)
    diff = np.abs(_eval_chunked(f, pairs) - _eval_chunked(g, pairs))
    if math.isinf(spec.p):
        return float(np.max(diff[w > 0])) if np.any(w > 0) else 0.0
    total = np.sum(w)
    if total <= 0:
        return 0.0
    mean = np.sum(w * diff**spec.p) / total
    return float(mean ** (1.0 / spec.p))


# -- costs -------------------------------------------------------------------

COST_KINDS = ("cardinality", "weighted_points", "travel")


@dataclass(frozen=True)
class CostSpec:
    """Cost of a measurement configuration.

    ``weight`` (for ``weighted_points``) is a callable of theta or a list of
    polynomial coefficients in theta, lowest order first; ``[1, 1]`` means
    ``1 + theta``.
    """

    kind: str = "cardinality"
    weight: Callable | tuple | list | None = None

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ValueError(f"unknown cost kind {self.kind!r}")
        if self.kind == "weighted_points" and self.weight is None:
            raise ValueError("weighted_points cost needs a weight")

    def weight_fn(self):
        if callable(self.weight):
            return self.weight
        coeffs = np.asarray(self.weight, dtype=float)
        return lambda theta: np.polynomial.polynomial.polyval(theta, coeffs)


def _wrapped_phi_step(a, b):
    d = np.abs(a - b) % TWO_PI
    return np.minimum(d, TWO_PI - d)


def cost(spec: CostSpec, config) -> float:
    pairs = config.pairs
    if spec.kind == "cardinality":
        return float(config.n)
    if spec.kind == "weighted_points":
        w = spec.weight_fn()
        vals = np.asarray(w(pairs[:, 0]), dtype=float) * np.asarray(w(pairs[:, 2]), dtype=float)
        out = float(np.sum(vals))
    else:
        if len(pairs) < 2:
            return 0.0
        a, b = pairs[:-1], pairs[1:]
        step = (
            np.abs(b[:, 0] - a[:, 0])
            + _wrapped_phi_step(b[:, 1], a[:, 1])
            + np.abs(b[:, 2] - a[:, 2])
            + _wrapped_phi_step(b[:, 3], a[:, 3])
        )
        out = float(np.sum(step))
    if not (math.isfinite(out) and out >= 0):
        raise ValueError(f"cost evaluated to {out}; costs must be finite and nonnegative")
    return out


@dataclass(frozen=True)
class Majorant:
    """Upper bound ``C_max(n)`` on admissible cost.

    ``kind`` is ``constant`` (uses ``c``), ``linear`` (``a*n + b``) or
    ``table`` (step function: the entry with the largest key not above n).
    """

    kind: str = "linear"
    c: float = 1.0
    a: float = 2.0
    b: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "table"):
            raise ValueError(f"unknown majorant kind {self.kind!r}")
        if self.kind == "table":
            items = self.table.items() if isinstance(self.table, dict) else self.table
            items = tuple(sorted((int(k), float(v)) for k, v in items))
            if not items:
                raise ValueError("table majorant needs at least one entry")
            object.__setattr__(self, "table", items)

    def __call__(self, n: int) -> float:
        if self.kind == "constant":
            val = self.c
        elif self.kind == "linear":
            val = self.a * n + self.b
        else:
            keys = [k for k, _ in self.table]
            idx = int(np.searchsorted(keys, n, side="right")) - 1
            if idx < 0:
                raise ValueError(f"majorant table has no entry at or below n={n}")
            val = self.table[idx][1]
        if not val > 0:
            raise ValueError(f"majorant C_max({n}) = {val} must be positive")
        return float(val)

    def describe(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "c": self.c}
        if self.kind == "linear":
            return {"kind": "linear", "a": self.a, "b": self.b}
        return {"kind": "table", "table": [[k, v] for k, v in self.table]}


@dataclass
class Admissibility:
    """Outcome of an admissibility check.

    ``points`` holds ``(budget, n, cost, c_max)`` per evaluated budget.
    ``first_violation`` is the first budget whose cost is not below the
    majorant; ``n_min`` the smallest evaluated budget after which every
    evaluated budget complies (asymptotic mode).
    """

    admissible: bool
    mode: str
    first_violation: int | None
    n_min: int | None
    points: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "mode": self.mode,
            "first_violation": self.first_violation,
            "n_min": self.n_min,
            "points": [
                {"budget": b, "n": n, "cost": c, "c_max": m} for b, n, c, m in self.points
            ],
        }


def admissibility_from_configs(budgets, configs, costspec: CostSpec, majorant: Majorant | None, mode="uniform"):
    """Admissibility of already generated configurations (one per budget).

    With ``majorant=None`` the strategy is unconstrained and always admissible.
    """
    if mode not in ("uniform", "asymptotic"):
        raise ValueError(f"unknown admissibility mode {mode!r}")
    budgets = list(budgets)
    if not budgets:
        raise ValueError("budgets must be nonempty")
    points = []
    ok = []
    for b, c in zip(budgets, configs):
        cst = cost(costspec, c)
        cmax = None if majorant is None else majorant(c.n)
        points.append((b, c.n, cst, cmax))
        ok.append(cmax is None or cst < cmax)
    first_violation = next((b for b, good in zip(budgets, ok) if not good), None)
    n_min = None
    for i in range(len(ok)):
        if all(ok[i:]):
            n_min = budgets[i]
            break
    admissible = first_violation is None if mode == "uniform" else n_min is not None
    return Admissibility(admissible, mode, first_violation, n_min, points)


def check_admissible(strategy, costspec: CostSpec, majorant: Majorant, budgets, mode="uniform", measure=None):
    """Check ``Cost(config) < C_max(n)`` along a strategy's sequence of configurations.

    The majorant is evaluated at the realized configuration size ``n``, which
    may exceed the requested budget for grid strategies.
    """
    from .sampling import strategy_sequence

    budgets = list(budgets)
    configs = strategy_sequence(strategy, budgets, measure=measure) if budgets else []
    return admissibility_from_configs(budgets, configs, costspec, majorant, mode)
