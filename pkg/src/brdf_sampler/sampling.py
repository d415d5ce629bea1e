"""Measurement configurations and the sampling-strategy families that build them.

A configuration is an ordered list of incoming directions, each with its own
ordered list of reflection directions. A strategy maps a budget ``n0`` to a
configuration with at least ``n0`` (incoming, reflection) pairs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .geometry import (
    HALF_PI,
    NORMAL,
    TWO_PI,
    Direction,
    from_unit_vector,
    mirror_reflect,
    pair_distance_matrix,
    pair_unit_vectors,
    to_unit_vector,
)

GOLDEN_CONJUGATE = (math.sqrt(5.0) - 1.0) / 2.0
CONE_HALF_ANGLE = math.pi / 8


@dataclass(frozen=True)
class MeasurementConfiguration:
    incoming: tuple
    reflections: tuple

    def __post_init__(self):
        incoming = tuple(self.incoming)
        reflections = tuple(tuple(r) for r in self.reflections)
        if len(incoming) < 1:
            raise ValueError("a configuration needs at least one incoming direction")
        if len(reflections) != len(incoming):
            raise ValueError("one reflection set is required per incoming direction")
        if any(len(r) == 0 for r in reflections):
            raise ValueError("every incoming direction needs at least one reflection direction")
        if len(set(incoming)) != len(incoming):
            raise ValueError("duplicate incoming directions")
        for wi, refl in zip(incoming, reflections):
            if len(set(refl)) != len(refl):
                raise ValueError(f"duplicate (incoming, reflection) pair at incoming {wi.as_tuple()}")
        object.__setattr__(self, "incoming", incoming)
        object.__setattr__(self, "reflections", reflections)
        n = sum(len(r) for r in reflections)
        assert n == len(self.pairs)

    @property
    def p_inc(self) -> int:
        return len(self.incoming)

    @property
    def p_refl(self) -> list[int]:
        return [len(r) for r in self.reflections]

    @property
    def n(self) -> int:
        return sum(self.p_refl)

    def __len__(self):
        return self.n

    @cached_property
    def pairs(self) -> np.ndarray:
        """``(n, 4)`` array of ``(theta_i, phi_i, theta_r, phi_r)`` in configuration order."""
        rows = [(wi.theta, wi.phi, wr.theta, wr.phi) for wi, refl in zip(self.incoming, self.reflections) for wr in refl]
        arr = np.array(rows, dtype=float).reshape(-1, 4)
        arr.setflags(write=False)
        return arr

    @classmethod
    def from_pairs(cls, pairs) -> "MeasurementConfiguration":
        """Group rows by incoming direction, keeping first-appearance order."""
        groups: dict[Direction, list[Direction]] = {}
        for ti, pi_, tr, pr in np.asarray(pairs, dtype=float).reshape(-1, 4):
            groups.setdefault(Direction(ti, pi_), []).append(Direction(tr, pr))
        return cls(tuple(groups), tuple(tuple(v) for v in groups.values()))

    @classmethod
    def product(cls, incoming, reflections) -> "MeasurementConfiguration":
        """Configuration using the same reflection set for every incoming direction."""
        reflections = tuple(reflections)
        return cls(tuple(incoming), tuple(reflections for _ in incoming))


# -- point sets --------------------------------------------------------------


def grid_directions(n_theta: int, n_phi: int) -> list[Direction]:
    thetas = (np.arange(n_theta) + 0.5) * (HALF_PI / n_theta)
    phis = np.arange(n_phi) * (TWO_PI / n_phi)
    return [Direction(t, p) for t in thetas for p in phis]


def fibonacci_hemisphere(k: int) -> list[Direction]:
    """Fibonacci lattice on the upper hemisphere (equal-area latitude slices)."""
    idx = np.arange(k)
    cos_theta = 1.0 - (idx + 0.5) / k
    phi = np.mod(TWO_PI * idx * GOLDEN_CONJUGATE, TWO_PI)
    return [Direction(t, p) for t, p in zip(np.arccos(cos_theta), phi)]


def random_hemisphere(k: int, rng) -> list[Direction]:
    theta = np.arccos(rng.uniform(0.0, 1.0, k))
    phi = rng.uniform(0.0, TWO_PI, k)
    return [Direction(t, p) for t, p in zip(theta, phi)]


def grid_resolution(budget: int) -> tuple[int, int]:
    """Smallest ``(n_theta, 2 n_theta)`` with ``(n_theta * n_phi)**2 >= budget``."""
    n_theta = 1
    while (2 * n_theta * n_theta) ** 2 < budget:
        n_theta += 1
    return n_theta, 2 * n_theta


def _check_budget(budget):
    if int(budget) != budget or budget < 1:
        raise ValueError(f"budget must be a positive integer, got {budget}")
    return int(budget)


# -- strategy families -------------------------------------------------------


def equispaced_grid(budget: int, n_theta: int | None = None, n_phi: int | None = None) -> MeasurementConfiguration:
    """Standard equal-angle grid, identical for incoming and reflection directions.

    ``budget == 1`` yields the one-node grid at ``(pi/4, 0)``.
    """
    budget = _check_budget(budget)
    if n_theta is None and n_phi is None:
        n_theta, n_phi = (1, 1) if budget == 1 else grid_resolution(budget)
    elif n_theta is None or n_phi is None:
        raise ValueError("give both n_theta and n_phi or neither")
    dirs = grid_directions(n_theta, n_phi)
    return MeasurementConfiguration.product(dirs, dirs)


def uniform_sphere(budget: int, seed: int = 0, random: bool = False) -> MeasurementConfiguration:
    """Quasi-uniform hemisphere sets for incoming and reflection directions.

    ``ceil(sqrt(budget))`` incoming directions, each with the same set of
    ``ceil(budget / P_inc)`` reflection directions. With ``random=True`` both
    sets are seeded uniform random draws instead of Fibonacci lattices.
    """
    budget = _check_budget(budget)
    p_inc = math.isqrt(budget - 1) + 1
    q = -(-budget // p_inc)
    if random:
        rng = np.random.Generator(np.random.PCG64(seed))
        return MeasurementConfiguration.product(random_hemisphere(p_inc, rng), random_hemisphere(q, rng))
    return MeasurementConfiguration.product(fibonacci_hemisphere(p_inc), fibonacci_hemisphere(q))


def _balanced_split(count: int) -> tuple[int, int]:
    """Factor ``count = a * b`` with ``a`` the largest divisor not above sqrt(count / 2)."""
    a = max(1, math.isqrt(count // 2))
    while count % a:
        a -= 1
    return a, count // a


def _cone_directions(axis: Direction, count: int, half_angle: float) -> list[Direction]:
    """Equal-angle sub-grid inside the cone of ``half_angle`` around ``axis``.

    Nodes that would fall below the horizon are mirrored back above it, which
    only brings them closer to the (upper-hemisphere) axis.
    """
    if count == 0:
        return []
    n_beta, n_psi = _balanced_split(count)
    m = to_unit_vector(axis)
    if axis.theta == 0.0:
        t1, t2 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    else:
        ct, st = math.cos(axis.theta), math.sin(axis.theta)
        cp, sp = math.cos(axis.phi), math.sin(axis.phi)
        t1 = np.array([ct * cp, ct * sp, -st])
        t2 = np.array([-sp, cp, 0.0])
    out = []
    for j in range(n_beta):
        beta = (j + 0.5) * half_angle / n_beta
        for k in range(n_psi):
            psi = (k + 0.5) * TWO_PI / n_psi
            v = math.cos(beta) * m + math.sin(beta) * (math.cos(psi) * t1 + math.sin(psi) * t2)
            v[2] = abs(v[2])
            out.append(from_unit_vector(v / np.linalg.norm(v)))
    return out


def specular_grid(budget: int, concentration: float = 1.0, cone_half_angle: float = CONE_HALF_ANGLE) -> MeasurementConfiguration:
    """Equal-angle incoming grid with reflections concentrated near the mirror direction.

    Each incoming direction gets as many reflection nodes as the equispaced
    grid would use; a fraction ``1 - 1/(1 + concentration)`` of them sits in a
    cone around the mirror direction, the rest form a coarse equal-angle grid.
    ``budget == 1`` yields the single pair (normal, normal).
    """
    budget = _check_budget(budget)
    if not concentration > 0:
        raise ValueError("concentration must be positive")
    if budget == 1:
        return MeasurementConfiguration((NORMAL,), ((mirror_reflect(NORMAL),),))
    n_theta, n_phi = grid_resolution(budget)
    incoming = grid_directions(n_theta, n_phi)
    q = n_theta * n_phi
    reflections = []
    for wi in incoming:
        cone, coarse = specular_reflections(wi, q, concentration, cone_half_angle)
        # a cone node can land on a coarse node; keep the first occurrence
        reflections.append(tuple(dict.fromkeys(cone + coarse)))
    return MeasurementConfiguration(tuple(incoming), tuple(reflections))


def specular_reflections(wi: Direction, count: int, concentration: float = 1.0, cone_half_angle: float = CONE_HALF_ANGLE):
    """Reflection nodes for one incoming direction: ``(cone nodes, coarse nodes)``.

    ``round(count * (1 - 1/(1 + concentration)))`` nodes go into the cone
    around ``mirror_reflect(wi)``, the rest onto a coarse equal-angle grid.
    """
    n_cone = int(round(count * (1.0 - 1.0 / (1.0 + concentration))))
    n_cone = min(max(n_cone, 0), count)
    coarse = grid_directions(*_balanced_split(count - n_cone)) if count > n_cone else []
    return _cone_directions(mirror_reflect(wi), n_cone, cone_half_angle), coarse


def _random_pairs(rng, k):
    ti = np.arccos(rng.uniform(0.0, 1.0, k))
    pi_ = rng.uniform(0.0, TWO_PI, k)
    tr = np.arccos(rng.uniform(0.0, 1.0, k))
    pr = rng.uniform(0.0, TWO_PI, k)
    return np.column_stack([ti, pi_, tr, pr])


def adaptive_greedy(budget: int, measure, observed=None, seed: int = 0, oversample: int = 10, neighbors: int = 4) -> MeasurementConfiguration:
    """Greedy sequential design driven by local value variation.

    Starting from ``observed`` (a MeasurementSet) or, when that is empty, from
    ``uniform_sphere(max(8, budget // 4))`` measured through ``measure``, the
    candidate pair with the highest score

        (range of values over its ``neighbors`` nearest samples + 1e-12)
        * (distance to its nearest sample)

    is measured and added until the configuration holds ``budget`` pairs. The
    candidates are ``oversample * budget`` seeded uniform random pairs; exact
    score ties go to the lexicographically smallest ``(theta_i, phi_i, theta_r, phi_r)``.

    ``measure(pairs, offset)`` returns values for an ``(m, 4)`` array of pairs
    that will occupy positions ``offset .. offset + m - 1`` of the configuration.
    """
    budget = _check_budget(budget)
    if observed is not None and observed.n > 0:
        if budget < observed.n:
            raise ValueError(f"budget {budget} is smaller than the {observed.n} existing observations")
        pairs = np.array(observed.configuration.pairs)
        values = np.array(observed.values, dtype=float)
    else:
        if measure is None:
            raise ValueError("adaptive_greedy needs a measure callable")
        start = uniform_sphere(max(8, budget // 4))
        pairs = np.array(start.pairs)
        values = np.asarray(measure(pairs, 0), dtype=float)
    if len(pairs) >= budget:
        return MeasurementConfiguration.from_pairs(pairs)
    if measure is None:
        raise ValueError("adaptive_greedy needs a measure callable to add samples")

    rng = np.random.Generator(np.random.PCG64(seed))
    pool = _random_pairs(rng, oversample * budget)
    pool_vecs = pair_unit_vectors(pool)
    d = pair_distance_matrix(pool_vecs, pair_unit_vectors(pairs))
    k = min(neighbors, d.shape[1])
    order = np.argsort(d, axis=1, kind="stable")[:, :k]
    nn_idx = np.full((len(pool), neighbors), -1)
    nn_d = np.full((len(pool), neighbors), np.inf)
    nn_idx[:, :k] = order
    nn_d[:, :k] = np.take_along_axis(d, order, axis=1)
    used = np.zeros(len(pool), dtype=bool)

    pairs = list(map(tuple, pairs))
    values = list(values)

    def scores(rows):
        valid = nn_idx[rows] >= 0
        nbr = np.asarray(values)[np.where(valid, nn_idx[rows], 0)]
        hi = np.where(valid, nbr, -np.inf).max(axis=1)
        lo = np.where(valid, nbr, np.inf).min(axis=1)
        return (hi - lo + 1e-12) * nn_d[rows, 0]

    score = scores(slice(None))
    while len(pairs) < budget:
        best = np.flatnonzero(score == score.max())
        if len(best) > 1:
            sub = pool[best]
            best = best[np.lexsort((sub[:, 3], sub[:, 2], sub[:, 1], sub[:, 0]))]
        j = int(best[0])
        used[j] = True
        new = pool[j:j + 1]
        values.append(float(np.asarray(measure(new, len(pairs)), dtype=float)[0]))
        pairs.append(tuple(new[0]))
        # only candidates whose neighbor lists change need a new score
        dn = pair_distance_matrix(pool_vecs, pair_unit_vectors(new))[:, 0]
        rows = np.flatnonzero(dn < nn_d[:, -1])
        cat_d = np.column_stack([nn_d[rows], dn[rows]])
        cat_i = np.column_stack([nn_idx[rows], np.full(len(rows), len(pairs) - 1)])
        keep = np.argsort(cat_d, axis=1, kind="stable")[:, :neighbors]
        nn_d[rows] = np.take_along_axis(cat_d, keep, axis=1)
        nn_idx[rows] = np.take_along_axis(cat_i, keep, axis=1)
        score[rows] = scores(rows)
        score[used] = -np.inf
    return MeasurementConfiguration.from_pairs(np.array(pairs))


# -- strategies --------------------------------------------------------------

FAMILIES = {
    "equispaced_grid": {
        "defaults": {"n_theta": None, "n_phi": None},
        "doc": "equal-angle grid in (theta, phi), shared by incoming and reflection sets; "
        "resolution (n_theta, 2 n_theta) chosen minimal for the budget",
    },
    "uniform_sphere": {
        "defaults": {"random": False},
        "doc": "Fibonacci hemisphere lattices, ceil(sqrt(budget)) incoming x ceil(budget/P_inc) reflections; "
        "random=true uses seeded uniform draws",
    },
    "specular_grid": {
        "defaults": {"concentration": 1.0, "cone_half_angle": CONE_HALF_ANGLE},
        "doc": "equal-angle incoming grid; fraction 1 - 1/(1+concentration) of reflections in a cone "
        "around the mirror direction, rest on a coarse grid",
    },
    "adaptive_greedy": {
        "defaults": {"oversample": 10, "neighbors": 4},
        "doc": "greedy insertion from a 10x oversampled candidate pool, scored by local value range "
        "times distance to the nearest sample; needs measurements while building",
    },
}


@dataclass(frozen=True)
class SamplingStrategy:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    name: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown strategy family {self.family!r}; expected one of {sorted(FAMILIES)}")
        unknown = set(self.params) - set(FAMILIES[self.family]["defaults"])
        if unknown:
            raise ValueError(f"unknown parameters for {self.family}: {sorted(unknown)}")
        object.__setattr__(self, "params", dict(self.params))

    @property
    def label(self) -> str:
        return self.name or self.family

    @property
    def needs_measurements(self) -> bool:
        return self.family == "adaptive_greedy"

    def generate(self, budget: int, measure=None) -> MeasurementConfiguration:
        p = self.params
        if self.family == "equispaced_grid":
            return equispaced_grid(budget, **p)
        if self.family == "uniform_sphere":
            return uniform_sphere(budget, seed=self.seed, **p)
        if self.family == "specular_grid":
            return specular_grid(budget, **p)
        return adaptive_greedy(budget, measure, seed=self.seed, **p)

    def describe(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "seed": self.seed, "name": self.label}


def strategy_sequence(s: SamplingStrategy, budgets, measure=None) -> list[MeasurementConfiguration]:
    """Configurations for strictly ascending budgets, with nondecreasing sizes.

    ``measure`` is needed only for adaptive strategies (see ``adaptive_greedy``).
    """
    budgets = list(budgets)
    if not budgets:
        raise ValueError("budgets must be nonempty")
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ValueError(f"budgets must be strictly ascending, got {budgets}")
    configs = [s.generate(b, measure) for b in budgets]
    sizes = [c.n for c in configs]
    if any(n2 < n1 for n1, n2 in zip(sizes, sizes[1:])):
        raise AssertionError(f"strategy {s.label} produced shrinking configurations {sizes}")
    if any(n < b for n, b in zip(sizes, budgets)):
        raise AssertionError(f"strategy {s.label} returned fewer pairs than budgeted")
    return configs


def list_strategies() -> str:
    lines = []
    for fam, info in FAMILIES.items():
        defaults = ", ".join(f"{k}={v!r}" for k, v in info["defaults"].items())
        lines.append(f"{fam}\n  params: {defaults}\n  {info['doc']}")
    return "\n".join(lines) + "\n"
