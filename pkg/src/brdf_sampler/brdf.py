"""Analytic single-channel isotropic BRDF models.

Every model is an immutable dataclass whose ``__call__`` evaluates the BRDF
(units 1/sr) on broadcast arrays of angles ``(theta_i, phi_i, theta_r, phi_r)``.
``eval`` is the scalar form taking two :class:`~brdf_sampler.geometry.Direction`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import Direction, unit_vectors

# Clamp for cos(theta_i), cos(theta_r) and h.w_r before dividing.
GRAZING_EPS = 1e-9

_SUM_SLACK = 1e-12


class Brdf:
    """Interface shared by analytic models and fitted estimates."""

    family = "brdf"

    def __call__(self, theta_i, phi_i, theta_r, phi_r) -> np.ndarray:
        raise NotImplementedError

    def eval(self, wi: Direction, wr: Direction) -> float:
        return float(self(wi.theta, wi.phi, wr.theta, wr.phi))

    def eval_pairs(self, pairs) -> np.ndarray:
        """Evaluate on an ``(n, 4)`` array of ``(theta_i, phi_i, theta_r, phi_r)`` rows."""
        pairs = np.asarray(pairs, dtype=float)
        return self(pairs[:, 0], pairs[:, 1], pairs[:, 2], pairs[:, 3])

    @property
    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"family": self.family, "params": self.params}


def _broadcast_zero(theta_i, phi_i, theta_r, phi_r):
    return np.zeros(np.broadcast(theta_i, phi_i, theta_r, phi_r).shape)


def _check_unit(name, value, lo=0.0, hi=1.0):
    if not (lo <= value <= hi):
        raise ValueError(f"{name}={value} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class Lambertian(Brdf):
    albedo: float = 0.5
    family = "lambertian"

    def __post_init__(self):
        _check_unit("albedo", self.albedo)

    def __call__(self, theta_i, phi_i, theta_r, phi_r):
        return _broadcast_zero(theta_i, phi_i, theta_r, phi_r) + self.albedo / math.pi

    @property
    def params(self):
        return asdict(self)


@dataclass(frozen=True)
class Phong(Brdf):
    """Energy-normalized Phong: ``kd/pi + ks (n+2)/(2 pi) max(0, cos a)^n``.

    ``a`` is the angle between the outgoing direction and the mirror of the
    incoming direction.
    """

    kd: float = 0.3
    ks: float = 0.5
    exponent: float = 20.0
    family = "phong"

    def __post_init__(self):
        if self.kd < 0 or self.ks < 0 or self.exponent < 0:
            raise ValueError("Phong parameters must be nonnegative")
        if self.kd + self.ks > 1.0 + _SUM_SLACK:
            raise ValueError(f"kd + ks = {self.kd + self.ks} exceeds 1")

    def lobe_cosine(self, theta_i, phi_i, theta_r, phi_r):
        wi = unit_vectors(theta_i, phi_i)
        wr = unit_vectors(theta_r, phi_r)
        # dot(mirror(wi), wr) with mirror(x, y, z) = (-x, -y, z)
        return -wi[..., 0] * wr[..., 0] - wi[..., 1] * wr[..., 1] + wi[..., 2] * wr[..., 2]

    def __call__(self, theta_i, phi_i, theta_r, phi_r):
        diffuse = self.kd / math.pi
        if self.ks == 0.0:
            return _broadcast_zero(theta_i, phi_i, theta_r, phi_r) + diffuse
        c = np.maximum(self.lobe_cosine(theta_i, phi_i, theta_r, phi_r), 0.0)
        norm = (self.exponent + 2.0) / (2.0 * math.pi)
        return diffuse + self.ks * norm * c**self.exponent

    @property
    def params(self):
        return asdict(self)


@dataclass(frozen=True)
class CookTorrance(Brdf):
    """Cook-Torrance microfacet model.

    Beckmann distribution, Torrance-Sparrow shadowing/masking and Schlick's
    Fresnel approximation. Denominators are clamped at ``GRAZING_EPS``.
    """

    kd: float = 0.3
    ks: float = 0.6
    roughness: float = 0.3
    f0: float = 0.9
    family = "cook_torrance"

    def __post_init__(self):
        if self.kd < 0 or self.ks < 0:
            raise ValueError("kd and ks must be nonnegative")
        if self.kd + self.ks > 1.0 + _SUM_SLACK:
            raise ValueError(f"kd + ks = {self.kd + self.ks} exceeds 1")
        if not (0.0 < self.roughness <= 1.0):
            raise ValueError(f"roughness={self.roughness} outside (0, 1]")
        _check_unit("f0", self.f0)

    def terms(self, theta_i, phi_i, theta_r, phi_r):
        """Return ``(D, G, F, cos_i, cos_r, tan2_h, h_dot_r)`` with clamped cosines."""
        wi = unit_vectors(theta_i, phi_i)
        wr = unit_vectors(theta_r, phi_r)
        h = wi + wr
        hn = np.linalg.norm(h, axis=-1)
        degenerate = hn < 1e-9
        # antipodal horizon pairs have no half vector; the normal keeps eval finite
        h = np.where(degenerate[..., None], np.array([0.0, 0.0, 1.0]), h / np.where(degenerate, 1.0, hn)[..., None])

        cos_i = np.maximum(wi[..., 2], GRAZING_EPS)
        cos_r = np.maximum(wr[..., 2], GRAZING_EPS)
        cos_h = np.clip(h[..., 2], GRAZING_EPS, 1.0)
        h_dot_r = np.maximum(np.sum(h * wr, axis=-1), GRAZING_EPS)

        m2 = self.roughness**2
        cos_h2 = cos_h * cos_h
        tan2_h = (1.0 - cos_h2) / cos_h2
        D = np.exp(-tan2_h / m2) / (math.pi * m2 * cos_h2 * cos_h2)
        G = np.minimum(1.0, np.minimum(2.0 * cos_h * cos_r / h_dot_r, 2.0 * cos_h * cos_i / h_dot_r))
        F = self.f0 + (1.0 - self.f0) * (1.0 - h_dot_r) ** 5
        return D, G, F, cos_i, cos_r, tan2_h, h_dot_r

    def __call__(self, theta_i, phi_i, theta_r, phi_r):
        diffuse = self.kd / math.pi
        if self.ks == 0.0:
            return _broadcast_zero(theta_i, phi_i, theta_r, phi_r) + diffuse
        D, G, F, cos_i, cos_r, _, _ = self.terms(theta_i, phi_i, theta_r, phi_r)
        return diffuse + self.ks * D * G * F / (4.0 * cos_i * cos_r)

    @property
    def params(self):
        return asdict(self)


MODELS = {cls.family: cls for cls in (Lambertian, Phong, CookTorrance)}

# (lower, upper) bounds of each parameter, in constructor order
PARAM_BOUNDS = {
    "lambertian": {"albedo": (0.0, 1.0)},
    "phong": {"kd": (0.0, 1.0), "ks": (0.0, 1.0), "exponent": (0.0, 1e4)},
    "cook_torrance": {"kd": (0.0, 1.0), "ks": (0.0, 1.0), "roughness": (1e-3, 1.0), "f0": (0.0, 1.0)},
}


def make_brdf(family: str, **params) -> Brdf:
    try:
        cls = MODELS[family]
    except KeyError:
        raise ValueError(f"unknown BRDF family {family!r}; expected one of {sorted(MODELS)}") from None
    return cls(**params)


def eval_lambertian(p: Lambertian, wi: Direction, wr: Direction) -> float:
    return p.eval(wi, wr)


def eval_phong(p: Phong, wi: Direction, wr: Direction) -> float:
    return p.eval(wi, wr)


def eval_cook_torrance(p: CookTorrance, wi: Direction, wr: Direction) -> float:
    return p.eval(wi, wr)


def directional_hemispherical_reflectance(f: Brdf, wi: Direction, quad=None) -> float:
    """Cosine-weighted hemispherical integral of ``f(wi, .)``.

    ``quad`` is an :class:`~brdf_sampler.objectives.QuadratureSpec`; defaults to
    a 32-node product Gauss rule.
    """
    from .objectives import QuadratureSpec, hemisphere_nodes

    quad = quad or QuadratureSpec(rule="product_gauss", node_count=32)
    theta_r, phi_r, w = hemisphere_nodes(quad)
    vals = f(wi.theta, wi.phi, theta_r, phi_r)
    return float(np.sum(w * vals * np.cos(theta_r)))


@dataclass(frozen=True)
class BrdfClass:
    """A family of models with independent uniform parameter draws.

    ``ranges`` maps parameter names to ``(lo, hi)`` pairs or to a fixed
    scalar; parameters left out take the family's defaults.
    """

    family: str
    ranges: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in MODELS:
            raise ValueError(f"unknown BRDF family {self.family!r}")
        bounds = PARAM_BOUNDS[self.family]
        norm = {}
        for name, rng in self.ranges.items():
            if name not in bounds:
                raise ValueError(f"{self.family} has no parameter {name!r}")
            lo, hi = (rng, rng) if np.isscalar(rng) else (float(rng[0]), float(rng[1]))
            if lo > hi:
                raise ValueError(f"range for {name} is empty: [{lo}, {hi}]")
            norm[name] = (float(lo), float(hi))
        object.__setattr__(self, "ranges", norm)
        # every corner of the parameter box must be a valid model
        defaults = MODELS[self.family]()
        corner = {k: v[1] for k, v in norm.items()}
        lower = {k: v[0] for k, v in norm.items()}
        for params in (corner, lower):
            try:
                MODELS[self.family](**{**defaults.params, **params})
            except ValueError as exc:
                raise ValueError(f"parameter ranges violate {self.family} invariants: {exc}") from None

    def draw(self, k: int) -> list[Brdf]:
        if k < 1:
            raise ValueError("draw count must be at least 1")
        rng = np.random.Generator(np.random.PCG64(self.seed))
        names = list(self.ranges)
        lo = np.array([self.ranges[n][0] for n in names])
        hi = np.array([self.ranges[n][1] for n in names])
        u = rng.uniform(size=(k, len(names)))
        draws = lo + (hi - lo) * u
        cls = MODELS[self.family]
        base = cls().params
        return [cls(**{**base, **dict(zip(names, row.tolist()))}) for row in draws]

    def describe(self) -> dict:
        return {"family": self.family, "ranges": {k: list(v) for k, v in self.ranges.items()}, "seed": self.seed}


def draw_from_class(c: BrdfClass, k: int) -> list[Brdf]:
    return c.draw(k)
