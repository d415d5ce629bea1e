"""Simulated noisy measurement of a ground-truth BRDF on a configuration."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sampling import MeasurementConfiguration

NOISE_KINDS = ("none", "additive_gaussian", "relative_gaussian")
RNG_ALGORITHM = "numpy.Philox4x64-10/standard_normal"


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian measurement noise.

    ``clamp_negative=None`` picks the default for the kind: clamp for relative
    noise, leave additive noise unclamped so residuals stay unbiased.
    """

    kind: str = "none"
    sigma: float = 0.0
    clamp_negative: bool | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma={self.sigma} must be nonnegative")

    @property
    def clamps(self) -> bool:
        if self.clamp_negative is None:
            return self.kind == "relative_gaussian"
        return bool(self.clamp_negative)

    @property
    def is_exact(self) -> bool:
        return self.kind == "none" or self.sigma == 0.0

    def describe(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma, "clamp_negative": self.clamps}


def standard_normals(seed: int, start: int, count: int) -> np.ndarray:
    """Draws ``start .. start + count - 1`` of the seeded standard-normal stream.

    Draw ``k`` depends only on ``(seed, k)``, so a point's noise does not
    change with how the configuration is split into calls.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    if start:
        rng.standard_normal(start)
    return rng.standard_normal(count)


@dataclass(eq=False)
class MeasurementSet:
    """A configuration together with one observed value per pair.

    Equality compares configuration and values; provenance is informational.
    """

    configuration: MeasurementConfiguration
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if len(values) != self.configuration.n:
            raise ValueError(f"{len(values)} values for a configuration of {self.configuration.n} pairs")
        values.setflags(write=False)
        self.values = values

    @property
    def n(self) -> int:
        return self.configuration.n

    @property
    def pairs(self) -> np.ndarray:
        return self.configuration.pairs

    def __eq__(self, other):
        if not isinstance(other, MeasurementSet):
            return NotImplemented
        return self.configuration == other.configuration and np.array_equal(self.values, other.values)


class Measurer:
    """Stateless measurement oracle ``measure(pairs, offset)`` for one experiment."""

    def __init__(self, f, noise: NoiseModel, seed: int):
        self.f = f
        self.noise = noise
        self.seed = int(seed)

    def __call__(self, pairs, offset: int = 0) -> np.ndarray:
        pairs = np.asarray(pairs, dtype=float).reshape(-1, 4)
        truth = np.asarray(self.f.eval_pairs(pairs), dtype=float)
        nm = self.noise
        if nm.is_exact:
            values = truth.copy()
        else:
            eps = nm.sigma * standard_normals(self.seed, offset, len(pairs))
            values = truth + eps if nm.kind == "additive_gaussian" else truth * (1.0 + eps)
        if nm.clamps:
            values = np.maximum(values, 0.0)
        return values


def simulate_measurements(f, c: MeasurementConfiguration, nm: NoiseModel | None = None, seed: int = 0) -> MeasurementSet:
    nm = nm or NoiseModel()
    values = Measurer(f, nm, seed)(c.pairs, 0)
    describe = getattr(f, "describe", None)
    provenance = {
        "source": describe() if describe else repr(f),
        "noise": nm.describe(),
        "seed": int(seed),
        "rng": RNG_ALGORITHM,
    }
    return MeasurementSet(c, values, provenance)
