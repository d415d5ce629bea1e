"""Estimators turning a MeasurementSet into an evaluatable BRDF.

Three kinds are available:

``nearest_neighbor``
    value of the closest sample under the product angular metric
    ``d = sqrt(ang(wi, wi')**2 + ang(wr, wr')**2)``.
``idw``
    inverse-distance weighting over the ``k = min(16, n)`` nearest samples.
``parametric_fit``
    bounded damped least squares (Levenberg-Marquardt) of an analytic family.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .brdf import MODELS, PARAM_BOUNDS, Brdf, CookTorrance, Phong
from .geometry import Direction, pair_distance_matrix, pair_unit_vectors

ESTIMATOR_KINDS = ("nearest_neighbor", "idw", "parametric_fit")
EXACT_HIT = 1e-12


class FitWarning(UserWarning):
    """Raised (as a warning) when a parametric fit hits its iteration limit."""


@dataclass(frozen=True)
class Estimator:
    kind: str = "idw"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        p = dict(self.params)
        allowed = {
            "nearest_neighbor": set(),
            "idw": {"power", "neighbors"},
            "parametric_fit": {"family", "max_iter"},
        }[self.kind]
        unknown = set(p) - allowed
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        if self.kind == "idw":
            p.setdefault("power", 2.0)
            p.setdefault("neighbors", 16)
            if not p["power"] > 0:
                raise ValueError("idw power must be positive")
            if int(p["neighbors"]) < 1:
                raise ValueError("idw neighbor count must be at least 1")
        if self.kind == "parametric_fit":
            p.setdefault("family", "phong")
            p.setdefault("max_iter", 200)
            if p["family"] not in MODELS:
                raise ValueError(f"unknown fit family {p['family']!r}")
            if int(p["max_iter"]) < 1:
                raise ValueError("fit iteration limit must be at least 1")
        object.__setattr__(self, "params", p)

    def describe(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


class TabulatedBrdf(Brdf):
    """BRDF defined by stored samples and an interpolation rule.

    ``rule`` is ``"nearest"`` or ``"idw"``. Evaluating at a stored pair
    returns the stored value exactly under both rules.
    """

    family = "tabulated"

    def __init__(self, measurements, rule="nearest", power=2.0, neighbors=16):
        if measurements.n < 1:
            raise ValueError("cannot tabulate an empty measurement set")
        if rule not in ("nearest", "idw"):
            raise ValueError(f"unknown interpolation rule {rule!r}")
        self.measurements = measurements
        self.rule = rule
        self.power = float(power)
        self.neighbors = min(int(neighbors), measurements.n)
        self._vecs = pair_unit_vectors(measurements.pairs)
        self._values = np.asarray(measurements.values, dtype=float)

    @property
    def params(self):
        p = {"rule": self.rule, "n": self.measurements.n}
        if self.rule == "idw":
            p.update(power=self.power, neighbors=self.neighbors)
        return p

    def _interpolate(self, query):
        d = pair_distance_matrix(query, self._vecs)
        vals = self._values
        if self.rule == "nearest":
            return vals[np.argmin(d, axis=1)]
        k = self.neighbors
        if k < d.shape[1]:
            idx = np.argpartition(d, k - 1, axis=1)[:, :k]
        else:
            idx = np.broadcast_to(np.arange(d.shape[1]), d.shape)
        dk = np.take_along_axis(d, idx, axis=1)
        vk = vals[idx]
        w = 1.0 / (dk**self.power + 1e-12)
        out = np.sum(w * vk, axis=1) / np.sum(w, axis=1)
        # exact-hit rule: a query within 1e-12 of a sample returns that sample's value
        nearest = np.argmin(dk, axis=1)
        dmin = dk[np.arange(len(dk)), nearest]
        hit = dmin < EXACT_HIT
        out[hit] = vk[np.arange(len(vk)), nearest][hit]
        return out

    def __call__(self, theta_i, phi_i, theta_r, phi_r):
        arrays = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (theta_i, phi_i, theta_r, phi_r)))
        shape = arrays[0].shape
        query = np.column_stack([a.ravel() for a in arrays])
        out = np.empty(len(query))
        chunk = 4096
        for s in range(0, len(query), chunk):
            out[s:s + chunk] = self._interpolate(query[s:s + chunk])
        return out.reshape(shape)


class ParametricEstimate(Brdf):
    """An analytic model recovered by least squares, with fit diagnostics."""

    def __init__(self, model, converged, iterations, grad_norm, sse):
        self.model = model
        self.family = model.family
        self.converged = bool(converged)
        self.iterations = int(iterations)
        self.grad_norm = float(grad_norm)
        self.sse = float(sse)

    def __call__(self, theta_i, phi_i, theta_r, phi_r):
        return self.model(theta_i, phi_i, theta_r, phi_r)

    @property
    def params(self):
        return self.model.params

    def describe(self):
        return {
            "family": self.family,
            "params": self.params,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
        }


# -- residual models with analytic Jacobians ---------------------------------


def model_jacobian(family: str, x, pairs):
    """Values and Jacobian of a model family w.r.t. its parameter vector ``x``.

    ``x`` is ordered as in ``PARAM_BOUNDS[family]``. Returns ``(f, J)`` with
    ``f`` of shape ``(n,)`` and ``J`` of shape ``(n, len(x))``.
    """
    pairs = np.asarray(pairs, dtype=float)
    ti, pi_, tr, pr = pairs.T
    n = len(pairs)
    if family == "lambertian":
        (rho,) = x
        return np.full(n, rho / math.pi), np.full((n, 1), 1.0 / math.pi)
    if family == "phong":
        kd, ks, ns = x
        c = np.maximum(Phong(0.0, 0.0, 0.0).lobe_cosine(ti, pi_, tr, pr), 0.0)
        cn = c**ns
        norm = (ns + 2.0) / (2.0 * math.pi)
        logc = np.log(np.where(c > 0, c, 1.0))
        f = kd / math.pi + ks * norm * cn
        J = np.column_stack([
            np.full(n, 1.0 / math.pi),
            norm * cn,
            ks * cn * (1.0 / (2.0 * math.pi) + norm * logc),
        ])
        return f, J
    if family == "cook_torrance":
        kd, ks, m, f0 = x
        D, G, F, cos_i, cos_r, tan2_h, h_dot_r = CookTorrance(0.0, 1.0, m, f0).terms(ti, pi_, tr, pr)
        base = G / (4.0 * cos_i * cos_r)
        spec = D * F * base
        dD_dm = D * (2.0 * tan2_h / m**3 - 2.0 / m)
        dF_df0 = 1.0 - (1.0 - h_dot_r) ** 5
        f = kd / math.pi + ks * spec
        J = np.column_stack([
            np.full(n, 1.0 / math.pi),
            spec,
            ks * dD_dm * F * base,
            ks * D * dF_df0 * base,
        ])
        return f, J
    raise ValueError(f"unknown family {family!r}")


def _project(family, x, lo, hi):
    x = np.clip(x, lo, hi)
    if family in ("phong", "cook_torrance") and x[0] + x[1] > 1.0:
        # Euclidean projection of (kd, ks) onto kd + ks <= 1 within the unit box
        excess = 0.5 * (x[0] + x[1] - 1.0)
        kd, ks = x[0] - excess, x[1] - excess
        if kd < 0:
            kd, ks = 0.0, 1.0
        elif ks < 0:
            kd, ks = 1.0, 0.0
        x[0], x[1] = kd, ks
    return x


def damped_least_squares(residual_jac, x0, lower, upper, project=None, max_iter=200, gtol=1e-6):
    """Bounded Levenberg-Marquardt with Marquardt diagonal scaling.

    ``residual_jac(x)`` returns ``(r, J)``. Steps are projected onto the
    feasible set; convergence means the projected gradient of ``0.5 |r|^2``
    has norm at most ``gtol``.

    Returns ``(x, converged, iterations, grad_norm, sse)``.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    project = project or (lambda x: np.clip(x, lower, upper))
    x = project(np.array(x0, dtype=float))
    r, J = residual_jac(x)
    sse = float(r @ r)
    lam = 1e-3
    gnorm = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        g = J.T @ r
        gnorm = float(np.linalg.norm(x - project(x - g)))
        if gnorm <= gtol:
            return x, True, it - 1, gnorm, sse
        A = J.T @ J
        diag = np.maximum(np.diag(A), 1e-12 * max(1.0, float(np.max(np.diag(A)))))
        improved = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = project(x + step)
            r_new, J_new = residual_jac(x_new)
            sse_new = float(r_new @ r_new)
            if sse_new < sse:
                x, r, J, sse = x_new, r_new, J_new, sse_new
                lam = max(lam / 10.0, 1e-12)
                improved = True
                break
            lam *= 10.0
        if not improved:
            # no descent possible at working precision
            g = J.T @ r
            gnorm = float(np.linalg.norm(x - project(x - g)))
            return x, gnorm <= gtol, it, gnorm, sse
    g = J.T @ r
    gnorm = float(np.linalg.norm(x - project(x - g)))
    return x, gnorm <= gtol, it, gnorm, sse


_LINE_SEARCH = {
    "phong": np.geomspace(1.0, 256.0, 8),
    "cook_torrance": np.geomspace(0.05, 1.0, 8),
}


def initial_guess(family, pairs, values):
    """Deterministic starting point for a parametric fit.

    ``kd = clip(pi * mean(values), 0, 1)``, ``ks = (1 - kd) / 2``; the Phong
    exponent or Cook-Torrance roughness comes from an 8-point line search
    with the other parameters held at their initial values (``f0 = 0.5``).
    """
    kd = float(np.clip(math.pi * np.mean(values), 0.0, 1.0))
    if family == "lambertian":
        return np.array([kd])
    ks = max(0.0, 1.0 - kd) / 2.0
    best, best_sse = None, np.inf
    for s in _LINE_SEARCH[family]:
        x = np.array([kd, ks, s]) if family == "phong" else np.array([kd, ks, s, 0.5])
        f, _ = model_jacobian(family, x, pairs)
        sse = float(np.sum((f - values) ** 2))
        if sse < best_sse:
            best, best_sse = x, sse
    return best


def parametric_fit(family, measurements, max_iter=200) -> ParametricEstimate:
    bounds = PARAM_BOUNDS[family]
    names = list(bounds)
    if measurements.n < len(names):
        raise ValueError(f"{family} fit needs at least {len(names)} measurements, got {measurements.n}")
    lo = np.array([b[0] for b in bounds.values()])
    hi = np.array([b[1] for b in bounds.values()])
    pairs = measurements.pairs
    values = np.asarray(measurements.values, dtype=float)

    def residual_jac(x):
        f, J = model_jacobian(family, x, pairs)
        return f - values, J

    x0 = initial_guess(family, pairs, values)
    x, converged, iters, gnorm, sse = damped_least_squares(
        residual_jac, x0, lo, hi, project=lambda v: _project(family, v, lo, hi), max_iter=max_iter
    )
    if not converged:
        warnings.warn(
            f"{family} fit stopped after {iters} iterations with gradient norm {gnorm:.3g}",
            FitWarning,
            stacklevel=2,
        )
    model = MODELS[family](**dict(zip(names, x.tolist())))
    return ParametricEstimate(model, converged, iters, gnorm, sse)


def fit(e: Estimator, m) -> Brdf:
    if m.n < 1:
        raise ValueError("cannot fit an empty measurement set")
    if e.kind == "nearest_neighbor":
        return TabulatedBrdf(m, "nearest")
    if e.kind == "idw":
        return TabulatedBrdf(m, "idw", power=e.params["power"], neighbors=e.params["neighbors"])
    return parametric_fit(e.params["family"], m, max_iter=int(e.params["max_iter"]))


def evaluate_estimate(g: Brdf, wi: Direction, wr: Direction) -> float:
    return g.eval(wi, wr)
