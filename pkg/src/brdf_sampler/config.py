"""JSON experiment configuration: schema validation and plan construction."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .brdf import MODELS, BrdfClass, make_brdf
from .efficiency import ExperimentPlan
from .estimation import ESTIMATOR_KINDS, Estimator
from .measurement import NOISE_KINDS, NoiseModel
from .objectives import COST_KINDS, QUADRATURE_RULES, CostSpec, DistSpec, Majorant, QuadratureSpec
from .sampling import FAMILIES, SamplingStrategy


class ConfigError(ValueError):
    pass


def _obj(properties, required=()):
    return {"type": "object", "properties": properties, "required": list(required), "additionalProperties": False}


_INT = {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}
_POS_INT = {"type": "integer", "minimum": 1}

SCHEMA = _obj(
    {
        "brdf": _obj({"family": {"enum": sorted(MODELS)}, "params": {"type": "object"}}, ["family"]),
        "brdf_class": _obj(
            {
                "family": {"enum": sorted(MODELS)},
                "ranges": {
                    "type": "object",
                    "additionalProperties": {
                        "oneOf": [
                            {"type": "number"},
                            {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                        ]
                    },
                },
                "seed": _INT,
                "draws": {"type": "integer", "minimum": 2},
            },
            ["family", "draws"],
        ),
        "strategies": {
            "type": "array",
            "minItems": 1,
            "items": _obj(
                {
                    "family": {"enum": sorted(FAMILIES)},
                    "params": {"type": "object"},
                    "seed": _INT,
                    "name": {"type": "string", "pattern": r"^[A-Za-z0-9_.-]+$"},
                },
                ["family"],
            ),
        },
        "estimator": _obj({"kind": {"enum": list(ESTIMATOR_KINDS)}, "params": {"type": "object"}}, ["kind"]),
        "dist": _obj(
            {
                "p": {"oneOf": [{"type": "number", "minimum": 1}, {"const": "inf"}]},
                "quadrature": _obj(
                    {
                        "rule": {"enum": list(QUADRATURE_RULES)},
                        "node_count": _POS_INT,
                        "seed": _INT,
                        "cosine_weighting": {"type": "boolean"},
                    }
                ),
            }
        ),
        "cost": _obj(
            {
                "kind": {"enum": list(COST_KINDS)},
                "params": _obj({"weight": {"type": "array", "items": {"type": "number"}, "minItems": 1}}),
            },
            ["kind"],
        ),
        "majorant": _obj(
            {
                "kind": {"enum": ["constant", "linear", "table"]},
                "c": {"type": "number", "exclusiveMinimum": 0},
                "a": {"type": "number"},
                "b": {"type": "number"},
                "table": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                },
            },
            ["kind"],
        ),
        "admissibility": {"enum": ["uniform", "asymptotic"]},
        "budgets": {"type": "array", "minItems": 1, "items": _POS_INT},
        "noise": _obj(
            {
                "kind": {"enum": list(NOISE_KINDS)},
                "sigma": {"type": "number", "minimum": 0},
                "clamp_negative": {"type": ["boolean", "null"]},
            },
            ["kind"],
        ),
        "seed": _INT,
        "replicates": _POS_INT,
        "mode": {"enum": ["curve", "compare", "select"]},
        "margin": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "output_dir": {"type": "string"},
        "formats": {"type": "array", "items": {"enum": ["json", "csv"]}, "uniqueItems": True},
        "points": {"type": "boolean"},
    },
    ["strategies", "budgets"],
)


@dataclass
class ExperimentConfig:
    plan: ExperimentPlan
    mode: str
    output_dir: str = "out"
    formats: list = field(default_factory=lambda: ["json", "csv"])
    points: bool = True
    raw: dict = field(default_factory=dict)


def _path(err) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def validate(doc: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        if e.validator == "additionalProperties":
            unknown = sorted(set(e.instance) - set(e.schema.get("properties", {})))
            raise ConfigError(f"unknown key(s) {', '.join(map(repr, unknown))} at {_path(e)}")
        raise ConfigError(f"invalid value at {_path(e)}: {e.message}")
    if ("brdf" in doc) == ("brdf_class" in doc):
        raise ConfigError("exactly one of 'brdf' or 'brdf_class' is required")
    b = doc["budgets"]
    if any(y <= x for x, y in zip(b, b[1:])):
        raise ConfigError(f"'budgets' must be strictly ascending, got {b}")


def _unique_labels(strategies):
    labels, counts = [], {}
    explicit = [s.get("name") for s in strategies if s.get("name")]
    if len(set(explicit)) != len(explicit):
        raise ConfigError("strategy names must be unique")
    for s in strategies:
        base = s.get("name") or s["family"]
        counts[base] = counts.get(base, 0) + 1
        label = base if counts[base] == 1 else f"{base}_{counts[base]}"
        labels.append(re.sub(r"[^A-Za-z0-9_.-]", "_", label))
    return labels


def build(doc: dict, seed=None, replicates=None, output_dir=None) -> ExperimentConfig:
    validate(doc)
    try:
        return _build(doc, seed, replicates, output_dir)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _build(doc, seed, replicates, output_dir):
    if "brdf" in doc:
        truth = make_brdf(doc["brdf"]["family"], **doc["brdf"].get("params", {}))
        draws = 1
    else:
        bc = doc["brdf_class"]
        truth = BrdfClass(bc["family"], bc.get("ranges", {}), bc.get("seed", 0))
        draws = bc["draws"]

    labels = _unique_labels(doc["strategies"])
    strategies = [
        SamplingStrategy(s["family"], s.get("params", {}), s.get("seed", 0), label)
        for s, label in zip(doc["strategies"], labels)
    ]
    est = doc.get("estimator", {"kind": "idw"})
    estimator = Estimator(est["kind"], est.get("params", {}))

    d = doc.get("dist", {})
    p = d.get("p", 2.0)
    dist = DistSpec(math.inf if p == "inf" else float(p), QuadratureSpec(**d.get("quadrature", {})))

    c = doc.get("cost", {"kind": "cardinality"})
    costspec = CostSpec(c["kind"], c.get("params", {}).get("weight"))
    majorant = None
    if "majorant" in doc:
        mj = dict(doc["majorant"])
        if "table" in mj:
            mj["table"] = tuple((int(k), float(v)) for k, v in mj["table"])
        majorant = Majorant(**mj)

    noise = NoiseModel(**doc.get("noise", {"kind": "none"}))
    n_strat = len(strategies)
    mode = doc.get("mode") or ("curve" if n_strat == 1 else "compare" if n_strat == 2 else "select")
    if mode == "compare" and n_strat != 2:
        raise ConfigError(f"mode 'compare' needs exactly 2 strategies, got {n_strat}")
    if mode == "curve" and n_strat != 1:
        raise ConfigError(f"mode 'curve' needs exactly 1 strategy, got {n_strat}")

    plan = ExperimentPlan(
        truth=truth,
        strategies=strategies,
        budgets=doc["budgets"],
        estimator=estimator,
        dist=dist,
        noise=noise,
        seed=doc.get("seed", 0) if seed is None else seed,
        draws=draws,
        cost=costspec,
        majorant=majorant,
        admissibility=doc.get("admissibility", "uniform"),
        replicates=doc.get("replicates", 1) if replicates is None else replicates,
        margin=doc.get("margin", 0.05),
    )
    return ExperimentConfig(
        plan=plan,
        mode=mode,
        output_dir=output_dir or doc.get("output_dir", "out"),
        formats=doc.get("formats", ["json", "csv"]),
        points=doc.get("points", True),
        raw=doc,
    )


def load(path, **overrides) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return build(doc, **overrides)
