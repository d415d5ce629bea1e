"""Choosing a strategy for a whole class of materials under a cost cap.

Draws Phong materials with random glossiness, averages errors over the
draws and picks the best admissible strategy at each budget.

Run with ``python3 demos/04_class_selection.py``.
"""
from brdf_sampler import BrdfClass, Estimator, ExperimentPlan, Majorant, SamplingStrategy, select_best_strategy

plan = ExperimentPlan(
    truth=BrdfClass("phong", {"kd": (0.1, 0.3), "ks": (0.4, 0.7), "exponent": (5.0, 80.0)}, seed=1),
    draws=8,
    strategies=[
        SamplingStrategy("equispaced_grid"),
        SamplingStrategy("uniform_sphere"),
        SamplingStrategy("specular_grid", {"concentration": 3.0}),
    ],
    budgets=[64, 128, 256],
    estimator=Estimator("idw"),
    # cardinality cost against C_max(n) = 1.5 n: every strategy here is admissible
    majorant=Majorant("linear", a=1.5, b=0.0),
)
res = select_best_strategy(plan)

for label, curve in res.curves.items():
    print(f"{label:16s} " + "  ".join(f"{p.budget}: {p.error:.4f}±{p.stderr:.4f}" for p in curve))
print("excluded:", res.excluded or "none")
for w in res.winners:
    print(f"budget {w['budget']:4d}: {w['strategy']}")
