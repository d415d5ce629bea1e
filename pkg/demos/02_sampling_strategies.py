"""The four sampling-strategy families and how their sizes grow with the budget.

Run with ``python3 demos/02_sampling_strategies.py``.
"""
from brdf_sampler import Measurer, NoiseModel, Phong, SamplingStrategy, cost, strategy_sequence
from brdf_sampler.geometry import angular_distance, mirror_reflect
from brdf_sampler.objectives import CostSpec

budgets = [16, 64, 128, 256, 512]
truth = Phong(kd=0.2, ks=0.8, exponent=50)
measure = Measurer(truth, NoiseModel(), seed=0)

strategies = [
    SamplingStrategy("equispaced_grid"),
    SamplingStrategy("uniform_sphere"),
    SamplingStrategy("specular_grid", {"concentration": 3.0}),
    SamplingStrategy("adaptive_greedy", seed=0),
]


def near_mirror(config):
    """Share of pairs whose reflection lies within 22.5 degrees of the mirror direction."""
    hits = sum(
        angular_distance(wr, mirror_reflect(wi)) <= 0.3927
        for wi, refl in zip(config.incoming, config.reflections)
        for wr in refl
    )
    return hits / config.n


print(f"{'strategy':16s} " + " ".join(f"{b:>6d}" for b in budgets) + "   near-mirror share at 512")
for s in strategies:
    configs = strategy_sequence(s, budgets, measure)
    sizes = " ".join(f"{c.n:6d}" for c in configs)
    print(f"{s.label:16s} {sizes}   {near_mirror(configs[-1]):.3f}")

# Travel cost: angular distance a goniometer covers visiting pairs in order.
print("\ntravel cost at budget 256")
for s in strategies:
    c = s.generate(256, measure)
    print(f"{s.label:16s} {cost(CostSpec('travel'), c):9.1f} rad over {c.n} pairs")
