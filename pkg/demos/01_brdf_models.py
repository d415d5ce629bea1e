"""BRDF models: evaluation, reciprocity and the white-furnace check.

Run with ``python3 demos/01_brdf_models.py``.
"""
import math

import numpy as np

from brdf_sampler import CookTorrance, Direction, Lambertian, Phong, directional_hemispherical_reflectance, mirror_reflect

models = [Lambertian(0.7), Phong(kd=0.3, ks=0.6, exponent=25), CookTorrance(kd=0.3, ks=0.6, roughness=0.3, f0=0.9)]

# Values along the plane of incidence for light arriving at 40 degrees.
wi = Direction(math.radians(40), 0.0)
print("theta_r   " + "  ".join(f"{f.family:>13}" for f in models))
for deg in (0, 20, 40, 60, 80):
    wr = Direction(math.radians(deg), math.pi)
    print(f"{deg:7d}   " + "  ".join(f"{f.eval(wi, wr):13.5f}" for f in models))

# The specular models peak at the mirror direction.
print("\nat the mirror direction:", [round(f.eval(wi, mirror_reflect(wi)), 4) for f in models])

# Helmholtz reciprocity on random pairs.
rng = np.random.default_rng(0)
ti, tr = np.arccos(rng.uniform(size=(2, 1000)))
pi_, pr = rng.uniform(0, 2 * math.pi, size=(2, 1000))
for f in models:
    gap = np.max(np.abs(f(ti, pi_, tr, pr) - f(tr, pr, ti, pi_)))
    print(f"{f.family:13s} max reciprocity gap {gap:.1e}")

# Energy: reflected fraction of incoming light, never above 1 for kd + ks <= 1.
print("\ndirectional-hemispherical reflectance")
for deg in (0, 30, 60, 85):
    d = Direction(math.radians(deg), 0.0)
    print(f"theta_i={deg:2d}  " + "  ".join(f"{directional_hemispherical_reflectance(f, d):.4f}" for f in models))
