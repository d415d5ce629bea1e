"""Writing simulated measurements to the sample CSV format and reading them back.

Run with ``python3 demos/05_csv_roundtrip.py``. The same file can be
inspected with ``brdf-sampler ingest``.
"""
import tempfile
from pathlib import Path

from brdf_sampler import Estimator, NoiseModel, Phong, SamplingStrategy, simulate_measurements
from brdf_sampler.csvio import ingest, write_sample_csv
from brdf_sampler.estimation import fit
from brdf_sampler.objectives import DistSpec, dist

truth = Phong(kd=0.3, ks=0.5, exponent=20)
config = SamplingStrategy("specular_grid", {"concentration": 2.0}).generate(128)
m = simulate_measurements(truth, config, NoiseModel("relative_gaussian", sigma=0.02), seed=3)

with tempfile.TemporaryDirectory() as tmp:
    path = write_sample_csv(m, Path(tmp) / "phong.csv", sidecar=True)
    print(path.read_text().splitlines()[:3])
    back = ingest(path)

print("round trip equal:", back == m)
c = back.configuration
print(f"n={c.n}, {c.p_inc} incoming directions, reflections per direction {sorted(set(c.p_refl))}")
print("noise recorded in the sidecar:", back.provenance["original"]["noise"])

# Fit the ingested data and measure how far the fit is from the truth.
est = fit(Estimator("parametric_fit", {"family": "phong"}), back)
print("fitted:", {k: round(v, 3) for k, v in est.params.items()}, f"dist={dist(DistSpec(), est, truth):.4f}")
