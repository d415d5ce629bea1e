import json

import numpy as np
import pytest

from brdf_sampler.brdf import CookTorrance, Phong
from brdf_sampler.csvio import SampleCsvError, dumps_measurements, ingest, loads_measurements, write_sample_csv
from brdf_sampler.geometry import Direction
from brdf_sampler.measurement import MeasurementSet, NoiseModel, simulate_measurements
from brdf_sampler.sampling import MeasurementConfiguration, equispaced_grid, uniform_sphere

HEADER = "theta_i,phi_i,theta_r,phi_r,value\n"


def test_round_trip_equispaced_144(tmp_path):
    m = simulate_measurements(Phong(), equispaced_grid(1, n_theta=3, n_phi=4), NoiseModel("additive_gaussian", 0.01), seed=4)
    path = write_sample_csv(m, tmp_path / "grid.csv")
    assert len(path.read_text().splitlines()) == 145
    back = ingest(path)
    assert back == m
    assert back.provenance["source"] == "ingested"


def test_sidecar_provenance(tmp_path):
    m = simulate_measurements(CookTorrance(), uniform_sphere(20), seed=2)
    path = write_sample_csv(m, tmp_path / "s.csv", sidecar=True)
    back = ingest(path)
    assert back.provenance["original"] == json.loads(json.dumps(m.provenance))


def test_hand_built_groups():
    rows = []
    incoming = [(0.1, 0.0), (0.2, 1.0), (0.3, 2.0)]
    for (ti, pi_), k in zip(incoming, (2, 3, 4)):
        rows += [f"{ti},{pi_},{0.1 * (j + 1)},{0.5},{j}" for j in range(k)]
    m = loads_measurements(HEADER + "\n".join(rows) + "\n")
    assert m.n == 9 and m.configuration.p_inc == 3 and m.configuration.p_refl == [2, 3, 4]


def test_interleaved_rows_grouped_by_first_appearance():
    text = HEADER + "0.2,0,0.1,0,1\n0.1,0,0.1,0,2\n0.2,0,0.3,0,3\n"
    m = loads_measurements(text)
    assert [d.theta for d in m.configuration.incoming] == [0.2, 0.1]
    np.testing.assert_array_equal(m.values, [1, 3, 2])


@pytest.mark.parametrize(
    "body, line",
    [
        ("0.1,0,0.1,0,1\n2.0,0,0.1,0,1\n", 3),
        ("0.1,0,0.1,0,1\n0.1,0,0.1\n", 3),
        ("0.1,0,abc,0,1\n", 2),
        ("0.1,0,0.1,0,1\n0.1,0,0.1,0,5\n", 3),
        ("0.1,7.0,0.1,0,1\n", 2),
        ("0.1,0,0.1,0,nan\n", 2),
    ],
)
def test_malformed_rows_report_line(body, line):
    with pytest.raises(SampleCsvError) as exc:
        loads_measurements(HEADER + body)
    assert exc.value.line == line and f"line {line}" in str(exc.value)


def test_bad_header_and_empty():
    with pytest.raises(SampleCsvError):
        loads_measurements("a,b,c,d,e\n0,0,0,0,0\n")
    with pytest.raises(SampleCsvError):
        loads_measurements("")
    with pytest.raises(SampleCsvError):
        loads_measurements(HEADER)


def test_serialization_is_lossless():
    c = MeasurementConfiguration((Direction(0.1, 0.2),), ((Direction(1 / 3, 2 / 7),),))
    m = MeasurementSet(c, [np.nextafter(0.1, 1.0)])
    assert loads_measurements(dumps_measurements(m)) == m
