import json
import math
import os

import sdelab


def test_mean_curve_stationary():
    p = sdelab.LinearSdeParams(a=-2.0, b=10.0, c=10.0, d=10.0)
    # x0 = -b/a is the stationary mean
    assert sdelab.mean_curve(p, 5.0, 1.0) == 5.0
    assert abs(sdelab.mean_curve(p, 6.0, 1.0) - (5.0 + math.exp(-2.0))) < 1e-12


def test_exact_step_deterministic_reduction():
    p = sdelab.LinearSdeParams(a=-1.0, b=0.0, c=0.0, d=0.0)
    x = sdelab.exact_euler_step(p, 0.0, 2.0, 0.5, 0.3)
    assert abs(x - 2.0 * math.exp(-0.5)) < 1e-14


def test_noise_is_deterministic():
    a = sdelab.sample_increments(42, 7, 1.0, 0.25)
    b = sdelab.sample_increments(42, 7, 1.0, 0.25)
    assert a == b
    assert len(a) == 4


def test_tv_identical_is_zero():
    xs = [float(i) for i in range(100)]
    assert sdelab.tv_distance(xs, list(xs)) == 0.0


def test_error_series_runs():
    p = sdelab.LinearSdeParams(a=-2.0, b=10.0, c=1.0, d=1.0)
    out = sdelab.error_series(p, 5.0, 0.5, 0.05, 200, 1, scheme="milstein",
                              couple_factor=8)
    assert out["paths"] == 200
    assert out["failures"] == 0
    assert all(e >= 0 for e in out["strong_l1"])
    assert all(l2 >= l1 - 1e-12 for l1, l2 in zip(out["strong_l1"], out["strong_l2"]))


def test_run_config_json(tmp_path):
    prefix = os.path.join(str(tmp_path), "run")
    cfg = {
        "command": "errors",
        "params": {"a": -2.0, "b": 10.0, "c": 1.0, "d": 1.0},
        "x0": 5.0,
        "T": 0.5,
        "h": 0.05,
        "paths": 100,
        "seed": 3,
        "couple_factor": 8,
        "schemes": [{"kind": "euler"}],
        "out": prefix,
    }
    assert sdelab.run_config_json(json.dumps(cfg)) == 0
    assert os.path.exists(prefix + ".csv")
    assert os.path.exists(prefix + ".json")
    assert os.path.exists(prefix + ".manifest.json")
