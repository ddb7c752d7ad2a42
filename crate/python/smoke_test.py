#!/usr/bin/env python3
"""Import the compiled extension and spot-check it end to end.

Build first:  cargo build -p mimo-lab-python --release
Then run:     python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libmimo_lab_py.so", "mimo_lab_py.so", "libmimo_lab_py.dylib")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("extension not built; run `cargo build -p mimo-lab-python --release` first")
    # Python wants the module file named exactly mimo_lab_py.so.
    stage = Path(tempfile.mkdtemp(prefix="mimo_lab_py_"))
    shutil.copy2(built, stage / "mimo_lab_py.so")
    sys.path.insert(0, str(stage))
    import mimo_lab_py

    return mimo_lab_py


def approx(value, expected, rel):
    assert math.isfinite(value), f"non-finite value {value}"
    assert abs(value - expected) <= rel * abs(expected), (
        f"{value} not within {rel:.1%} of {expected}"
    )


def main():
    lab = load_module()

    # Closed forms.
    approx(lab.sinr_mf(100, 10, 10.0), 5.263157894736842, 1e-12)
    approx(lab.sinr_zf(100, 10, 10.0), 9.0, 1e-12)
    approx(lab.error_factor(1.0, 20.0), 0.872296, 1e-4)
    approx(lab.error_factor(1.0, 20.0, exact=False), 0.879712, 1e-4)
    approx(lab.sinr_mf_impaired(100, 10, 10.0, 1.0, 20.0), 4.59103, 1e-4)
    approx(lab.rate_from_sinr(1.0), 1.0, 1e-12)

    # Rules of thumb.
    assert lab.antennas_for_3db("mf", 10, 10.0) == 90
    assert lab.antennas_for_3db("zf", 10, 10.0) == 20
    assert lab.antennas_for_3db("mf", 10, 10.0, 1.0, 20.0) == 119

    # Bad input surfaces as ValueError.
    try:
        lab.sinr_zf(10, 10, 10.0)
    except ValueError:
        pass
    else:
        raise AssertionError("sinr_zf(10, 10, ...) should have raised")

    # A small Monte Carlo run tracks the closed form and is reproducible.
    scenario = lab.Scenario(50, 5, 10.0, realizations=400, seed=3)
    report = lab.estimate_rates(scenario)
    analytic = 5 * lab.rate_from_sinr(lab.sinr_mf(50, 5, 10.0))
    approx(report.sum_rate, analytic, 0.05)
    assert len(report.per_user_rate) == 5
    assert report.sum_rate_stderr > 0.0
    assert report.realizations == 400
    again = lab.estimate_rates(scenario)
    assert again.sum_rate == report.sum_rate, "same seed must reproduce bitwise"

    sinrs = lab.expected_sinr(scenario)
    assert len(sinrs) == 5
    approx(sum(sinrs) / 5, lab.sinr_mf(50, 5, 10.0), 0.10)

    # Config documents run end to end.
    csv, notes, failures = lab.sweep_csv(
        "M = 50\nK = 5\nsnr_t_db = 10\nmodel = iid\nprecoder = mf\n"
        "realizations = 100\nseed = 1\nsweep = M\nvalues = 25,50\n"
    )
    lines = csv.strip().split("\n")
    assert lines[0].startswith("model,precoder,M,K,")
    assert len(lines) == 5, csv  # header + (analytic, mc) per antenna count
    assert not failures, failures
    assert not notes, notes

    print("smoke test: PASS")


if __name__ == "__main__":
    main()
