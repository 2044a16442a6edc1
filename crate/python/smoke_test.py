"""Smoke test for the pm25 extension module.

Build and install first:
    pip install --no-build-isolation -e crates/python
"""

import math
import tempfile
from pathlib import Path

import pm25


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL: {what}")
    print(f"ok: {what}")


def main():
    ds = pm25.Dataset.embedded()
    check(len(ds) == 37, "embedded dataset has 37 countries")
    check(ds.pm25("China", 2023) == 42.2, "China 2023 value")
    check(ds.pm25("Maldives", 2023) is None, "missing value stays None")
    check(pm25.Dataset.embedded("zero").pm25("Maldives", 2023) == 0.0, "zero fill")

    trends = pm25.regional_trends(ds)
    east = trends["cells"]["EastAsia"]["2023"]["mean"]
    check(abs(east - 28.085714285714) < 1e-9, "East Asia 2023 mean")

    check(abs(pm25.pearson([1, 2, 3], [3, 2, 1]) + 1) < 1e-12, "pearson")
    m = pm25.evaluate_forecasts([10, 20, 30], [12, 18, 33])
    check(m["rmse"] >= m["mae"] and 0 < m["r_squared"] <= 1, "metrics")

    report = pm25.run_study(ds, "cluster", seed=0)
    labels = {row[0]: row[4] for row in report["tables"][0]["rows"]}
    check(labels["Bangladesh"] == "High Pollution", "Bangladesh clustered High")
    check(report["summary"]["knee"] == 3, "elbow knee at 3")

    f = pm25.arima_forecast([30.0, 31.0, 32.5, 33.0, 34.2], horizon=1)
    check(len(f) == 1 and math.isfinite(f[0]), "ARIMA forecast")

    try:
        pm25.run_study(ds, "correlate-density")
    except pm25.DataInsufficiencyError as e:
        check("population density" in str(e), "density study reports insufficiency")
    else:
        raise SystemExit("FAIL: expected DataInsufficiencyError")

    with tempfile.TemporaryDirectory() as out:
        code, stdout, _ = pm25.run_cli(["cluster", "--embedded", "--out", out])
        check(code == 0 and stdout.startswith("cluster:"), "CLI cluster run")
        check((Path(out) / "manifest.json").is_file(), "manifest written")
        code, _, _ = pm25.run_cli(["correlate", "--embedded", "--out", out])
        check(code == 2, "CLI empty study exits 2")

    print("smoke test passed")


if __name__ == "__main__":
    main()
