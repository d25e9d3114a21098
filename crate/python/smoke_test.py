"""Smoke test for the mclaw extension module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import math
import tempfile
from pathlib import Path

import mclaw


def main():
    names = [name for name, _ in mclaw.list_scenarios()]
    assert "burgers-flat-circle" in names and len(names) >= 8

    cfg = mclaw.RunConfig.scenario("burgers-flat-circle")
    cfg.n = 64
    cfg.checks = ["mass", "linf", "entropy"]
    with tempfile.TemporaryDirectory() as out:
        result = mclaw.run(cfg, out_dir=out)
        assert (Path(out) / "series.csv").exists()
    assert result.passed, result.failed_checks
    assert result.times[0] == 0.0 and len(result.states) == len(result.times)
    assert max(result.report["mass_drift"]) <= 1e-12

    text = "[geometry]\nmetric = flat\n[flux]\nfamily = burgers\n[grid]\nn = 3\n"
    try:
        mclaw.RunConfig.parse(text)
    except ValueError as e:
        assert "n must be" in str(e)
    else:
        raise AssertionError("n = 3 accepted")

    # Zero flux on a growing circle: each cell keeps u V, so u scales by 1/(1 + t).
    solver = mclaw.Solver("expanding_circle(1, 1)", "zero", 32, t_end=1.0)
    u0 = solver.initial_state("1 + 0.5*sin(2*pi*x)")
    times, states = solver.run(u0, [0.0, 1.0])
    assert times == [0.0, 1.0]
    assert max(abs(a / 2 - b) for a, b in zip(u0, states[-1])) < 1e-12
    bounds = solver.bounds(u0, [0.0, 1.0])
    assert bounds["u_max"] == max(abs(v) for v in u0)

    table = mclaw.converge(mclaw.RunConfig.scenario("linear-advection"), [32, 64])
    assert math.isclose(table["orders"][0], 1.0, abs_tol=0.2)

    print("mclaw smoke test passed:", len(names), "scenarios,", result.steps, "steps")


if __name__ == "__main__":
    main()
