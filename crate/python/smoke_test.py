#!/usr/bin/env python3
"""Smoke test for the cashrep_py extension module.

Builds nothing itself: run `cargo build -p cashrep-py --release` first, then
`python3 python/smoke_test.py`. The script loads the cdylib straight from
the cargo target directory.
"""

import importlib.machinery
import importlib.util
import math
import sys
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libcashrep_py.so",
        root / "target" / "debug" / "libcashrep_py.so",
    ]
    for path in candidates:
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("cashrep_py", str(path))
            spec = importlib.util.spec_from_loader("cashrep_py", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit(
        "libcashrep_py.so not found; run `cargo build -p cashrep-py --release` first"
    )


def check(label, ok, detail=""):
    status = "ok" if ok else "FAIL"
    print(f"  {label}: {status} {detail}")
    if not ok:
        sys.exit(1)


def main():
    m = load_module()
    root = Path(__file__).resolve().parent.parent

    print("cashrep_py smoke test")

    check("norm_cdf(0) == 0.5", m.norm_cdf(0.0) == 0.5)
    check(
        "norm_cdf(1.959964) ~ 0.975",
        abs(m.norm_cdf(1.959964) - 0.9750000009035576) < 1e-12,
    )

    d1, d2, delta, price = m.bs_quote(75.0, 0.0, 30.0, 0.03, 0.3, 2.0)
    check("bs_quote price ~ 46.817", abs(price - 46.81704037316996) < 1e-9, f"{price=}")
    check("bs_quote d2 identity", abs(d2 - (d1 - 0.3 * math.sqrt(2.0))) < 1e-12)

    r0 = m.capital_r(0.0, 0.12, 1.0, 1.0)
    check(
        "capital_r closed form",
        abs(r0 - (math.exp(0.24) - 1.0) / 0.24) < 1e-14,
        f"{r0=}",
    )

    scenario = m.Scenario.parse((root / "scenarios" / "example1.cfg").read_text())
    check("scenario parse", scenario.mode == "asset_replication" and scenario.steps == 365)

    rep = m.replicate(scenario)
    check(
        "replication ran",
        len(rep.cash[0]) == 366 and math.isfinite(rep.terminal_gap[0]),
        f"gap={rep.terminal_gap[0]:.4f}",
    )
    rep_again = m.replicate(scenario)
    check("replication deterministic", rep.cash[0] == rep_again.cash[0])
    other_seed = m.replicate(scenario.with_seed(scenario.seed + 1))
    check("seed changes paths", rep.prices[0] != other_seed.prices[0])

    excess_scenario = m.Scenario.parse((root / "scenarios" / "example3.cfg").read_text())
    exc = m.replicate_excess(excess_scenario)
    check(
        "excess tracks the claim",
        abs(exc.terminal_gap) < 0.05 * max(exc.target, 1.0),
        f"target={exc.target:.4f} gap={exc.terminal_gap:.2e}",
    )

    rows = m.converge(scenario, [50, 200, 800], 40)
    rels = [row[4] for row in rows]
    check("convergence improves", rels[0] > rels[2], f"{rels=}")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
