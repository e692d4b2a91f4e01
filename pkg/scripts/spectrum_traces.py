"""Trace regular spectra with their special points and write CSV + SVG per panel.

    python scripts/spectrum_traces.py --out results/traces
"""
import argparse
from pathlib import Path

import numpy as np

from rabi_spectra.core import Model
from rabi_spectra.output import csv_text, svg_plot, write_atomic
from rabi_spectra.scan import EpsilonRule, connect_levels, trace

PANELS = {
    "1p_delta1.5_eps1": dict(model=Model.ONE_PHOTON, delta=1.5, rule=EpsilonRule.fixed(1.0),
                             g=(0.02, 1.2), window=(-2.0, 4.0)),
    "1p_delta3_eps1": dict(model=Model.ONE_PHOTON, delta=3.0, rule=EpsilonRule.fixed(1.0),
                           g=(0.02, 1.2), window=(-2.0, 4.0)),
    "2p_q1-4_delta2_k1": dict(model=Model.TWO_PHOTON, q="1/4", delta=2.0, rule=EpsilonRule.scaled(1.0),
                              g=(0.01, 0.48), window=(-1.0, 4.0)),
    "2p_q1-4_delta2_k2": dict(model=Model.TWO_PHOTON, q="1/4", delta=2.0, rule=EpsilonRule.scaled(2.0),
                              g=(0.01, 0.48), window=(-1.0, 4.0)),
}


def run_panel(name: str, spec: dict, points: int, out: Path) -> list[Path]:
    grid = np.linspace(*spec["g"], points)
    records = trace(spec["model"], spec["delta"], spec["rule"], grid, spec["window"], q=spec.get("q"))
    levels = [(r.g, r.epsilon, e) for r in records for e in r.energies]
    specials = [(p.g, p.energy, p.epsilon, p.tag, p.kind) for r in records for p in r.special]
    series = [{"points": c, "style": "line", "color": "#333"} for c in connect_levels(records)]
    for tag, color in (("degenerate", "#c00"), ("exceptional", "#06c")):
        series.append({"points": [(s[0], s[1]) for s in specials if s[3] == tag],
                       "style": "marker", "color": color, "label": tag})
    meta = {"panel": name, "delta": spec["delta"], "rule": spec["rule"].describe(), "q": spec.get("q")}
    files = {
        out / f"{name}.csv": csv_text(["g", "epsilon", "E"], levels, meta),
        out / f"{name}_special.csv": csv_text(["g", "E", "epsilon", "tag", "kind"], specials, meta),
        out / f"{name}.svg": svg_plot(series, title=name, xlabel="g", ylabel="E", ylim=spec["window"]),
    }
    return write_atomic(files)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("results/traces"))
    parser.add_argument("--points", type=int, default=121)
    parser.add_argument("--panel", choices=sorted(PANELS), action="append")
    args = parser.parse_args()
    for name in args.panel or sorted(PANELS):
        for path in run_panel(name, PANELS[name], args.points, args.out):
            print("wrote", path)


if __name__ == "__main__":
    main()
