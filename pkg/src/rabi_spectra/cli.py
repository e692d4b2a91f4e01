"""Command-line frontend.

Every subcommand builds its artifacts fully in memory and only then writes
them (temp file + rename), so a failed run leaves no partial output.

Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence or
solver inconsistency, 3 verification mismatch.
"""

from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import click
import numpy as np

from . import __version__
from . import one_photon as op
from . import oracle
from . import scan
from . import two_photon as tp
from .core import (
    BargmannIndex,
    ConvergenceError,
    DomainError,
    InconsistencyError,
    Model,
    ModelParams,
    PoleProximityError,
    beta,
    pole_lines_in_window,
)
from .output import csv_text, json_text, svg_plot, write_atomic

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED, EXIT_MISMATCH = 0, 1, 2, 3
FORMATS = ("csv", "json", "svg")
COMMANDS = ("gcurve", "spectrum", "crossings", "exceptional", "census", "verify")


class ValidationError(ValueError):
    """A configuration that fails a precondition."""


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    model: str | None = "1p"
    q: str | None = None
    omega: float = 1.0
    delta: float = 1.0
    epsilon: float | None = None
    k: float | None = None
    g: float | None = None
    g_range: list[float] | None = None
    e_window: list[float] | None = None
    N: int | None = None
    M: int | None = None
    n_range: list[int] = field(default_factory=lambda: [1, 10])
    m_range: list[int] = field(default_factory=lambda: [2, 20])
    kind: str | None = None
    index: int | None = None
    nmax: int | None = None
    tol: float = 1e-6
    points_per_unit: float = 2000.0
    samples: int = 2001
    oracle: bool = False
    out: str = "out"
    formats: list[str] = field(default_factory=lambda: ["csv"])

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        for key, value in data.items():
            _check_type(key, value)
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        return cls.from_dict(data)

    # -- derived values ---------------------------------------------------

    @property
    def model_enum(self) -> Model:
        return Model(self.model)

    @property
    def q_enum(self) -> BargmannIndex:
        return BargmannIndex.parse(self.q)

    def rule(self) -> scan.EpsilonRule:
        if self.k is not None:
            return scan.EpsilonRule.scaled(self.k)
        return scan.EpsilonRule.fixed(self.epsilon)

    def params(self, g: float | None = None) -> ModelParams:
        g = self.g if g is None else g
        return self.rule().params(self.omega, self.delta, g)

    def g_grid(self) -> np.ndarray:
        a, b, step = self.g_range
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        return a + step * np.arange(n)

    # -- validation -------------------------------------------------------

    def validate(self, command: str) -> None:
        """Check the preconditions of ``command`` before any computation."""
        need = _Checker(self)
        need.choice("model", self.model, ("1p", "2p"), allow_none=command == "census")
        need.positive("omega", self.omega)
        need.nonneg("delta", self.delta)
        need.positive("tol", self.tol)
        need.positive("points_per_unit", self.points_per_unit)
        for fmt_ in self.formats:
            need.choice("formats", fmt_, FORMATS)
        if self.model == "2p" or (command == "census" and self.q is not None):
            try:
                BargmannIndex.parse(self.q if self.q is not None else "1/4")
            except DomainError as exc:
                raise ValidationError(str(exc)) from exc
        if self.model == "2p" and self.q is None and command in ("gcurve", "spectrum", "crossings",
                                                                 "exceptional", "verify"):
            raise ValidationError("two-photon commands need --q")
        if self.epsilon is not None and self.k is not None:
            raise ValidationError("give either epsilon or k, not both")
        if self.k is not None:
            need.nonneg("k", self.k)
            if self.model != "2p":
                raise ValidationError("the eps = k beta rule applies to the two-photon model")
        if self.epsilon is not None:
            need.nonneg("epsilon", self.epsilon)
        if self.samples < 2:
            raise ValidationError("samples must be >= 2")
        if self.nmax is not None and self.nmax < 3:
            raise ValidationError("nmax must be >= 3")
        if self.g_range is not None:
            if len(self.g_range) != 3:
                raise ValidationError("g_range needs three numbers a:b:step")
            a, b, step = self.g_range
            if not (0 < a <= b and step > 0):
                raise ValidationError("g_range needs 0 < a <= b and step > 0")
        if self.e_window is not None:
            if len(self.e_window) != 2 or self.e_window[0] > self.e_window[1]:
                raise ValidationError("e_window needs a:b with a <= b")

        if command in ("gcurve", "verify"):
            need.present("g", self.g)
            need.positive("g", self.g)
            if self.epsilon is None and self.k is None:
                raise ValidationError(f"{command} needs --epsilon or --k")
            self._check_two_photon_g(self.g)
        elif command == "spectrum":
            need.present("g_range", self.g_range)
            if self.epsilon is None and self.k is None:
                raise ValidationError("spectrum needs --epsilon or --k")
            self._check_two_photon_g(self.g_range[1])
        elif command == "crossings":
            need.present("N", self.N)
            need.present("M", self.M)
            if self.N < 1 or self.M <= self.N:
                raise ValidationError("crossings need 1 <= N < M")
        elif command == "exceptional":
            need.present("kind", self.kind)
            kinds = op.EXCEPTIONAL_KINDS if self.model == "1p" else tp.EXCEPTIONAL_KINDS
            need.choice("kind", self.kind, kinds)
            if self.epsilon is None and self.k is None:
                raise ValidationError("exceptional needs --epsilon or --k")
            if self.kind == "merged":
                need.present("N", self.N)
                need.present("M", self.M)
            else:
                need.present("index", self.index)
                if self.index < 0:
                    raise ValidationError("index must be >= 0")
            if self.g_range is not None:
                self._check_two_photon_g(self.g_range[1])
        elif command == "census":
            for name, rng in (("n_range", self.n_range), ("m_range", self.m_range)):
                if len(rng) != 2 or rng[0] > rng[1]:
                    raise ValidationError(f"{name} needs lo:hi with lo <= hi")
            if self.n_range[0] < 1:
                raise ValidationError("n_range must start at N >= 1")

    def _check_two_photon_g(self, g: float) -> None:
        if self.model == "2p" and g > tp.g_max_scan(self.omega):
            raise ValidationError(
                f"two-photon couplings must stay below {tp.g_max_scan(self.omega)!r} "
                "(collapse neighbourhood is out of domain)")


_NUMBER = (int, float)
_FIELD_TYPES = {
    "model": (str,), "q": (str,), "kind": (str,), "out": (str,),
    "omega": _NUMBER, "delta": _NUMBER, "epsilon": _NUMBER, "k": _NUMBER, "g": _NUMBER,
    "tol": _NUMBER, "points_per_unit": _NUMBER,
    "N": (int,), "M": (int,), "index": (int,), "nmax": (int,), "samples": (int,),
    "oracle": (bool,),
}
_LIST_TYPES = {"g_range": _NUMBER, "e_window": _NUMBER, "n_range": (int,), "m_range": (int,),
               "formats": (str,)}
_NULLABLE = {"model", "q", "epsilon", "k", "g", "g_range", "e_window", "N", "M", "kind", "index", "nmax"}


def _check_type(key: str, value) -> None:
    if value is None:
        if key not in _NULLABLE:
            raise ValidationError(f"config key {key} may not be null")
        return
    if key in _LIST_TYPES:
        ok = isinstance(value, list) and all(
            isinstance(v, _LIST_TYPES[key]) and not isinstance(v, bool) for v in value)
    else:
        kinds = _FIELD_TYPES[key]
        ok = isinstance(value, kinds) and (bool in kinds or not isinstance(value, bool))
    if not ok:
        raise ValidationError(f"config key {key} has the wrong type: {value!r}")


class _Checker:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg

    def present(self, name, value):
        if value is None:
            raise ValidationError(f"missing required setting {name}")

    def positive(self, name, value):
        if value is not None and not value > 0:
            raise ValidationError(f"{name} must be positive")

    def nonneg(self, name, value):
        if value is not None and value < 0:
            raise ValidationError(f"{name} must be non-negative")

    def choice(self, name, value, options, allow_none=False):
        if value is None and allow_none:
            return
        if value not in options:
            raise ValidationError(f"{name} must be one of {list(options)}, got {value!r}")


# ---------------------------------------------------------------------------
# artifacts


@dataclass
class Outcome:
    files: dict = field(default_factory=dict)
    status: int = EXIT_OK
    message: str = ""


def _meta(cfg: RunConfig, command: str, extra: dict | None = None) -> dict:
    meta = {"command": command, "version": __version__}
    meta.update({k: v for k, v in cfg.to_dict().items() if k not in ("out", "formats")})
    if extra:
        meta.update(extra)
    return meta


def _emit(cfg: RunConfig, outcome: Outcome, stem: str, table: tuple | None = None,
          report: dict | None = None, svg: Callable[[], str] | None = None,
          extra_tables: dict | None = None) -> None:
    out = Path(cfg.out)
    if "csv" in cfg.formats:
        if table is not None:
            outcome.files[out / f"{stem}.csv"] = csv_text(*table)
        for name, tab in (extra_tables or {}).items():
            outcome.files[out / f"{name}.csv"] = csv_text(*tab)
    if "json" in cfg.formats and report is not None:
        outcome.files[out / f"{stem}.json"] = json_text(report)
    if "svg" in cfg.formats and svg is not None:
        outcome.files[out / f"{stem}.svg"] = svg()


def _window(cfg: RunConfig, params: ModelParams) -> tuple[float, float]:
    if cfg.e_window is not None:
        return tuple(cfg.e_window)
    return scan.default_window(cfg.model_enum, cfg.omega, float(params.epsilon), float(params.g))


def _poles(cfg: RunConfig, params: ModelParams, window) -> list[tuple[str, float]]:
    q = cfg.q_enum if cfg.model == "2p" else None
    return [(line.label(), e) for line, e in pole_lines_in_window(cfg.model_enum, params, window, q)]


def _g_values(cfg: RunConfig, params: ModelParams, energies: np.ndarray) -> np.ndarray:
    if cfg.model == "1p":
        return np.asarray(op.g1p_values(params, energies), dtype=float)
    return np.asarray(tp.g2p_values(cfg.q_enum, params, energies), dtype=float)


def _oracle_result(cfg: RunConfig, params: ModelParams) -> oracle.OracleResult:
    if cfg.model == "1p":
        return oracle.eigenvalues(oracle.build_1p(params, cfg.nmax or 200))
    return oracle.eigenvalues(oracle.build_2p(params, cfg.nmax or 400, cfg.q_enum))


def cmd_gcurve(cfg: RunConfig) -> Outcome:
    """Samples of G(E) at fixed coupling, its zeros, and optionally oracle levels."""
    cfg.validate("gcurve")
    params = cfg.params()
    window = _window(cfg, params)
    lo, hi = window
    energies = np.linspace(lo, hi, cfg.samples) if hi > lo else np.zeros(0)
    values = _g_values(cfg, params, energies) if energies.size else np.zeros(0)
    zeros = scan.spectrum_at(cfg.model_enum, params, window, cfg.q, cfg.points_per_unit)
    poles = _poles(cfg, params, window)
    outcome = Outcome()
    rows_zero = [[z] for z in zeros]
    columns_zero = ["E_zero"]
    report = {"window": list(window), "zeros": list(zeros), "poles": dict(poles),
              "unresolved": [list(u) for u in zeros.unresolved]}
    if cfg.oracle and hi > lo:
        res = _oracle_result(cfg, params)
        match = oracle.verify_zeros(zeros, res, cfg.tol, window, exclude=[e for _, e in poles])
        pairing = {z: (v, d) for z, v, d in match.matched}
        columns_zero += ["oracle", "abs_diff"]
        rows_zero = [[z, *pairing.get(z, (math.nan, math.nan))] for z in zeros]
        report["oracle"] = {"success": match.success, "worst": match.worst,
                            "unmatched_zeros": match.unmatched_zeros,
                            "unmatched_levels": match.unmatched_levels}
        if not match.success:
            outcome.status = EXIT_MISMATCH
    meta = _meta(cfg, "gcurve", {"poles": {k: v for k, v in poles}})
    table = (["E", "G"], zip(energies.tolist(), values.tolist()), meta)

    def plot():
        curve = [(e, math.asinh(v) if math.isfinite(v) else math.nan) for e, v in zip(energies, values)]
        marks = [(z, 0.0) for z in zeros]
        return svg_plot([{"points": curve, "style": "line", "label": "asinh G(E)"},
                         {"points": marks, "style": "marker", "label": "zeros"}],
                        title=f"G-function, {cfg.model}", xlabel="E", ylabel="asinh G")

    _emit(cfg, outcome, "gcurve", table, report, plot,
          {"gcurve_zeros": (columns_zero, rows_zero, meta)})
    if zeros.unresolved and outcome.status == EXIT_OK:
        outcome.status = EXIT_NONCONVERGED
    outcome.message = f"{len(zeros)} zeros in [{lo}, {hi}]"
    return outcome


def _norm(cfg: RunConfig, E: float, g: float, eps: float) -> float:
    b = float(beta(ModelParams(cfg.omega, cfg.delta, eps, g)))
    return float(tp.normalized_energy(E, cfg.q_enum, eps, b, cfg.omega))


def cmd_spectrum(cfg: RunConfig) -> Outcome:
    """Regular levels over a coupling grid plus tagged special points."""
    cfg.validate("spectrum")
    window = tuple(cfg.e_window) if cfg.e_window is not None else None
    records = scan.trace(cfg.model_enum, cfg.delta, cfg.rule(), cfg.g_grid(), window,
                         cfg.q if cfg.model == "2p" else None, cfg.omega,
                         points_per_unit=cfg.points_per_unit)
    two = cfg.model == "2p"
    cols = ["g", "epsilon", "level", "E"] + (["E_norm"] if two else [])
    rows, special_rows, gaps = [], [], []
    for rec in records:
        for i, e in enumerate(rec.energies):
            row = [rec.g, rec.epsilon, i, e]
            if two:
                row.append(_norm(cfg, e, rec.g, rec.epsilon))
            rows.append(row)
        for sp in rec.special:
            row = [sp.g, sp.epsilon, sp.energy, sp.tag, sp.kind, " & ".join(l.label() for l in sp.lines)]
            if two:
                row.append(_norm(cfg, sp.energy, sp.g, sp.epsilon))
            special_rows.append(row)
        gaps.extend({"g": rec.g, "E_lo": a, "E_hi": b} for a, b in rec.gaps)
    meta = _meta(cfg, "spectrum", {"window": list(window) if window else "default"})
    special_cols = ["g", "epsilon", "E", "tag", "kind", "lines"] + (["E_norm"] if two else [])
    outcome = Outcome()
    report = {"records": len(records), "levels": len(rows), "special": len(special_rows), "gaps": gaps}

    def plot():
        series = []
        for curve in scan.connect_levels(records):
            pts = [(g, _norm(cfg, e, g, cfg.params(g).epsilon) if two else e) for g, e in curve]
            series.append({"points": pts, "style": "line", "color": "#000000"})
        sp = [(r[0], r[-1] if two else r[2]) for r in special_rows]
        series.append({"points": sp, "style": "marker", "color": "#c0392b", "label": "special points"})
        return svg_plot(series, title=f"spectrum {cfg.model} ({cfg.rule().describe()})",
                        xlabel="g", ylabel="E'" if two else "E")

    _emit(cfg, outcome, "spectrum", (cols, rows, meta), report, plot,
          {"spectrum_special": (special_cols, special_rows, meta)})
    if gaps:
        outcome.status = EXIT_NONCONVERGED
    outcome.message = f"{len(records)} couplings, {len(special_rows)} special points"
    return outcome


def cmd_crossings(cfg: RunConfig) -> Outcome:
    """Degenerate crossings for one (N, M) pair."""
    cfg.validate("crossings")
    if cfg.model == "1p":
        pts = op.find_degenerate_1p(cfg.N, cfg.M, cfg.delta, cfg.omega)
        rows = [[p.N, p.M, "", p.g, p.epsilon, p.energy, p.residual_f, p.residual_c] for p in pts]
    else:
        pts = tp.find_degenerate_2p(cfg.q_enum, cfg.N, cfg.M, cfg.delta, cfg.omega)
        rows = [[p.N, p.M, str(p.q), p.g, p.epsilon, p.energy, p.residual_f, p.residual_c] for p in pts]
    cols = ["N", "M", "q", "g", "epsilon", "E", "residual_f", "residual_c"]
    outcome = Outcome()
    report = {"points": [dict(zip(cols, r)) for r in rows]}
    _emit(cfg, outcome, "crossings", (cols, rows, _meta(cfg, "crossings")), report)
    outcome.message = f"{len(rows)} crossings"
    return outcome


def cmd_exceptional(cfg: RunConfig) -> Outcome:
    """Zeros in g of one exceptional G-function."""
    cfg.validate("exceptional")
    omega = cfg.omega
    if cfg.model == "1p":
        g_int = tuple(cfg.g_range[:2]) if cfg.g_range else (0.0, 2.0 * omega)
        base = ModelParams(omega, cfg.delta, cfg.epsilon, g_int[0] or 1e-3 * omega)
        kind = cfg.kind
        if kind == "merged":
            pts = op.find_exceptional_1p(kind, base, N=cfg.N, M=cfg.M, g_interval=g_int)
        elif kind.endswith("A"):
            pts = op.find_exceptional_1p(kind, base, N=cfg.index, g_interval=g_int)
        else:
            pts = op.find_exceptional_1p(kind, base, M=cfg.index, g_interval=g_int)
    else:
        g_int = tuple(cfg.g_range[:2]) if cfg.g_range else (0.0, tp.g_max_scan(omega))
        base = ModelParams(omega, cfg.delta, cfg.epsilon or 0.0, max(g_int[0], 1e-3 * omega))
        pts = tp.find_exceptional_2p(cfg.kind, cfg.q_enum, base, cfg.index, g_int, cfg.k)
    cols = ["kind", "line", "g", "epsilon", "E"]
    rows = [[p.kind, p.line.label(), p.g, p.epsilon, p.energy] for p in pts]
    rejected = [[p.kind, p.line.label(), p.g, p.epsilon, p.energy] for p in getattr(pts, "rejected", [])]
    outcome = Outcome()
    report = {"points": [dict(zip(cols, r)) for r in rows],
              "rejected": [dict(zip(cols, r)) for r in rejected]}
    _emit(cfg, outcome, "exceptional", (cols, rows, _meta(cfg, "exceptional")), report)
    outcome.message = f"{len(rows)} exceptional points ({len(rejected)} rejected zeros)"
    return outcome


def cmd_census(cfg: RunConfig) -> Outcome:
    """Crossing counts over all (N, M) pairs; both models unless --model is given."""
    cfg.validate("census")
    models = [cfg.model] if cfg.model else ["1p", "2p"]
    outcome = Outcome()
    report, rows = {"models": {}}, []
    for model in models:
        q = (cfg.q or "1/4") if model == "2p" else None
        census = scan.enumerate_crossings(Model(model), cfg.delta, tuple(cfg.n_range), tuple(cfg.m_range),
                                          q, cfg.omega)
        report["models"][model] = {
            "q": str(census.q) if census.q else None,
            "total": census.total,
            "per_pair": {f"{n},{m}": c for (n, m), c in sorted(census.per_pair.items())},
            "anomalies": census.anomalies,
        }
        for p in census.points:
            rows.append([model, str(p.q) if model == "2p" else "", p.N, p.M, p.g, p.epsilon, p.energy])
        if census.anomalies:
            outcome.status = EXIT_NONCONVERGED
    cols = ["model", "q", "N", "M", "g", "epsilon", "E"]
    if "json" not in cfg.formats:
        cfg = dataclasses.replace(cfg, formats=list(cfg.formats) + ["json"])
    _emit(cfg, outcome, "census", (cols, rows, _meta(cfg, "census")), report)
    outcome.message = ", ".join(f"{m}: {report['models'][m]['total']}" for m in models)
    return outcome


def cmd_verify(cfg: RunConfig) -> Outcome:
    """G-zeros against the truncated-Fock oracle at one parameter point."""
    cfg.validate("verify")
    params = cfg.params()
    window = _window(cfg, params)
    zeros = scan.spectrum_at(cfg.model_enum, params, window, cfg.q, cfg.points_per_unit)
    res = _oracle_result(cfg, params)
    poles = _poles(cfg, params, window)
    match = oracle.verify_zeros(zeros, res, cfg.tol, window, exclude=[e for _, e in poles])
    report = {
        "pass": match.success,
        "worst_abs_diff": match.worst,
        "tol": cfg.tol,
        "window": list(window),
        "oracle_n_max": res.n_max,
        "converged_below": res.converged_below,
        "matched": [list(m) for m in match.matched],
        "unmatched_zeros": match.unmatched_zeros,
        "unmatched_levels": match.unmatched_levels,
    }
    outcome = Outcome(status=EXIT_OK if match.success else EXIT_MISMATCH)
    if "json" not in cfg.formats:
        cfg = dataclasses.replace(cfg, formats=list(cfg.formats) + ["json"])
    cols = ["E_zero", "oracle", "abs_diff"]
    _emit(cfg, outcome, "verify", (cols, match.matched, _meta(cfg, "verify")), report)
    outcome.message = f"{'PASS' if match.success else 'FAIL'}: worst |dE| = {match.worst:.3e}"
    return outcome


RUNNERS = {"gcurve": cmd_gcurve, "spectrum": cmd_spectrum, "crossings": cmd_crossings,
           "exceptional": cmd_exceptional, "census": cmd_census, "verify": cmd_verify}


def run(command: str, cfg: RunConfig) -> Outcome:
    """Compute, then write all artifacts atomically."""
    outcome = RUNNERS[command](cfg)
    write_atomic(outcome.files)
    return outcome


# ---------------------------------------------------------------------------
# click wiring


def _floats(text: str, count: int, name: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != count:
        raise click.BadParameter(f"expected {count} colon-separated numbers", param_hint=name)
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint=name) from exc


def _q_text(value: str | None) -> str | None:
    if value is None:
        return None
    return str(BargmannIndex.parse(value))


_OPTIONS = [
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                 help="JSON run configuration; flags override its values."),
    click.option("--model", type=click.Choice(["1p", "2p"])),
    click.option("--q", "q", type=click.Choice(["14", "34", "1/4", "3/4"])),
    click.option("--omega", type=float),
    click.option("--delta", type=float),
    click.option("--epsilon", type=float),
    click.option("--k", "k", type=float, help="bias rule eps = k*beta(g) (two-photon)"),
    click.option("--g", "g", type=float),
    click.option("--g-range", "g_range", help="a:b:step"),
    click.option("--e-window", "e_window", help="a:b"),
    click.option("--N", "N", type=int),
    click.option("--M", "M", type=int),
    click.option("--n-range", "n_range", help="lo:hi"),
    click.option("--m-range", "m_range", help="lo:hi"),
    click.option("--kind", type=str),
    click.option("--index", type=int),
    click.option("--nmax", type=int, help="oracle photon cutoff"),
    click.option("--tol", type=float),
    click.option("--points-per-unit", "points_per_unit", type=float),
    click.option("--samples", type=int),
    click.option("--oracle/--no-oracle", "oracle_flag", default=None),
    click.option("--out", type=click.Path(file_okay=False)),
    click.option("--format", "formats", help="comma list of csv,json,svg"),
]


def _with_options(fn):
    for opt in reversed(_OPTIONS):
        fn = opt(fn)
    return fn


def build_config(options: dict) -> tuple[RunConfig, set]:
    """Merge a config file with explicit flags; also returns the keys that were set explicitly."""
    path = options.pop("config_path", None)
    explicit: set = set()
    if path:
        raw = Path(path).read_text()
        cfg = RunConfig.from_json(raw)
        explicit |= set(json.loads(raw))
    else:
        cfg = RunConfig()
    data = cfg.to_dict()
    if options.get("g_range") is not None:
        options["g_range"] = _floats(options["g_range"], 3, "--g-range")
    if options.get("e_window") is not None:
        options["e_window"] = _floats(options["e_window"], 2, "--e-window")
    for name in ("n_range", "m_range"):
        if options.get(name) is not None:
            options[name] = [int(v) for v in _floats(options[name], 2, f"--{name.replace('_', '-')}")]
    if options.get("formats") is not None:
        options["formats"] = [f.strip() for f in options["formats"].split(",") if f.strip()]
    if options.get("q") is not None:
        options["q"] = _q_text(options["q"])
    flag = options.pop("oracle_flag", None)
    if flag is not None:
        options["oracle"] = flag
    for key, value in options.items():
        if value is not None:
            data[key] = value
            explicit.add(key)
    if data.get("q") is not None:
        try:
            data["q"] = _q_text(str(data["q"]))
        except DomainError as exc:
            raise ValidationError(str(exc)) from exc
    return RunConfig.from_dict(data), explicit


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def cli():
    """Spectra, level crossings and exceptional points of asymmetric Rabi models."""


def _make(command: str):
    @_with_options
    def body(**options):
        cfg, explicit = build_config(options)
        if command == "census" and "model" not in explicit:
            cfg = dataclasses.replace(cfg, model=None)
        outcome = run(command, cfg)
        click.echo(outcome.message)
        for path in outcome.files:
            click.echo(f"wrote {path}")
        if outcome.status:
            raise SystemExit(outcome.status)

    body.__doc__ = RUNNERS[command].__doc__
    return cli.command(command)(body)


for _name in COMMANDS:
    _make(_name)


_NO_ARGS = getattr(click.exceptions, "NoArgsIsHelpError", None) or getattr(
    click.exceptions, "NoArgsIsHelp", click.exceptions.UsageError)


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, prog_name="rabi-spectra", standalone_mode=False)
    except SystemExit as exc:
        return int(exc.code or 0)
    except _NO_ARGS as exc:
        if exc.ctx is not None and not isinstance(exc, click.exceptions.NoSuchOption):
            click.echo(exc.ctx.get_help())
            return EXIT_OK
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_INVALID
    except (click.UsageError, click.BadParameter) as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_INVALID
    except (ValidationError, DomainError, PoleProximityError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    except (ConvergenceError, InconsistencyError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NONCONVERGED
    except click.exceptions.Abort:
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
