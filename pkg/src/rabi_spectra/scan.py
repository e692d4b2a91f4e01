"""Sweeps over the coupling: regular spectra, tagged special points and crossing censuses."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import one_photon as op
from . import two_photon as tp
from . import oracle
from .core import (
    BargmannIndex,
    DomainError,
    InconsistencyError,
    Kind,
    Model,
    ModelParams,
    PoleLine,
    RootList,
    RootSearchConfig,
    beta,
    bracket_roots,
    pole_energy,
    pole_lines_in_window,
)

THREADS_ENV = "RABI_SPECTRA_THREADS"
SPECIAL_TOL = 1e-8
MAX_POLE_INDEX = 60


def worker_count() -> int:
    """Worker threads allowed by RABI_SPECTRA_THREADS (default 1)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise DomainError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise DomainError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map over at most ``worker_count()`` threads."""
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# bias rules


@dataclass(frozen=True)
class EpsilonRule:
    """Fixed bias, or eps = k * beta(g) re-evaluated at every coupling (two-photon only)."""

    epsilon: float | None = None
    k: float | None = None

    def __post_init__(self):
        if (self.epsilon is None) == (self.k is None):
            raise DomainError("give exactly one of epsilon and k")
        if self.epsilon is not None and self.epsilon < 0:
            raise DomainError("bias is canonicalized to eps >= 0")
        if self.k is not None and self.k < 0:
            raise DomainError("k must be >= 0")

    @classmethod
    def fixed(cls, epsilon: float) -> "EpsilonRule":
        return cls(epsilon=float(epsilon))

    @classmethod
    def scaled(cls, k: float) -> "EpsilonRule":
        return cls(k=float(k))

    @property
    def is_scaled(self) -> bool:
        return self.k is not None

    def params(self, omega: float, delta: float, g: float) -> ModelParams:
        p = ModelParams(omega, delta, 0.0, g)
        if self.k is None:
            return p.with_(epsilon=self.epsilon)
        return p.with_(epsilon=self.k * float(beta(p)))

    def describe(self) -> str:
        return f"eps={self.epsilon!r}" if self.k is None else f"eps=k*beta, k={self.k!r}"


def default_window(model: Model, omega: float, epsilon: float = 0.0, g: float = 0.0) -> tuple[float, float]:
    """Energy window used when none is given."""
    if Model(model) is Model.ONE_PHOTON:
        return (-g * g / omega - epsilon / 2 - omega, 6 * omega)
    return (-omega, 6 * omega)


# ---------------------------------------------------------------------------
# special points


@dataclass(frozen=True)
class SpecialPoint:
    """A degenerate crossing or exceptional point found by the dedicated solvers."""

    tag: str          # "degenerate" or "exceptional"
    kind: str         # solver flavour: "crossing", "1A", "2B", "merged", "coefA", ...
    g: float
    energy: float
    epsilon: float
    lines: tuple[PoleLine, ...]


@dataclass
class SpectrumRecord:
    g: float
    epsilon: float
    energies: list[float]
    special: list[SpecialPoint] = field(default_factory=list)
    gaps: list[tuple[float, float]] = field(default_factory=list)


def _max_index(energy_at: Callable[[int], float], e_hi: float) -> int:
    m = 0
    while m < MAX_POLE_INDEX and energy_at(m + 1) <= e_hi:
        m += 1
    return m


def _specials_1p(delta: float, epsilon: float, omega: float, g_range: tuple[float, float],
                 window: tuple[float, float]) -> list[SpecialPoint]:
    lo, hi = g_range
    e_hi = window[1]
    top = hi * hi / omega  # pole energies fall as -g^2/w; the lowest g has the highest line
    max_a = _max_index(lambda m: m * omega - top + epsilon / 2, e_hi)
    max_b = _max_index(lambda m: m * omega - top - epsilon / 2, e_hi)
    base = ModelParams(omega, delta, epsilon, max(lo, 1e-3 * omega))
    cfg_interval = (max(lo, 1e-3 * omega), hi)
    out: list[SpecialPoint] = []
    ratio = epsilon / omega
    integer = abs(ratio - round(ratio)) < 1e-12
    if integer and round(ratio) == 0:
        # symmetric model: A and B lines coincide; coefficient zeros are the crossings
        for n in range(1, max_a + 1):
            line = PoleLine(Model.ONE_PHOTON, Kind.A, n)
            for g in bracket_roots(lambda x: op.coefficient_at_pole(base.with_(g=x), Kind.A, n),
                                   RootSearchConfig.for_interval(*cfg_interval, omega=omega)):
                p = base.with_(g=g)
                out.append(SpecialPoint("degenerate", "coefA", g, float(pole_energy(line, p)), epsilon,
                                        (line, PoleLine(Model.ONE_PHOTON, Kind.B, n))))
        for n in range(0, max_a + 1):
            for pt in op.find_exceptional_1p("merged", base, N=n, M=n, g_interval=cfg_interval):
                out.append(SpecialPoint("exceptional", "merged", pt.g, pt.energy, epsilon,
                                        (pt.line, PoleLine(Model.ONE_PHOTON, Kind.B, n))))
    elif integer:
        k = int(round(ratio))
        for n in range(0, max_a + 1):
            m = n + k
            line_a = PoleLine(Model.ONE_PHOTON, Kind.A, n)
            line_b = PoleLine(Model.ONE_PHOTON, Kind.B, m)
            if n >= 1:
                cfg = RootSearchConfig.for_interval(*cfg_interval, omega=omega)
                for pt in op.find_degenerate_1p(n, m, delta, omega, cfg=cfg, check_closed_form=False):
                    out.append(SpecialPoint("degenerate", "crossing", pt.g, pt.energy, epsilon,
                                            (line_a, line_b)))
            for pt in op.find_exceptional_1p("merged", base, N=n, M=m, g_interval=cfg_interval):
                out.append(SpecialPoint("exceptional", "merged", pt.g, pt.energy, epsilon,
                                        (line_a, line_b)))
        for m in range(0, min(k, max_b + 1)):
            for pt in op.find_exceptional_1p("2B", base, M=m, g_interval=cfg_interval):
                out.append(SpecialPoint("exceptional", "2B", pt.g, pt.energy, epsilon, (pt.line,)))
    else:
        for n in range(0, max_a + 1):
            for pt in op.find_exceptional_1p("2A", base, N=n, g_interval=cfg_interval):
                out.append(SpecialPoint("exceptional", "2A", pt.g, pt.energy, epsilon, (pt.line,)))
            if n >= 1:
                for pt in op.find_exceptional_1p("1A", base, N=n, g_interval=cfg_interval):
                    out.append(SpecialPoint("exceptional", "1A", pt.g, pt.energy, epsilon, (pt.line,)))
        for m in range(0, max_b + 1):
            for pt in op.find_exceptional_1p("2B", base, M=m, g_interval=cfg_interval):
                out.append(SpecialPoint("exceptional", "2B", pt.g, pt.energy, epsilon, (pt.line,)))
            if m >= 1:
                for pt in op.find_exceptional_1p("1B", base, M=m, g_interval=cfg_interval):
                    out.append(SpecialPoint("exceptional", "1B", pt.g, pt.energy, epsilon, (pt.line,)))
    return out


def _specials_2p(q: BargmannIndex, delta: float, rule: EpsilonRule, omega: float,
                 g_range: tuple[float, float], window: tuple[float, float]) -> list[SpecialPoint]:
    lo, hi = g_range
    hi = min(hi, tp.g_max_scan(omega))
    lo = max(lo, 1e-3 * omega)
    e_hi = window[1]
    b_min = float(beta(ModelParams(omega, 0, 0, hi)))
    eps_max = rule.epsilon if rule.k is None else rule.k * omega
    max_idx = _max_index(lambda m: 2 * b_min * (m + float(q)) - (eps_max + omega) / 2, e_hi)
    base = ModelParams(omega, delta, 0.0 if rule.k is not None else rule.epsilon, lo)
    k = rule.k
    out: list[SpecialPoint] = []

    def line(kind, idx):
        return PoleLine(Model.TWO_PHOTON, kind, idx, q)

    even_k = k is not None and abs(k - round(k)) < 1e-12 and round(k) % 2 == 0
    zero_bias = (k is not None and k == 0) or (k is None and rule.epsilon == 0)
    if zero_bias:
        for n in range(1, max_idx + 1):
            for pt in tp.find_coefficient_zeros_2p(q, base, Kind.A, n, (lo, hi), k):
                out.append(SpecialPoint("degenerate", "coefA", pt.g, pt.energy, pt.epsilon,
                                        (line(Kind.A, n), line(Kind.B, n))))
        return out
    if even_k:
        shift = int(round(k)) // 2
        for n in range(1, max_idx + 1):
            cfg = RootSearchConfig.for_interval(lo, hi, omega=omega)
            for pt in tp.find_degenerate_2p(q, n, n + shift, delta, omega, cfg=cfg, check_closed_form=False):
                out.append(SpecialPoint("degenerate", "crossing", pt.g, pt.energy, pt.epsilon,
                                        (line(Kind.A, n), line(Kind.B, n + shift))))
        for m in range(0, min(shift, max_idx + 1)):
            for pt in tp.find_exceptional_2p("2B", q, base, m, (lo, hi), k):
                out.append(SpecialPoint("exceptional", "2B", pt.g, pt.energy, pt.epsilon, (pt.line,)))
        return out
    for n in range(0, max_idx + 1):
        for pt in tp.find_exceptional_2p("2A", q, base, n, (lo, hi), k):
            out.append(SpecialPoint("exceptional", "2A", pt.g, pt.energy, pt.epsilon, (pt.line,)))
        for pt in tp.find_exceptional_2p("2B", q, base, n, (lo, hi), k):
            out.append(SpecialPoint("exceptional", "2B", pt.g, pt.energy, pt.epsilon, (pt.line,)))
        if n >= 1:
            for kind in (Kind.A, Kind.B):
                for pt in tp.find_coefficient_zeros_2p(q, base, kind, n, (lo, hi), k):
                    out.append(SpecialPoint("exceptional", f"1{kind.value}", pt.g, pt.energy,
                                            pt.epsilon, (pt.line,)))
    return out


def special_points(model: Model, delta: float, rule: EpsilonRule, g_range: tuple[float, float],
                   window: tuple[float, float], q=None, omega: float = 1.0) -> list[SpecialPoint]:
    """All degenerate and exceptional points with g in ``g_range`` and energy in ``window``."""
    model = Model(model)
    if model is Model.ONE_PHOTON:
        if rule.is_scaled:
            raise DomainError("the eps = k beta rule applies to the two-photon model")
        pts = _specials_1p(delta, rule.epsilon, omega, g_range, window)
    else:
        pts = _specials_2p(BargmannIndex.parse(q), delta, rule, omega, g_range, window)
    lo, hi = window
    pts = [p for p in pts if lo <= p.energy <= hi]
    pts.sort(key=lambda p: (p.g, p.energy))
    return pts


# ---------------------------------------------------------------------------
# spectrum tracing


def spectrum_at(model: Model, params: ModelParams, window: tuple[float, float], q=None,
                points_per_unit: float = 2000.0):
    """Regular spectrum (G-zeros) in ``window`` at one parameter point.

    Returns the RootList; its ``unresolved`` attribute lists energy ranges
    where the G-function could not be evaluated.
    """
    model = Model(model)
    omega = float(params.omega)
    lo, hi = window
    if not lo < hi:
        return RootList()
    cfg = RootSearchConfig.for_interval(lo, hi, omega=omega, points_per_unit=points_per_unit)
    if model is Model.ONE_PHOTON:
        poles = [e for _, e in pole_lines_in_window(model, params, window, margin=cfg.pole_margin)]
        return bracket_roots(lambda e: op.g1p_values(params, e), cfg, poles)
    q = BargmannIndex.parse(q)
    poles = [e for _, e in pole_lines_in_window(model, params, window, q, margin=cfg.pole_margin)]
    return bracket_roots(lambda e: tp.g2p_values(q, params, e), cfg, poles)


def _check_grid(model: Model, g_grid: Sequence[float], omega: float) -> list[float]:
    grid = [float(g) for g in g_grid]
    if any(g <= 0 for g in grid):
        raise DomainError("g grid must be positive (the G-functions need g > 0)")
    if model is Model.TWO_PHOTON and any(g > tp.g_max_scan(omega) for g in grid):
        raise DomainError(f"two-photon scans stop at g = {tp.g_max_scan(omega)!r} (collapse exclusion)")
    return grid


def trace(model: Model, delta: float, rule: EpsilonRule, g_grid: Sequence[float],
          window: tuple[float, float] | None = None, q=None, omega: float = 1.0,
          specials: bool = True, points_per_unit: float = 2000.0) -> list[SpectrumRecord]:
    """Regular spectrum at every grid coupling, with special points attached to the nearest grid g."""
    model = Model(model)
    if model is Model.TWO_PHOTON:
        q = BargmannIndex.parse(q)
    elif rule.is_scaled:
        raise DomainError("the eps = k beta rule applies to the two-photon model")
    grid = _check_grid(model, g_grid, omega)

    def one(g: float) -> SpectrumRecord:
        params = rule.params(omega, delta, g)
        eps = float(params.epsilon)
        win = window if window is not None else default_window(model, omega, eps, g)
        roots = spectrum_at(model, params, win, q, points_per_unit)
        return SpectrumRecord(g, eps, list(roots), [], list(roots.unresolved))

    records = parallel_map(one, grid)
    if specials and grid:
        if window is None:
            e_lo = min(default_window(model, omega, r.epsilon, r.g)[0] for r in records)
            win = (e_lo, 6 * omega)
        else:
            win = window
        g_lo, g_hi = min(grid), max(grid)
        for pt in special_points(model, delta, rule, (g_lo, g_hi), win, q, omega):
            nearest = min(records, key=lambda r: abs(r.g - pt.g))
            nearest.special.append(pt)
    return records


# ---------------------------------------------------------------------------
# level connectivity and avoided crossings


def connect_levels(records: Sequence[SpectrumRecord], jump_factor: float = 3.0) -> list[list[tuple[float, float]]]:
    """Join levels of neighbouring grid points into curves.

    A level is linked to the nearest level at the next coupling only when the
    choice is mutual and the jump is at most ``jump_factor`` times the local
    spacing to its neighbouring level. Ambiguous levels start new curves.
    """
    curves: list[list[tuple[float, float]]] = []
    open_ends: dict[int, int] = {}
    for i, rec in enumerate(records):
        e_now = np.asarray(rec.energies)
        new_ends: dict[int, int] = {}
        if i > 0 and e_now.size and records[i - 1].energies:
            e_prev = np.asarray(records[i - 1].energies)
            dist = np.abs(e_prev[:, None] - e_now[None, :])
            fwd = dist.argmin(axis=1)
            back = dist.argmin(axis=0)
            for a, b in enumerate(fwd):
                if back[b] != a or a not in open_ends:
                    continue
                neigh = np.abs(np.delete(e_prev, a) - e_prev[a])
                spacing = neigh.min() if neigh.size else math.inf
                if dist[a, b] <= jump_factor * spacing:
                    curves[open_ends[a]].append((rec.g, float(e_now[b])))
                    new_ends[int(b)] = open_ends[a]
        for b, e in enumerate(e_now):
            if b not in new_ends:
                curves.append([(rec.g, float(e))])
                new_ends[b] = len(curves) - 1
        open_ends = new_ends
    return curves


@dataclass(frozen=True)
class AvoidedGap:
    g: float
    energy: float
    gap: float


def avoided_gap_2p(q, delta: float, epsilon: float, N: int, M: int, omega: float = 1.0,
                   halfwidth: float = 0.02, n_max: int = 200) -> AvoidedGap:
    """Smallest splitting of two adjacent sector levels near where lines A_N and B_M intersect.

    The lines meet where 2 beta (M - N) = eps. The splitting is minimized over g
    with the dense sector spectrum, which resolves arbitrarily close pairs.
    """
    q = BargmannIndex.parse(q)
    if M <= N:
        raise DomainError("need M > N")
    b_star = epsilon / (2 * (M - N))
    if not 0 < b_star < omega:
        raise DomainError("pole lines A_N and B_M do not intersect for this bias")
    g_star = 0.5 * math.sqrt(omega**2 - b_star**2)
    e_star = (M + N + 2 * float(q)) * b_star - omega / 2

    def gap(g: float) -> float:
        p = ModelParams(omega, delta, epsilon, g)
        vals = oracle.eigenvalues(oracle.build_2p(p, n_max, q), check_cutoff=False).eigenvalues
        centre = float(pole_energy(PoleLine(Model.TWO_PHOTON, Kind.A, N, q), p))
        i = int(np.searchsorted(vals, centre))
        cands = [vals[j + 1] - vals[j] for j in (i - 2, i - 1, i) if 0 <= j < len(vals) - 1]
        return float(min(cands))

    lo = max(1e-3 * omega, g_star - halfwidth)
    hi = min(tp.g_max_scan(omega), g_star + halfwidth)
    res = minimize_scalar(gap, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return AvoidedGap(float(res.x), e_star, float(res.fun))


# ---------------------------------------------------------------------------
# crossing census


@dataclass
class CrossingCensus:
    model: Model
    q: BargmannIndex | None
    delta: float
    n_range: tuple[int, int]
    m_range: tuple[int, int]
    points: list = field(default_factory=list)
    per_pair: dict = field(default_factory=dict)
    anomalies: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.points)


def _pairs(n_range: tuple[int, int], m_range: tuple[int, int]) -> list[tuple[int, int]]:
    n_lo, n_hi = n_range
    m_lo, m_hi = m_range
    return [(n, m) for n in range(n_lo, n_hi + 1) for m in range(m_lo, m_hi + 1) if m > n and n >= 1]


def enumerate_crossings(model: Model, delta: float, n_range: tuple[int, int] = (1, 10),
                        m_range: tuple[int, int] = (2, 20), q=None, omega: float = 1.0) -> CrossingCensus:
    """Run the degenerate-point solver over every (N, M) pair with M > N.

    Solver inconsistencies are collected in ``anomalies``; the run continues.
    """
    model = Model(model)
    if model is Model.TWO_PHOTON:
        q = BargmannIndex.parse(q)
    census = CrossingCensus(model, q, delta, tuple(n_range), tuple(m_range))

    def solve(pair):
        n, m = pair
        try:
            if model is Model.ONE_PHOTON:
                return pair, op.find_degenerate_1p(n, m, delta, omega), None
            return pair, tp.find_degenerate_2p(q, n, m, delta, omega), None
        except (InconsistencyError, DomainError) as exc:
            return pair, [], str(exc)

    for pair, pts, err in parallel_map(solve, _pairs(n_range, m_range)):
        census.per_pair[pair] = len(pts)
        census.points.extend(pts)
        if err is not None:
            census.anomalies.append({"N": pair[0], "M": pair[1], "error": err})
    return census


def same_totals(a: CrossingCensus, b: CrossingCensus) -> bool:
    """Cross-model comparison at equal Delta and ranges."""
    if a.delta != b.delta or a.n_range != b.n_range or a.m_range != b.m_range:
        raise DomainError("census comparison needs equal Delta and (N, M) ranges")
    return a.total == b.total


def shared_root_check(model: Model, delta: float, n_range=(1, 10), m_range=(2, 20), q=None,
                      omega: float = 1.0, tol: float = 1e-8) -> list[dict]:
    """Independent f- and c-constraint root scans per pair; returns the mismatching pairs."""
    model = Model(model)
    if model is Model.TWO_PHOTON:
        q = BargmannIndex.parse(q)
    bad = []

    def check(pair):
        n, m = pair
        try:
            if model is Model.ONE_PHOTON:
                f_roots = [p.g for p in op.find_degenerate_1p(n, m, delta, omega)]
                c_roots = op.roots_c_M_pole(n, m, delta, omega)
            else:
                f_roots = [p.g for p in tp.find_degenerate_2p(q, n, m, delta, omega)]
                c_roots = tp.roots_c_M_pole_2p(q, n, m, delta, omega)
        except InconsistencyError as exc:
            return {"N": n, "M": m, "error": str(exc)}
        ok = len(f_roots) == len(c_roots) and all(abs(a - b) <= tol for a, b in zip(f_roots, c_roots))
        return None if ok else {"N": n, "M": m, "f_roots": f_roots, "c_roots": list(c_roots)}

    for item in parallel_map(check, _pairs(n_range, m_range)):
        if item is not None:
            bad.append(item)
    return bad
