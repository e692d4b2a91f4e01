"""Shared types and numerics for the asymmetric one- and two-photon Rabi models.

Holds the parameter containers, pole-line energies, the squeezing-frame
scalars, the series-summation engine used by every G-function, and the
pole-aware root bracketing used for all spectral searches.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray


class DomainError(ValueError):
    """Parameters outside the region where an operation is defined."""


class PoleProximityError(ValueError):
    """Energy falls inside the exclusion zone of a pole line."""

    def __init__(self, line: "PoleLine", energy: float, pole: float):
        self.line = line
        self.energy = energy
        self.pole = pole
        super().__init__(
            f"E={energy!r} lies within the pole margin of {line.label()} (pole at {pole!r})"
        )


class ConvergenceError(RuntimeError):
    """A series or iterative solver did not converge."""


class InconsistencyError(RuntimeError):
    """Two routes that must agree did not (e.g. f- and c-constraints)."""

    def __init__(self, message: str, residual_f: float = math.nan, residual_c: float = math.nan):
        self.residual_f = residual_f
        self.residual_c = residual_c
        super().__init__(f"{message} (residual_f={residual_f:.3e}, residual_c={residual_c:.3e})")


class Model(str, enum.Enum):
    ONE_PHOTON = "1p"
    TWO_PHOTON = "2p"


class Kind(str, enum.Enum):
    A = "A"
    B = "B"


class BargmannIndex(enum.Enum):
    """Two-photon parity sector: even (1/4) or odd (3/4) Fock states."""

    Q14 = Fraction(1, 4)
    Q34 = Fraction(3, 4)

    def __float__(self) -> float:
        return float(self.value)

    @property
    def parity(self) -> int:
        """Fock-number parity of the sector (0 even, 1 odd)."""
        return 0 if self is BargmannIndex.Q14 else 1

    @classmethod
    def parse(cls, value: "BargmannIndex | str | float | Fraction") -> "BargmannIndex":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().replace(" ", "")
            table = {"14": cls.Q14, "1/4": cls.Q14, "0.25": cls.Q14,
                     "34": cls.Q34, "3/4": cls.Q34, "0.75": cls.Q34}
            if key in table:
                return table[key]
            raise DomainError(f"unknown Bargmann index {value!r}")
        frac = Fraction(value).limit_denominator(8)
        for member in cls:
            if member.value == frac and abs(float(value) - float(frac)) < 1e-15:
                return member
        raise DomainError(f"Bargmann index must be 1/4 or 3/4, got {value!r}")

    def __str__(self) -> str:
        return "1/4" if self is BargmannIndex.Q14 else "3/4"


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of either model.

    Fields may be numpy arrays; every formula in the package broadcasts, which
    is how grid scans over ``g`` (or a g-dependent ``epsilon``) are vectorized.
    """

    omega: ArrayLike = 1.0
    delta: ArrayLike = 0.0
    epsilon: ArrayLike = 0.0
    g: ArrayLike = 0.0

    def __post_init__(self):
        if not np.all(np.asarray(self.omega) > 0):
            raise DomainError("omega must be positive")
        if np.any(np.asarray(self.delta) < 0):
            raise DomainError("delta must be non-negative")
        if np.any(np.asarray(self.g) < 0):
            raise DomainError("g must be non-negative")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def check_two_photon(self, allow_collapse: bool = False) -> None:
        ratio = np.asarray(self.g) / np.asarray(self.omega)
        bad = ratio > 0.5 if allow_collapse else ratio >= 0.5
        if np.any(bad):
            raise DomainError("two-photon model requires g < omega/2")


@dataclass(frozen=True)
class PoleLine:
    model: Model
    kind: Kind
    index: int
    q: BargmannIndex | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.index < 0:
            raise DomainError("pole index must be >= 0")
        if self.model is Model.TWO_PHOTON:
            if self.q is None:
                raise DomainError("two-photon pole line needs a Bargmann index")
            object.__setattr__(self, "q", BargmannIndex.parse(self.q))
        elif self.q is not None:
            raise DomainError("one-photon pole lines carry no Bargmann index")

    def label(self) -> str:
        tail = f", q={self.q}" if self.q is not None else ""
        return f"{self.model.value} pole {self.kind.value}_{self.index}{tail}"


def beta(params: ModelParams) -> NDArray | float:
    """Renormalized cavity frequency omega*sqrt(1 - 4(g/omega)^2)."""
    omega = np.asarray(params.omega, dtype=float)
    ratio = np.asarray(params.g, dtype=float) / omega
    if np.any(ratio > 0.5):
        raise DomainError("beta is only real for g <= omega/2")
    out = omega * np.sqrt(np.clip(1.0 - 4.0 * ratio**2, 0.0, None))
    return float(out) if out.ndim == 0 else out


def squeeze_r(params: ModelParams) -> NDArray | float:
    """Squeezing parameter r = ln((1-2g/w)/(1+2g/w))/4, finite for g < w/2."""
    params.check_two_photon()
    ratio = np.asarray(params.g, dtype=float) / np.asarray(params.omega, dtype=float)
    out = 0.25 * (np.log1p(-2.0 * ratio) - np.log1p(2.0 * ratio))
    return float(out) if out.ndim == 0 else out


def pole_energy(line: PoleLine, params: ModelParams) -> NDArray | float:
    """Energy of a type-A/B pole line.

    One-photon: m*w - g^2/w +/- eps/2.  Two-photon: 2*beta*(m+q) + (+/-eps - w)/2.
    """
    omega = np.asarray(params.omega, dtype=float)
    eps = np.asarray(params.epsilon, dtype=float)
    sign = 1.0 if line.kind is Kind.A else -1.0
    if line.model is Model.ONE_PHOTON:
        g = np.asarray(params.g, dtype=float)
        out = line.index * omega - g**2 / omega + sign * eps / 2
    else:
        params.check_two_photon(allow_collapse=True)
        out = 2.0 * beta(params) * (line.index + float(line.q)) + (sign * eps - omega) / 2
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def pole_lines_in_window(model: Model, params: ModelParams, window: tuple[float, float],
                         q: BargmannIndex | None = None, margin: float = 0.0) -> list[tuple[PoleLine, float]]:
    """All pole lines (both kinds) whose scalar energy lies in ``window`` (padded by ``margin``)."""
    lo, hi = window
    model = Model(model)
    out = []
    for kind in Kind:
        m = 0
        while True:
            line = PoleLine(model, kind, m, q if model is Model.TWO_PHOTON else None)
            e = float(pole_energy(line, params))
            if e > hi + margin:
                break
            if e >= lo - margin:
                out.append((line, e))
            m += 1
            if model is Model.TWO_PHOTON and beta(params) == 0:
                break
    out.sort(key=lambda item: item[1])
    return out


# ---------------------------------------------------------------------------
# root bracketing


@dataclass(frozen=True)
class RootSearchConfig:
    """Grid scan + bisection settings for one search variable."""

    interval: tuple[float, float]
    grid_points: int
    abs_tol: float = 1e-10
    pole_margin: float = 1e-6

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise DomainError("interval must satisfy lo < hi")
        if self.grid_points < 2:
            raise DomainError("grid_points must be >= 2")
        if not self.abs_tol > 0 or not self.pole_margin > 0:
            raise DomainError("abs_tol and pole_margin must be positive")

    @classmethod
    def for_interval(cls, lo: float, hi: float, omega: float = 1.0,
                     points_per_unit: float = 2000.0, **kw) -> "RootSearchConfig":
        """Defaults scaled to ``omega``: 2000 points per omega, tol 1e-10 w, margin 1e-6 w."""
        n = max(2, int(math.ceil((hi - lo) / omega * points_per_unit)) + 1)
        kw.setdefault("abs_tol", 1e-10 * omega)
        kw.setdefault("pole_margin", 1e-6 * omega)
        return cls((lo, hi), n, **kw)

    def refined(self, factor: int = 2) -> "RootSearchConfig":
        return replace(self, grid_points=(self.grid_points - 1) * factor + 1)


class RootList(list):
    """Sorted roots; ``unresolved`` lists (lo, hi) segments where f was not finite."""

    def __init__(self, roots: Iterable[float] = (), unresolved: Sequence[tuple[float, float]] = ()):
        super().__init__(roots)
        self.unresolved = list(unresolved)


class PointList(list):
    """Accepted points; ``rejected`` keeps zeros that failed a validation check."""

    def __init__(self, points: Iterable = (), rejected: Iterable = ()):
        super().__init__(points)
        self.rejected = list(rejected)


def changes_sign_near(f: Callable[[float], float], x: float, h: float) -> bool:
    """True when f(x - h) and f(x + h) differ in sign (or one of them is zero)."""
    lo, hi = float(f(x - h)), float(f(x + h))
    return lo * hi <= 0


def _segments(lo: float, hi: float, poles: Iterable[float], margin: float) -> list[tuple[float, float]]:
    cuts = sorted(p for p in poles if lo - margin < p < hi + margin)
    segs, start = [], lo
    for p in cuts:
        if p - margin > start:
            segs.append((start, p - margin))
        start = max(start, p + margin)
    if hi > start:
        segs.append((start, hi))
    return segs


def bracket_roots(f: Callable, cfg: RootSearchConfig, poles: Iterable[float] = (),
                  vectorized: bool = True) -> RootList:
    """Find all sign changes of ``f`` on the interval, skipping pole neighbourhoods.

    ``f`` is called with 1-d arrays when ``vectorized`` (the default); scalar
    callables are looped over. Each bracket is bisected to ``cfg.abs_tol``.
    Brackets whose |f| grows during bisection are discarded as unlisted poles.
    Non-finite samples split a segment and are reported in ``unresolved``.
    """
    lo, hi = cfg.interval
    step = (hi - lo) / (cfg.grid_points - 1)

    def call(x: NDArray) -> NDArray:
        with np.errstate(all="ignore"):
            if vectorized:
                return np.asarray(f(x), dtype=float).reshape(x.shape)
            return np.array([float(f(float(v))) for v in x])

    a_list, b_list, fa_list, fb_list = [], [], [], []
    unresolved: list[tuple[float, float]] = []
    for s_lo, s_hi in _segments(lo, hi, poles, cfg.pole_margin):
        n = max(2, int(math.ceil((s_hi - s_lo) / step)) + 1)
        x = np.linspace(s_lo, s_hi, n)
        y = call(x)
        finite = np.isfinite(y)
        if not finite.all():
            bad = np.flatnonzero(~finite)
            unresolved.append((float(x[max(bad[0] - 1, 0)]), float(x[min(bad[-1] + 1, n - 1)])))
        ok = finite[:-1] & finite[1:]
        exact = finite & (y == 0)
        flip = ok & (np.sign(y[:-1]) * np.sign(y[1:]) < 0)
        idx = np.flatnonzero(flip)
        a_list.append(x[idx]); b_list.append(x[idx + 1])
        fa_list.append(y[idx]); fb_list.append(y[idx + 1])
        zeros = x[exact]
        if zeros.size:
            a_list.append(zeros); b_list.append(zeros)
            fa_list.append(np.zeros_like(zeros)); fb_list.append(np.zeros_like(zeros))

    if not a_list:
        return RootList([], unresolved)
    a = np.concatenate(a_list); b = np.concatenate(b_list)
    fa = np.concatenate(fa_list); fb = np.concatenate(fb_list)
    scale0 = np.maximum(np.abs(fa), np.abs(fb))
    active = b > a
    while np.any(active & (b - a > cfg.abs_tol)):
        mid = np.where(active, 0.5 * (a + b), a)
        fm = np.zeros_like(mid)
        sel = active & (b - a > cfg.abs_tol)
        fm[sel] = call(mid[sel])
        fm[~sel] = np.nan
        left = sel & (np.sign(fm) == np.sign(fa))
        right = sel & ~left & np.isfinite(fm)
        hit = sel & (fm == 0)
        a = np.where(left, mid, a); fa = np.where(left, fm, fa)
        b = np.where(right, mid, b); fb = np.where(right, fm, fb)
        a = np.where(hit, mid, a); b = np.where(hit, mid, b)
        nonfinite = sel & ~np.isfinite(fm)
        if np.any(nonfinite):
            for lo_, hi_ in zip(a[nonfinite], b[nonfinite]):
                unresolved.append((float(lo_), float(hi_)))
            active = active & ~nonfinite
    keep = active | (a == b)
    pole_like = np.minimum(np.abs(fa), np.abs(fb)) > scale0
    roots = np.sort(0.5 * (a + b)[keep & ~pole_like])
    return RootList([float(r) for r in roots], unresolved)


# ---------------------------------------------------------------------------
# series summation


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation rule for the weighted coefficient series.

    Stop once ``run_length`` consecutive weighted terms are each below
    ``rel_tol`` times the largest partial-sum magnitude seen so far. An
    optional stall detector flags plateaus of the term ratio.
    """

    rel_tol: float = 1e-14
    run_length: int = 10
    n_max: int = 5000
    stall_window: int | None = None
    stall_band: tuple[float, float] = (0.99, 1.01)


ONE_PHOTON_POLICY = SeriesPolicy()
TWO_PHOTON_POLICY = SeriesPolicy(stall_window=50)


class Recurrence(Protocol):
    """Three-term recurrence in the un-substituted form

    f_{n+1} = a_n f_n + b_n e_n + c_n f_{n-1},    e_n = half_delta * f_n / den_n

    with weights w_n entering the sums as w_n f_n and w_n e_n.
    """

    half_delta: float
    shape: tuple

    def coeffs(self, n: int) -> tuple: ...
    def den(self, n: int) -> NDArray: ...
    def log_weight0(self) -> tuple[NDArray, NDArray]: ...
    def log_weight_ratio(self, n: int) -> tuple[NDArray, NDArray]: ...


@dataclass
class SeriesResult:
    """Weighted sums of one expansion side plus raw coefficient bookkeeping."""

    f_sum: NDArray
    e_sum: NDArray
    converged: NDArray
    n_used: NDArray
    tail: NDArray
    coeffs: list | None = None  # per n: (f_n, e_n) as actual values, if recorded
    weighted: list | None = None  # per n: (w_n f_n, w_n e_n)


def sum_series(rec: Recurrence, policy: SeriesPolicy, mode: str = "regular", start: int = 0,
               record: bool = False, n_limit: int | None = None) -> SeriesResult:
    """Run the recurrence forward and accumulate the weighted sums.

    ``mode``:
      regular    f_0 = 1 (and f_{-1} = 0), e_n from the partner relation.
      terminate  as regular up to n = start-1; then e_start is chosen so that
                 f_{start+1} = 0, f_start is taken as zero, and the series ends.
      reset      f_n = 0 for n <= start, e_n = 0 for n < start, e_start = 1.

    Raw coefficients are carried as mantissa times exp(log_scale) so neither
    the coefficients nor the weights overflow; products are formed in log space.
    """
    shape = rec.shape
    fh_prev = np.zeros(shape)
    fh = np.zeros(shape) if mode == "reset" else np.ones(shape)
    log_scale = np.zeros(shape)
    logw, sw = rec.log_weight0()
    logw = np.broadcast_to(np.asarray(logw, dtype=float), shape).copy()
    sw = np.broadcast_to(np.asarray(sw, dtype=float), shape).copy()

    f_sum = np.zeros(shape); e_sum = np.zeros(shape)
    peak_f = np.zeros(shape); peak_e = np.zeros(shape)
    run = np.zeros(shape, dtype=int)
    stall = np.zeros(shape, dtype=int)
    prev_mag = np.full(shape, np.nan)
    done = np.zeros(shape, dtype=bool)
    failed = np.zeros(shape, dtype=bool)
    n_used = np.zeros(shape, dtype=int)
    tail = np.full(shape, np.nan)
    coeffs = [] if record else None
    weighted = [] if record else None
    n_max = policy.n_max if n_limit is None else n_limit

    with np.errstate(all="ignore"):
        for n in range(n_max + 1):
            last = False
            if mode == "reset" and n < start:
                fh = np.zeros(shape); eh = np.zeros(shape)
            elif mode == "reset" and n == start:
                fh = np.zeros(shape); eh = np.ones(shape)
                log_scale = np.zeros(shape)
            elif mode == "terminate" and n == start:
                if start == 0:
                    raise DomainError("termination index must be >= 1")
                _, b, c = rec.coeffs(n)
                eh = -c * fh_prev / b
                fh = np.zeros(shape)
                last = True
            else:
                eh = rec.half_delta * fh / rec.den(n)

            amp = np.exp(log_scale + logw) * sw
            tf = np.where(fh == 0, 0.0, fh * amp)
            te = np.where(eh == 0, 0.0, eh * amp)
            live = ~done
            f_sum = np.where(live, f_sum + tf, f_sum)
            e_sum = np.where(live, e_sum + te, e_sum)
            n_used = np.where(live, n, n_used)
            mag = np.maximum(np.abs(tf), np.abs(te))
            tail = np.where(live, mag, tail)
            if record:
                actual = np.exp(log_scale)
                coeffs.append((fh * actual, eh * actual))
                weighted.append((tf, te))

            if last:
                done = np.ones(shape, dtype=bool)
                break

            if n > start:
                peak_f = np.maximum(peak_f, np.abs(f_sum))
                peak_e = np.maximum(peak_e, np.abs(e_sum))
                small = (np.abs(tf) <= policy.rel_tol * peak_f) & (np.abs(te) <= policy.rel_tol * peak_e)
                run = np.where(small, run + 1, 0)
                bad = ~np.isfinite(f_sum) | ~np.isfinite(e_sum)
                failed |= live & bad
                done |= (run >= policy.run_length) | bad
                if policy.stall_window:
                    ratio = mag / prev_mag
                    lo, hi = policy.stall_band
                    plateau = (ratio >= lo) & (ratio <= hi)
                    stall = np.where(plateau & live, stall + 1, 0)
                    stalled = stall >= policy.stall_window
                    failed |= live & stalled
                    done |= stalled
                prev_mag = mag
            if np.all(done):
                break

            a, b, c = rec.coeffs(n)
            fh_next = a * fh + b * eh + c * fh_prev
            fh_prev, fh = fh, fh_next
            size = np.abs(fh)
            need = (size > 1e100) | ((size < 1e-100) & (size > 0))
            if np.any(need):
                s = np.where(need, size, 1.0)
                fh = fh / s; fh_prev = fh_prev / s
                log_scale = log_scale + np.log(s)
            lr, sr = rec.log_weight_ratio(n)
            logw = logw + lr
            sw = sw * sr

    converged = done & ~failed
    return SeriesResult(f_sum, e_sum, converged, n_used, tail, coeffs, weighted)


def as_array(x) -> NDArray:
    return np.asarray(x, dtype=float)


def scalar_or_array(x: NDArray):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def broadcast_params(params: ModelParams, *extra) -> tuple:
    """Common broadcast shape of all parameter fields (and extra arrays)."""
    return np.broadcast_shapes(*(np.shape(v) for v in
                                 (params.omega, params.delta, params.epsilon, params.g, *extra)))


def fraction(x: float) -> Fraction:
    return Fraction(x)


def sturm_count(coeffs: Sequence[Fraction], lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots of a polynomial in (lo, hi], exact arithmetic.

    ``coeffs`` in ascending power order.
    """
    p = _trim(list(coeffs))
    if len(p) <= 1:
        return 0
    seq = [p, _trim(_deriv(p))]
    while len(seq[-1]) > 1:
        rem = _polyrem(seq[-2], seq[-1])
        if all(c == 0 for c in rem):
            break
        seq.append([-c for c in rem])

    def changes(x: Fraction) -> int:
        vals = [_polyval(s, x) for s in seq]
        vals = [v for v in vals if v != 0]
        return sum(1 for u, v in zip(vals, vals[1:]) if (u > 0) != (v > 0))

    return changes(lo) - changes(hi)


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _deriv(p):
    return [k * p[k] for k in range(1, len(p))] or [Fraction(0)]


def _polyval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _polyrem(num, den):
    num = list(num)
    den = _trim(den)
    while len(num) >= len(den) and any(c != 0 for c in num):
        factor = num[-1] / den[-1]
        shift = len(num) - len(den)
        for i, c in enumerate(den):
            num[shift + i] -= factor * c
        num.pop()
    return _trim(num) if num else [Fraction(0)]
