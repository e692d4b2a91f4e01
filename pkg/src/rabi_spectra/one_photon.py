"""Asymmetric one-photon Rabi model in displaced (Bogoliubov) frames.

Everything is written in the qubit-rotated frame in which the bias sits on
the diagonal:

    H = [[w a'a + g(a + a') + eps/2, -Delta/2],
         [-Delta/2, w a'a - g(a + a') - eps/2]]

The A-frame expansion (coefficients e_n upper, f_n lower) uses the displaced
operator A = a + g/w; the B-frame (c_n upper, d_n lower) uses B = a - g/w and
is the same recurrence with eps -> -eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray

from .core import (
    ONE_PHOTON_POLICY,
    DomainError,
    InconsistencyError,
    Kind,
    Model,
    ModelParams,
    PoleLine,
    PoleProximityError,
    RootSearchConfig,
    SeriesPolicy,
    SeriesResult,
    PointList,
    bracket_roots,
    broadcast_params,
    changes_sign_near,
    pole_energy,
    scalar_or_array,
    sturm_count,
    sum_series,
)


class _Recurrence:
    """Un-substituted BOA recurrence for one frame (sign=+1: f/e, sign=-1: c/d)."""

    def __init__(self, params: ModelParams, E, sign: int):
        self.omega = np.asarray(params.omega, dtype=float)
        self.g = np.asarray(params.g, dtype=float)
        self.eps = np.asarray(params.epsilon, dtype=float) * sign
        self.E = np.asarray(E, dtype=float)
        self.half_delta = np.asarray(params.delta, dtype=float) / 2
        self.shape = broadcast_params(params, self.E)
        self._shift = self.g**2 / self.omega

    def den(self, n: int):
        return n * self.omega - self._shift + self.eps / 2 - self.E

    def coeffs(self, n: int):
        diag = n * self.omega + 3 * self._shift - self.eps / 2 - self.E
        a = diag / (2 * self.g * (n + 1))
        b = -self.half_delta / (2 * self.g * (n + 1))
        c = -1.0 / (n + 1)
        return a, b, c

    def log_weight0(self):
        return np.zeros(self.shape), np.ones(self.shape)

    def log_weight_ratio(self, n: int):
        return np.log(self.g / self.omega), 1.0


@dataclass
class CoefficientTable:
    """Expansion coefficients of one frame at a fixed energy.

    ``primary`` is f_n (or c_n), ``partner`` e_n (or d_n). ``tail_estimate`` is
    the magnitude of the last retained weighted term.
    """

    primary: NDArray
    partner: NDArray
    truncation_n: int
    converged: bool
    tail_estimate: float


def _check_scalar_pole(params: ModelParams, E: float, margin: float, kinds=(Kind.A, Kind.B)):
    omega = float(params.omega)
    for kind in kinds:
        sign = 1 if kind is Kind.A else -1
        base = -float(params.g) ** 2 / omega + sign * float(params.epsilon) / 2
        m = round((E - base) / omega)
        if m >= 0:
            pole = m * omega + base
            if abs(E - pole) < margin:
                raise PoleProximityError(PoleLine(Model.ONE_PHOTON, kind, m), E, pole)


def _table(params: ModelParams, E: float, sign: int, policy: SeriesPolicy,
           pole_margin: float | None) -> CoefficientTable:
    if np.ndim(params.g) or np.ndim(E):
        raise DomainError("coefficient tables are built for scalar parameters")
    if not float(params.g) > 0:
        raise DomainError("coefficient recurrence needs g > 0")
    margin = 1e-6 * float(params.omega) if pole_margin is None else pole_margin
    _check_scalar_pole(params, float(E), margin, kinds=(Kind.A if sign > 0 else Kind.B,))
    res = sum_series(_Recurrence(params, E, sign), policy, record=True)
    f = np.array([float(c[0]) for c in res.coeffs])
    e = np.array([float(c[1]) for c in res.coeffs])
    return CoefficientTable(f, e, int(res.n_used), bool(res.converged), float(res.tail))


def coeffs_fe(params: ModelParams, E: float, policy: SeriesPolicy = ONE_PHOTON_POLICY,
              pole_margin: float | None = None) -> CoefficientTable:
    """f_n, e_n of the A-frame from f_0 = 1."""
    return _table(params, E, +1, policy, pole_margin)


def coeffs_cd(params: ModelParams, E: float, policy: SeriesPolicy = ONE_PHOTON_POLICY,
              pole_margin: float | None = None) -> CoefficientTable:
    """c_n, d_n of the B-frame from c_0 = 1 (the eps -> -eps mirror of coeffs_fe)."""
    return _table(params, E, -1, policy, pole_margin)


def _combine(side_a: SeriesResult, side_b: SeriesResult):
    value = side_a.e_sum * side_b.e_sum - side_a.f_sum * side_b.f_sum
    ok = side_a.converged & side_b.converged
    return np.where(ok, value, np.nan)


def g1p_values(params: ModelParams, E, policy: SeriesPolicy = ONE_PHOTON_POLICY) -> NDArray:
    """Vectorized G-function; unconverged entries come back as NaN."""
    side_a = sum_series(_Recurrence(params, E, +1), policy)
    side_b = sum_series(_Recurrence(params, E, -1), policy)
    return _combine(side_a, side_b)


def g1p(params: ModelParams, E, policy: SeriesPolicy = ONE_PHOTON_POLICY,
        pole_margin: float | None = None):
    """One-photon G-function; its zeros in E are the regular spectrum.

    G = (Delta/2)^2 [sum f_n x^n / denA_n][sum c_n x^n / denB_n]
        - [sum f_n x^n][sum c_n x^n],           x = g/omega.

    Raises PoleProximityError for a scalar E inside a pole margin.
    """
    if not np.all(np.asarray(params.g) > 0):
        raise DomainError("g1p needs g > 0")
    if np.ndim(E) == 0 and np.ndim(params.g) == 0 and np.ndim(params.epsilon) == 0:
        margin = 1e-6 * float(params.omega) if pole_margin is None else pole_margin
        _check_scalar_pole(params, float(E), margin)
    return scalar_or_array(g1p_values(params, E, policy))


def symmetric_g1p(params: ModelParams, E: float, n_max: int = 400) -> float:
    """Reference G for eps = 0 written directly from the parity-resolved form.

    G_+ G_- with G_pm = sum_n (e_n -/+ f_n) x^n is algebraically the eps = 0
    value of ``g1p``; this is a separate plain-float implementation used only
    for regression checks.
    """
    w, d, g = float(params.omega), float(params.delta), float(params.g)
    x = g / w
    # weighted terms F_n = f_n x^n keep the sums finite for any g
    f_prev, f = 0.0, 1.0
    sum_e = sum_f = 0.0
    for n in range(n_max):
        den = n * w - g * g / w - E
        sum_e += d / 2 * f / den
        sum_f += f
        bracket = n * w + 3 * g * g / w - E - d * d / (4 * den)
        f_prev, f = f, (x * bracket * f / (2 * g) - x * x * f_prev) / (n + 1)
    g_plus = sum_e - sum_f
    g_minus = sum_e + sum_f
    return g_plus * g_minus


# ---------------------------------------------------------------------------
# degenerate (Juddian-type) crossings


def _check_pair(N: int, M: int) -> None:
    if N < 1:
        raise DomainError("true crossings need N >= 1; N = 0 lines only carry exceptional points")
    if M <= N:
        raise DomainError("need M > N (canonical eps >= 0)")


def _pole_sequence(N: int, M: int, delta: float, omega: float, g, upto: int, swap: bool) -> list:
    """f_0..f_upto of the pole-pinned recurrence (c-sequence when ``swap``)."""
    g = np.asarray(g, dtype=float)
    own, other = (M, N) if swap else (N, M)
    seq = [np.ones_like(g)]
    prev = np.zeros_like(g)
    for n in range(upto):
        bracket = 4 * g**2 / omega + (n - other) * omega - delta**2 / (4 * omega * (n - own))
        nxt = (bracket * seq[-1] / (2 * g) - prev) / (n + 1)
        prev = seq[-1]
        seq.append(nxt)
    return seq


def f_N_pole(N: int, M: int, delta: float, omega: float, g):
    """f_N at E = (M+N)w/2 - g^2/w with eps = (M-N)w; vectorized in g."""
    _check_pair(N, M)
    return scalar_or_array(_pole_sequence(N, M, delta, omega, g, N, swap=False)[-1])


def c_M_pole(N: int, M: int, delta: float, omega: float, g):
    """c_M at the same pole energy and bias; vectorized in g."""
    _check_pair(N, M)
    return scalar_or_array(_pole_sequence(N, M, delta, omega, g, M, swap=True)[-1])


def _relative_residual(seq: list) -> float:
    scale = max(abs(float(v)) for v in seq[:-1])
    return abs(float(seq[-1])) / scale


def constraint_polynomial(N: int, M: int, delta: float, omega: float = 1.0, which: str = "f") -> list[Fraction]:
    """Exact coefficients (ascending in x = 4g^2/w^2) of (2g/w)^n n! f_n at n = N.

    p_{n+1} = [x + n - M - d^2/(4(n-N))] p_n - n x p_{n-1},  d = Delta/w.
    ``which='c'`` gives the c_M polynomial (roles of N and M swapped).
    """
    _check_pair(N, M)
    own, other, top = (N, M, N) if which == "f" else (M, N, M)
    d2 = Fraction(delta) ** 2 / Fraction(omega) ** 2
    prev: list[Fraction] = [Fraction(0)]
    cur: list[Fraction] = [Fraction(1)]
    for n in range(top):
        const = Fraction(n - other) - d2 / (4 * (n - own))
        nxt = [Fraction(0)] * (len(cur) + 1)
        for k, c in enumerate(cur):
            nxt[k] += const * c
            nxt[k + 1] += c
        for k, c in enumerate(prev):
            nxt[k + 1] -= n * c
        prev, cur = cur, nxt
    return cur


def count_positive_roots(N: int, M: int, delta: float, omega: float = 1.0, which: str = "f",
                         x_max: float | None = None) -> int:
    """Exact number of distinct roots with x = 4g^2/w^2 in (0, x_max] (Sturm)."""
    poly = constraint_polynomial(N, M, delta, omega, which)
    if x_max is None:
        # Cauchy bound on the root magnitude
        lead = poly[-1]
        x_max = 1 + max(abs(c / lead) for c in poly[:-1])
    return sturm_count(poly, Fraction(0), Fraction(x_max))


def closed_form_1p(N: int, M: int, delta: float, omega: float = 1.0) -> list[float]:
    """Hard-coded crossing couplings for N = 1 (any M) and N = 2 (any M).

    N = 1: g = (w/2) sqrt(M - (d/2)^2)
    N = 2: x = M - 3d^2/16 +/- sqrt((d^2/16 - 1)^2 + M - 1), g = (w/2) sqrt(x)
    with d = Delta/w; only real positive roots are returned, ascending.
    """
    _check_pair(N, M)
    d2 = (delta / omega) ** 2
    if N == 1:
        xs = [M - d2 / 4]
    elif N == 2:
        root = math.sqrt((d2 / 16 - 1) ** 2 + M - 1)
        xs = [M - 3 * d2 / 16 - root, M - 3 * d2 / 16 + root]
    else:
        raise DomainError(f"no closed form for N={N}")
    return sorted(omega / 2 * math.sqrt(x) for x in xs if x > 0)


def closed_form_1p_N2M3(delta: float, omega: float = 1.0) -> list[float]:
    """The (N, M) = (2, 3) radical written as g = sqrt(-3(d^2-16) +/- sqrt((d^2-16)^2 + 512))/8."""
    d2 = (delta / omega) ** 2
    root = math.sqrt((d2 - 16) ** 2 + 512)
    vals = [-3 * (d2 - 16) - root, -3 * (d2 - 16) + root]
    return sorted(omega * math.sqrt(v) / 8 for v in vals if v > 0)


def closed_form_1p_N1M3(delta: float, omega: float = 1.0) -> list[float]:
    """(N, M) = (1, 3): g = sqrt(12 - d^2)/4."""
    v = 12 - (delta / omega) ** 2
    return [omega * math.sqrt(v) / 4] if v > 0 else []


@dataclass(frozen=True)
class DegeneratePoint1p:
    N: int
    M: int
    g: float
    epsilon: float
    energy: float
    residual_f: float
    residual_c: float
    omega: float = 1.0
    delta: float = 0.0

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.omega, self.delta, self.epsilon, self.g)


DEGENERATE_TOL = 1e-8
# crossings feed closed-form checks at 1e-10, so bisect well below that
CROSSING_TOL = 1e-14


def default_g_interval(M: int, omega: float = 1.0) -> tuple[float, float]:
    return (0.0, max(2.0, math.sqrt(M)) * omega)


def find_degenerate_1p(N: int, M: int, delta: float, omega: float = 1.0,
                       cfg: RootSearchConfig | None = None, tol: float = DEGENERATE_TOL,
                       check_closed_form: bool = True, max_refine: int = 6) -> list[DegeneratePoint1p]:
    """Doubly degenerate crossings on the overlapped A_N / B_M pole line.

    Roots of f_N(g) are bracketed on the grid and cross-validated by the
    relative residual of c_M at the same g. The grid is refined until the
    root count equals the exact Sturm count of positive roots in range.
    """
    _check_pair(N, M)
    if cfg is None:
        cfg = RootSearchConfig.for_interval(*default_g_interval(M, omega), omega=omega, abs_tol=CROSSING_TOL * omega)
    lo, hi = cfg.interval
    # g = 0 is excluded: f_N ~ g^-N there
    cfg = RootSearchConfig((max(lo, cfg.pole_margin), hi), cfg.grid_points, cfg.abs_tol, cfg.pole_margin)
    x_lo = Fraction(4 * cfg.interval[0] ** 2) / Fraction(omega) ** 2
    x_hi = Fraction(4 * hi**2) / Fraction(omega) ** 2
    expected = sturm_count(constraint_polynomial(N, M, delta, omega, "f"), x_lo, x_hi)

    def f(g):
        return f_N_pole(N, M, delta, omega, g)

    roots = bracket_roots(f, cfg)
    for _ in range(max_refine):
        if len(roots) == expected:
            break
        cfg = cfg.refined(4)
        roots = bracket_roots(f, cfg)
    if len(roots) != expected:
        raise InconsistencyError(
            f"(N={N}, M={M}, Delta={delta}) grid found {len(roots)} roots, exact count {expected}")

    points = []
    for g in roots:
        res_f = _relative_residual(_pole_sequence(N, M, delta, omega, g, N, swap=False))
        res_c = _relative_residual(_pole_sequence(N, M, delta, omega, g, M, swap=True))
        if res_c >= tol or res_f >= tol:
            raise InconsistencyError(f"f_{N} root at g={g} is not a root of c_{M}", res_f, res_c)
        points.append(DegeneratePoint1p(N, M, g, (M - N) * omega,
                                        (M + N) * omega / 2 - g * g / omega, res_f, res_c,
                                        omega, delta))
    if check_closed_form and N <= 2:
        ref = [r for r in closed_form_1p(N, M, delta, omega) if lo < r < hi]
        got = [p.g for p in points]
        if len(ref) != len(got) or any(abs(a - b) > 1e-9 * omega for a, b in zip(ref, got)):
            raise InconsistencyError(f"closed form {ref} disagrees with solver {got}")
    return points


def roots_c_M_pole(N: int, M: int, delta: float, omega: float = 1.0,
                   cfg: RootSearchConfig | None = None) -> list[float]:
    """Positive-g roots of c_M on the overlapped line (independent scan)."""
    _check_pair(N, M)
    if cfg is None:
        cfg = RootSearchConfig.for_interval(*default_g_interval(M, omega), omega=omega, abs_tol=CROSSING_TOL * omega)
    lo, hi = cfg.interval
    cfg = RootSearchConfig((max(lo, cfg.pole_margin), hi), cfg.grid_points, cfg.abs_tol, cfg.pole_margin)
    return list(bracket_roots(lambda g: c_M_pole(N, M, delta, omega, g), cfg))


# ---------------------------------------------------------------------------
# terminated (quasi-exact) states


@dataclass
class TerminatedState:
    """Finite expansion in a displaced-Fock frame of the rotated Hamiltonian.

    The state is  sum_n s_n sqrt(n!) (upper[n] |n>_X (x) |up> + lower[n] |n>_X (x) |down>)
    with |n>_X = D(alpha)|n>, alpha = ``displacement`` and s_n = (-1)^n when
    ``alternating`` (B frame) else 1.
    """

    frame: str
    displacement: float
    upper: NDArray
    lower: NDArray
    alternating: bool
    energy: float


def degenerate_states_1p(point: DegeneratePoint1p) -> tuple[TerminatedState, TerminatedState]:
    """The two terminated eigenstates at a crossing.

    A-state: e_0..e_N, f_0..f_{N-1}, with e_N = -(4g/Delta) f_{N-1}.
    B-state: c_0..c_{M-1}, d_0..d_M, with d_M = -(4g/Delta) c_{M-1}.
    """
    N, M, g, w, d = point.N, point.M, point.g, point.omega, point.delta
    f = [float(v) for v in _pole_sequence(N, M, d, w, g, N, swap=False)]
    c = [float(v) for v in _pole_sequence(N, M, d, w, g, M, swap=True)]
    e = [d / 2 * f[n] / ((n - N) * w) for n in range(N)] + [-4 * g / d * f[N - 1]]
    dd = [d / 2 * c[n] / ((n - M) * w) for n in range(M)] + [-4 * g / d * c[M - 1]]
    state_a = TerminatedState("A", -g / w, np.array(e), np.array(f[:N] + [0.0]), False, point.energy)
    state_b = TerminatedState("B", g / w, np.array(c[:M] + [0.0]), np.array(dd), True, point.energy)
    return state_a, state_b


def continued_coefficient(point: DegeneratePoint1p) -> tuple[float, float]:
    """(f_{N+1}, max_n |f_n|) when the A-recurrence is continued past the terminated e_N."""
    N, M, g, w, d = point.N, point.M, point.g, point.omega, point.delta
    f = [float(v) for v in _pole_sequence(N, M, d, w, g, N, swap=False)]
    e_N = -4 * g / d * f[N - 1]
    diag = N * w + 4 * g * g / w - M * w
    f_next = ((diag * f[N] - d / 2 * e_N) / (2 * g) - f[N - 1]) / (N + 1)
    return f_next, max(abs(v) for v in f)


# ---------------------------------------------------------------------------
# non-degenerate exceptional G-functions

EXCEPTIONAL_KINDS = ("1A", "2A", "1B", "2B", "merged")
VALIDATION_STEP = 1e-7


def _is_integer(x: float, tol: float = 1e-12) -> bool:
    return abs(x - round(x)) < tol


def g1p_exceptional(kind: str, params: ModelParams, N: int | None = None, M: int | None = None,
                    policy: SeriesPolicy = ONE_PHOTON_POLICY) -> NDArray | float:
    """Exceptional G-functions with E pinned to a pole line; vectorized in g.

    1A / 2A pin E to the N-th type-A pole and truncate the A-series after /
    before the diverging term; 1B / 2B do the same on the M-th type-B pole.
    ``merged`` needs eps = (M-N)w and resets both series.
    """
    if kind not in EXCEPTIONAL_KINDS:
        raise DomainError(f"unknown exceptional kind {kind!r}")
    if not np.all(np.asarray(params.g) > 0):
        raise DomainError("exceptional G-functions need g > 0")
    omega = float(params.omega)
    eps_ratio = np.asarray(params.epsilon, dtype=float) / omega
    if kind == "merged":
        if N is None or M is None:
            raise DomainError("merged kind needs both N and M")
        if not np.all(np.abs(eps_ratio - (M - N)) < 1e-12):
            raise DomainError("merged kind requires eps = (M-N)*omega")
        E = pole_energy(PoleLine(Model.ONE_PHOTON, Kind.A, N), params)
        side_a = sum_series(_Recurrence(params, E, +1), policy, "reset", N)
        side_b = sum_series(_Recurrence(params, E, -1), policy, "reset", M)
        return scalar_or_array(_combine(side_a, side_b))
    if kind.endswith("A"):
        if N is None:
            raise DomainError(f"kind {kind} needs N")
        if np.any([_is_integer(v) and round(v) >= -N for v in np.ravel(eps_ratio)]):
            # den_B(n) = (n-N)w - eps vanishes for some n >= 0
            raise DomainError("type-A exceptional function is singular for integer eps/omega; use 'merged'")
        E = pole_energy(PoleLine(Model.ONE_PHOTON, Kind.A, N), params)
        mode = "terminate" if kind == "1A" else "reset"
        if mode == "terminate" and N == 0:
            raise DomainError("kind 1A needs N >= 1")
        side_a = sum_series(_Recurrence(params, E, +1), policy, mode, N)
        side_b = sum_series(_Recurrence(params, E, -1), policy)
    else:
        if M is None:
            raise DomainError(f"kind {kind} needs M")
        if np.any([_is_integer(v) and round(v) <= M for v in np.ravel(eps_ratio)]):
            raise DomainError("type-B exceptional function is singular for integer eps/omega; use 'merged'")
        E = pole_energy(PoleLine(Model.ONE_PHOTON, Kind.B, M), params)
        mode = "terminate" if kind == "1B" else "reset"
        if mode == "terminate" and M == 0:
            raise DomainError("kind 1B needs M >= 1")
        side_a = sum_series(_Recurrence(params, E, +1), policy)
        side_b = sum_series(_Recurrence(params, E, -1), policy, mode, M)
    return scalar_or_array(_combine(side_a, side_b))


def coefficient_at_pole(params: ModelParams, kind: Kind | str, index: int):
    """f_N at E = E_N^A (kind A) or c_M at E = E_M^B (kind B), bias held fixed; vectorized in g."""
    kind = Kind(kind)
    sign = 1 if kind is Kind.A else -1
    E = pole_energy(PoleLine(Model.ONE_PHOTON, kind, index), params)
    rec = _Recurrence(params, E, sign)
    prev, cur = np.zeros(rec.shape), np.ones(rec.shape)
    for n in range(index):
        e = rec.half_delta * cur / rec.den(n)
        a, b, c = rec.coeffs(n)
        prev, cur = cur, a * cur + b * e + c * prev
    return scalar_or_array(cur)


@dataclass(frozen=True)
class ExceptionalPoint:
    kind: str
    line: PoleLine
    g: float
    energy: float
    epsilon: float


def find_exceptional_1p(kind: str, params: ModelParams, N: int | None = None, M: int | None = None,
                        g_interval: tuple[float, float] = (0.0, 2.0),
                        cfg: RootSearchConfig | None = None,
                        policy: SeriesPolicy = ONE_PHOTON_POLICY) -> PointList:
    """Zeros in g of an exceptional G-function (``params.g`` is ignored).

    Zeros of kinds 1A/1B are kept only where f_N (c_M) itself changes sign;
    the others land in ``.rejected``.
    """
    omega = float(params.omega)
    if cfg is None:
        cfg = RootSearchConfig.for_interval(*g_interval, omega=omega, points_per_unit=1000)
    lo, hi = cfg.interval
    cfg = RootSearchConfig((max(lo, 1e-3 * omega), hi), cfg.grid_points, cfg.abs_tol, cfg.pole_margin)

    def f(g):
        return g1p_exceptional(kind, params.with_(g=np.asarray(g)), N, M, policy)

    if kind in ("1A", "2A", "merged"):
        line = PoleLine(Model.ONE_PHOTON, Kind.A, N)
    else:
        line = PoleLine(Model.ONE_PHOTON, Kind.B, M)
    out = PointList()
    for g in bracket_roots(f, cfg):
        p = params.with_(g=g)
        point = ExceptionalPoint(kind, line, g, float(pole_energy(line, p)), float(params.epsilon))
        # kind-1 functions also vanish where the pinned coefficient does not; keep only true ones
        if kind in ("1A", "1B") and not changes_sign_near(
                lambda x: coefficient_at_pole(params.with_(g=x), line.kind, line.index),
                g, VALIDATION_STEP * omega):
            out.rejected.append(point)
            continue
        out.append(point)
    return out
