"""Asymmetric two-photon Rabi model in squeezed (Bogoliubov) frames.

Works in the qubit-rotated frame

    H = [[w a'a + g(a'^2 + a^2) + eps/2, -Delta/2],
         [-Delta/2, w a'a - g(a'^2 + a^2) - eps/2]]

split into the even (q = 1/4) and odd (q = 3/4) Fock sectors. The A-frame
squeezes the upper oscillator diagonal (free frequency beta); the B-frame is
the mirror image and, as in the one-photon case, is the eps -> -eps copy of
the A recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from .core import (
    TWO_PHOTON_POLICY,
    BargmannIndex,
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
    beta,
    PointList,
    bracket_roots,
    broadcast_params,
    changes_sign_near,
    pole_energy,
    scalar_or_array,
    squeeze_r,
    sturm_count,
    sum_series,
)

# automated scans stop this far below the collapse point g = omega/2
COLLAPSE_EXCLUSION = 1e-3
# half-width used to confirm that a pinned coefficient really changes sign at a zero
VALIDATION_STEP = 1e-7


def g_max_scan(omega: float = 1.0) -> float:
    return 0.5 * omega * (1 - COLLAPSE_EXCLUSION)


@dataclass(frozen=True)
class SqueezeFrame:
    r: float
    beta: float
    tanh_r: float
    cosh_r: float


def squeeze_frame(params: ModelParams) -> SqueezeFrame:
    r = squeeze_r(params)
    return SqueezeFrame(r, beta(params), np.tanh(r), np.cosh(r))


# ---------------------------------------------------------------------------
# su(1,1) overlap weights


@dataclass
class WeightTable:
    """Omega_m = (-tanh r)^m [2(m+q-1/4)]! / (sqrt(cosh r) 2^m m!), stored as log|.| and sign."""

    q: BargmannIndex
    log_abs: NDArray
    sign: NDArray
    built_by: str

    @property
    def omega_m(self) -> NDArray:
        with np.errstate(over="ignore"):
            return self.sign * np.exp(self.log_abs)


def _ratio_factor(q: BargmannIndex, m):
    """(2m+2q+3/2)(2m+2q+1/2) / (2(m+1))."""
    qf = float(q)
    return (2 * m + 2 * qf + 1.5) * (2 * m + 2 * qf + 0.5) / (2 * (m + 1))


def _compensated_cumsum(values: NDArray) -> NDArray:
    """Kahan prefix sums; plain cumsum drifts by ~1e-12 over a few hundred log-steps."""
    out = np.empty(len(values))
    total = comp = 0.0
    for i, v in enumerate(values.tolist()):
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out


def weights(q, params: ModelParams, n_max: int, method: str = "ratio") -> WeightTable:
    """Overlap weights up to index ``n_max`` for scalar ``params``.

    ``ratio`` accumulates log|Omega_{m+1}/Omega_m|; ``lgamma`` evaluates the
    factorials directly through log-gamma. Both stay in log space.
    """
    q = BargmannIndex.parse(q)
    params.check_two_photon()
    r = float(squeeze_r(params))
    t = math.tanh(r)
    m = np.arange(n_max + 1)
    log0 = -0.5 * math.log(math.cosh(r))
    if t == 0.0:
        log_abs = np.full(n_max + 1, -np.inf)
        log_abs[0] = log0
        sign = np.ones(n_max + 1)
        return WeightTable(q, log_abs, sign, method)
    step_sign = 1.0 if -t > 0 else -1.0
    sign = step_sign ** m
    if method == "ratio":
        steps = math.log(abs(t)) + np.log(_ratio_factor(q, m[:-1]))
        log_abs = log0 + np.concatenate([[0.0], _compensated_cumsum(steps)])
    elif method == "lgamma":
        k = 2 * m + (0 if q is BargmannIndex.Q14 else 1)  # 2(m+q-1/4)
        log_abs = (log0 + m * math.log(abs(t)) + gammaln(k + 1)
                   - m * math.log(2.0) - gammaln(m + 1))
    else:
        raise DomainError(f"unknown weight construction {method!r}")
    return WeightTable(q, log_abs, sign, method)


# ---------------------------------------------------------------------------
# recurrences


class _Recurrence:
    """Un-substituted squeezed-frame recurrence (sign=+1: f/e, sign=-1: c/d)."""

    def __init__(self, params: ModelParams, E, q: BargmannIndex, sign: int):
        params.check_two_photon()
        self.q = float(q)
        self.omega = np.asarray(params.omega, dtype=float)
        self.g = np.asarray(params.g, dtype=float)
        self.eps = np.asarray(params.epsilon, dtype=float) * sign
        self.E = np.asarray(E, dtype=float)
        self.half_delta = np.asarray(params.delta, dtype=float) / 2
        self.beta = np.asarray(beta(params), dtype=float)
        self.shape = broadcast_params(params, self.E)
        r = np.asarray(squeeze_r(params), dtype=float)
        self._t = np.tanh(r)
        self._log0 = -0.5 * np.log(np.cosh(r))

    def den(self, n: int):
        return 2 * self.beta * (n + self.q) - self.E + (self.eps - self.omega) / 2

    def coeffs(self, n: int):
        pn = (n + self.q + 0.25) * (n + self.q + 0.75)
        head = 2 * (2 * self.omega**2 - self.beta**2) * (n + self.q) \
            - self.beta * (self.E + (self.eps + self.omega) / 2)
        scale = 8 * self.g * self.omega * pn
        a = head / scale
        b = -self.beta * self.half_delta / scale
        c = -1.0 / (4 * pn)
        return a, b, c

    def log_weight0(self):
        return self._log0, np.ones(self.shape)

    def log_weight_ratio(self, n: int):
        factor = (2 * n + 2 * self.q + 1.5) * (2 * n + 2 * self.q + 0.5) / (2 * (n + 1))
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self._t) * factor), np.sign(-self._t)


@dataclass
class CoefficientTable:
    """Raw f_n (or c_n) and partner e_n (or d_n) at one energy."""

    primary: NDArray
    partner: NDArray
    truncation_n: int
    converged: bool
    tail_estimate: float


def _check_scalar_pole(q: BargmannIndex, params: ModelParams, E: float, margin: float,
                       kinds=(Kind.A, Kind.B)):
    b = float(beta(params))
    for kind in kinds:
        line0 = PoleLine(Model.TWO_PHOTON, kind, 0, q)
        base = float(pole_energy(line0, params))
        if b == 0:
            continue
        m = round((E - base) / (2 * b))
        if m >= 0:
            pole = base + 2 * b * m
            if abs(E - pole) < margin:
                raise PoleProximityError(PoleLine(Model.TWO_PHOTON, kind, m, q), E, pole)


def _table(q, params, E, sign, policy, pole_margin) -> CoefficientTable:
    q = BargmannIndex.parse(q)
    if np.ndim(params.g) or np.ndim(E):
        raise DomainError("coefficient tables are built for scalar parameters")
    if not float(params.g) > 0:
        raise DomainError("coefficient recurrence needs g > 0")
    margin = 1e-6 * float(params.omega) if pole_margin is None else pole_margin
    _check_scalar_pole(q, params, float(E), margin, kinds=(Kind.A if sign > 0 else Kind.B,))
    res = sum_series(_Recurrence(params, E, q, sign), policy, record=True)
    f = np.array([float(c[0]) for c in res.coeffs])
    e = np.array([float(c[1]) for c in res.coeffs])
    return CoefficientTable(f, e, int(res.n_used), bool(res.converged), float(res.tail))


def coeffs_fe_2p(q, params: ModelParams, E: float, policy: SeriesPolicy = TWO_PHOTON_POLICY,
                 pole_margin: float | None = None) -> CoefficientTable:
    """f_n, e_n from f_{-1} = 0, f_0 = 1."""
    return _table(q, params, E, +1, policy, pole_margin)


def coeffs_cd_2p(q, params: ModelParams, E: float, policy: SeriesPolicy = TWO_PHOTON_POLICY,
                 pole_margin: float | None = None) -> CoefficientTable:
    """c_n, d_n: the eps-mirrored recurrence from c_0 = 1."""
    return _table(q, params, E, -1, policy, pole_margin)


def _combine(side_a: SeriesResult, side_b: SeriesResult):
    value = side_a.e_sum * side_b.e_sum - side_a.f_sum * side_b.f_sum
    return np.where(side_a.converged & side_b.converged, value, np.nan)


def g2p_values(q, params: ModelParams, E, policy: SeriesPolicy = TWO_PHOTON_POLICY) -> NDArray:
    """Vectorized G-function of sector q; NaN where a series did not converge."""
    q = BargmannIndex.parse(q)
    side_a = sum_series(_Recurrence(params, E, q, +1), policy)
    side_b = sum_series(_Recurrence(params, E, q, -1), policy)
    return _combine(side_a, side_b)


def g2p(q, params: ModelParams, E, policy: SeriesPolicy = TWO_PHOTON_POLICY,
        pole_margin: float | None = None):
    """Two-photon G-function in sector q; zeros in E give that sector's regular spectrum.

    G = (Delta/2)^2 [sum f_m W_m / denA_m][sum c_m W_m / denB_m] - [sum f_m W_m][sum c_m W_m]
    with W_m the su(1,1) overlap weights.
    """
    q = BargmannIndex.parse(q)
    params.check_two_photon()
    if not np.all(np.asarray(params.g) > 0):
        raise DomainError("g2p needs g > 0")
    if np.ndim(E) == 0 and np.ndim(params.g) == 0 and np.ndim(params.epsilon) == 0:
        margin = 1e-6 * float(params.omega) if pole_margin is None else pole_margin
        _check_scalar_pole(q, params, float(E), margin)
    return scalar_or_array(g2p_values(q, params, E, policy))


def symmetric_g2p(q, params: ModelParams, E: float, n_max: int = 150) -> float:
    """eps = 0 reference: (sum e W)^2 - (sum f W)^2 from plain floats and log-gamma weights."""
    q = BargmannIndex.parse(q)
    qf = float(q)
    w, d, g = float(params.omega), float(params.delta), float(params.g)
    b = w * math.sqrt(1 - 4 * (g / w) ** 2)
    r = 0.25 * math.log((1 - 2 * g / w) / (1 + 2 * g / w))
    t = math.tanh(r)
    # weighted terms F_m = f_m Omega_m, stepped with rho_m = Omega_{m+1}/Omega_m
    f_prev, f = 0.0, 1.0 / math.sqrt(math.cosh(r))
    rho_prev = 0.0
    sum_e = sum_f = 0.0
    for m in range(n_max):
        den = 2 * b * (m + qf) - E - w / 2
        sum_e += d / 2 * f / den
        sum_f += f
        pm = (m + qf + 0.25) * (m + qf + 0.75)
        num = 2 * (2 * w * w - b * b) * (m + qf) - b * (E + w / 2) - d * d * b / 4 / den
        rho = -t * (2 * m + 2 * qf + 1.5) * (2 * m + 2 * qf + 0.5) / (2 * (m + 1))
        f_prev, f = f, rho * num / (8 * g * w * pm) * f - rho * rho_prev * f_prev / (4 * pm)
        rho_prev = rho
    return sum_e**2 - sum_f**2


# ---------------------------------------------------------------------------
# degenerate crossings, eps = 2 beta (M - N)


def _check_pair(N: int, M: int) -> None:
    if N < 1:
        raise DomainError("true crossings need N >= 1; N = 0 lines only carry exceptional points")
    if M <= N:
        raise DomainError("need M > N (canonical eps >= 0)")


def _pole_sequence(q, N, M, delta, omega, g, upto, swap) -> list:
    qf = float(BargmannIndex.parse(q))
    g = np.asarray(g, dtype=float)
    b2 = omega**2 - 4 * g**2
    own, other = (M, N) if swap else (N, M)
    seq = [np.ones_like(g)]
    prev = np.zeros_like(g)
    for n in range(upto):
        pn = (n + qf + 0.25) * (n + qf + 0.75)
        head = 2 * omega**2 * (n + qf) - b2 * (n + other + 2 * qf) + delta**2 / (16 * (own - n))
        nxt = head / (4 * g * omega * pn) * seq[-1] - prev / (4 * pn)
        prev = seq[-1]
        seq.append(nxt)
    return seq


def f_N_pole_2p(q, N: int, M: int, delta: float, omega: float, g):
    """f_N^(q) with E = (M+N+2q)beta - w/2 and eps = 2 beta (M-N) substituted; vectorized in g."""
    _check_pair(N, M)
    return scalar_or_array(_pole_sequence(q, N, M, delta, omega, g, N, swap=False)[-1])


def c_M_pole_2p(q, N: int, M: int, delta: float, omega: float, g):
    """c_M^(q) at the same pole energy and bias; vectorized in g."""
    _check_pair(N, M)
    return scalar_or_array(_pole_sequence(q, N, M, delta, omega, g, M, swap=True)[-1])


def constraint_polynomial_2p(q, N: int, M: int, delta: float, omega: float = 1.0,
                             which: str = "f") -> list[Fraction]:
    """Exact coefficients (ascending in y = beta^2/w^2) of (4g/w)^n prod_k P_k f_n at n = N.

    p_{n+1} = [2(n+q) - y(n+M+2q) + d^2/(16(N-n))] p_n - (1-y) P_{n-1} p_{n-1}
    with P_k = (k+q+1/4)(k+q+3/4) and d = Delta/w.
    """
    _check_pair(N, M)
    qf = BargmannIndex.parse(q).value
    own, other, top = (N, M, N) if which == "f" else (M, N, M)
    d2 = Fraction(delta) ** 2 / Fraction(omega) ** 2
    prev: list[Fraction] = [Fraction(0)]
    cur: list[Fraction] = [Fraction(1)]
    for n in range(top):
        const = 2 * (n + qf) + d2 / (16 * (own - n))
        lin = -(n + other + 2 * qf)
        p_prev = (n - 1 + qf + Fraction(1, 4)) * (n - 1 + qf + Fraction(3, 4))
        nxt = [Fraction(0)] * (len(cur) + 1)
        for k, c in enumerate(cur):
            nxt[k] += const * c
            nxt[k + 1] += lin * c
        for k, c in enumerate(prev):
            nxt[k] -= p_prev * c
            nxt[k + 1] += p_prev * c
        prev, cur = cur, nxt
    return cur


def count_roots_2p(q, N: int, M: int, delta: float, omega: float = 1.0, which: str = "f",
                   g_interval: tuple[float, float] | None = None) -> int:
    """Exact number of distinct roots with g in the (open-ish) interval, via Sturm on y = 1 - 4g^2/w^2."""
    lo, hi = g_interval if g_interval is not None else (0.0, 0.5 * omega)
    y_lo = 1 - 4 * Fraction(hi) ** 2 / Fraction(omega) ** 2
    y_hi = 1 - 4 * Fraction(lo) ** 2 / Fraction(omega) ** 2
    return sturm_count(constraint_polynomial_2p(q, N, M, delta, omega, which), y_lo, y_hi)


def _g_from_beta2(b2: float, omega: float) -> float:
    return 0.5 * math.sqrt(omega**2 - b2)


def closed_form_2p(q, N: int, M: int, delta: float, omega: float = 1.0) -> list[tuple[float, float]]:
    """Hard-coded (g, eps) crossing locations for N = 1 (any M > 1) and (N, M) = (2, 3).

    N = 1:   beta^2 = (2q + d^2/16)/(M + 2q),  eps = (M-1) sqrt((8q + d^2/4)/(2q + M))
    (2, 3):  beta^2 = 1/3 + 23d^2/2016 +/- sqrt(25d^4/256 + 21d^2/2 + 1008)/126    (q = 1/4)
             beta^2 = 5/11 + 29d^2/3168 +/- sqrt(20/363 + d^2/8712 + 49d^4/3168^2)  (q = 3/4)
    in units of omega (d = Delta/w); only 0 < beta^2 < w^2 survive. Sorted by g.
    """
    q = BargmannIndex.parse(q)
    _check_pair(N, M)
    d2 = (delta / omega) ** 2
    qf = float(q)
    if N == 1:
        if not math.sqrt(d2) < 4 * math.sqrt(M):
            return []
        b2s = [(2 * qf + d2 / 16) / (M + 2 * qf)]
    elif (N, M) == (2, 3):
        if q is BargmannIndex.Q14:
            mid = 1 / 3 + 23 * d2 / 2016
            rad = math.sqrt(25 * d2**2 / 256 + 21 * d2 / 2 + 1008) / 126
        else:
            mid = 5 / 11 + 29 * d2 / 3168
            rad = math.sqrt(20 / 363 + d2 / 8712 + 49 * d2**2 / 3168**2)
        b2s = [mid - rad, mid + rad]
    else:
        raise DomainError(f"no closed form for (N, M) = ({N}, {M})")
    out = []
    for b2 in b2s:
        if 0 < b2 < 1:
            g = _g_from_beta2(b2 * omega**2, omega)
            out.append((g, 2 * omega * math.sqrt(b2) * (M - N)))
    return sorted(out)


def closed_form_2p_g_N2M3(q, delta: float, omega: float = 1.0) -> list[float]:
    """(2, 3) couplings written directly in g (the second, equivalent closed form)."""
    q = BargmannIndex.parse(q)
    d2 = (delta / omega) ** 2
    if q is BargmannIndex.Q14:
        mid, rad = 2 / 3 - 23 * d2 / 2016, math.sqrt(25 * d2**2 + 2688 * d2 + 258048) / 2016
    else:
        mid, rad = 6 / 11 - 29 * d2 / 3168, math.sqrt(49 * d2**2 + 1152 * d2 + 552960) / 3168
    return sorted(omega / 2 * math.sqrt(v) for v in (mid - rad, mid + rad) if 0 < v < 1)


@dataclass(frozen=True)
class DegeneratePoint2p:
    q: BargmannIndex
    N: int
    M: int
    g: float
    beta: float
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


def _relative_residual(seq: list) -> float:
    return abs(float(seq[-1])) / max(abs(float(v)) for v in seq[:-1])


def find_degenerate_2p(q, N: int, M: int, delta: float, omega: float = 1.0,
                       cfg: RootSearchConfig | None = None, tol: float = DEGENERATE_TOL,
                       check_closed_form: bool = True, max_refine: int = 6) -> list[DegeneratePoint2p]:
    """Crossings in sector q where eps = 2 beta(g) (M-N) and f_N = c_M = 0.

    The search variable is g on (0, w/2) minus the collapse exclusion; the
    grid is refined until it resolves as many roots as the exact Sturm count.
    """
    q = BargmannIndex.parse(q)
    _check_pair(N, M)
    if cfg is None:
        cfg = RootSearchConfig.for_interval(0.0, g_max_scan(omega), omega=omega, abs_tol=CROSSING_TOL * omega)
    lo, hi = cfg.interval
    cfg = RootSearchConfig((max(lo, cfg.pole_margin), min(hi, g_max_scan(omega))),
                           cfg.grid_points, cfg.abs_tol, cfg.pole_margin)
    expected = count_roots_2p(q, N, M, delta, omega, "f", cfg.interval)

    def f(g):
        return f_N_pole_2p(q, N, M, delta, omega, g)

    roots = bracket_roots(f, cfg)
    for _ in range(max_refine):
        if len(roots) == expected:
            break
        cfg = cfg.refined(4)
        roots = bracket_roots(f, cfg)
    if len(roots) != expected:
        raise InconsistencyError(
            f"(q={q}, N={N}, M={M}, Delta={delta}) grid found {len(roots)} roots, exact count {expected}")

    points = []
    for g in roots:
        b = omega * math.sqrt(1 - 4 * (g / omega) ** 2)
        res_f = _relative_residual(_pole_sequence(q, N, M, delta, omega, g, N, swap=False))
        res_c = _relative_residual(_pole_sequence(q, N, M, delta, omega, g, M, swap=True))
        if res_c >= tol or res_f >= tol:
            raise InconsistencyError(f"f_{N} root at g={g} is not a root of c_{M}", res_f, res_c)
        points.append(DegeneratePoint2p(q, N, M, g, b, 2 * b * (M - N),
                                        (M + N + 2 * float(q)) * b - omega / 2,
                                        res_f, res_c, omega, delta))
    if check_closed_form and (N == 1 or (N, M) == (2, 3)):
        ref = [gg for gg, _ in closed_form_2p(q, N, M, delta, omega) if cfg.interval[0] < gg < cfg.interval[1]]
        got = [p.g for p in points]
        if len(ref) != len(got) or any(abs(a - b) > 1e-9 * omega for a, b in zip(ref, got)):
            raise InconsistencyError(f"closed form {ref} disagrees with solver {got}")
    return points


def roots_c_M_pole_2p(q, N: int, M: int, delta: float, omega: float = 1.0,
                      cfg: RootSearchConfig | None = None) -> list[float]:
    """Independent scan for the roots of c_M^(q) on (0, w/2) minus the collapse zone."""
    _check_pair(N, M)
    if cfg is None:
        cfg = RootSearchConfig.for_interval(0.0, g_max_scan(omega), omega=omega, abs_tol=CROSSING_TOL * omega)
    lo, hi = cfg.interval
    cfg = RootSearchConfig((max(lo, cfg.pole_margin), min(hi, g_max_scan(omega))),
                           cfg.grid_points, cfg.abs_tol, cfg.pole_margin)
    return list(bracket_roots(lambda g: c_M_pole_2p(q, N, M, delta, omega, g), cfg))


# ---------------------------------------------------------------------------
# terminated states


@dataclass
class TerminatedState2p:
    """Finite expansion in a squeezed frame of the rotated Hamiltonian.

    State = sum_m s_m sqrt([2(m+q-1/4)]!) (upper[m] |q,m>_X (x) |up> + lower[m] |q,m>_X (x) |down>)
    where |q,m>_X = S_X |2m + parity> and S_X = exp(squeeze/2 (a^2 - a'^2));
    s_m = (-1)^m when ``alternating`` (B frame).
    """

    frame: str
    q: BargmannIndex
    squeeze: float
    upper: NDArray
    lower: NDArray
    alternating: bool
    energy: float


def degenerate_states_2p(point: DegeneratePoint2p) -> tuple[TerminatedState2p, TerminatedState2p]:
    """A-state ending at e_N = -(4gw/(Delta beta)) f_{N-1}; B-state ending at d_M likewise."""
    q, N, M, g, w, d, b = point.q, point.N, point.M, point.g, point.omega, point.delta, point.beta
    f = [float(v) for v in _pole_sequence(q, N, M, d, w, g, N, swap=False)]
    c = [float(v) for v in _pole_sequence(q, N, M, d, w, g, M, swap=True)]
    e = [d / 2 * f[n] / (2 * b * (n - N)) for n in range(N)] + [-4 * g * w / (d * b) * f[N - 1]]
    dd = [d / 2 * c[n] / (2 * b * (n - M)) for n in range(M)] + [-4 * g * w / (d * b) * c[M - 1]]
    r = float(squeeze_r(point.params))
    state_a = TerminatedState2p("A", q, -r, np.array(e), np.array(f[:N] + [0.0]), False, point.energy)
    state_b = TerminatedState2p("B", q, r, np.array(c[:M] + [0.0]), np.array(dd), True, point.energy)
    return state_a, state_b


def continued_coefficient_2p(point: DegeneratePoint2p) -> tuple[float, float]:
    """(f_{N+1}, max |f_n|) when the recurrence runs past the terminated e_N."""
    q, N, M, g, w, d, b = point.q, point.N, point.M, point.g, point.omega, point.delta, point.beta
    f = [float(v) for v in _pole_sequence(q, N, M, d, w, g, N, swap=False)]
    rec = _Recurrence(point.params, point.energy, q, +1)
    a_, b_, c_ = (float(np.asarray(v)) for v in rec.coeffs(N))
    e_N = -4 * g * w / (d * b) * f[N - 1]
    return a_ * f[N] + b_ * e_N + c_ * f[N - 1], max(abs(v) for v in f)


# ---------------------------------------------------------------------------
# exceptional G-functions


EXCEPTIONAL_KINDS = ("1A", "2A", "1B", "2B")


def g2p_exceptional(kind: str, q, params: ModelParams, index: int,
                    policy: SeriesPolicy = TWO_PHOTON_POLICY):
    """Exceptional G-functions with E pinned to the ``index``-th pole of the kind's type.

    1A/1B truncate the pinned series at the diverging term with the
    terminating partner coefficient; 2A/2B restart it there with e_N = 1
    (resp. d_M = 1). Vectorized in g and eps.
    """
    q = BargmannIndex.parse(q)
    if kind not in EXCEPTIONAL_KINDS:
        raise DomainError(f"unknown exceptional kind {kind!r}")
    if index < 0 or (kind[0] == "1" and index == 0):
        raise DomainError(f"invalid pole index {index} for kind {kind}")
    params.check_two_photon()
    if not np.all(np.asarray(params.g) > 0):
        raise DomainError("exceptional G-functions need g > 0")
    line_kind = Kind.A if kind.endswith("A") else Kind.B
    E = pole_energy(PoleLine(Model.TWO_PHOTON, line_kind, index, q), params)
    mode = "terminate" if kind[0] == "1" else "reset"
    if line_kind is Kind.A:
        side_a = sum_series(_Recurrence(params, E, q, +1), policy, mode, index)
        side_b = sum_series(_Recurrence(params, E, q, -1), policy)
    else:
        side_a = sum_series(_Recurrence(params, E, q, +1), policy)
        side_b = sum_series(_Recurrence(params, E, q, -1), policy, mode, index)
    return scalar_or_array(_combine(side_a, side_b))


def coefficient_at_pole_2p(q, params: ModelParams, kind, index: int):
    """f_N at E = E_N^A (kind A) or c_M at E = E_M^B (kind B), bias fixed; vectorized in g."""
    q = BargmannIndex.parse(q)
    kind = Kind(kind)
    sign = 1 if kind is Kind.A else -1
    E = pole_energy(PoleLine(Model.TWO_PHOTON, kind, index, q), params)
    rec = _Recurrence(params, E, q, sign)
    prev, cur = np.zeros(rec.shape), np.ones(rec.shape)
    for n in range(index):
        e = rec.half_delta * cur / rec.den(n)
        a, b, c = rec.coeffs(n)
        prev, cur = cur, a * cur + b * e + c * prev
    return scalar_or_array(cur)


def exceptional_g_poles(kind: str, index: int, epsilon: float, omega: float = 1.0) -> list[float]:
    """Couplings where the unpinned series of an exceptional G-function hits a pole (fixed eps)."""
    out = []
    if epsilon == 0:
        return out
    if kind.endswith("A"):
        # 2 beta (n - N) = eps for n > N
        n = index + 1
        while True:
            b = epsilon / (2 * (n - index))
            if b < omega:
                out.append(_g_from_beta2(b * b, omega))
            if b < 1e-3 * omega:
                break
            n += 1
    else:
        # 2 beta (M - n) = eps for n < M
        for n in range(index):
            b = epsilon / (2 * (index - n))
            if b < omega:
                out.append(_g_from_beta2(b * b, omega))
    return sorted(out)


@dataclass(frozen=True)
class ExceptionalPoint2p:
    kind: str
    line: PoleLine
    g: float
    energy: float
    epsilon: float


def params_for(base: ModelParams, g, k: float | None = None) -> ModelParams:
    """Copy of ``base`` at coupling g; with ``k`` the bias follows eps = k beta(g)."""
    g = np.asarray(g, dtype=float)
    p = base.with_(g=g)
    if k is not None:
        p = p.with_(epsilon=k * np.asarray(beta(p)))
    return p


def find_exceptional_2p(kind: str, q, params: ModelParams, index: int,
                        g_interval: tuple[float, float] | None = None, k: float | None = None,
                        cfg: RootSearchConfig | None = None,
                        policy: SeriesPolicy = TWO_PHOTON_POLICY) -> PointList:
    """Zeros in g of an exceptional G-function; bias fixed or eps = k beta(g).

    Zeros of kinds 1A/1B are kept only where f_N (c_M) itself changes sign;
    the others land in ``.rejected``.
    """
    q = BargmannIndex.parse(q)
    omega = float(params.omega)
    if g_interval is None:
        g_interval = (0.0, g_max_scan(omega))
    lo, hi = g_interval
    hi = min(hi, g_max_scan(omega))
    if cfg is None:
        cfg = RootSearchConfig.for_interval(max(lo, 1e-3 * omega), hi, omega=omega)
    poles = [] if k is not None else exceptional_g_poles(kind, index, float(params.epsilon), omega)
    if k is not None and float(k) == round(float(k)) and round(float(k)) % 2 == 0:
        # the unpinned series has den 2 beta (n - N - k/2) (A) or 2 beta (n - M + k/2) (B)
        if kind.endswith("A") or index >= round(float(k)) // 2:
            raise DomainError("eps = k beta with even k makes the unpinned series singular here")
    line = PoleLine(Model.TWO_PHOTON, Kind.A if kind.endswith("A") else Kind.B, index, q)

    def f(g):
        return g2p_exceptional(kind, q, params_for(params, g, k), index, policy)

    out = PointList()
    for g in bracket_roots(f, cfg, poles):
        p = params_for(params, g, k)
        point = ExceptionalPoint2p(kind, line, g, float(pole_energy(line, p)), float(p.epsilon))
        # kind-1 functions also vanish where the pinned coefficient does not; keep only true ones
        if kind[0] == "1" and not changes_sign_near(
                lambda x: coefficient_at_pole_2p(q, params_for(params, x, k), line.kind, index),
                g, VALIDATION_STEP * omega):
            out.rejected.append(point)
            continue
        out.append(point)
    return out


def find_coefficient_zeros_2p(q, params: ModelParams, kind, index: int,
                              g_interval: tuple[float, float] | None = None, k: float | None = None,
                              cfg: RootSearchConfig | None = None) -> list[ExceptionalPoint2p]:
    """Zeros in g of f_N (kind A) or c_M (kind B) at their own pole energy."""
    q = BargmannIndex.parse(q)
    kind = Kind(kind)
    omega = float(params.omega)
    lo, hi = g_interval if g_interval is not None else (0.0, g_max_scan(omega))
    if cfg is None:
        cfg = RootSearchConfig.for_interval(max(lo, 1e-3 * omega), min(hi, g_max_scan(omega)), omega=omega)
    line = PoleLine(Model.TWO_PHOTON, kind, index, q)
    out = []
    for g in bracket_roots(lambda g: coefficient_at_pole_2p(q, params_for(params, g, k), kind, index), cfg):
        p = params_for(params, g, k)
        out.append(ExceptionalPoint2p(f"coef{kind.value}", line, g, float(pole_energy(line, p)),
                                      float(p.epsilon)))
    return out


def normalized_energy(E, q, epsilon, beta_value, omega: float = 1.0):
    """E' = (E + w/2)/(2 beta) - q + eps/(4 beta); pole lines become horizontal."""
    q = BargmannIndex.parse(q)
    b = np.asarray(beta_value, dtype=float)
    if np.any(b <= 0):
        raise DomainError("normalized energy needs beta > 0")
    out = (np.asarray(E) + omega / 2) / (2 * b) - float(q) + np.asarray(epsilon) / (4 * b)
    return scalar_or_array(out)
