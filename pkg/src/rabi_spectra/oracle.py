"""Truncated-Fock-space diagonalization used to check the G-function machinery.

One-photon matrices are built in the lab frame
    H = Delta/2 sz + eps/2 sx + w a'a + g (a + a') sx,
two-photon matrices in the qubit-rotated frame restricted to one Fock parity.
The two frames are related by R = [[1, 1], [-1, 1]]/sqrt(2):
R H_lab R^T = H_rot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .core import BargmannIndex, ConvergenceError, DomainError, Model, ModelParams

STABILITY_TOL = 1e-8
DEGENERACY_TOL = 1e-7

ROTATION = np.array([[1.0, 1.0], [-1.0, 1.0]]) / math.sqrt(2.0)


@dataclass
class TruncatedHamiltonian:
    model: Model
    sector: str
    dim: int
    entries: NDArray
    n_max: int
    params: ModelParams
    q: BargmannIndex | None = None
    fock: NDArray = field(default=None, repr=False)

    def rebuilt(self, n_max: int) -> "TruncatedHamiltonian":
        if self.model is Model.ONE_PHOTON:
            return build_1p(self.params, n_max)
        return build_2p(self.params, n_max, self.q)


def _scalar_params(params: ModelParams) -> tuple[float, float, float, float]:
    try:
        return tuple(float(v) for v in (params.omega, params.delta, params.epsilon, params.g))
    except TypeError as exc:
        raise DomainError("oracle matrices need scalar parameters") from exc


def _ladder(n_max: int) -> NDArray:
    """Annihilation operator on |0>..|n_max>."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def build_1p(params: ModelParams, n_max: int) -> TruncatedHamiltonian:
    """Lab-frame one-photon matrix on |sigma> (x) |n>, sigma = up, down; n <= n_max."""
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    w, d, eps, g = _scalar_params(params)
    a = _ladder(n_max)
    x = a + a.T
    num = np.diag(np.arange(n_max + 1, dtype=float))
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    eye = np.eye(n_max + 1)
    h = (np.kron(d / 2 * sz + eps / 2 * sx, eye) + np.kron(np.eye(2), w * num)
         + g * np.kron(sx, x))
    h = 0.5 * (h + h.T)
    return TruncatedHamiltonian(Model.ONE_PHOTON, "full", h.shape[0], h, n_max, params,
                                fock=np.arange(n_max + 1))


def rotated_1p(params: ModelParams, n_max: int) -> NDArray:
    """Rotated-frame one-photon matrix, diagonal blocks w a'a +/- g(a+a') +/- eps/2."""
    w, d, eps, g = _scalar_params(params)
    a = _ladder(n_max)
    x = a + a.T
    num = w * np.diag(np.arange(n_max + 1, dtype=float))
    eye = np.eye(n_max + 1)
    upper = num + g * x + eps / 2 * eye
    lower = num - g * x - eps / 2 * eye
    off = -d / 2 * eye
    return np.block([[upper, off], [off, lower]])


def build_2p(params: ModelParams, n_max: int, q: BargmannIndex | str | None = None) -> TruncatedHamiltonian:
    """Rotated-frame two-photon matrix; ``q`` selects the even (1/4) or odd (3/4) Fock sector.

    ``q=None`` keeps every Fock state up to ``n_max``.
    """
    if n_max < 3:
        raise DomainError("n_max must be >= 3")
    w, d, eps, g = _scalar_params(params)
    if q is None:
        fock = np.arange(n_max + 1)
        sector = "full"
    else:
        q = BargmannIndex.parse(q)
        fock = np.arange(q.parity, n_max + 1, 2)
        sector = "parity-even" if q.parity == 0 else "parity-odd"
    k = len(fock)
    pos = {int(n): i for i, n in enumerate(fock)}
    two = np.zeros((k, k))
    for i, n in enumerate(fock):
        j = pos.get(int(n) + 2)
        if j is not None:
            two[i, j] = two[j, i] = math.sqrt((n + 1) * (n + 2))
    num = w * np.diag(fock.astype(float))
    eye = np.eye(k)
    upper = num + g * two + eps / 2 * eye
    lower = num - g * two - eps / 2 * eye
    off = -d / 2 * eye
    h = np.block([[upper, off], [off, lower]])
    return TruncatedHamiltonian(Model.TWO_PHOTON, sector, 2 * k, h, n_max, params, q, fock)


@dataclass
class OracleResult:
    eigenvalues: NDArray
    n_max: int
    converged_below: float


def _eigvalsh(matrix: NDArray) -> NDArray:
    try:
        return scipy.linalg.eigh(matrix, eigvals_only=True, check_finite=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConvergenceError(f"dense eigensolver failed on a {matrix.shape[0]}-dim matrix: {exc}") from exc


def eigenvalues(h: TruncatedHamiltonian | NDArray, count: int | None = None,
                stability_tol: float = STABILITY_TOL, check_cutoff: bool = True) -> OracleResult:
    """Lowest ``count`` eigenvalues of ``h``.

    For a TruncatedHamiltonian the problem is re-solved at twice the cutoff;
    ``converged_below`` is the lowest level that moved by ``stability_tol`` or
    more (every level strictly below it is cutoff-stable). Raw arrays get
    ``converged_below = inf``.
    """
    if not isinstance(h, TruncatedHamiltonian):
        mat = np.asarray(h, dtype=float)
        vals = _eigvalsh(mat)
        count = len(vals) if count is None else count
        if count > len(vals):
            raise DomainError("count exceeds matrix dimension")
        return OracleResult(vals[:count], 0, math.inf)
    count = h.dim if count is None else count
    if count > h.dim:
        raise DomainError("count exceeds matrix dimension")
    vals = _eigvalsh(h.entries)[:count]
    limit = math.inf
    if check_cutoff:
        ref = _eigvalsh(h.rebuilt(2 * h.n_max).entries)[:count]
        moved = np.flatnonzero(np.abs(ref - vals) >= stability_tol)
        if moved.size:
            limit = float(vals[moved[0]])
    return OracleResult(vals, h.n_max, limit)


def sector_spectrum(params: ModelParams, q, n_max: int = 400, count: int | None = None) -> OracleResult:
    return eigenvalues(build_2p(params, n_max, q), count)


def one_photon_spectrum(params: ModelParams, n_max: int = 200, count: int | None = None) -> OracleResult:
    return eigenvalues(build_1p(params, n_max), count)


# ---------------------------------------------------------------------------
# matching


@dataclass
class MatchReport:
    matched: list[tuple[float, float, float]]
    unmatched_zeros: list[float]
    unmatched_levels: list[float]
    tol: float

    @property
    def success(self) -> bool:
        return not self.unmatched_zeros and not self.unmatched_levels

    @property
    def worst(self) -> float:
        return max((m[2] for m in self.matched), default=0.0)


def verify_zeros(zeros: Sequence[float], result: OracleResult, tol: float = 1e-6,
                 window: tuple[float, float] | None = None,
                 exclude: Sequence[float] = ()) -> MatchReport:
    """Greedy nearest pairing of G-zeros with oracle levels.

    Levels are taken from ``window`` (default: everything) capped at
    ``result.converged_below``. Levels within ``tol`` of an ``exclude`` energy
    (e.g. degenerate or exceptional points, which are not G-zeros) are skipped.
    """
    lo, hi = window if window is not None else (-math.inf, math.inf)
    hi = min(hi, result.converged_below)
    levels = [float(v) for v in result.eigenvalues if lo <= v < hi]
    levels = [v for v in levels if all(abs(v - x) > tol for x in exclude)]
    zs = [float(z) for z in zeros]
    pairs = sorted((abs(z - v), i, j) for i, z in enumerate(zs) for j, v in enumerate(levels)
                   if abs(z - v) <= tol)
    used_z, used_l, matched = set(), set(), []
    for dist, i, j in pairs:
        if i in used_z or j in used_l:
            continue
        used_z.add(i); used_l.add(j)
        matched.append((zs[i], levels[j], dist))
    matched.sort()
    return MatchReport(matched,
                       [z for i, z in enumerate(zs) if i not in used_z],
                       [v for j, v in enumerate(levels) if j not in used_l], tol)


def degenerate_pairs(result: OracleResult, omega: float = 1.0,
                     threshold: float | None = None) -> list[tuple[float, float]]:
    """Adjacent eigenvalue pairs closer than ``threshold`` (default 1e-7 w)."""
    thr = DEGENERACY_TOL * omega if threshold is None else threshold
    v = np.asarray(result.eigenvalues)
    close = np.flatnonzero(np.diff(v) < thr)
    return [(float(v[i]), float(v[i + 1])) for i in close]


def levels_near(result: OracleResult, energy: float, tol: float) -> list[float]:
    return [float(v) for v in result.eigenvalues if abs(v - energy) < tol]


# ---------------------------------------------------------------------------
# embedding terminated states into the Fock basis


def _frame_basis(generator: NDArray, n_terms: int) -> NDArray:
    """Columns U|n>, n < n_terms, with U = expm(generator) on the working space."""
    u = scipy.linalg.expm(generator)
    return u[:, :n_terms]


def _fock_vector(upper: NDArray, lower: NDArray, scale: Callable[[int], float],
                 basis: NDArray, alternating: bool) -> NDArray:
    n_terms = len(upper)
    sign = np.array([(-1.0) ** n if alternating else 1.0 for n in range(n_terms)])
    s = np.array([scale(n) for n in range(n_terms)]) * sign
    top = basis @ (s * upper)
    bottom = basis @ (s * lower)
    return np.concatenate([top, bottom])


def state_vector_1p(state, dim: int = 160, lab_frame: bool = True) -> NDArray:
    """Fock-basis vector of a one-photon terminated state (lab frame by default).

    Displaced number states D(alpha)|n> are generated with a matrix
    exponential on ``dim`` Fock states; coefficients carry the sqrt(n!) factor.
    """
    n_max = dim - 1
    a = _ladder(n_max)
    alpha = state.displacement
    basis = _frame_basis(alpha * (a.T - a), len(state.upper))
    vec = _fock_vector(np.asarray(state.upper), np.asarray(state.lower),
                       lambda n: math.sqrt(math.factorial(n)), basis, state.alternating)
    if lab_frame:
        vec = np.kron(ROTATION.T, np.eye(dim)) @ vec
    return vec


def state_vector_2p(state, dim: int = 240) -> NDArray:
    """Rotated-frame vector, on all Fock states < ``dim``, of a two-photon terminated state.

    The squeezed number states S|2m + parity> use S = expm(s/2 (a^2 - a'^2))
    with s = ``state.squeeze``; coefficients carry sqrt([2(m+q-1/4)]!).
    """
    n_max = dim - 1
    a = _ladder(n_max)
    parity = state.q.parity
    s = state.squeeze
    u = scipy.linalg.expm(s / 2 * (a @ a - a.T @ a.T))
    cols = [2 * m + parity for m in range(len(state.upper))]
    basis = u[:, cols]
    vec = _fock_vector(np.asarray(state.upper), np.asarray(state.lower),
                       lambda m: math.sqrt(math.factorial(2 * m + parity)), basis, state.alternating)
    return vec


def residual(h: NDArray, vec: NDArray, energy: float) -> float:
    """||H v - E v|| / ||v||."""
    return float(np.linalg.norm(h @ vec - energy * vec) / np.linalg.norm(vec))


def state_residual_1p(state, params: ModelParams, dim: int = 160) -> float:
    h = build_1p(params, dim - 1).entries
    return residual(h, state_vector_1p(state, dim), state.energy)


def state_residual_2p(state, params: ModelParams, dim: int = 240) -> float:
    h = build_2p(params, dim - 1, None).entries
    return residual(h, state_vector_2p(state, dim), state.energy)


def overlap(u: NDArray, v: NDArray) -> float:
    """|<u|v>| / (||u|| ||v||)."""
    return float(abs(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v)))
