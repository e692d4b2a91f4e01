import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabi_spectra import one_photon as op
from rabi_spectra import oracle, scan
from rabi_spectra.core import (
    DomainError,
    InconsistencyError,
    Kind,
    Model,
    ModelParams,
    PoleLine,
    PoleProximityError,
    pole_energy,
)

FIG1 = ModelParams(1.0, 1.5, 1.0, 0.3)
# integer bias overlaps the A and B pole families; pole-shape checks need them apart
SPLIT = ModelParams(1.0, 1.5, 0.7, 0.3)


def test_initial_coefficients():
    p = ModelParams(1.0, 1.5, 0.7, 0.4)
    E = 0.37
    fe, cd = op.coeffs_fe(p, E), op.coeffs_cd(p, E)
    assert fe.primary[0] == 1.0 and cd.primary[0] == 1.0
    g, w, eps, d = 0.4, 1.0, 0.7, 1.5
    f1 = (3 * g * g / w - eps / 2 - E - d * d / (4 * (-g * g / w + eps / 2 - E))) / (2 * g)
    assert fe.primary[1] == pytest.approx(f1, rel=1e-13)
    assert fe.converged and cd.converged


def test_mirror_branches_coincide_at_zero_bias():
    p = ModelParams(1.0, 1.2, 0.0, 0.5)
    fe, cd = op.coeffs_fe(p, 0.81), op.coeffs_cd(p, 0.81)
    n = min(len(fe.primary), len(cd.primary))
    assert np.array_equal(fe.primary[:n], cd.primary[:n])


def test_coefficients_vanish_at_quoted_crossing():
    p = ModelParams(1.0, 1.5, 1.0, 0.5995)
    assert abs(op.coefficient_at_pole(p, Kind.A, 1)) < 1e-3
    assert abs(op.coefficient_at_pole(p, Kind.B, 2)) < 1e-3


def test_pole_proximity_names_line():
    line = PoleLine(Model.ONE_PHOTON, Kind.B, 1)
    E = pole_energy(line, SPLIT)
    with pytest.raises(PoleProximityError) as info:
        op.g1p(SPLIT, E + 1e-9)
    assert info.value.line == line


def test_sign_flip_across_pole():
    E = pole_energy(PoleLine(Model.ONE_PHOTON, Kind.A, 1), SPLIT)
    left, right = op.g1p(SPLIT, E - 1e-4), op.g1p(SPLIT, E + 1e-4)
    assert np.sign(left) != np.sign(right)
    assert min(abs(left), abs(right)) > abs(op.g1p(SPLIT, E - 0.2))


@pytest.mark.parametrize("g", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_zeros_match_oracle(g):
    p = FIG1.with_(g=g)
    lo, _ = scan.default_window(Model.ONE_PHOTON, 1.0, 1.0, g)
    zeros = scan.spectrum_at(Model.ONE_PHOTON, p, (lo, 5.0))
    result = oracle.one_photon_spectrum(p)
    report = oracle.verify_zeros(zeros, result, 1e-6, window=(lo, 5.0))
    assert report.success, (report.unmatched_zeros, report.unmatched_levels)


@given(st.floats(0.1, 2.0), st.floats(0.05, 1.2), st.floats(-1.0, 4.0))
@settings(max_examples=60, deadline=None)
def test_zero_bias_reduction(delta, g, E):
    p = ModelParams(1.0, delta, 0.0, g)
    poles = [n - g * g for n in range(8)]
    if min(abs(E - x) for x in poles) < 1e-3:
        return
    ref = op.symmetric_g1p(p, E)
    assert abs(op.g1p(p, E) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_closed_form_n1_value():
    assert op.closed_form_1p(1, 2, 1.5) == pytest.approx([0.59948], abs=1e-5)


def test_no_root_beyond_bound():
    g = np.linspace(0.01, 3, 3000)
    assert np.all(np.sign(op.f_N_pole(1, 2, 3.0, 1.0, g)) == np.sign(op.f_N_pole(1, 2, 3.0, 1.0, g[0])))
    assert op.find_degenerate_1p(1, 2, 3.0) == []


def test_f_roots_quoted():
    pts = op.find_degenerate_1p(2, 3, 1.5)
    assert [round(p.g, 4) for p in pts] == [0.4804, 1.0287]
    for p in pts:
        assert p.epsilon == 1.0
        assert p.energy == pytest.approx(2.5 - p.g**2)
        assert max(p.residual_f, p.residual_c) < 1e-8


@pytest.mark.parametrize("N,M", [(0, 2), (2, 2), (3, 1)])
def test_pair_validation(N, M):
    with pytest.raises(DomainError):
        op.f_N_pole(N, M, 1.0, 1.0, 0.5)


def test_polynomial_roots_agree_with_solver():
    for n, m, delta in [(3, 5, 2.0), (4, 9, 1.0), (5, 6, 3.0)]:
        coeffs = [float(c) for c in op.constraint_polynomial(n, m, delta)]
        xs = np.roots(coeffs[::-1])
        xs = sorted(x.real for x in xs if abs(x.imag) < 1e-9 and x.real > 0 and x.real < 4 * max(2.0, math.sqrt(m)) ** 2)
        got = [p.g for p in op.find_degenerate_1p(n, m, delta)]
        assert got == pytest.approx([math.sqrt(x) / 2 for x in xs], abs=1e-8)
        assert len(got) <= n


@pytest.mark.parametrize("delta", [1.0, 1.5, 3.0])
def test_count_bound(delta):
    for n in range(1, 5):
        for m in range(n + 1, 9):
            assert len(op.find_degenerate_1p(n, m, delta)) <= n


def test_terminated_states():
    for p in op.find_degenerate_1p(2, 3, 1.5):
        nxt, scale = op.continued_coefficient(p)
        assert abs(nxt) < 1e-12 * scale
        a, b = op.degenerate_states_1p(p)
        assert a.displacement == -b.displacement == -p.g
        assert a.upper[-1] == pytest.approx(-4 * p.g / 1.5 * a.lower[-2])
        for s in (a, b):
            assert oracle.state_residual_1p(s, p.params) < 1e-8
        assert oracle.overlap(oracle.state_vector_1p(a), oracle.state_vector_1p(b)) < 1 - 1e-8


def test_inconsistency_error_carries_residuals():
    err = InconsistencyError("x", 1e-3, 2e-3)
    assert (err.residual_f, err.residual_c) == (1e-3, 2e-3)


class TestExceptional:
    def test_kind_1a_matches_pinned_coefficient_zeros(self):
        # integer eps makes 1A singular, so use a non-integer bias
        p = ModelParams(1.0, 1.5, 0.5, 0.0)
        pts = op.find_exceptional_1p("1A", p, N=2)
        g = np.linspace(1e-3, 2.0, 4001)
        ref = [x for x in g[:-1][np.sign(op.coefficient_at_pole(p.with_(g=g[:-1]), Kind.A, 2))
                                 != np.sign(op.coefficient_at_pole(p.with_(g=g[1:]), Kind.A, 2))]]
        assert len(pts) == len(ref)
        assert [x.g for x in pts] == pytest.approx(ref, abs=1e-3)
        # spurious zeros of the truncated function are kept apart, and are not eigenvalues
        assert pts.rejected
        for bad in pts.rejected:
            res = oracle.one_photon_spectrum(p.with_(g=bad.g))
            assert not oracle.levels_near(res, bad.energy, 1e-6)
        for good in pts:
            res = oracle.one_photon_spectrum(p.with_(g=good.g))
            assert oracle.levels_near(res, good.energy, 1e-6)

    def test_kind_1a_rejects_integer_bias(self):
        with pytest.raises(DomainError):
            op.g1p_exceptional("1A", ModelParams(1.0, 1.5, 1.0, 0.4), N=1)

    def test_merged_requires_integer_bias(self):
        with pytest.raises(DomainError):
            op.g1p_exceptional("merged", ModelParams(1.0, 1.5, 0.5, 0.4), N=1, M=2)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            op.g1p_exceptional("3A", ModelParams(1.0, 1.5, 0.5, 0.4), N=1)

    def test_type_b_point_at_large_gap(self):
        p = ModelParams(1.0, 3.0, 1.0, 0.0)
        pts = op.find_exceptional_1p("2B", p, M=0)
        assert len(pts) == 1
        res = oracle.one_photon_spectrum(p.with_(g=pts[0].g))
        assert len(oracle.levels_near(res, pts[0].energy, 1e-6)) == 1

    @pytest.mark.parametrize("delta", [1.5, 3.0])
    def test_merged_zeros_are_single_levels(self, delta):
        p = ModelParams(1.0, delta, 1.0, 0.0)
        count = 0
        for n in range(0, 3):
            for pt in op.find_exceptional_1p("merged", p, N=n, M=n + 1, g_interval=(0.0, 1.5)):
                res = oracle.one_photon_spectrum(p.with_(g=pt.g))
                assert len(oracle.levels_near(res, pt.energy, 1e-6)) == 1
                count += 1
        assert count > 0
