import numpy as np
import pytest

from rabi_spectra import one_photon as op
from rabi_spectra import scan
from rabi_spectra import two_photon as tp
from rabi_spectra.core import DomainError, InconsistencyError, Model, ModelParams, pole_energy


class TestEpsilonRule:
    def test_exactly_one(self):
        with pytest.raises(DomainError):
            scan.EpsilonRule()
        with pytest.raises(DomainError):
            scan.EpsilonRule(epsilon=1.0, k=1.0)
        with pytest.raises(DomainError):
            scan.EpsilonRule.fixed(-0.1)

    def test_scaled_follows_beta(self):
        p = scan.EpsilonRule.scaled(2.0).params(1.0, 1.0, 0.3)
        assert float(p.epsilon) == pytest.approx(1.6)
        assert float(scan.EpsilonRule.fixed(0.4).params(1.0, 1.0, 0.3).epsilon) == 0.4


def test_default_windows():
    assert scan.default_window(Model.ONE_PHOTON, 1.0, 1.0, 0.5) == pytest.approx((-1.75, 6.0))
    assert scan.default_window(Model.TWO_PHOTON, 2.0) == (-2.0, 12.0)


def _on_lines(point):
    params = ModelParams(1.0, 0.0, point.epsilon, point.g)
    return all(abs(pole_energy(line, params) - point.energy) < 1e-8 for line in point.lines)


def test_one_photon_trace_marks_quoted_crossings():
    grid = np.linspace(0.1, 1.2, 12)
    recs = scan.trace(Model.ONE_PHOTON, 1.5, scan.EpsilonRule.fixed(1.0), grid, points_per_unit=500)
    specials = [p for r in recs for p in r.special]
    crossings = [p.g for p in specials if p.tag == "degenerate"]
    for want in (0.5995, 0.4804, 1.0287):
        assert min(abs(np.array(crossings) - want)) < 1e-4
    assert all(_on_lines(p) for p in specials)
    for r in recs:
        assert r.energies == sorted(r.energies)
        assert not r.gaps


def test_trace_is_deterministic():
    args = (Model.TWO_PHOTON, 2.0, scan.EpsilonRule.fixed(0.5), [0.2, 0.3])
    a = scan.trace(*args, q="1/4", specials=False, points_per_unit=500)
    b = scan.trace(*args, q="1/4", specials=False, points_per_unit=500)
    assert [r.energies for r in a] == [r.energies for r in b]


def test_scaled_bias_odd_k_has_no_crossings():
    pts = scan.special_points(Model.TWO_PHOTON, 2.0, scan.EpsilonRule.scaled(1.0), (0.05, 0.45), (-1.0, 6.0), "1/4")
    assert pts and all(p.tag == "exceptional" for p in pts)


@pytest.mark.parametrize("k", [2.0, 4.0])
def test_scaled_bias_even_k_restores_crossings(k):
    pts = scan.special_points(Model.TWO_PHOTON, 2.0, scan.EpsilonRule.scaled(k), (0.05, 0.45), (-1.0, 6.0), "1/4")
    crossings = [p for p in pts if p.tag == "degenerate"]
    assert crossings
    for p in crossings:
        b = float(np.sqrt(1 - 4 * p.g**2))
        assert p.epsilon == pytest.approx(k * b, rel=1e-12)
        norm = tp.normalized_energy(p.energy, "1/4", p.epsilon, b)
        assert norm == pytest.approx(round(norm), abs=1e-9)  # lies on a horizontal line
    if k == 2.0:
        gs = [p.g for p in crossings]
        for want in (0.3015, 0.4183):
            assert min(abs(np.array(gs) - want)) < 1e-4


def test_two_photon_grid_guard():
    with pytest.raises(DomainError):
        scan.trace(Model.TWO_PHOTON, 1.0, scan.EpsilonRule.fixed(0.1), [0.4999], q="1/4")
    with pytest.raises(DomainError):
        scan.trace(Model.ONE_PHOTON, 1.0, scan.EpsilonRule.scaled(1.0), [0.3])


def test_empty_window():
    assert list(scan.spectrum_at(Model.ONE_PHOTON, ModelParams(1, 1, 0.3, 0.4), (1.0, 1.0))) == []


class TestConnectLevels:
    def test_smooth_levels_join(self):
        recs = [scan.SpectrumRecord(g, 0.0, [0.0 + g, 1.0 - g, 3.0]) for g in np.linspace(0, 0.3, 4)]
        curves = scan.connect_levels(recs)
        assert len(curves) == 3 and all(len(c) == 4 for c in curves)

    def test_big_jump_breaks(self):
        recs = [scan.SpectrumRecord(0.0, 0.0, [0.0, 0.1]), scan.SpectrumRecord(0.1, 0.0, [0.0, 2.0])]
        curves = scan.connect_levels(recs)
        assert sorted(len(c) for c in curves) == [1, 1, 2]


def test_avoided_gap_closes_at_crossing_bias():
    (p,) = tp.find_degenerate_2p("1/4", 1, 2, 2.0)
    assert scan.avoided_gap_2p("1/4", 2.0, 1.0, 1, 2).gap > 1e-3
    exact = scan.avoided_gap_2p("1/4", 2.0, p.epsilon, 1, 2)
    assert exact.gap < 1e-7
    assert exact.g == pytest.approx(p.g, abs=1e-6)


class TestCensus:
    def test_large_gap_pair_is_empty(self):
        census = scan.enumerate_crossings(Model.ONE_PHOTON, 3.0, (1, 1), (2, 2))
        assert census.total == 0 and census.per_pair == {(1, 2): 0}

    def test_cross_model_totals(self):
        a = scan.enumerate_crossings(Model.ONE_PHOTON, 2.0, (1, 3), (2, 6))
        b = scan.enumerate_crossings(Model.TWO_PHOTON, 2.0, (1, 3), (2, 6), q="3/4")
        assert scan.same_totals(a, b)
        with pytest.raises(DomainError):
            scan.same_totals(a, scan.enumerate_crossings(Model.ONE_PHOTON, 1.0, (1, 3), (2, 6)))

    def test_anomalies_do_not_abort(self, monkeypatch):
        real = op.find_degenerate_1p

        def flaky(n, m, *args, **kw):
            if (n, m) == (1, 3):
                raise InconsistencyError("forced", 1.0, 1.0)
            return real(n, m, *args, **kw)

        monkeypatch.setattr(op, "find_degenerate_1p", flaky)
        census = scan.enumerate_crossings(Model.ONE_PHOTON, 2.0, (1, 2), (2, 4))
        assert [a["M"] for a in census.anomalies] == [3]
        assert census.per_pair[(2, 4)] == 2

    def test_threads_preserve_order(self, monkeypatch):
        monkeypatch.setenv(scan.THREADS_ENV, "3")
        assert scan.worker_count() == 3
        assert scan.parallel_map(lambda x: x * x, list(range(20))) == [x * x for x in range(20)]
        serial = [p.g for p in scan.enumerate_crossings(Model.ONE_PHOTON, 1.5, (1, 3), (2, 5)).points]
        monkeypatch.setenv(scan.THREADS_ENV, "1")
        assert serial == [p.g for p in scan.enumerate_crossings(Model.ONE_PHOTON, 1.5, (1, 3), (2, 5)).points]

    @pytest.mark.parametrize("raw", ["0", "x"])
    def test_bad_thread_setting(self, monkeypatch, raw):
        monkeypatch.setenv(scan.THREADS_ENV, raw)
        with pytest.raises(DomainError):
            scan.worker_count()


def test_shared_roots_small_grid():
    assert scan.shared_root_check(Model.TWO_PHOTON, 1.5, (1, 4), (2, 8), q="3/4") == []
