import pytest

from btlseg import (
    ChangeSpec,
    IntervalCache,
    Scenario,
    Segmentation,
    SolverConfig,
    dp_detect,
    dplr_detect,
    generate,
    interval_objective,
    refine,
)
from btlseg.refine import _window
from conftest import two_regime_series


class TestWindowArithmetic:
    def test_documented_example(self):
        # anchors 1, 300, 900 on an axis of length 900
        assert _window(1, 300, 900, 900) == (100, 700)

    def test_outward_rounding(self):
        # floor on the left end, ceil on the right end
        assert _window(1, 27, 40, 40) == (9, 36)

    def test_clamped_to_axis(self):
        s, e = _window(1, 4, 2000, 100)
        assert s >= 1 and e <= 100


class TestRefine:
    def test_empty_prelim_passthrough(self, rng):
        series = two_regime_series(10)
        out = refine(series, Segmentation((), 20), SolverConfig())
        assert out.change_points == ()

    def test_recovers_flip_from_offset_prelim(self):
        series = two_regime_series(20)
        out = refine(series, Segmentation((27,), 40), SolverConfig())
        assert out.change_points == (21,)

    def test_idempotent_at_truth_high_snr(self):
        series = two_regime_series(20)
        out = refine(series, Segmentation((21,), 40), SolverConfig())
        assert out.change_points == (21,)

    def test_count_preserved(self, rng):
        sc = Scenario(
            n=6,
            delta_spacing=120,
            changes=(ChangeSpec("type1_reverse"), ChangeSpec("type3_block_exchange")),
            rng_seed=9,
        )
        series, truth, _ = generate(sc)
        prelim = Segmentation(tuple(c + 8 for c in truth.change_points), series.t_max)
        out = refine(series, prelim, SolverConfig())
        assert out.k == prelim.k

    def test_scan_objective_never_worse_than_prelim(self):
        series = two_regime_series(20)
        cfg = SolverConfig()
        prelim_cp = 27
        out = refine(series, Segmentation((prelim_cp,), 40), cfg)
        s, e = _window(1, prelim_cp, 40, 40)
        cache = IntervalCache()

        def scan_objective(cp):
            boundary = cp - 1
            return interval_objective(series, (s + 1, boundary), cfg, cache) + interval_objective(
                series, (boundary + 1, e), cfg, cache
            )

        assert scan_objective(out.change_points[0]) <= scan_objective(prelim_cp) + 1e-9

    def test_window_too_short_rejected(self):
        series = two_regime_series(3)
        with pytest.raises(ValueError):
            refine(series, Segmentation((2, 3, 4, 5), 6), SolverConfig())

    def test_constrained_mode_matches_ridge_on_deterministic_data(self):
        series = two_regime_series(20)
        out = refine(
            series, Segmentation((27,), 40), SolverConfig(mode="constrained", bound_b=1.0)
        )
        assert out.change_points == (21,)

    def test_stride_subsamples_candidates(self):
        series = two_regime_series(20)
        out = refine(series, Segmentation((25,), 40), SolverConfig(), stride=2)
        # candidate grid s+1, s+3, ...: still lands next to the flip
        assert abs(out.change_points[0] - 21) <= 1

    def test_mismatched_axis_rejected(self):
        series = two_regime_series(10)
        with pytest.raises(ValueError):
            refine(series, Segmentation((5,), 19), SolverConfig())


class TestDplr:
    def test_composition_equals_stagewise(self, rng):
        sc = Scenario(
            n=6,
            delta_spacing=100,
            changes=(ChangeSpec("type1_reverse"), ChangeSpec("type2_block_reverse")),
            rng_seed=4,
        )
        series, _, _ = generate(sc)
        cfg = SolverConfig()
        gamma = 8.0
        composed = dplr_detect(series, gamma, cfg)
        prelim, _ = dp_detect(series, gamma, cfg)
        stagewise = refine(series, prelim, cfg)
        assert composed.change_points == stagewise.change_points

    def test_huge_gamma_empty(self, rng):
        series = two_regime_series(30)
        assert dplr_detect(series, 1e12, SolverConfig()).change_points == ()

    def test_deterministic_two_regime(self):
        series = two_regime_series(20)
        assert dplr_detect(series, 2.0, SolverConfig(), min_seg=2).change_points == (21,)
