from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from motionscope.errors import ValidationError
from motionscope.params import Eye
from motionscope.stereo import (
    Pairing,
    disparity_error_closed_form,
    estimate_disparity,
    presentation_schedule,
    stereo_velocity_deg_per_s,
)

from conftest import make_stereo_config

ARCMIN = 1 / 60


class TestVelocityConvention:
    def test_caption_value(self):
        # 10 cm/s at 50 cm is 11.31 deg/s under the single-sided convention
        assert stereo_velocity_deg_per_s(10, 50) == pytest.approx(11.3099, abs=1e-3)

    def test_invalid_distance(self):
        with pytest.raises(ValidationError):
            stereo_velocity_deg_per_s(10, 0)


class TestSchedule:
    def test_alternating_right_at_half_frames(self):
        sched = presentation_schedule(make_stereo_config(capture_hz=60.0))
        rights = [e for e in sched if e.eye is Eye.RIGHT]
        for e in rights[:5]:
            frac = (e.onset_s * 60) % 1
            assert frac == Fraction(1, 2)

    def test_simultaneous_presentation_shares_onsets(self):
        sched = presentation_schedule(make_stereo_config(presentation="SIMULTANEOUS"))
        lefts = {e.onset_s for e in sched if e.eye is Eye.LEFT}
        rights = {e.onset_s for e in sched if e.eye is Eye.RIGHT}
        assert lefts == rights

    def test_triple_flash_repeats_positions(self):
        sched = presentation_schedule(make_stereo_config(flashes=3))
        frame0_left = [e for e in sched if e.eye is Eye.LEFT and e.frame_index == 0]
        assert len(frame0_left) == 3
        assert len({e.position_deg for e in frame0_left}) == 1
        assert [e.flash_index for e in frame0_left] == [0, 1, 2]

    def test_alternating_capture_offsets_right_positions(self):
        sched = presentation_schedule(make_stereo_config(capture="ALTERNATING"))
        v = Fraction(stereo_velocity_deg_per_s(10, 50))
        right0 = next(e for e in sched if e.eye is Eye.RIGHT and e.frame_index == 0)
        assert right0.position_deg == v * Fraction(1, 120)  # sampled half a frame later

    def test_requires_stereo_mode(self):
        from conftest import make_config

        with pytest.raises(ValidationError):
            presentation_schedule(make_config())


class TestEstimate:
    def test_headline_error(self):
        series = estimate_disparity(presentation_schedule(make_stereo_config()))
        assert abs(series.error_deg) / ARCMIN == pytest.approx(5.655, abs=0.05)
        # rightward motion, left presented first: estimate is crossed (nearer)
        assert series.error_deg < 0

    def test_triple_flash_scales_exactly(self):
        e1 = estimate_disparity(presentation_schedule(make_stereo_config(flashes=1))).error_deg
        e3 = estimate_disparity(presentation_schedule(make_stereo_config(flashes=3))).error_deg
        assert e1 / e3 == pytest.approx(3.0, rel=1e-9)

    def test_simultaneous_presentation_recovers_nominal(self):
        cfg = make_stereo_config(presentation="SIMULTANEOUS", nominal=0.25)
        series = estimate_disparity(presentation_schedule(cfg), nominal_deg=0.25)
        assert series.estimate_deg == 0.25
        assert series.error_deg == 0.0

    def test_matched_alternating_cancels(self):
        cfg = make_stereo_config(capture="ALTERNATING", presentation="ALTERNATING")
        series = estimate_disparity(presentation_schedule(cfg))
        assert series.error_deg == 0.0

    def test_tracking_leaves_estimate_unchanged(self):
        base = estimate_disparity(presentation_schedule(make_stereo_config()))
        tracked = estimate_disparity(presentation_schedule(make_stereo_config(tracking=True)))
        assert tracked.estimate_deg == base.estimate_deg

    def test_pairings_present_and_labeled(self):
        series = estimate_disparity(presentation_schedule(make_stereo_config()))
        kinds = {s.pairing for s in series.pair_samples}
        assert kinds == {Pairing.RIGHT_LEADS, Pairing.RIGHT_LAGS}

    def test_single_eye_rejected(self):
        sched = [e for e in presentation_schedule(make_stereo_config()) if e.eye is Eye.LEFT]
        with pytest.raises(ValidationError):
            estimate_disparity(sched)

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from([1, 2, 3, 4]), st.floats(2.0, 30.0), st.sampled_from([30.0, 60.0, 90.0]))
    def test_flash_scaling_property(self, flashes, velocity, capture):
        e1 = estimate_disparity(presentation_schedule(
            make_stereo_config(velocity=velocity, capture_hz=capture, flashes=1))).error_deg
        ef = estimate_disparity(presentation_schedule(
            make_stereo_config(velocity=velocity, capture_hz=capture, flashes=flashes))).error_deg
        assert ef * flashes == pytest.approx(e1, rel=1e-9)

    def test_simulation_matches_closed_form_within_quantum(self):
        cfg = make_stereo_config()
        series = estimate_disparity(presentation_schedule(cfg))
        v = stereo_velocity_deg_per_s(10, 50)
        closed = disparity_error_closed_form(v, 60.0, 1)
        quantum = v / 60.0  # one pairing step: the per-frame displacement
        assert abs(abs(series.error_deg) - abs(closed)) < 1e-12
        assert abs(series.error_deg - closed) <= quantum + 1e-12


class TestClosedForm:
    def test_caption_number(self):
        e = disparity_error_closed_form(11.3099, 60.0, 1)
        assert e == pytest.approx(0.09425, abs=1e-4)
        assert e * 60 == pytest.approx(5.655, abs=0.01)

    def test_ratio_invariance(self):
        assert disparity_error_closed_form(5.0, 50.0, 2) == pytest.approx(
            disparity_error_closed_form(10.0, 100.0, 2), rel=1e-12)

    def test_reversed_motion_flips_sign(self):
        assert disparity_error_closed_form(-11.31, 60.0, 1) == pytest.approx(
            -disparity_error_closed_form(11.31, 60.0, 1), rel=1e-12)

    def test_invalid_args(self):
        with pytest.raises(ValidationError):
            disparity_error_closed_form(10.0, 0.0, 1)
        with pytest.raises(ValidationError):
            disparity_error_closed_form(10.0, 60.0, 0)
