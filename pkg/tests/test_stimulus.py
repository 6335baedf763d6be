import numpy as np
import pytest

from motionscope.errors import ResourceLimitError, ValidationError
from motionscope.params import GridSpec
from motionscope.stimulus import (
    build_grid,
    render_continuous,
    render_sampled,
    render_sampled_tracking,
    spatial_kernel,
    temporal_profile,
)

from conftest import make_config


def lit_mask(raster, ch=0, tol=1e-9):
    return raster.data[ch] - raster.channel_backgrounds[ch] > tol


def row_centroid(raster, row, ch=0):
    x = raster.grid.x_axis()
    w = raster.data[ch][row] - raster.channel_backgrounds[ch]
    s = w.sum()
    return (x * w).sum() / s if s > 0 else np.nan


class TestSpatialKernel:
    def test_full_fill_is_solid_rect(self):
        k = spatial_kernel(width_deg=0.4, pixel_deg=0.01, fill=1.0)
        assert k.lit_length_deg == pytest.approx(0.4, rel=1e-9)
        edges = sorted(k.bands)
        for (a1, b1), (a2, b2) in zip(edges, edges[1:]):
            assert b1 == pytest.approx(a2, abs=1e-12)  # contiguous, no gaps
        assert edges[0][0] == pytest.approx(-0.2) and edges[-1][1] == pytest.approx(0.2)

    def test_half_fill_bands(self):
        # bands of width f*p at the pixel pitch, clipped to the object rect
        # (edge pixels contribute partial bands)
        p = 0.01
        k = spatial_kernel(width_deg=4 * p, pixel_deg=p, fill=0.5)
        widths = sorted(b - a for a, b in k.bands)
        interior = [w for w in widths if w > 0.004]
        assert all(w == pytest.approx(0.005, rel=1e-9) for w in interior)
        assert k.lit_length_deg == pytest.approx(0.5 * 4 * p, rel=1e-9)
        centers = sorted((a + b) / 2 for a, b in k.bands if b - a > 0.004)
        assert np.allclose(np.diff(centers), p)

    def test_rgb_band_width_third_pixel(self):
        p = 0.01
        k = spatial_kernel(width_deg=6 * p, pixel_deg=p, fill=1.0 / 3)
        interior = [b - a for a, b in k.bands if b - a > p / 3 - 1e-9]
        assert all(w == pytest.approx(p / 3, rel=1e-9) for w in interior)

    def test_too_narrow_rejected(self):
        with pytest.raises(ValidationError):
            spatial_kernel(width_deg=0.004, pixel_deg=0.01, fill=0.5)


class TestTemporalProfile:
    def test_rect_degenerate(self):
        prof = temporal_profile(1.0, 1 / 60, 0.0)
        assert prof.base_width_s == pytest.approx(1 / 60)
        t = np.linspace(0, 1 / 60, 100, endpoint=False)
        assert np.allclose(prof.evaluate(t), 60.0)

    def test_trapezoid_geometry(self):
        prof = temporal_profile(0.5, 1 / 120, 1 / 1200)
        assert prof.base_width_s == pytest.approx(4.1667e-3, rel=1e-3)
        plateau = prof.base_width_s - 2 * prof.edge_width_s
        assert plateau == pytest.approx(2.5e-3, rel=1e-3)
        assert prof.evaluate(np.array([prof.base_width_s / 2]))[0] == pytest.approx(
            prof.plateau_level)

    def test_unit_area(self):
        prof = temporal_profile(0.7, 1 / 90, 1e-3)
        t = np.linspace(-1e-3, prof.base_width_s + 1e-3, 20001)
        area = np.trapezoid(prof.evaluate(t), t)
        assert area == pytest.approx(1.0, rel=1e-4)

    def test_violation_names_inequality(self):
        with pytest.raises(ValidationError, match="hold_interval"):
            temporal_profile(0.1, 1 / 120, 1 / 1200)

    def test_stroboscopic_limit(self):
        prof = temporal_profile(0.0, 1 / 60, 0.0)
        assert prof.base_width_s == 0.0


class TestRenderContinuous:
    def test_static_slices_identical(self):
        ras = render_continuous(make_config(velocity=0.0, recording=0.1))
        assert np.allclose(ras.data[0], ras.data[0][0])

    def test_centroid_displacement(self):
        cfg = make_config(velocity=1.0, recording=0.5)  # 1.1458 deg/s
        ras = render_continuous(cfg)
        first = row_centroid(ras, 0)
        last = row_centroid(ras, ras.grid.nt - 1)
        expected = cfg.velocity_deg_per_s() * (ras.grid.duration_s - ras.grid.t_pitch_s)
        assert last - first == pytest.approx(expected, abs=2 * ras.grid.x_pitch_deg)
        assert last - first == pytest.approx(0.573, abs=0.01)

    def test_tracking_stationary(self):
        cfg = make_config(velocity=5.0, tracking=True, recording=0.1)
        ras = render_continuous(cfg)
        assert ras.frame_of_reference.value == "RETINA"
        cents = [row_centroid(ras, i) for i in range(0, ras.grid.nt, 50)]
        assert np.allclose(cents, 0.0, atol=ras.grid.x_pitch_deg)

    def test_background_level(self):
        cfg = make_config(velocity=0.0, recording=0.05)
        ras = render_continuous(cfg)
        assert ras.data[0].min() == pytest.approx(cfg.channel_backgrounds()[0])
        assert np.all(ras.data[0] >= 0)


class TestRenderSampled:
    def test_stroboscopic_positions(self):
        cfg = make_config(velocity=4.0, capture_hz=60.0, hold=0.0, recording=0.1)
        ras = render_sampled(cfg)
        grid = ras.grid
        lit_rows = np.nonzero(lit_mask(ras).any(axis=1))[0]
        # one lit row per frame, at the frame onset
        assert len(lit_rows) == grid.n_frames
        s = grid.nt // grid.n_frames
        assert np.array_equal(lit_rows, np.arange(grid.n_frames) * s)
        r = cfg.velocity_deg_per_s()
        for n in (0, 2, 5):
            assert row_centroid(ras, lit_rows[n]) == pytest.approx(
                r * n * grid.frame_period_s, abs=grid.x_pitch_deg)

    def test_multiflash_presentation_rate(self):
        cfg = make_config(velocity=2.0, capture_hz=60.0, hold=0.2, flashes=3, recording=0.1)
        ras = render_sampled(cfg)
        lit_any = lit_mask(ras).any(axis=1)
        # count pulse onsets: rising edges of the lit-row mask
        onsets = np.nonzero(np.diff(lit_any.astype(int)) == 1)[0]
        pulses = len(onsets) + (1 if lit_any[0] else 0)
        assert pulses == ras.grid.n_frames * 3  # 180 presentations/s at 60 Hz capture
        # positions update only on capture: 3 consecutive pulses share a centroid
        rows = np.nonzero(lit_any)[0]
        step = ras.grid.nt // ras.grid.n_frames // 3
        c0 = row_centroid(ras, rows[0])
        c1 = row_centroid(ras, rows[0] + step)
        c2 = row_centroid(ras, rows[0] + 2 * step)
        assert c0 == pytest.approx(c1, abs=1e-9) and c1 == pytest.approx(c2, abs=1e-9)

    def test_rgb_seq_disjoint_thirds(self):
        cfg = make_config(velocity=0.0, capture_hz=60.0, hold=1.0, rgb="RGB_SEQ", recording=1 / 60)
        ras = render_sampled(cfg)
        masks = [lit_mask(ras, ch).any(axis=1) for ch in range(3)]
        for i in range(3):
            for j in range(i + 1, 3):
                assert not np.any(masks[i] & masks[j])
        assert np.all(masks[0] | masks[1] | masks[2])

    def test_pulse_energy_independent_of_tau(self):
        # single frame, static; breakpoints on-grid so the sums are exact
        def total(tau):
            cfg = make_config(velocity=0.0, capture_hz=60.0, hold=1.0, tau=tau,
                              recording=1 / 60, grid=GridSpec(temporal_samples_per_frame=16))
            ras = render_sampled(cfg)
            mod = ras.data[0] - ras.channel_backgrounds[0]
            return mod.sum() * ras.grid.t_pitch_s * ras.grid.x_pitch_deg

        dt16 = (1 / 60) / 16
        assert total(2 * dt16) == pytest.approx(total(0.0), rel=1e-9)

    def test_frame_centroid_velocity_regression(self):
        cfg = make_config(velocity=3.0, capture_hz=90.0, hold=0.5, recording=0.2)
        ras = render_sampled(cfg)
        grid = ras.grid
        s = grid.nt // grid.n_frames
        rows = np.arange(grid.n_frames) * s
        cents = np.array([row_centroid(ras, r) for r in rows])
        times = rows * grid.t_pitch_s
        slope = np.polyfit(times, cents, 1)[0]
        tol = grid.x_pitch_deg / grid.frame_period_s
        assert abs(slope - cfg.velocity_deg_per_s()) <= tol

    def test_rgb_simul_sum_matches_bw(self):
        cfg_rgb = make_config(velocity=2.0, rgb="RGB_SIMUL", recording=0.05)
        cfg_bw = make_config(velocity=2.0, rgb="BW", recording=0.05)
        grid = build_grid(cfg_rgb)
        summed = render_sampled(cfg_rgb, grid).luminance_sum()
        bw = render_sampled(cfg_bw, grid).data[0]
        assert np.allclose(summed, bw, rtol=1e-9, atol=1e-9)

    def test_convergence_to_continuous(self):
        dists = []
        for hz in (30.0, 60.0, 120.0):
            cfg = make_config(velocity=2.0, capture_hz=hz, hold=1.0, recording=0.2,
                              grid=GridSpec(time_samples=480))
            grid = build_grid(cfg)
            samp = render_sampled(cfg, grid)
            cont = render_continuous(cfg, grid)
            dists.append(np.abs(samp.data - cont.data).mean())
        assert dists[0] > dists[1] > dists[2]


class TestRenderTracking:
    def test_requires_tracking_flag(self):
        with pytest.raises(ValidationError):
            render_sampled_tracking(make_config(tracking=False))

    def test_stroboscopic_lands_at_zero(self):
        cfg = make_config(velocity=20.0, capture_hz=120.0, hold=0.0, tracking=True, recording=0.05)
        ras = render_sampled_tracking(cfg)
        rows = np.nonzero(lit_mask(ras).any(axis=1))[0]
        for r in rows:
            assert row_centroid(ras, r) == pytest.approx(0.0, abs=ras.grid.x_pitch_deg)

    def test_hold_one_smear_rate(self):
        cfg = make_config(velocity=20.0, capture_hz=120.0, hold=1.0, tracking=True,
                          recording=0.05)
        ras = render_sampled_tracking(cfg)
        grid = ras.grid
        s = grid.nt // grid.n_frames
        # within one frame the centroid drifts at -r: slope of rows 1..s-1
        cents = np.array([row_centroid(ras, i) for i in range(s)])
        times = np.arange(s) * grid.t_pitch_s
        slope = np.polyfit(times, cents, 1)[0]
        r = cfg.velocity_deg_per_s()
        assert slope == pytest.approx(-r, rel=0.02)
        # total per-frame smear r*h*dt = 0.1885 deg
        assert r * grid.frame_period_s == pytest.approx(0.1885, abs=0.001)

    def test_rgb_seq_channel_smear(self):
        cfg = make_config(velocity=20.0, capture_hz=120.0, hold=1.0, tracking=True,
                          rgb="RGB_SEQ", recording=0.02)
        ras = render_sampled_tracking(cfg)
        grid = ras.grid
        r = cfg.velocity_deg_per_s()
        sub = grid.frame_period_s / 3
        centroids = []
        for ch in range(3):
            rows = np.nonzero(lit_mask(ras, ch).any(axis=1))[0]
            frame_rows = rows[rows < grid.nt // grid.n_frames]
            first, last = frame_rows[0], frame_rows[-1]
            drift = row_centroid(ras, last, ch) - row_centroid(ras, first, ch)
            # per-channel smear spans r*h*dt/3 = 0.0628 deg
            assert -drift == pytest.approx(r * sub, rel=0.12)
            centroids.append(np.mean([row_centroid(ras, i, ch) for i in frame_rows]))
        # channels spatially interleaved in presentation order
        assert centroids[0] > centroids[1] > centroids[2]


class TestGrid:
    def test_auto_raise_for_pixel_response(self):
        tau = 1e-4
        cfg = make_config(hold=0.9, capture_hz=60.0, tau=tau,
                          grid=GridSpec(temporal_samples_per_frame=16))
        grid = build_grid(cfg)
        assert grid.t_pitch_s <= tau / 2

    def test_memory_guard(self, monkeypatch):
        monkeypatch.setenv("MOTIONSCOPE_MEMORY_BUDGET_BYTES", "1000000")
        with pytest.raises(ResourceLimitError, match="recording length"):
            build_grid(make_config(recording=2.0))

    def test_explicit_overrides(self):
        cfg = make_config(grid=GridSpec(time_samples=256, space_samples=512))
        grid = build_grid(cfg)
        assert grid.nt == 256 and grid.nx == 512
