"""Acceptance suite: one test per release criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines.
"""

import json
import time

import numpy as np
import pytest

from motionscope.csf import CsfModel
from motionscope.params import GridSpec
from motionscope.pipeline import run_prediction
from motionscope.spectrum import analytic_sampled_spectrum, forward, inverse, spectral_density_scale
from motionscope.stereo import (
    disparity_error_closed_form,
    estimate_disparity,
    presentation_schedule,
    stereo_velocity_deg_per_s,
)
from motionscope.stimulus import build_grid, render_sampled

from conftest import make_config, make_stereo_config

MATRIX_GRID = GridSpec(time_samples=256, space_samples=512)


def verdict(num, name, ok, detail):
    line = f"[criterion {num}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def test_criterion_1_disparity_headline():
    t0 = time.time()
    cfg = make_stereo_config(velocity=10.0, capture_hz=60.0, flashes=1,
                             capture="SIMULTANEOUS", presentation="ALTERNATING", nominal=0.0)
    series = estimate_disparity(presentation_schedule(cfg))
    err_arcmin = abs(series.error_deg) * 60

    v = stereo_velocity_deg_per_s(10.0, 50.0)
    closed = disparity_error_closed_form(v, 60.0, 1)
    quantum = v / 60.0
    agree = abs(abs(series.error_deg) - abs(closed)) <= quantum

    cfg3 = make_stereo_config(velocity=10.0, capture_hz=60.0, flashes=3)
    series3 = estimate_disparity(presentation_schedule(cfg3))
    ratio = series.error_deg / series3.error_deg
    elapsed = time.time() - t0

    ok = (abs(err_arcmin - 5.65) <= 0.05 and agree
          and abs(ratio - 3.0) <= 3.0 * 1e-9 and elapsed < 1.0)
    verdict(1, "disparity headline",
            ok, f"|err|={err_arcmin:.4f}' closed={closed*60:.4f}' flash ratio={ratio:.12f} "
                f"runtime={elapsed*1e3:.0f}ms")


def test_criterion_2_angular_conversions():
    from motionscope.params import velocity_cm_to_deg

    v1 = velocity_cm_to_deg(1.0, 50.0)
    v20 = velocity_cm_to_deg(20.0, 50.0)
    ok = abs(v1 - 1.15) <= 0.01 and abs(v20 - 22.62) <= 0.01
    verdict(2, "angular conversions", ok, f"1 cm/s -> {v1:.4f} deg/s, 20 cm/s -> {v20:.4f} deg/s")


def test_criterion_3_csf_luminance_scaling():
    ratio = CsfModel(160.0).peak / CsfModel(0.5).peak
    ok = abs(ratio - 4.0) <= 0.8
    verdict(3, "CSF peak scaling 0.5 -> 160 cd/m2", ok, f"ratio={ratio:.3f}, target 4 +/- 20%")


def test_criterion_4_judder_matrix():
    t0 = time.time()
    results = {}
    for label, v, hz in (("1cm/s@120Hz", 1.0, 120.0), ("10cm/s@120Hz", 10.0, 120.0),
                         ("1cm/s@30Hz", 1.0, 30.0), ("1cm/s@60Hz", 1.0, 60.0)):
        results[label] = run_prediction(make_config(velocity=v, capture_hz=hz, grid=MATRIX_GRID))
    elapsed = time.time() - t0

    clean = results["1cm/s@120Hz"].report
    fast = results["10cm/s@120Hz"].report
    slow = results["1cm/s@30Hz"].report
    counts = [results[k].report.visible_replicates
              for k in ("1cm/s@30Hz", "1cm/s@60Hz", "1cm/s@120Hz")]
    ok = (not clean.any_artifact()
          and fast.judder and not fast.flicker and fast.visible_replicates >= 1
          and slow.judder
          and counts[0] >= counts[1] >= counts[2] and counts[1] > counts[2]
          and elapsed < 30.0)
    verdict(4, "judder matrix", ok,
            f"clean={not clean.any_artifact()} fast=(judder={fast.judder},flicker={fast.flicker}) "
            f"slow_judder={slow.judder} replicates 30/60/120Hz={counts} runtime={elapsed:.1f}s")


def test_criterion_5_motion_blur():
    ratios = {}
    for hold in (1.0, 0.1):
        res = run_prediction(make_config(velocity=20.0, capture_hz=120.0, hold=hold,
                                         width_cm=0.05, tracking=True))
        ratios[hold] = res.report.blur_ratio
        flagged = res.report.motion_blur
        if hold == 1.0:
            flag_high = flagged
        else:
            flag_low = flagged
    ok = ratios[1.0] > 1.5 > ratios[0.1] and flag_high and not flag_low
    verdict(5, "motion blur vs hold interval", ok,
            f"blur_ratio(h=1)={ratios[1.0]:.2f} > 1.5 > blur_ratio(h=0.1)={ratios[0.1]:.2f}")


def test_criterion_6_color_breakup():
    base = dict(velocity=20.0, capture_hz=120.0, hold=1.0, tracking=True,
                rgb="RGB_SEQ", recording=0.25)
    uncorrected = run_prediction(make_config(**base))
    corrected = run_prediction(make_config(**base, breakup_correction=True))
    v3c = uncorrected.config.velocity_deg_per_s() / (3 * 120.0)
    half_pixel = uncorrected.config.pixel_deg() / 2
    sep = uncorrected.report.centroid_separation_deg
    sep_fixed = corrected.report.centroid_separation_deg
    ok = (uncorrected.report.color_breakup
          and abs(sep - v3c) <= 0.10 * v3c
          and not corrected.report.color_breakup
          and sep_fixed < half_pixel)
    verdict(6, "color breakup and offset correction", ok,
            f"sep={sep:.5f} deg (v/3c={v3c:.5f} +/-10%), corrected={sep_fixed:.5f} < p/2={half_pixel:.5f}")


def test_criterion_7_oracle_equivalence():
    rng = np.random.default_rng(20240811)
    n_configs = 12
    worst_oracle = 0.0
    worst_parseval = 0.0
    worst_roundtrip = 0.0
    for k in range(n_configs):
        hold = float(rng.choice([0.0, rng.uniform(0.25, 1.0)]))
        capture = float(rng.uniform(40, 140))
        cfg = make_config(
            velocity=float(rng.uniform(-6, 6)),
            capture_hz=capture,
            hold=hold,
            width_cm=float(rng.uniform(0.04, 0.2)),
            l_max=float(rng.uniform(40, 300)),
            recording=float(rng.uniform(0.05, 0.1)),
            dpi=float(rng.uniform(100, 300)),
            fill=float(rng.uniform(0.4, 1.0)),
            contrast=float(rng.uniform(10, 200)),
            tau=0.0,
            grid=GridSpec(spatial_samples_per_pixel=int(rng.choice([3, 4])),
                          temporal_samples_per_frame=int(rng.choice([8, 16]))),
        )
        grid = build_grid(cfg)
        ras = render_sampled(cfg, grid)
        spec = forward(ras)
        scale = spectral_density_scale(grid)
        r = cfg.velocity_deg_per_s()

        # oracle agreement at replicate-peak bins
        for n in (0, 1, -1, 2):
            for ut in (0.8, 2.9):
                iu = int(np.argmin(np.abs(spec.u_axis - ut)))
                u = spec.u_axis[iu]
                iw = int(np.argmin(np.abs(spec.w_axis - (n * capture - r * u))))
                w = spec.w_axis[iw]
                oracle = abs(analytic_sampled_spectrum(cfg, u, w, grid=grid))
                if oracle < 1e-9:
                    continue
                fft_val = abs(spec.data[0][iw, iu]) * scale
                worst_oracle = max(worst_oracle, abs(fft_val - oracle) / oracle)

        mod = ras.data[0] - ras.data[0].mean()
        lhs = (mod**2).sum()
        rhs = (np.abs(spec.data[0]) ** 2).sum()
        worst_parseval = max(worst_parseval, abs(lhs - rhs) / lhs)

        back = inverse(spec)
        worst_roundtrip = max(worst_roundtrip,
                              np.abs(back.data - ras.data).max() / np.abs(ras.data).max())

    ok = worst_oracle < 1e-3 and worst_parseval < 1e-6 and worst_roundtrip < 1e-6
    verdict(7, "oracle equivalence over randomized configs", ok,
            f"{n_configs} configs: oracle rel err max={worst_oracle:.2e}, "
            f"parseval={worst_parseval:.2e}, roundtrip={worst_roundtrip:.2e}")


def test_criterion_8_stereo_invariances():
    base = estimate_disparity(presentation_schedule(make_stereo_config()))
    tracked = estimate_disparity(presentation_schedule(make_stereo_config(tracking=True)))
    tracking_exact = tracked.estimate_deg == base.estimate_deg

    simul = estimate_disparity(presentation_schedule(
        make_stereo_config(presentation="SIMULTANEOUS")))
    matched = estimate_disparity(presentation_schedule(
        make_stereo_config(capture="ALTERNATING", presentation="ALTERNATING")))
    ok = tracking_exact and simul.error_deg == 0.0 and matched.error_deg == 0.0
    verdict(8, "stereo invariances", ok,
            f"tracking exact={tracking_exact}, simultaneous err={simul.error_deg}, "
            f"matched alternating err={matched.error_deg}")


def test_criterion_9_determinism(tmp_path):
    import hashlib

    from motionscope.interface.export import write_run_outputs

    cfg = make_config(velocity=2.0, capture_hz=120.0, grid=MATRIX_GRID).with_id("golden")

    def run_and_hash(out_dir):
        result = run_prediction(cfg)
        write_run_outputs(result, out_dir, figures=False)
        hashes = {}
        for p in sorted((out_dir / "panels").glob("*.bin")):
            hashes[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
        return hashes

    h1 = run_and_hash(tmp_path / "a")
    h2 = run_and_hash(tmp_path / "b")
    ok = h1 == h2 and len(h1) == 8
    verdict(9, "bit-identical panel binaries", ok,
            f"{len(h1)} panels, digests equal={h1 == h2}")


@pytest.mark.secondary
def test_criterion_10_ui_round_trip(tmp_path):
    """Criterion 10 mirrors the UI flow through the HTTP surface the frontend
    consumes; the form-level half lives in the frontend's vitest suite."""
    from fastapi.testclient import TestClient

    from motionscope.interface.service import create_app
    from motionscope.params import config_to_dict, default_config

    client = TestClient(create_app(tmp_path / "data", figures=False))
    form = config_to_dict(default_config())
    form["grid"]["time_samples"] = 256
    form["grid"]["space_samples"] = 512

    rid = client.post("/runs", json=form).json()["run_id"]
    record = None
    for _ in range(200):
        record = client.get(f"/runs/{rid}").json()
        if record["status"] in ("DONE", "FAILED"):
            break
        time.sleep(0.05)
    echoed = dict(record["config"])
    posted = dict(form)
    posted["id"] = rid
    echo_equal = json.dumps(echoed, sort_keys=True) == json.dumps(posted, sort_keys=True)

    report = json.loads((tmp_path / "data" / "runs" / rid / "report.json").read_text())
    badges_clear = not any(v for v in report.values() if isinstance(v, bool))

    slow = dict(form)
    slow["display"] = {**form["display"], "capture_rate_hz": 30.0}
    rid2 = client.post("/runs", json=slow).json()["run_id"]
    for _ in range(200):
        if client.get(f"/runs/{rid2}").json()["status"] in ("DONE", "FAILED"):
            break
        time.sleep(0.05)
    bundle = client.post("/compare", json={"run_ids": [rid, rid2]}).json()
    diff = client.get(f"/compare/{bundle['compare_id']}/panels/diff_{rid2}").content
    diff_arr = np.frombuffer(diff, dtype="<f4")
    nonzero_diff = float(np.abs(diff_arr).max()) > 0

    ok = record["status"] == "DONE" and echo_equal and badges_clear and nonzero_diff
    verdict(10, "UI round trip over the service API", ok,
            f"status={record['status']} echo_equal={echo_equal} badges_clear={badges_clear} "
            f"nonzero_diff={nonzero_diff}")
