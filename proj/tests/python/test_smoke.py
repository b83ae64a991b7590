import os
import subprocess

import numpy as np
import pytest

import terrashadow as ts


def test_module_is_the_build_under_test():
    assert ts._core.__name__ == "terrashadow._core"
    assert set(ts.synth_scene_names()) == {"ridge", "crater", "fractal"}


def test_max_mipmap_levels():
    rng = np.random.default_rng(3)
    h = rng.random((16, 16), dtype=np.float32)
    levels = ts.max_mipmap(h)
    assert [lv.shape[0] for lv in levels] == [16, 8, 4, 2, 1]
    np.testing.assert_array_equal(levels[0], h)
    expect = h.reshape(8, 2, 8, 2).max(axis=(1, 3))
    np.testing.assert_array_equal(levels[1], expect)
    assert levels[-1][0, 0] == h.max()


def test_occlusion():
    assert ts.segment_fraction(0.0) == pytest.approx(0.5)
    s, d = ts.occlusion_fraction(0.6, 0.6, 1.0)
    assert d == pytest.approx(0.0)
    assert s == pytest.approx(0.5)
    assert ts.occlusion_fraction(1.0, 0.5)[0] == 0.0


def test_render_dp_against_reference():
    scene = ts.synth_scene("ridge", image=32)
    assert scene.image_size == (32, 32)
    dp = scene.render("dp", threads=1)
    ref = scene.render("reference", threads=1)
    assert dp["image"].shape == (32, 32)
    assert dp["image"].dtype == np.float32
    assert 0.0 <= dp["image"].min() and dp["image"].max() <= 1.0
    assert dp["stats"]["max_samples"] <= 45
    err = ts.compare_images(dp["image"], ref["image"])
    assert err["mean_abs_error"] <= 0.05


def test_scene_round_trip(tmp_path):
    scene = ts.synth_scene("fractal", image=16)
    scene.save(tmp_path / "s.json")
    back = ts.load_scene(tmp_path / "s.json")
    assert back.field_size == scene.field_size
    np.testing.assert_array_equal(back.render(threads=1)["image"], scene.render(threads=1)["image"])
    with pytest.raises(ts.SceneError):
        ts.load_scene(tmp_path / "missing.json")


@pytest.mark.skipif("TERRASHADOW_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_matches_binding(tmp_path):
    cli = os.environ["TERRASHADOW_CLI"]
    scene = ts.synth_scene("ridge", image=16)
    scene.save(tmp_path / "s.json")
    pfm = tmp_path / "a.pfm"
    subprocess.run([cli, "render", "--scene", str(tmp_path / "s.json"), "--out", str(tmp_path / "a.png"),
                    "--pfm", str(pfm), "--threads", "1"], check=True)
    raw = pfm.read_bytes()
    header_end = 0
    for _ in range(3):
        header_end = raw.index(b"\n", header_end) + 1
    img = np.frombuffer(raw[header_end:], dtype="<f4").reshape(16, 16)[::-1]
    np.testing.assert_array_equal(img, scene.render(threads=1)["image"])
