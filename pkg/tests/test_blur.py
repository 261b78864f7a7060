import numpy as np
import pytest

from oracles import lap_var_literal
from refusion.blur import BlurConfig, is_image_blurry, lap_var, laplacian_mask
from refusion.imaging import BBox, Frame, convolve3x3, crop_roi
from refusion.synth import directional_box_blur


def gray(a):
    return Frame(np.asarray(a, dtype=np.uint8))


def checkerboard(n=64, cell=4, lo=20, hi=220):
    y, x = np.mgrid[:n, :n]
    return np.where((x // cell + y // cell) % 2 == 1, hi, lo).astype(np.uint8)


def box_blur(a, radius):
    rgb = np.repeat(a[:, :, None], 3, axis=2)
    return directional_box_blur(rgb, (1.0, 0.0), radius)[:, :, 0]


def test_mask_entries():
    m = laplacian_mask()
    assert m[1, 1] == 4 / 6
    assert m[0, 0] == m[0, 2] == m[2, 0] == m[2, 2] == 0
    assert m[0, 1] == m[1, 0] == m[1, 2] == m[2, 1] == -1 / 6
    assert m.sum() == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("normalize", [True, False])
def test_constant_image_is_zero(impl, normalize):
    assert impl.lap_var(np.full((9, 7), 131, dtype=np.uint8), normalize) == 0.0


def test_constant_abs_laplacian_is_zero():
    img = gray([[0, 90], [90, 0]])
    lap = np.abs(convolve3x3(img, laplacian_mask()))
    assert np.all(lap == lap[0, 0]) and lap[0, 0] > 0
    assert lap_var(img) == 0.0


@pytest.mark.parametrize("normalize", [True, False])
def test_matches_literal_oracle(impl, rng, normalize):
    for _ in range(40):
        img = rng.integers(0, 256, (8, 8), dtype=np.uint8)
        want = lap_var_literal(img.tolist(), normalize)
        assert impl.lap_var(img, normalize) == pytest.approx(want, rel=1e-6, abs=1e-12)


def test_normalized_is_raw_over_pixel_count(rng):
    img = gray(rng.integers(0, 256, (11, 13)))
    assert lap_var(img, True) == pytest.approx(lap_var(img, False) / (11 * 13), rel=1e-12)


def test_offset_invariance(rng):
    for _ in range(50):
        img = rng.integers(0, 200, (10, 12))
        a = lap_var(gray(img))
        b = lap_var(gray(img + 55))
        assert b == pytest.approx(a, rel=1e-6, abs=1e-9)


def test_blur_lowers_sharpness(rng):
    for _ in range(100):
        patch = rng.integers(0, 256, (24, 24), dtype=np.uint8)
        for radius in (1, 2, 4):
            assert lap_var(gray(patch)) > lap_var(gray(box_blur(patch, radius)))


def test_nonnegative(rng):
    for _ in range(50):
        assert lap_var(gray(rng.integers(0, 256, rng.integers(1, 12, 2)))) >= 0.0


def test_is_image_blurry_on_calibrated_pair():
    sharp = checkerboard()
    soft = box_blur(sharp, 4)  # 9 taps
    box = BBox.from_center(32, 32, 16, 16)
    s = lap_var(crop_roi(gray(sharp), box))
    b = lap_var(crop_roi(gray(soft), box))
    assert s > b
    cfg = BlurConfig(blur_thresh=(s + b) / 2)
    assert not is_image_blurry(gray(sharp), box, cfg)
    assert is_image_blurry(gray(soft), box, cfg)


def test_constant_roi_is_blurry_for_any_threshold():
    flat = Frame(np.full((50, 50, 3), 90, dtype=np.uint8))
    for thresh in (1e-9, 1.0, 1e6):
        assert is_image_blurry(flat, BBox(10, 10, 8, 8), BlurConfig(thresh))


def test_default_threshold_separates_synthetic_pair():
    from refusion.synth import SceneRenderer, SceneScript
    r = SceneRenderer(SceneScript(frame_count=20, velocity=(3.0, 1.0), seed=4))
    for t in range(2, 21):
        frame = r.render(t)
        soft = Frame(directional_box_blur(frame.data, r.velocity(t), r.blur_radius(t)))
        assert not is_image_blurry(frame, r.boxes[t - 1])
        assert is_image_blurry(soft, r.boxes[t - 1])


def test_config_rejects_nonpositive_threshold():
    with pytest.raises(ValueError):
        BlurConfig(0.0)
