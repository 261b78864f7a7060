import numpy as np
import pytest

from refusion.blur import lap_var
from refusion.config import ConfigError
from refusion.evaluation import read_groundtruth
from refusion.imaging import iter_sequence, to_gray
from refusion.synth import (BLUR, LINEAR, OCCLUDE, PIECEWISE, SINUSOID, Event, SceneRenderer,
                            SceneScript, benchmark_script, directional_box_blur, format_script,
                            generate, parse_script, trajectory_centers)

SMALL = SceneScript(frame_count=12, width=96, height=72, sprite_w=12, sprite_h=10,
                    start=(30, 30), velocity=(2.5, 1.0),
                    events=(Event(OCCLUDE, 4, 3), Event(BLUR, 9, 2)), seed=4)


def test_generate_counts_and_files(tmp_path):
    summary = generate(SMALL, tmp_path)
    assert len(summary.frames) == 12
    assert sorted(p.name for p in tmp_path.iterdir())[:2] == ["000001.png", "000002.png"]
    gt = read_groundtruth(tmp_path / "groundtruth.txt")
    assert len(gt) == 12 and gt == summary.groundtruth
    assert [i for i, b in enumerate(gt, 1) if b is None] == [4, 5, 6]
    dets = (tmp_path / "detections.csv").read_text().splitlines()
    assert len(dets) == 9
    frames = list(iter_sequence(tmp_path))
    assert [f.index for f in frames] == list(range(1, 13))
    assert np.array_equal(frames[0].data, SceneRenderer(SMALL).render(1).data)


def test_generation_is_byte_identical(tmp_path):
    generate(SMALL, tmp_path / "a", fmt="ppm")
    generate(SMALL, tmp_path / "b", fmt="ppm")
    for p in sorted((tmp_path / "a").iterdir()):
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_truth_is_pixel_exact():
    r = SceneRenderer(SMALL)
    for t in (1, 2, 3, 7, 12):
        b = r.truth(t)
        img = r.render(t, events=False).data
        x0, y0, w, h = (int(v) for v in b.as_tuple())
        border = np.array(SMALL.sprite_color) // 2
        assert np.all(img[y0 + 1:y0 + h - 1, x0 + 1:x0 + w - 1] == SMALL.sprite_color)
        assert np.all(img[y0, x0:x0 + w] == border)
        # pixels just outside come from the background
        assert np.array_equal(img[y0 - 1, x0:x0 + w],
                              r.background[y0 - 1, x0:x0 + w])


def test_occluder_hides_sprite():
    r = SceneRenderer(SMALL)
    for t in (4, 5, 6):
        img = r.render(t).data
        assert not np.any(np.all(img == SMALL.sprite_color, axis=2))


def test_blur_event_lowers_sharpness():
    r = SceneRenderer(SMALL)
    for t in (9, 10):
        b = r.truth(t)
        sharp = lap_var(to_gray(r.render(t, events=False)))
        blurred = lap_var(to_gray(r.render(t)))
        assert blurred < sharp
        assert r.blur_radius(t) >= 1


def test_box_blur_preserves_constant():
    img = np.full((10, 12, 3), 77, np.uint8)
    assert np.array_equal(directional_box_blur(img, (1, 1), 3), img)


@pytest.mark.parametrize("traj", [LINEAR, SINUSOID])
def test_sprite_stays_inside(traj):
    s = SceneScript(frame_count=400, trajectory=traj, velocity=(7, 5), amplitude=(200, 150))
    c = trajectory_centers(s)
    assert c[:, 0].min() >= s.sprite_w / 2 and c[:, 0].max() <= s.width - s.sprite_w / 2
    assert c[:, 1].min() >= s.sprite_h / 2 and c[:, 1].max() <= s.height - s.sprite_h / 2


def test_piecewise_constant_speed():
    s = SceneScript(frame_count=50, trajectory=PIECEWISE,
                    waypoints=((40, 40), (200, 40), (200, 150)), speed=3.0)
    c = trajectory_centers(s)
    steps = np.hypot(*np.diff(c, axis=0).T)
    # 49 steps of 3 px fit on the first 160 px leg
    assert np.allclose(steps, 3.0, atol=1e-9)
    assert np.all(c[:, 1] == 40)


def test_benchmark_script_shape():
    s = benchmark_script()
    assert s.frame_count == 300
    assert {(e.kind, e.duration) for e in s.events} == {(OCCLUDE, 20), (BLUR, 10)}


def test_script_text_round_trip():
    assert parse_script(format_script(SMALL)) == SMALL
    b = benchmark_script(seed=11)
    assert parse_script(format_script(b)) == b


def test_script_errors():
    with pytest.raises(ConfigError):
        parse_script("colour = 1,2,3\n")
    with pytest.raises(ConfigError):
        parse_script("frame_count = 10\nevents = OCCLUDE:8:5\n")
    with pytest.raises(ValueError):
        SceneScript(trajectory=PIECEWISE, waypoints=((1, 1),))
