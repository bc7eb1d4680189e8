import json

import numpy as np
import pytest

from thermal_tripwire.cli import main
from thermal_tripwire.config import Config, ConfigError, load_config
from thermal_tripwire.frames_io import CountSeries, Recording, parse_counts, write_counts, write_recording


@pytest.fixture
def gen(tmp_path):
    def make(name, seed=0):
        out = tmp_path / f"{name}-{seed}"
        assert main(["gen", "--scenario", name, "--seed", str(seed), "--out-dir", str(out)]) == 0
        return out

    return make


def read_events(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "end_frame,verdict,door_id"
    return [line.split(",") for line in lines[1:]]


def test_config_defaults():
    c = Config()
    assert (c.alpha, c.sigma, c.eta, c.theta_pf, c.gamma) == (0.05, 0.4, 0.015, 0.015, 0.2)
    assert (c.k_min_pixels, c.l_min_pixels, c.window_w) == (100, 100, 16)
    assert c.use_mrf and c.algorithm == "multi" and c.initial_count == 0


def test_config_precedence(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("# comment\nalpha = 0.1\ngamma=0.5\nuse_mrf = false\n")
    c = load_config(path, ["gamma=0.3"])
    assert (c.alpha, c.gamma, c.use_mrf, c.sigma) == (0.1, 0.3, False, 0.4)


@pytest.mark.parametrize("text", ["bogus = 1", "alpha = 2", "alpha", "use_mrf = maybe", "algorithm = fancy", "k_min_pixels = 0"])
def test_config_rejects(tmp_path, text):
    path = tmp_path / "c.txt"
    path.write_text(text + "\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_dump_round_trip(tmp_path):
    c = Config(alpha=0.07, max_assoc_dist=12.5, entry_direction="inside-is-bottom", use_mrf=False)
    c.dump(tmp_path / "c.txt")
    assert load_config(tmp_path / "c.txt") == c
    Config().dump(tmp_path / "d.txt")
    assert load_config(tmp_path / "d.txt") == Config()


def test_gen_writes_files(gen):
    out = gen("single-entry", 3)
    assert (out / "recording.csv").exists() and (out / "annotations.csv").exists()
    assert (out / "annotations.csv").read_text().startswith("frame,delta\n")


def test_count_single_entry(gen):
    out = gen("single-entry", 1)
    assert main(["count", str(out / "recording.csv"), "--config", str(out / "config.txt"), "--out-dir", str(out)]) == 0
    counts = parse_counts(out / "counts.csv").counts
    assert counts[-1] == 1
    assert [e[1] for e in read_events(out / "events.csv")] == ["entry"]


def test_count_missing_file(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert main(["count", str(missing), "--out-dir", str(tmp_path)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_count_parse_error_names_file_and_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("frame," + ",".join(f"t{i}" for i in range(768)) + "\n0,1,2\n")
    assert main(["count", str(bad), "--out-dir", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert str(bad) in err and "line 2" in err


def test_count_two_doors(gen, tmp_path):
    a = gen("single-entry", 1)
    b = gen("single-exit", 2)
    out = tmp_path / "both"
    code = main(
        [
            "count", str(a / "recording.csv"), str(b / "recording.csv"),
            "--door-direction", "inside-is-top", "--door-direction", "inside-is-bottom",
            "--out-dir", str(out),
        ]
    )
    assert code == 0
    counts = parse_counts(out / "counts.csv").counts
    # door b faces the other way, so its downward walker is a second entry
    assert len(counts) == 96 and counts[0] == 0 and counts[-1] == 2
    assert [e[1:] for e in read_events(out / "events.csv")] == [["entry", "recording"], ["entry", "recording"]]


def test_door_direction_count_must_match(gen, tmp_path):
    a = gen("single-entry", 1)
    assert main(["count", str(a / "recording.csv"), "--door-direction", "inside-is-top", "--door-direction", "inside-is-top", "--out-dir", str(tmp_path)]) == 2


def test_count_doors_of_different_length(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_recording(Recording(np.full((3, 24, 32), 20.0)), a)
    write_recording(Recording(np.full((4, 24, 32), 20.0)), b)
    assert main(["count", str(a), str(b), "--out-dir", str(tmp_path)]) == 2


def test_baseline_and_multi_differ_by_one_on_two_walkers(gen, tmp_path):
    out = gen("two-simultaneous", 6)
    finals = {}
    for algo in ("baseline", "multi"):
        dest = tmp_path / algo
        assert main(["count", str(out / "recording.csv"), "--algorithm", algo, "--out-dir", str(dest)]) == 0
        finals[algo] = int(parse_counts(dest / "counts.csv").counts[-1])
    assert finals == {"baseline": 1, "multi": 2}


def run_eval(capsys, args):
    code = main(["eval"] + args)
    return code, (json.loads(capsys.readouterr().out) if code == 0 else None)


def test_eval_perfect_counts(tmp_path, capsys):
    ann = tmp_path / "a.csv"
    ann.write_text("frame,delta\n10,1\n")
    counts = tmp_path / "c.csv"
    write_counts(CountSeries([0] * 10 + [1] * 10), counts)
    code, report = run_eval(capsys, ["--truth", str(ann), "--counts", str(counts)])
    assert code == 0
    assert report["mae"] == 0 and report["mae_pp"] == 0 and report["ccr_wcc"] == 1.0
    assert set(report) == {"mae", "mae_pp", "ccr_wcc", "w", "n_frames", "matched", "missed", "spurious"}


@pytest.mark.parametrize("w, expected", [("16", 1.0), ("0", 0.0)])
def test_eval_jitter(tmp_path, capsys, w, expected):
    ann = tmp_path / "a.csv"
    ann.write_text("frame,delta\n10,1\n")
    counts = tmp_path / "c.csv"
    write_counts(CountSeries([0] * 11 + [1] * 9), counts)
    code, report = run_eval(capsys, ["--truth", str(ann), "--counts", str(counts), "--window-w", w])
    assert code == 0 and report["ccr_wcc"] == expected and report["w"] == int(w)


def test_eval_length_mismatch(tmp_path, capsys):
    ann = tmp_path / "a.csv"
    ann.write_text("frame,delta\n30,1\n")
    counts = tmp_path / "c.csv"
    write_counts(CountSeries([0] * 20), counts)
    assert main(["eval", "--truth", str(ann), "--counts", str(counts)]) == 2


def test_gen_count_eval_round_trip(gen, capsys):
    out = gen("single-exit", 11)
    cfg = str(out / "config.txt")
    assert main(["count", str(out / "recording.csv"), "--config", cfg, "--out-dir", str(out)]) == 0
    code, report = run_eval(capsys, ["--truth", str(out / "annotations.csv"), "--counts", str(out / "counts.csv"), "--config", cfg])
    assert code == 0 and report["ccr_wcc"] == 1.0
    code, direct = run_eval(capsys, ["--truth", str(out / "annotations.csv"), "--config", cfg, str(out / "recording.csv")])
    assert direct == report


def test_effective_config_reproduces_outputs(gen, tmp_path):
    out = gen("lingering", 4)
    first, second = tmp_path / "one", tmp_path / "two"
    args = ["count", str(out / "recording.csv")]
    assert main(args + ["--out-dir", str(first), "--gamma", "0.3", "--set", "alpha=0.04"]) == 0
    assert main(args + ["--out-dir", str(second), "--config", str(first / "effective_config.txt")]) == 0
    for name in ("counts.csv", "events.csv", "effective_config.txt"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_inspect_empty_recording(tmp_path):
    rec = tmp_path / "empty.csv"
    write_recording(Recording(np.empty((0, 24, 32))), rec)
    assert main(["inspect", str(rec), "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "frames.csv").read_text() == "frame,fg_pixels,centroid_v,centroid_h\n"
    assert (tmp_path / "blobs.csv").read_text() == "frame,track_id,size,centroid_v,centroid_h\n"


def test_inspect_centroid_monotone_for_steady_walker(gen):
    out = gen("single-entry", 2)
    assert main(["inspect", str(out / "recording.csv"), "--out-dir", str(out)]) == 0
    rows = [line.split(",") for line in (out / "frames.csv").read_text().splitlines()[1:]]
    vs = [float(r[2]) for r in rows if r[2]]
    assert len(vs) > 10
    assert all(b <= a + 1e-9 for a, b in zip(vs, vs[1:]))  # walking up: row coordinate falls
    blobs = [line.split(",") for line in (out / "blobs.csv").read_text().splitlines()[1:]]
    assert blobs and {b[1] for b in blobs} == {"0"}
    assert all(int(b[2]) >= 100 for b in blobs)
