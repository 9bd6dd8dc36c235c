import numpy as np
import pytest

from longtrack import cli, otb, synth
from longtrack.boxes import Box


def make_sequence_dir(tmp_path, name="seq", frames=6, **kwargs):
    seq_dir = tmp_path / name
    defaults = dict(frames=frames, frame_size=(320, 240), speed=2.0, seed=3)
    defaults.update(kwargs)
    sequence = synth.generate("translate", **defaults)
    otb.save_sequence(seq_dir, sequence.frames, sequence.boxes)
    return seq_dir, sequence


FAST = ["--param", "enable_redetection=false", "--param", "enable_scale=false"]


class TestOtbIo:
    def test_save_and_reload_sequence(self, tmp_path):
        seq_dir, sequence = make_sequence_dir(tmp_path)
        paths = otb.frame_paths(seq_dir)
        assert len(paths) == 6
        frame = otb.load_frame(paths[0])
        assert np.array_equal(frame, sequence.frames[0])
        rects = otb.read_rects(otb.groundtruth_path(seq_dir))
        assert len(rects) == 6
        assert rects[0] == sequence.boxes[0].as_tuple()

    def test_read_rects_accepts_tabs_and_spaces(self, tmp_path):
        path = tmp_path / "gt.txt"
        path.write_text("1,2,3,4\n5\t6\t7\t8\n9 10 11 12\n")
        assert otb.read_rects(path) == [(1, 2, 3, 4), (5, 6, 7, 8),
                                        (9, 10, 11, 12)]

    def test_results_round_trip(self, tmp_path):
        from longtrack.tracker import Diagnostics
        boxes = [Box(1.5, 2.5, 10, 12), Box(2.5, 3.5, 10, 12)]
        diags = [Diagnostics(1, float("nan"), False, float("nan"), 1.0, 1,
                             boxes[0]),
                 Diagnostics(2, 0.8, True, 0.3, 1.04, 2, boxes[1])]
        path = tmp_path / "results.csv"
        otb.write_results(path, boxes, diags)
        rows = otb.read_results(path)
        assert len(rows) == 2
        assert rows[1][0] == 2
        assert rows[1][1].as_tuple() == pytest.approx(boxes[1].as_tuple())
        assert rows[1][3] is True


class TestTrackCommand:
    def test_writes_one_row_per_frame(self, tmp_path):
        seq_dir, _ = make_sequence_dir(tmp_path)
        out = tmp_path / "results.csv"
        code = cli.main(["track", "--seq", str(seq_dir), "--out", str(out)]
                        + FAST)
        assert code == 0
        assert len(out.read_text().strip().splitlines()) == 6

    def test_seeded_runs_are_byte_identical(self, tmp_path):
        seq_dir, _ = make_sequence_dir(tmp_path)
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        assert cli.main(["track", "--seq", str(seq_dir), "--out", str(out1),
                         "--seed", "7"] + FAST) == 0
        assert cli.main(["track", "--seq", str(seq_dir), "--out", str(out2),
                         "--seed", "7"] + FAST) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_img_dir_exits_2(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert cli.main(["track", "--seq", str(empty)]) == 2

    def test_malformed_init_box_exits_2(self, tmp_path):
        seq_dir, _ = make_sequence_dir(tmp_path)
        assert cli.main(["track", "--seq", str(seq_dir),
                         "--init", "10,10,40"]) == 2

    def test_explicit_init_overrides_groundtruth(self, tmp_path):
        seq_dir, sequence = make_sequence_dir(tmp_path)
        out = tmp_path / "results.csv"
        box = sequence.boxes[0]
        init = f"{box.x:g},{box.y:g},{box.w:g},{box.h:g}"
        assert cli.main(["track", "--seq", str(seq_dir), "--out", str(out),
                         "--init", init] + FAST) == 0

    def test_config_file_with_cli_override(self, tmp_path):
        seq_dir, _ = make_sequence_dir(tmp_path)
        config = tmp_path / "tracker.cfg"
        config.write_text("eta=0.05\nseed=3\n# comment\n"
                          "enable_scale=false\nenable_redetection=false\n")
        out = tmp_path / "results.csv"
        assert cli.main(["track", "--seq", str(seq_dir), "--out", str(out),
                         "--config", str(config),
                         "--param", "eta=0.02"]) == 0

    def test_bad_config_key_exits_2(self, tmp_path):
        seq_dir, _ = make_sequence_dir(tmp_path)
        assert cli.main(["track", "--seq", str(seq_dir),
                         "--param", "bogus=1"]) == 2


class TestEvalCommand:
    def run_track(self, tmp_path):
        seq_dir, _ = make_sequence_dir(tmp_path)
        out = tmp_path / "results.csv"
        assert cli.main(["track", "--seq", str(seq_dir), "--out", str(out)]
                        + FAST) == 0
        return seq_dir, out

    def test_perfect_results_print_unit_precision(self, tmp_path, capsys):
        seq_dir, sequence = make_sequence_dir(tmp_path)
        results = tmp_path / "results.csv"
        with open(results, "w") as fh:
            for i, box in enumerate(sequence.boxes, start=1):
                fh.write(f"{i},{box.x},{box.y},{box.w},{box.h},1.0,0,1.0\n")
        code = cli.main(["eval", "--results", str(results),
                         "--gt", str(otb.groundtruth_path(seq_dir)),
                         "--out-dir", str(tmp_path / "eval")])
        assert code == 0
        printed = capsys.readouterr().out
        assert "precision@20=1.000" in printed
        assert "auc=" in printed

    def test_curve_files_row_counts(self, tmp_path):
        seq_dir, results = self.run_track(tmp_path)
        out_dir = tmp_path / "eval"
        assert cli.main(["eval", "--results", str(results),
                         "--gt", str(otb.groundtruth_path(seq_dir)),
                         "--out-dir", str(out_dir)]) == 0
        assert len((out_dir / "precision.csv").read_text().strip()
                   .splitlines()) == 51
        assert len((out_dir / "success.csv").read_text().strip()
                   .splitlines()) == 21

    def test_row_count_mismatch_exits_3(self, tmp_path):
        seq_dir, results = self.run_track(tmp_path)
        gt = otb.groundtruth_path(seq_dir)
        truncated = tmp_path / "short_gt.txt"
        truncated.write_text("\n".join(
            gt.read_text().strip().splitlines()[:-1]) + "\n")
        assert cli.main(["eval", "--results", str(results),
                         "--gt", str(truncated)]) == 3

    def test_missing_results_file_exits_2(self, tmp_path):
        assert cli.main(["eval", "--results", str(tmp_path / "nope.csv"),
                         "--gt", str(tmp_path / "nope.txt")]) == 2


class TestSynthCommand:
    def test_generates_sequence_directory(self, tmp_path):
        out = tmp_path / "seq"
        code = cli.main(["synth", "--scenario", "occlude", "--frames", "100",
                         "--out", str(out)])
        assert code == 0
        assert len(list((out / "img").glob("*.png"))) == 100
        rects = otb.read_rects(out / "groundtruth_rect.txt")
        assert len(rects) == 100

    def test_generation_is_reproducible(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert cli.main(["synth", "--scenario", "translate",
                             "--frames", "3", "--seed", "5",
                             "--out", str(out)]) == 0
        for name in ("img/0001.png", "img/0002.png", "groundtruth_rect.txt"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_unknown_scenario_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["synth", "--scenario", "warp", "--out", "x"])
        assert excinfo.value.code == 2
