import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from coupled_align import io as cio
from coupled_align.cli import run
from coupled_align.synthetic import circle_views


@pytest.fixture
def views(tmp_path):
    v = circle_views(40, seed=3)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text(cio.dataset_csv(v.x1))
    b.write_text(cio.dataset_csv(v.x2))
    return a, b


def embed(tmp_path, views, *extra):
    out = tmp_path / "e.csv"
    code = run(["embed", "--x1", str(views[0]), "--x2", str(views[1]), "--dim", "2", "--alpha", "0.5",
                "--eta", "0.5", "--method", "knn", "--k", "10", "--weights", "heat", "--t", "1.0",
                "--out", str(out), *extra])
    return code, out


class TestVerify:
    def test_report(self, capsys):
        assert run(["verify", "--seed", "7", "--n", "6", "--trials", "100"]) == 0
        text = capsys.readouterr().out
        assert text.count("PASS ") == 9
        assert "measured c = 1" in text
        assert "DISAGREES" in text
        assert text.rstrip().endswith("overall: PASS")

    def test_bad_n(self, capsys):
        assert run(["verify", "--n", "2"]) == 2
        assert "--n" in capsys.readouterr().err


class TestEmbed:
    def test_two_n_rows(self, tmp_path, views):
        code, out = embed(tmp_path, views)
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "id,dataset,c1,c2"
        assert len(lines) - 1 == 2 * 40

    def test_deterministic(self, tmp_path, views):
        _, out = embed(tmp_path, views)
        first = out.read_bytes()
        embed(tmp_path, views)
        assert out.read_bytes() == first

    @pytest.mark.parametrize("flag,value", [("--alpha", "1.5"), ("--eta", "0"), ("--dim", "0"), ("--k", "40")])
    def test_flag_named(self, tmp_path, views, capsys, flag, value):
        code, out = embed(tmp_path, views, flag, value)
        assert code == 2
        assert flag in capsys.readouterr().err
        assert not out.exists()

    def test_missing_file(self, tmp_path, views):
        assert run(["embed", "--x1", str(tmp_path / "nope.csv"), "--x2", str(views[1]), "--out", "x"]) == 3

    def test_unequal_counts(self, tmp_path, views):
        short = tmp_path / "short.csv"
        short.write_text("\n".join(views[1].read_text().splitlines()[:30]) + "\n")
        assert run(["embed", "--x1", str(views[0]), "--x2", str(short), "--k", "5", "--out",
                    str(tmp_path / "e.csv")]) == 3


class TestPipelineCommands:
    def test_refine_and_eval(self, tmp_path, views, capsys):
        _, e = embed(tmp_path, views)
        out, trace = tmp_path / "r.csv", tmp_path / "t.csv"
        assert run(["refine", "--embed", str(e), "--x1", str(views[0]), "--x2", str(views[1]),
                    "--perplexity", "10", "--iters", "20", "--out", str(out), "--trace", str(trace)]) == 0
        rows = trace.read_text().splitlines()
        assert rows[0] == "iter,objective"
        values = [float(r.split(",")[1]) for r in rows[1:]]
        assert np.all(np.diff(values) <= 0)
        assert run(["eval", "--embed", str(out)]) == 0
        key, value = capsys.readouterr().out.strip().split(",")
        assert key == "align_error" and 0 <= float(value) <= 1

    def test_kernel_align(self, tmp_path, views):
        out, trace = tmp_path / "k.csv", tmp_path / "kt.csv"
        assert run(["kernel-align", "--x1", str(views[0]), "--x2", str(views[1]), "--dim", "2",
                    "--iters", "20", "--out", str(out), "--trace", str(trace)]) == 0
        t = cio.read_embedding(out)
        assert t.y1.shape == (40, 2) and t.y2.shape == (40, 2)

    def test_kernel_align_strict_shape(self, tmp_path, views, capsys):
        code = run(["kernel-align", "--x1", str(views[0]), "--x2", str(views[1]), "--dim", "2",
                    "--strict-paper-distortion", "--out", str(tmp_path / "k.csv")])
        assert code == 3
        assert "--strict-paper-distortion" in capsys.readouterr().err

    def test_build_graph(self, tmp_path, views):
        out = tmp_path / "w.csv"
        assert run(["build-graph", "--x", str(views[0]), "--k", "5", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 41 and len(lines[0].split(",")) == 41

    def test_indicator(self, views, capsys):
        assert run(["indicator", "--x1", str(views[0]), "--x2", str(views[1]), "--k", "5"]) == 0
        header, values = capsys.readouterr().out.splitlines()
        assert header == "f_re,f_im,n_exp_re,n_exp_im,theta"
        f_re, f_im, *_ , theta = map(float, values.split(","))
        assert theta == pytest.approx(np.pi / 4)
        # zero-diagonal weights give f = n exp(i theta) exactly
        assert f_re == pytest.approx(40 * np.cos(theta)) and f_im == pytest.approx(40 * np.sin(theta))

    def test_plot(self, tmp_path, views):
        _, e = embed(tmp_path, views)
        svg = tmp_path / "e.svg"
        assert run(["plot", "--embed", str(e), "--out", str(svg)]) == 0
        root = ET.parse(svg).getroot()
        ns = "{http://www.w3.org/2000/svg}"
        assert len(list(root.iter(ns + "circle"))) == 40
        assert len(list(root.iter(ns + "path"))) == 40

    def test_plot_empty(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        assert run(["plot", "--embed", str(empty), "--out", str(tmp_path / "e.svg")]) == 3


class TestConfig:
    def test_file_supplies_defaults(self, tmp_path, views):
        _, direct = embed(tmp_path, views, "--k", "8")
        expected = direct.read_bytes()
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"embed": {"x1": str(views[0]), "x2": str(views[1]), "k": 8}}))
        out = tmp_path / "via.csv"
        assert run(["--config", str(cfg), "embed", "--t", "1.0", "--out", str(out)]) == 0
        assert out.read_bytes() == expected

    def test_flags_override(self, tmp_path, views):
        _, direct = embed(tmp_path, views)
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"k": 3, "embed": {"dim": 5}}))
        out = tmp_path / "via.csv"
        assert run(["--config", str(cfg), "embed", "--x1", str(views[0]), "--x2", str(views[1]), "--dim", "2",
                    "--k", "10", "--t", "1.0", "--out", str(out)]) == 0
        assert out.read_bytes() == direct.read_bytes()

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"verify": {"bogus": 1}}))
        assert run(["--config", str(cfg), "verify"]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_unreadable(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{not json")
        assert run(["--config", str(cfg), "verify"]) == 2


class TestUsage:
    def test_unknown_command(self):
        assert run(["frobnicate"]) == 2

    def test_missing_required(self):
        assert run(["plot", "--out", "x.svg"]) == 2

    def test_log_env(self, monkeypatch, capsys):
        monkeypatch.setenv("COUPLED_ALIGN_LOG", "loud")
        assert run(["verify", "--trials", "1"]) == 0
        assert "COUPLED_ALIGN_LOG" in capsys.readouterr().err

    def test_log_debug(self, monkeypatch, tmp_path, views, capsys):
        import logging
        monkeypatch.setenv("COUPLED_ALIGN_LOG", "debug")
        embed(tmp_path, views)
        assert logging.getLogger("coupled_align").getEffectiveLevel() == logging.DEBUG
