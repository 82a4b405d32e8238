from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from oscillab_plots import FigureSpec, render
from oscillab_plots.cli import main
from oscillab_plots.render import RenderError

PNG_MAGIC = b"\x89PNG"


def _write_csv(path: Path, header, columns):
    rows = zip(*columns)
    path.write_text(",".join(header) + "\n"
                    + "\n".join(",".join(f"{v:.17g}" for v in r) for r in rows)
                    + "\n")
    return path


@pytest.fixture()
def field_csv(tmp_path):
    times = np.array([0.0, 0.5])
    x = np.linspace(0, 1, 5)
    xi = np.linspace(-1, 2, 7)
    F = np.clip((xi[None, None, :] - 0.2) / 1.0, 0.0, 1.0) \
        * np.ones((2, 5, 1))
    tt, xx, ss = np.meshgrid(times, x, xi, indexing="ij")
    path = _write_csv(tmp_path / "field.csv", ["t", "x", "xi", "F"],
                      [tt.ravel(), xx.ravel(), ss.ravel(), F.ravel()])
    (tmp_path / "field.grid.json").write_text(json.dumps(
        {"times": times.tolist(), "x": x.tolist(), "xi": xi.tolist(),
         "shape": [2, 5, 7]}))
    return path


class TestFigureKinds:
    def test_heatmap(self, field_csv, tmp_path):
        out = tmp_path / "heat.png"
        render(FigureSpec(kind="heatmap", inputs={"field": str(field_csv)},
                          output=str(out)))
        assert out.read_bytes()[:4] == PNG_MAGIC

    def test_lines(self, tmp_path):
        t = np.linspace(0, 1, 20)
        csv = _write_csv(tmp_path / "spread.csv", ["t", "max_spread"],
                         [t, np.exp(-3 * t)])
        out = tmp_path / "lines.png"
        render(FigureSpec(kind="lines", inputs={"table": str(csv)},
                          output=str(out)))
        assert out.read_bytes()[:4] == PNG_MAGIC

    def test_convergence_with_slope(self, tmp_path):
        n = np.array([8.0, 16.0, 32.0, 64.0])
        csv = _write_csv(tmp_path / "dist.csv", ["n", "normalized_distance"],
                         [n, 0.5 / n])
        out = tmp_path / "conv.png"
        render(FigureSpec(kind="convergence", inputs={"table": str(csv)},
                          output=str(out)))
        assert out.read_bytes()[:4] == PNG_MAGIC

    def test_equilibria_diagram(self, tmp_path):
        xi = np.linspace(-1.5, 1.5, 101)
        curve = _write_csv(tmp_path / "law_curve.csv", ["xi", "sigma"],
                           [xi, xi**3 - xi])
        eq = _write_csv(tmp_path / "equilibria.csv",
                        ["root", "stable", "sigma_prime", "s0"],
                        [np.array([-1.0, 0.0, 1.0]),
                         np.array([1.0, 0.0, 1.0]),
                         np.array([2.0, -1.0, 2.0]),
                         np.zeros(3)])
        cdf = _write_csv(tmp_path / "frozen_cdf.csv", ["xi", "F0", "F_T"],
                         [xi, np.clip(xi + 0.5, 0, 1),
                          np.where(xi < -1, 0.0, np.where(xi < 1, 0.5, 1.0))])
        out = tmp_path / "eq.png"
        render(FigureSpec(kind="equilibria-diagram",
                          inputs={"curve": str(curve), "equilibria": str(eq),
                                  "cdf": str(cdf)},
                          output=str(out)))
        assert out.read_bytes()[:4] == PNG_MAGIC


class TestErrors:
    def test_unknown_kind(self, tmp_path):
        with pytest.raises(RenderError, match="unknown figure kind"):
            FigureSpec(kind="pie", inputs={}, output=str(tmp_path / "x.png"))

    def test_missing_input(self, tmp_path):
        with pytest.raises(RenderError, match="not found"):
            FigureSpec(kind="lines", inputs={"table": str(tmp_path / "no.csv")},
                       output=str(tmp_path / "x.png"))

    def test_empty_csv_names_columns(self, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text("")
        spec = FigureSpec(kind="equilibria-diagram",
                          inputs={"curve": str(bad), "equilibria": str(bad)},
                          output=str(tmp_path / "x.png"))
        with pytest.raises(RenderError, match=r"xi.*sigma"):
            render(spec)

    def test_missing_columns_named(self, tmp_path):
        bad = _write_csv(tmp_path / "bad.csv", ["a", "b"],
                         [np.arange(3.0), np.arange(3.0)])
        spec = FigureSpec(kind="heatmap", inputs={"field": str(bad)},
                          output=str(tmp_path / "x.png"))
        (tmp_path / "bad.grid.json").write_text(
            json.dumps({"times": [0], "x": [0], "xi": [0], "shape": [1, 1, 1]}))
        with pytest.raises(RenderError, match="missing columns"):
            render(spec)

    def test_malformed_body_cli_exit(self, tmp_path, capsys):
        bad = tmp_path / "mal.csv"
        bad.write_text("t,max_spread\n0.1,abc\n")
        spec_file = tmp_path / "spec.json"
        spec_file.write_text(json.dumps({
            "kind": "lines", "inputs": {"table": str(bad)},
            "output": str(tmp_path / "x.png")}))
        assert main(["render", str(spec_file)]) == 1
        assert "malformed" in capsys.readouterr().err


class TestIdempotence:
    def test_render_twice_same_output(self, field_csv, tmp_path):
        out = tmp_path / "h.png"
        spec = FigureSpec(kind="heatmap", inputs={"field": str(field_csv)},
                          output=str(out))
        render(spec)
        before = set(tmp_path.iterdir())
        render(spec)
        after = set(tmp_path.iterdir())
        assert before == after


@pytest.mark.skipif(shutil.which("oscillab") is None,
                    reason="primary CLI not installed")
class TestAgainstPrimaryArtifacts:
    """Render all four kinds from CSVs emitted by the primary pipelines."""

    def test_full_chain(self, tmp_path):
        env_out = tmp_path / "runs"
        cfg = tmp_path / "hc.toml"
        cfg.write_text(
            'kind = "homogenize-compare"\nname = "hc"\n'
            '[law]\nkind = "shear-matched"\na = 0.5\nb = 2.0\n'
            '[params]\ntheta = 0.5\na = 0.5\nb = 2.0\nn = [8, 16]\nT = 0.2\n')
        subprocess.run(["oscillab", "--out", str(env_out), "run", str(cfg)],
                       check=True, capture_output=True)
        cfg2 = tmp_path / "fr.toml"
        cfg2.write_text('[law]\nkind = "cubic"\n[frozen]\nT = 20.0\n')
        subprocess.run(["oscillab", "--out", str(env_out / "frozen"),
                        "kinetic", "frozen", "--config", str(cfg2)],
                       check=True, capture_output=True)
        cfg3 = tmp_path / "bc.toml"
        cfg3.write_text(
            'kind = "kinetic"\nname = "bc"\n[params]\n'
            'study = "cancellation"\nn = 8\nT = 0.5\nn_outputs = 41\n')
        subprocess.run(["oscillab", "--out", str(env_out), "run", str(cfg3)],
                       check=True, capture_output=True)

        figs = tmp_path / "figs"
        specs = [
            {"kind": "heatmap",
             "inputs": {"field": str(env_out / "hc/effective.csv")},
             "output": str(figs / "heatmap.png")},
            {"kind": "convergence",
             "inputs": {"table": str(env_out / "hc/distance.csv")},
             "output": str(figs / "convergence.png")},
            {"kind": "lines",
             "inputs": {"table": str(env_out / "bc/spread.csv")},
             "output": str(figs / "spread.png")},
            {"kind": "equilibria-diagram",
             "inputs": {"curve": str(env_out / "frozen/law_curve.csv"),
                        "equilibria": str(env_out / "frozen/equilibria.csv"),
                        "cdf": str(env_out / "frozen/frozen_cdf.csv")},
             "output": str(figs / "equilibria.png")},
        ]
        for body in specs:
            spec_file = tmp_path / (Path(body["output"]).stem + ".json")
            spec_file.write_text(json.dumps(body))
            proc = subprocess.run(
                [sys.executable, "-m", "oscillab_plots.cli", "render",
                 str(spec_file)], capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            assert Path(body["output"]).read_bytes()[:4] == PNG_MAGIC
