"""Render figures from oscillab CSV artifacts.

Four figure kinds are supported:

* ``heatmap``: a kinetic-field CSV (long format with its .grid.json header)
  rendered as F over (x, xi) at a chosen output time.
* ``lines``: any CSV plotted column-wise against its first column.
* ``convergence``: a two-column table on log-log axes with the fitted
  slope annotated.
* ``equilibria-diagram``: the constitutive curve with the load line and
  stable/unstable equilibrium markers.

Rendering is idempotent and touches nothing but the output file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("heatmap", "lines", "convergence", "equilibria-diagram")


class RenderError(Exception):
    pass


@dataclass
class FigureSpec:
    kind: str
    inputs: dict
    output: str
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {KINDS}")
        for name, path in self.inputs.items():
            if not Path(path).exists():
                raise RenderError(f"input {name!r} not found: {path}")

    @staticmethod
    def from_json(path) -> "FigureSpec":
        data = json.loads(Path(path).read_text())
        try:
            return FigureSpec(kind=data["kind"], inputs=data["inputs"],
                              output=data["output"],
                              xlabel=data.get("xlabel", ""),
                              ylabel=data.get("ylabel", ""),
                              title=data.get("title", ""),
                              options=data.get("options", {}))
        except KeyError as exc:
            raise RenderError(f"figure spec missing field {exc}") from exc


def _read_table(path, required: list[str]) -> dict[str, np.ndarray]:
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    if not lines:
        raise RenderError(f"{path}: empty CSV; expected columns {required}")
    header = [h.strip() for h in lines[0].split(",")]
    missing = [c for c in required if c not in header]
    if missing:
        raise RenderError(f"{path}: missing columns {missing}; "
                          f"expected {required}, found {header}")
    if len(lines) < 2:
        raise RenderError(f"{path}: no data rows; expected columns {required}")
    try:
        body = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    except ValueError as exc:
        raise RenderError(f"{path}: malformed CSV body: {exc}") from exc
    if body.shape[1] != len(header):
        raise RenderError(f"{path}: row width does not match header")
    return {h: body[:, i] for i, h in enumerate(header)}


def _render_heatmap(spec: FigureSpec, ax):
    path = Path(spec.inputs["field"])
    grid_path = path.with_suffix(".grid.json")
    if not grid_path.exists():
        raise RenderError(f"{path}: missing grid header {grid_path.name}")
    header = json.loads(grid_path.read_text())
    cols = _read_table(path, ["t", "x", "xi", "F"])
    shape = tuple(header["shape"])
    F = cols["F"].reshape(shape)
    x = np.array(header["x"])
    xi = np.array(header["xi"])
    it = int(spec.options.get("time_index", shape[0] - 1))
    if not -shape[0] <= it < shape[0]:
        raise RenderError(f"time_index {it} out of range for {shape[0]} outputs")
    mesh = ax.pcolormesh(x, xi, F[it].T, shading="auto", cmap="viridis",
                         vmin=0.0, vmax=1.0)
    plt.colorbar(mesh, ax=ax, label="F")
    ax.set_xlabel(spec.xlabel or "x")
    ax.set_ylabel(spec.ylabel or "xi")
    t_val = header["times"][it]
    ax.set_title(spec.title or f"distribution function at t = {t_val:g}")


def _render_lines(spec: FigureSpec, ax):
    cols = _read_table(spec.inputs["table"], spec.options.get("require", []))
    names = list(cols)
    xcol = spec.options.get("x", names[0])
    ycols = spec.options.get("y", names[1:])
    if xcol not in cols:
        raise RenderError(f"x column {xcol!r} not in {names}")
    if not ycols:
        raise RenderError("lines figure needs at least one y column")
    for y in ycols:
        if y not in cols:
            raise RenderError(f"y column {y!r} not in {names}")
        ax.plot(cols[xcol], cols[y], label=y)
    ax.set_xlabel(spec.xlabel or xcol)
    ax.set_ylabel(spec.ylabel or ", ".join(ycols))
    ax.legend()
    ax.set_title(spec.title)


def _render_convergence(spec: FigureSpec, ax):
    cols = _read_table(spec.inputs["table"], [])
    names = list(cols)
    xcol = spec.options.get("x", names[0])
    ycol = spec.options.get("y", names[1] if len(names) > 1 else None)
    if ycol is None or xcol not in cols or ycol not in cols:
        raise RenderError(f"convergence needs x and y columns; found {names}")
    x, y = cols[xcol], cols[ycol]
    if np.any(x <= 0) or np.any(y <= 0):
        raise RenderError("convergence data must be positive for log-log axes")
    slope = np.polyfit(np.log(x), np.log(y), 1)[0]
    ax.loglog(x, y, "o-", label=ycol)
    ax.loglog(x, y[0] * (x / x[0]) ** slope, "k--", alpha=0.5,
              label=f"fitted slope {slope:.2f}")
    ax.set_xlabel(spec.xlabel or xcol)
    ax.set_ylabel(spec.ylabel or ycol)
    ax.legend()
    ax.set_title(spec.title or "convergence")


def _render_equilibria(spec: FigureSpec, ax):
    curve = _read_table(spec.inputs["curve"], ["xi", "sigma"])
    eq = _read_table(spec.inputs["equilibria"],
                     ["root", "stable", "sigma_prime"])
    ax.plot(curve["xi"], curve["sigma"], "-", color="tab:blue",
            label="constitutive curve")
    s0 = float(eq["s0"][0]) if "s0" in eq else 0.0
    ax.axhline(s0, color="0.4", lw=1.0, ls=":", label=f"load S0 = {s0:g}")
    stable = eq["stable"] > 0.5
    roots = eq["root"]
    sigma_at = np.interp(roots, curve["xi"], curve["sigma"])
    ax.plot(roots[stable], sigma_at[stable], "o", color="tab:green",
            ms=9, label="stable")
    ax.plot(roots[~stable], sigma_at[~stable], "x", color="tab:red",
            ms=10, mew=2.5, label="unstable")
    if "cdf" in spec.inputs:
        cdf = _read_table(spec.inputs["cdf"], ["xi", "F0"])
        support = cdf["xi"][(cdf["F0"] > 0.0) & (cdf["F0"] < 1.0)]
        if support.size:
            ax.axvspan(support.min(), support.max(), color="tab:orange",
                       alpha=0.15, label="initial data support")
    ax.set_xlabel(spec.xlabel or "state")
    ax.set_ylabel(spec.ylabel or "stress")
    ax.legend(fontsize=8)
    ax.set_title(spec.title or "equilibria relative to the constitutive curve")


_RENDERERS = {
    "heatmap": _render_heatmap,
    "lines": _render_lines,
    "convergence": _render_convergence,
    "equilibria-diagram": _render_equilibria,
}


def render(spec: FigureSpec) -> Path:
    """Render the figure described by the spec; returns the output path."""
    fig, ax = plt.subplots(figsize=spec.options.get("figsize", (6.0, 4.0)))
    try:
        _RENDERERS[spec.kind](spec, ax)
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=spec.options.get("dpi", 150),
                    bbox_inches="tight")
    finally:
        plt.close(fig)
    return out
