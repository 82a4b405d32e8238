"""CSV / JSON artifact writing with full-precision numbers and run manifests.

All numeric CSV output uses 17 significant digits so independent readers
can reproduce values bit-for-bit; manifests list every emitted file and
every check with its measured value, and are written last as the
run-completed marker.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["write_csv", "write_kinetic_field_csv", "read_kinetic_field_csv",
           "Check", "RunManifest", "config_hash"]

_FMT = "%.17g"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _FMT % float(v)
    return str(v)


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c) for c in columns]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("columns must share a length")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(c[i]) for c in cols) + "\n")
    return path


def write_kinetic_field_csv(path, times, x, xi, F, extra_header: dict | None = None):
    """Long-format (t, x, xi, F) CSV plus a JSON grid header alongside."""
    path = Path(path)
    times = np.asarray(times)
    x = np.asarray(x)
    xi = np.asarray(xi)
    F = np.asarray(F)
    tt, xx, ss = np.meshgrid(times, x, xi, indexing="ij")
    write_csv(path, ["t", "x", "xi", "F"],
              [tt.ravel(), xx.ravel(), ss.ravel(), F.ravel()])
    header = {"times": times.tolist(), "x": x.tolist(), "xi": xi.tolist(),
              "shape": list(F.shape)}
    if extra_header:
        header.update(extra_header)
    hpath = path.with_suffix(".grid.json")
    hpath.write_text(json.dumps(header, indent=1, sort_keys=True))
    return path, hpath


def read_kinetic_field_csv(path):
    path = Path(path)
    header = json.loads(path.with_suffix(".grid.json").read_text())
    data = np.loadtxt(path, delimiter=",", skiprows=1, usecols=3)
    shape = tuple(header["shape"])
    return (np.array(header["times"]), np.array(header["x"]),
            np.array(header["xi"]), data.reshape(shape))


def config_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    comparison: str = "<="      # "<=" or ">="

    @property
    def passed(self) -> bool:
        if self.comparison == "<=":
            return bool(self.value <= self.threshold)
        return bool(self.value >= self.threshold)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value,
                "threshold": self.threshold, "comparison": self.comparison,
                "pass": self.passed}


@dataclass
class RunManifest:
    config_path: str | None = None
    out_dir: Path | None = None
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    _t0: float = field(default_factory=time.perf_counter)

    def add_artifact(self, *paths) -> None:
        for p in paths:
            self.artifacts.append(str(Path(p)))

    def add_check(self, name, value, threshold, comparison="<=") -> Check:
        c = Check(name, float(value), float(threshold), comparison)
        self.checks.append(c)
        return c

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def write(self, out_dir=None, partial: bool = False) -> Path:
        out = Path(out_dir or self.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        body = {
            "tool_version": __version__,
            "config_hash": config_hash(self.config_path) if self.config_path else None,
            "wall_time_s": time.perf_counter() - self._t0,
            "checks": [c.to_dict() for c in self.checks],
            "artifacts": sorted(self.artifacts),
            "partial": partial,
        }
        path = out / ("manifest.partial.json" if partial else "manifest.json")
        path.write_text(json.dumps(body, indent=1, sort_keys=True))
        return path
