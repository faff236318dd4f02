"""Run reports: JSON document, fixed-column CSV time series and SVG plots."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"


def trace_columns(dim: int) -> list[str]:
    return (
        ["time", "l2", "weighted_norm", "bound", "ratio", "mass"]
        + [f"momentum_{j + 1}" for j in range(dim)]
        + ["energy"]
        + [f"T_{j + 1}" for j in range(dim)]
        + ["min_f"]
    )


@dataclass
class Check:
    name: str
    passed: bool
    value: float | None = None
    threshold: float | None = None
    criterion: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "value": _num(self.value),
            "threshold": _num(self.threshold),
            "criterion": self.criterion,
        }


@dataclass
class RunReport:
    config: dict
    checks: list[Check] = field(default_factory=list)
    conservation: list[dict] = field(default_factory=list)
    ratio_curve: list[dict] = field(default_factory=list)
    gevrey_fits: list[dict] = field(default_factory=list)
    lemma: list[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)
    trace_rows: list[dict] = field(default_factory=list)
    spectra: list[dict] = field(default_factory=list)  # for plots only
    metrics: dict = field(default_factory=dict)

    def check(self, name, passed, value=None, threshold=None, criterion=""):
        self.checks.append(Check(name, bool(passed), value, threshold, criterion))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        failed = [c.name for c in self.checks if not c.passed]
        return json_safe({
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "conservation": self.conservation,
            "ratio_curve": self.ratio_curve,
            "gevrey_fits": self.gevrey_fits,
            "lemma": self.lemma,
            "details": self.details,
            "metrics": self.metrics,
            "summary": {"pass": not failed, "n_checks": len(self.checks), "failed": failed},
        })


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def json_safe(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        return json_safe(obj.tolist())
    return obj


def load_schema() -> dict:
    return json.loads(resources.files("kinsmooth").joinpath("report.schema.json").read_text())


def validate(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``report`` does not match the schema."""
    import jsonschema

    jsonschema.validate(report, load_schema())


def format_csv(rows: list[dict], dim: int) -> str:
    cols = trace_columns(dim)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow(["" if row.get(c) is None else repr(float(row[c])) for c in cols])
    return buf.getvalue()


def write_outputs(report: RunReport, output_dir, dim: int, plots: bool = True) -> dict:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()
    validate(doc)
    (out / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    (out / "trace.csv").write_text(format_csv(report.trace_rows, dim))
    paths = {"report": str(out / "report.json"), "trace": str(out / "trace.csv"), "plots": []}
    if plots:
        paths["plots"] = emit_plots(report, out / "plots")
    return paths


def emit_plots(report: RunReport, plot_dir) -> list[str]:
    """Shell spectra against ``|xi|^(1/s)`` and ratio curves against ``t``, as SVG.

    Failures are logged as warnings and never abort a run.
    """
    if not report.trace_rows and not report.spectra and not report.ratio_curve:
        log.warning("empty trace: no plots written")
        return []
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        matplotlib.rcParams["svg.hashsalt"] = "kinsmooth"
    except Exception as exc:  # plotting is optional
        log.warning("plotting unavailable: %s", exc)
        return []
    plot_dir = Path(plot_dir)
    plot_dir.mkdir(parents=True, exist_ok=True)
    written = []
    meta = {"Date": None}
    try:
        if report.spectra:
            for s, name in ((0.5, "spectrum_xi2.svg"), (1.0, "spectrum_xi1.svg")):
                fig, ax = plt.subplots(figsize=(5, 3.5))
                for sp in report.spectra:
                    r = np.asarray(sp["radius"])
                    m = np.asarray(sp["shell_max"])
                    keep = m > 0
                    ax.plot(r[keep] ** (1 / s), np.log(m[keep]), ".-", label=f"t = {sp['time']:.3g}")
                ax.set_xlabel(r"$|\xi|^2$" if s == 0.5 else r"$|\xi|$")
                ax.set_ylabel("log shell max |coeff|")
                ax.legend(fontsize=7)
                fig.tight_layout()
                path = plot_dir / name
                fig.savefig(path, format="svg", metadata=meta)
                plt.close(fig)
                written.append(str(path))
        if report.ratio_curve:
            fig, ax = plt.subplots(figsize=(5, 3.5))
            t = [r["time"] for r in report.ratio_curve]
            ax.plot(t, [r["ratio"] for r in report.ratio_curve], "o-")
            ax.axhline(1.0, color="k", lw=0.8, ls="--")
            ax.set_xlabel("t")
            ax.set_ylabel("weighted norm / bound")
            fig.tight_layout()
            path = plot_dir / "ratio_curve.svg"
            fig.savefig(path, format="svg", metadata=meta)
            plt.close(fig)
            written.append(str(path))
    except Exception as exc:
        log.warning("plot failed: %s", exc)
    return written
