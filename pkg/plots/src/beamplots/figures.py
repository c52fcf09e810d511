"""Figure rendering from the laboratory's CSV schemas.

Every artifact CSV starts with '# key = value' comment lines echoing the
run configuration, followed by a header row and numeric rows. Figures
carry that echo in their subtitle so each image identifies its run.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

REFERENCE_SLOPE = -1.0 / 24.0  # proven resolvent decay exponent

FIGURE_KINDS = ("spectrum-scatter", "resolvent-loglog", "energy-decay")


class ArtifactError(ValueError):
    """Missing or malformed CSV artifact; names the file or column."""


@dataclass
class FigureSpec:
    kind: str
    inputs: dict  # role -> csv path ("main" plus optional "spectrum")
    output: Path

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ArtifactError(
                f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}"
            )


@dataclass
class RenderResult:
    path: Path
    annotations: dict = field(default_factory=dict)


def read_artifact_csv(path) -> tuple:
    """Parse one artifact CSV into (config_echo, {column: array})."""
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"input file not found: {path}")
    meta = {}
    rows = []
    header = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                if value:
                    meta[key.strip()] = value.strip()
                continue
            if not line.strip():
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
            else:
                rows.append(line)
    if header is None or not rows:
        raise ArtifactError(f"no data rows in {path}")
    data = list(csv.reader(rows))
    table = {}
    for j, name in enumerate(header):
        try:
            table[name] = np.array([float(r[j]) for r in data])
        except (IndexError, ValueError) as exc:
            raise ArtifactError(f"malformed column {name!r} in {path}") from exc
    return meta, table


def _require(table, path, *columns):
    for name in columns:
        if name not in table:
            raise ArtifactError(f"missing column {name!r} in {path}")


def _subtitle(meta) -> str:
    keys = ("ell0", "ell", "n_left", "n_right", "seed")
    parts = [f"{k}={meta[k]}" for k in keys if k in meta]
    return "  ".join(parts)


def _finish(fig, ax, meta, spec, annotations):
    ax.set_title(ax.get_title() + "\n" + _subtitle(meta), fontsize=9)
    fig.tight_layout()
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return RenderResult(path=spec.output, annotations=annotations)


def _render_spectrum(spec):
    meta, table = read_artifact_csv(spec.inputs["main"])
    _require(table, spec.inputs["main"], "re", "im")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.scatter(table["re"], table["im"], s=12, color="tab:blue", label="eigenvalues")
    ax.axvline(0.0, color="tab:red", linewidth=1.0, label="imaginary axis")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title("Spectrum of the discrete generator")
    ax.legend(loc="best", fontsize=8)
    annotations = {"max_re": float(np.max(table["re"]))}
    return _finish(fig, ax, meta, spec, annotations)


def _render_resolvent(spec):
    meta, table = read_artifact_csv(spec.inputs["main"])
    _require(table, spec.inputs["main"], "lambda", "norm")
    lam = table["lambda"]
    norm = table["norm"]
    keep = table.get("resolution_ok", np.ones_like(lam)).astype(bool)
    lam_f, norm_f = lam[keep], norm[keep]
    if len(lam_f) < 2:
        raise ArtifactError(f"not enough resolved samples in {spec.inputs['main']}")
    data_slope = float(np.polyfit(np.log(lam_f), np.log(norm_f), 1)[0])

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(lam, norm, "o-", ms=3.5, color="tab:blue", label="resolvent norm")
    anchor = norm_f[0] * (lam_f / lam_f[0]) ** REFERENCE_SLOPE
    ax.loglog(
        lam_f,
        anchor,
        "--",
        color="tab:red",
        label=f"reference slope {REFERENCE_SLOPE:.4f} (= -1/24)",
    )
    ax.set_xlabel("lambda")
    ax.set_ylabel("|| resolvent ||")
    ax.set_title(f"Resolvent decay on the imaginary axis (data slope {data_slope:.4f})")
    ax.legend(loc="best", fontsize=8)
    annotations = {"reference_slope": REFERENCE_SLOPE, "data_slope": data_slope}
    return _finish(fig, ax, meta, spec, annotations)


def _render_energy(spec):
    meta, table = read_artifact_csv(spec.inputs["main"])
    _require(table, spec.inputs["main"], "t", "energy")
    t = table["t"]
    energy = table["energy"]
    positive = energy > 0.0
    tail = positive & (t >= 0.5 * t[-1])
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.semilogy(t[positive], energy[positive], color="tab:blue", label="energy")
    annotations = {}
    if int(np.sum(tail)) >= 3:
        slope, intercept = np.polyfit(t[tail], np.log(energy[tail]), 1)
        ax.semilogy(
            t[tail],
            np.exp(intercept + slope * t[tail]),
            "--",
            color="tab:orange",
            label=f"fitted rate {slope / 2.0:.4f}",
        )
        annotations["fitted_rate"] = float(slope / 2.0)
    if "spectrum" in spec.inputs and spec.inputs["spectrum"] is not None:
        _, spectrum = read_artifact_csv(spec.inputs["spectrum"])
        _require(spectrum, spec.inputs["spectrum"], "re")
        sigma = float(np.max(spectrum["re"]))
        ref = energy[positive][0] * np.exp(2.0 * sigma * (t[positive] - t[positive][0]))
        ax.semilogy(
            t[positive],
            ref,
            ":",
            color="tab:red",
            label=f"spectral abscissa rate {sigma:.4f}",
        )
        annotations["spectral_abscissa"] = sigma
    ax.set_xlabel("t")
    ax.set_ylabel("E(t)")
    ax.set_title("Energy decay")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, ax, meta, spec, annotations)


_RENDERERS = {
    "spectrum-scatter": _render_spectrum,
    "resolvent-loglog": _render_resolvent,
    "energy-decay": _render_energy,
}


def render(spec: FigureSpec) -> RenderResult:
    """Render one figure; inputs are read-only, output is one image file."""
    return _RENDERERS[spec.kind](spec)
