"""Dataset persistence: CSV rows, manifest sidecar, and revalidation.

Floats are serialized with 17 significant digits, which roundtrips
float64 exactly and keeps save -> load -> save byte-identical. The raw
header is c_1..c_80,label,gr; expanded files insert e_1..e_80 and
q_1..q_3240 before the label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import FormatError, PreconditionError
from ..qmat import is_ppt, validate_density_matrix
from ..tomo import decode, encode
from .balance import DatasetManifest
from .features import EXPANDED_WIDTH, RAW_WIDTH
from .labeling import LABELS, LabeledState

DATASET_CSV = "dataset.csv"
MANIFEST_TXT = "manifest.txt"
REJECTIONS_LOG = "rejections.log"

_RAW_HEADER = ",".join(
    [f"c_{i}" for i in range(1, 81)] + ["label", "gr"])
_EXPANDED_HEADER = ",".join(
    [f"c_{i}" for i in range(1, 81)]
    + [f"e_{i}" for i in range(1, 81)]
    + [f"q_{i}" for i in range(1, 3241)]
    + ["label", "gr"])


@dataclass(frozen=True)
class FeatureRow:
    """One dataset row: feature vector, class label, robustness value."""

    features: np.ndarray
    label: str
    gr: float


def _fmt(x: float) -> str:
    return "%.17g" % x


def rows_from_states(states: list[LabeledState]) -> list[FeatureRow]:
    """Encode labeled states into raw tomogram rows."""
    return [FeatureRow(features=encode(st.rho), label=st.label, gr=st.gr)
            for st in states]


def save_rows(rows: list[FeatureRow], path: str | Path) -> None:
    """Write rows as CSV; the header is chosen by the feature width."""
    if not rows:
        raise PreconditionError("cannot save an empty row list")
    width = rows[0].features.shape[0]
    if width == RAW_WIDTH:
        header = _RAW_HEADER
    elif width == EXPANDED_WIDTH:
        header = _EXPANDED_HEADER
    else:
        raise FormatError(f"unsupported feature width {width}")
    lines = [header]
    for k, row in enumerate(rows):
        if row.features.shape[0] != width:
            raise FormatError(f"row {k}: width {row.features.shape[0]} != {width}")
        if row.label not in LABELS:
            raise FormatError(f"row {k}: unknown label {row.label!r}")
        lines.append(",".join([_fmt(v) for v in row.features]
                              + [row.label, _fmt(row.gr)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_rows(path: str | Path) -> list[FeatureRow]:
    """Read a row CSV, validating header, labels and numeric fields."""
    path = Path(path)
    if not path.exists():
        raise FormatError(f"no such file: {path}")
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    if lines[0] == _RAW_HEADER:
        width = RAW_WIDTH
    elif lines[0] == _EXPANDED_HEADER:
        width = EXPANDED_WIDTH
    else:
        raise FormatError(f"{path}: malformed header")
    rows: list[FeatureRow] = []
    for k, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != width + 2:
            raise FormatError(f"{path}: line {k}: expected {width + 2} fields, "
                              f"got {len(parts)}")
        label = parts[width]
        if label not in LABELS:
            raise FormatError(f"{path}: line {k}: unknown label {label!r}")
        try:
            feats = np.array([float(v) for v in parts[:width]])
            gr = float(parts[width + 1])
        except ValueError as exc:
            raise FormatError(f"{path}: line {k}: {exc}") from None
        if not (np.all(np.isfinite(feats)) and math.isfinite(gr)):
            raise FormatError(f"{path}: line {k}: non-finite value")
        rows.append(FeatureRow(features=feats, label=label, gr=gr))
    return rows


def manifest_to_text(m: DatasetManifest) -> str:
    """Serialize a manifest as ordered key=value lines."""
    lines = [
        f"format_version={m.format_version}",
        f"epsilon={_fmt(m.epsilon)}",
        f"master_seed={m.master_seed}",
        f"target_per_class={m.target_per_class}",
        f"artificial_fraction={_fmt(m.artificial_fraction)}",
    ]
    for c in LABELS:
        lines.append(f"count_{c}={m.counts.get(c, 0)}")
    lines += [
        f"pptes_random={m.pptes_random}",
        f"pptes_artificial={m.pptes_artificial}",
        f"raw_draws={m.raw_draws}",
        f"ppt_found={m.ppt_found}",
        f"ppt_fraction={_fmt(m.ppt_fraction)}",
        f"artificial_attempts={m.artificial_attempts}",
        f"partial={'true' if m.partial else 'false'}",
        f"fidelity_sample={_fmt(m.fidelity_sample)}",
    ]
    for c in LABELS:
        if c in m.fidelity_per_class:
            lines.append(f"fidelity_{c}={_fmt(m.fidelity_per_class[c])}")
    for reason in sorted(m.rejections):
        lines.append(f"rejection_{reason}={m.rejections[reason]}")
    return "\n".join(lines) + "\n"


def manifest_from_text(text: str) -> DatasetManifest:
    """Parse a manifest written by manifest_to_text."""
    kv: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise FormatError(f"manifest line {n}: expected key=value")
        key, _, value = line.partition("=")
        kv[key.strip()] = value.strip()
    try:
        version = int(kv.pop("format_version"))
        if version != 1:
            raise FormatError(f"unsupported manifest format_version {version}")
        counts = {c: int(kv.pop(f"count_{c}")) for c in LABELS}
        m = DatasetManifest(
            format_version=version,
            epsilon=float(kv.pop("epsilon")),
            master_seed=int(kv.pop("master_seed")),
            target_per_class=int(kv.pop("target_per_class")),
            artificial_fraction=float(kv.pop("artificial_fraction")),
            counts=counts,
            pptes_random=int(kv.pop("pptes_random")),
            pptes_artificial=int(kv.pop("pptes_artificial")),
            raw_draws=int(kv.pop("raw_draws")),
            ppt_found=int(kv.pop("ppt_found")),
            ppt_fraction=float(kv.pop("ppt_fraction")),
            artificial_attempts=int(kv.pop("artificial_attempts")),
            partial=kv.pop("partial") == "true",
            fidelity_sample=float(kv.pop("fidelity_sample")),
        )
    except KeyError as exc:
        raise FormatError(f"manifest missing key {exc}") from None
    except ValueError as exc:
        raise FormatError(f"manifest value error: {exc}") from None
    for key, value in kv.items():
        if key.startswith("fidelity_") and key[len("fidelity_"):] in LABELS:
            m.fidelity_per_class[key[len("fidelity_"):]] = float(value)
        elif key.startswith("rejection_"):
            m.rejections[key[len("rejection_"):]] = int(value)
        else:
            raise FormatError(f"manifest has unknown key {key!r}")
    return m


def save_dataset(rows: list[FeatureRow], manifest: DatasetManifest,
                 out_dir: str | Path,
                 rejections: list[str] | None = None) -> None:
    """Write dataset.csv, manifest.txt and optionally rejections.log."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_rows(rows, out / DATASET_CSV)
    (out / MANIFEST_TXT).write_text(manifest_to_text(manifest), encoding="utf-8")
    if rejections is not None:
        (out / REJECTIONS_LOG).write_text(
            "".join(line + "\n" for line in rejections), encoding="utf-8")


def load_dataset(in_dir: str | Path) -> tuple[list[FeatureRow], DatasetManifest]:
    """Read dataset.csv and manifest.txt back from a directory."""
    in_dir = Path(in_dir)
    rows = load_rows(in_dir / DATASET_CSV)
    mpath = in_dir / MANIFEST_TXT
    if not mpath.exists():
        raise FormatError(f"no such file: {mpath}")
    manifest = manifest_from_text(mpath.read_text(encoding="utf-8"))
    return rows, manifest


def verify_rows(rows: list[FeatureRow], epsilon: float) -> list[str]:
    """Revalidate label/PPT/robustness consistency; returns problem strings.

    Each raw row is decoded back to a density matrix, checked as a
    state, and checked against its label: NPT rows must fail the
    partial-transpose test, SEP/PPTES rows must pass it, and the stored
    robustness must sit on the right side of epsilon.
    """
    problems: list[str] = []
    for k, row in enumerate(rows, start=1):
        if row.features.shape[0] != RAW_WIDTH:
            problems.append(f"row {k}: verification needs raw tomogram rows")
            continue
        try:
            rho = decode(row.features)
            validate_density_matrix(rho, f"row {k}")
        except Exception as exc:
            problems.append(f"row {k}: decode failed: {exc}")
            continue
        ppt = is_ppt(rho)
        if row.label == "NPT" and ppt:
            problems.append(f"row {k}: labeled NPT but passes the PPT test")
        if row.label in ("SEP", "PPTES") and not ppt:
            problems.append(f"row {k}: labeled {row.label} but fails the PPT test")
        if row.gr < 0:
            problems.append(f"row {k}: negative gr {row.gr}")
        if row.label == "SEP" and row.gr > epsilon:
            problems.append(f"row {k}: labeled SEP with gr {row.gr:.3e} > epsilon")
        if row.label in ("PPTES", "NPT") and row.gr <= epsilon:
            problems.append(f"row {k}: labeled {row.label} with gr "
                            f"{row.gr:.3e} <= epsilon")
    return problems
