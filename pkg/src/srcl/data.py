"""Dataset I/O and the synthetic benchmark family.

Canonical sample file: CSV with header ``grade,f0,f1,...,f{m-1}`` and one
sample per row.  Run configuration travels as a small JSON manifest.  Gray
images load from PGM (P2 ascii / P5 binary) or plain CSV matrices.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .core import Dictionary
from .errors import (
    BadDimension,
    DimensionMismatch,
    GradeMissing,
    InvalidImage,
    ParseError,
)
from .features import GrayImage, _bilinear_resize


class FeatureKind(enum.Enum):
    RawVector = "RawVector"
    ImageResize = "ImageResize"
    BagOfWords = "BagOfWords"


@dataclass(frozen=True)
class DatasetManifest:
    """Paths plus feature recipe for one grading run."""

    reference_path: str
    test_path: str
    feature_kind: FeatureKind = FeatureKind.RawVector
    grade_column: str = "grade"
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.feature_kind, FeatureKind):
            object.__setattr__(
                self, "feature_kind", FeatureKind(self.feature_kind)
            )


def save_manifest(path, manifest: DatasetManifest) -> None:
    payload = {
        "reference_path": manifest.reference_path,
        "test_path": manifest.test_path,
        "feature_kind": manifest.feature_kind.value,
        "grade_column": manifest.grade_column,
        "seed": manifest.seed,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_manifest(path) -> DatasetManifest:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    try:
        return DatasetManifest(
            reference_path=payload["reference_path"],
            test_path=payload["test_path"],
            feature_kind=FeatureKind(payload.get("feature_kind", "RawVector")),
            grade_column=payload.get("grade_column", "grade"),
            seed=int(payload.get("seed", 0)),
        )
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: bad manifest field ({exc})") from exc


# ---------------------------------------------------------------------------
# sample CSV files
# ---------------------------------------------------------------------------


def save_samples(path, features: np.ndarray, grades) -> None:
    """Write samples (rows) to the canonical grade,f0,... CSV.

    Floats are written with repr, so a load round-trips bit-exactly.
    """
    features = np.asarray(features, dtype=float)
    grades = np.asarray(grades, dtype=float)
    if features.ndim != 2 or grades.ndim != 1:
        raise DimensionMismatch("features must be 2-D and grades 1-D")
    if features.shape[0] != grades.size:
        raise DimensionMismatch(
            f"{features.shape[0]} feature rows vs {grades.size} grades"
        )
    header = ["grade"] + [f"f{i}" for i in range(features.shape[1])]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for grade, row in zip(grades, features):
            writer.writerow([repr(float(grade))] + [repr(float(v)) for v in row])


def load_samples(path, grade_column: str = "grade") -> tuple[np.ndarray, np.ndarray]:
    """Read a canonical CSV; returns (features rows x m, grades).

    Parse failures name the offending row and column.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if grade_column not in header:
            raise GradeMissing(
                f"{path}: no {grade_column!r} column in header {header}"
            )
        g_idx = header.index(grade_column)
        rows = []
        grades = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}, row {line_no}: {len(row)} fields, "
                    f"expected {len(header)}"
                )
            values = []
            for col, text in enumerate(row):
                try:
                    values.append(float(text))
                except ValueError:
                    raise ParseError(
                        f"{path}, row {line_no}, column {header[col]!r}: "
                        f"not a number: {text!r}"
                    ) from None
            grades.append(values.pop(g_idx))
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no sample rows")
    return np.asarray(rows, dtype=float), np.asarray(grades, dtype=float)


def load_dictionary(path, grade_column: str = "grade") -> Dictionary:
    """Load reference samples as a Dictionary (atoms = columns)."""
    features, grades = load_samples(path, grade_column)
    return Dictionary(features.T, grades)


# ---------------------------------------------------------------------------
# gray images (PGM P2/P5 or CSV matrix)
# ---------------------------------------------------------------------------


def load_gray_image(path) -> GrayImage:
    """Load a gray image from .pgm (P2/P5) or a CSV matrix of [0,1] floats."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return _load_pgm(path)
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(f"{path}, row {line_no}: {exc}") from None
    if not rows:
        raise ParseError(f"{path}: no pixel rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ParseError(f"{path}: ragged rows (widths {sorted(widths)})")
    return GrayImage(np.asarray(rows, dtype=float))


def _load_pgm(path: Path) -> GrayImage:
    data = path.read_bytes()
    if data[:2] not in (b"P2", b"P5"):
        raise ParseError(f"{path}: not a P2/P5 PGM file")
    binary = data[:2] == b"P5"
    # Header: magic, width, height, maxval; '#' comments allowed between tokens.
    tokens = []
    pos = 2
    while len(tokens) < 3 and pos < len(data):
        blob = data[pos : pos + 1]
        if blob.isspace():
            pos += 1
        elif blob == b"#":
            pos = data.index(b"\n", pos) + 1
        else:
            m = re.match(rb"[0-9]+", data[pos:])
            if not m:
                raise ParseError(f"{path}: malformed PGM header")
            tokens.append(int(m.group()))
            pos += m.end()
    if len(tokens) < 3:
        raise ParseError(f"{path}: truncated PGM header")
    width, height, maxval = tokens
    if maxval < 1:
        raise ParseError(f"{path}: PGM maxval must be >= 1")
    if binary:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
        if raw.size != width * height:
            raise ParseError(f"{path}: truncated PGM pixel data")
    else:
        try:
            raw = np.array(data[pos:].split(), dtype=float)
        except ValueError as exc:
            raise ParseError(f"{path}: bad ascii PGM pixels ({exc})") from None
        if raw.size != width * height:
            raise ParseError(
                f"{path}: expected {width * height} pixels, got {raw.size}"
            )
    pixels = raw.astype(float).reshape(height, width) / float(maxval)
    return GrayImage(pixels)


def save_pgm(path, image: GrayImage) -> None:
    """Write an 8-bit binary (P5) PGM."""
    if not isinstance(image, GrayImage):
        raise InvalidImage("save_pgm expects a GrayImage")
    h, w = image.shape
    gray = np.round(image.pixels * 255.0).astype("u1")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(gray.tobytes())


# ---------------------------------------------------------------------------
# synthetic benchmark family
# ---------------------------------------------------------------------------


class SyntheticData(NamedTuple):
    dictionary: Dictionary
    test_features: np.ndarray  # rows = samples
    test_grades: np.ndarray


def cup_prototype(grade: float, side: int) -> np.ndarray:
    """Radial two-level disc image whose inner "cup" radius grows with grade.

    Pointwise nondecreasing in the grade, which makes the Euclidean distance
    between prototypes monotone in the grade gap from any fixed anchor.
    """
    axis = (np.arange(side) + 0.5) / side * 2.0 - 1.0
    radius = np.hypot(axis[:, None], axis[None, :])
    disc_r = 0.9
    cup_r = float(grade) * disc_r
    edge = 3.0 / side
    disc = _smoothstep((disc_r - radius) / edge)
    cup = _smoothstep((cup_r - radius) / edge)
    return 0.15 + 0.4 * disc + 0.35 * cup


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def generate_synthetic(
    n_ref: int,
    n_test: int,
    m: int,
    noise_sigma: float,
    seed: int,
    *,
    nuisance_scale: float = 0.3,
    nuisance_rank: int = 3,
) -> SyntheticData:
    """Deterministic synthetic grading family on a sqrt(m) x sqrt(m) grid.

    Latent grades are Uniform[0.2, 0.9].  Each sample is its grade's radial
    cup prototype, plus (optionally) a shared low-rank nuisance component
    with per-sample strengths independent of the grade — smooth patterns in
    fixed locations, standing in for vessel-like structure — plus white
    Gaussian pixel noise.  The nuisance RMS norm is `nuisance_scale` times
    the RMS norm of the prototype deviations from their mean.

    With ``noise_sigma=0`` and ``nuisance_scale=0`` the features are an exact
    deterministic function of the grade.
    """
    if n_ref < 10:
        raise ValueError(f"n_ref must be >= 10, got {n_ref}")
    if n_test < 1:
        raise ValueError(f"n_test must be >= 1, got {n_test}")
    if noise_sigma < 0 or not np.isfinite(noise_sigma):
        raise ValueError("noise_sigma must be finite and >= 0")
    if nuisance_scale < 0 or not np.isfinite(nuisance_scale):
        raise ValueError("nuisance_scale must be finite and >= 0")
    side = math.isqrt(int(m))
    if side * side != m:
        raise BadDimension(f"m must be a perfect square, got {m}")

    rng = np.random.default_rng(seed)
    grades_ref = rng.uniform(0.2, 0.9, n_ref)
    grades_test = rng.uniform(0.2, 0.9, n_test)
    ref = np.stack([cup_prototype(u, side).ravel() for u in grades_ref])
    test = np.stack([cup_prototype(u, side).ravel() for u in grades_test])

    if nuisance_scale > 0 and nuisance_rank > 0:
        patterns = np.empty((nuisance_rank, m))
        coarse_side = max(2, side // 8)
        for r in range(nuisance_rank):
            coarse = rng.standard_normal((coarse_side, coarse_side))
            smooth = _bilinear_resize(coarse, side, side).ravel()
            patterns[r] = smooth / np.linalg.norm(smooth)
        amp_ref = rng.standard_normal((n_ref, nuisance_rank))
        amp_test = rng.standard_normal((n_test, nuisance_rank))
        everything = np.vstack([ref, test])
        proto_dev = everything - everything.mean(axis=0)
        rms_proto = math.sqrt(float(np.mean(np.sum(proto_dev**2, axis=1))))
        raw = np.vstack([amp_ref, amp_test]) @ patterns
        rms_raw = math.sqrt(float(np.mean(np.sum(raw**2, axis=1))))
        if rms_raw > 0:
            factor = nuisance_scale * rms_proto / rms_raw
            ref = ref + factor * raw[:n_ref]
            test = test + factor * raw[n_ref:]

    if noise_sigma > 0:
        ref = ref + rng.normal(0.0, noise_sigma, ref.shape)
        test = test + rng.normal(0.0, noise_sigma, test.shape)

    return SyntheticData(Dictionary(ref.T, grades_ref), test, grades_test)
