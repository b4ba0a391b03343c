"""Reading and writing the on-disk bundle format.

A bundle is a directory with a ``manifest.json``, a ``predictions.csv``
(header ``id,actual,score:<class>,...``), an optional ``features.csv``
(empty cell = missing) and an optional ``images/`` directory holding
``<sample_id>.png`` or ``.jpg`` files.

Parsing is all-or-nothing: either a valid ``Dataset`` comes back or a
``BundleError`` carrying every problem found, each with its 1-based
source line. Writing is deterministic, so two writes of the same dataset
are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

from .model import ClassLabel, Dataset, PredictionRecord, normalize_scores, validate_dataset

FORMAT_VERSION = "1"
SCORE_PREFIX = "score:"


@dataclass(frozen=True)
class BundleIssue:
    message: str
    line: int | None = None
    file: str | None = None

    def __str__(self) -> str:
        where = self.file or ""
        if self.line is not None:
            where += f":{self.line}" if where else f"line {self.line}"
        return f"{where}: {self.message}" if where else self.message


class BundleError(Exception):
    """A bundle could not be loaded; carries every issue found."""

    def __init__(self, issues: list[BundleIssue] | tuple[BundleIssue, ...]):
        self.issues: tuple[BundleIssue, ...] = tuple(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class BundleManifest:
    format_version: str
    classes: tuple[str, ...]
    features: tuple[str, ...]
    normalized: bool
    has_images: bool
    predictions: str
    features_file: str | None = None
    images_dir: str | None = None


@dataclass(frozen=True)
class ParsedPrediction:
    line: int
    sample_id: str
    actual: int
    scores: tuple[float, ...]


def _parse_number(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {text!r}")
    return v


def parse_predictions(stream: TextIO) -> tuple[list[str], list[ParsedPrediction]]:
    """Parse a predictions CSV into class names and per-row records.

    Raises BundleError listing every malformed row; header problems abort
    immediately since rows cannot be interpreted without one.
    """
    reader = csv.reader(stream)
    issues: list[BundleIssue] = []
    try:
        header = next(reader)
    except StopIteration:
        raise BundleError([BundleIssue("empty file: missing header", line=1)]) from None

    if len(header) < 2 or header[0] != "id" or header[1] != "actual":
        raise BundleError([BundleIssue("header must start with 'id,actual'", line=1)])
    classes: list[str] = []
    for col in header[2:]:
        if not col.startswith(SCORE_PREFIX):
            raise BundleError([BundleIssue(f"unexpected column {col!r}: score columns must be prefixed {SCORE_PREFIX!r}", line=1)])
        name = col[len(SCORE_PREFIX):]
        if not name:
            raise BundleError([BundleIssue("empty class name in score column", line=1)])
        if name in classes:
            raise BundleError([BundleIssue(f"duplicate score column for class {name!r}", line=1)])
        classes.append(name)
    if len(classes) < 2:
        raise BundleError([BundleIssue(f"need at least 2 score columns, found {len(classes)}", line=1)])

    class_index = {name: i for i, name in enumerate(classes)}
    rows: list[ParsedPrediction] = []
    seen: set[str] = set()
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != 2 + len(classes):
            issues.append(BundleIssue(f"expected {2 + len(classes)} columns, got {len(row)}", line=line))
            continue
        sid, actual_name = row[0], row[1]
        if not sid:
            issues.append(BundleIssue("empty sample id", line=line))
            continue
        if sid in seen:
            issues.append(BundleIssue(f"duplicate sample id {sid!r}", line=line))
            continue
        seen.add(sid)
        if actual_name not in class_index:
            issues.append(BundleIssue(f"actual label {actual_name!r} is not among the classes", line=line))
            continue
        scores: list[float] = []
        ok = True
        for name, cell in zip(classes, row[2:]):
            try:
                scores.append(_parse_number(cell))
            except ValueError:
                issues.append(BundleIssue(f"score for class {name!r} is not a finite number: {cell!r}", line=line))
                ok = False
        if not ok:
            continue
        if all(s == 0.0 for s in scores):
            issues.append(BundleIssue(f"sample {sid!r}: all scores are zero", line=line))
            continue
        rows.append(ParsedPrediction(line=line, sample_id=sid, actual=class_index[actual_name], scores=tuple(scores)))

    if issues:
        raise BundleError(issues)
    return classes, rows


def parse_features(stream: TextIO, known_ids: set[str]) -> tuple[list[str], dict[str, tuple[float | None, ...]]]:
    """Parse a features CSV. Every row id must already exist in the
    predictions; ids absent here simply end up with all-missing features."""
    reader = csv.reader(stream)
    issues: list[BundleIssue] = []
    try:
        header = next(reader)
    except StopIteration:
        raise BundleError([BundleIssue("empty file: missing header", line=1)]) from None
    if not header or header[0] != "id":
        raise BundleError([BundleIssue("header must start with 'id'", line=1)])
    names = header[1:]
    if any(not n for n in names):
        raise BundleError([BundleIssue("empty feature name in header", line=1)])
    if len(set(names)) != len(names):
        raise BundleError([BundleIssue("duplicate feature name in header", line=1)])

    vectors: dict[str, tuple[float | None, ...]] = {}
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != 1 + len(names):
            issues.append(BundleIssue(f"expected {1 + len(names)} columns, got {len(row)}", line=line))
            continue
        sid = row[0]
        if sid not in known_ids:
            issues.append(BundleIssue(f"unknown sample id {sid!r}", line=line))
            continue
        if sid in vectors:
            issues.append(BundleIssue(f"duplicate feature row for sample {sid!r}", line=line))
            continue
        values: list[float | None] = []
        ok = True
        for name, cell in zip(names, row[1:]):
            if cell == "":
                values.append(None)
                continue
            try:
                values.append(_parse_number(cell))
            except ValueError:
                issues.append(BundleIssue(f"feature {name!r} is not a finite number: {cell!r}", line=line))
                ok = False
        if ok:
            vectors[sid] = tuple(values)

    if issues:
        raise BundleError(issues)
    return names, vectors


def read_manifest(path: Path) -> BundleManifest:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise BundleError([BundleIssue(f"manifest is not valid JSON: {e}", file=path.name)]) from None
    issues: list[BundleIssue] = []
    if raw.get("format_version") != FORMAT_VERSION:
        issues.append(BundleIssue(f"unsupported format_version {raw.get('format_version')!r}", file=path.name))
    classes = raw.get("classes")
    if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
        issues.append(BundleIssue("manifest 'classes' must be a list of strings", file=path.name))
        classes = []
    features = raw.get("features", [])
    if not isinstance(features, list) or not all(isinstance(f, str) for f in features):
        issues.append(BundleIssue("manifest 'features' must be a list of strings", file=path.name))
        features = []
    predictions = raw.get("predictions")
    if not isinstance(predictions, str) or not predictions:
        issues.append(BundleIssue("manifest 'predictions' must name the predictions file", file=path.name))
        predictions = ""
    if issues:
        raise BundleError(issues)
    return BundleManifest(
        format_version=FORMAT_VERSION,
        classes=tuple(classes),
        features=tuple(features),
        normalized=bool(raw.get("normalized", False)),
        has_images=bool(raw.get("has_images", False)),
        predictions=predictions,
        features_file=raw.get("features_file"),
        images_dir=raw.get("images_dir"),
    )


def load_bundle(manifest_path: str | Path, normalize: bool | None = None) -> Dataset:
    """Load a bundle into a validated Dataset.

    `normalize` overrides the manifest's flag when given; when row
    normalization is applied the resulting dataset records that fact.
    Raises BundleError on any content problem, OSError on unreadable files.
    """
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    manifest = read_manifest(manifest_path)
    root = manifest_path.parent

    predictions_path = root / manifest.predictions
    with predictions_path.open(encoding="utf-8", newline="") as f:
        try:
            classes, rows = parse_predictions(f)
        except BundleError as e:
            raise BundleError([BundleIssue(i.message, line=i.line, file=manifest.predictions) for i in e.issues]) from None

    if tuple(classes) != manifest.classes:
        raise BundleError([
            BundleIssue(
                f"manifest classes {list(manifest.classes)!r} do not match predictions header {classes!r}",
                file=manifest_path.name,
            )
        ])
    if not rows:
        raise BundleError([BundleIssue("empty dataset: no prediction rows", file=manifest.predictions)])

    feature_names: list[str] = []
    vectors: dict[str, tuple[float | None, ...]] = {}
    if manifest.features_file:
        features_path = root / manifest.features_file
        with features_path.open(encoding="utf-8", newline="") as f:
            try:
                feature_names, vectors = parse_features(f, {r.sample_id for r in rows})
            except BundleError as e:
                raise BundleError([BundleIssue(i.message, line=i.line, file=manifest.features_file) for i in e.issues]) from None
        if manifest.features and tuple(feature_names) != manifest.features:
            raise BundleError([
                BundleIssue(
                    f"manifest features {list(manifest.features)!r} do not match features header {feature_names!r}",
                    file=manifest_path.name,
                )
            ])
    elif manifest.features:
        raise BundleError([BundleIssue("manifest lists features but names no features_file", file=manifest_path.name)])

    images_dir = root / (manifest.images_dir or "images") if manifest.has_images else None
    f_count = len(feature_names)
    missing_vector = (None,) * f_count

    records = []
    for row in rows:
        image_ref = None
        if images_dir is not None:
            for ext in (".png", ".jpg"):
                candidate = images_dir / f"{row.sample_id}{ext}"
                if candidate.is_file():
                    image_ref = str(candidate)
                    break
        records.append(
            PredictionRecord(
                sample_id=row.sample_id,
                actual=row.actual,
                scores=row.scores,
                features=vectors.get(row.sample_id, missing_vector) if f_count else None,
                image_ref=image_ref,
            )
        )

    apply_normalization = manifest.normalized if normalize is None else normalize
    if apply_normalization:
        records = [normalize_scores(r) for r in records]

    dataset = Dataset(
        classes=tuple(ClassLabel(name=n, index=i) for i, n in enumerate(classes)),
        feature_names=tuple(feature_names),
        records=tuple(records),
        normalized=apply_normalization,
    )

    report = validate_dataset(dataset)
    if report.violations:
        line_of = {row.sample_id: row.line for row in rows}
        raise BundleError([
            BundleIssue(v.message, line=line_of.get(v.sample_id), file=manifest.predictions)
            for v in report.violations
        ])
    return dataset


def write_bundle(dataset: Dataset, directory: str | Path) -> BundleManifest:
    """Write `dataset` as a bundle into `directory` (created if needed).

    Numbers use the shortest decimal form that round-trips exactly, lines
    end with LF, and the manifest key order is fixed, so the output is a
    pure function of the dataset.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    class_names = dataset.class_names
    has_features = bool(dataset.feature_names)
    has_images = any(r.image_ref for r in dataset.records)

    with (directory / "predictions.csv").open("w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "actual", *(SCORE_PREFIX + n for n in class_names)])
        for r in dataset.records:
            w.writerow([r.sample_id, class_names[r.actual], *(repr(s) for s in r.scores)])

    if has_features:
        with (directory / "features.csv").open("w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["id", *dataset.feature_names])
            for r in dataset.records:
                # absent and all-missing vectors both load back as all-missing
                if r.features is None or all(v is None for v in r.features):
                    continue
                w.writerow([r.sample_id, *("" if v is None else repr(v) for v in r.features)])

    manifest = BundleManifest(
        format_version=FORMAT_VERSION,
        classes=class_names,
        features=dataset.feature_names,
        normalized=dataset.normalized,
        has_images=has_images,
        predictions="predictions.csv",
        features_file="features.csv" if has_features else None,
        images_dir="images" if has_images else None,
    )
    doc: dict = {
        "format_version": manifest.format_version,
        "classes": list(manifest.classes),
        "features": list(manifest.features),
        "normalized": manifest.normalized,
        "has_images": manifest.has_images,
        "predictions": manifest.predictions,
    }
    if manifest.features_file:
        doc["features_file"] = manifest.features_file
    if manifest.images_dir:
        doc["images_dir"] = manifest.images_dir
    (directory / "manifest.json").write_text(
        json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return manifest


def fingerprint(dataset: Dataset) -> str:
    """Content hash of a dataset, stable across identical loads. Image file
    locations are excluded so the hash does not depend on where a bundle
    sits on disk."""
    h = hashlib.sha256()

    def put(*parts: str) -> None:
        for p in parts:
            h.update(p.encode("utf-8"))
            h.update(b"\x1f")
        h.update(b"\x1e")

    put("classes", *dataset.class_names)
    put("features", *dataset.feature_names)
    put("normalized", repr(dataset.normalized))
    for r in dataset.records:
        features = (
            ()
            if r.features is None
            else tuple("" if v is None else repr(v) for v in r.features)
        )
        put(
            r.sample_id,
            str(r.actual),
            *(repr(s) for s in r.scores),
            *features,
            "img" if r.image_ref else "",
        )
    return "sha256:" + h.hexdigest()
