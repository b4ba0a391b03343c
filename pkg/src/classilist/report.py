"""Self-contained report directories: a deterministic report.json plus,
when UI assets are available, a static HTML page that renders it with no
server behind it."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

from . import analytics, docs
from .analytics import HistogramSpec
from .bundle import fingerprint
from .model import Dataset

_DATA_MARKER = "<script>"


def build_report_doc(dataset: Dataset, spec: HistogramSpec, include_members: bool = False) -> dict:
    counts = analytics.per_class_counts(dataset)
    histograms = [
        docs.histogram_doc(dataset, h, include_members)
        for h in analytics.build_all_histograms(dataset, spec)
    ]
    return {
        "meta": docs.meta_doc(dataset, fingerprint(dataset), counts),
        "spec": docs.spec_doc(spec),
        "histograms": histograms,
        "confusion": docs.confusion_doc(dataset, analytics.confusion_matrix(dataset), include_members),
    }


def _inject_report(index_html: str, doc: dict) -> str:
    """Embed the report document ahead of the page's first script so the UI
    boots in static mode. '</' is escaped to keep the JSON inert in HTML."""
    payload = json.dumps(doc).replace("</", "<\\/")
    data_tag = f"<script>window.__REPORT__ = {payload};</script>"
    at = index_html.find(_DATA_MARKER)
    if at < 0:
        at = index_html.find("</head>")
    if at < 0:
        return data_tag + index_html
    return index_html[:at] + data_tag + index_html[at:]


def write_report(
    dataset: Dataset,
    out_dir: str | Path,
    spec: HistogramSpec,
    ui_dir: str | Path | None = None,
    include_members: bool = False,
) -> list[Path]:
    """Write report.json (and index.html + assets when a built UI exists)
    into out_dir. Returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = build_report_doc(dataset, spec, include_members)

    written = []
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    written.append(report_path)

    ui = Path(ui_dir) if ui_dir else None
    if ui and (ui / "index.html").is_file():
        for src in sorted(ui.rglob("*")):
            if not src.is_file():
                continue
            rel = src.relative_to(ui)
            dst = out_dir / rel
            dst.parent.mkdir(parents=True, exist_ok=True)
            if rel == Path("index.html"):
                dst.write_text(_inject_report(src.read_text(encoding="utf-8"), doc), encoding="utf-8")
            else:
                shutil.copyfile(src, dst)
            written.append(dst)
    return written
