"""HTR document model: regions, lines, layout classification, reading order.

Documents arrive either in this package's canonical JSON format
(``certpipe-doc/1``) or as the page-layout XML subset emitted by HTR tools
(TextRegion/TextLine/Baseline/Coords with Unicode text). All operations here
are pure over the loaded document.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .errors import MalformedName, NoRegions, ParseError
from .geometry import Point, Polygon, Rect, polygon, region_bounding_rect
from .scans import ScanId, format_scan_filename, parse_scan_filename

DOC_FORMAT = "certpipe-doc/1"


@dataclass(frozen=True)
class TextLine:
    id: str
    baseline: tuple[Point, ...]  # ordered by non-decreasing x
    text: str = ""
    confidence: float | None = None

    def __post_init__(self):
        if len(self.baseline) < 2:
            raise ParseError("baseline needs >= 2 points", f"line[{self.id}]")
        ordered = tuple(sorted(self.baseline, key=lambda p: p.x))
        object.__setattr__(self, "baseline", ordered)

    @property
    def midpoint(self) -> Point:
        # midpoint of the baseline endpoints; robust to skewed baselines
        a, b = self.baseline[0], self.baseline[-1]
        return Point((a.x + b.x) / 2, (a.y + b.y) / 2)


@dataclass(frozen=True)
class TextRegion:
    id: str
    polygon: Polygon
    lines: tuple[TextLine, ...] = ()
    declared_order: int | None = None

    @property
    def bounding_rect(self) -> Rect:
        return region_bounding_rect(self.polygon)


@dataclass(frozen=True)
class HtrDocument:
    scan: ScanId | None
    page_width: float
    page_height: float
    regions: tuple[TextRegion, ...]
    issues: tuple[str, ...] = ()

    def __post_init__(self):
        if self.page_width <= 0 or self.page_height <= 0:
            raise ParseError("page dimensions must be > 0", "page")
        ids = [r.id for r in self.regions]
        if len(ids) != len(set(ids)):
            raise ParseError("region ids must be unique", "regions")

    def line_count(self) -> int:
        return sum(len(r.lines) for r in self.regions)

    def validate(self, tol_frac: float = 0.05) -> list[str]:
        """Soft checks: line baseline midpoints inside their region's
        bounding rect, within a tolerance fraction of the page size."""
        problems = []
        tol = tol_frac * max(self.page_width, self.page_height)
        for region in self.regions:
            rect = region.bounding_rect
            for line in region.lines:
                if not rect.contains(line.midpoint, tol=tol):
                    problems.append(f"line {line.id} midpoint outside region {region.id}")
        return problems


class LayoutKind(str, Enum):
    ONE_COLUMN = "OneColumn"
    TWO_COLUMN = "TwoColumn"
    THREE_COLUMN = "ThreeColumn"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class LayoutClass:
    kind: LayoutKind
    center_region_id: str | None = None
    margin_merged: bool = False


@dataclass(frozen=True)
class LayoutConfig:
    # a side region this wide (fraction of page width) counts as a margin column
    margin_min_frac: float = 0.05
    # center column ending past this fraction leaves no room for right margin text
    merged_right_frac: float = 0.90


DEFAULT_LAYOUT = LayoutConfig()


def classify_layout(doc: HtrDocument, config: LayoutConfig = DEFAULT_LAYOUT) -> LayoutClass:
    """Classify the column layout from region bounding rectangles.

    The widest region is the candidate center column; regions fully to its
    left/right whose width clears the margin threshold count as margin
    columns. Invariant under uniform scaling of all coordinates.
    """
    if not doc.regions:
        return LayoutClass(LayoutKind.UNKNOWN)
    rects = {r.id: r.bounding_rect for r in doc.regions}
    center_id = max(
        rects, key=lambda rid: (rects[rid].width, -rects[rid].left, rid)
    )
    center = rects[center_id]
    left = right = 0
    for rid, rect in rects.items():
        if rid == center_id or rect.width < config.margin_min_frac * doc.page_width:
            continue
        if rect.center_x < center.left:
            left += 1
        elif rect.center_x > center.right:
            right += 1
    if left and right:
        kind = LayoutKind.THREE_COLUMN
    elif left or right:
        kind = LayoutKind.TWO_COLUMN
    else:
        kind = LayoutKind.ONE_COLUMN
    merged = center.right > config.merged_right_frac * doc.page_width
    return LayoutClass(kind, center_id, merged)


def _region_order(doc: HtrDocument) -> list[TextRegion]:
    declared = [r.declared_order for r in doc.regions]
    if declared and all(o is not None for o in declared) and len(set(declared)) == len(declared):
        return sorted(doc.regions, key=lambda r: r.declared_order)
    return sorted(
        doc.regions,
        key=lambda r: (r.bounding_rect.left, r.bounding_rect.top, r.id),
    )


def _line_order(region: TextRegion) -> list[TextLine]:
    return sorted(region.lines, key=lambda l: (l.midpoint.y, l.midpoint.x, l.id))


def reorder_lines(doc: HtrDocument) -> list[tuple[str, TextLine]]:
    """Return all lines in reading order as (region_id, line) pairs.

    Declared region order from the source file wins when present and total;
    otherwise regions sort by bounding-rect left edge then top edge. Lines
    sort by baseline midpoint y, ties by x. Always a permutation of the
    document's lines.
    """
    out: list[tuple[str, TextLine]] = []
    for region in _region_order(doc):
        out.extend((region.id, line) for line in _line_order(region))
    return out


def main_text(
    doc: HtrDocument,
    config: LayoutConfig = DEFAULT_LAYOUT,
    layout: LayoutClass | None = None,
) -> tuple[str, list[str]]:
    """Split the document into the center-column text and margin texts.

    The center text joins the center region's lines in reading order with
    newlines; every other region yields one margin text, in region order.
    """
    if not doc.regions:
        raise NoRegions("document has no regions")
    layout = layout or classify_layout(doc, config)
    center_text = ""
    margins: list[str] = []
    for region in _region_order(doc):
        text = "\n".join(line.text for line in _line_order(region))
        if region.id == layout.center_region_id:
            center_text = text
        else:
            margins.append(text)
    return center_text, margins


# --- serialization -----------------------------------------------------------


def serialize_document(doc: HtrDocument) -> dict:
    return {
        "format": DOC_FORMAT,
        "scan": format_scan_filename(doc.scan) if doc.scan else None,
        "page": {"width": doc.page_width, "height": doc.page_height},
        "regions": [
            {
                "id": r.id,
                "polygon": [[p.x, p.y] for p in r.polygon],
                "declared_order": r.declared_order,
                "lines": [
                    {
                        "id": l.id,
                        "baseline": [[p.x, p.y] for p in l.baseline],
                        "text": l.text,
                        "confidence": l.confidence,
                    }
                    for l in r.lines
                ],
            }
            for r in doc.regions
        ],
    }


def document_to_json(doc: HtrDocument) -> str:
    return json.dumps(serialize_document(doc), ensure_ascii=False, sort_keys=True)


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ParseError(f"missing key {key!r}", path)
    return mapping[key]


def parse_document_json(text: str, source: str = "<json>") -> HtrDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), source) from exc
    if not isinstance(data, dict) or data.get("format") != DOC_FORMAT:
        raise ParseError(f"expected format {DOC_FORMAT!r}", source)
    page = _require(data, "page", "page")
    scan_name = data.get("scan")
    scan = None
    if scan_name:
        try:
            scan = parse_scan_filename(scan_name)
        except Exception as exc:
            raise ParseError(f"bad scan name {scan_name!r}: {exc}", "scan") from exc
    issues: list[str] = []
    regions = []
    for i, rdata in enumerate(_require(data, "regions", "regions")):
        rpath = f"regions[{i}]"
        try:
            poly = polygon(_require(rdata, "polygon", f"{rpath}.polygon"))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad polygon: {exc}", f"{rpath}.polygon") from exc
        if len(poly) < 3:
            raise ParseError("polygon needs >= 3 points", f"{rpath}.polygon")
        lines = []
        for j, ldata in enumerate(rdata.get("lines", ())):
            lpath = f"{rpath}.lines[{j}]"
            try:
                baseline = tuple(
                    Point(float(x), float(y))
                    for x, y in _require(ldata, "baseline", f"{lpath}.baseline")
                )
                lines.append(
                    TextLine(
                        id=str(_require(ldata, "id", f"{lpath}.id")),
                        baseline=baseline,
                        text=str(ldata.get("text", "")),
                        confidence=ldata.get("confidence"),
                    )
                )
            except ParseError:
                raise
            except (TypeError, ValueError) as exc:
                raise ParseError(f"bad line: {exc}", lpath) from exc
        if not lines:
            issues.append(f"region {rdata.get('id')} has no text lines")
        regions.append(
            TextRegion(
                id=str(_require(rdata, "id", f"{rpath}.id")),
                polygon=poly,
                lines=tuple(lines),
                declared_order=rdata.get("declared_order"),
            )
        )
    return HtrDocument(
        scan=scan,
        page_width=float(_require(page, "width", "page.width")),
        page_height=float(_require(page, "height", "page.height")),
        regions=tuple(regions),
        issues=tuple(issues),
    )


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_points(text: str | None, path: str) -> tuple[Point, ...]:
    if not text:
        raise ParseError("missing points attribute", path)
    pts = []
    for pair in text.split():
        try:
            x, y = pair.split(",")
            pts.append(Point(float(x), float(y)))
        except ValueError as exc:
            raise ParseError(f"bad point {pair!r}", path) from exc
    return tuple(pts)


_READING_ORDER_RE = re.compile(r"readingOrder\s*\{\s*index\s*:\s*(\d+)\s*;?\s*\}")


def parse_document_xml(text: str, source: str = "<xml>") -> HtrDocument:
    """Parse the page-layout XML subset: Page dimensions, TextRegion coords,
    TextLine baselines and Unicode text, plus reading order when present."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(str(exc), source) from exc

    page = None
    for el in root.iter():
        if _strip_ns(el.tag) == "Page":
            page = el
            break
    if page is None:
        raise ParseError("no Page element", source)

    try:
        width = float(page.get("imageWidth", "0"))
        height = float(page.get("imageHeight", "0"))
    except ValueError as exc:
        raise ParseError(f"bad page dimensions: {exc}", "Page") from exc

    scan = None
    image = page.get("imageFilename")
    if image:
        try:
            scan = parse_scan_filename(Path(image).name)
        except Exception:
            scan = None  # foreign file name; the caller may attach one

    order_by_ref: dict[str, int] = {}
    for el in page.iter():
        if _strip_ns(el.tag) == "RegionRefIndexed":
            ref, idx = el.get("regionRef"), el.get("index")
            if ref is not None and idx is not None:
                order_by_ref[ref] = int(idx)

    issues: list[str] = []
    regions = []
    for ri, rel in enumerate(el for el in page.iter() if _strip_ns(el.tag) == "TextRegion"):
        rid = rel.get("id") or f"region-{ri}"
        rpath = f"TextRegion[{rid}]"
        coords = next((c for c in rel if _strip_ns(c.tag) == "Coords"), None)
        if coords is None:
            raise ParseError("missing Coords", rpath)
        poly = _parse_points(coords.get("points"), f"{rpath}.Coords")
        if len(poly) < 3:
            raise ParseError("polygon needs >= 3 points", f"{rpath}.Coords")
        declared = order_by_ref.get(rid)
        custom = rel.get("custom") or ""
        m = _READING_ORDER_RE.search(custom)
        if m:
            declared = int(m.group(1))
        lines = []
        for li, lel in enumerate(el for el in rel if _strip_ns(el.tag) == "TextLine"):
            lid = lel.get("id") or f"{rid}-line-{li}"
            lpath = f"{rpath}.TextLine[{lid}]"
            baseline_el = next((b for b in lel if _strip_ns(b.tag) == "Baseline"), None)
            if baseline_el is None:
                raise ParseError("missing Baseline", lpath)
            baseline = _parse_points(baseline_el.get("points"), f"{lpath}.Baseline")
            if len(baseline) < 2:
                raise ParseError("baseline needs >= 2 points", f"{lpath}.Baseline")
            unicode_text = ""
            for te in lel:
                if _strip_ns(te.tag) == "TextEquiv":
                    for u in te:
                        if _strip_ns(u.tag) == "Unicode":
                            unicode_text = u.text or ""
            lines.append(TextLine(id=lid, baseline=baseline, text=unicode_text))
        if not lines:
            issues.append(f"region {rid} has no text lines")
        regions.append(TextRegion(id=rid, polygon=poly, lines=tuple(lines), declared_order=declared))

    return HtrDocument(
        scan=scan,
        page_width=width,
        page_height=height,
        regions=tuple(regions),
        issues=tuple(issues),
    )


def parse_document(path: Path) -> HtrDocument:
    """Load a document file, sniffing canonical JSON vs the XML subset."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(exc), str(path)) from exc
    body = text.lstrip()
    doc = (
        parse_document_json(text, source=path.name)
        if body.startswith("{")
        else parse_document_xml(text, source=path.name)
    )
    if doc.scan is None:
        try:
            scan = parse_scan_filename(path.stem + ".JPG")
        except MalformedName:
            scan = None
        except Exception:
            scan = None
        if scan is not None:
            doc = replace(doc, scan=scan)
    problems = doc.validate()
    if problems:
        doc = replace(doc, issues=doc.issues + tuple(problems))
    return doc
