"""Degree of fusion: unique codes per technology segment over total code assignments."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .corpus import PatentCorpus
from .errors import EmptyCorpus, LevelOrderViolation, LevelUnavailable
from .ipc import SECTIONS, IpcCode, IpcLevel, format_ipc, truncate


@dataclass(frozen=True)
class FusionTable:
    segment_level: IpcLevel
    counting_level: IpcLevel
    unique_counts: dict[IpcCode, int]
    total_assignments: int
    dedup: bool = True
    include_absent: bool = False

    def ratio(self, segment: IpcCode) -> Fraction:
        return Fraction(self.unique_counts.get(segment, 0), self.total_assignments)

    @property
    def rows(self) -> dict[IpcCode, float]:
        return {s: float(self.ratio(s)) for s in self.unique_counts}

    def ranked(self) -> list[tuple[IpcCode, int, Fraction]]:
        items = [(s, u, self.ratio(s)) for s, u in self.unique_counts.items()]
        return sorted(items, key=lambda r: (-r[2], format_ipc(r[0])))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["segment", "unique", "total", "degree_of_fusion"])
        for seg, unique, ratio in self.ranked():
            w.writerow([format_ipc(seg), unique, self.total_assignments, repr(float(ratio))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "segment_level": self.segment_level.slug,
            "counting_level": self.counting_level.slug,
            "total": self.total_assignments,
            "total_counts": "deduplicated" if self.dedup else "raw",
            "rows": [
                {
                    "segment": format_ipc(seg),
                    "unique": unique,
                    "degree_of_fusion": float(ratio),
                    "found": unique > 0,
                }
                for seg, unique, ratio in self.ranked()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def render(self, top: int | None = None) -> str:
        """Human-readable listing; absent segments print as ``Not found``."""
        lines = []
        for seg, unique, ratio in self.ranked()[:top]:
            shown = f"{float(ratio):.4g}" if unique else "Not found"
            lines.append(f"{format_ipc(seg):<10} {shown}")
        return "\n".join(lines) + ("\n" if lines else "")


def degree_of_fusion(
    corpus: PatentCorpus,
    segment_level: IpcLevel = IpcLevel.SECTION,
    counting_level: IpcLevel = IpcLevel.SUBCLASS,
    dedup: bool = True,
    include_absent: bool = False,
) -> FusionTable:
    """Degree of fusion for every segment at ``segment_level``.

    Codes are truncated to ``counting_level``. The denominator counts
    (patent, code) assignments, deduplicated inside each patent unless
    ``dedup`` is False. ``include_absent`` adds zero rows for sections
    missing from the corpus (segment level Section only).
    """
    if segment_level > counting_level:
        raise LevelOrderViolation(
            f"segment level {segment_level.slug} is deeper than counting level {counting_level.slug}"
        )
    if not len(corpus):
        raise EmptyCorpus("cannot compute fusion on an empty corpus")
    distinct: set[IpcCode] = set()
    total = 0
    for rec in corpus:
        truncated = []
        for code in rec.codes:
            try:
                truncated.append(truncate(code, counting_level))
            except LevelUnavailable:
                continue
        if dedup:
            truncated = list(set(truncated))
        total += len(truncated)
        distinct.update(truncated)
    if total == 0:
        raise EmptyCorpus(f"no codes reach the {counting_level.slug} level")
    unique = Counter(truncate(code, segment_level) for code in distinct)
    if include_absent and segment_level is IpcLevel.SECTION:
        for s in SECTIONS:
            unique.setdefault(IpcCode(s), 0)
    return FusionTable(segment_level, counting_level, dict(unique), total, dedup, include_absent)
