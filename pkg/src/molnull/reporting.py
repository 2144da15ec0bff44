"""Cross-tabulations of methods by reference-parameter count and required count.

Shares are exact :class:`fractions.Fraction` values; rounding happens only
when a report is rendered. ``None`` stands for an undefined share (empty
denominator).
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from molnull.dynamic import DynamicProfile
from molnull.ir import Program
from molnull.static import DEFINITELY, POSSIBLY, StaticResult


class Level(str, Enum):
    DEFINITE_ONLY = "definite"
    DEFINITE_OR_POSSIBLE = "possible"


class ShareKind(str, Enum):
    SINGLE_PARAM = "single_param"
    TRUE_RECOMBINATION = "true_recombination"
    ALL_REQUIRED = "all_required"


@dataclass
class CrossTab:
    """Method counts keyed by (reference-parameter count, required count)."""

    cells: Counter = field(default_factory=Counter)
    title: str = ""

    def add(self, ref_params: int, required: int, n: int = 1):
        if ref_params < 1:
            return
        if not 0 <= required <= ref_params:
            raise ValueError(f"required count {required} outside 0..{ref_params}")
        self.cells[(ref_params, required)] += n

    @classmethod
    def from_counts(cls, counts: Iterable, title: str = "") -> "CrossTab":
        tab = cls(title=title)
        for (c, r), n in counts:
            tab.add(c, r, n)
        return tab

    @property
    def column_totals(self) -> dict:
        totals: dict = {}
        for (c, _), n in self.cells.items():
            totals[c] = totals.get(c, 0) + n
        return dict(sorted(totals.items()))

    @property
    def total(self) -> int:
        return sum(self.cells.values())

    @property
    def max_arity(self) -> int:
        return max((c for c, _ in self.cells), default=0)

    def all_required(self, column: int) -> int:
        return self.cells.get((column, column), 0)

    def percent(self, column: int, required: int) -> Optional[Fraction]:
        total = self.column_totals.get(column, 0)
        if not total:
            return None
        return Fraction(100 * self.cells.get((column, required), 0), total)


def _methods_from_static(result: StaticResult) -> dict:
    per_method: dict = {}
    for (name, _), cls in result.method_classes.items():
        per_method.setdefault(name, []).append(cls)
    return per_method


def build_static_crosstab(result: StaticResult, program: Optional[Program] = None,
                          level: Level | str = Level.DEFINITE_ONLY) -> CrossTab:
    """One count per method: its reference parameters against those classified required.

    ``program`` is optional; when given, methods without any reference
    parameter are confirmed absent from the tab.
    """
    level = Level(level)
    floor = DEFINITELY if level is Level.DEFINITE_ONLY else POSSIBLY
    return crosstab_from_classes(_methods_from_static(result), floor, level)


def crosstab_from_classes(per_method: Mapping, floor=DEFINITELY, level: Level | str = Level.DEFINITE_ONLY) -> CrossTab:
    title = {
        Level.DEFINITE_ONLY: '% of methods with "definitely required" parameters',
        Level.DEFINITE_OR_POSSIBLE: '% of methods with "possibly required" parameters',
    }[Level(level)]
    tab = CrossTab(title=title)
    for classes in per_method.values():
        tab.add(len(classes), sum(1 for c in classes if c >= floor))
    return tab


def build_dynamic_crosstab(profile: DynamicProfile) -> CrossTab:
    tab = CrossTab(title="never-null parameters by number of reference parameters")
    for prof in profile.per_abstraction.values():
        if prof.call_count:
            tab.add(prof.ref_param_count, prof.never_null_count)
    return tab


def recombination_share(tab: CrossTab, kind: ShareKind | str) -> Optional[Fraction]:
    """Share of methods offering recombination, or None when undefined.

    ``single_param``: one-reference-parameter methods over all methods.
    ``true_recombination``: among methods with two or more reference
    parameters, those with at least two required.
    ``all_required``: among the same methods, those with every reference
    parameter required.
    """
    kind = ShareKind(kind)
    if kind is ShareKind.SINGLE_PARAM:
        total = tab.total
        return Fraction(tab.column_totals.get(1, 0), total) if total else None
    multi = sum(n for (c, _), n in tab.cells.items() if c >= 2)
    if not multi:
        return None
    if kind is ShareKind.TRUE_RECOMBINATION:
        hits = sum(n for (c, r), n in tab.cells.items() if c >= 2 and r >= 2)
    else:
        hits = sum(tab.all_required(c) for c in tab.column_totals if c >= 2)
    return Fraction(hits, multi)


def optional_share(tab: CrossTab) -> Optional[Fraction]:
    """Share of methods with at least one parameter that is not required."""
    total = tab.total
    if not total:
        return None
    return Fraction(total - sum(tab.all_required(c) for c in tab.column_totals), total)


@dataclass
class ProjectSummary:
    per_project: dict
    mean: Optional[float]
    sample_stddev: Optional[float]


def project_stats(values: Sequence) -> ProjectSummary:
    """Unweighted mean and sample (n-1) standard deviation of per-project percentages.

    ``values`` holds ``(project, size, percentage)`` triples; the standard
    deviation is None with fewer than two projects.
    """
    per_project = {}
    pcts = []
    for project, size, pct in values:
        if not 0 <= pct <= 100:
            raise ValueError(f"percentage {pct} for {project} outside [0, 100]")
        per_project[project] = (size, pct)
        pcts.append(pct)
    mean = statistics.fmean(pcts) if pcts else None
    stdev = statistics.stdev(pcts) if len(pcts) >= 2 else None
    return ProjectSummary(per_project, mean, stdev)


def project_label(method_name: str) -> str:
    """Project tag of a method: the name prefix before the first underscore."""
    head, sep, _ = method_name.partition("_")
    return head if sep and head else "default"


def project_percentages(per_method: Mapping, required_of) -> list:
    """``(project, size, percentage)`` over methods with exactly two reference parameters.

    ``per_method`` maps a method name to anything ``required_of`` turns into
    ``(ref_param_count, required_count)``.
    """
    sizes: Counter = Counter()
    hits: Counter = Counter()
    for name, item in per_method.items():
        n, req = required_of(item)
        if n != 2:
            continue
        proj = project_label(name)
        sizes[proj] += 1
        hits[proj] += req == 2
    return [(p, sizes[p], 100.0 * hits[p] / sizes[p]) for p in sorted(sizes)]


def dynamic_project_values(profile: DynamicProfile) -> list:
    per = {k.name: v for k, v in profile.per_abstraction.items()}
    return project_percentages(per, lambda prof: (prof.ref_param_count, prof.never_null_count))


def static_project_values(per_method: Mapping, floor=DEFINITELY) -> list:
    return project_percentages(
        {name.rsplit(".", 1)[-1]: cls for name, cls in per_method.items()},
        lambda classes: (len(classes), sum(1 for c in classes if c >= floor)),
    )


# ----------------------------------------------------------------- emitters


def round_half_up(x) -> int:
    """Integer rounding with halves going up, as printed tables do (12.5 -> 13)."""
    return math.floor(Fraction(x) + Fraction(1, 2))


def _pct(x: Optional[Fraction]) -> str:
    return "" if x is None else f"{round_half_up(x)}%"


def _pct1(x: Optional[Fraction]) -> str:
    return "undefined" if x is None else f"{float(x) * 100:.1f}%"


def crosstab_csv(tab: CrossTab) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ref_params", "required", "count"])
    for c, total in tab.column_totals.items():
        for r in range(c + 1):
            w.writerow([c, r, tab.cells.get((c, r), 0)])
    return buf.getvalue()


def crosstab_text(tab: CrossTab, dynamic: bool = False) -> str:
    cols = list(range(1, tab.max_arity + 1))
    totals = tab.column_totals
    label_w = 20
    cell_w = 7
    lines = []
    if tab.title:
        lines.append(tab.title)
    lines.append("required \\ ref params".ljust(label_w) + "".join(str(c).rjust(cell_w) for c in cols)
                 + "total".rjust(cell_w + 1))
    for r in range(0, tab.max_arity + 1):
        row = []
        for c in cols:
            row.append(_pct(tab.percent(c, r)) if r <= c and totals.get(c) else "")
        lines.append(str(r).ljust(label_w) + "".join(x.rjust(cell_w) for x in row))
    lines.append("total # of methods".ljust(label_w)
                 + "".join(str(totals.get(c, 0)).rjust(cell_w) for c in cols) + str(tab.total).rjust(cell_w + 1))
    if dynamic:
        allreq = [tab.all_required(c) for c in cols]
        lines.append("# with all required".ljust(label_w) + "".join(str(a).rjust(cell_w) for a in allreq)
                     + str(sum(allreq)).rjust(cell_w + 1))
        opt = []
        for c in cols:
            t = totals.get(c, 0)
            opt.append(_pct(Fraction(100 * (t - tab.all_required(c)), t)) if t else "")
        lines.append("% optional".ljust(label_w) + "".join(x.rjust(cell_w) for x in opt)
                     + _pct1(optional_share(tab)).rjust(cell_w + 1))
    return "\n".join(lines) + "\n"


def shares_text(tab: CrossTab) -> str:
    return (
        f"single-parameter share: {_pct1(recombination_share(tab, ShareKind.SINGLE_PARAM))}\n"
        f"true-recombination share (>=2 required): {_pct1(recombination_share(tab, ShareKind.TRUE_RECOMBINATION))}\n"
        f"all-required share among >=2 parameters: {_pct1(recombination_share(tab, ShareKind.ALL_REQUIRED))}\n"
        f"optional share: {_pct1(optional_share(tab))}\n"
    )


def projects_csv(summary: ProjectSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["project", "size", "percentage"])
    for p, (size, pct) in summary.per_project.items():
        w.writerow([p, size, f"{pct:.6f}"])
    w.writerow(["mean", "", "" if summary.mean is None else f"{summary.mean:.6f}"])
    w.writerow(["sample_stddev", "", "" if summary.sample_stddev is None else f"{summary.sample_stddev:.6f}"])
    return buf.getvalue()


def projects_text(summary: ProjectSummary) -> str:
    names = list(summary.per_project)
    w = max([12] + [len(n) + 1 for n in names])
    lines = [
        "project".ljust(14) + "".join(n.rjust(w) for n in names),
        "project size".ljust(14) + "".join(str(summary.per_project[n][0]).rjust(w) for n in names),
        "percentage".ljust(14) + "".join(f"{round_half_up(summary.per_project[n][1])}%".rjust(w) for n in names),
    ]
    mean = "undefined" if summary.mean is None else f"{round_half_up(summary.mean)}%"
    sd = "undefined" if summary.sample_stddev is None else f"{round_half_up(summary.sample_stddev)}%"
    lines.append(f"mean +- sample stddev: {mean} +- {sd}")
    return "\n".join(lines) + "\n"


def emit_report(sections: Sequence, fmt: str = "text") -> bytes:
    """Serialize cross-tabs and project summaries, in order, deterministically.

    ``sections`` items are ``CrossTab``, ``(CrossTab, "dynamic")`` or
    ``ProjectSummary``.
    """
    parts = []
    for item in sections:
        dynamic = False
        if isinstance(item, tuple):
            item, dynamic = item[0], item[1] == "dynamic"
        if isinstance(item, ProjectSummary):
            parts.append(projects_csv(item) if fmt == "csv" else projects_text(item))
        elif fmt == "csv":
            parts.append(crosstab_csv(item))
        else:
            parts.append(crosstab_text(item, dynamic) + shares_text(item))
    return "\n".join(parts).encode("utf-8")
