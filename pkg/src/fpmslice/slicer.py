"""Criterion resolution, worklist slicing and source reconstruction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .depgraph.cpg import Label
from .ecpg import LABEL_BITS, Ecpg

DIRECTIONS = ("backward", "forward", "both")
DEFAULT_LABELS = frozenset({Label.C, Label.D, Label.F, Label.S, Label.V})


class CriterionOutOfRange(Exception):
    def __init__(self, criterion: "SlicingCriterion", reason: str):
        super().__init__(f"{criterion}: {reason}")
        self.criterion = criterion


class SourceUnavailable(Exception):
    def __init__(self, path: str):
        super().__init__(f"source file unavailable: {path}")
        self.path = path


@dataclass(frozen=True, order=True)
class SlicingCriterion:
    file: str
    line: int
    column: int | None = None

    def __post_init__(self) -> None:
        if not self.file:
            raise ValueError("criterion file must be nonempty")
        if self.line < 1:
            raise ValueError(f"criterion line must be >= 1, got {self.line}")
        if self.column is not None and self.column < 1:
            raise ValueError(f"criterion column must be >= 1, got {self.column}")

    def __str__(self) -> str:
        col = "" if self.column is None else f":{self.column}"
        return f"{self.file}:{self.line}{col}"

    def to_dict(self) -> dict:
        return {"file": self.file, "line": self.line, "column": self.column}

    @classmethod
    def from_dict(cls, d: dict) -> "SlicingCriterion":
        return cls(d["file"], int(d["line"]), None if d.get("column") is None else int(d["column"]))


@dataclass(frozen=True)
class SliceLine:
    n: int
    text: str


@dataclass(frozen=True)
class SliceFile:
    path: str
    lines: tuple[SliceLine, ...]


@dataclass
class Slice:
    criteria: list[SlicingCriterion]
    direction: str
    files: list[SliceFile] = field(default_factory=list)
    node_ids: frozenset[int] = frozenset()
    fallback_used: bool = False

    def line_set(self, path: str | None = None) -> set[int]:
        return {ln.n for f in self.files if path is None or f.path == path for ln in f.lines}

    @property
    def paths(self) -> list[str]:
        return [f.path for f in self.files]

    def to_dict(self) -> dict:
        return {
            "criteria": [c.to_dict() for c in self.criteria],
            "direction": self.direction,
            "fallback_used": self.fallback_used,
            "files": [{"path": f.path, "lines": [{"n": ln.n, "text": ln.text} for ln in f.lines]} for f in self.files],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "Slice":
        files = [SliceFile(f["path"], tuple(SliceLine(int(x["n"]), x["text"]) for x in f["lines"])) for f in d["files"]]
        return cls([SlicingCriterion.from_dict(c) for c in d["criteria"]], d["direction"], files,
                   frozenset(), bool(d.get("fallback_used", False)))


def _file_extent(ecpg: Ecpg, file: str) -> int:
    return max((r.end_line for r in ecpg.nodes.values() if r.file == file), default=0)


def _enclosing_function(ecpg: Ecpg, file: str, line: int) -> set[int]:
    for rec in ecpg.nodes.values():
        if rec.file == file and rec.kind == "FunctionDef" and rec.line <= line <= rec.end_line:
            return {r.id for r in ecpg.nodes.values() if r.file == file and r.function == rec.function}
    return set()


def resolve_with_fallback(ecpg: Ecpg, criteria: Iterable[SlicingCriterion]) -> tuple[set[int], bool]:
    """Map criteria to nodes.  Returns ``(nodes, fallback_used)``.

    Matched expression nodes bring along their enclosing statement (and any
    call arguments in between).
    """
    known = set(ecpg.files)
    found: set[int] = set()
    fallback = False
    for crit in criteria:
        if crit.file not in known:
            raise CriterionOutOfRange(crit, "unknown file")
        on_line = ecpg.by_line.get((crit.file, crit.line), [])
        hits = on_line
        if crit.column is not None:
            exact = [i for i in on_line if ecpg.nodes[i].column == crit.column]
            # a column that lands between tokens still selects the line
            hits = exact or on_line
        if hits:
            for i in hits:
                # dependence edges attach to statements, so lift sub-expressions
                found.update(ecpg.enclosing_statement_path(i))
            continue
        whole = _enclosing_function(ecpg, crit.file, crit.line)
        if whole:
            found |= whole
            fallback = True
        elif crit.line > _file_extent(ecpg, crit.file):
            raise CriterionOutOfRange(crit, "line beyond end of file")
    return found, fallback


def resolve_criteria(ecpg: Ecpg, criteria: Iterable[SlicingCriterion]) -> set[int]:
    return resolve_with_fallback(ecpg, criteria)[0]


def label_mask(labels: Iterable[Label | str]) -> int:
    mask = 0
    for lab in labels:
        mask |= LABEL_BITS[Label(lab)]
    return mask


@dataclass
class SliceRun:
    nodes: set[int]
    pops: int


def run_slice(
    ecpg: Ecpg,
    seeds: Iterable[int],
    direction: str = "backward",
    labels: Iterable[Label | str] = DEFAULT_LABELS,
    allowed_files: Iterable[str] | None = None,
    backend: str | None = None,
) -> SliceRun:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    index = ecpg.index
    seeds = sorted(set(seeds))
    if not seeds:
        return SliceRun(set(), 0)
    try:
        start = [index.pos[s] for s in seeds]
    except KeyError as err:
        raise ValueError(f"seed node {err.args[0]} is not in the graph") from None
    indptr, indices, labs = {"backward": index.rev, "forward": index.fwd, "both": index.both}[direction]
    allowed = None
    if allowed_files is not None:
        keep = set(allowed_files)
        allowed = np.fromiter((ecpg.nodes[int(i)].file in keep for i in index.ids), dtype=np.uint8, count=len(index.ids))
    order, pops = kernels.reach(indptr, indices, labs, label_mask(labels), start, allowed, backend=backend)
    return SliceRun({int(index.ids[p]) for p in order}, int(pops))


def slice_nodes(
    ecpg: Ecpg,
    seeds: Iterable[int],
    direction: str = "backward",
    labels: Iterable[Label | str] = DEFAULT_LABELS,
    allowed_files: Iterable[str] | None = None,
) -> set[int]:
    """Least set containing ``seeds`` closed under the chosen labelled edges.

    ``backward`` follows incoming edges, ``forward`` outgoing ones, ``both``
    either.  With ``allowed_files`` the closure never enters other files.
    """
    return run_slice(ecpg, seeds, direction, labels, allowed_files).nodes


def _source_lines(ecpg: Ecpg, file: str, cache: dict[str, list[bytes]]) -> list[bytes]:
    if file not in cache:
        path = ecpg.source_path(file)
        try:
            data = path.read_bytes()
        except OSError:
            raise SourceUnavailable(str(path)) from None
        cache[file] = data.split(b"\n")
    return cache[file]


def reconstruct_source_slice(
    ecpg: Ecpg,
    nodes: Iterable[int],
    criteria: Sequence[SlicingCriterion] = (),
    direction: str = "backward",
    fallback_used: bool = False,
) -> Slice:
    nodes = frozenset(nodes)
    per_file: dict[str, set[int]] = {}
    for i in nodes:
        rec = ecpg.nodes[i]
        per_file.setdefault(rec.file, set()).add(rec.line)
    cache: dict[str, list[bytes]] = {}
    files = []
    for path in sorted(per_file):
        src = _source_lines(ecpg, path, cache)
        lines = []
        for n in sorted(per_file[path]):
            if n > len(src):
                raise SourceUnavailable(f"{path} (line {n} past end of file)")
            lines.append(SliceLine(n, src[n - 1].decode("utf-8", "surrogateescape")))
        files.append(SliceFile(path, tuple(lines)))
    return Slice(list(criteria), direction, files, nodes, fallback_used)


def slice_source(
    ecpg: Ecpg,
    criteria: Sequence[SlicingCriterion],
    direction: str = "backward",
    labels: Iterable[Label | str] = DEFAULT_LABELS,
    allowed_files: Iterable[str] | None = None,
) -> Slice:
    """Resolve, slice and reconstruct in one call."""
    seeds, fallback = resolve_with_fallback(ecpg, criteria)
    nodes = slice_nodes(ecpg, seeds, direction, labels, allowed_files)
    return reconstruct_source_slice(ecpg, nodes, criteria, direction, fallback)


__all__ = [
    "DEFAULT_LABELS",
    "DIRECTIONS",
    "CriterionOutOfRange",
    "Slice",
    "SliceFile",
    "SliceLine",
    "SliceRun",
    "SlicingCriterion",
    "SourceUnavailable",
    "label_mask",
    "reconstruct_source_slice",
    "resolve_criteria",
    "resolve_with_fallback",
    "run_slice",
    "slice_nodes",
    "slice_source",
]
