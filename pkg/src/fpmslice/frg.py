"""File reference graph, its SCC condensation, and dependent-file queries."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .minic.ast import AstNode, NodeKind
from .minic.symbols import SymbolTable


class UnknownFile(KeyError):
    def __init__(self, path: str):
        super().__init__(path)
        self.path = path

    def __str__(self) -> str:
        return f"file not in reference graph: {self.path}"


@dataclass
class FileReferenceGraph:
    nodes: list[str]
    edges: set[tuple[str, str]] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.nodes = sorted(set(self.nodes))
        self.edges = {(a, b) for a, b in self.edges if a != b}
        known = set(self.nodes)
        for a, b in self.edges:
            if a not in known or b not in known:
                raise ValueError(f"edge {a}->{b} references a file outside the graph")

    @cached_property
    def position(self) -> dict[str, int]:
        return {f: i for i, f in enumerate(self.nodes)}

    def successors(self, file: str) -> list[str]:
        return sorted(b for a, b in self.edges if a == file)


def build_frg(symbols: SymbolTable, units: Iterable[AstNode]) -> FileReferenceGraph:
    """Edge A -> B when an identifier in A resolves to a symbol defined in B."""
    units = list(units)
    edges: set[tuple[str, str]] = set()
    for unit in units:
        here = unit.loc.file
        for node in unit.walk():
            if node.kind is not NodeKind.Identifier:
                continue
            key = symbols.resolution.get(node.id)
            sym = symbols.entries.get(key) if key else None
            if sym is None or sym.definition is None:
                continue
            there = sym.definition.loc.file
            if there != here:
                edges.add((here, there))
    return FileReferenceGraph([u.loc.file for u in units], edges)


@dataclass
class SccIndex:
    component_of: dict[str, int]
    members: dict[int, list[str]]
    cond_edges: set[tuple[int, int]]

    @cached_property
    def _csr(self):
        n = len(self.members)
        edges = sorted(self.cond_edges)
        indptr, indices, _ = kernels.csr(n, [a for a, _ in edges], [b for _, b in edges])
        return indptr, indices

    @property
    def count(self) -> int:
        return len(self.members)

    def topological_order(self) -> list[int]:
        """Kahn's algorithm; raises ValueError if the condensation has a cycle."""
        indeg = {c: 0 for c in self.members}
        succ: dict[int, list[int]] = {c: [] for c in self.members}
        for a, b in sorted(self.cond_edges):
            succ[a].append(b)
            indeg[b] += 1
        ready = sorted(c for c, d in indeg.items() if d == 0)
        order = []
        while ready:
            c = ready.pop()
            order.append(c)
            for d in succ[c]:
                indeg[d] -= 1
                if indeg[d] == 0:
                    ready.append(d)
        if len(order) != len(self.members):
            raise ValueError("condensation is not acyclic")
        return order


def compute_scc(frg: FileReferenceGraph, backend: str | None = None) -> SccIndex:
    pos = frg.position
    edges = sorted(frg.edges)
    indptr, indices, _ = kernels.csr(len(frg.nodes), [pos[a] for a, _ in edges], [pos[b] for _, b in edges])
    comp, ncomp = kernels.tarjan_scc(indptr, indices, backend=backend)
    component_of = {f: int(comp[i]) for i, f in enumerate(frg.nodes)}
    members: dict[int, list[str]] = {c: [] for c in range(int(ncomp))}
    for f in frg.nodes:
        members[component_of[f]].append(f)
    cond = {(component_of[a], component_of[b]) for a, b in frg.edges}
    cond = {(a, b) for a, b in cond if a != b}
    return SccIndex(component_of, members, cond)


@dataclass
class FarfResult:
    files: set[str]
    pops: int  # condensation-queue pops


def farf_query(frg: FileReferenceGraph, scc: SccIndex, files: Iterable[str], backend: str | None = None) -> FarfResult:
    seeds = []
    for f in files:
        if f not in scc.component_of:
            raise UnknownFile(f)
        seeds.append(scc.component_of[f])
    if not seeds:
        return FarfResult(set(), 0)
    indptr, indices = scc._csr
    order, pops = kernels.dag_reach(indptr, indices, sorted(set(seeds)), backend=backend)
    out: set[str] = set()
    for c in order:
        out.update(scc.members[int(c)])
    return FarfResult(out, int(pops))


def farf(frg: FileReferenceGraph, scc: SccIndex, files: Iterable[str]) -> set[str]:
    """Every file the given files transitively depend on, the inputs included."""
    return farf_query(frg, scc, files).files


# -- one-time analysis cache ----------------------------------------------------


def content_hash(root: str | Path, files: Iterable[str]) -> str:
    h = hashlib.sha256()
    for name in sorted(files):
        data = (Path(root) / name).read_bytes()
        h.update(name.encode("utf-8"))
        h.update(b"\0")
        h.update(hashlib.sha256(data).digest())
    return h.hexdigest()


def dump_cache(frg: FileReferenceGraph, scc: SccIndex, digest: str) -> bytes:
    doc = {
        "hash": digest,
        "files": frg.nodes,
        "edges": [list(e) for e in sorted(frg.edges)],
        "scc": {
            "members": {str(c): scc.members[c] for c in sorted(scc.members)},
            "cond_edges": [list(e) for e in sorted(scc.cond_edges)],
        },
    }
    return json.dumps(doc, indent=1).encode("utf-8")


def load_cache(data: bytes) -> tuple[str, FileReferenceGraph, SccIndex]:
    doc = json.loads(data)
    frg = FileReferenceGraph(list(doc["files"]), {(a, b) for a, b in doc["edges"]})
    members = {int(c): list(fs) for c, fs in doc["scc"]["members"].items()}
    component_of = {f: c for c, fs in members.items() for f in fs}
    if set(component_of) != set(frg.nodes):
        raise ValueError("cache SCC members do not partition the file set")
    cond = {(int(a), int(b)) for a, b in doc["scc"]["cond_edges"]}
    return doc["hash"], frg, SccIndex(component_of, members, cond)


def write_atomic(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cached_analysis(cache_path: str | Path, root: str | Path, symbols: SymbolTable, units: list[AstNode]):
    """Return ``(frg, scc, reused)``; rebuilds when the sources changed."""
    digest = content_hash(root, [u.loc.file for u in units])
    cache_path = Path(cache_path)
    if cache_path.exists():
        try:
            old, frg, scc = load_cache(cache_path.read_bytes())
        except (ValueError, KeyError, TypeError):
            old = None
        if old == digest:
            return frg, scc, True
    frg = build_frg(symbols, units)
    scc = compute_scc(frg)
    write_atomic(cache_path, dump_cache(frg, scc, digest))
    return frg, scc, False


__all__ = [
    "FarfResult",
    "FileReferenceGraph",
    "SccIndex",
    "UnknownFile",
    "build_frg",
    "cached_analysis",
    "compute_scc",
    "content_hash",
    "dump_cache",
    "farf",
    "farf_query",
    "load_cache",
    "write_atomic",
]
