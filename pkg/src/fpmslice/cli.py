"""Command-line driver: build, slice, farf, inspect, eval, export-ecpg.

Exit codes: 0 success, 1 partial failure, 2 fatal build error, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import posixpath
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .adjudicator import (
    ChatCompletionClient,
    ConfusionMatrix,
    MockClient,
    TransportError,
    VerdictValue,
    majority_vote,
    parse_verdict,
    query_llm,
    score,
)
from .ecpg import Ecpg, SchemaError, build_ecpg, discover_sources, export_ecpg, import_ecpg
from .frg import (
    FileReferenceGraph,
    SccIndex,
    UnknownFile,
    build_frg,
    compute_scc,
    content_hash,
    dump_cache,
    farf,
    load_cache,
    write_atomic,
)
from .ingest import MalformedReport, Warning, parse_report, warning_to_criteria
from .ingest import SchemaError as ReportSchemaError
from .reportgen import TemplateRegistry, assemble_report, default_registry, render_prompt
from .slicer import DEFAULT_LABELS, DIRECTIONS, CriterionOutOfRange, SlicingCriterion, SourceUnavailable, slice_source

log = logging.getLogger("fpmslice")

EXIT_OK, EXIT_PARTIAL, EXIT_BUILD, EXIT_INPUT = 0, 1, 2, 3
ECPG_FILE = "ecpg.json"
FRG_FILE = "frg-cache.json"
VERDICT_FILE = "verdicts.jsonl"
MANIFEST_FILE = "manifest.json"
KEY_ENV = "FPM_LLM_KEY"


class UsageError(Exception):
    """Bad arguments or inputs (exit 3)."""


class BuildError(Exception):
    """Nothing could be built (exit 2)."""


# -- configuration -----------------------------------------------------------


@dataclass
class Config:
    endpoint: str = "mock"
    model: str = ""
    n_samples: int = 5
    temperature: float = 0.7
    max_concurrency: int = 12
    retry_backoff: float = 1.0
    mock_script: Path | None = None
    criteria_mode: str = "full_trace"
    slice_direction: str = "backward"
    labels: tuple[str, ...] = tuple(sorted(lab.value for lab in DEFAULT_LABELS))
    restrict_to_dependents: bool = True
    template_dir: Path | None = None
    path: Path | None = None

    @classmethod
    def load(cls, path: Path | None) -> "Config":
        cfg = cls()
        if path is None:
            return cfg
        try:
            doc = tomllib.loads(path.read_text(encoding="utf-8"))
        except OSError as err:
            raise UsageError(f"cannot read config {path}: {err}") from None
        except tomllib.TOMLDecodeError as err:
            raise UsageError(f"invalid config {path}: {err}") from None
        cfg.path = path
        base = path.parent
        llm, mock, pipe = doc.get("llm", {}), doc.get("mock", {}), doc.get("pipeline", {})
        cfg.endpoint = str(llm.get("endpoint", cfg.endpoint))
        cfg.model = str(llm.get("model", cfg.model))
        cfg.n_samples = int(llm.get("n_samples", cfg.n_samples))
        cfg.temperature = float(llm.get("temperature", cfg.temperature))
        cfg.max_concurrency = int(llm.get("max_concurrency", cfg.max_concurrency))
        cfg.retry_backoff = float(llm.get("retry_backoff", cfg.retry_backoff))
        if "script" in mock:
            cfg.mock_script = base / mock["script"]
        cfg.criteria_mode = str(pipe.get("criteria_mode", cfg.criteria_mode))
        cfg.slice_direction = str(pipe.get("slice_direction", cfg.slice_direction))
        if "labels" in pipe:
            cfg.labels = tuple(pipe["labels"])
        cfg.restrict_to_dependents = bool(pipe.get("restrict_to_dependents", cfg.restrict_to_dependents))
        if "template_dir" in pipe:
            cfg.template_dir = base / pipe["template_dir"]
        if cfg.n_samples < 1 or cfg.max_concurrency < 1:
            raise UsageError("n_samples and max_concurrency must be >= 1")
        if cfg.slice_direction not in DIRECTIONS:
            raise UsageError(f"slice_direction must be one of {DIRECTIONS}")
        return cfg

    def client(self):
        if self.endpoint == "mock":
            return MockClient.from_file(self.mock_script) if self.mock_script else MockClient()
        return ChatCompletionClient(self.endpoint, self.model, os.environ.get(KEY_ENV), backoff=self.retry_backoff)


# -- shared plumbing ------------------------------------------------------------


@dataclass
class Run:
    project: Path
    out: Path
    config: Config
    timing: dict[str, float] = field(default_factory=dict)
    reports: list[str] = field(default_factory=list)

    def timed(self, stage: str, start: float) -> None:
        self.timing[stage] = self.timing.get(stage, 0.0) + (time.perf_counter() - start) * 1000

    def write_manifest(self, command: str, extra: dict | None = None) -> None:
        doc = {
            "command": command,
            "project_root": str(self.project),
            "output_dir": str(self.out),
            "config_path": str(self.config.path) if self.config.path else None,
            "report_paths": self.reports,
            "timing_ms": {k: round(v, 3) for k, v in sorted(self.timing.items())},
        }
        doc.update(extra or {})
        write_atomic(self.out / MANIFEST_FILE, json.dumps(doc, indent=1).encode("utf-8") + b"\n")


def _display_names(project: Path) -> list[str]:
    return [p.relative_to(project).as_posix() for p in discover_sources(project)]


def cmd_build(run: Run) -> int:
    start = time.perf_counter()
    if not run.project.is_dir():
        raise UsageError(f"project directory not found: {run.project}")
    names = _display_names(run.project)
    if not names:
        raise BuildError(f"no C sources under {run.project}")
    digest = content_hash(run.project, names)
    ecpg_path, frg_path = run.out / ECPG_FILE, run.out / FRG_FILE
    if ecpg_path.exists() and frg_path.exists():
        try:
            old = load_cache(frg_path.read_bytes())[0]
        except (ValueError, KeyError, TypeError):
            old = None
        if old == digest:
            log.info("cache hit: sources unchanged (%s)", digest[:12])
            run.timed("build", start)
            return EXIT_OK
    ecpg = build_ecpg(run.project)
    for diag in ecpg.diagnostics:
        log.log(logging.WARNING if diag.kind == "parse_error" else logging.DEBUG, "%s", diag)
    broken = {d.file for d in ecpg.diagnostics if d.kind == "parse_error"}
    if all(name in broken for name in names) and not any(u.children for u in ecpg.base.units):
        raise BuildError("no file could be parsed")
    frg = build_frg(ecpg.symbols, ecpg.base.units)
    scc = compute_scc(frg)
    run.out.mkdir(parents=True, exist_ok=True)
    write_atomic(ecpg_path, export_ecpg(ecpg))
    write_atomic(frg_path, dump_cache(frg, scc, digest))
    log.info("built %d nodes, %d edges over %d files", len(ecpg.nodes), len(ecpg.edges), len(names))
    run.timed("build", start)
    return EXIT_OK


def load_artifacts(run: Run) -> tuple[Ecpg, FileReferenceGraph, SccIndex]:
    """Load ``ecpg.json`` and the FRG cache, building them first if needed."""
    code = cmd_build(run)
    if code != EXIT_OK:
        raise BuildError("build failed")
    start = time.perf_counter()
    try:
        ecpg = import_ecpg((run.out / ECPG_FILE).read_bytes(), root=run.project)
        _, frg, scc = load_cache((run.out / FRG_FILE).read_bytes())
    except (SchemaError, ValueError, KeyError) as err:
        raise BuildError(f"corrupt build artifacts in {run.out}: {err}") from None
    run.timed("load", start)
    return ecpg, frg, scc


def normalize_file(name: str, project: Path, known: list[str]) -> str:
    """Map a path as written in a report to the project-relative name used in the graph."""
    if name in known:
        return name
    path = Path(name)
    if path.is_absolute():
        try:
            rel = path.resolve().relative_to(project.resolve()).as_posix()
        except ValueError:
            rel = None
        if rel in known:
            return rel
    norm = posixpath.normpath(PurePosixPath(name.replace("\\", "/")).as_posix())
    if norm in known:
        return norm
    tail = [k for k in known if k.endswith("/" + norm)]
    if len(tail) == 1:
        return tail[0]
    return name


def _labels_arg(text: str) -> tuple[str, ...]:
    labels = tuple(t.strip().upper() for t in text.split(",") if t.strip())
    bad = [t for t in labels if t not in {"AST", "CFG", "C", "D", "F", "S", "V"}]
    if bad or not labels:
        raise UsageError(f"unknown edge label(s): {','.join(bad) or repr(text)}")
    return labels


def cmd_slice(run: Run, args) -> int:
    ecpg, _, _ = load_artifacts(run)
    file = normalize_file(args.file, run.project, ecpg.files)
    try:
        crit = SlicingCriterion(file, args.line, args.column)
    except ValueError as err:
        raise UsageError(str(err)) from None
    labels = _labels_arg(args.labels) if args.labels else run.config.labels
    direction = args.direction or run.config.slice_direction
    start = time.perf_counter()
    result = slice_source(ecpg, [crit], direction, labels)
    run.timed("slice", start)
    sys.stdout.write(result.to_json() + "\n")
    return EXIT_OK


def cmd_farf(run: Run, args) -> int:
    ecpg, frg, scc = load_artifacts(run)
    files = [normalize_file(f.strip(), run.project, frg.nodes) for f in args.files.split(",") if f.strip()]
    if not files:
        raise UsageError("--files is empty")
    for f in sorted(farf(frg, scc, files)):
        sys.stdout.write(f + "\n")
    return EXIT_OK


def cmd_export(run: Run, args) -> int:
    load_artifacts(run)
    data = (run.out / ECPG_FILE).read_bytes()
    if args.output:
        write_atomic(run.out / Path(args.output).name, data)
    else:
        sys.stdout.buffer.write(data + b"\n")
    return EXIT_OK


# -- inspect ---------------------------------------------------------------------


@dataclass
class Prepared:
    index: int
    warning: Warning
    status: str = "ok"
    error: str = ""
    report_path: str | None = None
    bundle: object = None


def _prepare(run: Run, ecpg: Ecpg, frg, scc, registry: TemplateRegistry, i: int, w: Warning) -> Prepared:
    cfg = run.config
    item = Prepared(i, w)
    try:
        criteria = [SlicingCriterion(normalize_file(c.file, run.project, ecpg.files), c.line, c.column)
                    for c in warning_to_criteria(w, cfg.criteria_mode)]
        t0 = time.perf_counter()
        seeds_files = sorted({c.file for c in criteria})
        deps = farf(frg, scc, seeds_files)
        run.timed("farf", t0)
        t0 = time.perf_counter()
        allowed = deps if cfg.restrict_to_dependents else None
        sl = slice_source(ecpg, criteria, cfg.slice_direction, cfg.labels, allowed)
        run.timed("slice", t0)
        t0 = time.perf_counter()
        meta = {"criteria_mode": cfg.criteria_mode, "slice_direction": cfg.slice_direction}
        report = assemble_report(w, sl, deps, registry, meta)
        name = f"reports/{w.warning_id}"
        write_atomic(run.out / f"{name}.md", report.to_markdown().encode("utf-8"))
        write_atomic(run.out / f"{name}.json", report.to_json())
        item.report_path = f"{name}.md"
        item.bundle = render_prompt(report, registry, cfg.n_samples, cfg.temperature)
        run.timed("report", t0)
    except (UnknownFile, CriterionOutOfRange, SourceUnavailable) as err:
        item.status, item.error = "bad_criterion", str(err)
    return item


def _adjudicate(client, item: Prepared) -> dict:
    record = {"warning_id": item.warning.warning_id, "cwe": item.warning.cwe}
    if item.status != "ok":
        return {**record, "final": VerdictValue.unknown.value, "votes": [], "report_path": item.report_path,
                "status": item.status, "error": item.error}
    try:
        raw = query_llm(item.bundle, client)
    except TransportError as err:
        return {**record, "final": VerdictValue.unknown.value, "votes": [], "report_path": item.report_path,
                "status": "retryable", "error": str(err)}
    votes = [parse_verdict(r).value for r in raw]
    return {**record, "final": majority_vote(votes).value, "votes": [v.value for v in votes],
            "report_path": item.report_path, "status": "ok"}


def cmd_inspect(run: Run, args) -> int:
    try:
        data = Path(args.report).read_bytes()
    except OSError as err:
        raise UsageError(f"cannot read report: {err}") from None
    try:
        warnings = parse_report(data, args.format)
    except (MalformedReport, ReportSchemaError, ValueError) as err:
        raise UsageError(f"bad report {args.report}: {err}") from None
    if args.criteria_mode:
        run.config.criteria_mode = args.criteria_mode
    ecpg, frg, scc = load_artifacts(run)
    registry = default_registry()
    if run.config.template_dir:
        registry = TemplateRegistry([registry.get(t) for t in registry.ids()])
        registry.load_dir(run.config.template_dir)
    prepared = [_prepare(run, ecpg, frg, scc, registry, i, w) for i, w in enumerate(warnings)]
    client = run.config.client()
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=run.config.max_concurrency) as pool:
        records = list(pool.map(lambda item: _adjudicate(client, item), prepared))
    run.timed("adjudicate", t0)
    run.reports = [args.report]
    body = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    write_atomic(run.out / VERDICT_FILE, body.encode("utf-8"))
    failed = sum(r["status"] != "ok" for r in records)
    run.write_manifest("inspect", {"warnings": len(records), "failed": failed, "verdicts": VERDICT_FILE})
    log.info("%d warning(s) inspected, %d failed", len(records), failed)
    return EXIT_PARTIAL if failed else EXIT_OK


# -- eval ------------------------------------------------------------------------


def _read_labels(path: Path) -> dict[str, str]:
    doc = json.loads(path.read_text(encoding="utf-8"))
    if isinstance(doc, dict):
        return {str(k): v for k, v in doc.items()}
    return {str(r["warning_id"]): r["label"] for r in doc}


def _metrics_row(name: str, cm: ConfusionMatrix) -> dict:
    return {"group": name, **cm.to_dict()}


def cmd_eval(run: Run, args) -> int:
    try:
        records = [json.loads(line) for line in Path(args.verdicts).read_text(encoding="utf-8").splitlines() if line.strip()]
        labels = _read_labels(Path(args.labels))
    except (OSError, ValueError, KeyError, TypeError) as err:
        raise UsageError(f"cannot read inputs: {err}") from None
    missing = sorted({r["warning_id"] for r in records} - set(labels))
    if missing:
        raise UsageError(f"{len(missing)} verdict(s) have no label, e.g. {missing[0]}")
    groups: dict[str, list[dict]] = {}
    for r in records:
        label = labels[r["warning_id"]]
        if label not in ("buggy", "not_buggy"):
            raise UsageError(f"bad label {label!r} for {r['warning_id']}")
        cwe = r.get("cwe")
        groups.setdefault("CWE-%s" % cwe if cwe is not None else "CWE-?", []).append({"label": label, "final": r["final"]})
    rows = [_metrics_row(g, score(items)) for g, items in sorted(groups.items())]
    overall = score(item for items in groups.values() for item in items)
    rows.append(_metrics_row("overall", overall))
    doc = {"rows": rows}
    run.out.mkdir(parents=True, exist_ok=True)
    write_atomic(run.out / "metrics.json", json.dumps(doc, indent=1).encode("utf-8") + b"\n")
    if args.json:
        sys.stdout.write(json.dumps(doc, indent=1) + "\n")
    else:
        sys.stdout.write(format_table(rows))
    return EXIT_OK


def format_table(rows: list[dict]) -> str:
    head = ["group", "n", "TP", "TN", "FP", "FN", "Accuracy", "Precision", "Recall", "F1"]
    body = [[r["group"], str(r["tp"] + r["tn"] + r["fp"] + r["fn"]), str(r["tp"]), str(r["tn"]), str(r["fp"]), str(r["fn"]),
             *(f"{100 * r[k]:.2f}%" for k in ("accuracy", "precision", "recall", "f1"))] for r in rows]
    widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))) for row in [head, *body]]
    return "\n".join(lines) + "\n"


# -- argument parsing ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fpmslice", description="Slice-based context extraction and LLM triage of static-analysis warnings.")
    p.add_argument("--project", default=".", help="source tree (default: .)")
    p.add_argument("--out", default="fpm-out", help="artifact directory (default: fpm-out)")
    p.add_argument("--config", help="fpm.toml (default: <project>/fpm.toml if present)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("build", help="build eCPG and file reference graph")

    s = sub.add_parser("slice", help="slice from one criterion, print Slice-JSON")
    s.add_argument("--file", required=True)
    s.add_argument("--line", required=True, type=int)
    s.add_argument("--column", type=int)
    s.add_argument("--direction", choices=DIRECTIONS)
    s.add_argument("--labels", help="comma-separated edge labels, e.g. C,D,F,S,V")

    f = sub.add_parser("farf", help="files the given files depend on")
    f.add_argument("--files", required=True, help="comma-separated")

    i = sub.add_parser("inspect", help="triage the warnings of a SAST report")
    i.add_argument("--report", required=True)
    i.add_argument("--format", default="cppcheck", choices=["cppcheck", "json"])
    i.add_argument("--criteria-mode", choices=["primary_only", "full_trace"])

    e = sub.add_parser("eval", help="score verdicts against labels")
    e.add_argument("--verdicts", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--json", action="store_true", help="print JSON instead of a table")

    x = sub.add_parser("export-ecpg", help="print eCPG-JSON")
    x.add_argument("--output", help="file name under --out instead of stdout")
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = make_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    project = Path(args.project)
    try:
        cfg_path = Path(args.config) if args.config else (project / "fpm.toml")
        config = Config.load(cfg_path if args.config or cfg_path.exists() else None)
        run = Run(project, Path(args.out), config)
        if args.command == "build":
            code = cmd_build(run)
            if code == EXIT_OK:
                run.write_manifest("build", {"artifacts": [ECPG_FILE, FRG_FILE]})
            return code
        handler = {"slice": cmd_slice, "farf": cmd_farf, "inspect": cmd_inspect,
                   "eval": cmd_eval, "export-ecpg": cmd_export}[args.command]
        return handler(run, args)
    except BuildError as err:
        log.error("%s", err)
        return EXIT_BUILD
    except (UsageError, UnknownFile, CriterionOutOfRange) as err:
        log.error("%s", err)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
