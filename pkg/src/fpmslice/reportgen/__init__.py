"""Structured reports and CWE-specific prompt bundles."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from ..ingest import Warning
from ..slicer import Slice

log = logging.getLogger(__name__)

ELISION = "..."
GENERIC = "generic"
VERDICT_INSTRUCTION = (
    "Work through the checklist step by step, then finish with exactly one line of the form\n"
    "VERDICT: FALSE ALARM | REAL BUG | UNKNOWN\n"
    "Answer UNKNOWN only if the context is insufficient."
)


class TemplateNotFound(KeyError):
    def __init__(self, cwe: int | None):
        super().__init__(cwe)
        self.cwe = cwe

    def __str__(self) -> str:
        return f"no template registered for CWE-{self.cwe}"


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class Shot:
    question: str
    answer: str


@dataclass(frozen=True)
class Template:
    id: str
    title: str
    system: str
    checklist: tuple[str, ...]
    shots: tuple[Shot, ...] = ()
    cwe: int | None = None

    @classmethod
    def from_toml(cls, data: bytes | str, source: str = "<template>") -> "Template":
        try:
            doc = tomllib.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
        except tomllib.TOMLDecodeError as err:
            raise TemplateError(f"{source}: {err}") from None
        try:
            shots = tuple(Shot(s["question"].strip(), s["answer"].strip()) for s in doc.get("shots", []))
            checklist = doc["checklist"]
            if not isinstance(checklist, list) or not all(isinstance(c, str) for c in checklist):
                raise TemplateError(f"{source}: checklist must be a list of strings")
            return cls(str(doc["id"]), str(doc.get("title", doc["id"])), doc["system"].strip(),
                       tuple(checklist), shots, doc.get("cwe"))
        except KeyError as err:
            raise TemplateError(f"{source}: missing field {err.args[0]!r}") from None


class TemplateRegistry:
    def __init__(self, templates=()):
        self._by_id: dict[str, Template] = {}
        for t in templates:
            self.register(t)

    def register(self, template: Template) -> None:
        self._by_id[template.id] = template

    def __contains__(self, template_id: str) -> bool:
        return template_id in self._by_id

    def get(self, template_id: str) -> Template:
        return self._by_id[template_id]

    def ids(self) -> list[str]:
        return sorted(self._by_id)

    def for_cwe(self, cwe: int | None) -> Template:
        key = f"cwe{cwe}"
        if cwe is None or key not in self._by_id:
            raise TemplateNotFound(cwe)
        return self._by_id[key]

    @classmethod
    def builtin(cls) -> "TemplateRegistry":
        reg = cls()
        for entry in sorted(resources.files(__package__).joinpath("templates").iterdir(), key=lambda p: p.name):
            if entry.name.endswith(".toml"):
                reg.register(Template.from_toml(entry.read_bytes(), entry.name))
        return reg

    def load_dir(self, directory: str | Path) -> None:
        """Add or override templates from ``directory/*.toml``."""
        for path in sorted(Path(directory).glob("*.toml")):
            self.register(Template.from_toml(path.read_bytes(), str(path)))


_BUILTIN: TemplateRegistry | None = None


def default_registry() -> TemplateRegistry:
    global _BUILTIN
    if _BUILTIN is None:
        _BUILTIN = TemplateRegistry.builtin()
    return _BUILTIN


@dataclass
class StructuredReport:
    warning: Warning
    slice: Slice
    dependent_files: list[str]
    cwe_template_id: str
    metadata: dict = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "warning": self.warning.to_dict(),
            "warning_id": self.warning.warning_id,
            "cwe_template_id": self.cwe_template_id,
            "dependent_files": list(self.dependent_files),
            "metadata": dict(self.metadata),
            "slice": self.slice.to_dict(),
        }

    def to_json(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, ensure_ascii=False).encode("utf-8") + b"\n"

    def summary_markdown(self) -> str:
        w = self.warning
        loc = w.primary_loc
        where = f"{loc.file}:{loc.line}" + (f":{loc.column}" if loc.column else "")
        out = [
            "## Bug report",
            f"- tool: {w.tool}",
            f"- rule: {w.rule_id}",
            f"- CWE: {w.cwe if w.cwe is not None else 'n/a'}",
            f"- severity: {w.severity or 'n/a'}",
            f"- location: {where}",
            f"- message: {w.message}",
        ]
        if w.trace:
            out.append("- trace:")
            for step in w.trace:
                info = f" ({step.info})" if step.info else ""
                out.append(f"  - {step.file}:{step.line}{info}")
        return "\n".join(out)

    def slice_markdown(self) -> str:
        out = ["## Dependent files"]
        out += [f"- {f}" for f in self.dependent_files] or ["- (none)"]
        out.append("")
        out.append("## Sliced code context")
        if self.slice.fallback_used:
            out.append("(no statement matched the warning line; the whole enclosing function is shown)")
        for f in self.slice.files:
            out.append(f"### {f.path}")
            out.append("```c")
            prev = None
            for ln in f.lines:
                if prev is not None and ln.n != prev + 1:
                    out.append(ELISION)
                out.append(f"{f.path}:{ln.n} | {ln.text}")
                prev = ln.n
            out.append("```")
        return "\n".join(out)

    def to_markdown(self) -> str:
        return self.summary_markdown() + "\n\n" + self.slice_markdown() + "\n"


def assemble_report(
    warning: Warning,
    slice: Slice,
    dep_files,
    registry: TemplateRegistry | None = None,
    metadata: dict | None = None,
) -> StructuredReport:
    registry = registry or default_registry()
    diagnostics = []
    try:
        template_id = registry.for_cwe(warning.cwe).id
    except TemplateNotFound as err:
        template_id = GENERIC
        diagnostics.append(f"{err}; using the generic template")
        log.info("%s; using the generic template", err)
    meta = {"tool": warning.tool, "criteria_mode": "full_trace", "slice_direction": slice.direction}
    meta.update(metadata or {})
    return StructuredReport(warning, slice, sorted(set(dep_files)), template_id, meta, diagnostics)


@dataclass(frozen=True)
class PromptBundle:
    system: str
    user: str
    shots: tuple[Shot, ...] = ()
    n_samples: int = 5
    temperature: float = 0.7

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    @property
    def decode(self) -> dict:
        return {"n_samples": self.n_samples, "temperature": self.temperature}

    def messages(self) -> list[dict]:
        msgs = [{"role": "system", "content": self.system}]
        for shot in self.shots:
            msgs.append({"role": "user", "content": shot.question})
            msgs.append({"role": "assistant", "content": shot.answer})
        msgs.append({"role": "user", "content": self.user})
        return msgs


def render_prompt(
    report: StructuredReport,
    registry: TemplateRegistry | None = None,
    n_samples: int = 5,
    temperature: float = 0.7,
) -> PromptBundle:
    registry = registry or default_registry()
    template = registry.get(report.cwe_template_id)
    steps = "\n".join(f"{i}. {step}" for i, step in enumerate(template.checklist, 1))
    user = "\n\n".join([
        report.summary_markdown(),
        report.slice_markdown(),
        f"## Review checklist ({template.title})\n{steps}",
        VERDICT_INSTRUCTION,
    ])
    return PromptBundle(template.system, user + "\n", template.shots, n_samples, temperature)


__all__ = [
    "ELISION",
    "GENERIC",
    "PromptBundle",
    "Shot",
    "StructuredReport",
    "Template",
    "TemplateError",
    "TemplateNotFound",
    "TemplateRegistry",
    "assemble_report",
    "default_registry",
    "render_prompt",
]
