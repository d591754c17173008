"""Reading and writing CUDF documents.

Reading is tolerant (comments, CRLF line ends, extra whitespace, continuation
lines); writing is canonical, so that ``print_document(parse_document(t))``
reaches a byte-level fixpoint after one pass.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .model import (
    TRUE,
    Formula,
    KeepLevel,
    NoSolution,
    PackageStanza,
    RelOp,
    Request,
    Solution,
    Universe,
    UnknownPackage,
    VpkgAtom,
    NAME_RE,
)

Text = Union[str, bytes]

PACKAGE_FIELDS = (
    "package",
    "version",
    "depends",
    "conflicts",
    "provides",
    "recommends",
    "installed",
    "keep",
)
REQUEST_FIELDS = ("install", "remove", "upgrade")

_ATOM_RE = re.compile(r"^\s*([^\s=!<>]+)\s*(?:(!=|>=|<=|=|<|>)\s*(\S+))?\s*$")
_FIELD_RE = re.compile(r"^([A-Za-z0-9][A-Za-z0-9_\-.]*)\s*:(.*)$")


class ParseError(Exception):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass
class CudfDocument:
    packages: list[PackageStanza] = field(default_factory=list)
    request: Optional[Request] = None
    preamble: Optional[dict[str, str]] = None
    # Value of the ``request:`` lead line and any unrecognized request fields.
    request_label: str = ""
    request_extras: tuple[tuple[str, str], ...] = ()

    def universe(self) -> Universe:
        return Universe(self.packages)


# -- value grammars ---------------------------------------------------------


def _parse_version(text: str, line: int) -> int:
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+", text):
        raise ParseError(line, f"version must be an integer, got {text!r}")
    value = int(text)
    if value < 1:
        raise ParseError(line, "version must be ≥ 1")
    return value


def parse_atom(text: str, line: int = 0) -> VpkgAtom:
    m = _ATOM_RE.match(text)
    if not m:
        raise ParseError(line, f"malformed package atom {text.strip()!r}")
    name, op, ver = m.groups()
    if not NAME_RE.match(name):
        raise ParseError(line, f"invalid package name {name!r}")
    if op is None:
        return VpkgAtom(name)
    return VpkgAtom(name, RelOp(op), _parse_version(ver, line))


def parse_atom_list(text: str, line: int = 0) -> tuple[VpkgAtom, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_atom(part, line) for part in text.split(","))


def parse_formula(text: str, line: int = 0) -> Formula:
    text = text.strip()
    if not text:
        return TRUE
    conjuncts = []
    for conj in text.split(","):
        atoms: list[VpkgAtom] = []
        always = False
        for alt in conj.split("|"):
            alt = alt.strip()
            if alt == "true!":
                always = True
            elif alt == "false!":
                continue
            else:
                atom = parse_atom(alt, line)
                if atom not in atoms:
                    atoms.append(atom)
        if not always:
            conjuncts.append(tuple(atoms))
    return Formula(tuple(conjuncts))


def _parse_provides(text: str, line: int) -> tuple[tuple[str, Optional[int]], ...]:
    out: list[tuple[str, Optional[int]]] = []
    for atom in parse_atom_list(text, line):
        if atom.op not in (None, RelOp.EQ):
            raise ParseError(line, f"provides entries only allow '=': {atom}")
        entry = (atom.name, atom.version)
        if entry in out:
            raise ParseError(line, f"duplicate provides entry {atom}")
        out.append(entry)
    return tuple(out)


def format_atom(atom: VpkgAtom) -> str:
    return str(atom)


def format_formula(f: Formula) -> str:
    if f.is_true:
        return "true!"
    return ", ".join(
        " | ".join(str(a) for a in d) if d else "false!" for d in f.conjuncts
    )


def format_atom_list(atoms) -> str:
    return ", ".join(str(a) for a in atoms)


def _format_provides(provides) -> str:
    return ", ".join(n if v is None else f"{n} = {v}" for n, v in provides)


# -- stanza splitting ---------------------------------------------------------


def _decode(text: Text) -> str:
    if isinstance(text, bytes):
        return text.decode("utf-8")
    return text


def _stanzas(text: str):
    """Yield lists of (line_number, key, value) per blank-line separated block."""
    block: list[list] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if line.startswith("#"):
            continue
        if not line.strip():
            if block:
                yield block
                block = []
            continue
        if line[0] in " \t":
            if not block:
                raise ParseError(lineno, "continuation line outside a field")
            block[-1][2] = (block[-1][2] + " " + line.strip()).strip()
            continue
        m = _FIELD_RE.match(line)
        if not m:
            raise ParseError(lineno, f"expected 'field: value', got {line!r}")
        block.append([lineno, m.group(1), m.group(2).strip()])
    if block:
        yield block


def _package_stanza(block) -> PackageStanza:
    seen: dict[str, tuple[int, str]] = {}
    extras: list[tuple[str, str]] = []
    for lineno, key, value in block:
        if key in seen or any(k == key for k, _ in extras):
            raise ParseError(lineno, f"duplicate field {key!r}")
        if key in PACKAGE_FIELDS:
            seen[key] = (lineno, value)
        else:
            extras.append((key, value))
    lead_line = block[0][0]
    name = seen["package"][1]
    if not NAME_RE.match(name):
        raise ParseError(lead_line, f"invalid package name {name!r}")
    if "version" not in seen:
        raise ParseError(lead_line, f"package {name} has no version")
    kwargs: dict = {"extras": tuple(extras)}
    for key, (lineno, value) in seen.items():
        if key == "version":
            kwargs["version"] = _parse_version(value, lineno)
        elif key == "depends":
            kwargs["depends"] = parse_formula(value, lineno)
        elif key == "recommends":
            kwargs["recommends"] = parse_formula(value, lineno)
        elif key == "conflicts":
            kwargs["conflicts"] = parse_atom_list(value, lineno)
        elif key == "provides":
            kwargs["provides"] = _parse_provides(value, lineno)
        elif key == "installed":
            if value not in ("true", "false"):
                raise ParseError(lineno, f"installed must be true or false, got {value!r}")
            kwargs["installed"] = value == "true"
        elif key == "keep":
            try:
                kwargs["keep"] = KeepLevel(value)
            except ValueError:
                raise ParseError(lineno, f"invalid keep value {value!r}") from None
    return PackageStanza(name=name, **kwargs)


def parse_document(text: Text) -> CudfDocument:
    doc = CudfDocument()
    first = True
    for block in _stanzas(_decode(text)):
        lineno, lead, value = block[0]
        if lead == "preamble":
            if not first:
                raise ParseError(lineno, "preamble must be the first stanza")
            pre: dict[str, str] = {}
            for ln, key, val in block[1:]:
                if key in pre:
                    raise ParseError(ln, f"duplicate field {key!r}")
                pre[key] = val
            doc.preamble = pre
        elif lead == "package":
            if doc.request is not None:
                raise ParseError(lineno, "package stanza after the request stanza")
            doc.packages.append(_package_stanza(block))
        elif lead == "request":
            if doc.request is not None:
                raise ParseError(lineno, "more than one request stanza")
            fields: dict[str, tuple[VpkgAtom, ...]] = {}
            extras: list[tuple[str, str]] = []
            for ln, key, val in block[1:]:
                if key in fields or any(k == key for k, _ in extras):
                    raise ParseError(ln, f"duplicate field {key!r}")
                if key in REQUEST_FIELDS:
                    fields[key] = parse_atom_list(val, ln)
                else:
                    extras.append((key, val))
            doc.request = Request(**fields)
            doc.request_label = value
            doc.request_extras = tuple(extras)
        else:
            raise ParseError(lineno, f"unknown stanza type {lead!r}")
        first = False
    return doc


# -- printing -----------------------------------------------------------------


def format_stanza(st: PackageStanza) -> str:
    lines = [f"package: {st.name}", f"version: {st.version}"]
    if not st.depends.is_true:
        lines.append(f"depends: {format_formula(st.depends)}")
    if st.conflicts:
        lines.append(f"conflicts: {format_atom_list(st.conflicts)}")
    if st.provides:
        lines.append(f"provides: {_format_provides(st.provides)}")
    if not st.recommends.is_true:
        lines.append(f"recommends: {format_formula(st.recommends)}")
    if st.installed:
        lines.append("installed: true")
    if st.keep is not KeepLevel.NONE:
        lines.append(f"keep: {st.keep.value}")
    lines.extend(_field(k, v) for k, v in st.extras)
    return "\n".join(lines) + "\n"


def _field(key: str, value: str) -> str:
    return f"{key}: {value}" if value else f"{key}:"


def print_document(doc: CudfDocument) -> str:
    blocks = []
    if doc.preamble is not None:
        lines = ["preamble:"] + [_field(k, v) for k, v in doc.preamble.items()]
        blocks.append("\n".join(lines) + "\n")
    blocks.extend(format_stanza(st) for st in doc.packages)
    if doc.request is not None:
        r = doc.request
        lines = [_field("request", doc.request_label)]
        for key in REQUEST_FIELDS:
            atoms = getattr(r, key)
            if atoms:
                lines.append(f"{key}: {format_atom_list(atoms)}")
        lines.extend(_field(k, v) for k, v in doc.request_extras)
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


# -- solutions ----------------------------------------------------------------


def parse_solution(text: Text, u: Universe):
    """Return a :class:`Solution`, or ``NoSolution`` for a ``FAIL`` document."""
    text = _decode(text)
    if text.strip() == "FAIL":
        return NoSolution
    doc = parse_document(text)
    chosen = set()
    for st in doc.packages:
        if not st.installed:
            continue
        if st.id not in u:
            raise UnknownPackage(st.name, st.version)
        chosen.add(st.id)
    return Solution(chosen)


def print_solution(s) -> str:
    if s is NoSolution:
        return "FAIL\n"
    return "\n".join(
        f"package: {pid.name}\nversion: {pid.version}\ninstalled: true\n"
        for pid in sorted(s.installed)
    )


def document_from_universe(u: Universe, request: Optional[Request] = None) -> CudfDocument:
    return CudfDocument(packages=u.stanzas, request=request)

