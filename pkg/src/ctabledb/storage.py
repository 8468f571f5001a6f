"""Line-oriented text image of a database.

::

    PDB 1
    DICT 1 Alice
    VAR 4 : 9 10
    TABLE Emp 4 Name Gender Mstat Dept
    ROW 5 6 7 -4 | TRUE

Cells use the integer encoding (constants positive, variable ``xk`` as
``-k``); conditions use the C-SQL condition syntax with integer codes.
Saving is canonical, so ``save(load(image)) == image`` byte for byte.
"""

from __future__ import annotations

import os
from typing import BinaryIO, Union

from . import csql
from .condition import TRUE, Condition, map_operands, render, variables
from .ctable import CTable, CTuple, Schema
from .engine import Database
from .errors import CTableError, FormatError, VersionError

MAGIC = "PDB"
VERSION = 1


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(s: str, lineno: int) -> str:
    out = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "\\":
            nxt = s[i + 1 : i + 2]
            if nxt == "\\":
                out.append("\\")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "r":
                out.append("\r")
            else:
                raise FormatError(lineno, f"bad escape sequence in string {s!r}")
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def dumps(db: Database) -> bytes:
    lines = [f"{MAGIC} {VERSION}"]
    for code, s in db.dictionary.items():
        lines.append(f"DICT {code} {_escape(s)}")
    for k, dom in db.global_.items():
        lines.append(f"VAR {k} : " + " ".join(map(str, dom)))
    for table in db.tables.values():
        schema = table.schema
        lines.append(f"TABLE {schema.name} {schema.arity} " + " ".join(schema.columns))
        for terms, local in table.rows:
            lines.append("ROW " + " ".join(map(str, terms)) + " | " + render(local))
    return ("\n".join(lines) + "\n").encode("utf-8")


def save_db(db: Database, sink: Union[str, os.PathLike, BinaryIO]) -> bytes:
    data = dumps(db)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
    return data


def _int(text: str, lineno: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise FormatError(lineno, f"{what} must be an integer, got {text!r}") from None


def _condition(text: str, lineno: int) -> Condition:
    try:
        cond = csql.parse_condition(text)
    except CTableError as exc:
        raise FormatError(lineno, f"bad condition: {exc}") from None

    def operand(o):
        if isinstance(o, csql.VarRef):
            return -o.id
        if isinstance(o, csql.IntLit):
            return o.value
        raise FormatError(lineno, "conditions may only hold variables and integer codes")

    return map_operands(cond, operand)


def loads(data: bytes) -> Database:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(0, f"not UTF-8: {exc}") from None
    if not text:
        raise FormatError(1, "empty image")
    if not text.endswith("\n"):
        raise FormatError(text.count("\n") + 1, "truncated image (missing final newline)")
    lines = text[:-1].split("\n")

    header = lines[0].split(" ")
    if len(header) != 2 or header[0] != MAGIC:
        raise FormatError(1, f"expected header '{MAGIC} {VERSION}'")
    if header[1] != str(VERSION):
        raise VersionError(1, f"unsupported version {header[1]!r}")

    db = Database()
    section = 0  # DICT, VAR, TABLE order
    table: CTable | None = None
    rows: list[CTuple] = []

    def flush():
        if table is not None:
            db.tables[table.schema.name.lower()] = table.with_rows(rows)

    for lineno, line in enumerate(lines[1:], start=2):
        kind, _, rest = line.partition(" ")
        if kind == "DICT":
            if section > 0:
                raise FormatError(lineno, "DICT after VAR/TABLE section")
            code_text, sep, s = rest.partition(" ")
            code = _int(code_text, lineno, "dictionary code")
            if not sep or code != len(db.dictionary) + 1:
                raise FormatError(lineno, "dictionary codes must ascend from 1")
            value = _unescape(s, lineno)
            if db.dictionary.get(value) is not None:
                raise FormatError(lineno, f"duplicate dictionary string {value!r}")
            db.dictionary.encode(value)
        elif kind == "VAR":
            if section > 1:
                raise FormatError(lineno, "VAR after TABLE section")
            section = 1
            fields = rest.split(" ")
            if len(fields) < 3 or fields[1] != ":":
                raise FormatError(lineno, "expected 'VAR <id> : <codes...>'")
            k = _int(fields[0], lineno, "variable id")
            dom = [_int(f, lineno, "domain code") for f in fields[2:]]
            if k < 1 or k in db.global_:
                raise FormatError(lineno, f"bad or repeated variable id {k}")
            declared = db.global_.variables()
            if declared and k < declared[-1]:
                raise FormatError(lineno, "variables must be listed in ascending order")
            if dom != sorted(set(dom)) or dom[0] < 1:
                raise FormatError(lineno, "domain codes must be positive, distinct and ascending")
            db.global_.declare(k, dom)
        elif kind == "TABLE":
            section = 2
            flush()
            fields = rest.split(" ")
            if len(fields) < 3:
                raise FormatError(lineno, "expected 'TABLE <name> <arity> <columns...>'")
            arity = _int(fields[1], lineno, "arity")
            if arity != len(fields) - 2:
                raise FormatError(lineno, f"arity {arity} does not match {len(fields) - 2} columns")
            if fields[0].lower() in db.tables:
                raise FormatError(lineno, f"duplicate table {fields[0]!r}")
            try:
                table = CTable(Schema(fields[0], tuple(fields[2:])))
            except CTableError as exc:
                raise FormatError(lineno, str(exc)) from None
            rows = []
        elif kind == "ROW":
            if table is None:
                raise FormatError(lineno, "ROW before any TABLE")
            cells, sep, cond_text = rest.partition(" | ")
            if not sep:
                raise FormatError(lineno, "ROW is missing the '| condition' part")
            terms = tuple(_int(c, lineno, "cell") for c in cells.split(" "))
            if len(terms) != table.schema.arity:
                raise FormatError(lineno, f"expected {table.schema.arity} cells, got {len(terms)}")
            if 0 in terms:
                raise FormatError(lineno, "0 is not a valid cell value")
            local = TRUE if cond_text == "TRUE" else _condition(cond_text, lineno)
            for k in sorted({-t for t in terms if t < 0} | variables(local)):
                if k not in db.global_:
                    raise FormatError(lineno, f"x{k} has no VAR entry")
            rows.append(CTuple(terms, local))
        else:
            raise FormatError(lineno, f"unknown record type {kind!r}")
    flush()
    return db


def load_db(source: Union[str, os.PathLike, BinaryIO, bytes]) -> Database:
    if isinstance(source, bytes):
        return loads(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return loads(fh.read())
    return loads(source.read())

