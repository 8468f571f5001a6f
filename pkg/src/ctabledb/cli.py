"""Console front end: interactive REPL and batch script runner."""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from typing import TextIO

from . import csql, storage
from .ctable import CTable
from .engine import Ack, BoolResult, Database, Engine, ExecResult, ResultTable
from .errors import CTableError, SyntaxProblem

CONDITION_HEADER = "phi(t)"
PROMPT = "cdb> "
CONTINUE = "...> "


class Quit(Exception):
    pass


def table_cells(db: Database, table: CTable) -> tuple[list[str], list[list[str]]]:
    header = list(table.schema.columns) + [CONDITION_HEADER]
    body = [
        [db.format_cell(t) for t in terms] + [db.format_condition(local)]
        for terms, local in table.rows
    ]
    return header, body


def render_table(db: Database, table: CTable) -> str:
    header, body = table_cells(db, table)
    widths = [len(h) for h in header]
    for row in body:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]

    def line(cells):
        return " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    out = [line(header), "-+-".join("-" * w for w in widths)]
    out.extend(line(row) for row in body)
    n = len(body)
    out.append(f"({n} row{'s' if n != 1 else ''})")
    return "\n".join(out)


class Session:
    """One open database plus console settings."""

    def __init__(
        self,
        db: Database | None = None,
        *,
        out: TextIO | None = None,
        err: TextIO | None = None,
        fmt: str = "table",
        timing: bool = False,
        path: str | None = None,
    ):
        self.engine = Engine(db)
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.fmt = fmt
        self.timing = timing
        self.path = path

    @property
    def db(self) -> Database:
        return self.engine.db

    def open(self, path: str) -> None:
        if os.path.exists(path):
            self.engine = Engine(storage.load_db(path), cap=self.engine.cap)
        else:
            self.engine = Engine(Database(), cap=self.engine.cap)
        self.path = path

    def emit(self, text: str) -> None:
        self.out.write(text + "\n")

    def show(self, result: ExecResult) -> None:
        if isinstance(result, ResultTable):
            if self.fmt == "csv":
                header, body = table_cells(self.db, result.table)
                w = csv.writer(self.out, lineterminator="\n")
                w.writerow(header)
                w.writerows(body)
            else:
                self.emit(render_table(self.db, result.table))
        elif isinstance(result, BoolResult):
            self.emit("true" if result.value else "false")
        elif isinstance(result, Ack):
            self.emit(result.message)

    def meta(self, cmd: csql.Meta) -> None:
        name, args = cmd.command, cmd.args
        if name in ("quit", "q"):
            raise Quit
        if name == "open":
            if len(args) != 1:
                raise CTableError("usage: \\open <path>")
            self.open(args[0])
            self.emit(f"opened {args[0]}")
        elif name == "save":
            path = args[0] if args else self.path
            if path is None:
                raise CTableError("usage: \\save <path>")
            storage.save_db(self.db, path)
            self.path = path
            self.emit(f"saved {path}")
        elif name == "timing":
            if args not in (("on",), ("off",)):
                raise CTableError("usage: \\timing on|off")
            self.timing = args[0] == "on"
            self.emit(f"timing {args[0]}")
        elif name == "tables":
            for t in self.db.tables.values():
                self.emit(f"{t.schema.name}({', '.join(t.schema.columns)}) {len(t)} rows")
        elif name == "global":
            for k, dom in self.db.global_.items():
                self.emit(f"x{k}: " + ", ".join(self.db.format_constant(c) for c in dom))
        else:
            raise CTableError(f"unknown meta command \\{name}")

    def handle(self, source: str) -> None:
        """Run one statement or meta command; errors propagate to the caller."""
        stmt = csql.parse(source)
        if isinstance(stmt, csql.Meta):
            self.meta(stmt)
            return
        t0 = time.perf_counter()
        result = self.engine.execute(stmt)
        elapsed = (time.perf_counter() - t0) * 1000.0
        self.show(result)
        if self.timing:
            self.emit(f"Time: {elapsed:.3f} ms")

    def report(self, exc: CTableError, text: str = "", base: int = 0) -> None:
        if isinstance(exc, SyntaxProblem) and text:
            at = base + exc.offset
            line = text.count("\n", 0, at) + 1
            self.err.write(f"error (line {line}, offset {exc.offset}): {exc}\n")
        else:
            self.err.write(f"error: {exc}\n")


def run_batch(session: Session, text: str, *, stop_on_error: bool = False) -> int:
    for offset, source in csql.split_script(text):
        try:
            session.handle(source)
        except Quit:
            return 0
        except CTableError as exc:
            session.report(exc, text, offset)
            if stop_on_error:
                return 1
    return 0


def _complete(buffer: str) -> tuple[list[str], str]:
    """Split ``buffer`` into finished statements and an unfinished remainder."""
    done, rest = [], ""
    for offset, piece in csql.split_script(buffer):
        if piece.startswith("\\") or piece.endswith(";"):
            done.append(piece)
        else:
            rest = buffer[offset:]
    return done, rest


def repl(session: Session, stdin: TextIO | None = None) -> int:
    stdin = stdin or sys.stdin
    interactive = stdin.isatty()
    buffer = ""
    while True:
        if interactive:
            session.out.write(CONTINUE if buffer.strip() else PROMPT)
            session.out.flush()
        line = stdin.readline()
        if not line:
            break
        buffer += line
        pieces, buffer = _complete(buffer)
        for piece in pieces:
            try:
                session.handle(piece)
            except Quit:
                return 0
            except CTableError as exc:
                session.report(exc, piece)
    if buffer.strip():
        try:
            session.handle(buffer)
        except CTableError as exc:
            session.report(exc, buffer)
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ctabledb", description="Conditional-table database console.")
    ap.add_argument("--db", help="database file to open on start")
    ap.add_argument("--batch", help="run a script file ('-' for standard input) and exit")
    ap.add_argument("--format", choices=("table", "csv"), default="table")
    ap.add_argument("--stop-on-error", action="store_true")
    ap.add_argument("--timing", action="store_true")
    args = ap.parse_args(argv)

    session = Session(fmt=args.format, timing=args.timing)
    if args.db:
        try:
            session.open(args.db)
        except CTableError as exc:
            session.report(exc)
            return 1
    if args.batch:
        if args.batch == "-":
            text = sys.stdin.read()
        else:
            with open(args.batch, encoding="utf-8") as fh:
                text = fh.read()
        return run_batch(session, text, stop_on_error=args.stop_on_error)
    return repl(session)


if __name__ == "__main__":
    raise SystemExit(main())
