"""Census-style synthetic c-tables with noise, and the benchmark runner.

Run ``python -m ctabledb.benchgen --sizes 10000,100000 --noise 10`` to print a
CSV report for the two census queries.
"""

from __future__ import annotations

import argparse
import csv
import gc
import io
import math
import statistics
import sys
import time
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from . import csql
from .ctable import CTable, CTuple, Schema
from .engine import Database, Engine
from .errors import CapacityError

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MAX_VAR_ID = (1 << 63) - 1

CENSUS_COLUMNS = ("STATEFIP", "OCC1990", "CITIZEN", "SUBFAM", "VETSTAT")
QUERIES = {
    "Q1": "SELECT * FROM R WHERE VETSTAT = 8 AND CITIZEN = 9",
    "Q2": "SELECT STATEFIP,OCC1990,CITIZEN,SUBFAM FROM R "
    "WHERE STATEFIP = OCC1990 AND CITIZEN = 1 AND SUBFAM > 4",
}


def prng_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns the new state and the 64-bit output."""
    state = (state + GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class SplitMix64:
    """splitmix64 stream with a vectorised bulk draw.

    Output ``i`` only depends on ``seed + (i + 1) * GAMMA``, so :meth:`block`
    computes a run of outputs at once and stays in lockstep with :meth:`next`.
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64
        self._buf: list[int] = []
        self._pos = 0

    def next(self) -> int:
        if self._pos < len(self._buf):
            value = self._buf[self._pos]
            self._pos += 1
            return value
        self.state, value = prng_next(self.state)
        return value

    def block(self, n: int) -> np.ndarray:
        if self._pos < len(self._buf):
            raise RuntimeError("block() while buffered draws are pending")
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * GAMMA) & MASK64
        return z

    def buffered(self, n: int) -> None:
        """Pre-draw ``n`` values in bulk; :meth:`next` consumes them in order."""
        self._buf = self.block(n).tolist()
        self._pos = 0

    def below(self, bound: int) -> int:
        return self.next() % bound


@dataclass(frozen=True)
class NoiseSpec:
    rows: int
    cols: int = len(CENSUS_COLUMNS)
    max_value: int = 10
    noise_pct: float = 10.0
    seed: int = 0
    min_domain: int = 2
    max_domain: int = 8
    first_var: int = 1
    table: str = "R"

    def __post_init__(self):
        if self.rows < 0 or self.cols < 1:
            raise ValueError("need rows >= 0 and cols >= 1")
        if not 0 <= self.noise_pct <= 100:
            raise ValueError("noise_pct must lie in [0, 100]")
        if not 1 <= self.min_domain <= self.max_domain:
            raise ValueError("bad domain size range")
        if self.max_value < self.max_domain:
            raise ValueError("max_value must be at least max_domain to draw distinct values")

    @property
    def columns(self) -> tuple[str, ...]:
        base = CENSUS_COLUMNS[: self.cols]
        return base + tuple(f"C{i}" for i in range(len(base) + 1, self.cols + 1))

    @property
    def noisy_cells(self) -> int:
        return math.floor(self.noise_pct / 100 * self.rows * self.cols + 0.5)


def gen_census(spec: NoiseSpec) -> tuple[CTable, dict[int, tuple[int, ...]]]:
    """Uniform table with ``noisy_cells`` cells replaced by fresh variables.

    Draw order: one value per cell (row-major), then a partial Fisher-Yates
    shuffle choosing the noisy cells, then per chosen cell its domain size
    followed by rejection-sampled distinct domain values.
    """
    n = spec.rows * spec.cols
    m = spec.noisy_cells
    if m and spec.first_var + m - 1 > MAX_VAR_ID:
        raise CapacityError(f"{m} fresh variables starting at x{spec.first_var} overflow the id space")
    rng = SplitMix64(spec.seed)

    cells = (rng.block(n) % np.uint64(spec.max_value) + np.uint64(1)).astype(np.int64)
    flat = cells.tolist()

    chosen = []
    if m:
        draws = rng.block(m).tolist()
        moved: dict[int, int] = {}
        for i in range(m):
            j = i + draws[i] % (n - i)
            picked = moved.get(j, j)
            moved[j] = moved.get(i, i)
            chosen.append(picked)

    domains: dict[int, tuple[int, ...]] = {}
    width = spec.max_domain - spec.min_domain + 1
    rng.buffered(m * (spec.max_domain + 2) + 64)
    for offset, cell in enumerate(chosen):
        k = spec.first_var + offset
        size = spec.min_domain + rng.below(width)
        values: list[int] = []
        while len(values) < size:
            c = rng.below(spec.max_value) + 1
            if c not in values:
                values.append(c)
        domains[k] = tuple(sorted(values))
        flat[cell] = -k

    cols = spec.cols
    rows = [CTuple(tuple(flat[r * cols : (r + 1) * cols])) for r in range(spec.rows)]
    return CTable(Schema(spec.table, spec.columns), tuple(rows)), domains


def build_database(spec: NoiseSpec) -> Database:
    table, domains = gen_census(spec)
    db = Database()
    for k, dom in domains.items():
        db.declare(k, dom)
    db.tables[table.schema.name.lower()] = table
    return db


@dataclass(frozen=True)
class BenchRow:
    query_id: str
    rows: int
    noise_pct: float
    median_ms: float
    output_rows: int
    pruned_rows: int


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    FIELDS = ("query_id", "rows", "noise_pct", "median_ms", "output_rows", "pruned_rows")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.FIELDS)
        for r in self.rows:
            w.writerow(
                [r.query_id, r.rows, f"{r.noise_pct:g}", f"{r.median_ms:.3f}", r.output_rows, r.pruned_rows]
            )
        return buf.getvalue()

    def lookup(self, query_id: str, rows: int) -> BenchRow:
        for r in self.rows:
            if r.query_id == query_id and r.rows == rows:
                return r
        raise KeyError((query_id, rows))


def time_query(engine: Engine, sel: csql.Select, repetitions: int):
    """Median wall time (ms) over ``repetitions`` runs and the last result.

    The cyclic collector is paused while timing, as ``timeit`` does; its
    passes over a large live heap would otherwise dominate big tables.
    """
    times = []
    result = None
    enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repetitions):
            t0 = time.perf_counter()
            result = engine.query(sel)
            times.append((time.perf_counter() - t0) * 1000.0)
    finally:
        if enabled:
            gc.enable()
    return statistics.median(times), result


def run_bench(
    spec: NoiseSpec,
    queries: Mapping[str, str] = QUERIES,
    sizes: Iterable[int] = (10_000, 100_000, 1_000_000),
    repetitions: int = 3,
    progress=None,
) -> BenchReport:
    """Generate a table per size, then time every query on it."""
    parsed = {qid: csql.parse(text) for qid, text in queries.items()}
    report = BenchReport()
    for size in sizes:
        db = build_database(replace(spec, rows=size))
        engine = Engine(db)
        for qid, sel in parsed.items():
            median_ms, result = time_query(engine, sel, repetitions)
            row = BenchRow(
                qid, size, spec.noise_pct, median_ms, len(result.table), result.stats.pruned
            )
            report.rows.append(row)
            if progress is not None:
                progress(row)
        del db, engine
    return report


def main(argv: Sequence[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="ctabledb-bench", description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="10000,100000,1000000")
    ap.add_argument("--noise", type=float, default=10.0, help="percent of noisy cells")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-value", type=int, default=10)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--out", help="write the CSV here instead of stdout")
    args = ap.parse_args(argv)

    sizes = [int(s) for s in args.sizes.split(",") if s]
    spec = NoiseSpec(rows=0, noise_pct=args.noise, seed=args.seed, max_value=args.max_value)
    report = run_bench(
        spec,
        sizes=sizes,
        repetitions=args.reps,
        progress=lambda r: print(
            f"{r.query_id} rows={r.rows} {r.median_ms:.1f} ms out={r.output_rows} pruned={r.pruned_rows}",
            file=sys.stderr,
        ),
    )
    text = report.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
