"""Solving and exact model counting over CnfFormula.

Three ways to answer a query, picked by size and configuration: a built-in
enumerator over a projection (optionally driven by a vectorized semantic
evaluator instead of clause checks), an external DIMACS SAT solver, and an
external model counter.  Counts are exact integers everywhere; log2 is
derived at the edge.
"""

import math
import re
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cnf import CnfFormula, emit_dimacs
from .config import Config, load_config, resolve_counter, resolve_sat_solver


class BackendError(RuntimeError):
    pass


class SolverMissing(BackendError):
    pass


class SolverCrashed(BackendError):
    pass


class SolverTimeout(BackendError):
    pass


class CountParseError(BackendError):
    pass


class EnumerationLimit(BackendError):
    pass


@dataclass(frozen=True)
class SatResult:
    status: str                 # "SAT" | "UNSAT"
    assignment: dict | None    # var -> bool, full, when SAT
    backend: str
    elapsed: float

    @property
    def is_sat(self) -> bool:
        return self.status == "SAT"


@dataclass(frozen=True)
class CountResult:
    count: int
    backend: str
    elapsed: float

    @property
    def log2(self) -> float:
        return math.log2(self.count) if self.count > 0 else float("-inf")


# ---------------------------------------------------------------- internal


def _propagate(clauses, assign):
    """Unit propagation to fixpoint; None on conflict."""
    changed = True
    while changed:
        changed = False
        for cl in clauses:
            sat = False
            last = 0
            free = 0
            for lit in cl:
                v = lit if lit > 0 else -lit
                val = assign[v]
                if val < 0:
                    free += 1
                    last = lit
                elif val == (1 if lit > 0 else 0):
                    sat = True
                    break
            if sat:
                continue
            if free == 0:
                return None
            if free == 1:
                assign[abs(last)] = 1 if last > 0 else 0
                changed = True
    return assign


def _dpll(clauses, nvars, assign):
    """One model (var -> bool dict) or None.  Deterministic branching."""
    assign = _propagate(clauses, assign)
    if assign is None:
        return None
    branch = 0
    for v in range(1, nvars + 1):
        if assign[v] < 0:
            branch = v
            break
    if branch == 0:
        return {v: bool(assign[v]) for v in range(1, nvars + 1)}
    for val in (0, 1):
        trial = list(assign)
        trial[branch] = val
        got = _dpll(clauses, nvars, trial)
        if got is not None:
            return got
    return None


def _solve_internal(f: CnfFormula) -> SatResult:
    start = time.monotonic()
    limit = sys.getrecursionlimit()
    if f.var_count + 100 > limit:
        sys.setrecursionlimit(f.var_count + 200)
    try:
        model = _dpll(f.clauses, f.var_count, [-1] * (f.var_count + 1))
    finally:
        sys.setrecursionlimit(limit)
    status = "SAT" if model is not None else "UNSAT"
    return SatResult(status, model, "internal", time.monotonic() - start)


# ---------------------------------------------------------------- external


def _run(cmd, timeout, kind):
    try:
        return subprocess.run(cmd, capture_output=True, text=True,
                              timeout=timeout)
    except FileNotFoundError as e:
        raise SolverMissing(f"{kind} binary not found: {cmd[0]}") from e
    except subprocess.TimeoutExpired as e:
        raise SolverTimeout(f"{kind} timed out after {timeout}s") from e


def _solve_external(f: CnfFormula, solver: str, cfg: Config) -> SatResult:
    start = time.monotonic()
    with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as h:
        h.write(emit_dimacs(f))
        h.write("\n")
        path = h.name
    try:
        proc = _run([solver, *cfg.sat_flags, path], cfg.sat_timeout, "solver")
        status = None
        values = []
        for line in proc.stdout.splitlines():
            if line.startswith("s "):
                tail = line[2:].strip().upper()
                if tail.startswith("SATISFIABLE"):
                    status = "SAT"
                elif tail.startswith("UNSATISFIABLE"):
                    status = "UNSAT"
            elif line.startswith("v "):
                values.extend(int(tok) for tok in line[2:].split())
        if status is None:
            if proc.returncode == 10:
                status = "SAT"
            elif proc.returncode == 20:
                status = "UNSAT"
            else:
                raise SolverCrashed(
                    f"solver gave no verdict (rc={proc.returncode}): "
                    f"{proc.stderr.strip()[:200]}")
        assignment = None
        if status == "SAT":
            assignment = {v: False for v in range(1, f.var_count + 1)}
            for lit in values:
                if lit != 0 and abs(lit) <= f.var_count:
                    assignment[abs(lit)] = lit > 0
        return SatResult(status, assignment, Path(solver).name,
                         time.monotonic() - start)
    finally:
        Path(path).unlink(missing_ok=True)


def solve_sat(f: CnfFormula, config: Config | None = None,
              force_backend: str | None = None) -> SatResult:
    """SAT/UNSAT with a full assignment on SAT.

    force_backend: "internal" or "external" pins the choice; default is
    the configured external solver when one resolves, else internal.
    """
    cfg = config if config is not None else load_config()
    if force_backend == "internal":
        return _solve_internal(f)
    solver = resolve_sat_solver(cfg)
    if force_backend == "external":
        if solver is None:
            raise SolverMissing("no external SAT solver resolvable")
        return _solve_external(f, solver, cfg)
    if solver is not None:
        return _solve_external(f, solver, cfg)
    return _solve_internal(f)


# ---------------------------------------------------------------- counting


def _resolve_projection(f: CnfFormula, projection):
    if projection is None:
        return tuple(range(1, f.var_count + 1))
    if isinstance(projection, str):
        return tuple(f.groups[projection])
    return tuple(projection)


def _chunks(total, size):
    start = 0
    while start < total:
        end = min(start + size, total)
        yield start, end
        start = end


def _count_semantic(k, bulk_eval, jobs):
    total = 1 << k
    size = min(total, 1 << 20)
    spans = [(a, b) for a, b in _chunks(total, size)]

    def one(span):
        a, b = span
        return int(np.count_nonzero(
            bulk_eval(np.arange(a, b, dtype=np.uint64))))

    if jobs > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return sum(pool.map(one, spans))
    return sum(one(s) for s in spans)


def _extendable(clauses, nvars, assign):
    return _dpll(clauses, nvars, assign) is not None


def _count_clauses(f: CnfFormula, proj):
    k = len(proj)
    count = 0
    limit = sys.getrecursionlimit()
    if f.var_count + 100 > limit:
        sys.setrecursionlimit(f.var_count + 200)
    try:
        for idx in range(1 << k):
            assign = [-1] * (f.var_count + 1)
            for j, v in enumerate(proj):
                assign[v] = (idx >> j) & 1
            if _extendable(f.clauses, f.var_count, assign):
                count += 1
    finally:
        sys.setrecursionlimit(limit)
    return count


def _count_external(f: CnfFormula, proj, counter: str, cfg: Config):
    text = emit_dimacs(f)
    if cfg.counter_projected and proj is not None:
        show = " ".join(str(v) for v in proj)
        text += f"\nc p show {show} 0"
    with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as h:
        h.write(text)
        h.write("\n")
        path = h.name
    try:
        proc = _run([counter, *cfg.counter_flags, path],
                    cfg.counter_timeout, "counter")
        got = None
        for line in proc.stdout.splitlines():
            line = line.strip()
            m = re.match(r"^s mc (\d+)$", line)
            if m:
                return int(m.group(1))
            m = re.match(r"^c s exact arb int (\d+)$", line)
            if m:
                return int(m.group(1))
            if re.fullmatch(r"\d+", line):
                got = int(line)
        if got is None:
            raise CountParseError(
                f"no count in counter output: {proc.stdout.strip()[:200]!r}")
        return got
    finally:
        Path(path).unlink(missing_ok=True)


def count_models(f: CnfFormula, projection=None, config: Config | None = None,
                 bulk_eval=None, force_backend: str | None = None
                 ) -> CountResult:
    """Exact number of satisfying assignments restricted to the projection.

    projection: group name, variable sequence, or None for all variables.
    bulk_eval, when given, maps a uint64 array of packed projection values
    (bit j = value of projection[j]) to a boolean array and replaces clause
    checks — the semantic fast path.  External counters count unprojected
    models, which matches the projected count only when the remaining
    variables are functionally determined (true for value models).
    """
    cfg = config if config is not None else load_config()
    proj = _resolve_projection(f, projection)
    k = len(proj)
    within = (1 << k) <= cfg.enum_threshold
    start = time.monotonic()

    if force_backend == "external":
        counter = resolve_counter(cfg)
        if counter is None:
            raise SolverMissing("no external model counter resolvable")
        n = _count_external(f, proj, counter, cfg)
        return CountResult(n, Path(counter).name, time.monotonic() - start)
    if force_backend == "internal" and not within:
        raise EnumerationLimit(
            f"projection space 2^{k} exceeds threshold {cfg.enum_threshold}")

    if within and bulk_eval is not None:
        n = _count_semantic(k, bulk_eval, cfg.jobs)
        return CountResult(n, "internal-semantic", time.monotonic() - start)
    if force_backend != "internal":
        counter = resolve_counter(cfg)
        if counter is not None and (not within or k > 20):
            n = _count_external(f, proj, counter, cfg)
            return CountResult(n, Path(counter).name,
                               time.monotonic() - start)
    if not within:
        raise EnumerationLimit(
            f"projection space 2^{k} exceeds threshold {cfg.enum_threshold} "
            "and no external counter is configured")
    n = _count_clauses(f, proj)
    return CountResult(n, "internal", time.monotonic() - start)
