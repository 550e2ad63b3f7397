"""Runtime configuration: backend binaries, limits, budgets.

Resolution order for every field: explicit Config > environment variable >
config file (ARXTRAIL_CONFIG, JSON) > built-in default.  Solver and counter
paths may also be probed from PATH and the vendored tools/ tree, so a fresh
checkout works without any configuration.
"""

import json
import os
import shlex
import shutil
from dataclasses import dataclass, replace
from pathlib import Path

# probed in order when no explicit path is given
SAT_PROBE = ("kissat", "cadical", "cryptominisat5", "glucose", "minisat",
             "satbridge")
COUNTER_PROBE = ("ganak", "sharpSAT", "d4")

_VENDORED_SAT = Path(__file__).resolve().parents[2] / "tools" / "satbridge" \
    / "target" / "release" / "satbridge"


@dataclass(frozen=True)
class Config:
    sat_solver: str | None = None
    sat_flags: tuple = ()
    counter: str | None = None
    counter_flags: tuple = ()
    counter_projected: bool = False   # emit a "c p show" projection line
    enum_threshold: int = 1 << 26     # max assignments internal enumeration accepts
    jobs: int = 1
    sat_timeout: float | None = None
    counter_timeout: float | None = None


def _env_float(env, key):
    v = env.get(key)
    return float(v) if v else None


def load_config(path=None, env=None) -> Config:
    env = os.environ if env is None else env
    data = {}
    cfg_path = path or env.get("ARXTRAIL_CONFIG")
    if cfg_path:
        data = json.loads(Path(cfg_path).read_text())
    cfg = Config(
        sat_solver=data.get("sat_solver"),
        sat_flags=tuple(data.get("sat_flags", ())),
        counter=data.get("counter"),
        counter_flags=tuple(data.get("counter_flags", ())),
        counter_projected=bool(data.get("counter_projected", False)),
        enum_threshold=int(data.get("enum_threshold", 1 << 26)),
        jobs=int(data.get("jobs", 1)),
        sat_timeout=data.get("sat_timeout"),
        counter_timeout=data.get("counter_timeout"),
    )
    overrides = {}
    if env.get("ARXTRAIL_SAT_SOLVER"):
        overrides["sat_solver"] = env["ARXTRAIL_SAT_SOLVER"]
    if env.get("ARXTRAIL_SAT_FLAGS"):
        overrides["sat_flags"] = tuple(shlex.split(env["ARXTRAIL_SAT_FLAGS"]))
    if env.get("ARXTRAIL_COUNTER"):
        overrides["counter"] = env["ARXTRAIL_COUNTER"]
    if env.get("ARXTRAIL_COUNTER_FLAGS"):
        overrides["counter_flags"] = tuple(
            shlex.split(env["ARXTRAIL_COUNTER_FLAGS"]))
    if env.get("ARXTRAIL_ENUM_THRESHOLD"):
        overrides["enum_threshold"] = int(env["ARXTRAIL_ENUM_THRESHOLD"])
    if env.get("ARXTRAIL_JOBS"):
        overrides["jobs"] = int(env["ARXTRAIL_JOBS"])
    t = _env_float(env, "ARXTRAIL_SAT_TIMEOUT")
    if t is not None:
        overrides["sat_timeout"] = t
    t = _env_float(env, "ARXTRAIL_COUNTER_TIMEOUT")
    if t is not None:
        overrides["counter_timeout"] = t
    return replace(cfg, **overrides) if overrides else cfg


def _usable(path) -> bool:
    return bool(path) and os.path.isfile(path) and os.access(path, os.X_OK)


def resolve_sat_solver(cfg: Config) -> str | None:
    if cfg.sat_solver:
        p = os.path.expanduser(cfg.sat_solver)
        return p if _usable(p) else None
    for name in SAT_PROBE:
        hit = shutil.which(name)
        if hit:
            return hit
    if _usable(_VENDORED_SAT):
        return str(_VENDORED_SAT)
    return None


def resolve_counter(cfg: Config) -> str | None:
    if cfg.counter:
        p = os.path.expanduser(cfg.counter)
        return p if _usable(p) else None
    for name in COUNTER_PROBE:
        hit = shutil.which(name)
        if hit:
            return hit
    return None
