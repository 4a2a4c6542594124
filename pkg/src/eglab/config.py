"""Experiment configuration files.

Grammar (INI, format version 1)::

    [experiment]
    id = exp1                  # used in output file names
    problem = minimax          # or linear-ne
    p1 = 50                    # minimax block sizes
    p2 = 50
    d_low = 0.1                # eigenvalue clip of the diagonal blocks
    rho = 0.001                # optional; defaults to |d_low| when d_low <= 0
    dim = 50                   # linear-ne only
    kind = spd                 # linear-ne only: spd, skew-plus-spd, indefinite-symmetric
    mu = 0.1                   # linear-ne only
    seeds = 0-9                # comma-separated integers and inclusive ranges
    max_iter = 5000
    x0 = 0.01                  # constant raw start value in every coordinate
    report_eta = own           # step used inside the FB residual; "own" or a number
    lyapunov = no              # evaluate potentials along the trace
    jobs = 1

    [scheme GAEGplus-tuned]    # one section per run family; the label names outputs
    scheme = GAEGplus          # optional when the label is itself a scheme name
    rule = current-gradient    # or past-gradient / affine (with alpha, alpha_hat, m)
    regime = aeg
    eta = 0.0625
    r = 10
    validate = yes             # "no" runs outside the certified regime

Numbers may be given as expressions of ``L`` and ``rho`` (``eta = 0.85/L``),
evaluated per instance.  Every schedule is constructed for every seed while
parsing, so regime violations surface before any run starts.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .directions import AFFINE, RULE_KINDS, DirectionRule
from .operators import ConfigError, ProblemInstance, UsageError
from .problems import LINEAR_KINDS, LinearNESpec, MinimaxSpec, gen_linear_ne, gen_quadratic_minimax
from .schedules import SCHEMES, Schedule, make_schedule

FORMAT_VERSION = 1

EXPERIMENT_KEYS = {
    "id", "problem", "p1", "p2", "d_low", "rho", "noise", "dim", "kind", "mu", "seeds",
    "max_iter", "x0", "report_eta", "lyapunov", "jobs", "out",
}

SCHEDULE_KEYS = {
    "GEAG": {"eta", "nu"},
    "GFEG": {"eta", "beta", "nu"},
    "GFEGplus": {"regime", "eta", "gamma", "mu", "r"},
    "GAEG": {"regime", "lam", "r"},
    "GAEGplus": {"regime", "eta", "beta", "r", "mu", "eps", "eps_hat", "Delta", "t0"},
}
RULE_KEYS = {"rule", "alpha", "alpha_hat", "m"}
ENTRY_KEYS = {"scheme", "validate"} | RULE_KEYS


# ---------------------------------------------------------------------------
# small expression evaluator for numeric values


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt, "min": min, "max": max}


def eval_number(text: str, names: Optional[dict] = None) -> float:
    """Evaluate an arithmetic expression over numbers, ``L``, ``rho`` and ``sqrt/min/max``."""
    names = names or {}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Name):
            if node.id in names:
                return float(names[node.id])
            if node.id in ("inf", "infinity"):
                return math.inf
            raise ValueError(f"unknown name {node.id!r}")
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            return float(_FUNCS[node.func.id](*[ev(a) for a in node.args]))
        raise ValueError("unsupported expression")

    return ev(ast.parse(text.strip(), mode="eval"))


def parse_int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"(-?\d+)\s*-\s*(-?\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    return out


# ---------------------------------------------------------------------------
# config objects


@dataclass(frozen=True)
class SchemeEntry:
    label: str
    scheme: str
    rule: DirectionRule
    overrides: tuple  # ((key, expression), ...)
    validate: bool = True

    def schedule(self, problem: ProblemInstance) -> Schedule:
        names = {"L": problem.lipschitz_L, "rho": problem.rho}
        kw = {}
        for key, expr in self.overrides:
            kw[key] = expr if key == "regime" else eval_number(expr, names)
        kappa, kappa_hat = self.rule.constants
        return make_schedule(self.scheme, problem.lipschitz_L, problem.rho, kappa, kappa_hat,
                             validate=self.validate, **kw)


@dataclass(frozen=True)
class ExperimentConfig:
    exp_id: str
    problem: str
    problem_params: tuple  # ((key, value), ...)
    seeds: tuple
    max_iter: int
    entries: tuple
    x0: float = 0.01
    report_eta: Union[str, float] = "own"
    lyapunov: bool = False
    jobs: int = 1
    out: Optional[str] = None
    source: Optional[str] = None

    def params(self) -> dict:
        return dict(self.problem_params)

    def instance(self, seed: int) -> ProblemInstance:
        p = self.params()
        if self.problem == "minimax":
            desc = MinimaxSpec(int(p.get("p1", 50)), int(p.get("p2", 50)), float(p.get("d_low", 0.1)), seed,
                               noise=float(p.get("noise", 1.0)),
                               rho=None if p.get("rho") is None else float(p["rho"]))
            return gen_quadratic_minimax(desc)
        desc = LinearNESpec(int(p.get("dim", 50)), seed, str(p.get("kind", "spd")), float(p.get("mu", 0.1)))
        return gen_linear_ne(desc)

    def start(self, problem: ProblemInstance) -> np.ndarray:
        return np.full(problem.dim, float(self.x0))

    def with_seed_offset(self, offset: int) -> "ExperimentConfig":
        return replace(self, seeds=tuple(s + offset for s in self.seeds))

    def runs(self):
        """All ``(entry_index, seed)`` pairs in a fixed order."""
        return [(i, s) for i in range(len(self.entries)) for s in self.seeds]


# ---------------------------------------------------------------------------
# parsing


def _key_lines(text: str) -> dict:
    """Map ``(section, key)`` to its 1-based line number."""
    lines, section = {}, None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = no
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", line)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), no)
    return lines


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config_text(text: str, source: str = "<string>", check: bool = True) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str.lower
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: malformed config: {exc}") from None
    lines = _key_lines(text)

    def where(section, key=None):
        no = lines.get((section, key))
        return f"{source}:{no}" if no else source

    def fail(section, key, msg):
        raise ConfigError(f"{where(section, key)}: {msg}")

    if not parser.has_section("experiment"):
        raise ConfigError(f"{source}: missing [experiment] section")
    exp = parser["experiment"]
    for key in exp:
        if key not in EXPERIMENT_KEYS:
            fail("experiment", key, f"unknown key {key!r} in [experiment]")

    def get(key, conv, default=None, required=False):
        if key not in exp:
            if required:
                fail("experiment", None, f"missing required key {key!r}")
            return default
        try:
            return conv(exp[key])
        except (ValueError, SyntaxError) as e:
            fail("experiment", key, f"bad value for {key!r}: {e}")

    problem = get("problem", lambda s: s.strip(), "minimax")
    if problem not in ("minimax", "linear-ne"):
        fail("experiment", "problem", f"problem must be 'minimax' or 'linear-ne', got {problem!r}")
    params = {}
    if problem == "minimax":
        for key in ("p1", "p2"):
            params[key] = get(key, int, 50)
        params["d_low"] = get("d_low", float, 0.1)
        params["noise"] = get("noise", float, 1.0)
        params["rho"] = get("rho", float, None)
        for key in ("dim", "kind", "mu"):
            if key in exp:
                fail("experiment", key, f"key {key!r} only applies to linear-ne problems")
    else:
        params["dim"] = get("dim", int, 50)
        params["kind"] = get("kind", lambda s: s.strip(), "spd")
        params["mu"] = get("mu", float, 0.1)
        if params["kind"] not in LINEAR_KINDS:
            fail("experiment", "kind", f"kind must be one of {LINEAR_KINDS}")
        for key in ("p1", "p2", "d_low", "rho", "noise"):
            if key in exp:
                fail("experiment", key, f"key {key!r} only applies to minimax problems")
    seeds = get("seeds", parse_int_list, required=True)
    if not seeds:
        fail("experiment", "seeds", "seeds must be nonempty")
    max_iter = get("max_iter", int, required=True)
    if max_iter < 0:
        fail("experiment", "max_iter", "max_iter must be nonnegative")
    report = get("report_eta", lambda s: s.strip(), "own")
    if report != "own":
        try:
            report = float(report)
        except ValueError:
            fail("experiment", "report_eta", "report_eta must be 'own' or a positive number")
        if not report > 0:
            fail("experiment", "report_eta", "report_eta must be positive")
    jobs = get("jobs", int, 1)
    if jobs < 1:
        fail("experiment", "jobs", "jobs must be at least 1")

    entries = []
    for name in parser.sections():
        if name == "experiment":
            continue
        m = re.fullmatch(r"scheme\s+(\S+)", name)
        if not m:
            fail(name, None, f"unknown section [{name}]")
        label = m.group(1)
        sec = parser[name]
        scheme = sec.get("scheme", label).strip()
        if scheme not in SCHEMES:
            fail(name, "scheme" if "scheme" in sec else None,
                 f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")
        allowed = ENTRY_KEYS | SCHEDULE_KEYS[scheme]
        for key in sec:
            if key not in allowed:
                fail(name, key, f"unknown key {key!r} for scheme {scheme}")
        kind = sec.get("rule", "current-gradient").strip()
        if kind not in RULE_KINDS:
            fail(name, "rule", f"rule must be one of {RULE_KINDS}")
        try:
            rule = DirectionRule(kind, float(sec.get("alpha", 0)), float(sec.get("alpha_hat", 0)),
                                 float(sec.get("m", 1)), scheme if kind == AFFINE else None)
            validate = _bool(sec.get("validate", "yes"))
        except (ValueError, UsageError) as e:
            fail(name, None, str(e))
        overrides = tuple((k, sec[k].strip()) for k in sec if k in SCHEDULE_KEYS[scheme])
        for key, expr in overrides:
            if key != "regime":
                try:
                    eval_number(expr, {"L": 1.0, "rho": 0.0})
                except (ValueError, SyntaxError, ZeroDivisionError) as e:
                    fail(name, key, f"bad value for {key!r}: {e}")
        entries.append(SchemeEntry(label, scheme, rule, overrides, validate))
    if not entries:
        raise ConfigError(f"{source}: no [scheme ...] sections")
    if len({e.label for e in entries}) != len(entries):
        raise ConfigError(f"{source}: duplicate scheme labels")

    cfg = ExperimentConfig(
        exp_id=get("id", lambda s: s.strip(), "experiment"),
        problem=problem,
        problem_params=tuple(sorted(params.items())),
        seeds=tuple(seeds),
        max_iter=max_iter,
        entries=tuple(entries),
        x0=get("x0", float, 0.01),
        report_eta=report,
        lyapunov=get("lyapunov", _bool, False),
        jobs=jobs,
        out=get("out", lambda s: s.strip(), None),
        source=source,
    )
    if check:
        check_config(cfg, lambda entry: where(f"scheme {entry.label}"))
    return cfg


def check_config(cfg: ExperimentConfig, locate=lambda entry: "") -> None:
    """Build every schedule for every seed; raise :class:`ConfigError` on the first violation."""
    for seed in cfg.seeds:
        try:
            problem = cfg.instance(seed)
        except UsageError as e:
            raise ConfigError(f"{cfg.source}: seed {seed}: {e}") from None
        for entry in cfg.entries:
            try:
                entry.schedule(problem)
            except (ConfigError, UsageError, TypeError) as e:
                prefix = locate(entry) or cfg.source
                raise ConfigError(f"{prefix}: [{entry.label}] seed {seed} "
                                  f"(L={problem.lipschitz_L:.6g}, rho={problem.rho:.6g}): {e}") from None


def parse_config(path: Union[str, Path], check: bool = True) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), source=str(path), check=check)
