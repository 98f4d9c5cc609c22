"""Experiment configuration: YAML parsing, defaults and validation.

Every problem in a config file is reported at once; unknown keys are errors.
See the README for the full schema.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import yaml

from .baselines import SafeBoSettings
from .exceptions import ConfigError, InvalidArgumentError
from .gp import RbfKernel
from .optimizer import GridSolver, MultistartSolver, VaboConfig
from .problems import get_problem, list_problems
from .violation import ViolationCost

__all__ = ["ExperimentConfig", "validate_config", "load_config", "ALGORITHMS"]

ALGORITHMS = ("vabo", "cbo", "safe_bo")

_TOP_KEYS = {
    "problem", "algorithms", "algorithm", "budgets", "iterations", "delta", "beta0",
    "seeds", "cost", "solver", "safe_bo", "initial", "gp", "noise", "output",
}


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "vcs"
    algorithms: tuple = ALGORITHMS
    budgets: tuple = (0.0, 10.0, 20.0)
    iterations: int = 20
    delta: float = 0.05
    beta0: object = 1.0
    seeds: tuple = tuple(range(10))
    cost: ViolationCost = field(default_factory=lambda: ViolationCost("quadratic"))
    solver: object = None
    safe_bo: SafeBoSettings = field(default_factory=SafeBoSettings)
    initial_points: object = None
    initial_random: int = 2
    noise_variance: float = 1e-6
    refit_hyperparameters: bool = False
    objective_kernel: RbfKernel = None
    constraint_kernels: tuple = None
    objective_noise_sd: float = 0.0
    constraint_noise_sd: float = 0.0
    output: str = None

    def run_config(self, budget, seed, n_constraints):
        """The :class:`VaboConfig` of one campaign cell."""
        return VaboConfig(
            max_iterations=self.iterations,
            delta=self.delta,
            beta0=self.beta0,
            budgets=tuple(budget for _ in range(n_constraints)),
            cost_fns=tuple(self.cost for _ in range(n_constraints)),
            initial_safe_points=self.initial_points,
            n_random_initial=self.initial_random,
            solver=self.solver,
            seed=seed,
            objective_kernel=self.objective_kernel,
            constraint_kernels=self.constraint_kernels,
            noise_variance=self.noise_variance,
            refit_hyperparameters=self.refit_hyperparameters,
        )


def _yaml_error(exc):
    mark = getattr(exc, "problem_mark", None)
    problem = getattr(exc, "problem", None) or str(exc)
    if mark is not None:
        return f"syntax error at line {mark.line + 1}, column {mark.column + 1}: {problem}"
    return f"syntax error: {problem}"


class _Checker:
    def __init__(self):
        self.errors = []

    def unknown(self, mapping, allowed, where):
        for key in mapping:
            if key not in allowed:
                self.errors.append(f"{where}{key}: unknown key")

    def number(self, value, name, lo=-math.inf, hi=math.inf, lo_open=False, hi_open=False,
               allow_inf=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            if allow_inf and isinstance(value, str) and value.strip().lower() in ("inf", ".inf", "infinity"):
                return math.inf
            self.errors.append(f"{name}: expected a number, got {value!r}")
            return None
        value = float(value)
        if math.isnan(value) or (math.isinf(value) and not allow_inf):
            self.errors.append(f"{name}: must be finite")
            return None
        below = value <= lo if lo_open else value < lo
        above = value >= hi if hi_open else value > hi
        if below or above:
            lb = "(" if lo_open else "["
            rb = ")" if hi_open else "]"
            self.errors.append(f"{name}: {value:g} outside {lb}{lo:g}, {hi:g}{rb}")
            return None
        return value

    def integer(self, value, name, lo=None):
        if isinstance(value, bool) or not isinstance(value, int):
            self.errors.append(f"{name}: expected an integer, got {value!r}")
            return None
        if lo is not None and value < lo:
            self.errors.append(f"{name}: must be >= {lo}")
            return None
        return value

    def mapping(self, value, name):
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.errors.append(f"{name}: expected a mapping")
            return {}
        return value


def _kernel(chk, raw, name, dim):
    raw = chk.mapping(raw, name)
    chk.unknown(raw, {"signal_variance", "lengthscales"}, f"{name}.")
    sv = chk.number(raw.get("signal_variance"), f"{name}.signal_variance", lo=0, lo_open=True)
    ls = raw.get("lengthscales")
    if not isinstance(ls, list) or (dim is not None and len(ls) != dim):
        chk.errors.append(f"{name}.lengthscales: expected a list of {dim} positive numbers")
        return None
    ls = [chk.number(v, f"{name}.lengthscales", lo=0, lo_open=True) for v in ls]
    if sv is None or any(v is None for v in ls):
        return None
    return RbfKernel(sv, tuple(ls))


def validate_config(text):
    """Parse and validate a YAML experiment config.

    Returns an :class:`ExperimentConfig`; raises :class:`ConfigError` listing
    every problem found. An empty document yields the defaults.
    """
    try:
        raw = yaml.safe_load(text) if text is not None else None
    except yaml.YAMLError as exc:
        raise ConfigError(_yaml_error(exc)) from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top level of the config must be a mapping")

    chk = _Checker()
    chk.unknown(raw, _TOP_KEYS, "")
    kw = {}

    problem = None
    if "problem" in raw:
        if not isinstance(raw["problem"], str) or raw["problem"] not in list_problems():
            chk.errors.append(
                f"problem: unknown problem {raw['problem']!r}; known: {', '.join(list_problems())}"
            )
        else:
            kw["problem"] = raw["problem"]
    try:
        problem = get_problem(kw.get("problem", ExperimentConfig.problem))
    except InvalidArgumentError:
        problem = None
    dim = problem.dimension if problem is not None else None
    n_con = problem.n_constraints if problem is not None else None

    if "algorithm" in raw and "algorithms" in raw:
        chk.errors.append("algorithm: give either 'algorithm' or 'algorithms', not both")
    algs = raw.get("algorithms", raw.get("algorithm"))
    if algs is not None:
        algs = [algs] if isinstance(algs, str) else algs
        if not isinstance(algs, list) or not algs:
            chk.errors.append("algorithms: expected a non-empty list")
        else:
            bad = [a for a in algs if a not in ALGORITHMS]
            if bad:
                chk.errors.append(f"algorithms: unknown {bad}; choose from {list(ALGORITHMS)}")
            else:
                kw["algorithms"] = tuple(dict.fromkeys(algs))

    if "budgets" in raw:
        budgets = raw["budgets"]
        budgets = [budgets] if not isinstance(budgets, list) else budgets
        # budgets must be nonnegative; .inf is the unlimited-budget sentinel
        vals = [chk.number(b, "budgets", lo=0, allow_inf=True) for b in budgets]
        if not budgets:
            chk.errors.append("budgets: expected a non-empty list")
        elif all(v is not None for v in vals):
            kw["budgets"] = tuple(dict.fromkeys(vals))

    if "iterations" in raw:
        v = chk.integer(raw["iterations"], "iterations", lo=1)
        if v is not None:
            kw["iterations"] = v
    if "delta" in raw:
        v = chk.number(raw["delta"], "delta", lo=0, hi=1, lo_open=True, hi_open=True)
        if v is not None:
            kw["delta"] = v
    if "beta0" in raw:
        b = raw["beta0"]
        if isinstance(b, list):
            vals = [chk.number(v, "beta0", lo=0, hi=1, lo_open=True) for v in b]
            if n_con is not None and len(vals) != n_con:
                chk.errors.append(f"beta0: expected a scalar or {n_con} values")
            elif all(v is not None for v in vals):
                kw["beta0"] = tuple(vals)
        else:
            v = chk.number(b, "beta0", lo=0, hi=1, lo_open=True)
            if v is not None:
                kw["beta0"] = v

    if "seeds" in raw:
        s = raw["seeds"]
        if isinstance(s, list):
            vals = [chk.integer(v, "seeds", lo=0) for v in s]
            if not s:
                chk.errors.append("seeds: expected a count or a non-empty list")
            elif all(v is not None for v in vals):
                kw["seeds"] = tuple(dict.fromkeys(vals))
        else:
            v = chk.integer(s, "seeds", lo=1)
            if v is not None:
                kw["seeds"] = tuple(range(v))

    if "cost" in raw:
        cost = chk.mapping(raw["cost"], "cost")
        chk.unknown(cost, {"kind", "scale", "breakpoints", "values"}, "cost.")
        kind = cost.get("kind", "quadratic")
        try:
            if kind == "table":
                kw["cost"] = ViolationCost("table", breakpoints=tuple(cost.get("breakpoints", ())),
                                           values=tuple(cost.get("values", ())))
            else:
                scale = chk.number(cost.get("scale", 1.0), "cost.scale", lo=0, lo_open=True)
                if scale is not None:
                    kw["cost"] = ViolationCost(kind, scale)
        except (InvalidArgumentError, TypeError, ValueError) as exc:
            chk.errors.append(f"cost: {exc}")

    if "solver" in raw:
        sol = chk.mapping(raw["solver"], "solver")
        kind = sol.get("kind", "grid")
        if kind == "grid":
            chk.unknown(sol, {"kind", "resolution"}, "solver.")
            r = sol.get("resolution", 25)
            if isinstance(r, list):
                rs = [chk.integer(v, "solver.resolution", lo=2) for v in r]
                if dim is not None and len(rs) != dim:
                    chk.errors.append(f"solver.resolution: expected {dim} values")
                elif all(v is not None for v in rs):
                    kw["solver"] = GridSolver(tuple(rs))
            else:
                v = chk.integer(r, "solver.resolution", lo=2)
                if v is not None:
                    kw["solver"] = GridSolver(v)
        elif kind == "multistart":
            chk.unknown(sol, {"kind", "n_starts", "local_budget"}, "solver.")
            n = chk.integer(sol.get("n_starts", 20), "solver.n_starts", lo=1)
            b = chk.integer(sol.get("local_budget", 200), "solver.local_budget", lo=0)
            if n is not None and b is not None:
                kw["solver"] = MultistartSolver(n, b)
        else:
            chk.errors.append(f"solver.kind: unknown solver {kind!r}; choose grid or multistart")

    if "safe_bo" in raw:
        sb = chk.mapping(raw["safe_bo"], "safe_bo")
        chk.unknown(sb, {"confidence_multiplier"}, "safe_bo.")
        m = chk.number(sb.get("confidence_multiplier", 2.0), "safe_bo.confidence_multiplier",
                       lo=0, lo_open=True, allow_inf=True)
        if m is not None:
            kw["safe_bo"] = SafeBoSettings(m)

    if "initial" in raw:
        ini = chk.mapping(raw["initial"], "initial")
        chk.unknown(ini, {"points", "random"}, "initial.")
        pts = ini.get("points")
        if pts is not None:
            if (not isinstance(pts, list) or not pts
                    or not all(isinstance(p, list) and (dim is None or len(p) == dim) for p in pts)):
                chk.errors.append(f"initial.points: expected a non-empty list of {dim}-element lists")
            else:
                flat = [chk.number(v, "initial.points") for p in pts for v in p]
                if all(v is not None for v in flat):
                    if problem is not None:
                        for p in pts:
                            if any(not lo <= v <= hi for v, (lo, hi) in zip(p, problem.domain)):
                                chk.errors.append(f"initial.points: {p} lies outside the domain")
                    kw["initial_points"] = tuple(tuple(float(v) for v in p) for p in pts)
        if "random" in ini:
            v = chk.integer(ini["random"], "initial.random", lo=0)
            if v is not None:
                kw["initial_random"] = v

    if "gp" in raw:
        gp = chk.mapping(raw["gp"], "gp")
        chk.unknown(gp, {"noise_variance", "refit", "objective", "constraints"}, "gp.")
        if "noise_variance" in gp:
            v = chk.number(gp["noise_variance"], "gp.noise_variance", lo=0)
            if v is not None:
                kw["noise_variance"] = v
        if "refit" in gp:
            if not isinstance(gp["refit"], bool):
                chk.errors.append("gp.refit: expected true or false")
            else:
                kw["refit_hyperparameters"] = gp["refit"]
        if "objective" in gp:
            k = _kernel(chk, gp["objective"], "gp.objective", dim)
            if k is not None:
                kw["objective_kernel"] = k
        if "constraints" in gp:
            cons = gp["constraints"]
            if not isinstance(cons, list) or (n_con is not None and len(cons) != n_con):
                chk.errors.append(f"gp.constraints: expected a list of {n_con} kernels")
            else:
                ks = [_kernel(chk, c, f"gp.constraints[{i}]", dim) for i, c in enumerate(cons)]
                if all(k is not None for k in ks):
                    kw["constraint_kernels"] = tuple(ks)

    if "noise" in raw:
        nz = chk.mapping(raw["noise"], "noise")
        chk.unknown(nz, {"objective_sd", "constraint_sd"}, "noise.")
        for key in ("objective_sd", "constraint_sd"):
            if key in nz:
                v = chk.number(nz[key], f"noise.{key}", lo=0)
                if v is not None:
                    kw[f"{key.split('_')[0]}_noise_sd"] = v

    if "output" in raw:
        if raw["output"] is not None and not isinstance(raw["output"], str):
            chk.errors.append("output: expected a directory path")
        else:
            kw["output"] = raw["output"]

    if chk.errors:
        raise ConfigError(chk.errors)
    return ExperimentConfig(**kw)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return validate_config(fh.read())
