"""Command-line front end.

Every flag has a JSON counterpart with the same name (dashes become
underscores); a ``--config`` file wins over explicit flags, with a warning.
``--dump-config`` prints the fully resolved configuration and exits, and
feeding that output back through ``--config`` reproduces the same run.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 comparison
verdict failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import constant_omega as co
from . import linear_omega as lo
from .dist import DistributionError, ServiceDistribution, exponential, from_json
from .numerics import DivergentIntegralError, InversionWarning, KummerError, RootError
from .simulate import (OmegaSpec, SimConfig, SimConfigError, simulate_bankruptcy,
                       simulate_workload)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERDICT = 0, 2, 3, 4

COMMANDS = ("solve-queue-const", "solve-ins-const", "solve-linear", "simulate-queue",
            "simulate-ins", "compare")
MODELS = ("queue-const", "queue-linear", "ins-const")

# per-command model parameters
PARAMS = {
    "solve-queue-const": ("lam", "omega", "dist"),
    "solve-ins-const": ("lam", "omega", "c", "dist"),
    "solve-linear": ("lam", "mu", "a"),
    "simulate-queue": ("lam", "dist", "omega_kind", "omega"),
    "simulate-ins": ("lam", "c", "dist", "omega_kind", "omega"),
    "compare": ("model", "lam", "dist", "omega", "c", "a", "mu"),
}
SIM_COMMANDS = ("simulate-queue", "simulate-ins", "compare")


class ConfigError(ValueError):
    pass


class NumericalFailure(ArithmeticError):
    pass


class VerdictFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any]
    grid: dict[str, float]
    output_dir: str = "."
    sim: dict[str, Any] | None = None
    thresholds: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        allowed = set(PARAMS[self.command])
        extra = set(self.params) - allowed
        if extra:
            raise ConfigError(f"parameters {sorted(extra)} not valid for {self.command}")
        g = self.grid
        for key in ("x_min", "x_max", "step"):
            if key not in g or not _finite(g[key]):
                raise ConfigError(f"grid needs a finite {key}")
        if not g["step"] > 0:
            raise ConfigError("grid step must be positive")
        if g["x_max"] < g["x_min"]:
            raise ConfigError("grid x_max < x_min")
        if self.command in SIM_COMMANDS:
            SimConfig(**(self.sim or {}))
        elif self.sim:
            raise ConfigError(f"{self.command} takes no simulation settings")

    def to_json(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RunConfig":
        try:
            return cls(command=data["command"], params=dict(data.get("params", {})),
                       grid={**_GRID_FLAGS, **data.get("grid", {})},
                       output_dir=data.get("output_dir", "."), sim=data.get("sim"), thresholds=dict(data.get("thresholds", {})))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from None


def _finite(v) -> bool:
    return isinstance(v, (int, float)) and math.isfinite(v)


# -- argument parsing -------------------------------------------------------------

_GRID_FLAGS = {"x_min": 0.0, "x_max": 5.0, "step": 0.05}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="whkernel", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--dump-config", action="store_true",
                       help="print the resolved configuration and exit")
        p.add_argument("--output-dir", "--out", dest="output_dir", default=None)
        for name in PARAMS[cmd]:
            flag = "--" + name.replace("_", "-")
            if name == "dist":
                p.add_argument(flag, default=None,
                               help='JSON, e.g. \'{"type": "erlang", "k": 2, "mu": 4}\'')
            elif name == "model":
                p.add_argument(flag, choices=MODELS, default=None)
            elif name == "omega_kind":
                p.add_argument(flag, choices=("constant", "linear"), default=None)
            else:
                p.add_argument(flag, type=float, default=None)
        if cmd in ("solve-queue-const", "solve-ins-const", "simulate-queue", "simulate-ins",
                   "compare"):
            p.add_argument("--service-rate", type=float, default=None,
                           help="shorthand for an exponential law with this rate")
        for name in _GRID_FLAGS:
            p.add_argument("--" + name.replace("_", "-"), type=float, default=None)
        if cmd in SIM_COMMANDS:
            for name in ("seed", "replications", "total_time", "burn_in", "bin_width",
                         "x_max_neg", "x_max_pos", "survival_M", "eps_tail", "n_paths"):
                typ = int if name in ("seed", "replications", "n_paths") else float
                p.add_argument("--" + name.replace("_", "-"), type=typ, default=None)
        if cmd == "compare":
            p.add_argument("--l1-threshold", type=float, default=None)
            p.add_argument("--z-threshold", type=float, default=None)
    return ap


def _flags_to_config(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    params: dict[str, Any] = {}
    for name in PARAMS[cmd]:
        v = getattr(ns, name, None)
        if v is None:
            continue
        if name == "dist":
            try:
                v = json.loads(v)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"--dist is not valid JSON: {exc}") from None
        params[name] = v
    rate = getattr(ns, "service_rate", None)
    if rate is not None:
        if "dist" in params:
            raise ConfigError("give either --dist or --service-rate, not both")
        params["dist"] = {"type": "exponential", "mu": rate}
    grid = {k: (getattr(ns, k) if getattr(ns, k) is not None else d)
            for k, d in _GRID_FLAGS.items()}
    sim = None
    if cmd in SIM_COMMANDS:
        sim = {k: getattr(ns, k) for k in ("seed", "replications", "total_time", "burn_in",
                                           "bin_width", "x_max_neg", "x_max_pos",
                                           "survival_M", "eps_tail", "n_paths")
               if getattr(ns, k) is not None}
    thresholds = {}
    if cmd == "compare":
        for k in ("l1_threshold", "z_threshold"):
            if getattr(ns, k) is not None:
                thresholds[k] = getattr(ns, k)
    return RunConfig(cmd, params, grid, ns.output_dir or ".", sim, thresholds)


def _merge(flags: RunConfig, file_cfg: RunConfig, explicit: set[str]) -> RunConfig:
    """JSON file wins; explicit flags fill gaps and warn on conflicts."""
    if file_cfg.command != flags.command:
        raise ConfigError(f"config is for {file_cfg.command!r}, not {flags.command!r}")
    out = RunConfig.from_json(file_cfg.to_json())

    def fold(name: str, flag_val, file_dict: dict, key: str):
        if name not in explicit and not (name == "dist" and "service_rate" in explicit):
            return
        if key in file_dict and file_dict[key] != flag_val:
            warnings.warn(f"--{name.replace('_', '-')} ignored: config file sets {key}",
                          stacklevel=3)
        elif key not in file_dict:
            file_dict[key] = flag_val

    for k, v in flags.params.items():
        fold(k, v, out.params, k)
    for k, v in flags.grid.items():
        fold(k, v, out.grid, k)
    if flags.sim is not None:
        out.sim = dict(out.sim or {})
        for k, v in flags.sim.items():
            fold(k, v, out.sim, k)
    for k, v in flags.thresholds.items():
        fold(k, v, out.thresholds, k)
    if "output_dir" in explicit and flags.output_dir != out.output_dir:
        warnings.warn("--output-dir ignored: config file sets output_dir", stacklevel=2)
    return out


def parse(argv: list[str] | None = None) -> tuple[RunConfig, bool]:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    flags = _flags_to_config(ns)
    if ns.config:
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        explicit = {k for k, v in vars(ns).items()
                    if v not in (None, False) and k not in ("config", "dump_config", "command")}
        cfg = _merge(flags, RunConfig.from_json(data), explicit)
    else:
        cfg = flags
    cfg.validate()
    return cfg, ns.dump_config


# -- helpers --------------------------------------------------------------------------


def _need(params: dict, *names: str) -> list:
    missing = [n for n in names if n not in params]
    if missing:
        raise ConfigError(f"missing parameters: {', '.join(missing)}")
    return [params[n] for n in names]


def _dist(params: dict) -> ServiceDistribution:
    spec = params.get("dist")
    if spec is None:
        raise ConfigError("missing parameter: dist")
    if not isinstance(spec, dict):
        raise ConfigError("dist must be a JSON object")
    return from_json(spec)


def _grid(g: dict, nonneg: bool = True) -> np.ndarray:
    if nonneg and g["x_min"] < 0:
        raise ConfigError("grid must start at x >= 0 for densities")
    n = int(round((g["x_max"] - g["x_min"]) / g["step"]))
    return g["x_min"] + g["step"] * np.arange(n + 1)


def _check_finite(obj, where: str):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")
    elif isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        raise NumericalFailure(f"non-finite value in {where}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path: Path, data: dict):
    data = _clean(data)
    _check_finite(data, path.name)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _write_csv(path: Path, header: list[str], columns: list) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    for name, c in zip(header, cols):
        if not np.all(np.isfinite(c)):
            raise NumericalFailure(f"non-finite value in column {name} of {path.name}")
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in zip(*cols):
            wr.writerow([f"{v:.17g}" for v in row])


def _write_text(path: Path, text: str):
    path.write_text(text)


# -- commands ---------------------------------------------------------------------------


def _solve_queue_const(cfg: RunConfig, out: Path):
    lam, omega = _need(cfg.params, "lam", "omega")
    sol = co.solve_queue(lam, omega, _dist(cfg.params))
    x = _grid(cfg.grid)
    _write_csv(out / "density.csv", ["x", "v_minus", "v_plus"],
               [x, sol.v_minus(x), sol.v_plus(x)])
    _write_json(out / "summary.json", sol.summary())


def _solve_ins_const(cfg: RunConfig, out: Path):
    lam, omega, c = _need(cfg.params, "lam", "omega", "c")
    sol = co.solve_insurance(lam, c, omega, _dist(cfg.params))
    x = _grid(cfg.grid)
    _write_csv(out / "bankruptcy.csv", ["x", "u_plus", "u_tilde_minus", "u_minus"],
               [x, sol.u_plus(x), sol.u_tilde_minus(x), sol.u_minus(x)])
    _write_json(out / "summary.json", sol.summary())


def _linear_solutions(lam, mu, a):
    model = lo.classify(lam, mu, a)
    return model, lo.appendix_solve(model), lo.direct_solve(model)


def _solve_linear(cfg: RunConfig, out: Path):
    lam, mu, a = _need(cfg.params, "lam", "mu", "a")
    model, app, direct = _linear_solutions(lam, mu, a)
    x = _grid(cfg.grid)
    _write_csv(out / "density.csv", ["x", "v_minus", "v_plus"], [x, app.v_minus(x), app.v_plus(x)])
    summ = app.summary()
    summ["route"] = direct.route
    summ["direct"] = {"C": direct.C, "K_dir": direct.K_dir, "K_star": direct.K_star,
                      "r1": direct.r1}
    if summ["direct"]["K_star"] is None:
        del summ["direct"]["K_star"]
    _write_json(out / "summary.json", summ)


def _omega_spec(params: dict, default_kind: str = "constant") -> OmegaSpec:
    kind = params.get("omega_kind", default_kind)
    (val,) = _need(params, "omega")
    return OmegaSpec(kind, val)


def _simulate_queue(cfg: RunConfig, out: Path):
    (lam,) = _need(cfg.params, "lam")
    est = simulate_workload(lam, _dist(cfg.params), _omega_spec(cfg.params),
                            SimConfig(**(cfg.sim or {})))
    _write_text(out / "inventory_hist.csv", est.to_csv("inventory"))
    _write_text(out / "workload_hist.csv", est.to_csv("workload"))
    _write_json(out / "summary.json", est.summary())


def _simulate_ins(cfg: RunConfig, out: Path):
    lam, c = _need(cfg.params, "lam", "c")
    dist = _dist(cfg.params)
    om = _omega_spec(cfg.params)
    sc = SimConfig(**(cfg.sim or {}))
    x0s = _grid(cfg.grid, nonneg=False)
    ests = [simulate_bankruptcy(lam, c, om, dist, float(x0), sc) for x0 in x0s]
    _write_csv(out / "bankruptcy_sim.csv", ["x0", "probability", "stderr", "ci_low", "ci_high"],
               [x0s, [e.probability for e in ests], [e.stderr for e in ests],
                [e.ci_low for e in ests], [e.ci_high for e in ests]])
    _write_json(out / "summary.json", {"estimates": [e.summary() for e in ests]})


def _bin_average(f, edges: np.ndarray) -> np.ndarray:
    # Simpson's rule per bin
    lo_, hi_ = edges[:-1], edges[1:]
    vals = f(np.concatenate([lo_, 0.5 * (lo_ + hi_), hi_]))
    n = lo_.size
    return (vals[:n] + 4 * vals[n:2 * n] + vals[2 * n:]) / 6.0


def _compare(cfg: RunConfig, out: Path):
    p = cfg.params
    model = p.get("model")
    if model not in MODELS:
        raise ConfigError(f"compare needs model in {MODELS}")
    sc = SimConfig(**(cfg.sim or {}))
    if model == "ins-const":
        lam, c, omega = _need(p, "lam", "c", "omega")
        dist = _dist(p)
        sol = co.solve_insurance(lam, c, omega, dist)
        x = _grid(cfg.grid, nonneg=False)
        ests = [simulate_bankruptcy(lam, c, OmegaSpec("constant", omega), dist, float(v), sc)
                for v in x]
        sim = np.array([e.probability for e in ests])
        se = np.array([e.stderr for e in ests])
        ana = np.asarray(sol.u(x), dtype=float)
        weight = cfg.grid["step"]
    else:
        lam = _need(p, "lam")[0]
        if model == "queue-const":
            (omega,) = _need(p, "omega")
            dist = _dist(p)
            sol = co.solve_queue(lam, omega, dist)
            spec = OmegaSpec("constant", omega)
            vm, vp = sol.v_minus, sol.v_plus
        else:
            a, mu = _need(p, "a", "mu")
            if "dist" in p and p["dist"] != {"type": "exponential", "mu": mu}:
                raise ConfigError("linear clearing is solved for exponential service only")
            dist = exponential(mu)
            _, app, _ = _linear_solutions(lam, mu, a)
            spec = OmegaSpec("linear", a)
            vm, vp = app.v_minus, app.v_plus
        est = simulate_workload(lam, dist, spec, sc)
        am = _bin_average(vm, est.edges_neg)
        apos = _bin_average(vp, est.edges_pos)
        mid_n = 0.5 * (est.edges_neg[:-1] + est.edges_neg[1:])
        mid_p = 0.5 * (est.edges_pos[:-1] + est.edges_pos[1:])
        # signed level: negative = inventory
        x = np.concatenate([-mid_n[::-1], mid_p])
        ana = np.concatenate([am[::-1], apos])
        sim = np.concatenate([est.density_neg[::-1], est.density_pos])
        se = np.concatenate([est.se_neg[::-1], est.se_pos])
        weight = sc.bin_width
    diff = np.abs(sim - ana)
    l1 = float(np.sum(diff) * weight)
    z = diff[se > 0] / se[se > 0]
    verdict = {"l1_distance": l1, "max_z_score": float(z.max()) if z.size else 0.0}
    l1_thr = cfg.thresholds.get("l1_threshold", 0.03)
    z_thr = cfg.thresholds.get("z_threshold")
    verdict["l1_threshold"] = l1_thr
    verdict["pass"] = bool(l1 < l1_thr and (z_thr is None or verdict["max_z_score"] < z_thr))
    if z_thr is not None:
        verdict["z_threshold"] = z_thr
    _write_csv(out / "comparison.csv", ["x", "analytic", "simulated", "stderr", "abs_diff"],
               [x, ana, sim, se, diff])
    _write_json(out / "verdict.json", verdict)
    if not verdict["pass"]:
        raise VerdictFailure(f"l1_distance {l1:.4g} (threshold {l1_thr})")


HANDLERS = {
    "solve-queue-const": _solve_queue_const,
    "solve-ins-const": _solve_ins_const,
    "solve-linear": _solve_linear,
    "simulate-queue": _simulate_queue,
    "simulate-ins": _simulate_ins,
    "compare": _compare,
}


def run(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error", InversionWarning)
        HANDLERS[cfg.command](cfg, out)
    return EXIT_OK


def _fail(code: int, exc: BaseException) -> int:
    msg = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(msg), file=sys.stderr)
    return code


CONFIG_ERRORS = (ConfigError, DistributionError, SimConfigError, lo.ParameterError,
                 co.UnstableSystemError)
NUMERIC_ERRORS = (NumericalFailure, RootError, KummerError, DivergentIntegralError,
                  InversionWarning, lo.RecursionDegeneracyError, ArithmeticError)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg, dump = parse(argv)
        if dump:
            print(json.dumps(cfg.to_json(), indent=2, sort_keys=True))
            return EXIT_OK
        if os.environ.get("WHKERNEL_THREADS") is not None:
            try:
                if int(os.environ["WHKERNEL_THREADS"]) < 1:
                    raise ValueError
            except ValueError:
                raise ConfigError("WHKERNEL_THREADS must be a positive integer") from None
        return run(cfg)
    except CONFIG_ERRORS as exc:
        return _fail(EXIT_CONFIG, exc)
    except NUMERIC_ERRORS as exc:
        return _fail(EXIT_NUMERIC, exc)
    except VerdictFailure as exc:
        return _fail(EXIT_VERDICT, exc)
    except ValueError as exc:
        return _fail(EXIT_CONFIG, exc)


if __name__ == "__main__":
    sys.exit(main())
