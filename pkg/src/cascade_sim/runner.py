"""Named scenarios, parameter sweeps, file emission and the CLI.

Scenarios:

  synthesize    build the pulse pair and write its samples
  transfer      synthesize, evolve the ideal transfer, write the time series
  sweep         fidelity vs (kappa_prime/kappa, Gamma/Delta) grid
  trajectories  photodetection Monte Carlo ensemble
  qubit-sphere  superposition-transfer fidelity over a (theta, phi) grid

Output is CSV plus a JSON summary (or JSON only with ``--format json``),
written with fixed 17-significant-digit floats and LF endings so repeated
runs with the same config and seed are byte-identical.
"""

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _backend
from .dynamics import EvolutionConfig, evolve, qubit_transfer_check
from .errors import CascadeSimError, ConfigError, InvalidParameterError, \
    NumericFailureError
from .model import SystemParams
from .synthesis import SynthesisSpec, synthesize
from .trajectories import TrajectoryBatch, _worker_count, run_trajectories

SCENARIO_NAMES = ("synthesize", "transfer", "sweep", "trajectories",
                  "qubit-sphere")

DEFAULT_KAPPA_PRIME_FRACS = tuple(round(0.01 * k, 2) for k in range(11))
DEFAULT_GAMMA_FRACS = (0.0, 0.01, 0.05)

QUBIT_THETAS = (0.0, np.pi / 4, np.pi / 2)
QUBIT_PHIS = (0.0, np.pi / 2, np.pi, 3 * np.pi / 2)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one scenario run needs."""

    scenario: str
    params: SystemParams = SystemParams()
    tail_level: float | None = None  # None -> kappa
    kappa_prime_fracs: tuple = DEFAULT_KAPPA_PRIME_FRACS
    gamma_fracs: tuple = DEFAULT_GAMMA_FRACS
    n_traj: int = 1000
    mismatched: bool = False
    out_dir: str | None = "."
    seed: int = 0
    fmt: str = "csv"
    tol: float | None = None
    output_stride: int = 100

    def __post_init__(self):
        if self.scenario not in SCENARIO_NAMES:
            raise ConfigError("scenario",
                              f"must be one of {', '.join(SCENARIO_NAMES)}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("format", "must be 'csv' or 'json'")
        if self.tol is not None and self.tol <= 0:
            raise ConfigError("tol", "must be > 0")
        if self.seed < 0:
            raise ConfigError("seed", "must be >= 0")
        if self.n_traj < 1:
            raise ConfigError("n_traj", "must be >= 1")
        if self.output_stride < 1:
            raise ConfigError("output_stride", "must be >= 1")
        if not self.kappa_prime_fracs or not self.gamma_fracs:
            raise ConfigError("sweep axes", "must be nonempty")

    def tolerances(self):
        if self.tol is None:
            return (1e-9, 1e-12)
        return (self.tol, self.tol * 1e-3)

    def tail(self):
        return self.params.kappa if self.tail_level is None \
            else self.tail_level


@dataclass(frozen=True)
class SweepResult:
    """Fidelity and jump probability over the loss grid.

    Arrays are indexed [gamma_frac, kappa_prime_frac].
    """

    kappa_prime_fracs: tuple
    gamma_fracs: tuple
    fidelity: np.ndarray
    jump_probability: np.ndarray

    def __post_init__(self):
        fid = np.array(self.fidelity, dtype=float)
        jump = np.array(self.jump_probability, dtype=float)
        fid.setflags(write=False)
        jump.setflags(write=False)
        object.__setattr__(self, "fidelity", fid)
        object.__setattr__(self, "jump_probability", jump)
        shape = (len(self.gamma_fracs), len(self.kappa_prime_fracs))
        if fid.shape != shape or jump.shape != shape:
            raise InvalidParameterError("sweep grid shape mismatch")
        if np.any(fid < 0) or np.any(fid > 1):
            raise InvalidParameterError("fidelity must lie in [0, 1]")

    def monotonicity_report(self):
        rows = [bool(np.all(np.diff(row) <= 1e-12))
                for row in self.fidelity]
        ordered = all(
            bool(np.all(self.fidelity[i + 1] <= self.fidelity[i] + 1e-12))
            for i in range(len(self.gamma_fracs) - 1))
        return {"rows_nonincreasing_in_kappa_prime": rows,
                "curves_ordered_by_gamma": ordered}

    def to_dict(self):
        return {
            "kappa_prime_fracs": list(self.kappa_prime_fracs),
            "gamma_fracs": list(self.gamma_fracs),
            "fidelity": self.fidelity.tolist(),
            "jump_probability": self.jump_probability.tolist(),
            "monotonicity": self.monotonicity_report(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            kappa_prime_fracs=tuple(data["kappa_prime_fracs"]),
            gamma_fracs=tuple(data["gamma_fracs"]),
            fidelity=np.array(data["fidelity"]),
            jump_probability=np.array(data["jump_probability"]),
        )


def params_to_dict(params):
    return dataclasses.asdict(params)


def params_from_dict(data):
    return SystemParams(**data)


def _fmt(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_path(cfg, name):
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def _synthesis_result(cfg):
    spec = SynthesisSpec(tail=cfg.tail(), params=cfg.params)
    return synthesize(spec)


def _evolution_config(cfg, result, params=None, mismatched=False):
    pulses = (result.pulse1, result.pulse1) if mismatched \
        else (result.pulse1, result.pulse2)
    return EvolutionConfig(
        params=params if params is not None else cfg.params,
        pulses=pulses,
        initial=result.initial_state(),
        tolerances=cfg.tolerances(),
        output_stride=cfg.output_stride,
    )


def run_synthesize(cfg):
    result = _synthesis_result(cfg)
    p1, p2 = result.pulse1, result.pulse2
    summary = {
        "continuity_residual": result.continuity_residual,
        "edge_coupling": result.edge_coupling,
        "min_coupling": result.min_coupling,
        "initial_state": {
            "alpha1": abs(result.initial_state().alpha1),
            "alpha2": abs(result.initial_state().alpha2),
            "beta_a": float(np.real(result.initial_state().beta_a)),
        },
        "params": params_to_dict(cfg.params),
        "tail_level": cfg.tail(),
    }
    files = []
    if cfg.out_dir is not None:
        rows = zip(p1.times, p1.g_eff, p2.g_eff, p1.phase, p2.phase,
                   p1.stark, p2.stark)
        if cfg.fmt == "csv":
            path = _out_path(cfg, "pulses.csv")
            _write_csv(path, ("t", "g1", "g2", "phase1", "phase2",
                              "stark1", "stark2"), rows)
            files.append(path)
        else:
            summary["samples"] = {
                "t": p1.times.tolist(), "g1": p1.g_eff.tolist(),
                "g2": p2.g_eff.tolist(), "phase1": p1.phase.tolist(),
                "phase2": p2.phase.tolist(), "stark1": p1.stark.tolist(),
                "stark2": p2.stark.tolist(),
            }
        path = _out_path(cfg, "synthesis.json")
        _write_json(path, summary)
        files.append(path)
    return result, files


def transfer_summary(record, params, seed):
    return {
        "fidelity": record.fidelity,
        "jump_probability": record.jump_probability,
        "max_dark_residual": float(np.max(record.dark_residual)),
        "params": params_to_dict(params),
        "seed": seed,
    }


def _record_rows(record):
    p1, p2 = record.pulses
    g1 = p1.coupling_at(record.times)
    g2 = p2.coupling_at(record.times)
    return zip(record.times, g1, g2,
               np.abs(record.alpha1) ** 2, np.abs(record.alpha2) ** 2,
               np.abs(record.beta_a) ** 2, record.dark_residual,
               record.norm)


def run_transfer(cfg):
    """Synthesize the ideal pulse pair and evolve the reference transfer."""
    result = _synthesis_result(cfg)
    record = evolve(_evolution_config(cfg, result))
    summary = transfer_summary(record, cfg.params, cfg.seed)
    files = []
    if cfg.out_dir is not None:
        if cfg.fmt == "csv":
            path = _out_path(cfg, "transfer_timeseries.csv")
            _write_csv(path, ("t", "g1", "g2", "alpha1_sq", "alpha2_sq",
                              "beta_a_sq", "beta_s_abs", "norm"),
                       _record_rows(record))
            files.append(path)
        else:
            summary["timeseries"] = {
                "t": record.times.tolist(),
                "alpha1_sq": (np.abs(record.alpha1) ** 2).tolist(),
                "alpha2_sq": (np.abs(record.alpha2) ** 2).tolist(),
                "beta_a_sq": (np.abs(record.beta_a) ** 2).tolist(),
                "beta_s_abs": record.dark_residual.tolist(),
                "norm": record.norm.tolist(),
            }
        path = _out_path(cfg, "transfer_summary.json")
        _write_json(path, summary)
        files.append(path)
    return record, files


def run_sweep(cfg):
    """Fidelity of the lossless-designed pulse under losses."""
    result = _synthesis_result(cfg)
    points = [(i, j, gf, kf)
              for i, gf in enumerate(cfg.gamma_fracs)
              for j, kf in enumerate(cfg.kappa_prime_fracs)]

    def compute(point):
        i, j, gf, kf = point
        params = replace(cfg.params,
                         kappa_prime=kf * cfg.params.kappa,
                         gamma=gf * abs(cfg.params.delta_big))
        record = evolve(_evolution_config(cfg, result, params=params))
        return i, j, record.fidelity, record.jump_probability

    workers = _worker_count(len(points))
    if workers == 1:
        computed = [compute(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            computed = list(pool.map(compute, points))

    fid = np.zeros((len(cfg.gamma_fracs), len(cfg.kappa_prime_fracs)))
    jump = np.zeros_like(fid)
    for i, j, f, p in computed:
        fid[i, j] = f
        jump[i, j] = p
    sweep = SweepResult(kappa_prime_fracs=tuple(cfg.kappa_prime_fracs),
                        gamma_fracs=tuple(cfg.gamma_fracs),
                        fidelity=fid, jump_probability=jump)

    files = []
    if cfg.out_dir is not None:
        if cfg.fmt == "csv":
            rows = [(kf, gf, sweep.fidelity[i, j])
                    for i, gf in enumerate(cfg.gamma_fracs)
                    for j, kf in enumerate(cfg.kappa_prime_fracs)]
            path = _out_path(cfg, "sweep.csv")
            _write_csv(path, ("kappa_prime_over_kappa", "gamma_over_delta",
                              "fidelity"), rows)
            files.append(path)
        path = _out_path(cfg, "sweep.json")
        _write_json(path, sweep.to_dict())
        files.append(path)
    return sweep, files


def batch_to_dict(batch):
    return {
        "n_traj": batch.n_traj,
        "seed": batch.seed,
        "jump_fraction": batch.jump_fraction,
        "final_fidelities": batch.final_fidelities.tolist(),
        "final_fidelity_mean": batch.final_fidelity_mean,
        "final_fidelity_var": batch.final_fidelity_var,
        "jump_times": [list(times) for times in batch.jump_times],
    }


def batch_from_dict(data):
    return TrajectoryBatch(
        n_traj=data["n_traj"], seed=data["seed"],
        jump_times=tuple(tuple(times) for times in data["jump_times"]),
        jump_fraction=data["jump_fraction"],
        final_fidelities=np.array(data["final_fidelities"]),
        final_fidelity_mean=data["final_fidelity_mean"],
        final_fidelity_var=data["final_fidelity_var"],
    )


def run_trajectory_batch(cfg):
    result = _synthesis_result(cfg)
    config = _evolution_config(cfg, result, mismatched=cfg.mismatched)
    batch = run_trajectories(config, cfg.n_traj, cfg.seed)
    files = []
    if cfg.out_dir is not None:
        summary = batch_to_dict(batch)
        summary["mismatched"] = cfg.mismatched
        summary["params"] = params_to_dict(cfg.params)
        if cfg.fmt == "csv":
            rows = [(i, len(clicks),
                     clicks[0] if clicks else float("nan"), fid)
                    for i, (clicks, fid) in enumerate(
                        zip(batch.jump_times, batch.final_fidelities))]
            path = _out_path(cfg, "trajectories.csv")
            _write_csv(path, ("trajectory", "n_clicks", "first_click_time",
                              "final_fidelity"), rows)
            files.append(path)
        path = _out_path(cfg, "trajectories.json")
        _write_json(path, summary)
        files.append(path)
    return batch, files


def run_qubit_sphere(cfg):
    result = _synthesis_result(cfg)
    config = _evolution_config(cfg, result)
    rows = []
    for theta in QUBIT_THETAS:
        for phi in QUBIT_PHIS:
            rows.append((theta, phi,
                         qubit_transfer_check(theta, phi, config)))
    fidelities = [f for _, _, f in rows]
    summary = {
        "min_fidelity": min(fidelities),
        "mean_fidelity": sum(fidelities) / len(fidelities),
        "grid": [{"theta": t, "phi": p, "fidelity": f}
                 for t, p, f in rows],
        "params": params_to_dict(cfg.params),
    }
    files = []
    if cfg.out_dir is not None:
        if cfg.fmt == "csv":
            path = _out_path(cfg, "qubit_sphere.csv")
            _write_csv(path, ("theta", "phi", "fidelity"), rows)
            files.append(path)
        path = _out_path(cfg, "qubit_sphere.json")
        _write_json(path, summary)
        files.append(path)
    return summary, files


SCENARIOS = {
    "synthesize": run_synthesize,
    "transfer": run_transfer,
    "sweep": run_sweep,
    "trajectories": run_trajectory_batch,
    "qubit-sphere": run_qubit_sphere,
}


# --- config file and CLI plumbing ---

_PARAM_KEYS = {
    "kappa": float,
    "kappa_prime": float,
    "g_vacuum": float,
    "delta_big": float,
    "gamma": float,
    "delta_raman": float,
    "t_max": float,
    "grid_step": float,
    "adiabatic_factor": float,
}

_SCENARIO_KEYS = {
    "tail_level": float,
    "kappa_prime_fracs": "float_list",
    "gamma_over_delta_fracs": "float_list",
    "n_traj": int,
    "mismatched": "bool",
    "seed": int,
    "output_stride": int,
    "tol": float,
    "out": str,
    "format": str,
}


def load_config_file(path):
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"{path}:{lineno}", "expected 'key = value'")
                key, value = (part.strip() for part in line.split("=", 1))
                if key in values:
                    raise ConfigError(key, "duplicate key")
                values[key] = value
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}")
    return values


def _coerce(key, kind, text):
    try:
        if kind is float:
            return float(text)
        if kind is int:
            return int(text)
        if kind is str:
            return text
        if kind == "bool":
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError("expected a boolean")
        if kind == "float_list":
            return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(key, str(exc))
    raise ConfigError(key, "unsupported key type")


def scenario_config(scenario, file_values=None, **overrides):
    """Assemble a ScenarioConfig from config-file text plus overrides."""
    param_kwargs = {}
    scenario_kwargs = {}
    for key, text in (file_values or {}).items():
        if key in _PARAM_KEYS:
            value = _coerce(key, _PARAM_KEYS[key], text)
            param_kwargs["grid" if key == "grid_step" else key] = value
        elif key in _SCENARIO_KEYS:
            scenario_kwargs[key] = _coerce(key, _SCENARIO_KEYS[key], text)
        else:
            raise ConfigError(key, "unknown config key")

    rename = {"gamma_over_delta_fracs": "gamma_fracs", "out": "out_dir",
              "format": "fmt"}
    scenario_kwargs = {rename.get(k, k): v
                       for k, v in scenario_kwargs.items()}
    for key, value in overrides.items():
        if value is not None:
            scenario_kwargs[key] = value

    try:
        params = SystemParams(**param_kwargs)
        return ScenarioConfig(scenario=scenario, params=params,
                              **scenario_kwargs)
    except InvalidParameterError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("config", str(exc))


class _UsageError(Exception):
    def __init__(self, parser, message):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(self, message)


def _build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="flat key = value config file")
    common.add_argument("--out", metavar="DIR",
                        help="output directory (default: current)")
    common.add_argument("--seed", type=int, metavar="N",
                        help="randomness seed (default: 0)")
    common.add_argument("--format", choices=("csv", "json"), dest="fmt",
                        help="primary output format (default: csv)")
    common.add_argument("--tol", type=float, metavar="X",
                        help="integrator relative tolerance")

    parser = _Parser(
        prog="cascade-sim",
        description="Photon-mediated state transfer between two "
                    "atom-cavity nodes: pulse design, conditional "
                    "evolution, jump statistics.")
    sub = parser.add_subparsers(dest="scenario", required=True,
                                metavar="scenario")
    helps = {
        "synthesize": "build the ideal pulse pair",
        "transfer": "evolve the reference transfer and record it",
        "sweep": "fidelity over the (kappa'/kappa, Gamma/Delta) grid",
        "trajectories": "photodetection Monte Carlo ensemble",
        "qubit-sphere": "superposition-transfer fidelity grid",
    }
    for name in SCENARIO_NAMES:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "trajectories":
            sp.add_argument("--n-traj", type=int, metavar="N",
                            help="ensemble size (default: 1000)")
            sp.add_argument("--mismatched", action="store_true",
                            default=None,
                            help="use g2 = g1 instead of the time reverse")
    return parser


def cli_main(argv=None):
    """Entry point; returns the process exit code."""
    try:
        parser = _build_parser()
        args = parser.parse_args(argv)
    except _UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        file_values = load_config_file(args.config) if args.config else {}
        cfg = scenario_config(
            args.scenario, file_values,
            out_dir=args.out, seed=args.seed, fmt=args.fmt, tol=args.tol,
            n_traj=getattr(args, "n_traj", None),
            mismatched=getattr(args, "mismatched", None),
        )
        result, files = SCENARIOS[args.scenario](cfg)
    except NumericFailureError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except (CascadeSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(_summary_line(args.scenario, result, files))
    return 0


def _summary_line(scenario, result, files):
    if scenario == "synthesize":
        head = (f"synthesize: continuity_residual="
                f"{result.continuity_residual:.3g} "
                f"edge_coupling={result.edge_coupling:.3g}")
    elif scenario == "transfer":
        head = (f"transfer: fidelity={result.fidelity:.6f} "
                f"jump_probability={result.jump_probability:.3g}")
    elif scenario == "sweep":
        report = result.monotonicity_report()
        head = (f"sweep: {result.fidelity.size} points, "
                f"monotone_rows={all(report['rows_nonincreasing_in_kappa_prime'])} "
                f"ordered_curves={report['curves_ordered_by_gamma']}")
    elif scenario == "trajectories":
        head = (f"trajectories: jump_fraction={result.jump_fraction:.4f} "
                f"mean_fidelity={result.final_fidelity_mean:.6f}")
    else:
        head = f"qubit-sphere: min_fidelity={result['min_fidelity']:.6f}"
    if files:
        head += " -> " + " ".join(files)
    return head + f" [backend={_backend.backend_name()}]"


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
