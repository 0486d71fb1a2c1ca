"""Command-line front end.

Subcommands::

    nmzreach simulate   --config cfg.json [--data traj.json] [--seed S]
    nmzreach reach      --config cfg.json [--data traj.json] [--methods mz,cmz,nmz] [--out DIR]
    nmzreach bounds     --config cfg.json [--data traj.json] [--out DIR]
    nmzreach audit-nmz  --config cfg.json [--data traj.json] [--out DIR]

Without ``--config`` the packaged five-dimensional benchmark is used.  Without
``--data`` the trajectories are simulated in memory from the config seed,
giving the same data ``simulate`` would write.  All artifacts are UTF-8 with
LF line endings, floats carry 17 significant digits and every artifact is
schema-validated before it is written.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .bounds import SweepRow, scaling_sweep
from .identify import (
    NoiseModel,
    TrajectoryData,
    build_cmz_model_set,
    build_data_matrices,
    build_mz_model_set,
    simulate_trajectories,
)
from .nmz import nullspace_matrix_zonotope, sample_coefficient_space, structural_rank_check
from .reach import METHODS, ReachConfig, containment_audit, run_methods
from .setrep import MEMBERSHIP_TOL, Zonotope, zono_membership, zonotope_polygon

DEFAULT_CONFIG = "five_dim_system.json"


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# Schemas
# --------------------------------------------------------------------------

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM}
_MAT = {"type": "array", "items": _VEC}
_SET = {
    "type": "object",
    "required": ["center", "generators"],
    "properties": {"center": _VEC, "generators": _MAT},
    "additionalProperties": False,
}
_POS_INT = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["system", "initial_set", "input_set", "noise_set", "data", "reach", "bounds", "outputs"],
    "additionalProperties": False,
    "properties": {
        "system": {
            "type": "object",
            "required": ["A", "B", "n", "m"],
            "properties": {"A": _MAT, "B": _MAT, "n": _POS_INT, "m": _POS_INT},
            "additionalProperties": False,
        },
        "initial_set": _SET,
        "input_set": _SET,
        "noise_set": _SET,
        "data": {
            "type": "object",
            "required": ["num_trajectories", "steps_per_trajectory", "seed"],
            "properties": {
                "num_trajectories": _POS_INT,
                "steps_per_trajectory": _POS_INT,
                "seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "reach": {
            "type": "object",
            "required": ["horizon", "reduction_order"],
            "properties": {"horizon": _POS_INT, "reduction_order": _POS_INT},
            "additionalProperties": False,
        },
        "bounds": {
            "type": "object",
            "required": ["scales"],
            "properties": {
                "scales": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "rank_r": {"type": ["integer", "null"], "minimum": 1},
            },
            "additionalProperties": False,
        },
        "outputs": {
            "type": "object",
            "required": ["directory"],
            "properties": {"directory": {"type": "string"}},
            "additionalProperties": False,
        },
    },
}

TRAJECTORY_SCHEMA = {
    "type": "object",
    "required": ["trajectories"],
    "properties": {
        "trajectories": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["states", "inputs"],
                "properties": {"states": _MAT, "inputs": _MAT, "noises": _MAT},
            },
        }
    },
}

TIMINGS_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["method", "per_step_seconds", "total_seconds"],
        "properties": {
            "method": {"enum": list(METHODS)},
            "per_step_seconds": {"type": "array", "items": {"type": "number", "minimum": 0}},
            "total_seconds": {"type": "number", "minimum": 0},
            "setup_seconds": {"type": "number", "minimum": 0},
        },
    },
}

CONTAINMENT_SCHEMA = {
    "type": "object",
    "required": ["label", "num_trajectories", "tolerance", "methods"],
    "properties": {
        "label": {"type": "string"},
        "num_trajectories": {"type": "integer", "minimum": 0},
        "tolerance": _NUM,
        "methods": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["method", "all_contained", "steps"],
                "properties": {
                    "method": {"enum": list(METHODS)},
                    "all_contained": {"type": "boolean"},
                    "steps": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["step", "contained", "total", "fraction", "max_residual", "hull_widths"],
                            "properties": {
                                "step": _POS_INT,
                                "contained": {"type": "integer", "minimum": 0},
                                "total": {"type": "integer", "minimum": 0},
                                "fraction": {"type": "number", "minimum": 0, "maximum": 1},
                                "max_residual": {"type": "number", "minimum": 0},
                                "hull_widths": _VEC,
                            },
                        },
                    },
                },
            },
        },
    },
}

AUDIT_SCHEMA = {
    "type": "object",
    "required": ["structural", "generator_counts", "nmz", "projection", "samples_inside", "samples_total"],
    "properties": {
        "structural": {
            "type": "object",
            "required": ["numeric_nullity", "predicted_nullity", "numeric_rank", "predicted_rank"],
            "properties": {
                "numeric_nullity": {"type": "integer", "minimum": 0},
                "predicted_nullity": {"type": "integer", "minimum": 0},
                "numeric_rank": {"type": "integer", "minimum": 0},
                "predicted_rank": {"type": "integer", "minimum": 0},
            },
        },
        "generator_counts": {
            "type": "object",
            "required": ["cmz", "nmz"],
            "properties": {"cmz": {"type": "integer"}, "nmz": {"type": "integer"}},
        },
        "nmz": {"type": "object", "required": ["nu", "xi_p", "c_xi", "G_xi"]},
        "projection": {
            "type": "object",
            "required": ["coords", "samples", "zxi_polygon"],
            "properties": {
                "coords": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "samples": _MAT,
                "zxi_polygon": _MAT,
            },
        },
        "samples_inside": {"type": "integer", "minimum": 0},
        "samples_total": {"type": "integer", "minimum": 0},
    },
}

HULL_FIELDS = ("step", "method", "dim", "lower", "upper")
HULL_ROW_SCHEMA = {
    "type": "object",
    "required": list(HULL_FIELDS),
    "properties": {
        "step": _POS_INT,
        "method": {"enum": list(METHODS)},
        "dim": {"type": "integer", "minimum": 0},
        "lower": _NUM,
        "upper": _NUM,
    },
}

BOUNDS_ROW_SCHEMA = {
    "type": "object",
    "required": list(SweepRow.FIELDS),
    "properties": {k: _NUM for k in SweepRow.FIELDS},
}


# --------------------------------------------------------------------------
# Serialization helpers
# --------------------------------------------------------------------------


def fmt_float(x) -> str:
    return format(float(x), ".17g")


def _plain(obj):
    """Convert numpy containers and scalars into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _is_scalar(v) -> bool:
    return not isinstance(v, (dict, list))


def json_text(obj, level: int = 0) -> str:
    """JSON with 17-significant-digit floats; non-finite floats become null."""
    if level == 0:
        obj = _plain(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        pad = "  " * (level + 1)
        body = ",\n".join(f"{pad}{json.dumps(k)}: {json_text(v, level + 1)}" for k, v in obj.items())
        return "{\n" + body + "\n" + "  " * level + "}"
    if isinstance(obj, list):
        if all(_is_scalar(v) for v in obj):
            return "[" + ", ".join(json_text(v) for v in obj) + "]"
        pad = "  " * (level + 1)
        body = ",\n".join(pad + json_text(v, level + 1) for v in obj)
        return "[\n" + body + "\n" + "  " * level + "]"
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    return json.dumps(obj)


def write_json(path, obj, schema) -> Path:
    obj = _plain(obj)
    jsonschema.validate(obj, schema)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json_text(obj) + "\n")
    return path


def csv_text(fields, rows, row_schema) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        rec = _plain(dict(zip(fields, row)))
        jsonschema.validate(rec, row_schema)
        w.writerow([fmt_float(v) if isinstance(v, float) else v for v in (rec[k] for k in fields)])
    return buf.getvalue()


def write_csv(path, fields, rows, row_schema) -> Path:
    text = csv_text(fields, rows, row_schema)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return path


# --------------------------------------------------------------------------
# Experiment configuration
# --------------------------------------------------------------------------


def _set_from_dict(d, dim: int, name: str) -> Zonotope:
    c = np.asarray(d["center"], dtype=float)
    G = np.asarray(d["generators"], dtype=float)
    if c.shape != (dim,):
        raise ConfigError(f"{name}: center has {c.size} entries, expected {dim}")
    if G.size == 0:
        G = np.zeros((dim, 0))
    if G.ndim != 2 or G.shape[0] != dim:
        raise ConfigError(f"{name}: generators must have {dim} rows")
    return Zonotope(c, G)


def _set_to_dict(Z: Zonotope) -> dict:
    return {"center": Z.center.tolist(), "generators": Z.generators.tolist()}


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    A: np.ndarray
    B: np.ndarray
    initial_set: Zonotope
    input_set: Zonotope
    noise_set: Zonotope
    num_trajectories: int
    steps_per_trajectory: int
    seed: int
    horizon: int
    reduction_order: int
    scales: tuple
    rank_r: int | None
    output_dir: str

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(d, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid config: {exc.message}") from exc
        s = d["system"]
        n, m = s["n"], s["m"]
        A = np.asarray(s["A"], dtype=float)
        B = np.asarray(s["B"], dtype=float)
        if A.shape != (n, n):
            raise ConfigError(f"A has shape {A.shape}, expected {(n, n)}")
        if B.shape != (n, m):
            raise ConfigError(f"B has shape {B.shape}, expected {(n, m)}")
        scales = tuple(float(x) for x in d["bounds"]["scales"])
        if list(scales) != sorted(scales):
            raise ConfigError("bounds.scales must be ascending")
        rank_r = d["bounds"].get("rank_r")
        if rank_r is not None and rank_r > n:
            raise ConfigError(f"rank_r = {rank_r} exceeds n = {n}")
        A.setflags(write=False)
        B.setflags(write=False)
        return cls(
            A=A,
            B=B,
            initial_set=_set_from_dict(d["initial_set"], n, "initial_set"),
            input_set=_set_from_dict(d["input_set"], m, "input_set"),
            noise_set=_set_from_dict(d["noise_set"], n, "noise_set"),
            num_trajectories=d["data"]["num_trajectories"],
            steps_per_trajectory=d["data"]["steps_per_trajectory"],
            seed=d["data"]["seed"],
            horizon=d["reach"]["horizon"],
            reduction_order=d["reach"]["reduction_order"],
            scales=scales,
            rank_r=rank_r,
            output_dir=d["outputs"]["directory"],
        )

    def to_dict(self) -> dict:
        return {
            "system": {"A": self.A.tolist(), "B": self.B.tolist(), "n": self.n, "m": self.m},
            "initial_set": _set_to_dict(self.initial_set),
            "input_set": _set_to_dict(self.input_set),
            "noise_set": _set_to_dict(self.noise_set),
            "data": {
                "num_trajectories": self.num_trajectories,
                "steps_per_trajectory": self.steps_per_trajectory,
                "seed": self.seed,
            },
            "reach": {"horizon": self.horizon, "reduction_order": self.reduction_order},
            "bounds": {"scales": list(self.scales), "rank_r": self.rank_r},
            "outputs": {"directory": self.output_dir},
        }

    def with_seed(self, seed: int | None) -> "ExperimentConfig":
        if seed is None:
            return self
        d = self.to_dict()
        d["data"]["seed"] = int(seed)
        return ExperimentConfig.from_dict(d)

    def reach_config(self) -> ReachConfig:
        return ReachConfig(self.horizon, self.reduction_order, (self.input_set,), self.noise_set, self.initial_set)


def load_config(path=None) -> ExperimentConfig:
    """Read a JSON config; ``None`` loads the packaged benchmark."""
    if path is None:
        text = resources.files("nmzreach").joinpath("data", DEFAULT_CONFIG).read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return ExperimentConfig.from_dict(json.loads(text))


def save_config(cfg: ExperimentConfig, path) -> Path:
    return write_json(path, cfg.to_dict(), CONFIG_SCHEMA)


# --------------------------------------------------------------------------
# Trajectory files
# --------------------------------------------------------------------------


def _streams(seed: int):
    data_ss, audit_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(data_ss), np.random.default_rng(audit_ss)


def simulate_data(cfg: ExperimentConfig):
    rng, _ = _streams(cfg.seed)
    return simulate_trajectories(
        cfg.A, cfg.B, cfg.initial_set, cfg.input_set, cfg.noise_set, cfg.num_trajectories, cfg.steps_per_trajectory, rng
    )


def write_trajectories(path, trajectories, noises=None) -> Path:
    items = []
    for k, (states, inputs) in enumerate(trajectories):
        rec = {"states": np.asarray(states), "inputs": np.asarray(inputs).reshape(len(inputs), -1)}
        if noises is not None:
            rec["noises"] = np.asarray(noises[k])
        items.append(rec)
    return write_json(path, {"trajectories": items}, TRAJECTORY_SCHEMA)


def read_trajectories(path):
    """Returns ``(trajectories, noises)``; ``noises`` is None unless every record has one."""
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    jsonschema.validate(obj, TRAJECTORY_SCHEMA)
    recs = obj["trajectories"]
    trajs = [(np.asarray(r["states"], dtype=float), np.asarray(r["inputs"], dtype=float)) for r in recs]
    noises = [np.asarray(r["noises"], dtype=float) for r in recs] if all("noises" in r for r in recs) else None
    return trajs, noises


def load_data(cfg: ExperimentConfig, data_path=None) -> TrajectoryData:
    if data_path is None:
        trajs, noises = simulate_data(cfg)
    else:
        trajs, noises = read_trajectories(data_path)
    data = build_data_matrices(trajs, noises)
    if data.n != cfg.n or data.m != cfg.m:
        raise ConfigError(f"data has n={data.n}, m={data.m}; config has n={cfg.n}, m={cfg.m}")
    return data


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_simulate(cfg: ExperimentConfig, data_path=None) -> Path:
    trajs, noises = simulate_data(cfg)
    path = Path(data_path) if data_path else Path(cfg.output_dir) / "trajectories.json"
    return write_trajectories(path, trajs, noises)


def hull_rows(results) -> list:
    rows = []
    for tag, res in results.items():
        for k, hull in enumerate(res.hulls()):
            for i in range(hull.dim):
                rows.append((k + 1, tag, i, float(hull.lower[i]), float(hull.upper[i])))
    rows.sort(key=lambda r: (r[0], METHODS.index(r[1]), r[2]))
    return rows


def cmd_reach(cfg: ExperimentConfig, data_path=None, methods=METHODS, out_dir=None, audit_trajectories: int = 20) -> dict:
    """Identify, propagate, audit; writes hulls.csv, timings.json and containment.json."""
    methods = tuple(methods)
    out = Path(out_dir) if out_dir else Path(cfg.output_dir)
    data = load_data(cfg, data_path)
    noise = NoiseModel(cfg.noise_set)
    M = build_mz_model_set(data, noise) if "mz" in methods else None
    N = build_cmz_model_set(data, noise) if {"cmz", "nmz"} & set(methods) else None
    results = run_methods(methods, M, N, cfg.reach_config())

    _, audit_rng = _streams(cfg.seed)
    ref, _ = simulate_trajectories(cfg.A, cfg.B, cfg.initial_set, cfg.input_set, cfg.noise_set, audit_trajectories, cfg.horizon, audit_rng)
    audits = containment_audit(results, [states for states, _ in ref], tol=MEMBERSHIP_TOL)

    timings = [
        {
            "method": tag,
            "per_step_seconds": list(res.wall_times),
            "total_seconds": res.total_seconds,
            "setup_seconds": res.setup_seconds,
        }
        for tag, res in results.items()
    ]
    containment = {
        "label": "monte_carlo_containment",
        "num_trajectories": audit_trajectories,
        "tolerance": MEMBERSHIP_TOL,
        "methods": [
            {
                "method": a.method,
                "all_contained": a.all_contained,
                "steps": [
                    {
                        "step": s.step,
                        "contained": s.contained,
                        "total": s.total,
                        "fraction": s.fraction,
                        "max_residual": s.max_residual,
                        "hull_widths": list(s.hull_widths),
                    }
                    for s in a.steps
                ],
            }
            for a in audits
        ],
    }
    return {
        "hulls": write_csv(out / "hulls.csv", HULL_FIELDS, hull_rows(results), HULL_ROW_SCHEMA),
        "timings": write_json(out / "timings.json", timings, TIMINGS_SCHEMA),
        "containment": write_json(out / "containment.json", containment, CONTAINMENT_SCHEMA),
        "results": results,
    }


def cmd_bounds(cfg: ExperimentConfig, data_path=None, out_dir=None) -> Path:
    out = Path(out_dir) if out_dir else Path(cfg.output_dir)
    data = load_data(cfg, data_path)
    rows = scaling_sweep(data, NoiseModel(cfg.noise_set), cfg.scales, cfg.rank_r)
    return write_csv(out / "bounds.csv", SweepRow.FIELDS, [r.as_tuple() for r in rows], BOUNDS_ROW_SCHEMA)


def cmd_audit_nmz(cfg: ExperimentConfig, data_path=None, out_dir=None, samples: int = 200, coords=(0, 1)) -> Path:
    """Rank/nullity identities plus coefficient-space samples against ``Z_xi``."""
    out = Path(out_dir) if out_dir else Path(cfg.output_dir)
    data = load_data(cfg, data_path)
    noise = NoiseModel(cfg.noise_set)
    report = structural_rank_check(noise, data)
    N = build_cmz_model_set(data, noise)
    res = nullspace_matrix_zonotope(N)
    Z_xi = res.provenance.coeff_zonotope
    i, j = (int(c) for c in coords)
    if not (0 <= i < N.num_generators and 0 <= j < N.num_generators and i != j):
        raise ConfigError(f"projection coordinates {coords} invalid for {N.num_generators} coefficients")
    _, rng = _streams(cfg.seed)
    xs = sample_coefficient_space(N.con_A, N.con_b, samples, rng)
    inside = sum(bool(zono_membership(Z_xi, x)) for x in xs)
    poly = zonotope_polygon(Zonotope(Z_xi.center[[i, j]], Z_xi.generators[[i, j], :]))
    audit = {
        "structural": report.to_dict(),
        "generator_counts": {"cmz": N.num_generators, "nmz": res.nmz.num_generators},
        "nmz": res.provenance.to_dict(),
        "projection": {"coords": [i, j], "samples": xs[:, [i, j]], "zxi_polygon": poly},
        "samples_inside": inside,
        "samples_total": len(xs),
    }
    return write_json(out / "audit.json", audit, AUDIT_SCHEMA)


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


def _methods(text: str) -> tuple:
    tags = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [t for t in tags if t not in METHODS]
    if bad or not tags:
        raise argparse.ArgumentTypeError(f"methods must be a non-empty subset of {','.join(METHODS)}")
    return tags


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON (default: packaged five-dimensional benchmark)")
    common.add_argument("--data", help="trajectory JSON file")
    common.add_argument("--out", help="output directory (default: outputs.directory of the config)")
    common.add_argument("--seed", type=int, help="override data.seed")

    parser = argparse.ArgumentParser(prog="nmzreach", description="Data-driven reachability with MZ, CMZ and NMZ model sets.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate trajectories and write them to --data")
    p = sub.add_parser("reach", parents=[common], help="propagate reachable sets and audit containment")
    p.add_argument("--methods", type=_methods, default=METHODS, help="comma-separated subset of mz,cmz,nmz")
    p.add_argument("--audit-trajectories", type=int, default=20, help="reference trajectories for the containment audit")
    sub.add_parser("bounds", parents=[common], help="sweep data scales and report model-set bounds")
    p = sub.add_parser("audit-nmz", parents=[common], help="check nullity identities and sample the coefficient set")
    p.add_argument("--samples", type=int, default=200, help="coefficient-space samples")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_seed(args.seed)
        if args.command == "simulate":
            path = cmd_simulate(cfg, args.data or (Path(args.out) / "trajectories.json" if args.out else None))
            print(path)
        elif args.command == "reach":
            paths = cmd_reach(cfg, args.data, args.methods, args.out, args.audit_trajectories)
            print(paths["hulls"], paths["timings"], paths["containment"], sep="\n")
        elif args.command == "bounds":
            print(cmd_bounds(cfg, args.data, args.out))
        else:
            print(cmd_audit_nmz(cfg, args.data, args.out, args.samples))
    except (ConfigError, OSError, ValueError, jsonschema.ValidationError) as exc:
        print(f"nmzreach: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
