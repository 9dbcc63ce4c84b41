"""Command-line front end for the scripted experiment batteries.

Every command reads a JSON config validated against a strict schema
(unknown fields are rejected), writes its artifacts plus a run manifest
into the output directory, and exits with 0 on success, 2 on a
configuration problem, or 3 on a numerical contract violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__
from .conditioning import WeightFunction, check_inducibility, induced_kernel, normalization_constant
from .dpp import DppDistribution, sample
from .errors import (
    AngleDegeneracyError,
    ConditioningImpossibleError,
    ConfigError,
    ContractError,
    DegenerateBasisError,
    DimensionError,
    InducibilityError,
)
from .ground import GroundSpace
from .operators import project_span
from .serialization import (
    kernel_from_dict,
    kernel_to_dict,
    samples_to_csv,
    save_json,
    space_from_dict,
)
from . import suites

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_CONTRACT_ERRORS = (
    ContractError,
    InducibilityError,
    ConditioningImpossibleError,
    AngleDegeneracyError,
    DegenerateBasisError,
)

_SPACE_SCHEMA = {
    "type": "object",
    "properties": {
        "points": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "weights": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "label": {"type": "string"},
        "format_version": {"const": 1},
        "kind": {"const": "ground_space"},
    },
    "required": ["points", "weights"],
    "additionalProperties": False,
}

_SCHEMAS = {
    "oracle": {
        "type": "object",
        "properties": {
            "trials": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
            "max_points": {"type": "integer", "minimum": 2, "maximum": 14},
            "max_rank": {"type": "integer", "minimum": 1},
            "g_low": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        },
        "additionalProperties": False,
    },
    "induce": {
        "type": "object",
        "properties": {
            "space": _SPACE_SCHEMA,
            "basis": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}, "minItems": 1},
            "g": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        },
        "required": ["space", "basis", "g"],
        "additionalProperties": False,
    },
    "perturb": {
        "type": "object",
        "properties": {
            "n_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
            "grid_points": {"type": "integer", "minimum": 2},
        },
        "additionalProperties": False,
    },
    "exhaust": {
        "type": "object",
        "properties": {
            "ks": {"type": "array", "items": {"type": "integer", "minimum": 2, "maximum": 13}, "minItems": 1},
            "min_angle": {"type": "number", "exclusiveMinimum": 0},
        },
        "additionalProperties": False,
    },
    "scaling": {
        "type": "object",
        "properties": {
            "s_values": {"type": "array", "items": {"type": "number", "exclusiveMinimum": -1}, "minItems": 1},
            "n_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
            "grid_points": {"type": "integer", "minimum": 2},
            "x_max": {"type": "number", "exclusiveMinimum": 0},
        },
        "additionalProperties": False,
    },
    "tightness": {"type": "object", "properties": {}, "additionalProperties": False},
    "weakconv": {
        "type": "object",
        "properties": {
            "mode": {"enum": ["calibration", "sequence"]},
            "seed": {"type": "integer", "minimum": 0},
            "repetitions": {"type": "integer", "minimum": 2},
            "batch_size": {"type": "integer", "minimum": 2},
            "n_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
            "permutations": {"type": "integer", "minimum": 19},
        },
        "additionalProperties": False,
    },
    "sample": {
        "type": "object",
        "properties": {
            "scripted": {"enum": ["projection_rank2", "contraction_4pt", "projection_rank3"]},
            "kernel": {"type": "object"},
            "count": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
        },
        "required": ["count"],
        "additionalProperties": False,
    },
}


def _load_config(path: str, command: str) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(config, _SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config rejected: {exc.message}") from exc
    return config


def _write_manifest(out: Path, command: str, config: dict, seed, outputs: list[str]) -> None:
    digest = hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()
    manifest = {
        "command": command,
        "config_sha256": digest,
        "seed": seed,
        "outputs": outputs,
        "versions": {
            "dpplab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
    }
    save_json(manifest, out / "manifest.json")


def _write_text(out: Path, name: str, text: str) -> str:
    (out / name).write_text(text)
    return name


def _cmd_oracle(config: dict, seed, out: Path) -> int:
    kwargs = dict(config)
    if seed is not None:
        kwargs["seed"] = seed
    report = suites.conditioning_oracle_battery(**kwargs)
    outputs = [_write_text(out, "oracle.csv", report.to_csv())]
    _write_manifest(out, "oracle", config, kwargs.get("seed"), outputs)
    print(report.summary())
    if not report.passed:
        print("oracle battery FAILED", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_induce(config: dict, seed, out: Path) -> int:
    space = space_from_dict({"format_version": 1, **config["space"]})
    basis = np.asarray(config["basis"], dtype=float)
    if basis.shape[1] != space.n:
        raise ConfigError("basis vectors must match the number of grid points")
    g = WeightFunction(space, np.asarray(config["g"], dtype=float))
    P = project_span(basis, space)
    check = check_inducibility(g, P)
    B = induced_kernel(g, P)
    outputs = []
    save_json(kernel_to_dict(B), out / "induced_kernel.json")
    outputs.append("induced_kernel.json")
    summary = {
        "margin": check.margin,
        "invertible": check.invertible,
        "normalization_constant": normalization_constant(g, P),
        "rank": DppDistribution(B).rank(),
    }
    save_json({"format_version": 1, **summary}, out / "induce_summary.json")
    outputs.append("induce_summary.json")
    _write_manifest(out, "induce", config, seed, outputs)
    print(json.dumps(summary))
    return EXIT_OK


def _cmd_perturb(config: dict, seed, out: Path) -> int:
    kwargs = {}
    if "n_list" in config:
        kwargs["n_list"] = tuple(config["n_list"])
    if "grid_points" in config:
        kwargs["grid_points"] = config["grid_points"]
    report = suites.scripted_perturbation_suite(**kwargs)
    outputs = [_write_text(out, "perturbation.csv", report.to_csv())]
    _write_manifest(out, "perturb", config, seed, outputs)
    flags = report.monotone_flags(strict=True)
    print(f"final distances: {report.last_values()}  monotone: {flags}")
    return EXIT_OK if all(flags.values()) else EXIT_NUMERICAL


def _cmd_exhaust(config: dict, seed, out: Path) -> int:
    kwargs = {}
    if "ks" in config:
        kwargs["ks"] = tuple(config["ks"])
    if "min_angle" in config:
        kwargs["min_angle"] = config["min_angle"]
    report = suites.scripted_exhaustion_study(**kwargs)
    outputs = [_write_text(out, "exhaustion.csv", report.to_csv())]
    _write_manifest(out, "exhaust", config, seed, outputs)
    last = report.rows[-1]
    print(
        f"final probe norm {last.remainder_probe_norm:.3e}, decreasing={report.decreasing}, "
        f"angles ok: {all(r.angle_ok for r in report.rows)}"
    )
    if any(r.failed for r in report.rows):
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_scaling(config: dict, seed, out: Path) -> int:
    kwargs = {}
    if "s_values" in config:
        kwargs["s_values"] = tuple(config["s_values"])
    if "n_list" in config:
        kwargs["n_list"] = tuple(config["n_list"])
    if "grid_points" in config:
        kwargs["grid_points"] = config["grid_points"]
    if "x_max" in config:
        kwargs["x_max"] = config["x_max"]
    reports = suites.scripted_scaling_suite(**kwargs)
    outputs = []
    all_decreasing = True
    for s, rep in reports.items():
        name = f"scaling_s{s:g}.csv"
        outputs.append(_write_text(out, name, rep.to_csv()))
        dec = rep.strictly_decreasing()
        all_decreasing &= dec
        print(f"s={s:g}: strictly decreasing={dec}, last distance {rep.report.distances[-1].max():.3e}")
    _write_manifest(out, "scaling", config, seed, outputs)
    return EXIT_OK if all_decreasing else EXIT_NUMERICAL


def _cmd_tightness(config: dict, seed, out: Path) -> int:
    reports = suites.scripted_tightness_cases()
    outputs = []
    for name, rep in reports.items():
        outputs.append(_write_text(out, f"tightness_{name}.csv", rep.to_csv()))
        print(f"{name}: tight={rep.tight} sup_trace={rep.sup_trace:.6g} sup_tails={rep.sup_tails}")
    _write_manifest(out, "tightness", config, seed, outputs)
    return EXIT_OK


def _cmd_weakconv(config: dict, seed, out: Path) -> int:
    mode = config.get("mode", "sequence")
    outputs = []
    code = EXIT_OK
    if mode == "calibration":
        kwargs = {k: config[k] for k in ("repetitions", "batch_size", "permutations") if k in config}
        if seed is not None:
            kwargs["seed"] = seed
        elif "seed" in config:
            kwargs["seed"] = config["seed"]
        p_values = suites.weakconv_calibration(**kwargs)
        ks = suites.ks_distance_to_uniform(p_values)
        text = "p_value\n" + "\n".join(f"{p:.17g}" for p in p_values) + "\n"
        outputs.append(_write_text(out, "calibration_pvalues.csv", text))
        print(f"calibration KS distance to uniform: {ks:.4f}")
        code = EXIT_OK if ks < 0.05 else EXIT_NUMERICAL
    else:
        kwargs = {k: config[k] for k in ("batch_size", "permutations") if k in config}
        if "n_list" in config:
            kwargs["n_list"] = tuple(config["n_list"])
        if seed is not None:
            kwargs["seed"] = seed
        elif "seed" in config:
            kwargs["seed"] = config["seed"]
        report = suites.weakconv_sequence(**kwargs)
        outputs.append(_write_text(out, "weakconv.csv", report.to_csv()))
        print(
            f"statistics decreasing={report.decreasing}, final p={report.final_p_value:.3f}, "
            f"verdict={report.verdict}"
        )
        code = EXIT_OK if report.verdict else EXIT_NUMERICAL
    _write_manifest(out, "weakconv", config, seed, outputs)
    return code


def _cmd_sample(config: dict, seed, out: Path) -> int:
    if ("scripted" in config) == ("kernel" in config):
        raise ConfigError("give exactly one of 'scripted' or 'kernel'")
    if "scripted" in config:
        K = suites.scripted_sampler_kernels()[config["scripted"]]
    else:
        K = kernel_from_dict(config["kernel"])
    run_seed = seed if seed is not None else config.get("seed", 0)
    samples = sample(DppDistribution(K), run_seed, config["count"])
    outputs = [_write_text(out, "samples.csv", samples_to_csv(samples))]
    _write_manifest(out, "sample", config, run_seed, outputs)
    mean_size = sum(len(X) for X in samples) / len(samples)
    print(f"{len(samples)} samples written, mean configuration size {mean_size:.4f}")
    return EXIT_OK


_COMMANDS = {
    "oracle": _cmd_oracle,
    "induce": _cmd_induce,
    "perturb": _cmd_perturb,
    "exhaust": _cmd_exhaust,
    "scaling": _cmd_scaling,
    "tightness": _cmd_tightness,
    "weakconv": _cmd_weakconv,
    "sample": _cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpplab", description="Scripted determinantal-process experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--jobs", type=int, default=1, help="worker count (reserved; must be >= 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        config = _load_config(args.config, args.command)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](config, args.seed, out)
    except _CONTRACT_ERRORS as exc:
        print(f"numerical contract violation: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, DimensionError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
