"""Command-line entry point: ``qham <command> <target> [flags]``.

Reports are printed (or written with ``--out``) as JSON with sorted keys and
a ``"schema": 1`` field.  Exit codes: 0 when every requested check passes,
1 when a check fails, 2 for bad flags or unusable input, 3 for internal errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import cob, config, drivers, quiver
from .errors import QhamError
from .lie import make_group_model

SCHEMA_VERSION = 1

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

TARGETS = {
    "verify": ("lie", "multivector", "qp"),
    "deform": ("bivector", "trivector", "mult"),
    "implode": ("faces", "strata", "family", "master"),
    "quiver": ("info", "glue", "contract", "normalize", "sample", "freeness", "rank"),
    "cob": ("parse", "relations", "functoriality"),
    "suite": ("all",),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--group", default="su2")
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (falls back to $QHAM_SEED, then 42)")
    common.add_argument("--samples", type=int, default=20)
    common.add_argument("--fd-step", type=float, default=config.DEFAULT_FD_STEP)
    common.add_argument("--t-grid", default=None, help="comma-separated, strictly decreasing")
    common.add_argument("--file", default=None, help="quiver JSON file")
    common.add_argument("--file2", default=None, help="second quiver JSON file (quiver glue)")
    common.add_argument("--edge", default=None, help="edge id (quiver contract)")
    common.add_argument("--genus", type=int, default=1, help="genus (implode master)")
    common.add_argument("--r", type=int, default=1, help="number of imploded factors (implode master)")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")

    parser = _Parser(prog="qham", description="Quasi-Hamiltonian space toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, targets in TARGETS.items():
        p = sub.add_parser(command, parents=[common])
        p.add_argument("target", choices=targets)
        if command == "cob":
            p.add_argument("expression", nargs="?", default=None)
    return parser


def _parse_tolerances(extra):
    """Turn leftover ``--tol.name value`` / ``--tol.name=value`` tokens into a dict."""
    known = config.Tolerances().to_dict()
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--tol."):
            raise UsageError(f"unrecognized argument {tok!r}")
        if "=" in tok:
            name, value = tok[len("--tol."):].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise UsageError(f"{tok} needs a value")
            name, value = tok[len("--tol."):], extra[i + 1]
            i += 2
        name = name.replace("-", "_")
        if name not in known:
            raise UsageError(f"unknown tolerance {name!r}")
        try:
            if isinstance(known[name], tuple):
                out[name] = tuple(float(v) for v in value.split(","))
            else:
                out[name] = float(value)
        except ValueError:
            raise UsageError(f"bad value for --tol.{name}: {value!r}") from None
    return out


def _seed(arg):
    if arg is not None:
        return arg
    env = os.environ.get("QHAM_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QHAM_SEED is not an integer: {env!r}") from None
    return config.DEFAULT_SEED


def make_config(args, extra):
    tol = config.Tolerances().replace(**_parse_tolerances(extra))
    grid = config.DEFAULT_T_GRID
    if args.t_grid:
        try:
            grid = tuple(float(v) for v in args.t_grid.split(","))
        except ValueError:
            raise UsageError(f"bad --t-grid {args.t_grid!r}") from None
    try:
        return config.RunConfig(group=args.group, seed=_seed(args.seed), n_samples=args.samples,
                                fd_step=args.fd_step, tolerances=tol, t_grid=grid, output=args.out)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return obj


def _need_file(path, flag="--file"):
    if not path:
        raise UsageError(f"{flag} is required")
    try:
        with open(path) as fh:
            return quiver.Quiver.from_json(json.load(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _quiver_command(target, args, cfg):
    model = make_group_model(cfg.group)
    q = _need_file(args.file)
    if target == "info":
        return drivers.quiver_info(q, model)
    if target == "sample":
        return drivers.quiver_sample(q, cfg, model)
    if target == "freeness":
        return drivers.quiver_freeness(q, cfg, model)
    if target == "rank":
        return drivers.quiver_rank(q, cfg, model)
    before = quiver.validate(q)
    if target == "glue":
        q2 = _need_file(args.file2, "--file2")
        _, plus, _ = quiver.boundary_split(q)
        minus, _, _ = quiver.boundary_split(q2)
        plus, minus = sorted(plus, key=quiver.natural_key), sorted(minus, key=quiver.natural_key)
        glued = quiver.glue(q, q2, dict(zip(plus, minus)))
        after = quiver.validate(glued)
        expected = before.dim_N(model.dim) + quiver.validate(q2).dim_N(model.dim) - 2 * len(plus) * model.dim
        return {"check": "quiver glue", "group": model.name, "quiver": glued.to_json_obj(),
                "invariants": after.to_dict(model.dim), "expected_dim_N": expected,
                "pass": after.dim_N(model.dim) == expected}
    if target == "contract":
        eid = args.edge
        if eid is None:
            eligible = quiver.eligible_edges(q)
            if not eligible:
                raise UsageError("the quiver has no contractible edge")
            eid = eligible[0].id
        result = quiver.contract_edge(q, eid)
    else:
        result, steps = quiver.normalize(q, return_steps=True)
    after = quiver.validate(result)
    same = (before.m, before.n, before.genus, before.dim_units) == (after.m, after.n, after.genus,
                                                                    after.dim_units)
    out = {"check": f"quiver {target}", "group": model.name, "quiver": result.to_json_obj(),
           "before": before.to_dict(model.dim), "after": after.to_dict(model.dim),
           "invariants_preserved": same, "pass": same}
    if target == "normalize":
        out["steps"] = steps
        out["idempotent"] = quiver.normalize(result, return_steps=True)[1] == 0
        out["pass"] = same and out["idempotent"] and steps <= len(q.edges)
    return out


def dispatch(args, cfg):
    command, target = args.command, args.target
    if command == "verify":
        return {"lie": drivers.verify_lie, "multivector": drivers.verify_multivector,
                "qp": drivers.verify_qp}[target](cfg)
    if command == "deform":
        return drivers.deform(cfg, target)
    if command == "implode":
        return drivers.implode(cfg, target, genus=args.genus, r=args.r)
    if command == "quiver":
        return _quiver_command(target, args, cfg)
    if command == "cob":
        model = make_group_model(cfg.group)
        if target == "parse":
            if args.expression is None:
                raise UsageError("cob parse needs an expression")
            return drivers.cob_parse(args.expression, model)
        if target == "relations":
            return {"check": "cob relations", **cob.verify_relations(model)}
        return drivers.cob_functoriality(cfg)
    return drivers.suite_all(cfg)


def run(argv=None, stdout=None):
    """Run the command line; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        args, extra = build_parser().parse_known_args(argv)
        if args.command == "cob" and args.expression is None and extra and not extra[0].startswith("--"):
            args.expression, extra = extra[0], extra[1:]
        cfg = make_config(args, extra)
    except UsageError as exc:
        print(f"qham: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = dispatch(args, cfg)
    except UsageError as exc:
        print(f"qham: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QhamError as exc:
        print(f"qham: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - the exit code contract covers everything else
        print(f"qham: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    report = dict(report)
    report["schema"] = SCHEMA_VERSION
    report["config"] = cfg.to_dict()
    text = json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
