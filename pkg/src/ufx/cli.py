"""Command-line front-end: seeded execution and JSON report envelopes.

Every command emits an envelope ``{tool, version, command, config, timestamp_utc,
result, warnings}``.  The ``result`` payload is deterministic for identical
inputs and seed (the timestamp lives outside it).  Exit codes: 0 success,
1 validation error, 2 computation error, 3 property violation when
``--fail-on-violation`` is set.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .counterexamples import ce1_demo, ce2_demo
from .entropy import phi_entropy, phi_spec_from_json
from .errors import UfxError, ValidationError, ComputationError
from .expected_loss import expected_loss_value, loss_from_json
from .harness import (GeneratorConfig, JointPmf, check_doa_from_joint,
                      check_jensen)
from .loss_repr import (build_loss_representation, phi_simplex_functional,
                        representation_gap)
from .measures import Atomic, measure_from_json
from .quadratic import cnd_certify, kernel_from_json, quf_value
from .registry import functional_from_spec
from .sensitivity import (Column, Dataset, sensitivity_from_samples,
                          sobol_variance_shortcut)

DEFAULT_SEED = 0xDEC0DE

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_COMPUTATION = 2
EXIT_VIOLATION = 3


def _sanitize(obj):
    """Make a payload JSON-safe: numpy scalars to Python, infinities to strings."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


def _load_json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON argument: {exc}")


def _load_json_file(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: {exc}")


def ingest_csv(path: str, categorical=(), y_column: str | None = None) -> Dataset:
    """Typed dataset from a headered CSV file.

    Real columns parse as 64-bit floats; categorical tokens are interned by
    first appearance.  Missing or unparsable values fail with the offending
    row and column named.  The output column is ``y_column`` or the last one.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}")
    if not rows:
        raise ValidationError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    if len(set(header)) != len(header):
        raise ValidationError("duplicate column names in header")
    if len(body) < 2:
        raise ValidationError("a dataset needs at least two data rows")

    y_name = y_column if y_column is not None else header[-1]
    if y_name not in header:
        raise ValidationError(f"output column {y_name!r} not in header")
    categorical = set(categorical)
    unknown = categorical - set(header)
    if unknown:
        raise ValidationError(f"categorical columns not in header: {sorted(unknown)}")

    columns = {}
    for j, name in enumerate(header):
        tokens = []
        for i, row in enumerate(body):
            if len(row) != len(header):
                raise ValidationError(f"row {i + 2} has {len(row)} fields, expected {len(header)}")
            tok = row[j].strip()
            if tok == "":
                raise ValidationError(f"missing value at row {i + 2}, column {name!r}")
            tokens.append(tok)
        if name in categorical:
            ids: dict[str, int] = {}
            vals = np.empty(len(tokens), dtype=int)
            labels = []
            for i, tok in enumerate(tokens):
                if tok not in ids:
                    ids[tok] = len(ids)
                    labels.append(tok)
                vals[i] = ids[tok]
            columns[name] = Column(name=name, kind="categorical", values=vals,
                                   labels=tuple(labels))
        else:
            vals = np.empty(len(tokens), dtype=float)
            for i, tok in enumerate(tokens):
                try:
                    vals[i] = float(tok)
                except ValueError:
                    raise ValidationError(
                        f"non-numeric token {tok!r} at row {i + 2}, column {name!r}")
            columns[name] = Column(name=name, kind="real", values=vals)

    inputs = tuple(columns[name] for name in header if name != y_name)
    return Dataset(inputs=inputs, output=columns[y_name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ufx",
                                     description="Uncertainty functional toolkit")
    parser.add_argument("--version", action="version", version=f"ufx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--output", help="write the report envelope to this path")
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--tolerance", type=float, default=None,
                       help="override the default check tolerance")
        p.add_argument("--fail-on-violation", action="store_true")

    p = sub.add_parser("entropy", help="trace-form entropy of a measure")
    p.add_argument("--functional", required=True, help='e.g. {"phi":"shannon"}')
    p.add_argument("--input", required=True, help="measure JSON file")
    common(p, seed=False)

    p = sub.add_parser("quf", help="quadratic functional of a measure")
    p.add_argument("--kernel", required=True, help='e.g. {"kernel":"squared_half"}')
    p.add_argument("--input", required=True, help="measure JSON file")
    p.add_argument("--estimator", choices=["v_stat", "u_stat"], default="v_stat")
    common(p, seed=False)

    p = sub.add_parser("loss", help="expected-loss functional of a measure")
    p.add_argument("--loss", required=True, help='e.g. {"loss":"zero_one"}')
    p.add_argument("--input", required=True, help="measure JSON file")
    common(p, seed=False)

    p = sub.add_parser("sensitivity", help="first-order indices from a CSV dataset")
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--functional", default='{"kernel":"squared_half"}')
    p.add_argument("--bins", default="auto")
    p.add_argument("--categorical", default="",
                   help="comma-separated categorical column names")
    p.add_argument("--y-column", default=None)
    p.add_argument("--variance-shortcut", action="store_true",
                   help="use the direct variance pipeline")
    common(p)

    p = sub.add_parser("jensen-check", help="randomized mixture-inequality search")
    p.add_argument("--functional", required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--generator", choices=["atomic", "dirac_pushforward",
                                           "symmetrized_pair"], default="atomic")
    common(p)

    p = sub.add_parser("doa-check", help="decreasing-on-average check on a finite joint")
    p.add_argument("--functional", required=True)
    p.add_argument("--input", required=True,
                   help='joint pmf JSON: {"pmf":[[...]],"y_outcomes":[...]}')
    common(p, seed=False)

    p = sub.add_parser("counterexample", help="closed-form Jensen violations")
    p.add_argument("which", choices=["ce1", "ce2"])
    common(p, seed=False)

    p = sub.add_parser("loss-repr", help="finite loss representation on the simplex")
    p.add_argument("--functional", required=True, help='phi spec, e.g. {"phi":"gini_simpson"}')
    p.add_argument("--m", type=int, required=True, help="simplex dimension (outcome count)")
    p.add_argument("--anchors", type=int, default=50)
    p.add_argument("--test-points", type=int, default=500)
    common(p)

    p = sub.add_parser("cnd-check", help="randomized conditional-negative-definiteness search")
    p.add_argument("--kernel", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-points", type=int, default=8)
    common(p)

    return parser


def _run_command(args) -> tuple[dict, bool]:
    """Execute one parsed command; returns (payload, violation_found)."""
    if args.command == "entropy":
        spec = phi_spec_from_json(_load_json_arg(args.functional))
        measure = measure_from_json(_load_json_file(args.input))
        if not isinstance(measure, Atomic):
            raise ValidationError("trace-form entropies need an atomic measure")
        return {"value": phi_entropy(spec, measure)}, False

    if args.command == "quf":
        kernel = kernel_from_json(_load_json_arg(args.kernel))
        measure = measure_from_json(_load_json_file(args.input))
        if not isinstance(measure, Atomic):
            raise ValidationError("quadratic functionals need an atomic measure")
        return {"value": quf_value(kernel, measure, args.estimator)}, False

    if args.command == "loss":
        loss = loss_from_json(_load_json_arg(args.loss))
        measure = measure_from_json(_load_json_file(args.input))
        if not isinstance(measure, Atomic):
            raise ValidationError("expected-loss functionals need an atomic measure")
        result = expected_loss_value(loss, measure)
        return {"value": result.value, "argmin": _sanitize(result.argmin)}, False

    if args.command == "sensitivity":
        categorical = [c for c in args.categorical.split(",") if c]
        data = ingest_csv(args.input, categorical=categorical, y_column=args.y_column)
        bins = args.bins if args.bins == "auto" else int(args.bins)
        if args.variance_shortcut:
            report = sobol_variance_shortcut(data, bins=bins, rng_seed=args.seed)
        else:
            handle = functional_from_spec(_load_json_arg(args.functional))
            report = sensitivity_from_samples(handle, data, bins=bins,
                                              rng_seed=args.seed)
        return report.to_json(), False

    if args.command == "jensen-check":
        handle = functional_from_spec(_load_json_arg(args.functional))
        tol = args.tolerance if args.tolerance is not None else 1e-10
        verdict = check_jensen(handle, GeneratorConfig(kind=args.generator),
                               trials=args.trials, rng_seed=args.seed,
                               tolerance=tol)
        return verdict.to_json(), not verdict.passed

    if args.command == "doa-check":
        handle = functional_from_spec(_load_json_arg(args.functional))
        obj = _load_json_file(args.input)
        joint = JointPmf.from_arrays(obj["pmf"], obj["y_outcomes"],
                                     obj.get("x_labels"))
        tol = args.tolerance if args.tolerance is not None else 1e-10
        verdict = check_doa_from_joint(handle, joint, tolerance=tol)
        return verdict.to_json(), not verdict.passed

    if args.command == "counterexample":
        report = ce1_demo() if args.which == "ce1" else ce2_demo()
        return report.to_json(), report.violated

    if args.command == "loss-repr":
        phi = phi_spec_from_json(_load_json_arg(args.functional))
        functional = phi_simplex_functional(phi, args.m)
        repr_ = build_loss_representation(functional, anchors_per_level=args.anchors,
                                          rng_seed=args.seed)
        rng = np.random.default_rng([args.seed, 1])
        points = [rng.dirichlet(np.ones(args.m)) for _ in range(args.test_points)]
        gap = representation_gap(functional, repr_, points)
        payload = repr_.to_json()
        payload["gap_report"] = gap.to_json()
        return payload, False

    if args.command == "cnd-check":
        kernel = kernel_from_json(_load_json_arg(args.kernel))
        report = cnd_certify(kernel, trials=args.trials,
                             max_points=args.max_points, rng_seed=args.seed)
        return report.to_json(), report.verdict == "violation"

    raise ValidationError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    threads = os.environ.get("UFX_THREADS")
    warnings = []
    if threads is not None:
        try:
            if int(threads) < 1:
                raise ValueError
        except ValueError:
            warnings.append(f"ignoring invalid UFX_THREADS={threads!r}")

    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "output")}
    envelope = {"tool": "ufx", "version": __version__, "command": args.command,
                "config": _sanitize(config), "warnings": warnings}

    try:
        payload, violated = _run_command(args)
    except ValidationError as exc:
        envelope["error"] = {"kind": "validation", "message": str(exc)}
        _emit(envelope, args)
        return EXIT_VALIDATION
    except ComputationError as exc:
        envelope["error"] = {"kind": "computation", "message": str(exc)}
        _emit(envelope, args)
        return EXIT_COMPUTATION
    except UfxError as exc:
        envelope["error"] = {"kind": "error", "message": str(exc)}
        _emit(envelope, args)
        return EXIT_VALIDATION

    envelope["result"] = _sanitize(payload)
    _emit(envelope, args)
    if violated and getattr(args, "fail_on_violation", False):
        return EXIT_VIOLATION
    return EXIT_OK


def _emit(envelope: dict, args) -> None:
    envelope["timestamp_utc"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(envelope, indent=2, sort_keys=True)
    output = getattr(args, "output", None)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


if __name__ == "__main__":
    sys.exit(main())
