"""Command-line front end; a thin client over the service-layer handlers.

Subcommands: validate, widths, solve, oracle, gen. Errors are written as a
JSON object to stderr and exit with a nonzero status (2 for input problems,
1 for pipeline failures). VNEP_LOG={error,info,debug} controls logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional

from pydantic import ValidationError

from .errors import (
    BudgetExceededError,
    DecompositionError,
    InstanceError,
    OrientationError,
    VnembedError,
)
from .service import handlers
from .service.schemas import (
    GenerateRequest,
    InstanceModel,
    OracleRequest,
    OrientationModel,
    SolveRequest,
    ValidateRequest,
    WidthsRequest,
)


def _configure_logging() -> None:
    level = os.environ.get("VNEP_LOG", "error").lower()
    mapping = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=mapping.get(level, logging.ERROR))


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message}}) + "\n")
    return code


def _read_instance_model(path: str) -> tuple[InstanceModel, Optional[OrientationModel]]:
    """Read a bare instance document or the generator's wrapped form; returns
    the instance model plus the bundled orientation if one is present."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise InstanceError(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON in {path}: {exc}") from exc
    orientation = None
    if isinstance(doc, dict) and "instance" in doc and "substrate" not in doc:
        if doc.get("orientation"):
            try:
                orientation = OrientationModel(**doc["orientation"])
            except ValidationError as exc:
                raise InstanceError(f"orientation schema violation: {exc.errors()[:3]}") from exc
        doc = doc["instance"]
    try:
        return InstanceModel(**doc), orientation
    except ValidationError as exc:
        raise InstanceError(f"instance schema violation: {exc.errors()[:3]}") from exc


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_validate(args) -> int:
    model, _ = _read_instance_model(args.instance)
    resp = handlers.handle_validate(ValidateRequest(instance=model))
    if not resp.valid:
        return _fail("validation", "; ".join(resp.errors), 2)
    _emit({"valid": True}, args.out)
    return 0


def _cmd_widths(args) -> int:
    model, orientation = _read_instance_model(args.instance)
    resp = handlers.handle_widths(
        WidthsRequest(
            instance=model,
            roots=args.root or None,
            ordering=args.ordering,
            orientation=orientation,
        )
    )
    header = f"{'root':<12} {'ew':>4} {'lw':>4}"
    print(header)
    print("-" * len(header))
    for rep in resp.reports:
        print(f"{rep.root:<12} {rep.extraction_width:>4} {rep.extraction_label_width:>4}")
    if args.out:
        _emit(resp.model_dump(), args.out)
    return 0


def _cmd_solve(args) -> int:
    model, orientation = _read_instance_model(args.instance)
    resp = handlers.handle_solve(
        SolveRequest(
            instance=model,
            formulation=args.formulation,
            roots=args.root or None,
            ordering=args.ordering,
            tolerance=args.tolerance,
            include_lp_text=bool(args.export_lp),
            orientation=orientation,
        )
    )
    if args.export_lp and resp.lp_text:
        with open(args.export_lp, "w") as fh:
            fh.write(resp.lp_text)
    payload = resp.model_dump(exclude={"lp_text"})
    _emit(payload, args.out)
    if resp.status != "optimal":
        return _fail("solver", f"status {resp.status}: {resp.message}", 1)
    if not resp.verified:
        return _fail("verification", "; ".join(resp.verify_failures), 1)
    return 0


def _cmd_oracle(args) -> int:
    model, _ = _read_instance_model(args.instance)
    resp = handlers.handle_oracle(OracleRequest(instance=model))
    _emit(resp.model_dump(), args.out)
    return 0


def _cmd_gen(args) -> int:
    sets = json.loads(args.sets) if args.sets else None
    resp = handlers.handle_generate(
        GenerateRequest(
            kind=args.kind,
            n=args.n,
            seed=args.seed,
            substrate_nodes=args.substrate_nodes,
            root=args.gen_root,
            sets=sets,
        )
    )
    _emit({"instance": resp.instance, "orientation": resp.orientation}, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vnembed", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, instance=True):
        if instance:
            p.add_argument("--instance", required=True, help="instance JSON file")
        p.add_argument("--root", action="append", help="root choice (repeatable)")
        p.add_argument("--ordering", choices=["bag", "auto"], default="auto")
        p.add_argument("--out", metavar="PATH", help="write the JSON result here")
        p.add_argument("--tolerance", type=float, default=1e-7)

    p_val = sub.add_parser("validate", help="structural instance checks")
    p_val.add_argument("--instance", required=True)
    p_val.add_argument("--out")
    p_val.set_defaults(func=_cmd_validate)

    p_w = sub.add_parser("widths", help="per-root width report")
    add_common(p_w)
    p_w.set_defaults(func=_cmd_widths)

    p_s = sub.add_parser("solve", help="build, solve, decompose, verify")
    add_common(p_s)
    p_s.add_argument(
        "--formulation", choices=["mcf", "adapted", "multiroot"], default="adapted"
    )
    p_s.add_argument("--export-lp", metavar="PATH", help="write the LP text format here")
    p_s.set_defaults(func=_cmd_solve)

    p_o = sub.add_parser("oracle", help="brute-force enumeration")
    p_o.add_argument("--instance", required=True)
    p_o.add_argument("--out")
    p_o.set_defaults(func=_cmd_oracle)

    p_g = sub.add_parser("gen", help="instance generators")
    p_g.add_argument(
        "kind", choices=["half-wheel", "cactus", "tree", "two-half-wheels", "hypergraph-eo"]
    )
    p_g.add_argument("--n", type=int, default=5)
    p_g.add_argument("--seed", type=int, default=None, help="mandatory for randomized kinds")
    p_g.add_argument("--substrate-nodes", type=int, default=3)
    p_g.add_argument("--gen-root", choices=["center", "outer"], default="center")
    p_g.add_argument("--sets", help="JSON list of label sets for hypergraph-eo")
    p_g.add_argument("--out")
    p_g.set_defaults(func=_cmd_gen)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, OrientationError, ValidationError) as exc:
        return _fail("input", str(exc), 2)
    except BudgetExceededError as exc:
        return _fail("budget", str(exc), 3)
    except DecompositionError as exc:
        return _fail("decomposition", str(exc), 1)
    except VnembedError as exc:
        return _fail("internal", str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
