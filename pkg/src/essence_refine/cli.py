"""Command-line driver: ``essence-refine {refine,check,solve} SPEC [options]``.

Exit status: 0 success, 1 input diagnostics, 2 refinement failure,
3 equivalence check failure, 4 oracle search space too large.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Optional

from .emit import spec_hash, write_models
from .engine import MAX_MODELS, MAX_STEPS
from .errors import EssenceError, EvalError, RefinementError, TooLarge
from .oracle import (_order_key, check_equivalence, decode_solution, show_solution,
                     solve_refined_model)
from .pipeline import RefineConfig, refine_text

EXIT_OK, EXIT_INPUT, EXIT_REFINE, EXIT_CHECK, EXIT_TOO_LARGE = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    spec: str
    param: Optional[str] = None
    out: str = "models"
    max_models: int = MAX_MODELS
    max_steps: int = MAX_STEPS
    per_constraint: bool = False
    all_reps: bool = False
    hoist: bool = True
    undef: str = "exclude"
    trace: bool = False

    def refine_config(self) -> RefineConfig:
        return RefineConfig(mode="per-constraint" if self.per_constraint else "single",
                            all_reps=self.all_reps, hoist=self.hoist,
                            max_models=self.max_models, max_steps=self.max_steps,
                            undef=self.undef)

    def describe(self) -> str:
        rc = self.refine_config()
        return (f"mode={rc.mode} all_reps={rc.all_reps} hoist={rc.hoist} "
                f"max_models={rc.max_models} max_steps={rc.max_steps} undef={rc.undef}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="essence-refine",
                                description="Refine abstract constraint specifications "
                                            "into flat int/bool models.")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "refine": "write every refined model plus a manifest",
        "check": "refine, then compare each model's solutions with brute force",
        "solve": "refine, solve the first model and print decoded solutions",
    }
    for name, text in helps.items():
        s = sub.add_parser(name, help=text)
        s.add_argument("spec", help="specification file")
        s.add_argument("--param", help="parameter file of letting statements")
        s.add_argument("--out", default="models", help="output directory (refine)")
        s.add_argument("--max-models", type=int, default=MAX_MODELS)
        s.add_argument("--max-steps", type=int, default=MAX_STEPS)
        s.add_argument("--per-constraint-reps", action="store_true",
                       help="choose representations per constraint and channel them")
        s.add_argument("--all-reps", action="store_true",
                       help="also try representations that are normally skipped")
        s.add_argument("--no-hoist", action="store_true",
                       help="keep loop-invariant conjuncts inside quantifiers")
        s.add_argument("--undef", choices=("exclude", "error"), default="exclude",
                       help="undefined operations exclude a solution, or abort")
        s.add_argument("--trace", action="store_true", help="list rule traces in the manifest")
    return p


def parse_args(argv) -> RunConfig:
    a = build_parser().parse_args(argv)
    return RunConfig(a.command, a.spec, a.param, a.out, a.max_models, a.max_steps,
                     a.per_constraint_reps, a.all_reps, not a.no_hoist, a.undef, a.trace)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def run(cfg: RunConfig, out=sys.stdout, err=sys.stderr) -> int:
    try:
        source = _read(cfg.spec)
        params = _read(cfg.param) if cfg.param else None
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    try:
        spec, models, warnings = refine_text(source, params, cfg.refine_config())
    except RefinementError as exc:
        print(exc, file=err)
        return EXIT_REFINE
    except EssenceError as exc:
        print(exc, file=err)
        return EXIT_INPUT
    for w in warnings:
        print(w, file=err)

    try:
        if cfg.command == "refine":
            header = f"source {spec_hash(source + chr(10) + (params or ''))} {cfg.describe()}"
            paths = write_models(models, cfg.out, header, cfg.trace)
            print(f"{len(paths)} model(s) written to {cfg.out}", file=out)
            return EXIT_OK
        if cfg.command == "check":
            report = check_equivalence(spec, models, cfg.undef)
            for line in report.lines():
                print(line, file=out)
            verdict = "all models equivalent" if report.ok else "equivalence check failed"
            print(f"{verdict} ({len(models)} model(s))", file=out)
            return EXIT_OK if report.ok else EXIT_CHECK
        if cfg.command == "solve":
            if not models:
                print("no models", file=err)
                return EXIT_REFINE
            model = models[0]
            flat = solve_refined_model(model, cfg.undef)
            sols = sorted({decode_solution(s, model) for s in flat.solutions}, key=_order_key)
            for s in sols:
                print(show_solution(s), file=out)
            if flat.optimum is not None:
                print(f"optimum: {flat.optimum}", file=out)
            print(f"{len(sols)} solution(s)", file=out)
            return EXIT_OK
    except TooLarge as exc:
        print(f"error: {exc}", file=err)
        return EXIT_TOO_LARGE
    except EvalError as exc:
        print(f"error: undefined operation: {exc}", file=err)
        return EXIT_INPUT
    raise ValueError(f"unknown command {cfg.command}")


def main(argv=None) -> int:
    return run(parse_args(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
