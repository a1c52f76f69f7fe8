"""Command-line entry point: ``quotspec <command> --scenario FILE``.

Exit status is 0 when every requested clause passes, 1 when some clause
fails, 2 for input errors and 3 for numerical breakdowns.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import charfn as cf
from . import harness
from .errors import InputError, NumericalBreakdown
from .koszul import build_koszul, homology_dims, in_right_spectrum

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def parse_point(text: str, d: int) -> np.ndarray:
    """Parse ``"0.3+0.2j, 0"`` into a complex vector of length ``d``."""
    try:
        z = np.array([complex(part.strip().replace(" ", "")) for part in text.split(",")])
    except ValueError as exc:
        raise InputError(f"cannot parse point {text!r}: {exc}") from exc
    if z.shape != (d,):
        raise InputError(f"point {text!r} has {z.size} coordinates, expected {d}")
    return z


def _build(args):
    scenario = harness.load_scenario(args.scenario)
    model = harness.Model.from_spec(
        scenario.spec, scenario.name, kappa_max=scenario.tolerances["kappa_max"]
    )
    return scenario, model


def _dump(obj) -> str:
    return json.dumps(harness._jsonable(obj), indent=2, sort_keys=True) + "\n"


def cmd_spectrum(args):
    scenario, model = _build(args)
    seed = scenario.grid.seed if args.seed is None else args.seed
    cmp = harness.compare_spectra(
        model, scenario.tolerances["rank"], scenario.tolerances["spectra_match"], seed
    )
    out = {
        "model": scenario.name,
        "oracle": cmp.oracle,
        "koszul_positive": cmp.koszul,
        "margin_zero": cmp.margin_zero,
        "differences": cmp.differences,
        "right_agrees_with_taylor": cmp.right_agrees,
        "passed": cmp.passed,
    }
    return _dump(out), cmp.passed


def cmd_scan(args):
    scenario, model = _build(args)
    grid = scenario.grid
    if args.seed is not None:
        grid = harness.GridSpec(grid.radii, grid.points_per_sphere, args.seed, grid.extra_points, grid.boundary_points)
    rows = harness.scan_margins(model, grid)
    if args.format == "csv":
        return harness.margins_csv(rows, model.d), True
    return _dump(rows), True


def cmd_verify(args):
    report = harness.run_scenario(harness.load_scenario(args.scenario), seed=args.seed)
    if args.format == "csv":
        lines = ["name,module,operation,tolerance,measured,passed"]
        for c in report.checks:
            lines.append(f"{c.name},{c.module},{c.operation},{c.tolerance!r},{c.measured!r},{int(c.passed)}")
        return "\n".join(lines) + "\n", report.passed
    return report.dumps() + "\n", report.passed


def cmd_charfun(args):
    _, model = _build(args)
    z = parse_point(args.z, model.d)
    E = model.evaluator
    th = cf.charfn_eval(E, z)
    out = {
        "z": z,
        "theta": th,
        "shape": list(th.shape),
        "surjectivity_margin": cf.surjectivity_margin(E, z),
        "resolvent_condition": E.resolvent_condition(z),
    }
    return _dump(out), True


def cmd_koszul(args):
    scenario, model = _build(args)
    lam = parse_point(args.lam, model.d)
    rel = scenario.tolerances["rank"]
    h = homology_dims(build_koszul(model.T), lam, rel)
    flag, margin = in_right_spectrum(model.T, lam, rel)
    out = {"lambda": lam, "h_vector": list(h), "taylor": any(x > 0 for x in h), "right": flag, "right_margin": margin}
    return _dump(out), True


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quotspec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("json",)):
        sp.add_argument("--scenario", required=True, help="scenario JSON file")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--seed", type=int, help="override the grid seed")
        sp.add_argument("--format", choices=formats, default="json")
        return sp

    common(sub.add_parser("spectrum", help="three-way spectrum comparison")).set_defaults(func=cmd_spectrum)
    common(sub.add_parser("scan", help="surjectivity margins on the grid"), ("json", "csv")).set_defaults(func=cmd_scan)
    common(sub.add_parser("verify", help="run every check of the scenario"), ("json", "csv")).set_defaults(func=cmd_verify)
    sp = common(sub.add_parser("charfun", help="evaluate theta at a point"))
    sp.add_argument("--z", required=True, help='comma-separated coordinates, e.g. "0.3+0.2j,0"')
    sp.set_defaults(func=cmd_charfun)
    sp = common(sub.add_parser("koszul", help="Koszul homology of lambda - T"))
    sp.add_argument("--lambda", dest="lam", required=True, help="comma-separated coordinates")
    sp.set_defaults(func=cmd_koszul)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, passed = args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalBreakdown as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
