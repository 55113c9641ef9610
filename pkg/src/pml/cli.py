"""Command-line front end.

Every subcommand prints a short human-readable result and, with ``-o``,
writes a JSON report that is checked against the bundled schema before it
is written. Reports carry a ``generated_at`` timestamp; everything else is a
pure function of the arguments, so seeded runs are reproducible.

Exit codes: 0 success, 1 numerical failure (non-converged quadrature and
similar), 2 invalid input or usage, 3 an Undecided verdict under ``--strict``.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

import jsonschema
import numpy as np

from . import __version__
from . import equidist, estimator, kakutani, measures1d, myk, yamasaki
from .quadrature import QuadratureConfig, QuadratureError

EXIT_OK, EXIT_NUMERIC, EXIT_INVALID, EXIT_UNDECIDED = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- number formatting ----------------------------------------------------------

def fmt(x: float) -> str:
    return f"{x:.15g}"


def to_json_value(obj: Any) -> Any:
    """Round floats to 15 significant digits; non-finite values and fractions become strings."""
    if isinstance(obj, dict):
        return {str(k): to_json_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_json_value(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return myk.format_number(obj, True)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(fmt(x))
    return obj


# -- IO ---------------------------------------------------------------------------

def load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None


def read_sequence(path: str) -> np.ndarray:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {text!r}") from None
    if not values:
        raise ValueError(f"{path}: no values")
    return np.asarray(values, dtype=float)


def sequence_text(values: np.ndarray) -> str:
    """One value per line, shortest repr that round-trips."""
    return "".join(f"{float(v)!r}\n" for v in values)


def write_sequence(values: np.ndarray, path: str | None) -> str:
    text = sequence_text(values)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode()).hexdigest()


def load_schema() -> dict[str, Any]:
    return json.loads(resources.files("pml").joinpath("schemas/report.schema.json").read_text())


def make_report(command: str, inputs: dict[str, Any], result: dict[str, Any]) -> dict[str, Any]:
    report = {
        "command": command,
        "version": __version__,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "inputs": to_json_value(inputs),
        "result": to_json_value(result),
    }
    jsonschema.validate(report, load_schema())
    return report


def report_text(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


# -- subcommands ------------------------------------------------------------------
# Each handler returns (summary line, report inputs, report result, exit code).

def _quad() -> QuadratureConfig:
    return QuadratureConfig.from_env()


def cmd_measure_validate(a):
    m = measures1d.measure_from_json(load_json(a.measure))
    rep = measures1d.validate(m, _quad())
    code = EXIT_OK if rep.usable else EXIT_INVALID
    line = rep.status if rep.usable else f"{rep.status}: {'; '.join(rep.reasons)}"
    return line, {"measure": m.to_json()}, rep.to_json(), code


def cmd_kakutani_classify(a):
    mu = kakutani.sequence_from_json(load_json(a.mu))
    nu = kakutani.sequence_from_json(load_json(a.nu))
    policy = kakutani.ClassifyPolicy(terms=a.terms, hard_floor=a.floor, q=_quad())
    v = kakutani.classify_products(mu, nu, policy)
    code = EXIT_UNDECIDED if a.strict and v.verdict == kakutani.UNDECIDED else EXIT_OK
    inputs = {"mu": mu.to_json(), "nu": nu.to_json(), "terms": a.terms, "hard_floor": a.floor}
    return f"{v.verdict} {fmt(v.partial_product)}", inputs, v.to_json(), code


def cmd_kakutani_affinity(a):
    mu = measures1d.measure_from_json(load_json(a.mu))
    nu = measures1d.measure_from_json(load_json(a.nu))
    alpha = kakutani.hellinger_affinity(mu, nu, _quad())
    return fmt(alpha), {"mu": mu.to_json(), "nu": nu.to_json()}, {"affinity": alpha}, EXIT_OK


def _myk_inputs_exact(*specs: Any) -> bool:
    """True when every numeric leaf of the given JSON specs is a rational literal."""
    def leaves(obj):
        if isinstance(obj, dict):
            for v in obj.values():
                yield from leaves(v)
        elif isinstance(obj, list):
            for v in obj:
                yield from leaves(v)
        elif obj is not None and not isinstance(obj, bool):
            yield obj
    def numeric(x) -> bool:
        if isinstance(x, str):
            if x.strip() in ("inf", "-inf", "+inf"):
                return False
            try:
                myk.exact(x)
            except (ValueError, ZeroDivisionError):
                return False  # a label such as a series kind
        return isinstance(x, (int, float, str))

    return all(myk.is_rational_literal(x) for s in specs for x in leaves(s) if numeric(x))


def _exact_str(value, exact_ok: bool) -> str | None:
    return myk.format_number(value, True) if exact_ok and not isinstance(value, float) else None


def cmd_myk_box(a):
    d_raw, b_raw = load_json(a.delta), load_json(a.box)
    value = myk.box_measure(myk.delta_from_json(d_raw), myk.box_from_json(b_raw))
    exact_ok = _myk_inputs_exact(d_raw, b_raw)
    line = myk.format_number(value, a.exact and exact_ok)
    result = {"value": float(value), "exact": _exact_str(value, exact_ok)}
    return line, {"delta": d_raw, "box": b_raw}, result, EXIT_OK


def _translation(delta, raw):
    if raw.get("witness"):
        return myk.example_witness(delta)
    return myk.translation_from_json(raw)


def cmd_myk_admissible(a):
    d_raw, g_raw = load_json(a.delta), load_json(a.translation)
    delta = myk.delta_from_json(d_raw)
    v = myk.admissible_translation(delta, _translation(delta, g_raw))
    code = EXIT_UNDECIDED if a.strict and v.status == myk.UNDECIDED else EXIT_OK
    return f"{v.status}: {v.reason}", {"delta": d_raw, "translation": g_raw}, v.to_json(), code


def cmd_myk_invariance(a):
    d_raw, b_raw, g_raw = load_json(a.delta), load_json(a.box), load_json(a.translation)
    delta = myk.delta_from_json(d_raw)
    rep = myk.invariance_check(delta, myk.box_from_json(b_raw), _translation(delta, g_raw))
    exact_ok = _myk_inputs_exact(d_raw, b_raw, g_raw)
    result = {"measure": float(rep.measure), "translated_measure": float(rep.translated_measure),
              "difference": float(rep.difference)}
    result["exact"] = ({k: myk.format_number(v, True) for k, v in
                        (("measure", rep.measure), ("translated_measure", rep.translated_measure),
                         ("difference", rep.difference))} if exact_ok else None)
    line = myk.format_number(rep.difference, a.exact and exact_ok)
    return line, {"delta": d_raw, "box": b_raw, "translation": g_raw}, result, EXIT_OK


def cmd_yamasaki_build(a):
    raw = load_json(a.coeffs)
    fam = yamasaki.build_family(yamasaki.coefficients_from_json(raw), a.check_terms)
    result = fam.to_json()
    result["product_of_c"] = fam.product_of_c() if fam.product_class == yamasaki.POSITIVE else 0.0
    result["members"] = [m.to_json() for m in fam.members(a.show)]
    code = EXIT_UNDECIDED if a.strict and fam.product_class == yamasaki.UNKNOWN else EXIT_OK
    return f"{fam.product_class} {fmt(result['product_of_c'])}", {"coefficients": raw}, result, code


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_yamasaki_density(a):
    raw = load_json(a.coeffs)
    fam = yamasaki.build_family(yamasaki.coefficients_from_json(raw))
    point = yamasaki.TruncatedPoint(tuple(_floats(a.point)))
    logd = yamasaki.log_myk_density(fam, point)
    result = {"point": list(point.prefix), "canonical": list(point.canonical().prefix),
              "density": math.exp(logd), "log_density": logd}
    return fmt(result["density"]), {"coefficients": raw, "point": list(point.prefix)}, result, EXIT_OK


def cmd_yamasaki_marginal(a):
    raw = load_json(a.coeffs)
    fam = yamasaki.build_family(yamasaki.coefficients_from_json(raw))
    rect = []
    for side in a.side:
        lo_hi = _floats(side)
        if len(lo_hi) != 2:
            raise ValueError(f"--side expects 'a,b', got {side!r}")
        rect.append(tuple(lo_hi))
    rep = yamasaki.marginal_consistency(fam, rect, a.depths, _quad())
    line = " ".join(f"m={m}:{fmt(r)}" for m, r in zip(rep.depths, rep.relative_defects))
    return line, {"coefficients": raw, "rectangle": rect, "depths": rep.depths}, rep.to_json(), EXIT_OK


def _generator(a) -> equidist.SequenceGenerator:
    raw = load_json(a.gen)
    if a.seed is not None:
        raw = {**raw, "seed": a.seed}
    return equidist.generator_from_json(raw)


def cmd_equi_generate(a):
    gen = _generator(a)
    values = equidist.generate(gen, a.n)
    digest = write_sequence(values, a.csv)
    result = {"n": a.n, "sha256": digest, "min": float(values.min()), "max": float(values.max())}
    line = f"wrote {a.n} values to {a.csv}" if a.csv else None
    return line, {"generator": gen.to_json(), "n": a.n}, result, EXIT_OK


def _intervals(raw: Sequence[str]) -> list[tuple[float, float]]:
    out = []
    for text in raw:
        pair = _floats(text)
        if len(pair) != 2:
            raise ValueError(f"--interval expects 'c,d', got {text!r}")
        out.append((pair[0], pair[1]))
    return out


def cmd_equi_stat(a):
    seq = read_sequence(a.seq)
    m = measures1d.measure_from_json(load_json(a.measure)) if a.measure else None
    rep = equidist.equidist_report(seq, m, _intervals(a.interval))
    result = {**rep.to_json(), "kind": "star-discrepancy" if m is None else "ks"}
    inputs = {"sequence": a.seq, "measure": m.to_json() if m else None}
    return fmt(rep.statistic), inputs, result, EXIT_OK


def cmd_equi_transform(a):
    seq = read_sequence(a.seq)
    m = measures1d.measure_from_json(load_json(a.measure))
    out = equidist.inverse_transform(seq, m)
    digest = write_sequence(out, a.csv)
    line = f"wrote {out.size} values to {a.csv}" if a.csv else None
    return line, {"sequence": a.seq, "measure": m.to_json()}, {"n": int(out.size), "sha256": digest}, EXIT_OK


def cmd_equi_cesaro(a):
    seq = read_sequence(a.seq)
    path = equidist.cesaro_mean_path(seq, a.tol)
    if a.csv:
        write_sequence(path.running_means, a.csv)
    line = f"{fmt(path.final_mean)} in_D={str(path.in_D).lower()} ({path.caveat})"
    return line, {"sequence": a.seq, "tol": a.tol}, path.to_json(), EXIT_OK


def cmd_estimate(a):
    fam_raw = load_json(a.family)
    fam = estimator.family_from_json(fam_raw)
    samples = [read_sequence(p) for p in a.sample]
    results = [estimator.well_founded_estimate(s, fam, a.tol) for s in samples]
    result = {"sink_id": fam.sink_id, "tol": a.tol,
              "estimates": [{"sample": p, **r.to_json()} for p, r in zip(a.sample, results)]}
    line = "\n".join(r.chosen for r in results)
    return line, {"family": fam.to_json(), "samples": list(a.sample), "tol": a.tol}, result, EXIT_OK


def cmd_separate(a):
    m1 = measures1d.measure_from_json(load_json(a.m1))
    m2 = measures1d.measure_from_json(load_json(a.m2))
    x0, gap = estimator.separation_witness(m1, m2, a.gap_floor)
    result = {"x0": x0, "gap": gap, "F1_x0": float(m1.cdf(x0)), "F2_x0": float(m2.cdf(x0))}
    return f"{fmt(x0)} {fmt(gap)}", {"m1": m1.to_json(), "m2": m2.to_json()}, result, EXIT_OK


def cmd_ortho_demo(a):
    m1 = measures1d.measure_from_json(load_json(a.m1))
    m2 = measures1d.measure_from_json(load_json(a.m2))
    rep = estimator.orthogonality_demo(m1, m2, a.n, a.seed)
    line = f"{rep.status} empirical={fmt(rep.empirical)} F1={fmt(rep.f1)} F2={fmt(rep.f2)}"
    inputs = {"m1": m1.to_json(), "m2": m2.to_json(), "n": a.n, "seed": a.seed}
    return line, inputs, rep.to_json(), EXIT_OK


# -- parser -----------------------------------------------------------------------

def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pml", description="Product measures, MYK boxes and equidistribution tools.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(parent, name: str, func: Callable, help_: str):
        sp = parent.add_parser(name, help=help_)
        sp.add_argument("-o", "--output", help="write the JSON report here")
        sp.set_defaults(func=func)
        return sp

    def group(name: str, help_: str):
        return sub.add_parser(name, help=help_).add_subparsers(dest="action", required=True,
                                                               parser_class=_Parser)

    g = group("measure", "one-dimensional measures")
    sp = leaf(g, "validate", cmd_measure_validate, "check normalisation, positivity and quantiles")
    sp.add_argument("--measure", required=True)

    g = group("kakutani", "product measures: affinity and dichotomy")
    sp = leaf(g, "classify", cmd_kakutani_classify, "Equivalent / Orthogonal / Undecided")
    sp.add_argument("--mu", required=True)
    sp.add_argument("--nu", required=True)
    sp.add_argument("--terms", type=_positive_int, default=64)
    sp.add_argument("--floor", type=float, default=1e-12)
    sp.add_argument("--strict", action="store_true", help="exit 3 on Undecided")
    sp = leaf(g, "affinity", cmd_kakutani_affinity, "Hellinger affinity of two measures")
    sp.add_argument("--mu", required=True)
    sp.add_argument("--nu", required=True)

    g = group("myk", "MYK measure on boxes")
    sp = leaf(g, "box", cmd_myk_box, "measure of a box")
    sp.add_argument("--delta", required=True)
    sp.add_argument("--box", required=True)
    sp.add_argument("--exact", action="store_true", help="print p/q when inputs are rational")
    sp = leaf(g, "admissible", cmd_myk_admissible, "is a translation admissible")
    sp.add_argument("--delta", required=True)
    sp.add_argument("--translation", required=True)
    sp.add_argument("--strict", action="store_true", help="exit 3 on Undecided")
    sp = leaf(g, "invariance", cmd_myk_invariance, "measure of a box before and after translation")
    sp.add_argument("--delta", required=True)
    sp.add_argument("--box", required=True)
    sp.add_argument("--translation", required=True)
    sp.add_argument("--exact", action="store_true", help="print p/q when inputs are rational")

    g = group("yamasaki", "plateau product densities")
    sp = leaf(g, "build", cmd_yamasaki_build, "validate coefficients and classify the product")
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--check-terms", type=_positive_int, default=64)
    sp.add_argument("--show", type=int, default=4, help="members to include in the report")
    sp.add_argument("--strict", action="store_true", help="exit 3 when the product class is unknown")
    sp = leaf(g, "density", cmd_yamasaki_density, "density at a truncated point")
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--point", required=True, help="comma-separated leading coordinates")
    sp = leaf(g, "marginal", cmd_yamasaki_marginal, "marginal consistency defects")
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--side", action="append", required=True, help="'a,b'; repeat per coordinate")
    sp.add_argument("--depths", type=int, nargs="+", default=[2, 4, 6])

    g = group("equi", "equidistributed sequences")
    sp = leaf(g, "generate", cmd_equi_generate, "generate a sequence")
    sp.add_argument("--gen", required=True)
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--seed", type=_seed)
    sp.add_argument("--csv", help="sequence output (default: stdout)")
    sp = leaf(g, "stat", cmd_equi_stat, "star discrepancy or KS distance to a measure")
    sp.add_argument("--seq", required=True)
    sp.add_argument("--measure")
    sp.add_argument("--interval", action="append", default=[], help="'c,d'; repeatable")
    sp = leaf(g, "transform", cmd_equi_transform, "quantile transport of a (0,1) sequence")
    sp.add_argument("--seq", required=True)
    sp.add_argument("--measure", required=True)
    sp.add_argument("--csv", help="sequence output (default: stdout)")
    sp = leaf(g, "cesaro", cmd_equi_cesaro, "running means")
    sp.add_argument("--seq", required=True)
    sp.add_argument("--tol", type=float, default=0.02)
    sp.add_argument("--csv", help="write the running means here")

    sp = leaf(sub, "estimate", cmd_estimate, "identify the law of one or more samples")
    sp.add_argument("--family", required=True)
    sp.add_argument("--sample", action="append", required=True, help="CSV sample; repeatable")
    sp.add_argument("--tol", type=float, default=estimator.DEFAULT_TOL)

    sp = leaf(sub, "separate", cmd_separate, "point of largest CDF difference")
    sp.add_argument("--m1", required=True)
    sp.add_argument("--m2", required=True)
    sp.add_argument("--gap-floor", type=float, default=estimator.GAP_FLOOR)

    sp = leaf(sub, "ortho-demo", cmd_ortho_demo, "empirical orthogonality of two product laws")
    sp.add_argument("--m1", required=True)
    sp.add_argument("--m2", required=True)
    sp.add_argument("--n", type=_positive_int, default=10_000)
    sp.add_argument("--seed", type=_seed, default=1)
    return p


def command_name(args: argparse.Namespace) -> str:
    return args.command if getattr(args, "action", None) is None else f"{args.command} {args.action}"


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    try:
        line, inputs, result, code = args.func(args)
        report = make_report(command_name(args), inputs, result)
        if args.output:
            Path(args.output).write_text(report_text(report), encoding="utf-8")
    except (QuadratureError, kakutani.AffinityError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, LookupError, OSError, NotImplementedError,
            jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if line:
        print(line)
    return code


def main() -> None:
    sys.exit(run())
