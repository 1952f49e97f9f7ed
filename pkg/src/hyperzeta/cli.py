"""Command-line interface: zeta, batch and bench subcommands.

Input is a JSON curve file (path or ``-`` for stdin):

    {"p": 7, "n": 2, "curve": [[1,0], [0,1], [0,0]],
     "modulus": [1, 0, 1],          # optional field modulus (default canonical)
     "batch": [[3,1], 0, [2,5]]}    # optional fiber parameters for `batch`

``curve`` lists the low coefficients a_0..a_{2g} of a monic odd-degree
model; residues of F_{p^n} are ints (n = 1) or length-n digit lists.
Output is canonical JSON on stdout (sorted keys, no whitespace).  Exit
codes: 0 ok, 1 invalid input, 2 mathematical domain error, 3 internal
precision failure.
"""

import argparse
import json
import os
import sys
import time

from .deformation import build_family
from .errors import (
    DomainError,
    HyperzetaError,
    InternalPrecisionFailure,
    InvalidInput,
)
from .odesolver import solve_full, solve_streaming, solve_multipoint
from .oracle import DEFAULT_BUDGET, count_points
from .padic import ZqElement
from .zeta import (
    assemble_zeta,
    build_pipeline_system,
    charpoly_lift,
    compute_zeta,
    norm_frobenius,
    point_counts,
)

EXIT_OK = 0
EXIT_INVALID_INPUT = 1
EXIT_MATH_DOMAIN = 2
EXIT_INTERNAL = 3


def _env_budget():
    raw = os.environ.get("HYPERZETA_ENUM_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise InvalidInput("HYPERZETA_ENUM_BUDGET must be an integer")


def _load_curvefile(path):
    try:
        if path == "-":
            data = json.load(sys.stdin)
        else:
            with open(path) as fh:
                data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read curve file: {exc}")
    if not isinstance(data, dict):
        raise InvalidInput("curve file must be a JSON object")
    for key in ("p", "n", "curve"):
        if key not in data:
            raise InvalidInput(f"curve file is missing {key!r}")
    p, n = data["p"], data["n"]
    if not (isinstance(p, int) and isinstance(n, int)):
        raise InvalidInput("p and n must be integers")
    curve = data["curve"]
    if not isinstance(curve, list) or len(curve) < 3 or len(curve) % 2 == 0:
        raise InvalidInput("curve must list an odd number >= 3 of coefficients")
    norm_curve = []
    for c in curve:
        if isinstance(c, int):
            norm_curve.append(c)
        elif isinstance(c, list) and all(isinstance(x, int) for x in c):
            norm_curve.append(tuple(c))
        else:
            raise InvalidInput("curve coefficients must be ints or int lists")
    modulus = data.get("modulus")
    if modulus is not None and not (
        isinstance(modulus, list) and all(isinstance(x, int) for x in modulus)
    ):
        raise InvalidInput("modulus must be an integer list")
    batch = data.get("batch")
    if batch is not None:
        if not isinstance(batch, list):
            raise InvalidInput("batch must be a list of fiber parameters")
        normed = []
        for b in batch:
            if isinstance(b, int):
                normed.append(b)
            elif isinstance(b, list) and all(isinstance(x, int) for x in b):
                normed.append(tuple(b))
            else:
                raise InvalidInput("batch entries must be ints or int lists")
        batch = normed
    return p, n, norm_curve, modulus, batch


def _emit(obj):
    sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def _stats_dict(stats):
    return {
        "mode": stats.mode,
        "steps": stats.steps,
        "peak_retained": stats.peak_retained,
        "aux_retained": stats.aux_retained,
        "max_step_loss": stats.max_step_loss,
    }


def cmd_zeta(args):
    p, n, curve, modulus, _batch = _load_curvefile(args.file)
    budget = args.verify_budget
    if budget:
        budget = min(budget, _env_budget())
    result, stats = compute_zeta(
        p, n, curve, mode=args.mode, verify_budget=budget, with_stats=True,
        modulus=modulus,
    )
    out = result.as_dict()
    if args.stats:
        out["stats"] = _stats_dict(stats)
        out["stats"]["working_precision"] = None  # filled below
        from .zeta import pipeline_width

        out["stats"]["working_precision"] = pipeline_width(p, n, result.g)
    _emit(out)
    return EXIT_OK


def _residue_digits(ctx, value):
    if isinstance(value, int):
        return (value % ctx.p,) + (0,) * (ctx.n - 1)
    digits = tuple(int(x) % ctx.p for x in value)
    if len(digits) != ctx.n:
        raise InvalidInput(f"fiber residue needs {ctx.n} digits")
    return digits


def _curve_at_fiber(fam, gamma_res):
    """Residues of Qbar(x, gamma_bar): (a_i - b_i) gamma + b_i over F_{p^n}."""
    ctx = fam.ctx
    out = []
    for i in range(2 * fam.g + 1):
        a = fam.Q1res[i]
        b = (fam.Q0coeffs[i] % ctx.p,) + (0,) * (ctx.n - 1)
        diff = tuple((x - y) % ctx.p for x, y in zip(a, b))
        val = ctx.res_add(ctx.res_mul(diff, gamma_res), b)
        out.append(val)
    return out


def cmd_batch(args):
    p, n, curve, modulus, batch = _load_curvefile(args.file)
    if not batch:
        raise InvalidInput("batch command needs a 'batch' list in the file")
    ctx, fam, sys_ = build_pipeline_system(p, n, curve, modulus=modulus)
    c = fam.constants()
    g = fam.g
    q = p ** n

    fibers = [_residue_digits(ctx, b) for b in batch]
    # skip fibers where the family degenerates; dedupe before the solve
    entries = [None] * len(fibers)
    unique = {}
    for idx, res in enumerate(fibers):
        lift = ctx.teichmuller_raw(res)
        if ctx.res_is_zero(ctx.residue(fam.r_at(lift))):
            entries[idx] = {
                "fiber": list(res),
                "skipped": "resultant vanishes at this fiber",
            }
            continue
        unique.setdefault(res, (lift, []))[1].append(idx)
    points = [ZqElement(ctx, lift) for lift, _ in unique.values()]
    if points:
        values = solve_multipoint(sys_, points)
    else:
        values = []
    budget = args.verify_budget
    if budget:
        budget = min(budget, _env_budget())
    for (res, (lift, idxs)), K_gamma in zip(unique.items(), values):
        try:
            r_gamma = fam.r_at(lift)
            factor = ctx.pow(ctx.inv(r_gamma), c.M)
            F_gamma = K_gamma.mul_raw(factor)
            Fq = norm_frobenius(F_gamma, n)
            P = charpoly_lift(Fq, q, g, c.m)
            result = assemble_zeta(P, q, p, n, g)
            if budget:
                spec_curve = _curve_at_fiber(fam, res)
                ks = []
                k = 1
                while q ** k <= budget:
                    ks.append(k)
                    k += 1
                derived = point_counts(P, q, ks[-1]) if ks else []
                oracle = [
                    count_points(p, n, spec_curve, k=k, budget=budget,
                                 base_modulus=list(ctx.phi))
                    for k in ks
                ]
                result.checks["oracle"] = {
                    "budget": budget,
                    "k_checked": ks,
                    "match": derived[: len(ks)] == oracle,
                }
            payload = result.as_dict()
            payload["fiber"] = list(res)
            for idx in idxs:
                entries[idx] = payload
        except HyperzetaError as exc:
            for idx in idxs:
                entries[idx] = {"fiber": list(res), "error": str(exc)}
    _emit({"p": p, "n": n, "g": g, "q": q, "fibers": entries})
    return EXIT_OK


def cmd_bench(args):
    p, n, curve, modulus, _batch = _load_curvefile(args.file)
    ctx, fam, sys_ = build_pipeline_system(p, n, curve, modulus=modulus)

    runs = []
    systems = [("ell", sys_)]
    if args.ell_scale and args.ell_scale != 1:
        # rebuilt with the truncation order artificially padded
        _, _, sys2 = build_pipeline_system(
            p, n, curve, modulus=modulus, ell_scale=args.ell_scale
        )
        systems.append((f"ell*{args.ell_scale}", sys2))
    for label, system in systems:
        for mode in (("stream", "full") if args.compare_modes else ("stream",)):
            t0 = time.time()
            if mode == "stream":
                _, st = solve_streaming(system, 1, with_stats=True)
            else:
                _, st = solve_full(system, with_stats=True)
            runs.append(
                {
                    "label": label,
                    "mode": mode,
                    "ell": system.ell,
                    "steps": st.steps,
                    "peak_retained": st.peak_retained,
                    "aux_retained": st.aux_retained,
                    "wall_time": round(time.time() - t0, 6),
                }
            )
    stream_peaks = {r["peak_retained"] for r in runs if r["mode"] == "stream"}
    _emit(
        {
            "p": p,
            "n": n,
            "g": fam.g,
            "zeta": sys_.zeta,
            "window_size": sys_.window_size,
            "stream_peak_invariant": len(stream_peaks) == 1,
            "stream_peak_within_zeta": all(
                pk <= sys_.zeta + 2 for pk in stream_peaks
            ),
            "runs": runs,
        }
    )
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hyperzeta",
        description="Zeta functions of hyperelliptic curves over F_{p^n} "
        "by p-adic deformation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pz = sub.add_parser("zeta", help="zeta function of one curve")
    pz.add_argument("file", help="curve JSON file, or - for stdin")
    pz.add_argument("--mode", choices=("stream", "full"), default="stream")
    pz.add_argument("--verify-budget", type=int, default=0,
                    help="cross-check counts against enumeration up to this "
                    "many field elements (0 = off)")
    pz.add_argument("--stats", action="store_true",
                    help="attach solver statistics to the output")
    pz.set_defaults(func=cmd_zeta)

    pb = sub.add_parser("batch", help="zeta functions of many fibers of one family")
    pb.add_argument("file", help="curve JSON file with a 'batch' list, or -")
    pb.add_argument("--verify-budget", type=int, default=0)
    pb.set_defaults(func=cmd_batch)

    pm = sub.add_parser("bench", help="memory/time instrumentation of the solver")
    pm.add_argument("file", help="curve JSON file, or - for stdin")
    pm.add_argument("--ell-scale", type=int, default=2,
                    help="also run with the truncation order scaled by this factor")
    pm.add_argument("--compare-modes", action="store_true",
                    help="run full mode alongside streaming")
    pm.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except InternalPrecisionFailure as exc:
        print(f"internal precision failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_MATH_DOMAIN
    except HyperzetaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
