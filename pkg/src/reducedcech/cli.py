"""Command-line front end.

Subcommands: cohomology, gysin-verify, tdualize, bhm-compare.  Every report
is JSON with sorted keys and is a pure function of the inputs and the seed.

Exit codes: 0 success, 2 malformed input, 3 a mathematical check failed
(including a non-cocycle F or a non-closed flux), 4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from importlib import metadata
from pathlib import Path

from . import intlinalg as la
from . import reduced as red
from .cochain import Cochain, CochainError, CoefficientModule, cech_d, cochain_from_json, zero_cochain
from .complex import FIXTURE_NAMES, ComplexError, complex_from_json, fixture

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MATH = 3
EXIT_INTERNAL = 4


class InputError(Exception):
    pass


class MathFailure(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


# input loading --------------------------------------------------------------------------

def _load_json_arg(text, what):
    """Inline JSON (starting with '{') or a path to a JSON file."""
    if text.lstrip().startswith("{"):
        src = text
    else:
        p = Path(text)
        if not p.is_file():
            raise InputError(f"{what}: no such file {text!r}")
        src = p.read_text()
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON ({exc})") from exc


def load_complex(spec):
    if spec in FIXTURE_NAMES:
        return fixture(spec), {"fixture": spec}
    try:
        data = _load_json_arg(spec, "--complex")
        K = complex_from_json(data)
    except ComplexError as exc:
        raise InputError(f"--complex: {exc}") from exc
    return K, K.to_json()


def _top_generator(K):
    gens = red.cech_cohomology(K, 2, "Z").generators()
    if not gens:
        raise InputError("--euler gen:p needs a nonzero H^2 of the complex")
    return gens[0]


def load_euler(K, spec, rank):
    """F from a cochain JSON, from 'gen:p' (p times the first H^2 generator in component 0), or zero."""
    coeff = CoefficientModule("Z", "vector", rank)
    if spec is None:
        return zero_cochain(K, 2, coeff, True), {"zero": True}
    if spec.startswith("gen:"):
        try:
            p = int(spec[4:])
        except ValueError as exc:
            raise InputError(f"--euler: bad multiple in {spec!r}") from exc
        g = _top_generator(K)
        vals = {t: (p * v[0],) + (0,) * (rank - 1) for t, v in g.values.items()}
        return Cochain(K, 2, coeff, vals, normalized=True, check=False), {"generator_multiple": p}
    data = _load_json_arg(spec, "--euler")
    try:
        F = cochain_from_json(K, data, normalized=bool(data.get("normalized", True)))
    except (CochainError, AttributeError) as exc:
        raise InputError(f"--euler: {exc}") from exc
    if F.degree != 2 or F.coeff.shape != "vector":
        raise InputError("--euler: expected a degree-2 vector cochain")
    return F, data


def make_twist(F):
    bad = cech_d(F)
    if not bad.is_zero():
        raise MathFailure("Euler cochain is not a Cech cocycle", witness=bad.to_json())
    return red.EulerTwist(F, check=False)


def load_flux(tw, spec):
    from . import tduality as td
    if spec is None:
        raise InputError("tdualize needs --flux")
    if ":" in spec and not spec.lstrip().startswith("{") and not Path(spec).is_file():
        part, _, coords = spec.partition(":")
        try:
            cs = [int(c) for c in coords.split(",")]
        except ValueError as exc:
            raise InputError(f"--flux: bad coordinates in {spec!r}") from exc
        try:
            return td.flux_from_class(tw, part, cs), {"part": part, "coordinates": cs}
        except td.TDualityError as exc:
            raise InputError(f"--flux: {exc}") from exc
    data = _load_json_arg(spec, "--flux")
    try:
        normalized = bool(data.get("normalized", True))
        comps = data["components"]
        parts = [None if c is None else cochain_from_json(tw.complex, c, normalized) for c in comps]
        x = red.ReducedCochain(int(data.get("degree", 3)), *parts)
    except (KeyError, TypeError, CochainError, red.ReducedError) as exc:
        raise InputError(f"--flux: {exc}") from exc
    return x, data


def parse_degrees(text, K):
    lo_hi = text.split("..")
    try:
        if len(lo_hi) == 1:
            lo = hi = int(lo_hi[0])
        elif len(lo_hi) == 2:
            lo, hi = int(lo_hi[0]), int(lo_hi[1])
        else:
            raise ValueError
    except ValueError as exc:
        raise InputError(f"--degrees: expected 'a..b', got {text!r}") from exc
    top = K.dim + 2
    if lo < 0 or hi > top or lo > hi:
        raise InputError(f"--degrees: range must lie within 0..{top}")
    return list(range(lo, hi + 1))


def _digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


# commands --------------------------------------------------------------------------------

def _group_json(g):
    return {"group": g.describe(), "signature": _sig(g.signature())}


def _sig(s):
    return json.loads(json.dumps(s))


def cmd_cohomology(args, K, tw):
    degs = parse_degrees(args.degrees or f"0..{K.dim + 1}", K)
    ring = args.ring
    data = red.GysinData(tw)
    table = []
    for k in degs:
        row = {"degree": k,
               "cech": _group_json(data.group("cech", k, ring)),
               "reduced": _group_json(data.group("reduced", k, ring)),
               "bar": _group_json(data.group("bar", k, ring))}
        table.append(row)
    out = {"ring": ring, "model": "constant", "table": table}
    if args.model == "pp":
        out["model"] = "pp"
        out["pp"] = _pp_witnesses(tw, degs, random.Random(args.seed), args.trials)
    return out


def _pp_witnesses(tw, degs, rng, trials):
    """Homotopy identity and constructive vanishing in the piecewise-polynomial model."""
    from . import ppfields as pp
    K = tw.complex
    out = []
    for k in degs:
        row = {"degree": k}
        if k >= 1:
            bad = 0
            for _ in range(trials):
                phi = pp.random_pp_cochain(K, k, rng)
                if not pp.homotopy_residual(phi).is_zero():
                    bad += 1
            row["homotopy_failures"] = bad
            row["homotopy_trials"] = trials
        if k >= 3:
            gens = red.ReducedModel(tw, True).group(k).generators()
            done = 0
            for g in gens:
                x = pp.pp_constant_reduced(red.ordered_lift(g, tw))
                pp.exact_primitive(x, tw)
                done += 1
            row["vanishing"] = {"integral_generators_killed": done, "of": len(gens)}
        out.append(row)
    return out


def cmd_gysin_verify(args, K, tw):
    degs = parse_degrees(args.degrees or f"0..{min(4, K.dim + 2)}", K)
    data = red.GysinData(tw)
    segments = []
    if args.ring == "Q":
        for k in degs:
            segments += [s.to_json() for s in red.gysin_segments_q(data, k)]
    elif args.ring == "Z":
        if 0 in degs:
            segments.append(red.gysin_left_end(data).to_json())
        for k in degs:
            segments += [s.to_json() for s in red.gysin_segments(data, k)]
    else:
        raise InputError("gysin-verify supports --ring Z or Q")
    vertical = []
    squares = []
    for k in degs:
        for which, model in (("cech", data.cech), ("reduced", data.red), ("bar", data.bar)):
            v = red.verify_coefficient_sequence(model, k)
            vertical.append({"complex": which, "degree": k, **v})
        squares += red.ladder_squares(data, k)
    ok = (all(s["exact"] for s in segments)
          and all(all(v[key] for key in ("torsion_image", "kernel_of_bockstein", "rational_iso")) for v in vertical)
          and all(s["commutes"] for s in squares))
    out = {"ring": args.ring, "segments": segments, "vertical": vertical, "squares": squares, "all_exact": ok}
    if not ok:
        raise MathFailure("a Gysin segment, coefficient sequence or ladder square failed", witness=out)
    return out


def cmd_tdualize(args, K, tw):
    from . import tduality as td
    flux, flux_src = load_flux(tw, args.flux)
    try:
        inp = td.TDualityInput(tw, flux)
    except td.TDualityError as exc:
        raise MathFailure(str(exc), witness=flux.to_json()) from exc
    res = td.tdualize(inp)
    return {"flux": flux_src, **res.to_json()}


def cmd_bhm_compare(args, K, tw):
    from . import bhmbridge as bb
    degs = parse_degrees(args.degrees or f"2..{min(4, K.dim + 2)}", K)
    rng = random.Random(args.seed)
    try:
        bridge = bb.Bridge(tw, correction=args.correction)
    except bb.BridgeError as exc:
        raise InputError(str(exc)) from exc
    results = []
    failures = []
    for k in degs:
        if k < 2:
            continue
        lifts = [red.ordered_lift(x, tw) for x in red.ReducedModel(tw).group(k).generators()]
        bar_lifts = [red.ordered_lift(x, tw) for x in red.BarModel(tw).group(k - 1).generators()]
        counts = {"cocycle": 0, "coboundary": 0, "omega": 0}
        for t in range(args.trials):
            x = red.random_closed(tw, k, rng, classes=lifts)
            r = bridge.cocycle_residual(x)
            if not r.is_zero():
                counts["cocycle"] += 1
                failures.append({"check": "cocycle", "degree": k, "input": x.to_json()})
            y = tw.random(k - 1, rng)
            r = bridge.coboundary_residual(y)
            if not r.is_zero():
                counts["coboundary"] += 1
                failures.append({"check": "coboundary", "degree": k, "input": y.to_json()})
            yb = tw.zero_bar(k - 1)
            for b in bar_lifts:
                yb = yb + b.scale(rng.randint(-2, 2))
            if k >= 3:
                yb = yb + tw.Dbar(tw.random_bar(k - 2, rng))
            r = bridge.omega_residual(yb)
            if not r.is_zero():
                counts["omega"] += 1
                failures.append({"check": "omega", "degree": k, "input": yb.to_json()})
        results.append({"degree": k, "trials": args.trials, "nonzero_residuals": counts})
    out = {"correction": args.correction, "results": results}
    if failures:
        raise MathFailure("nonzero bridge residual", witness={**out, "failures": failures[:3]})
    return out


COMMANDS = {
    "cohomology": cmd_cohomology,
    "gysin-verify": cmd_gysin_verify,
    "tdualize": cmd_tdualize,
    "bhm-compare": cmd_bhm_compare,
}


def build_parser():
    p = argparse.ArgumentParser(prog="reducedcech", description="Dimensionally reduced Cech cohomology toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--complex", required=True, help=f"fixture name ({', '.join(FIXTURE_NAMES)}) or JSON path")
        s.add_argument("--euler", help="Euler cocycle: JSON path, inline JSON, or gen:p")
        s.add_argument("--rank", type=int, default=None, help="torus rank n when --euler does not fix it")
        s.add_argument("--ring", choices=["Z", "Q", "QZ"], default="Z")
        s.add_argument("--model", choices=["constant", "pp"], default="constant")
        s.add_argument("--degrees", help="degree range a..b")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out", help="write the report here instead of stdout")
        s.add_argument("--timing", action="store_true", help="include wall-clock timing (breaks byte-identity)")
        if name == "tdualize":
            s.add_argument("--flux", help="flux: JSON path, inline JSON, or part:coords (scalar, vector, matrix)")
        if name == "bhm-compare":
            s.add_argument("--trials", type=int, default=5)
            s.add_argument("--correction", choices=["based", "contracted"], default="based")
        if name == "cohomology":
            s.add_argument("--trials", type=int, default=10, help="random PP cochains per degree (--model pp)")
    return p


def _emit(report, path):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    report = {"command": args.command, "seed": args.seed, "version": _version()}
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        if args.rank is not None and args.rank < 1:
            raise InputError("--rank must be positive")
        K, ksrc = load_complex(args.complex)
        F, fsrc = load_euler(K, args.euler, args.rank or 1)
        if args.rank is not None and F.coeff.n != args.rank:
            raise InputError("--rank disagrees with the Euler cochain")
        report["inputs"] = {"complex": ksrc, "euler": fsrc, "rank": F.coeff.n,
                            "ring": args.ring, "model": args.model, "degrees": args.degrees}
        report["inputs"]["digest"] = _digest(report["inputs"])
        tw = make_twist(F)
        report["results"] = COMMANDS[args.command](args, K, tw)
    except InputError as exc:
        code = EXIT_INPUT
        report["error"] = {"kind": "input", "message": str(exc)}
    except MathFailure as exc:
        code = EXIT_MATH
        report["error"] = {"kind": "verification", "message": str(exc), "witness": exc.witness}
    except (red.VerificationError, la.LinAlgError) as exc:
        code = EXIT_INTERNAL
        report["error"] = {"kind": "internal", "message": str(exc),
                           "witness": getattr(exc, "witness", None)}
    except Exception as exc:  # noqa: BLE001 - every failure path still reports JSON
        code = EXIT_INTERNAL
        report["error"] = {"kind": "internal", "message": f"{type(exc).__name__}: {exc}"}
    if args.timing:
        report["seconds"] = round(time.perf_counter() - t0, 3)
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
