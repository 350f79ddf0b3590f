"""Batch command-line front end (`cst`): every operation, JSON out.

One command per process: the payload JSON goes to stdout, diagnostics to
stderr.  Exit codes: 0 ok, 2 usage error, 3 computation error.  All numbers
are serialized with 17 significant digits so outputs are self-describing and
byte-reproducible.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

from . import families  # registers family builders  # noqa: F401
from .automaton import count_language, factor_automaton, growth_slope
from .constructions import SftSpec, build_augmentation, build_theorem_a
from .entropy import (
    WeightedPotential,
    genset_entropy,
    prefix_entropy,
    sofic_approx_entropies,
    solve_entropy,
    solve_pressure,
)
from .errors import CodedShiftError, NoRootError
from .genset import GeneratingSet, unique_representation_check
from .measures import gibbs_scan, g_cylinder, measure_entropy, induced_entropy, mme, word_cylinder
from .sampler import empirical_block_counts, sample_window
from .words import Alphabet, Word, as_word


def _fmt(obj):
    """Render floats at 17 significant digits; keep ints exact."""
    if isinstance(obj, float):
        if math.isfinite(obj):
            return format(obj, ".17g")
        return '"%s"' % obj
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Word):
        return json.dumps(obj.text())
    if isinstance(obj, dict):
        inner = ",".join(f"{json.dumps(str(k))}:{_fmt(v)}" for k, v in obj.items())
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_fmt(v) for v in obj) + "]"
    raise TypeError(f"unserializable value {obj!r}")


@dataclass
class CommandResult:
    status: str
    payload: dict
    diagnostics: list
    exit_code: int


def _ok(payload, diagnostics=None):
    return CommandResult("ok", payload, diagnostics or [], 0)


def _fail(message, diagnostics=None):
    return CommandResult("error", {"status": "error", "error": message}, diagnostics or [], 3)


def _load_genset(args) -> GeneratingSet:
    if getattr(args, "genset", None):
        return GeneratingSet.load(args.genset)
    if getattr(args, "family", None):
        params = json.loads(args.params) if getattr(args, "params", None) else {}
        return families.preset(args.family, params)
    raise CodedShiftError("supply --genset FILE or --family NAME")


def _sol_payload(sol):
    return {
        "lambda_star": sol.lambda_star,
        "h_top": sol.h_top,
        "bracket": list(sol.bracket),
        "depth": sol.depth,
        "residual": sol.residual,
        "tol": sol.tol,
        "degenerate": sol.degenerate,
    }


# ----------------------------------------------------------------------
def _cmd_entropy(args):
    G = _load_genset(args)
    try:
        sol = solve_entropy(G, tol=args.tol)
    except NoRootError as exc:
        return _ok(
            {
                "status": "no_root",
                "sup_estimate": exc.sup_estimate,
                "depth": exc.depth,
                "tol": args.tol,
            },
            [str(exc)],
        )
    return _ok(_sol_payload(sol))


def _cmd_pressure(args):
    G = _load_genset(args)
    phi = WeightedPotential.length_linear(args.weight_const, args.weight_slope)
    sol = solve_pressure(G, phi, tol=args.tol)
    payload = _sol_payload(sol)
    payload["pressure"] = sol.pressure
    payload["weight"] = {"const": args.weight_const, "slope": args.weight_slope}
    return _ok(payload)


def _cmd_mme(args):
    G = _load_genset(args)
    sol = solve_entropy(G, tol=args.tol)
    mu = mme(G, sol)
    return _ok(
        {
            "lambda_star": sol.lambda_star,
            "h_top": sol.h_top,
            "c": mu.c,
            "c_tail": mu.c_tail,
            "p_total": mu.p_total,
            "p_tail": mu.p_tail,
            "base_measure": mu.base_measure(),
            "induced_entropy": induced_entropy(mu),
            "measure_entropy": measure_entropy(mu),
            "depth": mu.depth,
            "tol": args.tol,
        }
    )


def _cmd_cylinder(args):
    G = _load_genset(args)
    sol = solve_entropy(G, tol=args.tol)
    mu = mme(G, sol)
    est = word_cylinder(mu, as_word(args.word), L=args.max_gen_len)
    return _ok(
        {
            "word": args.word,
            "value": est.value,
            "tail_error": est.tail_error,
            "covers_enumerated": est.covers_enumerated,
            "cutoff": est.cutoff,
        }
    )


def _cmd_gibbs(args):
    G = _load_genset(args)
    sol = solve_entropy(G, tol=args.tol)
    mu = mme(G, sol)
    words = [as_word(w) for w in args.word]
    report = gibbs_scan(mu, words, sol.h_top, L=args.max_gen_len)
    return _ok(
        {
            "h": report.h,
            "cutoff": report.cutoff,
            "inf_ratio": report.inf_ratio,
            "sup_ratio": report.sup_ratio,
            "ratios": {w.text(): r for w, r in report.ratios},
        }
    )


def _cmd_sample(args):
    G = _load_genset(args)
    sol = solve_entropy(G, tol=args.tol)
    mu = mme(G, sol)
    if args.count == 1:
        win = sample_window(mu, args.len, args.seed)
        return _ok(
            {
                "seed": args.seed,
                "len": args.len,
                "word": win.word.text(),
                "origin_block": win.origin_block.text(),
                "offset": win.offset,
            }
        )
    counts = empirical_block_counts(mu, args.block_n or args.len, args.count, args.seed)
    payload = {
        "seed": args.seed,
        "len": args.block_n or args.len,
        "count": args.count,
        "blocks": {Word(t).text(): k for t, k in sorted(counts.items())},
    }
    return _ok(payload)


def _cmd_ud_check(args):
    G = _load_genset(args)
    report = unique_representation_check(G, horizon=args.n or 10, max_gen_len=args.max_gen_len)
    return _ok(
        {
            "passed": report.passed,
            "certified": report.certified,
            "certificate": report.certificate,
            "witness": report.witness.text() if report.witness else None,
            "horizon": report.horizon,
            "max_gen_len": report.max_gen_len,
            "searched_words": report.searched_words,
            "search_complete": report.search_complete,
        }
    )


def _cmd_family(args):
    G = _load_genset(args)
    depth = args.depth or 6
    words = G.words_up_to(depth)
    payload = {
        "name": G.name,
        "kind": G.kind,
        "alphabet": list(G.alphabet.symbols),
        "max_len": depth,
        "count": len(words),
        "spectrum": G.length_spectrum(depth),
        "words": [w.text() for w in words],
    }
    est = genset_entropy(G, max(depth, 8))
    payload["h_genset_estimate"] = est.estimate
    payload["h_genset_closed_form"] = est.closed_form
    return _ok(payload)


def _cmd_construct(args):
    if args.what == "theorem-a":
        if args.sft:
            with open(args.sft, "r", encoding="utf-8") as fh:
                spec = json.load(fh)
        else:
            spec = {"alphabet": ["0", "1"], "forbidden": ["11"]}
        Z = SftSpec.build(
            Alphabet(spec["alphabet"]), [as_word(f) for f in spec["forbidden"]]
        )
        build = build_theorem_a(Z, args.epsilon, args.n or 4)
        return _ok(
            {
                "epsilon": build.epsilon,
                "m_schedule": list(build.m_schedule),
                "generators": [g.text() for g in build.generators],
                "lengths": [len(g) for g in build.generators],
                "bridges": {"%s->%s" % k: v.text() for k, v in build.bridges.items()},
                "certificate_sum": build.certificate_sum,
                "certificate_tail": build.certificate_tail,
                "certificate_total": build.certificate_total,
                "genset": build.genset.to_json(),
            }
        )
    if args.what == "augment":
        G = _load_genset(args)
        build = build_augmentation(G, args.epsilon, args.depth or 3)
        return _ok(
            {
                "epsilon": build.epsilon,
                "markers": [build.u.text(), build.v.text()],
                "w_words": [w.text() for w in build.w_words],
                "f_lengths": [len(f) for f in build.f_words],
                "lambda_base": build.lambda_base,
                "lambda_augmented": build.lambda_aug,
                "bound": build.lambda_base * math.exp(build.epsilon),
                "cap": build.cap,
                "unique_decipherable": build.ud.decipherable,
                "m_schedule": list(build.m_schedule),
            }
        )
    raise CodedShiftError(f"unknown construction {args.what!r}")


def _cmd_language(args):
    G = _load_genset(args)
    m = args.m or G.count_up_to(G.max_len or 8)
    words = G.words_up_to(G.max_len) if G.is_explicit else None
    if words is None:
        # finite prefix of a family
        words = []
        n = 0
        while len(words) < m:
            n += 1
            words.extend(G.words_of_length(n))
        words = words[:m]
    A = factor_automaton(words)
    n_top = args.n or 30
    counts = [count_language(A, n) for n in range(1, n_top + 1)]
    payload = {
        "m": len(words),
        "states": A.n_states,
        "counts": counts,
        "slope": growth_slope(A, n_top),
    }
    try:
        sol = prefix_entropy(G, len(words), tol=args.tol)
        payload["log_lambda_m"] = sol.h_top
        payload["slope_minus_log_lambda_m"] = payload["slope"] - sol.h_top
    except NoRootError:
        payload["log_lambda_m"] = None
    return _ok(payload)


def _cmd_sofic(args):
    G = _load_genset(args)
    entries = sofic_approx_entropies(G, args.m or 8, tol=args.tol)
    payload = {
        "entries": [
            {"m": e.m, "status": e.status, "lambda_m": e.lambda_m, "h": e.h}
            for e in entries
        ]
    }
    checkpoint = G.meta.get("sofic_checkpoint")
    if checkpoint:
        m = G.count_up_to(checkpoint["max_len"])
        sol = prefix_entropy(G, m, tol=args.tol)
        payload["checkpoint"] = {
            "max_len": checkpoint["max_len"],
            "m": m,
            "lambda_m": sol.lambda_star,
        }
    return _ok(payload)


# ----------------------------------------------------------------------
def _parser():
    ap = argparse.ArgumentParser(
        prog="cst",
        description="coded shift toolkit: entropy, measures, sampling, constructions",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--genset", help="generating-set JSON file")
        p.add_argument("--family", help="built-in family name")
        p.add_argument("--params", help="family params as JSON")
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--max-gen-len", dest="max_gen_len", type=int, default=None)
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("entropy", help="solve the characteristic equation")
    common(p)
    p.set_defaults(fn=_cmd_entropy)

    p = sub.add_parser("pressure", help="solve the weighted characteristic equation")
    common(p)
    p.add_argument("--weight-const", dest="weight_const", type=float, default=0.0)
    p.add_argument("--weight-slope", dest="weight_slope", type=float, default=0.0)
    p.set_defaults(fn=_cmd_pressure)

    p = sub.add_parser("mme", help="maximal-measure constants")
    common(p)
    p.set_defaults(fn=_cmd_mme)

    p = sub.add_parser("cylinder", help="cylinder mass of a word")
    common(p)
    p.add_argument("--word", required=True)
    p.set_defaults(fn=_cmd_cylinder)

    p = sub.add_parser("gibbs", help="Gibbs-comparison ratios for words")
    common(p)
    p.add_argument("--word", action="append", required=True)
    p.set_defaults(fn=_cmd_gibbs)

    p = sub.add_parser("sample", help="stationary window sampling")
    common(p, seed=True)
    p.add_argument("--len", type=int, default=16)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--block-n", dest="block_n", type=int, default=None)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("ud-check", help="unique decipherability / representation")
    common(p)
    p.add_argument("--n", type=int, default=10, help="search horizon")
    p.set_defaults(fn=_cmd_ud_check)

    p = sub.add_parser("family", help="dump a family's words and spectrum")
    common(p)
    p.add_argument("--depth", type=int, default=6)
    p.set_defaults(fn=_cmd_family)

    p = sub.add_parser("construct", help="run a generator construction")
    p.add_argument("what", choices=["theorem-a", "augment"])
    common(p)
    p.add_argument("--sft", help="SFT spec JSON file (theorem-a)")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(fn=_cmd_construct)

    p = sub.add_parser("language", help="factor-automaton language counts")
    common(p)
    p.add_argument("--m", type=int, default=None, help="generator prefix size")
    p.add_argument("--n", type=int, default=30, help="count words up to this length")
    p.set_defaults(fn=_cmd_language)

    p = sub.add_parser("sofic", help="entropies of generator-prefix approximations")
    common(p)
    p.add_argument("--m", type=int, default=8)
    p.set_defaults(fn=_cmd_sofic)

    return ap


def run(argv) -> CommandResult:
    """Dispatch one command; never raises for computation errors."""
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage to stderr
        return CommandResult("usage", {}, [], 2 if exc.code else 0)
    try:
        return args.fn(args)
    except CodedShiftError as exc:
        return _fail(str(exc))
    except FileNotFoundError as exc:
        return _fail(f"file not found: {exc.filename}")
    except (ValueError, KeyError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")


def main(argv=None) -> int:
    result = run(sys.argv[1:] if argv is None else argv)
    for line in result.diagnostics:
        print(line, file=sys.stderr)
    if result.status == "usage":
        return result.exit_code
    print(_fmt(result.payload))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
