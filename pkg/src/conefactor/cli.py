"""Command-line harness: every decision procedure, batch-friendly.

Inputs are builtin names, paths to JSON files, or inline JSON.  Reports are
JSON (default) or CSV with exact rational strings.  Exit codes: 0 for a
positive decision (feasible / true / all-pass), 1 for a negative decision,
2 for input errors, 3 for heuristic-inconclusive outcomes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

from . import instances, serialize
from .bell import chsh_family, evaluate_witness, has_lhv
from .extend import (
    gn_lhv_ns,
    is_n_extendable_behavior,
    is_n_extendable_multimeter,
    nwise_compatible_ns,
)
from .factor import (
    FactorError,
    binary_pair_post,
    four_outcome_joint,
    seesaw_search,
    three_outcome_joint,
    verify_factorization,
)
from .meters import (
    classical_simulates,
    compatibility_robustness,
    is_compatible,
)
from .polysimplex import make_polysimplex, noisy_polysimplex
from .ratlin import rat, rat_str
from .steering import has_lhs, steering_robustness


EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3


@dataclass
class JobSpec:
    command: str
    payload: dict
    fmt: str = "json"
    seed: Optional[int] = None


class InputError(ValueError):
    pass


def _load_json(source: str):
    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            return json.load(fh)
    source = source.strip()
    if source.startswith("{") or source.startswith("["):
        try:
            return json.loads(source)
        except json.JSONDecodeError as exc:
            raise InputError(f"inline JSON does not parse: {exc}")
    raise InputError(f"no such file or builtin: {source!r}")


def load_multimeter(source: str):
    if source in instances.MULTIMETERS:
        return instances.MULTIMETERS[source]()
    try:
        return serialize.dec_multimeter(_load_json(source))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"multimeter input {source!r}: {exc}")


def load_assemblage(source: str):
    if source in instances.ASSEMBLAGES:
        return instances.ASSEMBLAGES[source]()
    try:
        return serialize.dec_assemblage(_load_json(source))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"assemblage input {source!r}: {exc}")


def load_behavior(source: str):
    if source in instances.BEHAVIORS:
        return instances.BEHAVIORS[source]()
    try:
        return serialize.dec_ns(_load_json(source))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"behavior input {source!r}: {exc}")


def emit(report: dict, fmt: str, runtime_ms: int) -> None:
    report = dict(report)
    report["runtime_ms"] = runtime_ms
    if fmt == "csv":
        cols = ["job", "status", "value", "runtime_ms"]
        print(",".join(cols))
        print(
            ",".join(
                str(report.get(c, "")) for c in cols
            )
        )
    else:
        print(json.dumps(report, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_compat(args) -> int:
    m = load_multimeter(args.input)
    jm = is_compatible(m)
    report = {
        "job": "compat",
        "status": "compatible" if jm else "incompatible",
        "value": "1" if jm else "0",
    }
    if jm is not None and args.certificate:
        report["joint_effects"] = [serialize.enc_vec(e) for e in jm.effects]
    return report, (EXIT_TRUE if jm else EXIT_FALSE)


def cmd_robustness(args) -> int:
    m = load_multimeter(args.input)
    value = compatibility_robustness(m)
    return {"job": "robustness", "status": "optimal", "value": rat_str(value)}, EXIT_TRUE


def cmd_simulate(args) -> int:
    target = load_multimeter(args.target)
    source = load_multimeter(args.source)
    sim = classical_simulates(source, target)
    report = {
        "job": "simulate",
        "status": "simulable" if sim else "not-simulable",
        "value": "1" if sim else "0",
    }
    if sim is not None:
        report["simulation"] = serialize.enc_simulation(sim)
    return report, (EXIT_TRUE if sim else EXIT_FALSE)


def cmd_steer(args) -> int:
    a = load_assemblage(args.input)
    if args.question == "lhs":
        model = has_lhs(a)
        report = {
            "job": "steer-lhs",
            "status": "local" if model else "steerable",
            "value": "1" if model else "0",
        }
        if model is not None and args.certificate:
            report["ensemble"] = [serialize.enc_vec(b) for b in model.ensemble]
        return report, (EXIT_TRUE if model else EXIT_FALSE)
    value = steering_robustness(a)
    return {"job": "steer-robustness", "status": "optimal", "value": rat_str(value)}, EXIT_TRUE


def cmd_bell(args) -> int:
    p = load_behavior(args.behavior)
    if args.question == "lhv":
        model = has_lhv(p)
        return (
            {
                "job": "bell-lhv",
                "status": "local" if model else "nonlocal",
                "value": "1" if model else "0",
            },
            EXIT_TRUE if model else EXIT_FALSE,
        )
    fam = chsh_family()
    values = [rat_str(evaluate_witness(w, p)) for w in fam]
    vmin = min((evaluate_witness(w, p) for w in fam))
    return (
        {
            "job": "bell-chsh",
            "status": "evaluated",
            "values": values,
            "value": rat_str(vmin),
        },
        EXIT_TRUE if vmin >= 0 else EXIT_FALSE,
    )


def cmd_extend(args) -> int:
    n = args.n
    if args.kind == "multimeter":
        m = load_multimeter(args.input)
        if args.mode == "nwise":
            fam = nwise_compatible_ns(m, n)
            ok = fam is not None
        else:
            ok = is_n_extendable_multimeter(m, n)
    else:
        p = load_behavior(args.input)
        if args.mode == "nwise":
            ok = gn_lhv_ns(p, n)
        else:
            ok = is_n_extendable_behavior(p, n)
    return (
        {
            "job": f"extend-{args.kind}-{args.mode}",
            "status": "extendable" if ok else "not-extendable",
            "value": "1" if ok else "0",
            "n": n,
        },
        EXIT_TRUE if ok else EXIT_FALSE,
    )


def cmd_factorize(args) -> int:
    try:
        parts = args.source.split(",")
        k, g = int(parts[0]), int(parts[1])
        ts = [rat(t) for t in parts[2:]]
        if len(ts) == 1:
            ts = ts * g
        if len(ts) != g:
            raise ValueError("need one noise value, or one per setting")
    except (ValueError, IndexError) as exc:
        raise InputError(f"--source expects k,g,t[,t...]: {exc}")
    try:
        mk, mg = (int(v) for v in args.middle.split(","))
    except ValueError as exc:
        raise InputError(f"--middle expects l,g: {exc}")
    source = noisy_polysimplex(k, g, ts)
    middle = make_polysimplex(mk, mg)
    target = make_polysimplex(k, g)
    seeds = list(range(args.seeds)) if args.seed is None else [args.seed]
    found = None
    tried = []
    for seed in seeds:
        tried.append(seed)
        cert = seesaw_search(source, middle, target, iters=args.iters, seed=seed)
        if cert is not None:
            found = (seed, cert)
            break
    if found is None:
        return (
            {
                "job": "factorize",
                "status": "inconclusive",
                "value": "",
                "feasible": None,
                "note": "heuristic search exhausted; this is not an impossibility proof",
                "seeds_tried": tried,
                "iters": args.iters,
            },
            EXIT_INCONCLUSIVE,
        )
    seed, cert = found
    return (
        {
            "job": "factorize",
            "status": "feasible",
            "value": "1",
            "feasible": True,
            "seed": seed,
            "seeds_tried": tried,
            "certificate": {
                "phi": serialize.enc_matrix(cert.phi.matrix),
                "psi": serialize.enc_matrix(cert.psi.matrix),
            },
        },
        EXIT_TRUE,
    )


# ---------------------------------------------------------------------------
# golden reproductions
# ---------------------------------------------------------------------------

def _repro_cube_robustness():
    value = compatibility_robustness(instances.cube_face_multimeter())
    return {"value": rat_str(value)}, value == rat(1, 3)


def _repro_octa_faces():
    value = compatibility_robustness(instances.octahedron_face_multimeter())
    return {"value": rat_str(value), "floor": "1/2"}, value >= rat(1, 2)


def _repro_octa_counterexample():
    sigma = instances.octahedron_counterexample_assemblage()
    rs = steering_robustness(sigma)
    report = {
        "R_s": rat_str(rs),
        "dichotomic_lower_bound": "1/2",
        "gap": bool(rs < rat(1, 2)),
    }
    return report, rs <= rat(1, 3) and rs < rat(1, 2)


def _repro_chsh_pr():
    fam = chsh_family()
    pr = instances.pr_box()
    values = [evaluate_witness(w, pr) for w in fam]
    report = {
        "values": [rat_str(v) for v in values],
        "min": rat_str(min(values)),
    }
    return report, min(values) == rat(-1, 2) and len(fam) == 8


def _repro_factor_thresholds():
    results = {}
    ok = True
    for name, fn, tmax in (
        ("three_outcome", three_outcome_joint, rat(1, 3)),
        ("binary_pair", binary_pair_post, rat(2, 5)),
        ("four_outcome", four_outcome_joint, rat(1, 2)),
    ):
        cert = fn(tmax)
        good = verify_factorization(cert)
        above = False
        try:
            fn(tmax + rat(1, 50))
        except FactorError:
            above = True
        results[name] = {"threshold": rat_str(tmax), "verified": good, "tight": above}
        ok = ok and good and above
    return results, ok


REPRODUCTIONS = {
    "cube-robustness": _repro_cube_robustness,
    "octa-faces-robustness": _repro_octa_faces,
    "octa-counterexample": _repro_octa_counterexample,
    "chsh-pr-box": _repro_chsh_pr,
    "factor-thresholds": _repro_factor_thresholds,
}


def cmd_reproduce(args) -> int:
    if args.name == "all":
        rows = []
        all_ok = True
        for name, fn in REPRODUCTIONS.items():
            t0 = time.time()
            detail, ok = fn()
            rows.append(
                {
                    "job": name,
                    "status": "pass" if ok else "FAIL",
                    "value": detail.get("value", ""),
                    "detail": detail,
                    "runtime_ms": int((time.time() - t0) * 1000),
                }
            )
            all_ok = all_ok and ok
        report = {"job": "reproduce-all", "status": "pass" if all_ok else "FAIL", "rows": rows}
        if args.format == "csv":
            print("job,status,value,runtime_ms")
            for r in rows:
                print(f"{r['job']},{r['status']},{r['value']},{r['runtime_ms']}")
            return None, (EXIT_TRUE if all_ok else EXIT_FALSE)
        print(json.dumps(report, indent=2, sort_keys=True))
        return None, (EXIT_TRUE if all_ok else EXIT_FALSE)
    if args.name not in REPRODUCTIONS:
        raise InputError(
            f"unknown reproduction {args.name!r}; known: {sorted(REPRODUCTIONS)} or 'all'"
        )
    detail, ok = REPRODUCTIONS[args.name]()
    detail = dict(detail)
    detail.update({"job": f"reproduce-{args.name}", "status": "pass" if ok else "FAIL"})
    return detail, (EXIT_TRUE if ok else EXIT_FALSE)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="conefactor",
        description="exact decisions about measurement tables on polyhedral state spaces",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add("compat", help="joint-measurability of a multimeter")
    p.add_argument("--input", required=True)
    p.add_argument("--certificate", action="store_true")
    p.set_defaults(fn=cmd_compat)

    p = add("robustness", help="compatibility robustness (exact LP optimum)")
    p.add_argument("--input", required=True)
    p.set_defaults(fn=cmd_robustness)

    p = add("simulate", help="classical simulation between multimeters")
    p.add_argument("--target", required=True)
    p.add_argument("--source", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = add("steer", help="assemblage questions")
    p.add_argument("question", choices=["lhs", "robustness"])
    p.add_argument("--input", required=True)
    p.add_argument("--certificate", action="store_true")
    p.set_defaults(fn=cmd_steer)

    p = add("bell", help="behavior questions")
    p.add_argument("question", choices=["lhv", "chsh"])
    p.add_argument("--behavior", required=True)
    p.set_defaults(fn=cmd_bell)

    p = add("extend", help="symmetric extension hierarchy")
    p.add_argument("kind", choices=["multimeter", "behavior"])
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=["extend", "nwise"], default="extend")
    p.set_defaults(fn=cmd_extend)

    p = add("factorize", help="see-saw search for noisy factorizations")
    p.add_argument("--source", required=True, metavar="k,g,t")
    p.add_argument("--middle", required=True, metavar="l,g")
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_factorize)

    p = add("reproduce", help="golden-value experiments")
    p.add_argument("name")
    p.set_defaults(fn=cmd_reproduce)

    return ap


def run(job_args) -> int:
    ap = build_parser()
    args = ap.parse_args(job_args)
    t0 = time.time()
    try:
        report, code = args.fn(args)
    except InputError as exc:
        emit({"job": args.command, "status": "input-error", "value": str(exc)}, args.format, 0)
        return EXIT_INPUT
    except (ValueError, KeyError) as exc:
        emit({"job": args.command, "status": "input-error", "value": str(exc)}, args.format, 0)
        return EXIT_INPUT
    if report is not None:
        emit(report, args.format, int((time.time() - t0) * 1000))
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
