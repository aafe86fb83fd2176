"""Command line interface.

Every subcommand prints one JSON envelope to stdout (or --out) holding
the command, the effective configuration, a timestamp, and the report.
Fixed seed and worker count give byte-identical reports apart from the
timestamp and elapsed-time fields.

Exit codes: 0 success, 2 invalid input or resource limit, 3 a scan
found a mathematical counterexample, 4 an internal invariant failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from typing import Optional, Sequence

from .antichain import (
    Antichain,
    GENERATOR_KINDS,
    HARD_ENUM_MAX_N,
    classify,
    enumerate_inextendible,
    generate,
)
from .coevent import derived_antichain, nontriviality
from .cover import certificate_class_C, decide, scan
from .errors import (
    ConsistencyError,
    InfeasibleNormalizationError,
    NoCoeventError,
    ResourceLimitError,
    SpaceMismatchError,
)
from .histories import Event, HistorySpace
from .measure import (
    TOL_PSD,
    TOL_ZERO,
    identity_suite,
    load_functional,
    measure_level,
    mu,
    validate,
)
from .pks import (
    orthogonal_structure,
    peres_rays,
    sample_coverage,
    search_consistent_coloring,
    witness_check,
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qcover",
        description=(
            "Verification toolkit for quantum measures on finite history"
            " spaces: cover decisions, antichain scans, preclusion"
            " structures, and the 33-ray coloring obstruction."
        ),
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, n=False, seed=False, samples=None, tols=False,
               workers=False, dmatrix=False, antichain=False, exact=False,
               k=False):
        if n:
            sp.add_argument("--n", type=int, required=(n == "required"),
                            default=None if n == "required" else n,
                            help="number of histories")
        if k:
            sp.add_argument("--k", type=int, default=None,
                            help="level / family parameter")
        if seed:
            sp.add_argument("--seed", type=int, default=42, help="RNG seed")
        if samples is not None:
            sp.add_argument("--samples", type=int, default=samples,
                            help="number of random samples")
        if tols:
            sp.add_argument("--tol-zero", type=float, default=TOL_ZERO,
                            dest="tol_zero", help="zero-measure tolerance")
            sp.add_argument("--tol-psd", type=float, default=TOL_PSD,
                            dest="tol_psd", help="positivity tolerance")
        if workers:
            sp.add_argument("--workers", type=int, default=1,
                            help="parallel worker count")
        if dmatrix:
            sp.add_argument("--dmatrix", required=True,
                            help="path to a functional JSON file")
        if antichain:
            sp.add_argument("--antichain", required=(antichain == "required"),
                            default=None,
                            help="path to an antichain JSON file")
        if exact:
            sp.add_argument("--exact", action="store_true",
                            help="exact rational zero detection")
        sp.add_argument("--out", default=None, help="write the report here")

    sp = sub.add_parser("identities", help="randomized identity suite")
    common(sp, n=4, seed=True, samples=100, tols=True)

    sp = sub.add_parser("validate", help="validate a functional")
    common(sp, dmatrix=True, tols=True, k=True)

    sp = sub.add_parser("measure", help="measures of events under a functional")
    common(sp, dmatrix=True, antichain=True, tols=True, k=True)

    sp = sub.add_parser("cover-check", help="exact quantum-cover decision")
    common(sp, antichain="required", tols=True)

    sp = sub.add_parser("scan", help="decide every inextendible antichain")
    common(sp, n="required", workers=True)

    sp = sub.add_parser("coevents", help="preclusion structure of a functional")
    common(sp, dmatrix=True, tols=True, exact=True)

    ap = sub.add_parser("antichain", help="antichain utilities")
    asub = ap.add_subparsers(dest="sub", required=True)
    sp = asub.add_parser("enumerate", help="all inextendible antichains")
    common(sp, n="required")
    sp = asub.add_parser("classify", help="pivot decompositions and certificate")
    common(sp, antichain="required")
    sp = asub.add_parser("generate", help="structured antichain families")
    sp.add_argument("kind", choices=GENERATOR_KINDS)
    common(sp, n="required", k=True)

    pp = sub.add_parser("pks", help="the 33-ray coloring construction")
    psub = pp.add_subparsers(dest="sub", required=True)
    sp = psub.add_parser("rays", help="the 33 canonical rays")
    common(sp)
    sp = psub.add_parser("bases", help="orthogonal bases and pairs")
    common(sp)
    sp = psub.add_parser("search", help="consistent-coloring search")
    common(sp)
    sp = psub.add_parser("witness", help="antichain / inextendibility verdict")
    common(sp)
    sp = psub.add_parser("sample", help="random-coloring coverage check")
    common(sp, seed=True, samples=100_000)
    return p


def _load_event_family(path: str) -> tuple[HistorySpace, list[Event]]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    space = HistorySpace(int(data["n"]))
    events = [space.event(labels) for labels in data["elements"]]
    if not events:
        raise ValueError("the file lists no events")
    return space, events


def _run_identities(args) -> dict:
    rep = identity_suite(args.n, args.samples, args.seed, tol_zero=args.tol_zero)
    return rep.to_json()


def _run_validate(args) -> dict:
    d = load_functional(args.dmatrix)
    rep = validate(d, tol_psd=args.tol_psd, tol_zero=args.tol_zero,
                   max_level=args.k)
    return rep.to_json()


def _run_measure(args) -> dict:
    d = load_functional(args.dmatrix)
    space = d.space
    out = {
        "n": d.n,
        "mu_omega": mu(d, space.omega()),
        "singletons": [mu(d, s) for s in space.singletons()],
    }
    if args.antichain is not None:
        sp, events = _load_event_family(args.antichain)
        if sp != space:
            raise SpaceMismatchError(
                "the antichain and the functional have different sizes"
            )
        out["events"] = [
            {"event": e.to_json(), "mu": mu(d, e)} for e in events
        ]
    if args.k is not None:
        out["level"] = measure_level(d, args.k, tol_zero=args.tol_zero)
    return out


def _run_cover_check(args) -> dict:
    space, events = _load_event_family(args.antichain)
    verdict = decide(space, events, tol_zero=args.tol_zero,
                     tol_psd=args.tol_psd)
    return verdict.to_json()


def _run_scan(args) -> tuple[dict, int]:
    space = HistorySpace(args.n)
    limit = min(max(args.n, 1), HARD_ENUM_MAX_N)
    rep = scan(space, workers=args.workers, n_limit=limit)
    code = 3 if rep.counterexamples else 0
    return rep.to_json(), code


def _run_coevents(args) -> dict:
    d = load_functional(args.dmatrix)
    try:
        ps = derived_antichain(d, tol_zero=args.tol_zero, exact=args.exact)
    except NoCoeventError as exc:
        return {"no_coevent": True, "detail": str(exc)}
    out = ps.to_json()
    out["no_coevent"] = False
    try:
        ev = nontriviality(d, tol_zero=args.tol_zero, tol_psd=args.tol_psd)
        out["nontriviality"] = ev.to_json()
    except (ValueError, NoCoeventError, ConsistencyError) as exc:
        out["nontriviality"] = None
        out["nontriviality_detail"] = str(exc)
    return out


def _run_antichain(args) -> dict:
    if args.sub == "enumerate":
        space = HistorySpace(args.n)
        limit = min(max(args.n, 1), HARD_ENUM_MAX_N)
        acs = list(enumerate_inextendible(space, n_limit=limit))
        return {
            "n": args.n,
            "count": len(acs),
            "antichains": [ac.to_json()["elements"] for ac in acs],
        }
    if args.sub == "classify":
        with open(args.antichain, encoding="utf-8") as fh:
            ac = Antichain.from_json(json.load(fh))
        cert = certificate_class_C(ac)
        return {
            "antichain": ac.to_json(),
            "decompositions": [d.to_json() for d in classify(ac)],
            "certificate": None if cert is None else cert.to_json(),
        }
    space = HistorySpace(args.n)
    params = {}
    if args.kind == "level":
        if args.k is None:
            raise ValueError("kind 'level' needs --k")
        params["k"] = args.k
    elif args.kind == "windmill":
        if args.k is None:
            raise ValueError("kind 'windmill' needs --k (the block count)")
        params["m"] = args.k
    elif args.kind == "straddle":
        if args.k is None:
            raise ValueError("kind 'straddle' needs --k (the band level)")
        params["l"] = args.k
    elif args.k is not None:
        raise ValueError(f"kind {args.kind!r} takes no --k")
    ac = generate(space, args.kind, **params)
    return {"kind": args.kind, "params": params, "antichain": ac.to_json()}


def _run_pks(args) -> dict:
    if args.sub == "rays":
        rays = peres_rays()
        return {"count": len(rays), "rays": [r.to_json() for r in rays]}
    st = orthogonal_structure(peres_rays())
    if args.sub == "bases":
        out = st.to_json()
        out["basis_count"] = len(st.bases)
        out["pair_count"] = len(st.pairs)
        return out
    if args.sub == "search":
        return search_consistent_coloring(st).to_json()
    if args.sub == "witness":
        return witness_check(st).to_json()
    cov = sample_coverage(st, samples=args.samples, seed=args.seed)
    return cov.to_json()


def _dispatch(args) -> tuple[dict, int]:
    if args.command == "identities":
        return _run_identities(args), 0
    if args.command == "validate":
        return _run_validate(args), 0
    if args.command == "measure":
        return _run_measure(args), 0
    if args.command == "cover-check":
        return _run_cover_check(args), 0
    if args.command == "scan":
        return _run_scan(args)
    if args.command == "coevents":
        return _run_coevents(args), 0
    if args.command == "antichain":
        return _run_antichain(args), 0
    if args.command == "pks":
        return _run_pks(args), 0
    raise ValueError(f"unknown command {args.command!r}")


def _config_of(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "out"}
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report, code = _dispatch(args)
    except ConsistencyError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4
    except (
        ValueError,
        TypeError,
        KeyError,
        OSError,
        SpaceMismatchError,
        ResourceLimitError,
        InfeasibleNormalizationError,
        NoCoeventError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    envelope = {
        "command": args.command + (f" {args.sub}" if hasattr(args, "sub") else ""),
        "config": _config_of(args),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "report": report,
    }
    payload = json.dumps(envelope, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return code


if __name__ == "__main__":
    sys.exit(main())
