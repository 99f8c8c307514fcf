"""Command-line interface: build, apply, verify, table.

Exit codes: 0 pass, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import formats
from .aqft_mpo import aqft_error_bound, aqft_params, aqft_reference, assemble_aqft_mpo
from .cheb_interp import (
    DEFAULT_PROBES,
    ek_bound,
    empirical_ek,
    lebesgue_bound,
    lebesgue_constant,
    make_grid,
)
from .dft_oracle import block_identity_check
from .qft_mpo import (
    MAX_EXHAUSTIVE,
    Mpo,
    assemble_qft_mpo,
    build_unfolding_factors,
    dft_reference,
    dft_tensor,
    entrywise_error,
    reference_error,
    theorem_error_bound,
    unfolding_perm,
)
from .qtt_engine import ConventionError, Mps, Order, apply_mpo, dense_to_mps, mps_to_dense
from .tensor_core import unfold

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
AQFT_EXACT_TOL = 1e-13
BLOCK_TOL = 1e-11
DENSE_OUTPUT_LIMIT = 2**20


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    n: int | None
    K: int | None
    b: int | None
    d: int
    observed_max_error: float
    bound: float | None
    elapsed_ms: float
    oracle: str
    passed: bool
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out


def _bound_or_none(fn, *args):
    try:
        return fn(*args)
    except ValueError:
        return None


def _require_exhaustive_ok(n: int, d: int, samples: int | None) -> None:
    if samples is None and d ** (2 * n) > MAX_EXHAUSTIVE:
        raise UsageError(
            f"exhaustive check of {d ** (2 * n)} entries exceeds {MAX_EXHAUSTIVE}; pass --samples"
        )


# ---------------------------------------------------------------------------
# build


def _make_mpo(args) -> Mpo:
    if (args.rank is None) == (args.aqft_b is None):
        raise UsageError("give exactly one of --rank or --aqft-b")
    if args.aqft_b is not None:
        if args.qudit != 2:
            raise UsageError("the AQFT operator is defined for qubits only (--qudit 2)")
        try:
            return assemble_aqft_mpo(args.n, args.aqft_b)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    try:
        return assemble_qft_mpo(args.n, args.rank, args.qudit)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _mpo_bound(mpo: Mpo) -> float | None:
    if mpo.kind == "aqft":
        return aqft_error_bound(mpo.n, mpo.param)
    if mpo.d != 2 and mpo.n > 1:
        return None
    bound = _bound_or_none(theorem_error_bound, mpo.n, mpo.param)
    return None if bound is None else bound.bound


def cmd_build(args) -> int:
    t0 = time.perf_counter()
    mpo = _make_mpo(args)
    if args.out:
        formats.write_mpo(args.out, mpo)
    summary = {
        "kind": mpo.kind,
        "n": mpo.n,
        "d": mpo.d,
        "param": mpo.param,
        "bond_dimension": mpo.max_bond,
        "internal_core_shape": list(mpo.cores[1].shape) if mpo.n > 2 else None,
        "bound": _mpo_bound(mpo),
        "out": str(args.out) if args.out else None,
        "elapsed_ms": 1e3 * (time.perf_counter() - t0),
    }
    if summary["bound"] is None and mpo.n > 1:
        summary["bound_note"] = "bound unavailable"
    print(json.dumps(summary))
    return EXIT_PASS


# ---------------------------------------------------------------------------
# apply


def cmd_apply(args) -> int:
    mpo = formats.read_mpo(args.mpo)
    vec, order, d = formats.vector_from_dict(formats.read_json(args.input))
    if isinstance(vec, Mps):
        mps = vec
    else:
        if vec.size != d**mpo.n:
            raise UsageError(f"site-count mismatch: operator has {mpo.n} sites, vector length {vec.size}")
        # dense data is in natural index order; quantize with the input convention
        mps = dense_to_mps(vec, Order.LSB_FIRST, tol=args.tol, d=d)
    try:
        out = apply_mpo(mpo, mps, tol=args.tol)
    except ConventionError as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    scale = 1.0 / math.sqrt(d**mpo.n) if args.normalize else 1.0
    if d**out.n <= DENSE_OUTPUT_LIMIT and not args.mps_output:
        dense = mps_to_dense(out) * scale
        formats.write_json(args.out, formats.vec_to_dict(dense, d, out.order))
        kind = formats.VEC_FORMAT
    else:
        if scale != 1.0:
            out = Mps((out.cores[0] * scale,) + out.cores[1:], out.d, out.order)
        formats.write_json(args.out, formats.mps_to_dict(out))
        kind = formats.MPS_FORMAT
    print(json.dumps({"out": str(args.out), "format": kind, "order": out.order.value, "bond_dims": out.bond_dims}))
    return EXIT_PASS


# ---------------------------------------------------------------------------
# verify


def _verify_entrywise(args) -> RunReport:
    if args.rank is None:
        raise UsageError("--mode entrywise needs --rank")
    _require_exhaustive_ok(args.n, args.qudit, args.samples)
    mpo = assemble_qft_mpo(args.n, args.rank, args.qudit)
    err = entrywise_error(mpo, samples=args.samples, seed=args.seed)
    bound = None
    if args.qudit == 2 or args.n == 1:
        tb = _bound_or_none(theorem_error_bound, args.n, args.rank)
        if tb is not None:
            bound = tb.bound
            if args.empirical_bound and args.n > 1:
                bound = theorem_error_bound(args.n, args.rank, empirical=True).bound
    return RunReport(
        "verify entrywise", args.n, args.rank, None, args.qudit, err.max_error, bound, 0.0,
        "dft_entry (exact integer phase)", bound is None or err.max_error <= bound,
        {"entries": err.entries, "exhaustive": err.exhaustive},
    )


def _verify_unfolding(args) -> RunReport:
    if args.rank is None:
        raise UsageError("--mode unfolding needs --rank")
    if args.n < 2:
        raise UsageError("--mode unfolding needs --n >= 2")
    _require_exhaustive_ok(args.n, 2, None)
    bound = ek_bound(args.rank)
    F = dft_tensor(args.n)
    per_m = {}
    for m in range(1, args.n):
        T = unfold(F, 2 * m, unfolding_perm(args.n, m))
        approx = build_unfolding_factors(args.n, m, args.rank).approximation()
        per_m[str(m)] = float(np.abs(approx - T).max())
    worst = max(per_m.values())
    return RunReport(
        "verify unfolding", args.n, args.rank, None, 2, worst, bound, 0.0,
        "dense unfolding T_m of dft_tensor", worst <= bound, {"per_m": per_m},
    )


def _aqft_b(args) -> int:
    if args.b is None:
        raise UsageError("--mode aqft-* needs --b")
    try:
        aqft_params(args.n, args.b)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return args.b


def _verify_aqft_exact(args) -> RunReport:
    b = _aqft_b(args)
    _require_exhaustive_ok(args.n, 2, args.samples)
    mpo = assemble_aqft_mpo(args.n, b)
    err = entrywise_error(mpo, aqft_reference(aqft_params(args.n, b)), samples=args.samples, seed=args.seed)
    return RunReport(
        "verify aqft-exact", args.n, None, b, 2, err.max_error, AQFT_EXACT_TOL, 0.0,
        "aqft_entry", err.max_error <= AQFT_EXACT_TOL, {"entries": err.entries, "exhaustive": err.exhaustive},
    )


def _verify_aqft_error(args) -> RunReport:
    b = _aqft_b(args)
    _require_exhaustive_ok(args.n, 2, args.samples)
    err = reference_error(
        args.n, 2, aqft_reference(aqft_params(args.n, b)), dft_reference(args.n),
        samples=args.samples, seed=args.seed,
    )
    bound = aqft_error_bound(args.n, b)
    return RunReport(
        "verify aqft-error", args.n, None, b, 2, err.max_error, bound, 0.0,
        "dft_entry vs aqft_entry", err.max_error <= bound, {"entries": err.entries, "exhaustive": err.exhaustive},
    )


def _verify_blocks(args) -> RunReport:
    if args.n > 6:
        raise UsageError("--mode blocks supports --n <= 6")
    levels = range(args.n + 1) if args.l is None else [args.l]
    per_level = {}
    for l in levels:
        try:
            rep = block_identity_check(args.n, l, args.rank)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        per_level[str(l)] = rep.to_dict()
    worst = max(v["max_residual"] for v in per_level.values())
    return RunReport(
        "verify blocks", args.n, args.rank, None, 2, worst, BLOCK_TOL, 0.0,
        "dense_dft blocks", worst <= BLOCK_TOL, {"levels": per_level},
    )


def _verify_interp(args) -> RunReport:
    if args.rank is None:
        raise UsageError("--mode interp needs --rank")
    g = make_grid(args.rank)
    emp = empirical_ek(g, args.probes, args.probes)
    bound = _bound_or_none(ek_bound, args.rank)
    lam = lebesgue_constant(g, 100_001)
    lam_bound = lebesgue_bound(args.rank)
    ok = (bound is None or emp <= bound) and lam <= lam_bound
    return RunReport(
        "verify interp", None, args.rank, None, 2, emp, bound, 0.0,
        "uniform probe grid", ok,
        {"lebesgue_estimate": lam, "lebesgue_bound": lam_bound, "probes": args.probes},
    )


VERIFY_MODES = {
    "entrywise": _verify_entrywise,
    "unfolding": _verify_unfolding,
    "aqft-exact": _verify_aqft_exact,
    "aqft-error": _verify_aqft_error,
    "blocks": _verify_blocks,
    "interp": _verify_interp,
}


def cmd_verify(args) -> int:
    if args.mode != "interp" and args.n is None:
        raise UsageError(f"--mode {args.mode} needs --n")
    t0 = time.perf_counter()
    report = VERIFY_MODES[args.mode](args)
    report.elapsed_ms = 1e3 * (time.perf_counter() - t0)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_PASS if report.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# table


def parse_range(text: str) -> list[int]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"malformed range {text!r}; expected A:B[:STEP]")
    try:
        a, b = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
    except ValueError as exc:
        raise UsageError(f"malformed range {text!r}") from exc
    if step <= 0 or a > b:
        raise UsageError(f"empty range {text!r}")
    return list(range(a, b + 1, step))


def _worker_count(rows: int) -> int:
    cap = os.environ.get("QTTDFT_THREADS")
    try:
        limit = int(cap) if cap else os.cpu_count() or 1
    except ValueError:
        limit = 1
    return max(1, min(rows, limit))


def _table_row(n: int, param: int, aqft: bool, samples: int | None, seed: int) -> dict:
    t0 = time.perf_counter()
    if aqft:
        err = entrywise_error(assemble_aqft_mpo(n, param), samples=samples, seed=seed)
        row = {
            "b": param,
            "bond_dimension": 2**param,
            "observed_max_error": err.max_error,
            "aqft_bound": aqft_error_bound(n, param),
        }
    else:
        err = entrywise_error(assemble_qft_mpo(n, param), samples=samples, seed=seed)
        tb = _bound_or_none(theorem_error_bound, n, param)
        row = {
            "K": param,
            "bond_dimension": param + 1,
            "observed_max_error": err.max_error,
            "theorem_bound": None if tb is None else tb.bound,
            "ek_bound": _bound_or_none(ek_bound, param),
            "lebesgue_bound": lebesgue_bound(param),
        }
    row["elapsed_ms"] = 1e3 * (time.perf_counter() - t0)
    return row


def cmd_table(args) -> int:
    params = parse_range(args.ranks)
    if args.aqft:
        kept = [b for b in params if 0 <= b <= args.n - 1]
        for b in sorted(set(params) - set(kept)):
            print(f"skipping b={b}: outside 0..{args.n - 1}", file=sys.stderr)
        params = kept
        if not params:
            raise UsageError("no valid approximation levels in range")
    _require_exhaustive_ok(args.n, 2, args.samples)
    with ThreadPoolExecutor(max_workers=_worker_count(len(params))) as pool:
        rows = list(pool.map(lambda p: _table_row(args.n, p, args.aqft, args.samples, args.seed), params))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_PASS


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qttdft", description="Closed-form QTT/MPO discrete Fourier transform")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct an operator and write it as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rank", type=int, default=None, help="grid parameter K (bond dimension K+1)")
    p.add_argument("--aqft-b", type=int, default=None, help="AQFT approximation level b")
    p.add_argument("--qudit", type=int, default=2)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("apply", help="apply an operator file to a vector file")
    p.add_argument("--mpo", type=Path, required=True)
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--normalize", action="store_true", help="scale the result by 1/sqrt(N)")
    p.add_argument("--mps-output", action="store_true", help="always write qtt-mps-v1")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("verify", help="run a verification suite, JSON report on stdout")
    p.add_argument("--mode", choices=sorted(VERIFY_MODES), required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--l", type=int, default=None, help="block level (default: all)")
    p.add_argument("--qudit", type=int, default=2)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--probes", type=int, default=DEFAULT_PROBES)
    p.add_argument("--empirical-bound", action="store_true",
                   help="use measured Lebesgue constant and interpolation error in the bound")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="error/bound table over a range of K (or b)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ranks", required=True, help="A:B:STEP, inclusive")
    p.add_argument("--aqft", action="store_true")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, formats.FormatError, FileNotFoundError) as exc:
        print(f"qttdft {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
