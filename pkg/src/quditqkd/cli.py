"""Command-line front end: ``quditqkd {keyrate,sweep,compare,simulate,verify}``.

Exit codes: 0 success, 1 computational or consistency failure, 2 usage error.
Error rates are read and written as fractions; ``--percent`` switches the
displayed error-rate columns to percent.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, comparison, keyrate, protocol, verify
from .channel import ChannelError, PauliDistribution, depolarizing, mismatch_joint, summarize
from .galois import field

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
ERROR_KEYS = {"e_raw", "e_c", "e_a", "threshold", "threshold_ref", "threshold_tol"}


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ helpers


# Options that never change the computed content are left out of the echo, so
# the same computation written to another path or with more workers is byte-identical.
_NOT_ECHOED = ("func", "command", "seed", "output", "jobs", "transcript_out", "keys_out")


def _header(command: str, args: argparse.Namespace, **extra) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}
    return {"program": "quditqkd", "version": __version__, "command": command,
            "seed": getattr(args, "seed", 0), **extra, "parameters": params}


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _scale(row: dict, percent: bool) -> dict:
    if not percent:
        return row
    return {k: (v * 100 if k in ERROR_KEYS and isinstance(v, float) else v) for k, v in row.items()}


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: dict, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    for key, value in header.items():
        if key == "parameters":
            for pk, pv in value.items():
                buf.write(f"# {pk}: {pv}\n")
        else:
            buf.write(f"# {key}: {value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` inclusive of stop; empty when start > stop."""
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise UsageError(f"grid {spec!r} is not of the form start:stop:step") from None
    if step <= 0:
        raise UsageError(f"grid step must be positive in {spec!r}")
    if start > stop:
        return []
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _parse_schemes(spec: str) -> list[tuple[str, int]]:
    out = []
    for item in spec.split(","):
        name, _, N = item.strip().partition(":")
        if name not in keyrate.SCHEMES:
            raise UsageError(f"unknown scheme {name!r}; choose from {', '.join(keyrate.SCHEMES)}")
        out.append((name, int(N) if N else (2 if name in ("BB84", "SixState") else 4)))
    return out


def _channel(args) -> PauliDistribution:
    F = field(args.n)
    if args.channel_file:
        d = PauliDistribution.load(args.channel_file)
        if d.n != args.n:
            raise UsageError(f"channel file is for n={d.n}, but --n {args.n} was given")
        return d
    return depolarizing(args.depolarizing, F)


def _pool_map(fn, items: list, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
    return [fn(x) for x in items]


# ------------------------------------------------------------------ keyrate


def cmd_keyrate(args) -> int:
    N = 1 << args.n
    point = keyrate.evaluate(args.scheme, N=N, e_raw=args.e_raw, e_c=args.e_c,
                             e_a=args.e_a, e00=args.e00)
    row = _scale(point.as_dict(), args.percent)
    header = _header("keyrate", args, modulus=field(args.n).modulus_str())
    if args.format == "json":
        _emit(_json_text({"header": header, "result": row}), args.output)
    elif args.format == "csv":
        _emit(_csv_text(header, list(row), [row]), args.output)
    else:
        lines = [f"# quditqkd {__version__} keyrate seed={header['seed']} "
                 f"modulus={header['modulus']}"]
        lines += [f"{k:<8} {_fmt(v)}" for k, v in row.items()]
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


# ------------------------------------------------------------------ sweep


def _sweep_1d_point(task) -> dict:
    e, schemes = task
    row = {"e_raw": e}
    for name, N in schemes:
        tag = f"{name}_N{N}"
        try:
            p = keyrate.evaluate(name, N=N, e_raw=e)
            row[f"R_{tag}"], row[f"Rbits_{tag}"] = p.R, p.R_bits
        except keyrate.KeyRateError:
            row[f"R_{tag}"], row[f"Rbits_{tag}"] = 0.0, 0.0
    return row


def _sweep_2d_point(task) -> dict:
    e_c, e_a, N = task
    p = keyrate.evaluate("B", N=N, e_c=e_c, e_a=e_a)
    s = p.distribution
    return {"e_c": e_c, "e_a": e_a, "e_raw": p.inputs["e_raw"], "K": p.K, "R": p.R,
            "R_bits": p.R_bits, "A": s.A, "B": s.B, "C": s.C, "D": s.D}


def cmd_sweep(args) -> int:
    if args.e_c or args.e_a:
        if not (args.e_c and args.e_a):
            raise UsageError("a 2-D sweep needs both --e-c and --e-a grids")
        N = 1 << args.n
        tasks = [(ec, ea, N) for ec in _parse_grid(args.e_c) for ea in _parse_grid(args.e_a)]
        columns = ["e_c", "e_a", "e_raw", "K", "R", "R_bits", "A", "B", "C", "D"]
        rows = _pool_map(_sweep_2d_point, tasks, args.jobs)
        header = _header("sweep", args, kind="2d", scheme="B", N=N,
                         modulus=field(args.n).modulus_str())
    else:
        schemes = _parse_schemes(args.schemes)
        tasks = [(e, schemes) for e in _parse_grid(args.e_raw)]
        columns = ["e_raw"] + [f"{p}_{s}_N{N}" for s, N in schemes for p in ("R", "Rbits")]
        rows = _pool_map(_sweep_1d_point, tasks, args.jobs)
        header = _header("sweep", args, kind="1d")
    rows = [_scale(r, args.percent) for r in rows]
    if args.format == "json":
        _emit(_json_text({"header": header, "columns": columns, "rows": rows}), args.output)
    else:
        _emit(_csv_text(header, columns, rows), args.output)
    return EXIT_OK


# ------------------------------------------------------------------ compare


def cmd_compare(args) -> int:
    rows = comparison.comparison_table()
    dicts = [_scale(r.as_dict(), args.percent) for r in rows]
    header = _header("compare", args)
    if args.format == "json":
        _emit(_json_text({"header": header, "rows": dicts}), args.output)
    elif args.format == "csv":
        _emit(_csv_text(header, list(dicts[0]), dicts), args.output)
    else:
        unit = 100 if args.percent else 1
        lines = [f"# quditqkd {__version__} compare seed={header['seed']}",
                 f"{'scheme':<9}{'N':>3}  {'R(0)':>10} {'ref':>7}  {'e_max':>9} {'ref':>7}  result"]
        for r in rows:
            lines.append(f"{r.ref.scheme:<9}{r.ref.N:>3}  {r.R0:>10.6f} {str(r.ref.R0):>7}  "
                         f"{r.threshold * unit:>9.5f} {r.ref.threshold * unit:>7.4g}  "
                         f"{'PASS' if r.passed else 'FAIL'}"
                         + (f"  ({r.ref.note})" if r.ref.note else ""))
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


# ------------------------------------------------------------------ simulate


def _consistency_checks(t: protocol.Transcript, keys: protocol.RawKeys) -> dict:
    cfg = t.config
    N = 1 << cfg.n
    checks = {"key_length": bool(len(keys) == cfg.n * len(t.key_rounds()))}
    if cfg.channel.e[0, 0] == 1.0:
        checks["noiseless_agreement"] = bool(keys.bit_mismatches() == 0)
    sample = t.sampled()
    if sample:
        joint = mismatch_joint(cfg.channel)
        m = len(sample)
        for name, p, hits in (
            ("phase_estimate", joint[:, 1].sum(),
             sum(r.alice_label[1] != r.bob_outcome[1] for r in sample)),
            ("coset_estimate", joint[1, :].sum(),
             sum(r.alice_label[0] != r.bob_outcome[0] for r in sample)),
        ):
            sigma = math.sqrt(p * (1 - p) / m)
            checks[name] = bool(abs(hits / m - p) <= 5 * sigma + 1e-12)
    matched = sum(r.alice_lambda == r.bob_lambda for r in t.rounds) / len(t.rounds)
    q = 1 / (N - 1)
    checks["sift_rate"] = bool(abs(matched - q) <= 5 * math.sqrt(q * (1 - q) / len(t.rounds)))
    return checks


def cmd_simulate(args) -> int:
    cfg = protocol.ProtocolConfig(args.scheme, args.n, args.rounds, _channel(args),
                                  args.sample_fraction, args.seed)
    t = protocol.run(cfg, jobs=args.jobs)
    if args.transcript_out:
        t.write_jsonl(args.transcript_out)
    keys = protocol.extract_keys(t)
    summary = {
        "header": {**cfg.header(), "program": "quditqkd"},
        "statistics": protocol.run_statistics(t),
        "analytic": _scale(summarize(cfg.channel).as_dict(), args.percent),
        "empirical": (_scale(protocol.estimate_summary(t).as_dict(), args.percent)
                      if t.sampled() else None),
        "raw_key": {"bits": len(keys), "rounds": len(t.key_rounds()),
                    "bit_mismatches": keys.bit_mismatches(),
                    "dit_mismatches": keys.dit_mismatches(),
                    "phase_mismatches": keys.phase_mismatches()},
    }
    if args.keys_out:
        Path(args.keys_out).write_text(_json_text(keys.to_hex()))
    summary["checks"] = _consistency_checks(t, keys)
    _emit(_json_text(summary), args.output)
    return EXIT_OK if all(summary["checks"].values()) else EXIT_FAIL


# ------------------------------------------------------------------ verify


def cmd_verify(args) -> int:
    if args.n is None:
        results = verify.run_default(seed=args.seed, random_cases=args.random_cases)
    else:
        results = verify.run_suite(args.n, exhaustive=args.exhaustive or None,
                                   random_cases=args.random_cases, seed=args.seed)
    if args.format == "json":
        header = _header("verify", args)
        body = [dict(r.__dict__, passed=r.passed) for r in results]
        _emit(_json_text({"header": header, "checks": body}), args.output)
    else:
        lines = [f"# quditqkd {__version__} verify seed={args.seed}"] + [r.line() for r in results]
        failed = sum(not r.passed for r in results)
        lines.append(f"{len(results) - failed}/{len(results)} checks passed")
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quditqkd", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"quditqkd {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("text", "csv", "json"), default="text"):
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--percent", action="store_true", help="show error rates in percent")
        sp.add_argument("--seed", type=int, default=0)

    k = sub.add_parser("keyrate", help="key rate of one scheme at one operating point")
    k.add_argument("--scheme", choices=keyrate.SCHEMES, required=True)
    k.add_argument("--n", type=int, default=2, help="qudit dimension N = 2^n")
    k.add_argument("--e-raw", type=float)
    k.add_argument("--e-c", type=float)
    k.add_argument("--e-a", type=float)
    k.add_argument("--e00", type=float, help="Chau05 only: probability of no error")
    common(k)
    k.set_defaults(func=cmd_keyrate)

    s = sub.add_parser("sweep", help="rates over a 1-D e_raw grid or a 2-D (e_c, e_a) grid")
    s.add_argument("--e-raw", default="0:0.14:0.001", help="start:stop:step (1-D sweep)")
    s.add_argument("--schemes", default="B:4,BB84,SixState,Chau05:4,RRDPS:8",
                   help="comma list of SCHEME[:N] for the 1-D sweep")
    s.add_argument("--e-c", help="start:stop:step; with --e-a runs the 2-D Scheme B sweep")
    s.add_argument("--e-a", help="start:stop:step")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--jobs", type=int, default=1)
    common(s, formats=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("compare", help="noiseless rates and thresholds vs published values")
    common(c)
    c.set_defaults(func=cmd_compare)

    m = sub.add_parser("simulate", help="Monte Carlo run of Scheme A, B or C")
    m.add_argument("--scheme", choices=protocol.SCHEMES, required=True)
    m.add_argument("--n", type=int, default=2)
    ch = m.add_mutually_exclusive_group()
    ch.add_argument("--depolarizing", type=float, default=0.0, metavar="P")
    ch.add_argument("--channel-file", help="Pauli distribution JSON {n, entries}")
    m.add_argument("--rounds", type=int, default=100_000)
    m.add_argument("--sample-fraction", type=float, default=0.5)
    m.add_argument("--transcript-out", help="write the transcript as JSON lines")
    m.add_argument("--keys-out", help="write raw keys as hex JSON")
    m.add_argument("--jobs", type=int, default=1)
    common(m, formats=("json",), default="json")
    m.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="exact operator-identity battery")
    v.add_argument("--n", type=int, choices=(2, 3, 4))
    v.add_argument("--exhaustive", action="store_true")
    v.add_argument("--random-cases", type=int, default=200)
    common(v, formats=("text", "json"))
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, keyrate.KeyRateError, protocol.ConfigError, ChannelError) as exc:
        bound = getattr(exc, "bound", "")
        print(f"quditqkd {args.command}: error: {exc}" + (f" [constraint: {bound}]" if bound else ""),
              file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"quditqkd {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
