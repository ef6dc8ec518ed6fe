"""Command-line entry point: codebooks, network tables, decoding, sweeps, checks.

Exit codes: 0 success, 1 a check failed, 2 bad usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .channel import ebn0_to_sigma, hard_decision
from .decoders import bdd_decode_batch
from .gf2 import CODE_NAMES, CodewordStream, bits_to_str, code_stats, encode, get_code, load_generator
from .montecarlo import DECODERS, SimConfig, make_decoder, run_sweep
from .network import build_mlnn, build_slnn, describe, edge_count, fixed_alpha
from .verify import check_edges, run_checks

# expected network sizes: (SLNN edges, MLNN edges)
EXPECTED_EDGES = {
    "hamming74": (56, 88),
    "polar168": (2048, 3072),
    "bch3121": (32_505_856, 54_525_952),
}


class UsageError(Exception):
    pass


def _code_from_args(args):
    if getattr(args, "generator", None):
        try:
            return load_generator(args.generator, name=os.path.basename(args.generator))
        except (OSError, ValueError) as exc:
            raise UsageError(f"--generator: {exc}") from None
    try:
        return get_code(args.code)
    except KeyError as exc:
        raise UsageError(f"--code: {exc.args[0]}") from None


def _dump(obj):
    print(json.dumps(obj, indent=2, default=lambda o: o.tolist() if isinstance(o, np.ndarray) else list(o)))


# ----------------------------------------------------------------------
# codebook / table1 / net
# ----------------------------------------------------------------------


def cmd_codebook(args) -> int:
    code = _code_from_args(args)
    if args.action == "dump":
        for j, msg, cw in CodewordStream(code):
            print(j, bits_to_str(msg), bits_to_str(cw))
        return 0
    stats = code_stats(code)
    for key, val in code.meta.items():
        stats[key] = list(val) if isinstance(val, tuple) else val
    stats["rate"] = code.rate
    _dump(stats)
    return 0


def table1_rows() -> list[dict]:
    rows = []
    for name in CODE_NAMES:
        code = get_code(name)
        cws = CodewordStream(code)
        s = edge_count(build_slnn(cws))["total"]
        m = edge_count(build_mlnn(cws))["total"]
        rows.append({
            "code": name,
            "n": code.n,
            "k": code.k,
            "slnn_edges": s,
            "mlnn_edges": m,
            "weights": "binary",
            "training": "No",
            "expected": list(EXPECTED_EDGES[name]),
            "match": (s, m) == EXPECTED_EDGES[name],
        })
    return rows


def cmd_table1(args) -> int:
    rows = table1_rows()
    if args.json:
        _dump(rows)
    else:
        print(f"{'code':<10} {'n':>3} {'k':>3} {'SLNN edges':>12} {'MLNN edges':>12} weights training check")
        for r in rows:
            mark = "ok" if r["match"] else f"MISMATCH (expected {r['expected'][0]}/{r['expected'][1]})"
            print(f"{r['code']:<10} {r['n']:>3} {r['k']:>3} {r['slnn_edges']:>12,} {r['mlnn_edges']:>12,} "
                  f"{r['weights']:<7} {r['training']:<8} {mark}")
    return 0 if all(r["match"] for r in rows) else 1


def _alpha_mode(spec: str, code):
    if spec == "matched":
        return "matched"
    if spec.startswith("fixed@"):
        try:
            return fixed_alpha(float(spec[6:]), code.rate)
        except ValueError:
            pass
    raise UsageError(f"--alpha: expected 'matched' or 'fixed@<dB>', got {spec!r}")


def cmd_net(args) -> int:
    code = _code_from_args(args)
    cws = CodewordStream(code)
    net = build_slnn(cws) if args.arch == "slnn" else build_mlnn(cws, _alpha_mode(args.alpha, code))
    _dump(describe(net))
    return 0


# ----------------------------------------------------------------------
# decode
# ----------------------------------------------------------------------


def cmd_decode(args) -> int:
    code = _code_from_args(args)
    if args.sigma is not None and args.ebn0 is not None:
        raise UsageError("--sigma and --ebn0 are mutually exclusive")
    sigma = args.sigma if args.sigma is not None else None
    if args.ebn0 is not None:
        sigma = ebn0_to_sigma(args.ebn0, code.rate)
    if sigma is None:
        if args.decoder in ("mlnn", "map", "map-trellis", "oracle-ml", "oracle-map") and args.alpha == "matched":
            raise UsageError(f"--decoder {args.decoder} needs --sigma or --ebn0")
        sigma = 1.0
    if sigma < 0:
        raise UsageError("--sigma must be non-negative")
    fh = open(args.input) if args.input and args.input != "-" else sys.stdin
    try:
        rows = [line.split() for line in fh if line.strip() and not line.lstrip().startswith("#")]
    finally:
        if fh is not sys.stdin:
            fh.close()
    try:
        R = np.array(rows, dtype=np.float64).reshape(len(rows), -1)
    except ValueError:
        raise UsageError("input: every line must hold n real numbers") from None
    if R.size and R.shape[1] != code.n:
        raise UsageError(f"input: rows have {R.shape[1]} values, code {code.name} needs n={code.n}")
    if not len(R):
        return 0
    msgs = make_decoder(args.decoder, code, sigma, args.alpha)(R)
    fail = bdd_decode_batch(code, hard_decision(R))[2] if args.decoder == "bdd" else np.zeros(len(R), bool)
    cws = encode(code, msgs)
    for m, c, f in zip(msgs, cws, fail):
        rec = {
            "decoder": args.decoder,
            "message_bits": bits_to_str(m),
            "codeword_bits": None if f else bits_to_str(c),
            "flags": {"bdd_failure": bool(f)},
        }
        print(json.dumps(rec))
    return 0


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------

# flag spelling -> SimConfig field, for key=value config files
CONFIG_ALIASES = {"min_errors": "min_frame_errors"}
CONFIG_TYPES = {
    "code": str,
    "decoders": str,
    "ebn0_start": float,
    "ebn0_stop": float,
    "ebn0_step": float,
    "min_frame_errors": int,
    "max_frames": int,
    "min_frames": int,
    "seed": int,
    "alpha": str,
    "block_frames": int,
    "workers": int,
}


def parse_grid(text: str) -> tuple[float, float, float]:
    """"start:step:stop" or a single value."""
    try:
        parts = [float(p) for p in text.split(":")]
    except ValueError:
        raise UsageError(f"--ebn0: cannot parse {text!r}") from None
    if len(parts) == 1:
        return parts[0], parts[0], 1.0
    if len(parts) != 3:
        raise UsageError(f"--ebn0: expected start:step:stop, got {text!r}")
    start, step, stop = parts
    return start, stop, step


def read_config_file(path) -> dict:
    """key=value lines, or a sweep manifest.json; returns SimConfig fields."""
    try:
        text = open(path).read()
    except OSError as exc:
        raise UsageError(f"--config: {exc}") from None
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        return dict(data.get("config", data))
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: line {line!r} is not key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = CONFIG_ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if key == "ebn0":
            out["ebn0_start"], out["ebn0_stop"], out["ebn0_step"] = parse_grid(val)
        elif key in CONFIG_TYPES:
            try:
                out[key] = CONFIG_TYPES[key](val)
            except ValueError:
                raise UsageError(f"--config: bad value for {key}: {val!r}") from None
        else:
            raise UsageError(f"--config: unknown key {key!r}")
    return out


def sim_config(args) -> SimConfig:
    cfg = read_config_file(args.config) if args.config else {}
    if args.code is not None:
        cfg["code"] = args.code
    if args.decoders is not None:
        cfg["decoders"] = args.decoders
    if args.ebn0 is not None:
        cfg["ebn0_start"], cfg["ebn0_stop"], cfg["ebn0_step"] = parse_grid(args.ebn0)
    for flag, key in (("min_errors", "min_frame_errors"), ("max_frames", "max_frames"), ("min_frames", "min_frames"),
                      ("seed", "seed"), ("alpha", "alpha"), ("block_frames", "block_frames"), ("workers", "workers")):
        val = getattr(args, flag)
        if val is not None:
            cfg[key] = val
    cfg.setdefault("workers", os.cpu_count() or 1)
    for key in ("code", "decoders", "ebn0_start"):
        if key not in cfg:
            raise UsageError(f"--{key.split('_')[0]} is required (flag or config file)")
    try:
        return SimConfig.from_dict(cfg)
    except KeyError as exc:
        raise UsageError(f"--code: {exc.args[0]}") from None
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args) -> int:
    config = sim_config(args)
    records = run_sweep(config, args.out, command=" ".join(["simulate", *args.argv]))
    print("decoder ebn0_db fer ber frames frame_errors bit_errors")
    for r in records:
        print(r.decoder, r.dat_line())
    return 0


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    failures = 0
    if args.generator:
        try:
            code = load_generator(args.generator, name=os.path.basename(args.generator))
        except ValueError as exc:
            print(f"FAIL {args.generator}: {exc}")
            return 1
        except OSError as exc:
            raise UsageError(f"--generator: {exc}") from None
        if args.code:
            ref = get_code(args.code)
            same = code.n == ref.n and code.k == ref.k and np.array_equal(
                np.sort(CodewordStream(code).words), np.sort(CodewordStream(ref).words))
            print(f"codebook {code.name} == {ref.name}: {'PASS' if same else 'FAIL'}")
            failures += not same
        codes = [code]
    else:
        try:
            codes = [get_code(args.code)] if args.code else [get_code(c) for c in CODE_NAMES]
        except KeyError as exc:
            raise UsageError(f"--code: {exc.args[0]}") from None
    for code in codes:
        trials = args.trials or (10_000 if code.k <= 8 else 100)
        results = run_checks(code, trials, args.seed) if code.k <= 24 else [check_edges(code)]
        if code.name in EXPECTED_EDGES:
            expect = EXPECTED_EDGES[code.name]
            got = (results[0]["slnn"], results[0]["mlnn"])
            results[0]["ok"] &= got == expect
        for r in results:
            extra = ", ".join(f"{k}={v}" for k, v in r.items() if k not in ("check", "code", "ok"))
            print(f"{'PASS' if r['ok'] else 'FAIL'} {r['code']} {r['check']}: {extra}")
            failures += not r["ok"]
    return 1 if failures else 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="codebooknet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def code_args(sp, required=True):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--code", help=f"one of {', '.join(CODE_NAMES)} or uncoded<n>")
        g.add_argument("--generator", help="file with one 0/1 generator row per line")

    sp = sub.add_parser("codebook", help="dump the codebook or print code statistics")
    sp.add_argument("action", choices=["dump", "stats"])
    code_args(sp)
    sp.set_defaults(func=cmd_codebook)

    sp = sub.add_parser("table1", help="edge counts of both networks for the three codes")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_table1)

    sp = sub.add_parser("net", help="describe a codebook network")
    sp.add_argument("action", choices=["describe"])
    code_args(sp)
    sp.add_argument("--arch", choices=["slnn", "mlnn"], default="slnn")
    sp.add_argument("--alpha", default="matched", help="matched or fixed@<dB>")
    sp.set_defaults(func=cmd_net)

    sp = sub.add_parser("decode", help="decode received vectors, one per line")
    code_args(sp)
    sp.add_argument("--decoder", choices=DECODERS, default="ml")
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--ebn0", type=float)
    sp.add_argument("--alpha", default="matched", help="mlnn only: matched or fixed@<dB>")
    sp.add_argument("input", nargs="?", default="-")
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("simulate", help="FER/BER sweep over Eb/N0")
    sp.add_argument("--config", help="key=value file or a previous manifest.json")
    sp.add_argument("--code")
    sp.add_argument("--decoders", help="comma-separated, from: " + ",".join(DECODERS))
    sp.add_argument("--ebn0", help="start:step:stop in dB, or a single value")
    sp.add_argument("--min-errors", type=int)
    sp.add_argument("--max-frames", type=int)
    sp.add_argument("--min-frames", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--alpha", help="matched or fixed@<dB>")
    sp.add_argument("--block-frames", type=int)
    sp.add_argument("--workers", type=int, help="parallel SNR points (default: all cores)")
    sp.add_argument("--out", help="directory for .dat files and the manifest")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="network/decoder equivalence and edge-count checks")
    sp.add_argument("--code")
    sp.add_argument("--generator")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv[1:]
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"codebooknet {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
