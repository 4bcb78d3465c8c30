"""Batch front end: construct codes, move shards on disk, inject failures,
repair, and certify optimality claims exhaustively.

All machine output is single-object JSON with a fixed key order so reports
can be diffed.  Exit codes: 0 success/pass, 1 verification failure or
unrepairable data (a witness is always included), 2 refusal (bad parameters
or an exhaustive check that would exceed the pattern cap), 3 I/O or file
format trouble.

Shard file format (little-endian):

    magic "LMBR" | version u8 | config digest 8 bytes | q u32 | m u16 |
    node index u16 | role tag u8 (0 local, 1 global) | alpha u16 |
    payload: alpha elements, each m uint16 coefficients, constant term first

The digest is the first 8 bytes of SHA-256 over the canonical JSON of the
generating configuration, so shards from a different code are rejected as a
configuration mismatch rather than surfacing as corrupt data.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import struct
import sys
import time
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path

from .bounds import BoundContext
from .errors import (
    ConfigMismatchError,
    InconsistentDataError,
    InsufficientRankError,
    ParameterError,
    PatternCapError,
    RepairError,
    ShardFormatError,
)
from .frlocal import FrCode, fano_plane, load_design
from .lrc import LrcCode, Shard, all_symbol_code, info_locality_code
from .mbr import MbrCode

MAGIC = b"LMBR"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sB8sIHHBH")

CONSTRUCTIONS = ("all-symbol", "info-local", "fr-local")


@dataclass
class SimConfig:
    """Everything that pins down one code and one simulation run."""

    construction: str = "all-symbol"
    q: int = 3
    m: int | None = None
    t: int = 2
    n_l: int = 3
    r: int = 2
    d: int = 2
    delta: int = 1
    file_dim: int = 5
    k_fr: int = 5
    design_file: str | None = None
    seed: int = 0
    workers: int = 1
    pattern_cap: int = 10 ** 6
    out_dir: str = "."

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise ParameterError(
                f"construction must be one of {CONSTRUCTIONS}, "
                f"got {self.construction!r}"
            )

    def local_code(self):
        if self.construction == "fr-local":
            design = (
                load_design(self.design_file) if self.design_file else fano_plane()
            )
            return FrCode(design, self.k_fr, self.q)
        return MbrCode(self.n_l, self.r, self.d, self.q)

    def build(self) -> LrcCode:
        local = self.local_code()
        if self.construction == "info-local":
            if self.delta < 1:
                raise ParameterError(
                    "info-local layout needs delta >= 1 global nodes"
                )
            return info_locality_code(
                self.t, self.delta, local, self.file_dim, ext_degree=self.m
            )
        return all_symbol_code(self.t, local, self.file_dim, ext_degree=self.m)

    def identity(self, code: LrcCode) -> dict:
        """Construction-determining fields, with the effective m."""
        ident = {
            "construction": self.construction,
            "q": self.q,
            "m": code.field.m,
            "t": self.t,
            "K": self.file_dim,
        }
        if self.construction == "fr-local":
            ident["kfr"] = self.k_fr
            ident["design"] = [list(b) for b in code.local.design.blocks]
        else:
            ident["nl"] = self.n_l
            ident["r"] = self.r
            ident["d"] = self.d
        if self.construction == "info-local":
            ident["delta"] = self.delta
        return ident

    def digest(self, code: LrcCode) -> bytes:
        canon = json.dumps(self.identity(code), sort_keys=True).encode()
        return hashlib.sha256(canon).digest()[:8]


# ---------------------------------------------------------------------------
# Shard file serialization.
# ---------------------------------------------------------------------------

def serialize_shard(shard: Shard, q: int, m: int, digest: bytes) -> bytes:
    role_tag = 1 if shard.is_global else 0
    alpha = len(shard.payload)
    head = _HEADER.pack(
        MAGIC, FORMAT_VERSION, digest, q, m, shard.index, role_tag, alpha
    )
    body = b"".join(e.to_bytes() for e in shard.payload)
    return head + body


def parse_shard(data: bytes, code: LrcCode, digest: bytes) -> Shard:
    if len(data) < _HEADER.size:
        raise ShardFormatError("shard file shorter than its header")
    magic, version, got_digest, q, m, index, role_tag, alpha = _HEADER.unpack(
        data[: _HEADER.size]
    )
    if magic != MAGIC:
        raise ShardFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ShardFormatError(f"unsupported format version {version}")
    if got_digest != digest:
        raise ConfigMismatchError(
            "shard was produced by a different configuration "
            f"(digest {got_digest.hex()} != {digest.hex()})"
        )
    if q != code.local.q or m != code.field.m:
        raise ConfigMismatchError(
            f"shard field GF({q}^{m}) != code field "
            f"GF({code.local.q}^{code.field.m})"
        )
    if alpha != code.alpha:
        raise ShardFormatError(f"alpha {alpha} != code alpha {code.alpha}")
    body = data[_HEADER.size:]
    if len(body) != alpha * m * 2:
        raise ShardFormatError(
            f"payload is {len(body)} bytes, expected {alpha * m * 2}"
        )
    payload = tuple(
        code.field.from_bytes(body[i * 2 * m:(i + 1) * 2 * m])
        for i in range(alpha)
    )
    role = code.role_of(index)
    if (role[0] == "global") != bool(role_tag):
        raise ShardFormatError(
            f"role tag {role_tag} contradicts node index {index}"
        )
    return Shard(index, role, payload)


def _shard_path(out_dir: Path, index: int) -> Path:
    return out_dir / f"shard_{index:04d}.lmbr"


def _load_shards(shard_dir: Path, code: LrcCode, digest: bytes,
                 skip: int | None = None) -> dict[int, Shard]:
    if not shard_dir.is_dir():
        raise FileNotFoundError(f"shard directory {shard_dir} does not exist")
    shards = {}
    for path in sorted(shard_dir.glob("shard_*.lmbr")):
        shard = parse_shard(path.read_bytes(), code, digest)
        if shard.index == skip:
            continue
        shards[shard.index] = shard
    return shards


# ---------------------------------------------------------------------------
# Message file I/O: K elements, each m uint16 LE coefficients; raw or hex.
# ---------------------------------------------------------------------------

def read_message(path: Path, code: LrcCode) -> list:
    expected = code.file_dim * code.field.m * 2
    raw = path.read_bytes()
    if len(raw) != expected:
        try:
            text = raw.decode("ascii")
            raw = bytes.fromhex("".join(text.split()))
        except (UnicodeDecodeError, ValueError):
            raise ShardFormatError(
                f"message must be {expected} raw bytes or hex text, got "
                f"{len(raw)} bytes"
            )
        if len(raw) != expected:
            raise ShardFormatError(
                f"hex message decodes to {len(raw)} bytes, expected {expected}"
            )
    m = code.field.m
    try:
        return [
            code.field.from_bytes(raw[i * 2 * m:(i + 1) * 2 * m])
            for i in range(code.file_dim)
        ]
    except ParameterError as exc:
        raise ShardFormatError(f"bad message symbol: {exc}")


def write_message(path: Path, message) -> None:
    path.write_bytes(b"".join(e.to_bytes() for e in message))


# ---------------------------------------------------------------------------
# Commands.
# ---------------------------------------------------------------------------

def cmd_make(cfg: SimConfig) -> int:
    code = cfg.build()
    ctx = code.bound_ctx
    summary = {
        "construction": cfg.construction,
        "n": code.n_nodes,
        "alpha": code.alpha,
        "k_local": code.local.k_message,
        "K": cfg.file_dim,
        "m": code.field.m,
        "dmin_bound": code.dmin_bound,
        "file_size_bound": ctx.max_file_size(code.dmin_bound),
        "digest": cfg.digest(code).hex(),
    }
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    descriptor = {"config": cfg.identity(code), "derived": summary}
    (out_dir / "code.json").write_text(json.dumps(descriptor, indent=2) + "\n")
    print(json.dumps(summary))
    return 0


def cmd_encode(cfg: SimConfig, input_path: str) -> int:
    code = cfg.build()
    digest = cfg.digest(code)
    message = read_message(Path(input_path), code)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for shard in code.encode(message):
        _shard_path(out_dir, shard.index).write_bytes(
            serialize_shard(shard, cfg.q, code.field.m, digest)
        )
    print(json.dumps({"shards": code.n_nodes, "out_dir": str(out_dir),
                      "digest": digest.hex()}))
    return 0


def cmd_decode(cfg: SimConfig, shard_dir: str, output_path: str) -> int:
    code = cfg.build()
    digest = cfg.digest(code)
    shards = _load_shards(Path(shard_dir), code, digest)
    message = code.decode(shards.values())
    write_message(Path(output_path), message)
    print(json.dumps({"symbols": len(message), "shards_used": len(shards),
                      "out": output_path}))
    return 0


def cmd_repair(cfg: SimConfig, shard_dir: str, failed: int) -> int:
    code = cfg.build()
    digest = cfg.digest(code)
    available = _load_shards(Path(shard_dir), code, digest, skip=failed)
    shard, metrics = code.repair(failed, available)
    _shard_path(Path(shard_dir), failed).write_bytes(
        serialize_shard(shard, cfg.q, code.field.m, digest)
    )
    record = {"failed": failed}
    record.update(metrics)
    print(json.dumps(record))
    return 0


def _verify_dmin(cfg: SimConfig, code: LrcCode) -> dict:
    claimed = code.dmin_bound
    result = code.measure_dmin(pattern_cap=cfg.pattern_cap,
                               workers=cfg.workers)
    return {
        "mode": "dmin",
        "claimed": claimed,
        "measured": result.value,
        "patterns_checked": result.patterns_checked,
        "pass": result.value == claimed,
        "witness": [int(i) for i in result.witness],
    }


def _verify_ura(cfg: SimConfig, code: LrcCode,
                claim_profile: list[int] | None) -> dict:
    report = code.ura_report(claimed_profile=claim_profile,
                             pattern_cap=cfg.pattern_cap)
    return {
        "mode": "ura",
        "claimed": report["claimed_profile"],
        "measured": "all-subsets-match" if report["pass"] else "mismatch",
        "columns": report["columns"],
        "subsets_checked": report["subsets_checked"],
        "pass": report["pass"],
        "witness": report["witness"],
    }


def _verify_repair_all(cfg: SimConfig, code: LrcCode) -> dict:
    rng = random.Random(cfg.seed)
    message = [code.field.random_element(rng) for _ in range(code.file_dim)]
    originals = {s.index: s for s in code.encode(message)}
    cases = 0
    failures = []

    def check(failed, shard, metrics, expect_symbols=None):
        nonlocal cases
        cases += 1
        ok = shard == originals[failed]
        if expect_symbols is not None:
            ok = ok and metrics.get("downloaded_symbols") == expect_symbols
        if not ok:
            failures.append({"failed": failed, "metrics": metrics})

    for failed in range(code.n_nodes):
        available = {i: s for i, s in originals.items() if i != failed}
        role = code.role_of(failed)
        if role[0] == "local" and isinstance(code.local, MbrCode):
            survivors = [
                i for i in code.group_members(role[1]) if i != failed
            ]
            for helper_set in combinations(survivors, code.local.d):
                shard, metrics = code.repair(failed, available,
                                             helpers=list(helper_set))
                check(failed, shard, metrics,
                      expect_symbols=code.local.d * code.local.beta)
        elif role[0] == "local":
            shard, metrics = code.repair(failed, available)
            check(failed, shard, metrics, expect_symbols=code.alpha)
        else:
            # Decode path: every threshold-sized helper subset at desk scale.
            avail = sorted(available)
            total = comb(len(avail), code.decode_threshold)
            if total <= cfg.pattern_cap:
                for subset in combinations(avail, code.decode_threshold):
                    recovered = code.decode(available[i] for i in subset)
                    shard = code.encode(recovered)[failed]
                    cases += 1
                    if shard != originals[failed]:
                        failures.append(
                            {"failed": failed, "subset": list(subset)}
                        )
            shard, metrics = code.repair(failed, available)
            check(failed, shard, metrics)
    return {
        "mode": "repair-all",
        "cases": cases,
        "pass": not failures,
        "witness": failures[0] if failures else None,
    }


def _verify_bounds_crosscheck(ctx) -> dict:
    top = 3 * ctx.k_local
    witness = None
    for v in range(1, top + 1):
        direct = ctx.p_inv(v)
        closed = ctx.p_inv_closed_form(v)
        if direct != closed:
            witness = {"K": v, "summation": direct, "closed_form": closed}
            break
    return {
        "mode": "bounds-crosscheck",
        "range": [1, top],
        "pass": witness is None,
        "witness": witness,
    }


def cmd_verify(cfg: SimConfig, mode: str,
               claim_profile: list[int] | None = None) -> int:
    if mode == "bounds-crosscheck":
        # Pure profile arithmetic; no extension field is needed.
        local = cfg.local_code()
        extra = cfg.delta if cfg.construction == "info-local" else 0
        ctx = BoundContext.for_local_code(local, cfg.t * local.n_nodes + extra)
        report = _verify_bounds_crosscheck(ctx)
    elif mode == "dmin":
        report = _verify_dmin(cfg, cfg.build())
    elif mode == "ura":
        report = _verify_ura(cfg, cfg.build(), claim_profile)
    elif mode == "repair-all":
        report = _verify_repair_all(cfg, cfg.build())
    else:
        raise ParameterError(f"unknown verify mode {mode!r}")
    print(json.dumps(report))
    return 0 if report["pass"] else 1


def cmd_bench(cfg: SimConfig, trials: int) -> int:
    if trials < 0:
        raise ParameterError("trials must be >= 0")
    code = cfg.build()
    rng = random.Random(cfg.seed)
    messages = [
        [code.field.random_element(rng) for _ in range(code.file_dim)]
        for _ in range(trials)
    ]
    subsets = [
        sorted(rng.sample(range(code.n_nodes), code.decode_threshold))
        for _ in range(trials)
    ]
    failed_nodes = [rng.randrange(code.n_nodes) for _ in range(trials)]

    encode_rate = decode_rate = None
    histogram: dict[str, int] = {}
    if trials:
        start = time.perf_counter()
        shard_sets = [code.encode(msg) for msg in messages]
        encode_elapsed = time.perf_counter() - start
        encode_rate = trials * code.n_nodes * code.alpha / encode_elapsed

        start = time.perf_counter()
        for shards, subset in zip(shard_sets, subsets):
            by_index = {s.index: s for s in shards}
            code.decode(by_index[i] for i in subset)
        decode_elapsed = time.perf_counter() - start
        decode_rate = trials * code.file_dim / decode_elapsed

        for shards, failed in zip(shard_sets, failed_nodes):
            available = {s.index: s for s in shards if s.index != failed}
            _, metrics = code.repair(failed, available)
            key = str(metrics["downloaded_symbols"])
            histogram[key] = histogram.get(key, 0) + 1
    print(json.dumps({
        "trials": trials,
        "encode_sym_per_s": encode_rate,
        "decode_sym_per_s": decode_rate,
        "repair_bandwidth_histogram": histogram,
    }))
    return 0


def cmd_bounds(cfg: SimConfig) -> int:
    code = cfg.build()
    ctx = code.bound_ctx
    dmin = ctx.optimal_dmin(cfg.file_dim)
    print(json.dumps({
        "n": ctx.n,
        "K": cfg.file_dim,
        "dmin_bound": dmin,
        "file_size_bound": ctx.max_file_size(dmin),
        "pinv": ctx.p_inv(cfg.file_dim),
    }))
    return 0


# ---------------------------------------------------------------------------
# Argument parsing.
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmbr",
        description="Locally repairable storage codes with regenerating or "
                    "repair-by-transfer local layers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--construction", choices=CONSTRUCTIONS,
                       default="all-symbol")
        p.add_argument("--q", type=int, default=3, help="base field order")
        p.add_argument("--m", type=int, default=None,
                       help="extension degree (default: outer code length)")
        p.add_argument("--t", type=int, default=2, help="local group count")
        p.add_argument("--nl", type=int, default=3, help="local code length")
        p.add_argument("--r", type=int, default=2,
                       help="local reconstruction threshold")
        p.add_argument("--d", type=int, default=2, help="repair degree")
        p.add_argument("--delta", type=int, default=1,
                       help="global node count (info-local only)")
        p.add_argument("--K", type=int, default=5, dest="file_dim",
                       help="file size (message symbols)")
        p.add_argument("--kfr", type=int, default=5,
                       help="message dimension of the repetition layer")
        p.add_argument("--design-file", default=None,
                       help="block design, one block per line, 1-based points")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--pattern-cap", type=int, default=10 ** 6)
        p.add_argument("--out-dir", default=".")

    p = sub.add_parser("make", help="construct a code and print its summary")
    add_config(p)

    p = sub.add_parser("encode", help="encode a message file into shards")
    add_config(p)
    p.add_argument("--in", dest="input_path", required=True)

    p = sub.add_parser("decode", help="decode a message from surviving shards")
    add_config(p)
    p.add_argument("--shard-dir", required=True)
    p.add_argument("--out", dest="output_path", required=True)

    p = sub.add_parser("repair", help="rebuild one failed shard in place")
    add_config(p)
    p.add_argument("--shard-dir", required=True)
    p.add_argument("--failed", type=int, required=True)

    p = sub.add_parser("verify", help="run an exhaustive certification mode")
    add_config(p)
    p.add_argument("--mode", required=True,
                   choices=("dmin", "ura", "repair-all", "bounds-crosscheck"))
    p.add_argument("--claim-profile", default=None,
                   help="comma-separated rank profile override (negative "
                        "controls for the ura mode)")

    p = sub.add_parser("bench", help="seeded throughput and bandwidth stats")
    add_config(p)
    p.add_argument("--trials", type=int, default=10)

    p = sub.add_parser("bounds", help="print the bound record for K")
    add_config(p)

    return parser


def _config_from_args(args) -> SimConfig:
    return SimConfig(
        construction=args.construction,
        q=args.q,
        m=args.m,
        t=args.t,
        n_l=args.nl,
        r=args.r,
        d=args.d,
        delta=args.delta,
        file_dim=args.file_dim,
        k_fr=args.kfr,
        design_file=args.design_file,
        seed=args.seed,
        workers=args.workers,
        pattern_cap=args.pattern_cap,
        out_dir=args.out_dir,
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "make":
            return cmd_make(cfg)
        if args.command == "encode":
            return cmd_encode(cfg, args.input_path)
        if args.command == "decode":
            return cmd_decode(cfg, args.shard_dir, args.output_path)
        if args.command == "repair":
            return cmd_repair(cfg, args.shard_dir, args.failed)
        if args.command == "verify":
            claim = None
            if args.claim_profile:
                claim = [int(tok) for tok in args.claim_profile.split(",")]
            return cmd_verify(cfg, args.mode, claim)
        if args.command == "bench":
            return cmd_bench(cfg, args.trials)
        if args.command == "bounds":
            return cmd_bounds(cfg)
        raise AssertionError(f"unhandled command {args.command}")
    except (PatternCapError, ParameterError, ConfigMismatchError) as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 2
    except (InsufficientRankError, InconsistentDataError, RepairError) as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 1
    except (OSError, ShardFormatError) as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
