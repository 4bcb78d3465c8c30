"""Two-stage locally repairable codes: rank-metric pre-code over a bank of
identical local codes.

Encoding first spreads the K message symbols over J = groups * k_local
(+ globals * alpha) evaluations of a linearized polynomial, then feeds each
group's slice of evaluations to its own local encoder (regenerating or
fractional-repetition); information-locality layouts additionally emit the
remaining evaluations verbatim as global nodes.

Because the local encoders act F_q-linearly and the outer polynomial is
F_q-linear, every stored scalar equals the polynomial evaluated at a known
mixed point: the matching column of Gamma = [theta_1 ... theta_J] . G,
where G is the block-diagonal local generator (plus identity columns for
global nodes).  The decoder therefore works from ANY surviving scalars:
it pairs each one with its Gamma column and interpolates, succeeding
exactly when the available columns span rank >= K over the base field.

:func:`LrcCode.measure_dmin` certifies the minimum distance by exhausting
erasure patterns against that same rank criterion (with the witness pattern
re-validated through an actual decode attempt), refusing rather than
sampling when the pattern count exceeds its cap.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bounds import BoundContext
from .errors import (
    InsufficientRankError,
    ParameterError,
    PatternCapError,
    RepairError,
)
from .frlocal import FrCode
from .galois import FieldElement, field, rank_mod_q
from .gabidulin import GabidulinCode
from .mbr import MbrCode


@dataclass(frozen=True)
class Shard:
    """One storage node's content: alpha symbols plus its placement."""

    index: int
    role: tuple
    payload: tuple[FieldElement, ...]

    @property
    def is_global(self) -> bool:
        return self.role[0] == "global"


@dataclass(frozen=True)
class DminResult:
    """Outcome of exhaustive distance measurement."""

    value: int
    witness: tuple[int, ...]
    patterns_checked: int


class LrcCode:
    """A composed code: ``groups`` local codes plus optional global nodes."""

    def __init__(self, local, groups: int, file_dim: int,
                 global_nodes: int = 0, ext_degree: int | None = None):
        if groups < 1:
            raise ParameterError(f"need at least one local group, got {groups}")
        if global_nodes < 0:
            raise ParameterError("global node count must be >= 0")
        k_local = local.k_message
        outer_len = groups * k_local + global_nodes * local.alpha
        if ext_degree is None:
            ext_degree = outer_len
        if ext_degree < outer_len:
            raise ParameterError(
                f"extension degree too small: m >= groups*k_local"
                f"{' + globals*alpha' if global_nodes else ''} requires "
                f"m >= {outer_len}, got m={ext_degree}"
            )
        if not 1 <= file_dim <= groups * k_local:
            raise ParameterError(
                f"file size must satisfy 1 <= K <= groups*k_local = "
                f"{groups * k_local}, got K={file_dim}"
            )
        self.local = local
        self.groups = groups
        self.global_nodes = global_nodes
        self.file_dim = file_dim
        self.n_nodes = groups * local.n_nodes + global_nodes
        self.alpha = local.alpha
        self.field = field(local.q, ext_degree)
        self.outer = GabidulinCode(self.field, outer_len, file_dim)
        self.mixed_generator = self._build_mixed_generator()
        # Expanded evaluation points of every stored scalar: column c of
        # Theta . G is the coefficient vector of gamma_c.
        theta = np.array(
            [p.coeffs for p in self.outer.points], dtype=np.int64
        ).T                                               # m x J
        self.expanded = (theta @ self.mixed_generator) % local.q
        self.gamma: tuple[FieldElement, ...] = tuple(
            self.field.element(self.expanded[:, c])
            for c in range(self.expanded.shape[1])
        )
        self.bound_ctx = BoundContext.for_local_code(local, self.n_nodes)
        self.dmin_bound = self.bound_ctx.optimal_dmin(file_dim)
        #: Number of shards that guarantees decodability.
        self.decode_threshold = self.n_nodes - self.dmin_bound + 1

    def _build_mixed_generator(self) -> np.ndarray:
        local_gen = self.local.generator_matrix()
        k_local, width = local_gen.shape
        rows = self.groups * k_local + self.global_nodes * self.alpha
        cols = self.groups * width + self.global_nodes * self.alpha
        g = np.zeros((rows, cols), dtype=np.int64)
        for grp in range(self.groups):
            g[grp * k_local:(grp + 1) * k_local,
              grp * width:(grp + 1) * width] = local_gen
        base_row = self.groups * k_local
        base_col = self.groups * width
        for i in range(self.global_nodes * self.alpha):
            g[base_row + i, base_col + i] = 1
        return g

    # -- placement helpers -------------------------------------------------------

    def role_of(self, index: int) -> tuple:
        if not 0 <= index < self.n_nodes:
            raise ParameterError(f"node index {index} out of range")
        local_span = self.groups * self.local.n_nodes
        if index < local_span:
            return ("local", index // self.local.n_nodes,
                    index % self.local.n_nodes)
        return ("global", index - local_span)

    def group_members(self, group: int) -> range:
        start = group * self.local.n_nodes
        return range(start, start + self.local.n_nodes)

    # -- encode / decode ------------------------------------------------------------

    def encode(self, message: Sequence[FieldElement]) -> list[Shard]:
        evaluations = self.outer.encode(message)
        k_local = self.local.k_message
        shards = []
        for grp in range(self.groups):
            slice_ = evaluations[grp * k_local:(grp + 1) * k_local]
            for pos, vec in enumerate(self.local.encode(list(slice_))):
                index = grp * self.local.n_nodes + pos
                shards.append(Shard(index, ("local", grp, pos), tuple(vec)))
        base = self.groups * k_local
        for slot in range(self.global_nodes):
            payload = evaluations[base + slot * self.alpha:
                                  base + (slot + 1) * self.alpha]
            shards.append(
                Shard(self.groups * self.local.n_nodes + slot,
                      ("global", slot), tuple(payload))
            )
        return shards

    def decode(self, shards: Iterable[Shard]) -> tuple[FieldElement, ...]:
        """Recover the message from any shard subset of sufficient rank.

        All supplied shards are used; surplus symbols are consistency
        checks, so a corrupt shard raises instead of silently winning.
        """
        pairs = []
        for shard in shards:
            base = shard.index * self.alpha
            for c, value in enumerate(shard.payload):
                pairs.append((self.gamma[base + c], value))
        return self.outer.decode_erasures(pairs)

    def decodable(self, surviving: Sequence[int]) -> bool:
        """Rank test: do these nodes' scalar columns span the message?"""
        cols = np.concatenate(
            [np.arange(i * self.alpha, (i + 1) * self.alpha) for i in surviving]
        ) if surviving else np.zeros(0, dtype=int)
        sub = self.expanded[:, cols]
        return rank_mod_q(sub, self.local.q) >= self.file_dim

    # -- repair ------------------------------------------------------------------------

    def repair(self, failed: int, available: Mapping[int, Shard],
               helpers: Sequence[int] | None = None) -> tuple[Shard, dict]:
        """Rebuild a failed node, preferring the in-group repair path.

        Local nodes are regenerated inside their group (d helper symbols for
        the regenerating layer, alpha verbatim copies for the repetition
        layer).  Global nodes, and local nodes whose group is too degraded,
        fall back to decoding the message from ``decode_threshold`` shards
        and re-encoding.  Returns the replacement shard (bit-identical to
        the lost one) and a metrics record of what moved.
        """
        if failed in available:
            raise ParameterError("failed node listed among available shards")
        role = self.role_of(failed)
        if helpers is not None:
            # Explicit helper choices are caller contracts, not conditions to
            # fall back on: validate before attempting anything.
            if role[0] != "local" or not isinstance(self.local, MbrCode):
                raise ParameterError(
                    "explicit helpers apply to the regenerating local path only"
                )
            members = set(self.group_members(role[1]))
            if len(set(helpers)) != self.local.d:
                raise ParameterError(
                    f"explicit helper set must have exactly d={self.local.d} "
                    "distinct members"
                )
            bad = [h for h in helpers
                   if h == failed or h not in members or h not in available]
            if bad:
                raise ParameterError(
                    f"helpers {bad} are not surviving members of the group"
                )
        if role[0] == "local":
            try:
                return self._repair_local(failed, role, available, helpers)
            except RepairError as exc:
                local_failure = str(exc)
        else:
            local_failure = "global nodes have no in-group path"
        try:
            return self._repair_by_decode(failed, available, local_failure)
        except InsufficientRankError as exc:
            raise RepairError(
                f"no repair path: local path failed ({local_failure}); "
                f"decode path failed ({exc})"
            )

    def _repair_local(self, failed, role, available, helpers):
        _, grp, pos = role
        members = self.group_members(grp)
        survivors = [i for i in members if i in available and i != failed]
        offset = grp * self.local.n_nodes
        if isinstance(self.local, MbrCode):
            d = self.local.d
            chosen = list(helpers) if helpers is not None else survivors[:d]
            if len(chosen) < d:
                raise RepairError(
                    f"group {grp} has {len(survivors)} survivors, repair "
                    f"degree requires {d}"
                )
            helper_symbols = [
                (h - offset,
                 self.local.helper_symbol(available[h].payload, pos))
                for h in chosen
            ]
            vec = self.local.repair(pos, helper_symbols)
            metrics = {
                "path": "local-regenerating",
                "helpers": [int(h) for h in chosen],
                "downloaded_symbols": d * self.local.beta,
            }
        elif isinstance(self.local, FrCode):
            in_group = {
                i - offset: available[i].payload for i in survivors
            }
            vec, assignment = self.local.repair(pos, in_group)
            metrics = {
                "path": "local-transfer",
                "helpers": sorted({int(h + offset) for h in assignment.values()}),
                "downloaded_symbols": self.alpha,
                "arithmetic_ops": 0,
            }
        else:
            raise ParameterError(
                f"unknown local code type {type(self.local).__name__}"
            )
        return Shard(failed, role, tuple(vec)), metrics

    def _repair_by_decode(self, failed, available, local_failure):
        ordered = sorted(available)
        use = ordered[: self.decode_threshold] \
            if len(ordered) >= self.decode_threshold else ordered
        message = self.decode(available[i] for i in use)
        shard = self.encode(message)[failed]
        return shard, {
            "path": "decode-reencode",
            "helpers": [int(i) for i in use],
            "downloaded_shards": len(use),
            "downloaded_symbols": len(use) * self.alpha,
            "local_path_error": local_failure,
        }

    # -- exhaustive certification ---------------------------------------------------

    def measure_dmin(self, pattern_cap: int = 10 ** 6,
                     workers: int = 1) -> DminResult:
        """Measure the minimum distance by brute-force erasure enumeration.

        Walks erasure counts e = 1, 2, ... and checks every C(n, e) pattern
        for decodability; the first count with an undecodable pattern is the
        distance.  Levels whose pattern count exceeds ``pattern_cap`` are
        refused (no sampling).  The witness pattern is re-validated against
        the real decoder before being returned.
        """
        n = self.n_nodes
        checked = 0
        for erased in range(1, n + 1):
            count = comb(n, erased)
            if count > pattern_cap:
                raise PatternCapError(
                    f"C({n},{erased}) = {count} erasure patterns exceed the "
                    f"cap {pattern_cap}; refusing to sample"
                )
            witness = self._find_failing_pattern(erased, workers)
            checked += count if witness is None else 0
            if witness is not None:
                self._assert_undecodable(witness)
                return DminResult(value=erased, witness=witness,
                                  patterns_checked=checked)
        raise AssertionError("full erasure is always undecodable; unreachable")

    def _find_failing_pattern(self, erased, workers):
        n = self.n_nodes
        all_nodes = set(range(n))
        if workers <= 1:
            for pattern in combinations(range(n), erased):
                if not self.decodable(sorted(all_nodes - set(pattern))):
                    return pattern
            return None
        patterns = list(combinations(range(n), erased))
        chunk = max(1, len(patterns) // (workers * 4))
        pieces = [patterns[i:i + chunk] for i in range(0, len(patterns), chunk)]
        args = [
            (self.expanded, self.local.q, self.file_dim, self.alpha, n, piece)
            for piece in pieces
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # Results arrive in submission order, so the first hit is the
            # lexicographically smallest failing pattern regardless of how
            # the pool schedules the chunks.
            for result in pool.map(_scan_chunk, args):
                if result is not None:
                    return result
        return None

    def _assert_undecodable(self, pattern):
        survivors = sorted(set(range(self.n_nodes)) - set(pattern))
        message = [self.field.one() for _ in range(self.file_dim)]
        shards = {s.index: s for s in self.encode(message)}
        try:
            self.decode(shards[i] for i in survivors)
        except InsufficientRankError:
            return
        raise AssertionError(
            f"rank test and decoder disagree on pattern {pattern}"
        )

    def ura_report(self, claimed_profile: Sequence[int] | None = None,
                   pattern_cap: int = 10 ** 6) -> dict:
        """Certify rank accumulation of the concatenated local bank.

        For every subset of the groups * n_local local thick columns the
        measured rank must equal the sum over groups of the claimed
        profile's prefix sums (the local generators sit on disjoint message
        coordinates, so their ranks add), and for every subset size the
        minimum over subsets must equal the periodic partial sum: together
        these say the profile governs exactly how rank accumulates, which is
        what the distance bound consumes.
        """
        if claimed_profile is None:
            claimed_profile = list(self.local.profile())
        claimed = [int(v) for v in claimed_profile]
        n_local = self.local.n_nodes
        if len(claimed) != n_local:
            raise ParameterError(
                f"claimed profile must have length n_local={n_local}"
            )
        cols = self.groups * n_local
        subsets = 2 ** cols
        if subsets > pattern_cap:
            raise PatternCapError(
                f"2^{cols} = {subsets} subsets exceed the cap {pattern_cap}"
            )
        prefix = [0]
        for a in claimed:
            prefix.append(prefix[-1] + a)
        period_total = prefix[-1]

        def periodic(s: int) -> int:
            return (s // n_local) * period_total + prefix[s % n_local]

        k_local = self.local.k_message
        basic = self.mixed_generator[: self.groups * k_local,
                                     : cols * self.alpha]
        q = self.local.q
        min_by_size = [None] * (cols + 1)
        min_by_size[0] = 0
        witness = None
        for size in range(1, cols + 1):
            for subset in combinations(range(cols), size):
                idx = np.concatenate(
                    [np.arange(i * self.alpha, (i + 1) * self.alpha)
                     for i in subset]
                )
                measured = rank_mod_q(basic[:, idx], q)
                expected = sum(
                    prefix[min(sum(1 for i in subset
                                   if i // n_local == g), n_local)]
                    for g in range(self.groups)
                )
                if measured != expected and witness is None:
                    witness = {
                        "kind": "block-rank",
                        "subset": [int(i) for i in subset],
                        "measured": int(measured),
                        "expected": int(expected),
                    }
                if min_by_size[size] is None or measured < min_by_size[size]:
                    min_by_size[size] = measured
            if witness is None and min_by_size[size] != periodic(size):
                witness = {
                    "kind": "size-minimum",
                    "size": size,
                    "measured": int(min_by_size[size]),
                    "expected": int(periodic(size)),
                }
            if witness is not None:
                break
        return {
            "mode": "ura",
            "columns": cols,
            "claimed_profile": claimed,
            "subsets_checked": subsets if witness is None else None,
            "pass": witness is None,
            "witness": witness,
        }

    def __repr__(self):
        return (
            f"LrcCode(groups={self.groups}, local={self.local!r}, "
            f"globals={self.global_nodes}, n={self.n_nodes}, K={self.file_dim}, "
            f"m={self.field.m})"
        )


def _scan_chunk(args):
    """Worker for parallel distance measurement: first failing pattern."""
    expanded, q, file_dim, alpha, n, patterns = args
    all_nodes = set(range(n))
    for pattern in patterns:
        surviving = sorted(all_nodes - set(pattern))
        cols = np.concatenate(
            [np.arange(i * alpha, (i + 1) * alpha) for i in surviving]
        ) if surviving else np.zeros(0, dtype=int)
        if rank_mod_q(expanded[:, cols], q) < file_dim:
            return pattern
    return None


def all_symbol_code(groups: int, local, file_dim: int,
                    ext_degree: int | None = None) -> LrcCode:
    """Bank of ``groups`` identical local codes under one pre-code.

    Every node lives in a local group, so every symbol is locally
    repairable.  Requires ext_degree >= groups * k_local (defaults to
    exactly that).
    """
    return LrcCode(local, groups, file_dim, global_nodes=0,
                   ext_degree=ext_degree)


def info_locality_code(groups: int, global_nodes: int, local, file_dim: int,
                       ext_degree: int | None = None) -> LrcCode:
    """Local bank plus ``global_nodes`` nodes of verbatim pre-code symbols.

    The local groups alone span the message (information locality); the
    global nodes add distance but are repaired by decode-and-reencode.
    With global_nodes = 0 this is exactly :func:`all_symbol_code`.
    """
    return LrcCode(local, groups, file_dim, global_nodes=global_nodes,
                   ext_degree=ext_degree)
