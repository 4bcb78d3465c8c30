"""Fractional-repetition local codes built from combinatorial block designs.

A t-(n, w, lambda) design is a collection of w-subsets (blocks) of an n-set
of points such that every t-subset of points lies in exactly lambda blocks.
The storage code derived from it first spreads the message over b = number
of blocks coded symbols with a Reed-Solomon code over F_q (q >= b, applied
F_q-linearly so extension-field symbols pass straight through), then places
symbol j verbatim on every node whose point belongs to block j.  Every node
thus stores alpha = lambda_1 symbols, and a failed node is repaired by
copying each of its symbols from some surviving holder: no arithmetic, a
fixed lookup table, exactly alpha symbols moved.

The number of blocks through any s <= t fixed points depends only on s
(lambda_s), so unions of few nodes have predictable size and the code
accumulates rank uniformly once union sizes are capped at the message
dimension.  That capped uniformity is verified exhaustively, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DesignError,
    InconsistentDataError,
    InsufficientRankError,
    ParameterError,
    PatternCapError,
    RepairError,
)
from .galois import FieldElement, inv_mod_q, is_prime
from .mbr import RankProfile

#: The seven lines of the Fano plane over points 1..7 (a 2-(7,3,1) design).
FANO_BLOCKS = (
    (1, 2, 3),
    (1, 4, 5),
    (1, 6, 7),
    (2, 4, 6),
    (2, 5, 7),
    (3, 4, 7),
    (3, 5, 6),
)


@dataclass(frozen=True)
class Design:
    """A verified t-(n_points, block_size, index) block design.

    Construct through :func:`verify_design` (or the loaders below), which
    checks the covering condition exhaustively.
    """

    strength: int
    n_points: int
    block_size: int
    index: int
    blocks: tuple[tuple[int, ...], ...]

    @property
    def b(self) -> int:
        return len(self.blocks)

    def lambda_s(self, s: int) -> int:
        """Number of blocks through any s fixed points (0 <= s <= strength).

        Computed by the counting identity lambda * C(n-s, t-s) / C(w-s, t-s)
        and cross-checked against the stored blocks for every s-subset; a
        mismatch means the design object was tampered with.
        """
        if not 0 <= s <= self.strength:
            raise ParameterError(
                f"lambda_s defined for 0 <= s <= t={self.strength}, got {s}"
            )
        t, n, w = self.strength, self.n_points, self.block_size
        num = self.index * comb(n - s, t - s)
        den = comb(w - s, t - s)
        if num % den:
            raise DesignError(f"lambda_{s} = {num}/{den} is not an integer")
        value = num // den
        for subset in combinations(range(1, n + 1), s):
            count = sum(1 for blk in self.blocks if set(subset) <= set(blk))
            if count != value:
                raise DesignError(
                    f"direct count {count} for {subset} contradicts "
                    f"lambda_{s} = {value}",
                    witness=subset,
                )
        return value


def verify_design(n_points: int, blocks: Sequence[Sequence[int]],
                  strength: int, index: int) -> Design:
    """Exhaustively check the design conditions and return a Design.

    Rejection names a witness: either a malformed block or the first
    t-subset of points covered a wrong number of times.
    """
    if strength < 1:
        raise ParameterError(f"design strength must be >= 1, got {strength}")
    if index < 1:
        raise ParameterError(f"design index must be >= 1, got {index}")
    norm_blocks = []
    block_size = None
    for blk in blocks:
        b = tuple(sorted(int(x) for x in blk))
        if len(set(b)) != len(b):
            raise DesignError(f"block {blk} repeats a point", witness=b)
        if any(not 1 <= x <= n_points for x in b):
            raise DesignError(
                f"block {blk} uses points outside 1..{n_points}", witness=b
            )
        if block_size is None:
            block_size = len(b)
        elif len(b) != block_size:
            raise DesignError(
                f"block {blk} has size {len(b)}, expected {block_size}", witness=b
            )
        norm_blocks.append(b)
    if block_size is None:
        raise DesignError("design has no blocks")
    if not strength <= block_size < n_points:
        raise ParameterError(
            f"need t <= w < n, got t={strength}, w={block_size}, n={n_points}"
        )
    for subset in combinations(range(1, n_points + 1), strength):
        count = sum(1 for blk in norm_blocks if set(subset) <= set(blk))
        if count != index:
            raise DesignError(
                f"point set {subset} lies in {count} blocks, expected {index}",
                witness=subset,
            )
    return Design(
        strength=strength,
        n_points=n_points,
        block_size=block_size,
        index=index,
        blocks=tuple(norm_blocks),
    )


def infer_design(n_points: int, blocks: Sequence[Sequence[int]]) -> Design:
    """Verify blocks as a design of the largest uniform strength.

    Tries t = w, w-1, ..., 1 and accepts the first strength at which every
    t-subset is covered equally often.
    """
    sizes = {len(set(b)) for b in blocks}
    if len(sizes) != 1:
        raise DesignError(f"blocks have mixed sizes {sorted(sizes)}")
    w = sizes.pop()
    last_error = None
    for t in range(min(w, n_points - 1), 0, -1):
        counts = set()
        for subset in combinations(range(1, n_points + 1), t):
            counts.add(sum(1 for blk in blocks if set(subset) <= set(blk)))
            if len(counts) > 1:
                break
        if len(counts) == 1:
            lam = counts.pop()
            if lam >= 1:
                return verify_design(n_points, blocks, t, lam)
        last_error = f"coverage at strength {t} is not uniform"
    raise DesignError(last_error or "no uniform strength found")


def load_design(path) -> Design:
    """Read a design file: one block per line, space-separated 1-based
    point indices; blank lines and '#' comments are skipped."""
    blocks = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            blocks.append(tuple(int(tok) for tok in line.split()))
    if not blocks:
        raise DesignError(f"design file {path} contains no blocks")
    n_points = max(max(b) for b in blocks)
    return infer_design(n_points, blocks)


def fano_plane() -> Design:
    """The built-in 2-(7,3,1) design."""
    return verify_design(7, FANO_BLOCKS, strength=2, index=1)


class FrCode:
    """Fractional-repetition code over a verified design.

    ``k_message`` message symbols are Reed-Solomon coded to ``b`` symbols
    (evaluation points 0..b-1 in F_q) and replicated per the design's
    incidence.  ``k_rec`` is the smallest node count from which any node set
    reconstructs the message; it must exist among 1..strength, where union
    sizes are uniform.
    """

    def __init__(self, design: Design, k_message: int, q: int):
        b = design.b
        if not is_prime(q) or q < b:
            raise ParameterError(
                f"need prime q >= b for the MDS layer, got q={q}, b={b}"
            )
        if k_message < 1:
            raise ParameterError("message dimension must be positive")
        self.design = design
        self.q = q
        self.k_message = k_message
        self.alpha = design.lambda_s(1)
        # node i holds the symbols of the blocks through point i+1 (0-based
        # symbol ids, ascending).
        self.node_symbols: tuple[tuple[int, ...], ...] = tuple(
            tuple(j for j, blk in enumerate(design.blocks) if point in blk)
            for point in range(1, design.n_points + 1)
        )
        self._lambdas = [design.lambda_s(s) for s in range(design.strength + 1)]
        self.k_rec = self._solve_recovery_threshold()
        # Reed-Solomon generator: row j evaluates at point j.
        self.rs_matrix = np.array(
            [[pow(j, l, q) for l in range(k_message)] for j in range(b)],
            dtype=np.int64,
        )
        self.repair_table: tuple[dict, ...] = tuple(
            {
                sym: min(h for h in range(design.n_points)
                         if h != i and sym in self.node_symbols[h])
                for sym in self.node_symbols[i]
            }
            for i in range(design.n_points)
        )
        self._profile: RankProfile | None = None

    # -- combinatorics -----------------------------------------------------------

    def uniform_union(self, s: int) -> int:
        """Size of the union of any s nodes, for s <= design strength.

        Inclusion-exclusion over the uniform intersection sizes lambda_s.
        """
        if not 0 <= s <= self.design.strength:
            raise ParameterError(
                f"union size is uniform only for s <= t={self.design.strength}"
            )
        return sum(
            (-1) ** (j + 1) * comb(s, j) * self._lambdas[j] for j in range(1, s + 1)
        )

    def _solve_recovery_threshold(self) -> int:
        prev = 0
        for k in range(1, self.design.strength + 1):
            cur = self.uniform_union(k)
            if prev < self.k_message <= cur:
                return k
            prev = cur
        raise ParameterError(
            f"no k <= t={self.design.strength} gives union >= k_message="
            f"{self.k_message} (max union {prev}); pick a smaller message"
        )

    # -- encode / reconstruct ------------------------------------------------------

    def encode(self, message: Sequence[FieldElement]) -> list[tuple[FieldElement, ...]]:
        """MDS-code the message, then replicate symbols per the design."""
        message = list(message)
        if len(message) != self.k_message:
            raise ParameterError(
                f"message length {len(message)} != k_message {self.k_message}"
            )
        fld = message[0].field
        symbols = []
        for j in range(self.design.b):
            acc = fld.zero()
            for l in range(self.k_message):
                s = int(self.rs_matrix[j, l])
                if s and not message[l].is_zero():
                    acc = acc + s * message[l]
            symbols.append(acc)
        return [
            tuple(symbols[j] for j in syms) for syms in self.node_symbols
        ]

    def reconstruct(
        self, nodes: Sequence[tuple[int, Sequence[FieldElement]]]
    ) -> tuple[FieldElement, ...]:
        """Recover the message from nodes jointly exposing >= k_message
        distinct symbols (any k_rec nodes suffice)."""
        gathered: dict[int, FieldElement] = {}
        for idx, vec in nodes:
            if not 0 <= idx < self.design.n_points:
                raise ParameterError(f"node index {idx} out of range")
            vec = tuple(vec)
            if len(vec) != self.alpha:
                raise ParameterError("node vector has wrong length")
            for sym, value in zip(self.node_symbols[idx], vec):
                if sym in gathered:
                    if gathered[sym] != value:
                        raise InconsistentDataError(
                            f"replicas of symbol {sym} disagree"
                        )
                else:
                    gathered[sym] = value
        if len(gathered) < self.k_message:
            raise InsufficientRankError(
                f"nodes expose {len(gathered)} distinct symbols, need "
                f"{self.k_message}"
            )
        fld = next(iter(gathered.values())).field
        use = sorted(gathered)[: self.k_message]
        sub = inv_mod_q(self.rs_matrix[use][:, : self.k_message], self.q)
        message = []
        for i in range(self.k_message):
            acc = fld.zero()
            for k in range(self.k_message):
                s = int(sub[i, k])
                if s:
                    acc = acc + s * gathered[use[k]]
            message.append(acc)
        message = tuple(message)
        # Surplus symbols double-check the solve.
        reencoded = self.encode(message)
        flat = {}
        for idx in range(self.design.n_points):
            for sym, value in zip(self.node_symbols[idx], reencoded[idx]):
                flat[sym] = value
        for sym, value in gathered.items():
            if flat[sym] != value:
                raise InconsistentDataError(
                    f"symbol {sym} contradicts the reconstruction"
                )
        return message

    # -- repair ---------------------------------------------------------------------

    def repair(
        self, failed: int, available: Mapping[int, Sequence[FieldElement]]
    ) -> tuple[tuple[FieldElement, ...], dict[int, int]]:
        """Copy each lost symbol from a surviving holder.

        Prefers the static repair table; falls back to the lowest-index
        available holder when the table's choice is down.  Returns the
        rebuilt vector and the symbol -> helper assignment; exactly alpha
        symbols move and no arithmetic happens.
        """
        if failed in available:
            raise ParameterError("failed node listed as available")
        if not 0 <= failed < self.design.n_points:
            raise ParameterError(f"failed index {failed} out of range")
        values = []
        assignment: dict[int, int] = {}
        for sym in self.node_symbols[failed]:
            helper = self.repair_table[failed][sym]
            if helper not in available:
                holders = [
                    h for h in sorted(available)
                    if sym in self.node_symbols[h]
                ]
                if not holders:
                    raise RepairError(
                        f"symbol {sym} is extinct: all holders unavailable"
                    )
                helper = holders[0]
            pos = self.node_symbols[helper].index(sym)
            values.append(available[helper][pos])
            assignment[sym] = helper
        return tuple(values), assignment

    # -- rank accumulation -------------------------------------------------------------

    def profile(self, pattern_cap: int = 1 << 22) -> RankProfile:
        """Capped-union rank profile, verified exhaustively.

        The rank any i nodes expose is min(|union of their symbol sets|,
        k_message).  Increments are taken from the uniform union sizes up to
        k_rec; the exhaustive sweep then confirms that the cap makes the
        accumulation uniform for every subset of every size, and rejects the
        design/message-size pair otherwise.
        """
        if self._profile is not None:
            return self._profile
        n = self.design.n_points
        if 2 ** n > pattern_cap:
            raise PatternCapError(
                f"2^{n} subsets exceed the cap {pattern_cap}"
            )
        values = []
        prev = 0
        for i in range(1, n + 1):
            if i <= self.k_rec:
                cur = min(self.uniform_union(i), self.k_message)
            else:
                cur = self.k_message
            values.append(cur - prev)
            prev = cur
        predicted = [0]
        for v in values:
            predicted.append(predicted[-1] + v)
        sets = [frozenset(s) for s in self.node_symbols]
        for size in range(1, n + 1):
            for subset in combinations(range(n), size):
                union = frozenset().union(*(sets[i] for i in subset))
                measured = min(len(union), self.k_message)
                if measured != predicted[size]:
                    raise DesignError(
                        f"rank accumulation is not uniform: nodes {subset} "
                        f"expose {measured}, expected {predicted[size]}",
                        witness=subset,
                    )
        self._profile = RankProfile(tuple(values))
        return self._profile

    def generator_matrix(self) -> np.ndarray:
        """k_message x (n_points * alpha) generator over F_q."""
        g = np.zeros(
            (self.k_message, self.design.n_points * self.alpha), dtype=np.int64
        )
        for i, syms in enumerate(self.node_symbols):
            for c, sym in enumerate(syms):
                g[:, i * self.alpha + c] = self.rs_matrix[sym]
        return g

    @property
    def n_nodes(self) -> int:
        return self.design.n_points

    def __repr__(self):
        d = self.design
        return (
            f"FrCode({d.strength}-({d.n_points},{d.block_size},{d.index}) design, "
            f"k_message={self.k_message}, q={self.q}, alpha={self.alpha}, "
            f"k_rec={self.k_rec})"
        )
