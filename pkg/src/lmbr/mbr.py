"""Product-matrix minimum-bandwidth-regenerating (MBR) local codes.

The code stores ``k_message = d*r - C(r,2)`` message symbols across
``n_local`` nodes of ``alpha = d`` symbols each (the beta = 1 point, where a
replacement node downloads exactly one symbol from each of d helpers).  The
message fills a symmetric d x d matrix

    M = [[S, T],
         [T^t, 0]]

with S an r x r symmetric block (upper triangle, row-major) and T an
r x (d-r) block (row-major); node i stores row i of Psi . M, where Psi is an
n_local x d Vandermonde matrix with seeds 0..n_local-1.  Any r rows of the
first r columns of Psi are invertible, giving reconstruction from any r
nodes; any d full rows are invertible, giving exact single-node repair.

All coefficients live in the base field F_q, so encoding commutes with any
F_q-linear map of the message symbols -- the property that lets these codes
sit under a rank-metric pre-code.  Message symbols themselves may belong to
any extension F_{q^m}.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from .errors import InconsistentDataError, ParameterError
from .galois import FieldElement, apply_int_matrix, inv_mod_q, is_prime, rank_mod_q


@dataclass(frozen=True)
class RankProfile:
    """Per-column rank increments a_1..a_n of a uniform-rank-accumulation code."""

    values: tuple[int, ...]

    def __post_init__(self):
        if any(v < 0 for v in self.values):
            raise ParameterError("rank profile entries must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.values)

    def prefix(self, s: int) -> int:
        """Sum of the first s entries (s <= len)."""
        if not 0 <= s <= len(self.values):
            raise ParameterError(f"prefix index {s} out of range")
        return sum(self.values[:s])

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


class MbrCode:
    """Exact-repair regenerating code at the minimum-bandwidth point."""

    beta = 1

    def __init__(self, n_local: int, r: int, d: int, q: int):
        if not 1 <= r <= d:
            raise ParameterError(f"need 1 <= r <= d, got r={r}, d={d}")
        if d > n_local - 1:
            raise ParameterError(
                f"repair degree must satisfy d <= n_local - 1, got d={d}, "
                f"n_local={n_local}"
            )
        if not is_prime(q):
            raise ParameterError(f"base field order must be prime, got q={q}")
        if q < n_local:
            raise ParameterError(
                f"need q >= n_local for distinct Vandermonde seeds, got q={q}, "
                f"n_local={n_local}"
            )
        self.n_local = n_local
        self.r = r
        self.d = d
        self.q = q
        self.alpha = d
        self.k_message = d * r - comb(r, 2)
        # Vandermonde rows (1, x_i, ..., x_i^(d-1)) with x_i = i.
        self.psi = np.array(
            [[pow(i, j, q) for j in range(d)] for i in range(n_local)],
            dtype=np.int64,
        )
        self._check_row_independence()
        self._generator: np.ndarray | None = None

    def _check_row_independence(self):
        phi = self.psi[:, : self.r]
        for rows in combinations(range(self.n_local), self.d):
            if rank_mod_q(self.psi[list(rows)], self.q) != self.d:
                raise AssertionError("Vandermonde d-row independence violated")
        for rows in combinations(range(self.n_local), self.r):
            if rank_mod_q(phi[list(rows)], self.q) != self.r:
                raise AssertionError("Vandermonde r-row independence violated")

    # -- message matrix packing ------------------------------------------------

    def _message_positions(self) -> list[list[tuple[int, int]]]:
        """For each message symbol, the (row, col) slots of M it occupies."""
        slots = []
        for i in range(self.r):
            for j in range(i, self.r):
                slots.append([(i, j)] if i == j else [(i, j), (j, i)])
        for i in range(self.r):
            for j in range(self.r, self.d):
                slots.append([(i, j), (j, i)])
        assert len(slots) == self.k_message
        return slots

    def _fill_matrix(self, msg: Sequence, zero) -> list[list]:
        m = [[zero for _ in range(self.d)] for _ in range(self.d)]
        for value, positions in zip(msg, self._message_positions()):
            for (i, j) in positions:
                m[i][j] = value
        return m

    # -- core operations ---------------------------------------------------------

    def encode(self, message: Sequence[FieldElement]) -> list[tuple[FieldElement, ...]]:
        """Node vectors (rows of Psi . M) for a message of extension symbols."""
        message = list(message)
        if len(message) != self.k_message:
            raise ParameterError(
                f"message length {len(message)} != k_message {self.k_message}"
            )
        fld = message[0].field
        matrix = self._fill_matrix(message, fld.zero())
        nodes = []
        for i in range(self.n_local):
            row = self.psi[i]
            vec = []
            for c in range(self.d):
                acc = fld.zero()
                for k in range(self.d):
                    scalar = int(row[k])
                    if scalar and not matrix[k][c].is_zero():
                        acc = acc + scalar * matrix[k][c]
                vec.append(acc)
            nodes.append(tuple(vec))
        return nodes

    def reconstruct(
        self, nodes: Sequence[tuple[int, Sequence[FieldElement]]]
    ) -> tuple[FieldElement, ...]:
        """Recover the message from any r (index, vector) pairs.

        Supersets are accepted; the lowest r indices drive the solve and any
        surplus vectors are verified against the re-encoded result.
        """
        seen = {}
        for idx, vec in nodes:
            if idx in seen:
                raise ParameterError(f"duplicate node index {idx}")
            if not 0 <= idx < self.n_local:
                raise ParameterError(f"node index {idx} out of range")
            vec = tuple(vec)
            if len(vec) != self.alpha:
                raise ParameterError("node vector has wrong length")
            seen[idx] = vec
        if len(seen) < self.r:
            raise ParameterError(
                f"reconstruction needs at least r={self.r} nodes, got {len(seen)}"
            )
        fld = next(iter(seen.values()))[0].field
        use = sorted(seen)[: self.r]
        psi_dc = self.psi[use]                     # r x d
        phi_dc = psi_dc[:, : self.r]               # r x r, invertible
        lam_dc = psi_dc[:, self.r:]                # r x (d-r)
        phi_inv = inv_mod_q(phi_dc, self.q)
        data = [list(seen[i]) for i in use]        # r x d of elements
        # T = phi_inv . right block of the collected data.
        t_block = [[fld.zero()] * (self.d - self.r) for _ in range(self.r)]
        if self.d > self.r:
            right = [row[self.r:] for row in data]  # r x (d-r)
            for i in range(self.r):
                for j in range(self.d - self.r):
                    acc = fld.zero()
                    for k in range(self.r):
                        s = int(phi_inv[i, k])
                        if s:
                            acc = acc + s * right[k][j]
                    t_block[i][j] = acc
        # S = phi_inv . (left block - lam . T^t).
        left = [row[: self.r] for row in data]
        if self.d > self.r:
            for i in range(self.r):
                for j in range(self.r):
                    acc = left[i][j]
                    for k in range(self.d - self.r):
                        s = int(lam_dc[i, k])
                        if s:
                            acc = acc - s * t_block[j][k]
                    left[i][j] = acc
        s_block = [[fld.zero()] * self.r for _ in range(self.r)]
        for i in range(self.r):
            for j in range(self.r):
                acc = fld.zero()
                for k in range(self.r):
                    s = int(phi_inv[i, k])
                    if s:
                        acc = acc + s * left[k][j]
                s_block[i][j] = acc
        message = []
        for i in range(self.r):
            for j in range(i, self.r):
                message.append(s_block[i][j])
        for i in range(self.r):
            for j in range(self.d - self.r):
                message.append(t_block[i][j])
        message = tuple(message)
        if len(seen) > self.r:
            reencoded = self.encode(message)
            for idx, vec in seen.items():
                if tuple(reencoded[idx]) != vec:
                    raise InconsistentDataError(
                        f"surplus node {idx} contradicts the reconstruction"
                    )
        return message

    def helper_symbol(
        self, stored: Sequence[FieldElement], failed: int
    ) -> FieldElement:
        """The single symbol a helper transmits for a failed node.

        This is the inner product of the helper's stored vector with the
        failed node's Vandermonde row: the helper computes it locally, so the
        repair bandwidth is exactly one symbol per helper.
        """
        if not 0 <= failed < self.n_local:
            raise ParameterError(f"failed index {failed} out of range")
        stored = tuple(stored)
        fld = stored[0].field
        row = self.psi[failed]
        acc = fld.zero()
        for c in range(self.d):
            s = int(row[c])
            if s and not stored[c].is_zero():
                acc = acc + s * stored[c]
        return acc

    def repair(
        self, failed: int, helpers: Sequence[tuple[int, FieldElement]]
    ) -> tuple[FieldElement, ...]:
        """Rebuild the failed node from exactly d helper symbols.

        Each helper symbol must be the value :meth:`helper_symbol` computes
        from that helper's stored vector.  The result is exactly the lost
        vector, since M is symmetric: solving Psi_H z = s gives z = M psi_f^t
        and the node content is (M psi_f^t)^t = psi_f M.
        """
        indices = [i for i, _ in helpers]
        if len(indices) != self.d:
            raise ParameterError(
                f"repair needs exactly d={self.d} helpers, got {len(indices)}"
            )
        if len(set(indices)) != len(indices):
            raise ParameterError("duplicate helper index")
        if failed in indices:
            raise ParameterError("helper set must not contain the failed node")
        if not 0 <= failed < self.n_local:
            raise ParameterError(f"failed index {failed} out of range")
        fld = helpers[0][1].field
        psi_h = self.psi[indices]                 # d x d, invertible
        inv = inv_mod_q(psi_h, self.q)
        symbols = [s for _, s in helpers]
        return tuple(apply_int_matrix(inv, symbols, fld))

    def profile(self) -> RankProfile:
        """Rank accumulation profile (alpha, alpha - beta, ..., 0, ...)."""
        values = [
            self.alpha - j * self.beta if j < self.r else 0
            for j in range(self.n_local)
        ]
        return RankProfile(tuple(values))

    def generator_matrix(self) -> np.ndarray:
        """k_message x (n_local * alpha) generator over F_q.

        Column node*alpha + c is the F_q functional producing that stored
        scalar; built by encoding the unit messages with plain residues.
        """
        if self._generator is None:
            g = np.zeros((self.k_message, self.n_local * self.alpha), dtype=np.int64)
            for l in range(self.k_message):
                unit = [1 if i == l else 0 for i in range(self.k_message)]
                matrix = np.array(self._fill_matrix(unit, 0), dtype=np.int64)
                rows = (self.psi @ matrix) % self.q
                g[l] = rows.reshape(-1)
            self._generator = g
        return self._generator

    @property
    def n_nodes(self) -> int:
        return self.n_local

    def __repr__(self):
        return (
            f"MbrCode(n_local={self.n_local}, r={self.r}, d={self.d}, "
            f"q={self.q}, alpha={self.alpha}, k_message={self.k_message})"
        )
