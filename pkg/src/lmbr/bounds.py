"""Rank-accumulation bookkeeping: partial sums, their inverse, and the
distance / file-size bounds they induce.

A code built from identical local codes with rank profile (a_1, ..., a_nL)
accumulates rank periodically: extending the profile with period n_L, the
partial sum P(s) is the smallest rank any s columns can have, and its
generalized inverse P_inv(v) = min{ s : P(s) >= v } is the number of columns
that guarantees rank v.  The optimal minimum distance for file size K is
then n - P_inv(K) + 1, and conversely a distance target caps the file size
at P(n - d + 1).

Everything here is plain integer arithmetic over the stored profile; the
closed form available for regenerating-code profiles is provided as a
separate routine so the two can be cross-checked rather than trusted.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .errors import ParameterError
from .mbr import RankProfile


@dataclass(frozen=True)
class BoundContext:
    """Length-n code assembled from local codes with the given profile.

    n = groups * n_local + extra, where the ``extra`` columns (present for
    information-locality layouts) each accumulate a full a_1 of fresh rank.
    """

    n: int
    n_local: int
    k_local: int
    profile: RankProfile

    def __post_init__(self):
        if self.n_local < 1 or self.n < self.n_local:
            raise ParameterError(
                f"need n >= n_local >= 1, got n={self.n}, n_local={self.n_local}"
            )
        if len(self.profile) != self.n_local:
            raise ParameterError(
                f"profile length {len(self.profile)} != n_local {self.n_local}"
            )
        if self.profile.total != self.k_local:
            raise ParameterError(
                f"profile sums to {self.profile.total}, expected k_local="
                f"{self.k_local}"
            )
        if self.k_local < 1:
            raise ParameterError("local dimension must be positive")

    @classmethod
    def for_local_code(cls, local, n: int) -> "BoundContext":
        """Context for a length-n assembly of copies of ``local``."""
        prof = local.profile()
        return cls(n=n, n_local=len(prof), k_local=prof.total, profile=prof)

    @property
    def groups(self) -> int:
        return self.n // self.n_local

    @property
    def extra(self) -> int:
        return self.n % self.n_local

    # -- the two basic sequence operations -------------------------------------

    def partial_sum(self, s: int) -> int:
        """P(s): sum of the first s entries of the periodic profile."""
        if s < 1:
            raise ParameterError(f"partial sums are defined for s >= 1, got {s}")
        full, rem = divmod(s, self.n_local)
        return full * self.k_local + self.profile.prefix(rem)

    def p_inv(self, v: int) -> int:
        """Smallest s with P(s) >= v."""
        if v < 1:
            raise ParameterError(f"p_inv is defined for v >= 1, got {v}")
        full = (v - 1) // self.k_local
        v0 = v - full * self.k_local          # 1 <= v0 <= k_local
        acc = 0
        for s, a in enumerate(self.profile, start=1):
            acc += a
            if acc >= v0:
                return full * self.n_local + s
        raise AssertionError("profile sums to k_local; unreachable")

    # -- accumulated capacity including the extra columns -----------------------

    def _capacity(self) -> int:
        return self.groups * self.k_local + self.extra * self.profile.values[0]

    def _min_rank(self, s: int) -> int:
        """Smallest rank any s thick columns of the assembly can have.

        Within the ``groups`` full periods this is the periodic P(s); each
        column beyond them contributes a_1 of fresh rank (those columns hold
        untouched pre-code symbols, so they never overlap a local group).
        """
        local_cols = self.groups * self.n_local
        if s <= local_cols:
            return self.partial_sum(s)
        if s > self.n:
            raise ParameterError(f"column count {s} exceeds n={self.n}")
        return self.groups * self.k_local + (s - local_cols) * self.profile.values[0]

    def _min_columns_for(self, v: int) -> int:
        """Inverse of :meth:`_min_rank`: columns guaranteeing rank >= v."""
        base = self.groups * self.k_local
        if v <= base:
            return self.p_inv(v)
        a1 = self.profile.values[0]
        if a1 == 0 or v > self._capacity():
            raise ParameterError(f"rank target {v} exceeds capacity {self._capacity()}")
        deficit = v - base
        return self.groups * self.n_local + -(-deficit // a1)

    # -- the bounds --------------------------------------------------------------

    def optimal_dmin(self, file_dim: int) -> int:
        """Largest minimum distance for the given file size: n - P_inv(K) + 1."""
        if not 1 <= file_dim <= self._capacity():
            raise ParameterError(
                f"file size must satisfy 1 <= K <= {self._capacity()}, got {file_dim}"
            )
        return self.n - self._min_columns_for(file_dim) + 1

    def max_file_size(self, dmin: int) -> int:
        """Largest file size supporting the given minimum distance: P(n-d+1).

        For all-symbol layouts (extra = 0) this is exactly the periodic
        decomposition (ceil((n-d+1)/n_L) - 1) * k_local + P(l0).
        """
        if not 1 <= dmin <= self.n:
            raise ParameterError(
                f"distance must satisfy 1 <= dmin <= n={self.n}, got {dmin}"
            )
        return self._min_rank(self.n - dmin + 1)

    def p_inv_closed_form(self, v: int) -> int:
        """Direct-form P_inv for regenerating-code profiles.

        Valid only when the profile has the arithmetic-progression shape
        (alpha, alpha-beta, ..., alpha-(r-1)beta, 0, ...).  Writes
        v = v1*k_local + v0 with 1 <= v0 <= k_local and locates the unique nu
        with alpha(nu-1) - C(nu-1,2)beta < v0 <= alpha*nu - C(nu,2)beta.
        This must agree with :meth:`p_inv` everywhere; the toolkit's
        verification mode asserts exactly that.
        """
        if v < 1:
            raise ParameterError(f"p_inv is defined for v >= 1, got {v}")
        alpha, r, beta = self._regenerating_shape()
        v1 = (v - 1) // self.k_local
        v0 = v - v1 * self.k_local
        for nu in range(1, r + 1):
            low = alpha * (nu - 1) - comb(nu - 1, 2) * beta
            high = alpha * nu - comb(nu, 2) * beta
            if low < v0 <= high:
                return v1 * self.n_local + nu
        raise AssertionError("v0 <= k_local always lands in a bracket")

    def _regenerating_shape(self) -> tuple[int, int, int]:
        values = self.profile.values
        r = sum(1 for a in values if a > 0)
        if r == 0 or any(a > 0 for a in values[r:]):
            raise ParameterError("profile is not of regenerating shape")
        alpha = values[0]
        # At the minimum-bandwidth point beta = alpha/d >= 1, so the nonzero
        # part strictly decreases.
        beta = values[0] - values[1] if r >= 2 else 1
        if beta < 1:
            raise ParameterError("profile is not of regenerating shape")
        expected = tuple(
            alpha - j * beta if j < r else 0 for j in range(len(values))
        )
        if expected != values:
            raise ParameterError("profile is not of regenerating shape")
        return alpha, r, beta
