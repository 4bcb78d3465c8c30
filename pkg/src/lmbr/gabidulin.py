"""Rank-metric (Gabidulin) codes: the outer pre-code of every construction.

A codeword is the evaluation vector of a linearized polynomial at ``length``
fixed points that are independent over the base field; here the points are
the power basis 1, x, ..., x^{length-1}, whose independence is immediate
from the coefficient encoding.  The code is maximum rank distance: rank
distance equals length - dim + 1.

The erasure decoder accepts (point, value) pairs where the points are any
F_q-combinations of the evaluation points, not just the points themselves.
That generality is essential: the composed storage codes hand the decoder
symbols whose effective evaluation points have been mixed by the local
encoders' generator matrices.
"""

from __future__ import annotations

from typing import Sequence

from .errors import ParameterError
from .galois import ExtField, FieldElement
from .linpoly import LinearizedPoly, interpolate


class GabidulinCode:
    """[length, dim] evaluation code of linearized polynomials over F_{q^m}."""

    def __init__(self, field: ExtField, length: int, dim: int):
        if length > field.m:
            raise ParameterError(
                f"code length must satisfy N <= m: N={length}, m={field.m}"
            )
        if not 1 <= dim <= length:
            raise ParameterError(
                f"dimension must satisfy 1 <= K <= N: K={dim}, N={length}"
            )
        self.field = field
        self.length = length
        self.dim = dim
        self.points: tuple[FieldElement, ...] = field.polynomial_basis(length)

    @property
    def rank_distance(self) -> int:
        return self.length - self.dim + 1

    def encode(self, message: Sequence[FieldElement]) -> tuple[FieldElement, ...]:
        """Evaluate the message polynomial at all code points."""
        message = list(message)
        if len(message) != self.dim:
            raise ParameterError(
                f"message length {len(message)} != code dimension {self.dim}"
            )
        poly = LinearizedPoly(self.field, message)
        return tuple(poly.evaluate(p) for p in self.points)

    def decode_erasures(
        self, known: Sequence[tuple[FieldElement, FieldElement]]
    ) -> tuple[FieldElement, ...]:
        """Recover the message from (point, value) pairs.

        The points may be arbitrary F_q-combinations of the code points and
        must jointly have rank >= dim over the base field.  Surplus pairs are
        consistency-checked, so corruption raises rather than mis-decoding.
        """
        points = [p for p, _ in known]
        values = [v for _, v in known]
        poly = interpolate(points, values, self.dim - 1)
        return poly.coeff_vector(self.dim)

    def __repr__(self):
        return (
            f"GabidulinCode(N={self.length}, K={self.dim}, "
            f"D={self.rank_distance}, over GF({self.field.q}^{self.field.m}))"
        )
