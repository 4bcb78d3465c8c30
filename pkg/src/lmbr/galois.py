"""Exact arithmetic in prime fields F_q and their extensions F_{q^m}.

An element of F_{q^m} is a vector of m residues mod q: the coefficients of a
polynomial in the power basis 1, x, ..., x^{m-1}, constant term first, taken
modulo a fixed monic irreducible polynomial of degree m.  The modulus is
found by a deterministic search (non-leading coefficients read as a base-q
integer, ascending), so element encodings are reproducible across runs and
machines.  Irreducibility is established by trial division, which is exact
and cheap at the field sizes this toolkit targets.

The q-power (Frobenius) map a -> a^q is F_q-linear; it is applied through
cached m x m matrices over F_q instead of repeated exponentiation, because
evaluation of linearized polynomials dominates the decoder's runtime.

Fields are interned: :func:`field` returns one shared, immutable instance
per (q, m), so elements of equal fields always compare against the same
modulus.  All operations are pure and safe for concurrent use.
"""

from __future__ import annotations

import functools
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ParameterError

#: Fields larger than this are rejected outright rather than degraded.
SIZE_BUDGET = 2 ** 40


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality test (small moduli only)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# ---------------------------------------------------------------------------
# Dense polynomial helpers over F_q.  Coefficient lists, constant term first.
# ---------------------------------------------------------------------------

def _poly_trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a: Sequence[int], b: Sequence[int], q: int
                 ) -> tuple[list[int], list[int]]:
    """Quotient and remainder of a by b in F_q[x]."""
    rem = _poly_trim([c % q for c in a])
    b = _poly_trim([c % q for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], q - 2, q)
    quot = [0] * max(0, len(rem) - len(b) + 1)
    while len(rem) >= len(b):
        if rem[-1] == 0:
            rem.pop()
            continue
        shift = len(rem) - len(b)
        factor = (rem[-1] * inv_lead) % q
        quot[shift] = factor
        for i, bc in enumerate(b):
            rem[shift + i] = (rem[shift + i] - factor * bc) % q
        rem.pop()  # leading coefficient is now zero by construction
    return _poly_trim(quot), _poly_trim(rem)


def _poly_rem(a: Sequence[int], b: Sequence[int], q: int) -> list[int]:
    return _poly_divmod(a, b, q)[1]


def _monic_polys(q: int, degree: int) -> Iterator[list[int]]:
    for value in range(q ** degree):
        coeffs = []
        v = value
        for _ in range(degree):
            coeffs.append(v % q)
            v //= q
        coeffs.append(1)
        yield coeffs


def _is_irreducible(p: Sequence[int], q: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg(p)//2."""
    degree = len(p) - 1
    if degree == 1:
        return True
    for d in range(1, degree // 2 + 1):
        for divisor in _monic_polys(q, d):
            if not _poly_rem(list(p), divisor, q):
                return False
    return True


def _search_modulus(q: int, m: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree m, by base-q coefficient value."""
    for candidate in _monic_polys(q, m):
        if _is_irreducible(candidate, q):
            return tuple(candidate)
    raise AssertionError("no irreducible polynomial found; unreachable")


# ---------------------------------------------------------------------------
# Field and element types.
# ---------------------------------------------------------------------------

class FieldElement:
    """Immutable element of an :class:`ExtField`.

    Supports +, -, *, /, unary -, ** with integer exponents, and
    multiplication by plain ints (scalar action of the prime subfield,
    i.e. ``n * a == (n mod q) . a``).
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, field: "ExtField", coeffs: tuple[int, ...]):
        self.field = field
        self.coeffs = coeffs

    def __add__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        self.field._require_same(other.field)
        q = self.field.q
        return FieldElement(
            self.field,
            tuple((a + b) % q for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __sub__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        self.field._require_same(other.field)
        q = self.field.q
        return FieldElement(
            self.field,
            tuple((a - b) % q for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __neg__(self):
        q = self.field.q
        return FieldElement(self.field, tuple((-a) % q for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, FieldElement):
            self.field._require_same(other.field)
            return FieldElement(
                self.field, self.field._mul(self.coeffs, other.coeffs)
            )
        if isinstance(other, int):
            c = other % self.field.q
            return FieldElement(
                self.field, tuple((c * a) % self.field.q for a in self.coeffs)
            )
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        base = self
        if exponent < 0:
            base = self.inverse()
            exponent = -exponent
        result = self.field.one()
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field._inv(self.coeffs))

    def frobenius(self, i: int = 1) -> "FieldElement":
        """The q^i-power of this element, via the cached linear map."""
        return FieldElement(self.field, self.field._frobenius(self.coeffs, i))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_int(self) -> int:
        """Base-q packing of the coefficient vector (little-endian)."""
        v = 0
        for c in reversed(self.coeffs):
            v = v * self.field.q + c
        return v

    def to_bytes(self) -> bytes:
        """m coefficients, constant term first, each as uint16 LE."""
        return b"".join(c.to_bytes(2, "little") for c in self.coeffs)

    def __eq__(self, other):
        return (
            isinstance(other, FieldElement)
            and self.field is other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((id(self.field), self.coeffs))

    def __repr__(self):
        return f"FieldElement({self.coeffs} over GF({self.field.q}^{self.field.m}))"


class ExtField:
    """The finite field F_{q^m} for prime q, with Frobenius structure.

    Do not construct directly in normal use; :func:`field` interns one
    instance per (q, m) so that elements share their field object.
    """

    def __init__(self, q: int, m: int):
        if not is_prime(q):
            raise ParameterError(f"q must be prime, got q={q}")
        if m < 1:
            raise ParameterError(f"extension degree must satisfy m >= 1, got m={m}")
        if q ** m > SIZE_BUDGET:
            raise ParameterError(
                f"field size q^m = {q}^{m} exceeds the budget 2^40; refusing"
            )
        self.q = q
        self.m = m
        self.order = q ** m
        self.modulus: tuple[int, ...] = _search_modulus(q, m)
        # x^(m+i) mod modulus for i in 0..m-2, used to fold products back.
        self._reduction: list[tuple[int, ...]] = []
        power = list(self.modulus[:-1])  # x^m = -(low part), monic modulus
        power = [(-c) % q for c in power]
        self._reduction.append(tuple(power))
        for _ in range(m - 2):
            power = self._shift_mod(power)
            self._reduction.append(tuple(power))
        self._frob_matrices: dict[int, tuple[tuple[int, ...], ...]] = {
            0: tuple(
                tuple(1 if i == j else 0 for j in range(m)) for i in range(m)
            )
        }
        self._frob_matrices[1] = self._build_frobenius_matrix()

    # -- construction helpers -----------------------------------------------

    def _shift_mod(self, p: list[int]) -> list[int]:
        """Multiply a reduced polynomial by x, reducing mod the modulus."""
        q, m = self.q, self.m
        carry = p[-1]
        shifted = [0] + p[:-1]
        if carry:
            head = self._reduction[0]
            shifted = [(a + carry * b) % q for a, b in zip(shifted, head)]
        return [c % q for c in shifted]

    def _build_frobenius_matrix(self) -> tuple[tuple[int, ...], ...]:
        # Column j is the coefficient vector of (x^j)^q.
        m = self.m
        basis_image = []
        xq = self._pow_coeffs(self._gen_coeffs(), self.q)
        col = self._one_coeffs()
        for _ in range(m):
            basis_image.append(col)
            col = self._mul(col, xq)
        # Store row-major for fast mat-vec.
        return tuple(
            tuple(basis_image[j][i] for j in range(m)) for i in range(m)
        )

    def _gen_coeffs(self) -> tuple[int, ...]:
        if self.m == 1:
            # x reduces to the modulus root; irrelevant for m = 1 fields.
            return (0,)
        return tuple(1 if i == 1 else 0 for i in range(self.m))

    def _one_coeffs(self) -> tuple[int, ...]:
        return tuple(1 if i == 0 else 0 for i in range(self.m))

    # -- coefficient-level arithmetic ----------------------------------------

    def _require_same(self, other: "ExtField") -> None:
        if self is not other:
            raise ParameterError(
                f"field mismatch: GF({self.q}^{self.m}) vs GF({other.q}^{other.m})"
            )

    def _mul(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        q, m = self.q, self.m
        if m == 1:
            return ((a[0] * b[0]) % q,)
        prod = [0] * (2 * m - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        for k in range(2 * m - 2, m - 1, -1):
            c = prod[k] % q
            if c:
                row = self._reduction[k - m]
                for j in range(m):
                    prod[j] += c * row[j]
        return tuple(v % q for v in prod[:m])

    def _inv(self, a: tuple[int, ...]) -> tuple[int, ...]:
        if not any(a):
            raise ZeroDivisionError("inversion of zero field element")
        q = self.q
        # Extended Euclid in F_q[x] against the modulus.
        r0, r1 = list(self.modulus), _poly_trim(list(a))
        s0, s1 = [], [1]
        while r1:
            quotient, rem = _poly_divmod(r0, r1, q)
            r0, r1 = r1, rem
            s0, s1 = s1, self._poly_sub(s0, self._poly_mul_small(quotient, s1))
        # r0 is the gcd, a nonzero constant because the modulus is irreducible.
        scale = pow(r0[0], q - 2, q)
        out = [(scale * c) % q for c in s0]
        out += [0] * (self.m - len(out))
        return tuple(out[: self.m])

    def _poly_sub(self, a: list[int], b: list[int]) -> list[int]:
        q = self.q
        n = max(len(a), len(b))
        a = a + [0] * (n - len(a))
        b = b + [0] * (n - len(b))
        return _poly_trim([(x - y) % q for x, y in zip(a, b)])

    def _poly_mul_small(self, a: list[int], b: list[int]) -> list[int]:
        if not a or not b:
            return []
        q = self.q
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] = (out[i + j] + ai * bj) % q
        return _poly_trim(out)

    def _pow_coeffs(self, a: tuple[int, ...], e: int) -> tuple[int, ...]:
        result = self._one_coeffs()
        base = tuple(a)
        while e:
            if e & 1:
                result = self._mul(result, base)
            base = self._mul(base, base)
            e >>= 1
        return result

    def _frobenius(self, coeffs: tuple[int, ...], i: int) -> tuple[int, ...]:
        i %= self.m
        matrix = self._frob_matrices.get(i)
        if matrix is None:
            # Compose from the power-1 matrix; idempotent, so benign if two
            # threads race on the cache.
            matrix = self._frob_matrices[1]
            for _ in range(i - 1):
                matrix = self._mat_mul(matrix, self._frob_matrices[1])
            self._frob_matrices[i] = matrix
        q = self.q
        return tuple(
            sum(r * c for r, c in zip(row, coeffs)) % q for row in matrix
        )

    def _mat_mul(self, a, b):
        q, m = self.q, self.m
        return tuple(
            tuple(
                sum(a[i][k] * b[k][j] for k in range(m)) % q for j in range(m)
            )
            for i in range(m)
        )

    # -- public API -----------------------------------------------------------

    def element(self, coeffs: Iterable[int]) -> FieldElement:
        c = tuple(int(v) % self.q for v in coeffs)
        if len(c) != self.m:
            raise ParameterError(
                f"element needs exactly m={self.m} coefficients, got {len(c)}"
            )
        return FieldElement(self, c)

    def zero(self) -> FieldElement:
        return FieldElement(self, tuple(0 for _ in range(self.m)))

    def one(self) -> FieldElement:
        return FieldElement(self, self._one_coeffs())

    def gen(self) -> FieldElement:
        """The power-basis generator x (only meaningful for m >= 2)."""
        return FieldElement(self, self._gen_coeffs())

    def from_int(self, value: int) -> FieldElement:
        """Inverse of :meth:`FieldElement.to_int` (base-q digit unpacking)."""
        if not 0 <= value < self.order:
            raise ParameterError(f"value {value} outside [0, {self.order})")
        digits = []
        for _ in range(self.m):
            digits.append(value % self.q)
            value //= self.q
        return FieldElement(self, tuple(digits))

    def from_bytes(self, data: bytes) -> FieldElement:
        if len(data) != 2 * self.m:
            raise ParameterError(
                f"element encoding needs {2 * self.m} bytes, got {len(data)}"
            )
        coeffs = tuple(
            int.from_bytes(data[2 * i: 2 * i + 2], "little") for i in range(self.m)
        )
        if any(c >= self.q for c in coeffs):
            raise ParameterError("coefficient out of range for the field")
        return FieldElement(self, coeffs)

    def elements(self) -> Iterator[FieldElement]:
        """All q^m elements, in base-q counting order."""
        for v in range(self.order):
            yield self.from_int(v)

    def random_element(self, rng) -> FieldElement:
        return self.from_int(rng.randrange(self.order))

    def polynomial_basis(self, n: int) -> tuple[FieldElement, ...]:
        """The first n power-basis elements 1, x, ..., x^{n-1}.

        These are linearly independent over F_q by construction; n may not
        exceed m.
        """
        if n > self.m:
            raise ParameterError(f"basis request n={n} exceeds m={self.m}")
        return tuple(
            FieldElement(self, tuple(1 if i == j else 0 for i in range(self.m)))
            for j in range(n)
        )

    def __repr__(self):
        return f"ExtField(q={self.q}, m={self.m}, modulus={self.modulus})"


@functools.lru_cache(maxsize=None)
def field(q: int, m: int) -> ExtField:
    """Return the interned F_{q^m} with the deterministic smallest modulus."""
    return ExtField(q, m)


# ---------------------------------------------------------------------------
# Linear algebra over F_q (numpy-backed; exact integer arithmetic mod q).
# ---------------------------------------------------------------------------

def coeff_columns(elements: Sequence[FieldElement]) -> np.ndarray:
    """m x N matrix whose columns are the coefficient vectors of elements."""
    if not elements:
        return np.zeros((0, 0), dtype=np.int64)
    m = elements[0].field.m
    out = np.empty((m, len(elements)), dtype=np.int64)
    for j, e in enumerate(elements):
        elements[0].field._require_same(e.field)
        out[:, j] = e.coeffs
    return out


def rank_mod_q(matrix: np.ndarray, q: int) -> int:
    """Rank of an integer matrix over F_q, by Gaussian elimination."""
    a = np.array(matrix, dtype=np.int64) % q
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        pivot_rows = np.nonzero(a[rank:, c])[0]
        if pivot_rows.size == 0:
            continue
        p = rank + int(pivot_rows[0])
        if p != rank:
            a[[rank, p]] = a[[p, rank]]
        inv = pow(int(a[rank, c]), q - 2, q)
        a[rank] = (a[rank] * inv) % q
        below = a[rank + 1:, c]
        if below.any():
            a[rank + 1:] = (a[rank + 1:] - np.outer(below, a[rank])) % q
        rank += 1
    return rank


def inv_mod_q(matrix: np.ndarray, q: int) -> np.ndarray:
    """Inverse of a square integer matrix over F_q (Gauss-Jordan)."""
    a = np.array(matrix, dtype=np.int64) % q
    n = a.shape[0]
    if a.shape != (n, n):
        raise ParameterError("matrix must be square")
    aug = np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1)
    for c in range(n):
        pivot_rows = np.nonzero(aug[c:, c])[0]
        if pivot_rows.size == 0:
            raise ParameterError("matrix is singular over F_q")
        p = c + int(pivot_rows[0])
        if p != c:
            aug[[c, p]] = aug[[p, c]]
        inv = pow(int(aug[c, c]), q - 2, q)
        aug[c] = (aug[c] * inv) % q
        others = [r for r in range(n) if r != c and aug[r, c]]
        for r in others:
            aug[r] = (aug[r] - aug[r, c] * aug[c]) % q
    return aug[:, n:]


def rank_over_base(elements: Sequence[FieldElement]) -> int:
    """Rank over F_q of a set of F_{q^m} elements, seen as F_q^m vectors.

    An empty input has rank 0.
    """
    elements = list(elements)
    if not elements:
        return 0
    return rank_mod_q(coeff_columns(elements), elements[0].field.q)


def apply_int_matrix(
    matrix: np.ndarray, elements: Sequence[FieldElement], out_field: ExtField
) -> list[FieldElement]:
    """Apply an F_q integer matrix to a vector of extension-field elements.

    The matrix acts F_q-linearly, entry-by-entry, which is exactly the sense
    in which the local codes of this toolkit act on pre-coded symbols.
    """
    rows, cols = matrix.shape
    if cols != len(elements):
        raise ParameterError(f"matrix width {cols} != vector length {len(elements)}")
    out = []
    for r in range(rows):
        acc = out_field.zero()
        row = matrix[r]
        for c, elem in enumerate(elements):
            scalar = int(row[c])
            if scalar:
                acc = acc + scalar * elem
        out.append(acc)
    return out
