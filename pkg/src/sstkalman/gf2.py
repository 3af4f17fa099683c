"""GF(2) polynomial arithmetic in the delay operator D.

A polynomial is stored as a little-endian bit mask: bit j of the mask is
the coefficient of D^j.  The text form reads lowest degree first, so
"111" is 1 + D + D^2 and "01" is D.  Masks keep every product of the
code polynomials handled here inside a couple of machine words; the
degree cap rejects anything that could silently grow past that.
"""

from __future__ import annotations

MAX_DEGREE = 64


class BinaryPoly:
    """Immutable polynomial over GF(2), degree at most MAX_DEGREE."""

    __slots__ = ("mask",)

    def __init__(self, mask=0):
        if isinstance(mask, BinaryPoly):
            mask = mask.mask
        if not isinstance(mask, int):
            raise TypeError("mask must be an int or BinaryPoly")
        if mask < 0:
            raise ValueError("mask must be non-negative")
        if mask.bit_length() > MAX_DEGREE + 1:
            raise ValueError(f"degree exceeds {MAX_DEGREE}")
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError("BinaryPoly is immutable")

    @classmethod
    def from_string(cls, text):
        """Parse a coefficient string, lowest degree first ("111" = 1+D+D^2)."""
        if not text or any(ch not in "01" for ch in text):
            raise ValueError(f"invalid polynomial string: {text!r}")
        mask = 0
        for j, ch in enumerate(text):
            if ch == "1":
                mask |= 1 << j
        return cls(mask)

    def to_string(self):
        """Coefficient string, lowest degree first; the zero polynomial is "0"."""
        if self.mask == 0:
            return "0"
        return "".join("1" if self.mask >> j & 1 else "0" for j in range(self.degree + 1))

    @property
    def is_zero(self):
        return self.mask == 0

    @property
    def degree(self):
        """Degree of the polynomial.  Undefined (raises) for the zero polynomial."""
        if self.mask == 0:
            raise ValueError("degree of the zero polynomial is undefined")
        return self.mask.bit_length() - 1

    @property
    def term_count(self):
        """Number of nonzero terms."""
        return self.mask.bit_count()

    def support(self):
        """Tuple of exponents with nonzero coefficient, ascending."""
        return tuple(j for j in range(self.mask.bit_length()) if self.mask >> j & 1)

    def coeff(self, j):
        if j < 0:
            raise ValueError("negative exponent")
        return self.mask >> j & 1

    def shifted(self, k):
        """Multiply by D^k."""
        if k < 0:
            raise ValueError("negative shift")
        return BinaryPoly(self.mask << k)

    def __add__(self, other):
        return BinaryPoly(self.mask ^ BinaryPoly(other).mask)

    __sub__ = __add__  # characteristic 2

    def __mul__(self, other):
        return poly_mul(self, other)

    def __eq__(self, other):
        if isinstance(other, BinaryPoly):
            return self.mask == other.mask
        if isinstance(other, int):
            return self.mask == other
        return NotImplemented

    def __hash__(self):
        return hash(("BinaryPoly", self.mask))

    def __bool__(self):
        return self.mask != 0

    def __repr__(self):
        return f"BinaryPoly({self.to_string()!r})"


ZERO = BinaryPoly(0)
ONE = BinaryPoly(1)
D = BinaryPoly(2)


def poly_mul(a, b):
    """Carry-free product of two polynomials over GF(2)."""
    a = BinaryPoly(a)
    b = BinaryPoly(b)
    out = 0
    y = b.mask
    shift = 0
    while y:
        if y & 1:
            out ^= a.mask << shift
        y >>= 1
        shift += 1
    return BinaryPoly(out)


class BinaryPolyMatrix:
    """Immutable matrix with BinaryPoly entries."""

    __slots__ = ("rows", "shape")

    def __init__(self, rows):
        entries = tuple(tuple(BinaryPoly(e) for e in row) for row in rows)
        if not entries or not entries[0]:
            raise ValueError("matrix must be non-empty")
        ncols = len(entries[0])
        if any(len(row) != ncols for row in entries):
            raise ValueError("ragged rows")
        object.__setattr__(self, "rows", entries)
        object.__setattr__(self, "shape", (len(entries), ncols))

    def __setattr__(self, name, value):
        raise AttributeError("BinaryPolyMatrix is immutable")

    @classmethod
    def identity(cls, n):
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    def __getitem__(self, key):
        i, j = key
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, BinaryPolyMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __matmul__(self, other):
        return polymat_mul(self, other)

    def transpose(self):
        r, c = self.shape
        return BinaryPolyMatrix([[self.rows[i][j] for i in range(r)] for j in range(c)])

    def to_strings(self):
        return [[e.to_string() for e in row] for row in self.rows]

    def __repr__(self):
        return f"BinaryPolyMatrix({self.to_strings()})"


def polymat_mul(a, b):
    """Matrix product over GF(2)[D]."""
    if not isinstance(a, BinaryPolyMatrix) or not isinstance(b, BinaryPolyMatrix):
        raise TypeError("polymat_mul expects BinaryPolyMatrix operands")
    (ra, ca), (rb, cb) = a.shape, b.shape
    if ca != rb:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    out = []
    for i in range(ra):
        row = []
        for j in range(cb):
            acc = 0
            for k in range(ca):
                acc ^= poly_mul(a[i, k], b[k, j]).mask
            row.append(BinaryPoly(acc))
        out.append(row)
    return BinaryPolyMatrix(out)


def verify_right_inverse(g, ginv):
    """True when g @ ginv is the identity (an exact right inverse, no delay)."""
    g = _as_matrix(g, row=True)
    ginv = _as_matrix(ginv, row=False)
    if g.shape[1] != ginv.shape[0] or g.shape[0] != ginv.shape[1]:
        raise ValueError(f"shape mismatch: {g.shape} versus {ginv.shape}")
    return polymat_mul(g, ginv) == BinaryPolyMatrix.identity(g.shape[0])


def column_term_count(m, col):
    """Total number of terms in one column of a polynomial matrix."""
    if not isinstance(m, BinaryPolyMatrix):
        raise TypeError("expected BinaryPolyMatrix")
    nrows, ncols = m.shape
    if not 0 <= col < ncols:
        raise ValueError(f"column {col} out of range for shape {m.shape}")
    return sum(m[i, col].term_count for i in range(nrows))


def _as_matrix(obj, row):
    if isinstance(obj, BinaryPolyMatrix):
        return obj
    seq = tuple(obj)
    if row:
        return BinaryPolyMatrix([seq])
    return BinaryPolyMatrix([[e] for e in seq])
