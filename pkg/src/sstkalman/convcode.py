"""Rate-1/2 binary convolutional codes, including the quick-look-in family.

A code is a generator pair (g1, g2), a polynomial right inverse with
G * Ginv = [1] exactly (no decoding delay), and a parity-check pair h
orthogonal to G.  Quick-look-in (QLI) codes satisfy g1 + g2 = D^L, so
the information sequence is recovered from hard decisions by adding the
two received streams.

Encoded streams are numpy bit arrays; polynomials only describe codes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .gf2 import BinaryPoly, BinaryPolyMatrix, polymat_mul, verify_right_inverse


@dataclass(frozen=True)
class ConvCode:
    """Rate-1/2 feedforward convolutional code (k0 = 1, n0 = 2)."""

    name: str
    g: tuple
    ginv: tuple
    h: tuple

    n0 = 2
    k0 = 1

    def __post_init__(self):
        g = tuple(BinaryPoly(p) for p in self.g)
        ginv = tuple(BinaryPoly(p) for p in self.ginv)
        h = tuple(BinaryPoly(p) for p in self.h)
        if len(g) != 2 or len(ginv) != 2 or len(h) != 2:
            raise ValueError("g, ginv and h must each hold two polynomials")
        if any(p.is_zero for p in g):
            raise ValueError("generator polynomials must be nonzero")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "ginv", ginv)
        object.__setattr__(self, "h", h)
        if not verify_right_inverse(g, ginv):
            raise ValueError("ginv is not a right inverse of g")
        if (g[0] * h[0] + g[1] * h[1]).mask != 0:
            raise ValueError("h is not orthogonal to g")
        if h[0].is_zero and h[1].is_zero:
            raise ValueError("h must be nonzero")

    @property
    def nu(self):
        """Constraint length (memory): the largest generator degree."""
        return max(self.g[0].degree, self.g[1].degree)

    @property
    def rate(self):
        return self.k0 / self.n0

    @property
    def generator_matrix(self):
        return BinaryPolyMatrix([self.g])

    @property
    def inverse_matrix(self):
        return BinaryPolyMatrix([[self.ginv[0]], [self.ginv[1]]])


@dataclass(frozen=True)
class QliCode:
    """A quick-look-in code: base code plus the look-in delay L (g1 + g2 = D^L).

    gprime records the family parameter when the generators have the form
    g1 = 1 + D*g', g2 = 1 + D + D*g'; it is None for QLI codes given in
    another ordering.
    """

    base: ConvCode
    L: int
    gprime: object

    def __post_init__(self):
        s = self.base.g[0] + self.base.g[1]
        if s.term_count != 1 or s.degree != self.L:
            raise ValueError("base code is not QLI with the stated L")

    @property
    def name(self):
        return self.base.name

    @property
    def g(self):
        return self.base.g

    @property
    def ginv(self):
        return self.base.ginv

    @property
    def h(self):
        return self.base.h

    @property
    def nu(self):
        return self.base.nu

    @property
    def rate(self):
        return self.base.rate


def as_conv(code):
    """The underlying ConvCode of either code type."""
    return code.base if isinstance(code, QliCode) else code


def as_qli(code):
    """View a code as QLI, deriving L; raises when g1 + g2 is not a monomial."""
    if isinstance(code, QliCode):
        return code
    s = code.g[0] + code.g[1]
    if s.is_zero or s.term_count != 1:
        raise ValueError(f"{code.name!r} is not quick-look-in")
    return QliCode(base=code, L=s.degree, gprime=_recover_gprime(code.g))


def _recover_gprime(g):
    # family form: g1 = 1 + D g', g2 = 1 + D + D g', with g'(0) = 0
    g1, g2 = g
    if g1.coeff(0) != 1 or (g1.mask ^ g2.mask) != 2:
        return None
    gp = BinaryPoly((g1.mask ^ 1) >> 1)
    if gp.is_zero or gp.coeff(0) != 0:
        return None
    return gp


def make_qli(gprime, name=None):
    """Build the QLI code with g1 = 1 + D*g', g2 = 1 + D + D*g'.

    gprime must have zero constant term; its degree fixes nu = deg(g') + 1.
    The right inverse is (1 + g', g')^T and the parity check is (g2, g1).
    """
    gprime = BinaryPoly(gprime)
    if gprime.is_zero:
        raise ValueError("gprime must be nonzero")
    if gprime.coeff(0) != 0:
        raise ValueError("gprime must have zero constant term")
    g1 = BinaryPoly(1) + gprime.shifted(1)
    g2 = BinaryPoly(3) + gprime.shifted(1)
    ginv = (BinaryPoly(1) + gprime, gprime)
    if name is None:
        nu = gprime.degree + 1
        name = f"qli-nu{nu}-{gprime.to_string()[1:]}"
    base = ConvCode(name=name, g=(g1, g2), ginv=ginv, h=(g2, g1))
    return QliCode(base=base, L=1, gprime=gprime)


C1 = QliCode(
    base=ConvCode(
        name="c1",
        g=(BinaryPoly.from_string("111"), BinaryPoly.from_string("101")),
        ginv=(BinaryPoly.from_string("01"), BinaryPoly.from_string("11")),
        h=(BinaryPoly.from_string("101"), BinaryPoly.from_string("111")),
    ),
    L=1,
    gprime=None,
)

C2 = make_qli(BinaryPoly.from_string("001011"), name="c2")

_BUILTIN = {"c1": C1, "c2": C2}


def get_code(name):
    try:
        return _BUILTIN[name.lower()]
    except KeyError:
        raise ValueError(f"unknown built-in code {name!r}") from None


def code_to_json(code):
    conv = as_conv(code)
    return {
        "name": conv.name,
        "g": [p.to_string() for p in conv.g],
        "ginv": [p.to_string() for p in conv.ginv],
        "h": [p.to_string() for p in conv.h],
        "qli": isinstance(code, QliCode) or (conv.g[0] + conv.g[1]).term_count == 1,
    }


def code_from_json(obj):
    g = tuple(BinaryPoly.from_string(s) for s in obj["g"])
    ginv = tuple(BinaryPoly.from_string(s) for s in obj["ginv"])
    if "h" in obj:
        h = tuple(BinaryPoly.from_string(s) for s in obj["h"])
    else:
        h = (g[1], g[0])
    code = ConvCode(name=obj.get("name", "custom"), g=g, ginv=ginv, h=h)
    if obj.get("qli", False):
        return as_qli(code)
    return code


def load_code(spec):
    """Resolve a --code argument: a built-in name ("c1", "c2") or a JSON file path."""
    if spec.lower() in _BUILTIN:
        return _BUILTIN[spec.lower()]
    with open(spec) as f:
        return code_from_json(json.load(f))


def _check_bits(bits):
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit sequence must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError("bit sequence entries must be 0 or 1")
    return arr


def _tap_xor(bits, poly, out=None):
    # y[k] = sum_j poly[j] * bits[k - j] over GF(2), truncated to the block
    n = bits.shape[0]
    if out is None:
        out = np.zeros(n, dtype=np.uint8)
    for j in poly.support():
        if j < n:
            out[j:] ^= bits[: n - j]
    return out


def encode(code, info):
    """Encode an information bit sequence; returns an (n, 2) array of code bits."""
    conv = as_conv(code)
    info = _check_bits(info)
    out = np.empty((info.shape[0], 2), dtype=np.uint8)
    for l in (0, 1):
        out[:, l] = _tap_xor(info, conv.g[l])
    return out


def syndrome(code, z_hard):
    """Parity-check stream of a hard-decision block; zero on error-free codewords."""
    conv = as_conv(code)
    z_hard = np.asarray(z_hard, dtype=np.uint8)
    if z_hard.ndim != 2 or z_hard.shape[1] != 2:
        raise ValueError("z_hard must have shape (n, 2)")
    zeta = _tap_xor(z_hard[:, 0], conv.h[0])
    _tap_xor(z_hard[:, 1], conv.h[1], out=zeta)
    return zeta


def main_encoded_block_map(code, mode="general"):
    """Error-to-main-encoded-block map as a 2x2 polynomial matrix.

    In general mode this is Ginv @ G: the main encoder input stream is
    v = e (Ginv G), where e is the hard-decision error pair.  In qli mode
    the pre-decoder adds the two streams, so both error components feed
    through (g1, g2) and the map rows are identical.
    """
    conv = as_conv(code)
    if mode == "general":
        return polymat_mul(conv.inverse_matrix, conv.generator_matrix)
    if mode == "qli":
        as_qli(code)
        return BinaryPolyMatrix([conv.g, conv.g])
    raise ValueError(f"unknown mode {mode!r}")
