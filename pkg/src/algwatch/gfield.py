"""GF(2^n) arithmetic for payload symbols and coding coefficients.

Field elements are plain ints in [0, 2^n). Bit i of the int is the
coefficient of x^i in the polynomial basis, so addition is XOR and
multiplication is carry-less polynomial multiplication reduced modulo a
fixed irreducible polynomial of degree n. Widths are capped at 16 because
the watchdog trellis enumerates up to 2^n states.
"""

from __future__ import annotations

import functools

import numpy as np

MAX_WIDTH = 16

# One primitive polynomial per supported width, bit i = coefficient of x^i.
# Any irreducible choice is valid; fixing a table keeps runs reproducible.
REDUCTION_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b1_0011,              # x^4 + x + 1
    5: 0b10_0101,
    6: 0b100_0011,
    7: 0b1000_1001,
    8: 0b1_0001_1101,         # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b10_0001_0001,
    10: 0b100_0000_1001,      # x^10 + x^3 + 1
    11: 0b1000_0000_0101,
    12: 0b1_0000_0101_0011,
    13: 0b10_0000_0001_1011,
    14: 0b100_0100_0100_0011,
    15: 0b1000_0000_0000_0011,
    16: 0b1_0001_0000_0000_1011,  # x^16 + x^12 + x^3 + x + 1
}


def _poly_mod(a: int, b: int) -> int:
    """Remainder of carry-less division of a by b over GF(2)."""
    db = b.bit_length() - 1
    while a.bit_length() - 1 >= db and a:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def _is_irreducible(poly: int, n: int) -> bool:
    """Trial division by every polynomial of degree 1..n//2."""
    for d in range(1, n // 2 + 1):
        for q in range(1 << d, 1 << (d + 1)):
            if _poly_mod(poly, q) == 0:
                return False
    return True


class GF2n:
    """Arithmetic over GF(2^n), n <= 16.

    Parameters
    ----------
    n : bit width of the field elements.
    poly : optional reduction polynomial as an int (bit i = coefficient of
        x^i, bit n set). Defaults to the table entry for n. Must be
        irreducible over GF(2); checked by trial division at construction.

    Instances are immutable after construction and all operations are pure,
    so a single instance can be shared freely across threads or processes.
    """

    def __init__(self, n: int, poly: int | None = None):
        if not 1 <= n <= MAX_WIDTH:
            raise ValueError(f"field width must be in [1, {MAX_WIDTH}], got {n}")
        if poly is None:
            poly = REDUCTION_POLYS[n]
        if poly >> n != 1:
            raise ValueError(
                f"reduction polynomial 0b{poly:b} does not have degree exactly {n}"
            )
        if not _is_irreducible(poly, n):
            raise ValueError(f"reduction polynomial 0b{poly:b} is reducible over GF(2)")
        self.n = n
        self.order = 1 << n
        self.poly = poly
        self._build_tables()

    def _build_tables(self) -> None:
        """Log/antilog tables when x generates the multiplicative group.

        All table polynomials are primitive so this normally succeeds; for a
        custom irreducible-but-not-primitive polynomial we fall back to
        direct shift-and-reduce multiplication.
        """
        size = self.order - 1
        exp = [0] * (2 * size)
        log = [0] * self.order
        v = 1
        ok = True
        for i in range(size):
            if i > 0 and v == 1:
                ok = False  # x cycled early: not primitive
                break
            exp[i] = v
            exp[i + size] = v
            log[v] = i
            v = self._clmul_reduce(v, 2)
        if ok and v == 1:
            self._exp = exp
            self._log = log
            self._exp_np = np.array(exp, dtype=np.int64)
            self._log_np = np.array(log, dtype=np.int64)
        else:
            self._exp = None
            self._log = None
            self._exp_np = None
            self._log_np = None

    def _clmul_reduce(self, a: int, b: int) -> int:
        prod = 0
        for i in range(self.n):
            if (b >> i) & 1:
                prod ^= a << i
        for bit in range(2 * self.n - 2, self.n - 1, -1):
            if (prod >> bit) & 1:
                prod ^= self.poly << (bit - self.n)
        return prod

    def _check(self, v: int) -> None:
        if not 0 <= v < self.order:
            raise ValueError(f"{v} is not a GF(2^{self.n}) element")

    def add(self, a: int, b: int) -> int:
        """a + b, i.e. bitwise XOR. Every element is its own negative."""
        self._check(a)
        self._check(b)
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        """Carry-less product reduced modulo the reduction polynomial."""
        self._check(a)
        self._check(b)
        if a == 0 or b == 0:
            return 0
        if self._exp is not None:
            return self._exp[self._log[a] + self._log[b]]
        return self._clmul_reduce(a, b)

    def mul_vec(self, a: int, xs: np.ndarray) -> np.ndarray:
        """Product of the scalar a with every element of xs."""
        self._check(a)
        if a == 0:
            return np.zeros(len(xs), dtype=np.int64)
        out = np.zeros(len(xs), dtype=np.int64)
        nz = xs != 0
        if self._exp_np is not None:
            out[nz] = self._exp_np[self._log[a] + self._log_np[xs[nz]]]
        else:
            out[nz] = [self._clmul_reduce(a, int(x)) for x in xs[nz]]
        return out

    def mul_elementwise(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Elementwise field product of two equal-length arrays."""
        out = np.zeros(len(us), dtype=np.int64)
        nz = (us != 0) & (vs != 0)
        if self._exp_np is not None:
            idx = self._log_np[us[nz]] + self._log_np[vs[nz]]
            out[nz] = self._exp_np[idx]
        else:
            out[nz] = [self._clmul_reduce(int(u), int(v)) for u, v in zip(us[nz], vs[nz])]
        return out

    def lincomb(self, coeffs, symbols) -> int:
        """Sum of coeff*symbol over paired lists."""
        coeffs = list(coeffs)
        symbols = list(symbols)
        if not coeffs or len(coeffs) != len(symbols):
            raise ValueError("coeffs and symbols must be equal-length, nonempty")
        acc = 0
        for c, x in zip(coeffs, symbols):
            acc ^= self.mul(c, x)
        return acc

    def __repr__(self) -> str:
        return f"GF2n(n={self.n}, poly=0b{self.poly:b})"


@functools.lru_cache(maxsize=MAX_WIDTH)
def default_field(n: int) -> GF2n:
    """Shared GF(2^n) instance with the table polynomial for width n."""
    return GF2n(n)
