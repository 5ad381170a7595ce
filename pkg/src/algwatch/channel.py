"""Binary symmetric channel model for overhearing links.

Also holds the Hamming ball combinatorics the detection analysis is built
on: exact ball volumes, tail-probability radii, and the composition rule
for cascaded bit-flip processes.

Channel likelihoods are computed in log domain because products over
several overheard links underflow doubles as p -> 0; ``likelihood`` is the
exponentiation accessor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_POP16 = None


def _popcount_table() -> np.ndarray:
    global _POP16
    if _POP16 is None:
        _POP16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)
    return _POP16


def hamming(a: int, b: int) -> int:
    return (a ^ b).bit_count()


def hamming_vec(x: int, ys: np.ndarray) -> np.ndarray:
    return _popcount_table()[np.bitwise_xor(ys, x)].astype(np.int64)


@dataclass(frozen=True)
class Bsc:
    """Binary symmetric channel flipping each bit independently with prob p.

    Raw overhearing channels are no worse than a coin flip, so p is
    restricted to [0, 0.5]; adversarially composed rates above 0.5 only
    arise through compose_error_rates, which works on plain floats.
    """

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"BSC crossover must be in [0, 0.5], got {self.p}")


def flip_bits(x: int, p: float, n: int, rng) -> int:
    """x with each of its n bits independently flipped with probability p.

    Unlike Bsc, p may be anywhere in [0, 1]: this is also the adversary's
    injection primitive.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"flip probability must be in [0, 1], got {p}")
    mask = 0
    for i in np.flatnonzero(rng.random(n) < p):
        mask |= 1 << int(i)
    return x ^ mask


def transmit(ch: Bsc, x: int, n: int, rng) -> int:
    """One use of the channel on an n-bit symbol."""
    return flip_bits(x, ch.p, n, rng)


def log_likelihood(ch: Bsc, observed: int, candidate: int, n: int) -> float:
    """log P(observed | candidate sent) = d*log(p) + (n-d)*log(1-p).

    p = 0 degenerates to an exact-match indicator (log 0 = -inf).
    """
    d = hamming(observed, candidate)
    if ch.p == 0.0:
        return 0.0 if d == 0 else -math.inf
    return d * math.log(ch.p) + (n - d) * math.log1p(-ch.p)


def log_likelihood_vec(ch: Bsc, observed: int, candidates: np.ndarray, n: int) -> np.ndarray:
    d = hamming_vec(observed, candidates)
    if ch.p == 0.0:
        return np.where(d == 0, 0.0, -np.inf)
    return d * math.log(ch.p) + (n - d) * math.log1p(-ch.p)


def likelihood(ch: Bsc, observed: int, candidate: int, n: int) -> float:
    """P(observed | candidate sent); exponentiation of log_likelihood."""
    return math.exp(log_likelihood(ch, observed, candidate, n))


def ball_volume(n: int, r: int) -> int:
    """Number of n-bit words within Hamming distance r of a center.

    Exact integer arithmetic; no floating point.
    """
    if not 0 <= r <= n:
        raise ValueError(f"radius must be in [0, {n}], got {r}")
    return sum(math.comb(n, k) for k in range(r + 1))


def ball_radius(ch: Bsc, n: int, eps: float) -> int:
    """Smallest r with P(Binomial(n, p) <= r) >= 1 - eps.

    The overheard symbol lies within this radius of the transmitted one
    with probability at least 1 - eps; r = n always qualifies.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    cum = 0.0
    for r in range(n + 1):
        cum += math.comb(n, r) * ch.p**r * (1.0 - ch.p) ** (n - r)
        if cum >= 1.0 - eps:
            return r
    return n


def compose_error_rates(p_adv: float, p_ch: float) -> float:
    """Flip rate of two cascaded independent bit-flip processes.

    This is the effective error rate a watchdog sees when overhearing a
    relay that injects errors at p_adv through a channel flipping at p_ch.
    """
    for v in (p_adv, p_ch):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"rates must be in [0, 1], got {v}")
    return p_adv + p_ch - p_adv * p_ch
