"""Packet structure and the local validity checks destinations apply.

A packet carries [coding coefficients, input hashes, own hash, payload].
Headers (coefficients and both hash fields) are assumed sufficiently coded
to traverse links error-free; only the payload is subject to channel noise
and adversarial corruption, so the simulator never perturbs headers.

Byte layout of a serialized packet (trace dumps; stable within one build):

    u8  upstream count    u8 n    u8 delta
    per upstream, ascending node id: u16 id, u16 coeff, u16 input hash
    u16 own hash
    u16 payload

Node ids must be ints below 2^16 for the byte form; the multi-hop
simulator uses JSON traces instead because its node ids are names.
"""

from __future__ import annotations

import functools
import struct
from dataclasses import dataclass, replace

import numpy as np

from .channel import flip_bits, hamming_vec
from .gfield import GF2n
from .hashing import HashSpec, collision_class, hash_eval


@dataclass(frozen=True)
class Codebook:
    """Admissible payload symbols. members=None means all 2^n symbols.

    The default full-space codebook models payloads carrying no
    error-correcting redundancy; an explicit member set is the interface
    hook for coded payloads.
    """

    n: int
    members: frozenset[int] | None = None

    def __post_init__(self):
        if self.members is not None:
            if not self.members:
                raise ValueError("codebook must be nonempty")
            if any(not 0 <= m < (1 << self.n) for m in self.members):
                raise ValueError(f"codebook members must be {self.n}-bit symbols")

    def __iter__(self):
        if self.members is None:
            return iter(range(1 << self.n))
        return iter(sorted(self.members))

    def __contains__(self, x: int) -> bool:
        if self.members is None:
            return 0 <= x < (1 << self.n)
        return x in self.members

    @property
    def size(self) -> int:
        return (1 << self.n) if self.members is None else len(self.members)

    def as_array(self) -> np.ndarray:
        return _codebook_array(self)


@functools.lru_cache(maxsize=64)
def _codebook_array(cb: Codebook) -> np.ndarray:
    if cb.members is None:
        return np.arange(1 << cb.n, dtype=np.int64)
    return np.array(sorted(cb.members), dtype=np.int64)


@dataclass(frozen=True)
class Packet:
    """One transmitted unit: coefficients, input hashes, own hash, payload.

    A packet from a well-behaving node satisfies
    own_hash == h(payload) and payload == sum(coeffs[j] * input[j]).
    """

    coeffs: dict
    input_hashes: dict
    own_hash: int
    payload: int


def make_packet(inputs: dict, coeffs: dict, spec: HashSpec, field: GF2n) -> Packet:
    """Valid packet a well-behaving node builds from its received inputs."""
    if not inputs or set(inputs) != set(coeffs):
        raise ValueError("inputs and coeffs must share a nonempty key set")
    if any(c == 0 for c in coeffs.values()):
        raise ValueError("coding coefficients must be nonzero")
    keys = sorted(inputs)
    payload = field.lincomb([coeffs[k] for k in keys], [inputs[k] for k in keys])
    return Packet(
        coeffs=dict(coeffs),
        input_hashes={k: hash_eval(spec, inputs[k]) for k in keys},
        own_hash=hash_eval(spec, payload),
        payload=payload,
    )


def corrupt_payload(pkt: Packet, p_adv: float, spec: HashSpec, rng) -> Packet:
    """Adversarial injection: i.i.d. payload bit flips at rate p_adv.

    The own hash is recomputed to match the corrupted payload, since a
    stale hash would be caught by the destination's consistency check.
    """
    corrupted = flip_bits(pkt.payload, p_adv, spec.n, rng)
    return replace(pkt, payload=corrupted, own_hash=hash_eval(spec, corrupted))


def destination_check(pkt: Packet, spec: HashSpec) -> bool:
    """True iff the announced own hash matches the payload actually carried."""
    return pkt.own_hash == hash_eval(spec, pkt.payload)


def search_corruption(pkt: Packet, spec: HashSpec, p_overhear: float) -> Packet:
    """Computationally unbounded adversary for small fields (n <= 8).

    Enumerates every alternative payload and picks the one that maximizes
    the expected consistency score of the strongest possible watchdog (one
    that knows the true payload exactly and overhears through a BSC at
    p_overhear). Candidates announcing a different hash than the true
    payload score zero, so the search effectively runs over the true
    payload's collision class; if that class is a singleton no evasion is
    possible and the closest-in-Hamming alternative is returned.
    """
    n = spec.n
    if n > 8:
        raise ValueError("search adversary is exposed for n <= 8 only")
    if not 0.0 < p_overhear < 1.0:
        raise ValueError("p_overhear must be in (0, 1)")
    x = pkt.payload
    size = 1 << n
    xs = np.arange(size, dtype=np.int64)
    # lik[obs, sent] for every pair of n-bit words
    d = _popcount_matrix(n)
    lik = np.exp(d * np.log(p_overhear) + (n - d) * np.log1p(-p_overhear))
    cls = collision_class(spec, hash_eval(spec, x))
    denom = lik[:, cls].sum(axis=1)
    weight = lik[:, x] / denom  # idealized watchdog consistency per observation
    scores = lik.T @ weight  # expected consistency per candidate payload
    in_class = np.zeros(size, dtype=bool)
    in_class[cls] = True
    scores[~in_class] = 0.0
    scores[x] = -1.0
    best = float(scores.max())
    if best > 0.0:
        ties = np.flatnonzero(scores == best)
    else:
        ties = xs[xs != x]
    dist = hamming_vec(x, ties)
    ties = ties[dist == dist.min()]
    chosen = int(ties.min())
    return replace(pkt, payload=chosen, own_hash=hash_eval(spec, chosen))


@functools.lru_cache(maxsize=4)
def _popcount_matrix(n: int) -> np.ndarray:
    xs = np.arange(1 << n, dtype=np.int64)
    return np.array([hamming_vec(int(v), xs) for v in xs], dtype=np.float64)


def serialize_packet(pkt: Packet, n: int, delta: int) -> bytes:
    """Byte form per the layout in the module docstring."""
    keys = sorted(pkt.coeffs)
    if any(not isinstance(k, int) or not 0 <= k < (1 << 16) for k in keys):
        raise ValueError("byte serialization requires int node ids below 2^16")
    out = [struct.pack(">BBB", len(keys), n, delta)]
    for k in keys:
        out.append(struct.pack(">HHH", k, pkt.coeffs[k], pkt.input_hashes[k]))
    out.append(struct.pack(">HH", pkt.own_hash, pkt.payload))
    return b"".join(out)


def parse_packet(data: bytes) -> tuple[Packet, int, int]:
    """Inverse of serialize_packet; returns (packet, n, delta)."""
    count, n, delta = struct.unpack_from(">BBB", data, 0)
    off = 3
    coeffs, hashes = {}, {}
    for _ in range(count):
        k, c, h = struct.unpack_from(">HHH", data, off)
        coeffs[k] = c
        hashes[k] = h
        off += 6
    own_hash, payload = struct.unpack_from(">HH", data, off)
    return Packet(coeffs, hashes, own_hash, payload), n, delta
