"""Hash families used to police payloads.

Two families of delta-bit hashes over n-bit symbols:

- ``affine``: h(x) = (a*x + b) mod 2^delta on the integer bit pattern,
  with a odd. Odd a makes every preimage class over the full n-bit space
  exactly 2^(n-delta) elements, which the detection analysis assumes.
  This is the family the experiments use.
- ``poly``: evaluate sum a_i x^i in GF(2^n) and keep the low delta bits.

delta = 0 is the empty hash: every input maps to 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gfield import GF2n, default_field

FAMILIES = ("affine", "poly")


@dataclass(frozen=True)
class HashSpec:
    """Immutable description of one concrete hash function.

    coefficients is (a, b) for the affine family and (a_0, ..., a_d) for
    the poly family. ``field`` is required for the poly family.
    """

    family: str
    n: int
    delta: int
    coefficients: tuple[int, ...]
    field: GF2n | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown hash family {self.family!r}")
        if not 0 <= self.delta <= self.n:
            raise ValueError("delta must be in [0, n]")
        if self.family == "affine":
            if len(self.coefficients) != 2:
                raise ValueError("affine family takes coefficients (a, b)")
            a, b = self.coefficients
            if self.delta > 0 and a % 2 == 0:
                raise ValueError("affine multiplier a must be odd")
            if not (0 <= a < max(2, 1 << self.delta) and 0 <= b < max(1, 1 << self.delta)):
                raise ValueError("affine coefficients must be delta-bit values")
        else:
            if self.field is None or self.field.n != self.n:
                raise ValueError("poly family requires a GF(2^n) field of matching width")
            if not self.coefficients:
                raise ValueError("poly family needs at least one coefficient")
            if any(not 0 <= c < (1 << self.n) for c in self.coefficients):
                raise ValueError("poly coefficients must be n-bit field elements")

    @property
    def mask(self) -> int:
        return (1 << self.delta) - 1

    def to_dict(self) -> dict:
        """Serializable form for experiment configs and result echoes."""
        d = {
            "family": self.family,
            "n": self.n,
            "delta": self.delta,
            "coefficients": list(self.coefficients),
        }
        if self.family == "poly":
            d["reduction_poly"] = self.field.poly
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HashSpec":
        field = None
        if d["family"] == "poly":
            field = GF2n(d["n"], d.get("reduction_poly"))
        return cls(
            family=d["family"],
            n=d["n"],
            delta=d["delta"],
            coefficients=tuple(d["coefficients"]),
            field=field,
        )


def hash_eval(spec: HashSpec, x: int) -> int:
    """Hash of one symbol; a delta-bit value."""
    if not 0 <= x < (1 << spec.n):
        raise ValueError(f"{x} is not an {spec.n}-bit symbol")
    if spec.family == "affine":
        a, b = spec.coefficients
        return (a * x + b) & spec.mask
    acc = 0
    f = spec.field
    for c in reversed(spec.coefficients):
        acc = f.add(f.mul(acc, x), c)
    return acc & spec.mask


def hash_eval_vec(spec: HashSpec, xs: np.ndarray) -> np.ndarray:
    """Vectorized hash_eval over an array of symbols."""
    xs = np.asarray(xs, dtype=np.int64)
    if spec.family == "affine":
        a, b = spec.coefficients
        return (a * xs + b) & spec.mask
    f = spec.field
    acc = np.zeros(len(xs), dtype=np.int64)
    for c in reversed(spec.coefficients):
        # Horner step: acc = acc*x + c, elementwise over xs.
        acc = f.mul_elementwise(acc, xs) ^ c
    return acc & spec.mask


def sample_hash(rng, family: str, n: int, delta: int, degree: int = 1) -> HashSpec:
    """Draw a hash uniformly from the admissible set of the family.

    For the affine family the multiplier is uniform over odd delta-bit
    residues (a=1 when delta=0) and the offset uniform over delta-bit
    values. For the poly family, ``degree``+1 coefficients are drawn
    uniformly from GF(2^n).
    """
    if not 0 <= delta <= n:
        raise ValueError("delta must be in [0, n]")
    if family == "affine":
        if delta == 0:
            return HashSpec("affine", n, 0, (1, 0))
        a = 2 * int(rng.integers(0, 1 << (delta - 1))) + 1
        b = int(rng.integers(0, 1 << delta))
        return HashSpec("affine", n, delta, (a, b))
    if family == "poly":
        coeffs = tuple(int(c) for c in rng.integers(0, 1 << n, size=degree + 1))
        return HashSpec("poly", n, delta, coeffs, field=default_field(n))
    raise ValueError(f"unknown hash family {family!r}")


def collision_list(spec: HashSpec, target: int, codebook) -> list[int]:
    """All codebook symbols hashing to ``target``, ascending.

    An empty list is a valid result for restricted codebooks.
    """
    if not 0 <= target < (1 << spec.delta):
        raise ValueError(f"target {target} is not a {spec.delta}-bit value")
    return [y for y in codebook if hash_eval(spec, y) == target]


def collision_class(spec: HashSpec, target: int, codebook=None) -> np.ndarray:
    """Vectorized collision_list; codebook=None means the full n-bit space."""
    if not 0 <= target < (1 << spec.delta):
        raise ValueError(f"target {target} is not a {spec.delta}-bit value")
    if codebook is None:
        xs = np.arange(1 << spec.n, dtype=np.int64)
    else:
        xs = codebook.as_array()
    return xs[hash_eval_vec(spec, xs) == target]


def hash_partition(spec: HashSpec, codebook=None) -> dict[int, np.ndarray]:
    """Map each delta-bit value to its preimage class within the codebook."""
    if codebook is None:
        xs = np.arange(1 << spec.n, dtype=np.int64)
    else:
        xs = codebook.as_array()
    hs = hash_eval_vec(spec, xs)
    return {int(t): xs[hs == t] for t in np.unique(hs)}
