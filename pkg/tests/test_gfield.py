import numpy as np
import pytest

from algwatch.gfield import GF2n, REDUCTION_POLYS, default_field


def test_add_is_xor():
    f = GF2n(4)
    assert f.add(0b1010, 0b0110) == 0b1100
    for a in range(16):
        assert f.add(a, a) == 0
        assert f.add(a, 0) == a


def test_mul_identities():
    f = GF2n(4)
    for a in range(16):
        assert f.mul(a, 1) == a
        assert f.mul(a, 0) == 0


def test_mul_hand_reduction():
    # x * x^3 = x^4 = x + 1 under x^4 + x + 1
    f = GF2n(4)
    assert f.mul(0b0010, 0b1000) == 0b0011


def test_lincomb():
    f = GF2n(4)
    assert f.lincomb([1], [9]) == 9
    assert f.lincomb([0, 0], [3, 7]) == 0
    assert f.lincomb([2, 3], [8, 1]) == 0  # 2*8 = 3, 3*1 = 3, 3 ^ 3 = 0


def test_lincomb_rejects_bad_lists():
    f = GF2n(4)
    with pytest.raises(ValueError):
        f.lincomb([], [])
    with pytest.raises(ValueError):
        f.lincomb([1, 2], [3])


def test_out_of_range_elements_rejected():
    f = GF2n(4)
    with pytest.raises(ValueError):
        f.add(16, 0)
    with pytest.raises(ValueError):
        f.mul(3, -1)


def test_bad_polynomials_rejected():
    with pytest.raises(ValueError):
        GF2n(4, poly=0b11011)  # x^4+x^3+x+1 = (x+1)(x^3+x^2+1): reducible
    with pytest.raises(ValueError):
        GF2n(4, poly=0b10011 << 1)  # degree 5 polynomial for n=4
    with pytest.raises(ValueError):
        GF2n(17)


def test_table_polynomials_all_valid():
    for n in range(1, 17):
        f = GF2n(n, REDUCTION_POLYS[n])
        assert f.order == 1 << n


def test_field_axioms_small():
    f = GF2n(4)
    elems = range(16)
    for a in elems:
        for b in elems:
            assert f.mul(a, b) == f.mul(b, a)
            for c in (0, 1, 7, 13):
                assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
                assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)


def test_every_nonzero_element_invertible():
    f = GF2n(4)
    for a in range(1, 16):
        assert any(f.mul(a, b) == 1 for b in range(1, 16))


def test_mul_by_constant_is_bijection():
    f = GF2n(6)
    for a in (1, 5, 33, 63):
        image = {f.mul(a, x) for x in range(64)}
        assert image == set(range(64))


def test_vector_ops_match_scalar():
    rng = np.random.default_rng(3)
    for n in (4, 10):
        f = default_field(n)
        xs = rng.integers(0, f.order, size=50)
        for a in (0, 1, int(rng.integers(1, f.order))):
            assert [f.mul(a, int(x)) for x in xs] == f.mul_vec(a, xs).tolist()
        ys = rng.integers(0, f.order, size=50)
        expect = [f.mul(int(x), int(y)) for x, y in zip(xs, ys)]
        assert expect == f.mul_elementwise(xs, ys).tolist()


def test_non_primitive_irreducible_poly_falls_back():
    # x^4+x^3+x^2+x+1 is irreducible but x has order 5, so no log tables.
    f = GF2n(4, poly=0b11111)
    assert f._exp is None
    for a in range(16):
        assert f.mul(a, 1) == a
    # axioms still hold through the direct multiply path
    for a in range(16):
        for b in range(16):
            assert f.mul(a, b) == f.mul(b, a)
    image = {f.mul(7, x) for x in range(16)}
    assert image == set(range(16))


def test_default_field_cached():
    assert default_field(10) is default_field(10)
