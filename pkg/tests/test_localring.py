import numpy as np
import pytest

from pinkforge.localring import (
    CharacteristicTwo,
    FqData,
    NotAUnit,
    OutOfDomain,
    SemiLocalRing,
    batch_invert,
    batch_sqrt_one_plus_m,
    hensel_sqrt,
    invert,
    make_truncated_poly_ring,
    quotient_ring,
    teichmuller,
)


def poly_mul_trunc(a, b, p, k):
    out = [0] * k
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            if i + j < k:
                out[i + j] = (out[i + j] + ai * bj) % p
    return out


def test_field_case():
    A = make_truncated_poly_ring(3, 1)
    assert A.dim == 1 and A.maxideal.dim == 0
    assert A.elem([2]).inverse() == A.elem([2])


def test_dual_numbers():
    A = make_truncated_poly_ring(3, 2)
    assert A.dim == 2
    eps = A.elem([0, 1])
    assert (eps * eps).is_zero()


def test_f9_x3_against_polynomial_oracle():
    # dim-6 ring F9[X]/(X^3), multiplication table checked against direct
    # truncated polynomial multiplication over F9
    A = make_truncated_poly_ring(9, 3)
    assert A.dim == 6
    fq = A.fq
    rng = np.random.default_rng(3)
    X = A.elem([0, 0, 1, 0, 0, 0])
    X2 = X * X
    assert (X * X2).is_zero()
    for _ in range(60):
        a = rng.integers(0, 3, size=6)
        b = rng.integers(0, 3, size=6)
        # interpret as polynomials over F9 with int-coded coefficients
        pa = [fq.encode(a[2 * j:2 * j + 2]) for j in range(3)]
        pb = [fq.encode(b[2 * j:2 * j + 2]) for j in range(3)]
        out = [0, 0, 0]
        for i in range(3):
            for j in range(3 - i):
                prod = fq.mul(pa[i], pb[j])
                da = fq.digits(prod)
                db = fq.digits(out[i + j])
                out[i + j] = fq.encode([(x + y) % 3 for x, y in zip(da, db)])
        got = A.mul_vec(a, b)
        want = np.concatenate([fq.digits(c) for c in out])
        assert np.array_equal(got, want)


def test_prime_power_validation():
    with pytest.raises(ValueError):
        make_truncated_poly_ring(6, 2)


def test_invert_examples():
    A = make_truncated_poly_ring(3, 3)
    one = A.one_elem()
    assert invert(A, one) == one
    x = A.elem([1, 1, 0])          # 1 + X
    assert invert(A, x) == A.elem([1, 2, 1])   # geometric series 1 - X + X^2
    assert (x * invert(A, x)) == one
    with pytest.raises(NotAUnit):
        invert(A, A.elem([0, 1, 0]))


def test_units_are_complement_of_maxideal():
    for (q, k) in ((3, 2), (3, 3), (5, 2), (9, 2)):
        A = make_truncated_poly_ring(q, k)
        for v in A.elements(cap=10 ** 5):
            assert A.is_unit_vec(v) == (not A.maxideal.contains(v))


def test_hensel_sqrt_examples():
    A = make_truncated_poly_ring(3, 3)
    assert hensel_sqrt(A, A.one_elem()) == A.one_elem()
    y = hensel_sqrt(A, A.elem([1, 1, 0]))        # sqrt(1+X)
    assert y == A.elem([1, 2, 1])
    assert y * y == A.elem([1, 1, 0])
    y2 = hensel_sqrt(A, A.elem([1, 0, 1]))       # sqrt(1+X^2) = 1 + 2X^2
    assert y2 == A.elem([1, 0, 2])
    with pytest.raises(OutOfDomain):
        hensel_sqrt(A, A.elem([2, 0, 0]))
    A2 = make_truncated_poly_ring(2, 3)
    with pytest.raises(CharacteristicTwo):
        hensel_sqrt(A2, A2.one_elem())


def test_hensel_sqrt_unique_exhaustive():
    # uniqueness of the square root inside 1+m, by exhaustion
    for (q, k) in ((3, 3), (5, 2), (9, 2)):
        A = make_truncated_poly_ring(q, k)
        one_plus_m = [(A.one + v) % A.p for v in A.maxideal.enumerate()]
        for x in one_plus_m:
            y = hensel_sqrt(A, x).v
            roots = [u for u in one_plus_m if np.array_equal(A.mul_vec(u, u), x)]
            assert len(roots) == 1
            assert np.array_equal(roots[0], y)


def test_batch_sqrt_matches_newton():
    A = make_truncated_poly_ring(3, 4)
    X = np.array([(A.one + v) % 3 for v in A.maxideal.enumerate()])
    Y = batch_sqrt_one_plus_m(A, X)
    for x, y in zip(X, Y):
        assert np.array_equal(hensel_sqrt(A, x).v, y)


def test_batch_invert():
    A = make_truncated_poly_ring(3, 3)
    units = np.array([v for v in A.elements() if A.is_unit_vec(v)])
    inv = batch_invert(A, units)
    prods = A.batch_mul(units, inv)
    assert np.array_equal(prods, np.tile(A.one, (len(units), 1)))


def test_teichmuller_constants():
    A = make_truncated_poly_ring(9, 2)
    assert teichmuller(A, 0).is_zero()
    assert teichmuller(A, 1) == A.one_elem()
    for lam in range(9):
        for mu in range(9):
            assert teichmuller(A, A.fq.mul(lam, mu)) == teichmuller(A, lam) * teichmuller(A, mu)
        # the section reduces back to lambda
        assert A.residue_int(teichmuller(A, lam).v) == lam


def test_nilpotency_index():
    for k in (1, 2, 3, 5):
        A = make_truncated_poly_ring(3, k)
        assert A.nilpotency == k
        if k > 1:
            X = A.elem([0, 1] + [0] * (k - 2))
            assert not (X ** (k - 1)).is_zero()
            assert (X ** k).is_zero()


def test_ring_axioms_random_triples():
    rng = np.random.default_rng(7)
    for (q, k) in ((3, 3), (9, 2), (7, 2)):
        A = make_truncated_poly_ring(q, k)
        X = rng.integers(0, A.p, size=(300, A.dim))
        Y = rng.integers(0, A.p, size=(300, A.dim))
        Z = rng.integers(0, A.p, size=(300, A.dim))
        assert np.array_equal(A.batch_mul(A.batch_mul(X, Y), Z),
                              A.batch_mul(X, A.batch_mul(Y, Z)))
        assert np.array_equal(A.batch_mul(X, (Y + Z) % A.p),
                              (A.batch_mul(X, Y) + A.batch_mul(X, Z)) % A.p)
        assert np.array_equal(A.batch_mul(X, Y), A.batch_mul(Y, X))


def test_semilocal_product():
    A1 = make_truncated_poly_ring(3, 2)
    A2 = make_truncated_poly_ring(3, 3)
    S = SemiLocalRing([A1, A2])
    assert S.dim == 5
    assert S.radical.dim == A1.maxideal.dim + A2.maxideal.dim
    x = S.inject([A1.elem([1, 1]).v, A2.elem([1, 0, 1]).v])
    assert S.is_unit_vec(x.v)
    y = x.inverse()
    assert np.array_equal(S.project(y.v, 0), A1.elem([1, 1]).inverse().v)
    bad = S.inject([A1.elem([0, 1]).v, A2.one])
    assert not bad.is_unit()


def test_quotient_ring_truncation():
    A = make_truncated_poly_ring(3, 4)
    x2 = np.zeros(4, dtype=np.int64)
    x2[2] = 1
    Aq, P = quotient_ring(A, [x2])
    assert Aq.dim == 2
    # the projection is a ring map
    rng = np.random.default_rng(11)
    for _ in range(50):
        a = rng.integers(0, 3, size=4)
        b = rng.integers(0, 3, size=4)
        assert np.array_equal(P @ A.mul_vec(a, b) % 3,
                              Aq.mul_vec(P @ a % 3, P @ b % 3))
    assert Aq.nilpotency == 2


def test_ring_descriptor_serializable():
    import json
    A = make_truncated_poly_ring(9, 2)
    text = json.dumps(A.descriptor(), sort_keys=True)
    assert "q_poly" in text
