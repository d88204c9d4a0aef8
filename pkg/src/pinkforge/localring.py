"""Finite commutative F_p-algebras: local rings, their products, and the
basic analytic toolkit (unit inversion, square roots of 1+m by Newton
iteration, the multiplicative constants section of the residue field).

A ring is presented by an ordered F_p-basis and a structure-constant
tensor.  Every element is a coefficient vector mod p.  All rings here are
finite with p·A = 0, so the maximal ideal is nilpotent, additive subgroups
are F_p-subspaces, and the constants section of A -> A/m is a genuine
field embedding F_q -> A (the fixed points of x -> x^q).
"""

import numpy as np

from .fp import FpSubspace, rref, solve


class NotAUnit(ArithmeticError):
    pass


class CharacteristicTwo(ArithmeticError):
    pass


class OutOfDomain(ArithmeticError):
    pass


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def factor_prime_power(q):
    """(p, f) with q = p^f, or raise."""
    for p in range(2, q + 1):
        if _is_prime(p):
            f = 0
            m = q
            while m % p == 0:
                m //= p
                f += 1
            if m == 1 and f >= 1:
                return p, f
            if q % p == 0:
                break
    raise ValueError(f"{q} is not a prime power")


# Fixed irreducible polynomials per (p, degree), ascending coefficients,
# monic; recorded in ring metadata so serialized rings are reproducible.
IRREDUCIBLE = {
    (2, 1): (0, 1), (2, 2): (1, 1, 1), (2, 3): (1, 1, 0, 1), (2, 4): (1, 1, 0, 0, 1),
    (3, 1): (1, 1), (3, 2): (2, 2, 1), (3, 3): (1, 2, 0, 1),
    (5, 1): (3, 1), (5, 2): (2, 4, 1),
    (7, 1): (4, 1), (7, 2): (3, 6, 1),
    (11, 1): (9, 1), (13, 1): (11, 1),
}


def _poly_mul_mod(a, b, poly, p):
    """Product of GF(p)[x] polynomials reduced mod the monic `poly`."""
    f = len(poly) - 1
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    for d in range(len(out) - 1, f - 1, -1):
        c = out[d]
        if c:
            out[d] = 0
            for j in range(f):
                out[d - f + j] = (out[d - f + j] - c * poly[j]) % p
    return tuple(out[:f])


def _irreducible_poly(p, f):
    if (p, f) in IRREDUCIBLE:
        return IRREDUCIBLE[(p, f)]
    if f == 1:
        # x - g, g the smallest primitive root mod p
        for g in range(2, p):
            seen, x = set(), 1
            for _ in range(p - 1):
                x = x * g % p
                seen.add(x)
            if len(seen) == p - 1:
                return ((-g) % p, 1)
    # smallest (coefficient-lex) monic irreducible: adequate for tiny fields,
    # and deterministic
    from itertools import product as iproduct
    for tail in iproduct(range(p), repeat=f):
        poly = tuple(tail) + (1,)
        if poly[0] == 0:
            continue
        n_roots_ok = True
        # irreducible over F_p iff no factor of degree <= f//2; test by gcd
        # with x^{p^d} - x via repeated powering
        x = (0, 1) + (0,) * (f - 2) if f >= 2 else (1,)
        xp = x
        reducible = False
        for _ in range(f // 2):
            # xp <- xp^p mod poly
            acc = (1,) + (0,) * (f - 1)
            base = xp
            e = p
            while e:
                if e & 1:
                    acc = _poly_mul_mod(acc, base, poly, p)
                base = _poly_mul_mod(base, base, poly, p)
                e >>= 1
            xp = acc
            diff = tuple((a - b) % p for a, b in zip(xp, x))
            if not any(diff):
                reducible = True
                break
            # gcd(poly, xp - x) != 1 <=> a root field of small degree
            if _poly_gcd_nontrivial(poly, diff, p):
                reducible = True
                break
        if not reducible and n_roots_ok:
            return poly
    raise ValueError(f"no irreducible polynomial found for GF({p}^{f})")


def _poly_gcd_nontrivial(poly, g, p):
    a = list(poly)
    b = list(g)
    def deg(u):
        d = len(u) - 1
        while d >= 0 and u[d] % p == 0:
            d -= 1
        return d
    while True:
        db = deg(b)
        if db < 0:
            return deg(a) > 0
        if db == 0:
            return False
        da = deg(a)
        if da < db:
            a, b = b, a
            continue
        c = a[da] * pow(b[db], -1, p)
        for j in range(db + 1):
            a[da - db + j] = (a[da - db + j] - c * b[j]) % p
        if deg(a) < deg(b):
            a, b = b, a


class FqData:
    """The residue field F_q = GF(p^f) with int-encoded elements.

    Element k in [0, q) encodes sum(digit_i * alpha^i) with digits base p,
    alpha a root of the fixed irreducible polynomial.
    """

    __slots__ = ("p", "f", "q", "poly", "mul_table")

    def __init__(self, p, f, poly=None):
        self.p, self.f, self.q = p, f, p ** f
        self.poly = tuple(poly) if poly is not None else _irreducible_poly(p, f)
        tab = np.zeros((self.q, self.q), dtype=np.int64)
        for a in range(self.q):
            da = self.digits(a)
            for b in range(a, self.q):
                c = self.encode(_poly_mul_mod(da, self.digits(b), self.poly, p))
                tab[a, b] = tab[b, a] = c
        self.mul_table = tab

    def digits(self, k):
        out = []
        for _ in range(self.f):
            out.append(k % self.p)
            k //= self.p
        return tuple(out)

    def encode(self, digits):
        k = 0
        for d in reversed(digits):
            k = k * self.p + int(d) % self.p
        return k

    def mul(self, a, b):
        return int(self.mul_table[a, b])

    def inv(self, a):
        if a == 0:
            raise NotAUnit("0 in residue field")
        return self.pow(a, self.q - 2)

    def pow(self, a, e):
        r, b = 1, a
        e %= self.q - 1 if a else 1
        while e:
            if e & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            e >>= 1
        return r

    def elements(self):
        return range(self.q)


class FiniteAlgebra:
    """Commutative F_p-algebra with explicit basis and structure constants."""

    def __init__(self, p, mul_tensor, one, names=None, meta=None):
        self.p = p
        self.mul_tensor = np.ascontiguousarray(mul_tensor, dtype=np.int64) % p
        self.dim = self.mul_tensor.shape[0]
        self.one = np.array(one, dtype=np.int64) % p
        self.names = list(names) if names else [f"e{i}" for i in range(self.dim)]
        self.meta = dict(meta or {})
        self.zero = np.zeros(self.dim, dtype=np.int64)

    # -- vector-level arithmetic ------------------------------------------
    def mul_vec(self, x, y):
        return np.einsum("i,j,ijk->k", x, y, self.mul_tensor) % self.p

    def mulmat(self, x):
        """Matrix of y -> x*y acting on coefficient columns."""
        return np.einsum("i,ijk->kj", x, self.mul_tensor) % self.p

    def batch_mul(self, X, Y):
        """Row-wise products of two (n, dim) coefficient arrays."""
        return np.einsum("ni,nj,ijk->nk", X, Y, self.mul_tensor) % self.p

    def batch_mul_elem(self, X, y):
        M = np.einsum("j,ijk->ik", y, self.mul_tensor) % self.p
        return (X @ M) % self.p

    def pow_vec(self, x, e):
        r, b = self.one.copy(), x % self.p
        while e:
            if e & 1:
                r = self.mul_vec(r, b)
            b = self.mul_vec(b, b)
            e >>= 1
        return r

    def batch_pow(self, X, e):
        R = np.tile(self.one, (X.shape[0], 1))
        B = X % self.p
        while e:
            if e & 1:
                R = self.batch_mul(R, B)
            B = self.batch_mul(B, B)
            e >>= 1
        return R

    def is_unit_vec(self, x):
        M = self.mulmat(x)
        return len(rref(M, self.p)[1]) == self.dim

    def invert_vec(self, x):
        z = solve(self.mulmat(x), self.one, self.p)
        if z is None or not np.array_equal(self.mul_vec(x, z), self.one):
            raise NotAUnit(f"{self.elem(x)} is not invertible")
        return z

    # -- elements ----------------------------------------------------------
    def elem(self, coeffs):
        v = np.array(coeffs, dtype=np.int64) % self.p
        if v.shape != (self.dim,):
            raise ValueError("coefficient length mismatch")
        return RingElem(self, v)

    def one_elem(self):
        return RingElem(self, self.one)

    def zero_elem(self):
        return RingElem(self, self.zero)

    def scalar(self, k):
        return RingElem(self, (self.one * (int(k) % self.p)) % self.p)

    def elements(self, cap=None):
        """All p^dim elements as an array; guard with cap."""
        if cap is not None and self.p ** self.dim > cap:
            raise ValueError("ring too large to enumerate")
        digits = np.indices((self.p,) * self.dim).reshape(self.dim, -1).T
        return digits % self.p

    def format_vec(self, v):
        terms = [
            (f"{int(c)}*" if c != 1 or self.names[i] == "1" else "") + self.names[i]
            for i, c in enumerate(v)
            if c
        ]
        return " + ".join(terms).replace("*1", "") if terms else "0"

    def descriptor(self):
        return dict(self.meta, p=self.p, dim=self.dim)


class RingElem:
    """Immutable element of a FiniteAlgebra: a coefficient vector."""

    __slots__ = ("ring", "v")

    def __init__(self, ring, v):
        self.ring = ring
        self.v = np.asarray(v, dtype=np.int64) % ring.p
        self.v.setflags(write=False)

    def _coerce(self, other):
        if isinstance(other, RingElem):
            if other.ring is not self.ring:
                raise ValueError("elements of different rings")
            return other.v
        if isinstance(other, (int, np.integer)):
            return (self.ring.one * (int(other) % self.ring.p)) % self.ring.p
        return NotImplemented

    def __add__(self, other):
        w = self._coerce(other)
        return RingElem(self.ring, (self.v + w) % self.ring.p)

    __radd__ = __add__

    def __sub__(self, other):
        w = self._coerce(other)
        return RingElem(self.ring, (self.v - w) % self.ring.p)

    def __rsub__(self, other):
        w = self._coerce(other)
        return RingElem(self.ring, (w - self.v) % self.ring.p)

    def __mul__(self, other):
        w = self._coerce(other)
        return RingElem(self.ring, self.ring.mul_vec(self.v, w))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElem(self.ring, (-self.v) % self.ring.p)

    def __pow__(self, e):
        if e < 0:
            return RingElem(self.ring, self.ring.pow_vec(self.ring.invert_vec(self.v), -e))
        return RingElem(self.ring, self.ring.pow_vec(self.v, e))

    def inverse(self):
        return RingElem(self.ring, self.ring.invert_vec(self.v))

    def is_unit(self):
        return self.ring.is_unit_vec(self.v)

    def is_zero(self):
        return not self.v.any()

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ring.scalar(other)
        return isinstance(other, RingElem) and self.ring is other.ring and np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash((id(self.ring), self.v.tobytes()))

    def __repr__(self):
        return self.ring.format_vec(self.v)


class LocalRing(FiniteAlgebra):
    """Finite local F_p-algebra: units are exactly the complement of m."""

    def __init__(self, p, mul_tensor, one, maxideal_vectors, fq, embed, proj,
                 names=None, meta=None, fq_block=None):
        super().__init__(p, mul_tensor, one, names=names, meta=meta)
        self.maxideal = FpSubspace(p, self.dim, maxideal_vectors)
        self.fq = fq                      # FqData of A/m
        self.embed = np.array(embed, dtype=np.int64) % p   # f x dim: alpha^i as ring vectors
        self.proj = np.array(proj, dtype=np.int64) % p     # f x dim: A -> digit coords of A/m
        # F_q-module block layout (truncated polynomial rings): basis is
        # e_i X^j at index j*f + i, used to enumerate F_q-linear forms.
        self.fq_block = fq_block
        self._check_local()
        self.nilpotency = self._nilpotency_index()
        self.units_order = (self.fq.q - 1) * p ** (self.dim - self.fq.f)

    def _check_local(self):
        if self.maxideal.contains(self.one):
            raise ValueError("1 lies in the maximal ideal")
        for t in self.embed:
            if self.maxideal.contains(t) and t.any():
                raise ValueError("embedded residue field meets m")

    def _nilpotency_index(self):
        cur = self.maxideal
        k = 1
        while cur.dim > 0:
            nxt = FpSubspace(self.p, self.dim,
                             [self.mul_vec(a, b) for a in cur.basis for b in self.maxideal.basis])
            cur = nxt
            k += 1
            if k > self.dim + 1:
                raise ValueError("maximal ideal is not nilpotent")
        return k

    # locality shortcut: x is a unit iff x mod m != 0
    def is_unit_vec(self, x):
        return bool((self.proj @ x % self.p).any())

    def residue_digits(self, x):
        return tuple(int(c) for c in self.proj @ np.asarray(x) % self.p)

    def residue_int(self, x):
        return self.fq.encode(self.residue_digits(x))

    def constant(self, lam):
        """The multiplicative constants section s: F_q -> A at lam."""
        if isinstance(lam, RingElem):
            lam = self.residue_int(lam.v)
        if isinstance(lam, (tuple, list, np.ndarray)):
            digits = np.array(lam, dtype=np.int64) % self.p
        else:
            digits = np.array(self.fq.digits(int(lam) % self.fq.q), dtype=np.int64)
        return RingElem(self, digits @ self.embed % self.p)

    def constants(self):
        """All q constants s(F_q), as a (q, dim) array."""
        rows = [self.constant(k).v for k in range(self.fq.q)]
        return np.array(rows, dtype=np.int64)

    def in_one_plus_m(self, x):
        return self.maxideal.contains((np.asarray(x) - self.one) % self.p)

    def fq_coords(self, x):
        """Coordinates of x in the F_q-basis (block layout only)."""
        if self.fq_block is None:
            raise ValueError("ring has no F_q block layout")
        f = self.fq.f
        x = np.asarray(x)
        return [self.fq.encode(x[j * f:(j + 1) * f]) for j in range(self.dim // f)]

    def descriptor(self):
        d = super().descriptor()
        d.update(q=self.fq.q, q_poly=list(self.fq.poly),
                 maxideal_dim=self.maxideal.dim, nilpotency=self.nilpotency)
        return d


class SemiLocalRing(FiniteAlgebra):
    """Finite product of LocalRings; the radical is the product of the
    factor maximal ideals."""

    def __init__(self, factors):
        factors = list(factors)
        p = factors[0].p
        if any(f.p != p for f in factors):
            raise ValueError("factors must share characteristic")
        dim = sum(f.dim for f in factors)
        S = np.zeros((dim, dim, dim), dtype=np.int64)
        one = np.zeros(dim, dtype=np.int64)
        names = []
        off = 0
        self.offsets = []
        for fac in factors:
            self.offsets.append(off)
            S[off:off + fac.dim, off:off + fac.dim, off:off + fac.dim] = fac.mul_tensor
            one[off:off + fac.dim] = fac.one
            names += [f"[{len(self.offsets)-1}]{nm}" for nm in fac.names]
            off += fac.dim
        super().__init__(p, S, one, names=names,
                         meta={"kind": "product", "factors": [f.meta for f in factors]})
        self.factors = factors
        rad_rows = []
        for i, fac in enumerate(factors):
            o = self.offsets[i]
            for row in fac.maxideal.basis:
                full = np.zeros(dim, dtype=np.int64)
                full[o:o + fac.dim] = row
                rad_rows.append(full)
        self.radical = FpSubspace(p, dim, rad_rows)
        self.units_order = 1
        for fac in factors:
            self.units_order *= fac.units_order

    def project(self, x, i):
        o = self.offsets[i]
        return np.asarray(x)[o:o + self.factors[i].dim]

    def inject(self, xs):
        v = np.zeros(self.dim, dtype=np.int64)
        for i, x in enumerate(xs):
            o = self.offsets[i]
            v[o:o + self.factors[i].dim] = np.asarray(x)
        return RingElem(self, v)

    def is_unit_vec(self, x):
        return all(self.factors[i].is_unit_vec(self.project(x, i))
                   for i in range(len(self.factors)))

    def descriptor(self):
        return {"p": self.p, "dim": self.dim,
                "factors": [f.descriptor() for f in self.factors]}


def make_truncated_poly_ring(q, k):
    """F_q[X]/(X^k): basis alpha^i X^j at index j*f+i, maximal ideal (X)."""
    p, f = factor_prime_power(q)
    if k < 1:
        raise ValueError("k must be >= 1")
    fq = FqData(p, f)
    dim = f * k
    S = np.zeros((dim, dim, dim), dtype=np.int64)
    for j1 in range(k):
        for j2 in range(k - j1):
            for i1 in range(f):
                for i2 in range(f):
                    prod = _poly_mul_mod(_unit_digits(f, i1), _unit_digits(f, i2), fq.poly, p)
                    for i3, c in enumerate(prod):
                        if c:
                            S[j1 * f + i1, j2 * f + i2, (j1 + j2) * f + i3] = c
    one = np.zeros(dim, dtype=np.int64)
    one[0] = 1
    maxid = np.eye(dim, dtype=np.int64)[f:]
    embed = np.zeros((f, dim), dtype=np.int64)
    for i in range(f):
        embed[i, i] = 1
    proj = np.zeros((f, dim), dtype=np.int64)
    for i in range(f):
        proj[i, i] = 1
    names = [_monomial_name(i, j) for j in range(k) for i in range(f)]
    meta = {"kind": "truncated_poly", "q": q, "k": k, "q_poly": list(fq.poly)}
    return LocalRing(p, S, one, maxid, fq, embed, proj, names=names, meta=meta,
                     fq_block=(f, k))


def _unit_digits(f, i):
    d = [0] * f
    d[i] = 1
    return tuple(d)


def _monomial_name(i, j):
    a = "" if i == 0 else ("a" if i == 1 else f"a^{i}")
    x = "" if j == 0 else ("X" if j == 1 else f"X^{j}")
    return (a + ("*" if a and x else "") + x) or "1"


def invert(A, x):
    """Inverse of a unit; NotAUnit for elements of the maximal ideal."""
    if isinstance(x, RingElem):
        return RingElem(A, A.invert_vec(x.v))
    return RingElem(A, A.invert_vec(np.asarray(x)))


def hensel_sqrt(A, x):
    """Unique square root in 1+m of x in 1+m, p odd.

    Newton iteration y <- (y + x/y)/2 starting at 1; quadratic convergence
    in the m-adic filtration, so ceil(log2(nilpotency))+1 steps suffice.
    """
    if A.p == 2:
        raise CharacteristicTwo("square roots in 1+m need p odd")
    v = x.v if isinstance(x, RingElem) else np.asarray(x, dtype=np.int64) % A.p
    if not A.in_one_plus_m(v):
        raise OutOfDomain("argument not in 1 + m")
    inv2 = pow(2, -1, A.p)
    y = A.one.copy()
    steps = max(1, int(np.ceil(np.log2(max(A.nilpotency, 2)))) + 1)
    for _ in range(steps):
        y = (y + A.mul_vec(v, A.invert_vec(y))) * inv2 % A.p
    if not np.array_equal(A.mul_vec(y, y), v):
        raise ArithmeticError("Newton iteration failed to converge")
    return RingElem(A, y)


def batch_sqrt_one_plus_m(A, X):
    """Square roots in 1+m for rows of X, via the power map.

    1+m is a p-group of order p^E, so squaring is invertible on it and
    sqrt(x) = x^((p^E + 1)//2).
    """
    if A.p == 2:
        raise CharacteristicTwo("square roots in 1+m need p odd")
    if isinstance(A, SemiLocalRing):
        E = sum(f.dim - f.fq.f for f in A.factors)
    else:
        E = A.dim - A.fq.f
    e = (A.p ** E + 1) // 2
    return A.batch_pow(X, e)


def batch_invert(A, X):
    """Inverses of rows of X, all assumed units: x^(|A*| - 1)."""
    return A.batch_pow(X, A.units_order - 1)


def teichmuller(A, lam):
    """Multiplicative section s of A -> A/m at lam (an int code, digit
    sequence, or RingElem); with pA = 0 this is the constants embedding."""
    return A.constant(lam)


def quotient_ring(A, ideal_vectors):
    """(A/I, projection matrix) for an ideal I given by spanning vectors.

    The input span is saturated to an ideal; the quotient keeps A's local
    structure (I must sit inside the maximal ideal).
    """
    p = A.p
    I = FpSubspace(p, A.dim, ideal_vectors)
    while True:
        rows = list(I.basis)
        ext = [A.mul_vec(b, v) for v in I.basis for b in np.eye(A.dim, dtype=np.int64)]
        I2 = FpSubspace(p, A.dim, rows + ext)
        if I2.dim == I.dim:
            break
        I = I2
    for row in I.basis:
        if not A.maxideal.contains(row):
            raise ValueError("ideal not contained in the maximal ideal")
    # complement basis: coordinates not among pivots of I
    piv = set(I.pivots)
    comp = [i for i in range(A.dim) if i not in piv]
    dimq = len(comp)
    # projection: e_i -> e_i reduced mod I, expressed in complement coords
    P = np.zeros((dimq, A.dim), dtype=np.int64)
    for i in range(A.dim):
        v = I.reduce(np.eye(A.dim, dtype=np.int64)[i])
        P[:, i] = v[comp]
    S = np.zeros((dimq, dimq, dimq), dtype=np.int64)
    lift = np.zeros((dimq, A.dim), dtype=np.int64)
    for a, c in enumerate(comp):
        lift[a, c] = 1
    for a in range(dimq):
        for b in range(dimq):
            S[a, b] = P @ A.mul_vec(lift[a], lift[b]) % p
    oneq = P @ A.one % p
    maxq = [P @ row % p for row in A.maxideal.basis]
    emb_rows = [P @ row % p for row in A.embed]
    names = [A.names[c] for c in comp]
    meta = dict(A.meta, quotient_of=A.meta.get("kind", "ring"), ideal_dim=I.dim)
    # residue projection factors through the complement section
    projq = A.proj @ lift.T % p
    return (
        LocalRing(p, S, oneq, maxq, A.fq, emb_rows, projq, names=names, meta=meta,
                  fq_block=None),
        P,
    )
