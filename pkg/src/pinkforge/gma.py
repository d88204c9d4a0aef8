"""Generalized 2x2 matrix algebras over a finite local or semi-local base.

An element is a formal matrix (a, b, c, d) with a, d in the base ring A and
b, c in finite A-modules B, C glued by a bilinear pairing B x C -> A.  The
product rule is

    (a,b,c,d)(a',b',c',d') = (aa'+m(b,c'), ab'+d'b, a'c+dc', dd'+m(b',c))

and the compatibility law m(b,c)b' = m(b',c)b, m(b,c')c = m(b,c)c' is
validated on bases at construction time: all downstream algebra trusts it.

Every such algebra satisfies x^2 - tr(x)x + det(x) = 0 identically, which
gives closed-form inverses: x^{-1} = det(x)^{-1} (tr(x) - x).
"""

import numpy as np

from .fp import FpSubspace
from .localring import LocalRing, NotAUnit, RingElem, SemiLocalRing


class StructureMismatch(ValueError):
    pass


class NotAdapted(ValueError):
    pass


class GmaStructure:
    """Type (1,1) GMA presented by F_p-bases of A, B, C and action/pairing
    tables.  Flat coordinates are ordered [a | b | c | d]."""

    def __init__(self, A, act_b, act_c, pairing, name="R"):
        self.A = A
        p = A.p
        self.p = p
        self.act_b = np.ascontiguousarray(act_b, dtype=np.int64) % p  # (da, db, db)
        self.act_c = np.ascontiguousarray(act_c, dtype=np.int64) % p  # (da, dc, dc)
        self.pairing = np.ascontiguousarray(pairing, dtype=np.int64) % p  # (db, dc, da)
        self.da = A.dim
        self.db = self.act_b.shape[1]
        self.dc = self.act_c.shape[1]
        self.dim = 2 * self.da + self.db + self.dc
        self.name = name
        da, db, dc = self.da, self.db, self.dc
        self.sa = slice(0, da)
        self.sb = slice(da, da + db)
        self.sc = slice(da + db, da + db + dc)
        self.sd = slice(da + db + dc, self.dim)
        self.one = np.zeros(self.dim, dtype=np.int64)
        self.one[self.sa] = A.one
        self.one[self.sd] = A.one
        self.J = np.zeros(self.dim, dtype=np.int64)
        self.J[self.sa] = A.one
        self.J[self.sd] = (-A.one) % p
        self._validate()
        self.mul_tensor = self._build_mul_tensor()
        self._radical = None
        self._rad0 = None

    # -- construction helpers ----------------------------------------------
    def _validate(self):
        A, p = self.A, self.p
        for i in range(self.da):
            a = np.eye(self.da, dtype=np.int64)[i]
            for i2 in range(self.da):
                a2 = np.eye(self.da, dtype=np.int64)[i2]
                aa2 = A.mul_vec(a, a2)
                Mb = self.module_act(aa2, np.eye(self.db, dtype=np.int64), "b")
                Mb2 = self.module_act(a, self.module_act(a2, np.eye(self.db, dtype=np.int64), "b"), "b")
                if not np.array_equal(Mb, Mb2):
                    raise StructureMismatch("B is not an A-module")
                Mc = self.module_act(aa2, np.eye(self.dc, dtype=np.int64), "c")
                Mc2 = self.module_act(a, self.module_act(a2, np.eye(self.dc, dtype=np.int64), "c"), "c")
                if not np.array_equal(Mc, Mc2):
                    raise StructureMismatch("C is not an A-module")
        eb = np.eye(self.db, dtype=np.int64)
        ec = np.eye(self.dc, dtype=np.int64)
        for k in range(self.db):
            for l in range(self.dc):
                m_kl = self.pair(eb[k], ec[l])
                for k2 in range(self.db):
                    lhs = self.module_act(m_kl, eb[k2][None, :], "b")[0]
                    rhs = self.module_act(self.pair(eb[k2], ec[l]), eb[k][None, :], "b")[0]
                    if not np.array_equal(lhs, rhs):
                        raise StructureMismatch("pairing compatibility fails on B")
                for l2 in range(self.dc):
                    lhs = self.module_act(self.pair(eb[k], ec[l2]), ec[l][None, :], "c")[0]
                    rhs = self.module_act(m_kl, ec[l2][None, :], "c")[0]
                    if not np.array_equal(lhs, rhs):
                        raise StructureMismatch("pairing compatibility fails on C")
        # A-bilinearity of the pairing: m(ab, c) = a m(b, c)
        for i in range(self.da):
            a = np.eye(self.da, dtype=np.int64)[i]
            for k in range(self.db):
                for l in range(self.dc):
                    lhs = self.pair(self.module_act(a, eb[k][None, :], "b")[0], ec[l])
                    rhs = self.A.mul_vec(a, self.pair(eb[k], ec[l]))
                    if not np.array_equal(lhs, rhs):
                        raise StructureMismatch("pairing is not A-bilinear")

    def _build_mul_tensor(self):
        D = self.dim
        S = np.zeros((D, D, D), dtype=np.int64)
        E = np.eye(D, dtype=np.int64)
        for i in range(D):
            for j in range(D):
                S[i, j] = self.mul_vec(E[i], E[j])
        return S

    # -- component access ----------------------------------------------------
    def comps(self, x):
        x = np.asarray(x)
        return x[..., self.sa], x[..., self.sb], x[..., self.sc], x[..., self.sd]

    def assemble(self, a, b, c, d):
        parts = [np.asarray(a), np.asarray(b), np.asarray(c), np.asarray(d)]
        return np.concatenate(parts, axis=-1) % self.p

    def module_act(self, a, M, which):
        """Action of ring vector a on rows of M in module B or C."""
        act = self.act_b if which == "b" else self.act_c
        return np.einsum("i,nk,ikj->nj", a, np.atleast_2d(M), act) % self.p

    def pair(self, b, c):
        return np.einsum("k,l,kli->i", b, c, self.pairing) % self.p

    # -- algebra operations ---------------------------------------------------
    def mul_vec(self, x, y):
        p = self.p
        a, b, c, d = self.comps(x)
        a2, b2, c2, d2 = self.comps(y)
        A = self.A
        na = (A.mul_vec(a, a2) + self.pair(b, c2)) % p
        nb = (self.module_act(a, b2[None, :], "b")[0] + self.module_act(d2, b[None, :], "b")[0]) % p
        nc = (self.module_act(a2, c[None, :], "c")[0] + self.module_act(d, c2[None, :], "c")[0]) % p
        nd = (A.mul_vec(d, d2) + self.pair(b2, c)) % p
        return self.assemble(na, nb, nc, nd)

    def batch_mul(self, X, Y):
        X = np.atleast_2d(X) % self.p
        Y = np.atleast_2d(Y) % self.p
        return np.einsum("ni,nj,ijk->nk", X, Y, self.mul_tensor) % self.p

    def batch_mul_elem(self, X, y):
        M = np.einsum("j,ijk->ik", np.asarray(y), self.mul_tensor) % self.p
        return (np.atleast_2d(X) @ M) % self.p

    def batch_mul_elem_left(self, x, Y):
        M = np.einsum("i,ijk->jk", np.asarray(x), self.mul_tensor) % self.p
        return (np.atleast_2d(Y) @ M) % self.p

    def trace_vec(self, x):
        a, _, _, d = self.comps(x)
        return (a + d) % self.p

    def det_vec(self, x):
        a, b, c, d = self.comps(x)
        return (self.A.mul_vec(a, d) - self.pair(b, c)) % self.p

    def batch_trace(self, X):
        X = np.atleast_2d(X)
        return (X[:, self.sa] + X[:, self.sd]) % self.p

    def batch_det(self, X):
        X = np.atleast_2d(X)
        ad = np.einsum("ni,nj,ijk->nk", X[:, self.sa], X[:, self.sd], self.A.mul_tensor) % self.p
        bc = np.einsum("nk,nl,kli->ni", X[:, self.sb], X[:, self.sc], self.pairing) % self.p
        return (ad - bc) % self.p

    def scalar_mat(self, t):
        """t*Id for a ring vector t."""
        return self.assemble(t, np.zeros(self.db, dtype=np.int64),
                             np.zeros(self.dc, dtype=np.int64), t)

    def ring_scale(self, t, X):
        """(t*Id) * X for a ring vector t and rows X."""
        return self.batch_mul_elem_left(self.scalar_mat(t), X)

    def inv_vec(self, x):
        det = self.det_vec(x)
        if not self.A.is_unit_vec(det):
            raise NotAUnit("matrix determinant is not a unit")
        dinv = self.A.invert_vec(det)
        adj = (self.scalar_mat(self.trace_vec(x)) - x) % self.p
        return self.ring_scale(dinv, adj[None, :])[0]

    def batch_inv(self, X):
        from .localring import batch_invert
        X = np.atleast_2d(X)
        dets = self.batch_det(X)
        dinv = batch_invert(self.A, dets)
        TR = self.batch_trace(X)
        adj = np.zeros_like(X)
        adj[:, self.sa] = (TR - X[:, self.sa]) % self.p
        adj[:, self.sd] = (TR - X[:, self.sd]) % self.p
        adj[:, self.sb] = (-X[:, self.sb]) % self.p
        adj[:, self.sc] = (-X[:, self.sc]) % self.p
        S = np.zeros_like(X)
        S[:, self.sa] = dinv
        S[:, self.sd] = dinv
        return self.batch_mul(S, adj)

    def is_unit(self, x):
        return self.A.is_unit_vec(self.det_vec(x))

    def elem(self, a, b=None, c=None, d=None):
        if b is None:
            v = np.asarray(a, dtype=np.int64) % self.p
            if v.shape != (self.dim,):
                raise ValueError("flat coordinate length mismatch")
            return GmaElem(self, v)

        def conv(x, n):
            w = x.v if isinstance(x, RingElem) else np.asarray(x, dtype=np.int64)
            if w.shape != (n,):
                raise ValueError("component length mismatch")
            return w % self.p

        return GmaElem(self, self.assemble(conv(a, self.da), conv(b, self.db),
                                           conv(c, self.dc), conv(d, self.da)))

    def identity(self):
        return GmaElem(self, self.one)

    def j_elem(self):
        return GmaElem(self, self.J)

    # -- radical ---------------------------------------------------------------
    def bc_ideal(self):
        """The ideal of A spanned by pairing values m(B, C)."""
        rows = [self.pairing[k, l] for k in range(self.db) for l in range(self.dc)]
        rows = [self.A.mul_vec(np.eye(self.da, dtype=np.int64)[i], r)
                for r in rows for i in range(self.da)] + rows
        return FpSubspace(self.p, self.da, rows)

    def radical_profile(self):
        """Case tag per local factor: 'matrix' (BC = A) or 'reduced' (BC in m)."""
        A = self.A
        bc = self.bc_ideal()
        factors = A.factors if isinstance(A, SemiLocalRing) else [A]
        tags = []
        for i, fac in enumerate(factors):
            if isinstance(A, SemiLocalRing):
                proj_rows = [A.project(r, i) for r in bc.basis]
                bci = FpSubspace(self.p, fac.dim, proj_rows)
            else:
                bci = bc
            if bci.contains(fac.one):
                tags.append("matrix")
            else:
                for row in bci.basis:
                    if not fac.maxideal.contains(row):
                        raise StructureMismatch("BC neither A nor inside m")
                tags.append("reduced")
        return tags

    def radical(self):
        """F_p-subspace of rad R = [[m, B],[C, m]] or m*M2(A) per factor."""
        if self._radical is not None:
            return self._radical
        A, p = self.A, self.p
        tags = self.radical_profile()
        factors = A.factors if isinstance(A, SemiLocalRing) else [A]
        rows = []
        eb = np.eye(self.db, dtype=np.int64)
        ec = np.eye(self.dc, dtype=np.int64)
        za = np.zeros(self.da, dtype=np.int64)
        zb = np.zeros(self.db, dtype=np.int64)
        zc = np.zeros(self.dc, dtype=np.int64)
        for i, (fac, tag) in enumerate(zip(factors, tags)):
            if isinstance(A, SemiLocalRing):
                off = A.offsets[i]
                mrows = [_lift_block(r, off, A.dim) for r in fac.maxideal.basis]
                onei = _lift_block(fac.one, off, A.dim)
            else:
                mrows = list(fac.maxideal.basis)
                onei = fac.one
            for mr in mrows:
                rows.append(self.assemble(mr, zb, zc, za))
                rows.append(self.assemble(za, zb, zc, mr))
            scale = mrows if tag == "matrix" else [onei]
            for s in scale:
                rows.extend(self.assemble(za, self.module_act(s, b[None, :], "b")[0], zc, za)
                            for b in eb)
                rows.extend(self.assemble(za, zb, self.module_act(s, c[None, :], "c")[0], za)
                            for c in ec)
        self._radical = FpSubspace(p, self.dim, rows)
        return self._radical

    def rad0(self):
        """Trace-zero part of the radical."""
        if self._rad0 is not None:
            return self._rad0
        rad = self.radical()
        # solve tr = 0 within the radical span
        Tr = np.array([self.trace_vec(v) for v in rad.basis])  # (r, da)
        from .fp import nullspace
        ker = nullspace(Tr.T, self.p)
        rows = (ker @ rad.basis) % self.p
        self._rad0 = FpSubspace(self.p, self.dim, rows)
        return self._rad0

    def in_radical(self, x):
        return self.radical().contains(np.asarray(x))

    def descriptor(self):
        return {"name": self.name, "base": self.A.descriptor(),
                "dimB": self.db, "dimC": self.dc,
                "radical_profile": self.radical_profile()}


def _lift_block(v, off, dim):
    out = np.zeros(dim, dtype=np.int64)
    out[off:off + len(v)] = v
    return out


class GmaElem:
    """Element of a GmaStructure in flat [a | b | c | d] coordinates."""

    __slots__ = ("R", "v")

    def __init__(self, R, v):
        self.R = R
        self.v = np.asarray(v, dtype=np.int64) % R.p
        self.v.setflags(write=False)

    def a(self):
        return RingElem(self.R.A, self.v[self.R.sa])

    def d(self):
        return RingElem(self.R.A, self.v[self.R.sd])

    def b(self):
        return np.array(self.v[self.R.sb])

    def c(self):
        return np.array(self.v[self.R.sc])

    def __mul__(self, other):
        if not isinstance(other, GmaElem) or other.R is not self.R:
            raise StructureMismatch("product of elements of different GMAs")
        return GmaElem(self.R, self.R.mul_vec(self.v, other.v))

    def __add__(self, other):
        return GmaElem(self.R, (self.v + other.v) % self.R.p)

    def __sub__(self, other):
        return GmaElem(self.R, (self.v - other.v) % self.R.p)

    def __neg__(self):
        return GmaElem(self.R, (-self.v) % self.R.p)

    def __pow__(self, e):
        if e < 0:
            return GmaElem(self.R, self.R.inv_vec(self.v)) ** (-e)
        r = GmaElem(self.R, self.R.one)
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def inverse(self):
        return GmaElem(self.R, self.R.inv_vec(self.v))

    def trace(self):
        return RingElem(self.R.A, self.R.trace_vec(self.v))

    def det(self):
        return RingElem(self.R.A, self.R.det_vec(self.v))

    def is_identity(self):
        return np.array_equal(self.v, self.R.one)

    def key(self):
        return self.v.astype(np.int8).tobytes()

    def __eq__(self, other):
        return isinstance(other, GmaElem) and other.R is self.R and np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash((id(self.R), self.v.tobytes()))

    def __repr__(self):
        A = self.R.A
        a, b, c, d = self.R.comps(self.v)
        return (f"[[{A.format_vec(a)}, b{list(map(int, b))}], "
                f"[c{list(map(int, c))}, {A.format_vec(d)}]]")


# -- standard constructions ----------------------------------------------------

def m2_structure(A, name=None):
    """M_2(A): B = C = A with the multiplication pairing."""
    return GmaStructure(A, A.mul_tensor, A.mul_tensor, A.mul_tensor,
                        name=name or f"M2({A.meta.get('kind', 'A')})")


def reduced_residue_gma(A, name=None):
    """Faithful GMA [[A, F_q],[F_q, A]] over a truncated-type local ring:
    B = C = A/m as A-modules, pairing m(b, c) = (b c) * z with z spanning
    the socle power m^(nil-1).  BC sits inside m, so this realizes the
    reduced radical case."""
    if not isinstance(A, LocalRing):
        raise ValueError("local base required")
    f = A.fq.f
    # action of A on A/m through the residue map, in digit coordinates
    act = np.zeros((A.dim, f, f), dtype=np.int64)
    for i in range(A.dim):
        lam = A.residue_digits(np.eye(A.dim, dtype=np.int64)[i])
        code = A.fq.encode(lam)
        for k in range(f):
            prod = A.fq.mul(code, A.fq.encode(_unit(f, k)))
            act[i, k] = A.fq.digits(prod)
    # socle generator: a basis vector of m^(nil-1)
    power = FpSubspace(A.p, A.dim, [A.one])
    for _ in range(A.nilpotency - 1):
        power = FpSubspace(A.p, A.dim,
                           [A.mul_vec(u, v) for u in power.basis for v in A.maxideal.basis])
    if power.dim == 0:
        z = A.one
    else:
        z = power.basis[0]
    pairing = np.zeros((f, f, A.dim), dtype=np.int64)
    for k in range(f):
        for l in range(f):
            prod = A.fq.mul(A.fq.encode(_unit(f, k)), A.fq.encode(_unit(f, l)))
            const = A.constant(prod).v
            pairing[k, l] = A.mul_vec(const, z)
    return GmaStructure(A, act, act, pairing, name=name or "reduced")


def _unit(f, k):
    d = [0] * f
    d[k] = 1
    return tuple(d)


def gma_mul(R, x, y):
    """Product in R; the displayed multiplication rule, bit-exact."""
    if x.R is not R or y.R is not R:
        raise StructureMismatch("elements not over the given structure")
    return x * y


def gma_trace(x):
    return x.trace()


def gma_det(x):
    return x.det()


def is_faithful(R):
    """Non-degeneracy of the pairing: both kernels of m vanish."""
    p = R.p
    if R.db == 0 and R.dc == 0:
        return True
    # left kernel: b with m(b, e_l) = 0 for all l
    Mb = R.pairing.reshape(R.db, R.dc * R.da)
    from .fp import nullspace
    left = nullspace(Mb.T, p)
    Mc = np.swapaxes(R.pairing, 0, 1).reshape(R.dc, R.db * R.da)
    right = nullspace(Mc.T, p)
    return left.shape[0] == 0 and right.shape[0] == 0


def is_cayley_hamilton(R, rng=None, samples=200):
    """x^2 - tr(x) x + det(x) = 0; exhaustive on small structures, else on
    `samples` random elements."""
    total = R.p ** R.dim
    if total <= 4096:
        X = np.indices((R.p,) * R.dim).reshape(R.dim, -1).T % R.p
    else:
        rng = rng or np.random.default_rng(0)
        X = rng.integers(0, R.p, size=(samples, R.dim))
    X2 = R.batch_mul(X, X)
    TR = R.batch_trace(X)
    DET = R.batch_det(X)
    trx = R.batch_mul(_embed_scalar(R, TR), X)
    lhs = (X2 - trx) % R.p
    lhs[:, R.sa] = (lhs[:, R.sa] + DET) % R.p
    lhs[:, R.sd] = (lhs[:, R.sd] + DET) % R.p
    return not lhs.any()


def _embed_scalar(R, T):
    """Rows t -> t*Id in flat coordinates."""
    out = np.zeros((len(T), R.dim), dtype=np.int64)
    out[:, R.sa] = T
    out[:, R.sd] = T
    return out


def in_SR1(R, x):
    """det(x) = 1 and x = Id mod rad R."""
    v = x.v if isinstance(x, GmaElem) else np.asarray(x)
    if not np.array_equal(R.det_vec(v), R.A.one):
        return False
    return R.radical().contains((v - R.one) % R.p)


def batch_in_SR1(R, X):
    X = np.atleast_2d(X)
    det_ok = (R.batch_det(X) == R.A.one).all(axis=1)
    rad = R.radical()
    out = det_ok.copy()
    idx = np.nonzero(det_ok)[0]
    for i in idx:
        out[i] = rad.contains((X[i] - R.one) % R.p)
    return out


def sub_gma_from_group(R, G):
    """The A-span of a matrix group as a sub-GMA (A, B', C').

    Needs a diagonal element of G with residually distinct diagonal
    entries; with it, the idempotents e1, e2 lie in the span and slice it
    into components.  Returns (structure, embed) where embed maps new flat
    coordinates into R's.
    """
    A, p = R.A, R.p
    elems = G.elements if hasattr(G, "elements") else np.array([g.v for g in G])
    found = False
    for v in elems:
        a, b, c, d = R.comps(v)
        if b.any() or c.any():
            continue
        if _residually_distinct(A, a, d):
            found = True
            break
    if not found:
        raise NotAdapted("no diagonal element with residually distinct entries")
    ea = np.eye(A.dim, dtype=np.int64)
    brows, crows = [], []
    for v in elems:
        _, b, c, _ = R.comps(v)
        for i in range(A.dim):
            brows.append(R.module_act(ea[i], b[None, :], "b")[0])
            crows.append(R.module_act(ea[i], c[None, :], "c")[0])
    Bsp = FpSubspace(p, R.db, brows)
    Csp = FpSubspace(p, R.dc, crows)
    # restrict action and pairing to the sub-bases
    act_b = np.zeros((A.dim, Bsp.dim, Bsp.dim), dtype=np.int64)
    act_c = np.zeros((A.dim, Csp.dim, Csp.dim), dtype=np.int64)
    for i in range(A.dim):
        imb = R.module_act(ea[i], Bsp.basis, "b")
        act_b[i] = np.array([Bsp.coords(r) for r in imb])
        imc = R.module_act(ea[i], Csp.basis, "c")
        act_c[i] = np.array([Csp.coords(r) for r in imc])
    pairing = np.zeros((Bsp.dim, Csp.dim, A.dim), dtype=np.int64)
    for k, bb in enumerate(Bsp.basis):
        for l, cc in enumerate(Csp.basis):
            pairing[k, l] = R.pair(bb, cc)
    sub = GmaStructure(A, act_b, act_c, pairing, name=R.name + "_span")
    embed = np.zeros((sub.dim, R.dim), dtype=np.int64)
    embed[sub.sa, R.sa] = np.eye(A.dim, dtype=np.int64)
    embed[sub.sd, R.sd] = np.eye(A.dim, dtype=np.int64)
    if Bsp.dim:
        embed[sub.sb, R.sb] = Bsp.basis
    if Csp.dim:
        embed[sub.sc, R.sc] = Csp.basis
    return sub, embed


def _residually_distinct(A, a, d):
    if isinstance(A, SemiLocalRing):
        return all(
            A.factors[i].residue_int(A.project(a, i)) != A.factors[i].residue_int(A.project(d, i))
            for i in range(len(A.factors))
        )
    return A.residue_int(a) != A.residue_int(d)


def linear_kernel_of_trace(R):
    """Ker(tr, det) of the algebra R itself: for p odd this is the
    radical of the trace pairing {y : tr(yx) = 0 for all x}."""
    from .fp import nullspace
    p = R.p
    E = np.eye(R.dim, dtype=np.int64)
    # y with tr(y e_j) = 0 for all j: rows indexed by (j, trace coord)
    M = np.zeros((R.dim * R.A.dim, R.dim), dtype=np.int64)
    for i in range(R.dim):
        for j in range(R.dim):
            M[j * R.A.dim:(j + 1) * R.A.dim, i] = R.trace_vec(R.mul_vec(E[i], E[j]))
    return FpSubspace(p, R.dim, nullspace(M, p))


def m2_quotient_map(R, ideal_vectors):
    """For R = M2(A) and an ideal J of A: the reduction M2(A) -> M2(A/J).

    Returns (R_quotient, apply) with apply mapping flat coordinate rows.
    """
    from .localring import quotient_ring
    A = R.A
    if R.db != A.dim or R.dc != A.dim:
        raise ValueError("quotient map implemented for the matrix presentation")
    Aq, P = quotient_ring(A, ideal_vectors)
    Rq = m2_structure(Aq, name=R.name + "/J")

    def apply(rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
        blocks = [rows[:, R.sa] @ P.T, rows[:, R.sb] @ P.T,
                  rows[:, R.sc] @ P.T, rows[:, R.sd] @ P.T]
        return np.concatenate(blocks, axis=1) % R.p

    return Rq, apply


def m2_isomorphism(R):
    """For a GMA with BC = A: module trivializations onto A carrying the
    pairing to ring multiplication, i.e. the isomorphism R -> M2(A).

    Returns (phi_b, phi_c): (db, da) and (dc, da) matrices mapping module
    coordinates to ring coordinates.  Raises if BC != A.
    """
    if not R.bc_ideal().contains(R.A.one):
        raise ValueError("BC is a proper ideal; no matrix trivialization")
    A, p = R.A, R.p
    # find b0, c0 with m(b0, c0) = 1 by searching small combinations
    eb = np.eye(R.db, dtype=np.int64)
    ec = np.eye(R.dc, dtype=np.int64)
    cands_b = list(eb)
    cands_c = list(ec)
    for extra in range(min(R.db, 6)):
        cands_b.extend((eb[i] + eb[j]) % p for i in range(R.db) for j in range(i))
        break
    for extra in range(min(R.dc, 6)):
        cands_c.extend((ec[i] + ec[j]) % p for i in range(R.dc) for j in range(i))
        break
    b0 = c0 = None
    for b in cands_b:
        for c in cands_c:
            if A.is_unit_vec(R.pair(b, c)):
                b0, c0 = b, c
                break
        if b0 is not None:
            break
    if b0 is None:
        raise ValueError("no unit pairing value among small combinations")
    u = A.invert_vec(R.pair(b0, c0))
    # phi_b(b) = m(b, c0)·u so that phi_b(b0) = 1; similarly phi_c
    phi_b = np.array([A.mul_vec(R.pair(b, c0), u) for b in eb])
    phi_c = np.array([R.pair(b0, c) for c in ec])
    return phi_b, phi_c
