"""Lie theory for subgroups of SR^1 in a generalized matrix algebra over a
finite local base, via the traceless projection map

    theta(x) = x - (tr x / 2)·Id,

a bijection from SR^1 = {det = 1, x = Id mod rad} onto the traceless part
of the radical, with inverse m -> m + sqrt(1 + tr(m^2)/2)·Id.

The span L of theta(Gamma) is closed under the bracket and under
multiplication by P = tr(L·L); the terms of the descending central series
of Gamma from the second onward coincide with theta^{-1} of the derived
series of L, which is what most of the checks in this module exercise.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fp import FpSubspace, row_key
from .gma import GmaElem, GmaStructure, batch_in_SR1, in_SR1, m2_structure
from .localring import (
    CharacteristicTwo,
    LocalRing,
    OutOfDomain,
    RingElem,
    batch_invert,
    batch_sqrt_one_plus_m,
    hensel_sqrt,
    make_truncated_poly_ring,
)
from .pseudorep import FiniteMatrixGroup, PseudoRep, TooLarge, is_admissible


class NotInSR1(ValueError):
    pass


class NotPinkStable(ValueError):
    pass


class NotWeaklyOdd(ValueError):
    pass


# -- the theta map ---------------------------------------------------------

def theta(R, x):
    """x - (tr x / 2)·Id; restricted to SR^1 a bijection onto (rad R)^0."""
    if R.p == 2:
        raise CharacteristicTwo("theta needs p odd")
    v = x.v if isinstance(x, GmaElem) else np.asarray(x, dtype=np.int64) % R.p
    return GmaElem(R, batch_theta(R, v[None, :])[0])


def batch_theta(R, X):
    p = R.p
    X = np.atleast_2d(X) % p
    inv2 = pow(2, -1, p)
    TR = (R.batch_trace(X) * inv2) % p
    out = X.copy()
    out[:, R.sa] = (out[:, R.sa] - TR) % p
    out[:, R.sd] = (out[:, R.sd] - TR) % p
    return out


def theta_inv(R, m):
    """Inverse of theta on traceless radical elements: lands in SR^1."""
    v = m.v if isinstance(m, GmaElem) else np.asarray(m, dtype=np.int64) % R.p
    if R.trace_vec(v).any():
        raise OutOfDomain("theta_inv needs a traceless argument")
    if not R.in_radical(v):
        raise OutOfDomain("theta_inv needs a radical argument")
    return GmaElem(R, batch_theta_inv(R, v[None, :])[0])


def batch_theta_inv(R, M):
    p = R.p
    M = np.atleast_2d(M) % p
    inv2 = pow(2, -1, p)
    M2 = R.batch_mul(M, M)
    lam2 = (R.A.one + R.batch_trace(M2) * inv2) % p   # 1 + tr(m^2)/2 in 1+m
    lam = batch_sqrt_one_plus_m(R.A, lam2)
    out = M.copy()
    out[:, R.sa] = (out[:, R.sa] + lam) % p
    out[:, R.sd] = (out[:, R.sd] + lam) % p
    return out


def generate_group(R, gens, cap=2 * 10 ** 6):
    """BFS closure of invertible generators inside R*."""
    return FiniteMatrixGroup.generate(R, gens, cap=cap)


# -- Lie data ---------------------------------------------------------------

class LieSubspace:
    """F_p-subspace of (rad R)^0 with a row-reduced basis."""

    def __init__(self, R, vectors=(), check=True):
        self.R = R
        self.space = vectors if isinstance(vectors, FpSubspace) else FpSubspace(R.p, R.dim, vectors)
        if check:
            rad0 = R.rad0()
            for row in self.space.basis:
                if not rad0.contains(row):
                    raise ValueError("vector outside the traceless radical")

    @property
    def dim(self):
        return self.space.dim

    @property
    def basis(self):
        return self.space.basis

    def contains(self, v):
        return self.space.contains(v if not isinstance(v, GmaElem) else v.v)

    def enumerate(self, cap=None):
        return self.space.enumerate(cap=cap)

    def bracket_closed(self):
        for i, u in enumerate(self.basis):
            for v in self.basis[i + 1:]:
                if not self.contains(bracket(self.R, u, v)):
                    return False, (u, v)
        return True, None

    def trace_pseudoring(self):
        """P = tr(L·L) as a subspace of A."""
        R = self.R
        rows = [R.trace_vec(R.mul_vec(u, v)) for u in self.basis for v in self.basis]
        return FpSubspace(R.p, R.A.dim, rows)

    def stable_under(self, P):
        """P·L <= L for a subspace P of A."""
        R = self.R
        for t in P.basis:
            for v in self.basis:
                if not self.contains(R.ring_scale(t, v[None, :])[0]):
                    return False, (t, v)
        return True, None

    def __eq__(self, other):
        return isinstance(other, LieSubspace) and self.R is other.R and self.space == other.space

    def __hash__(self):
        return hash((id(self.R), self.space))

    def __repr__(self):
        return f"LieSubspace(dim {self.dim} in {self.R.name})"


def bracket(R, u, v):
    return (R.mul_vec(u, v) - R.mul_vec(v, u)) % R.p


def lie_of_subgroup(G):
    """Pink Lie algebra of a subgroup of SR^1: the span of theta(Gamma)."""
    R = G.R
    mask = batch_in_SR1(R, G.elements)
    if not mask.all():
        raise NotInSR1("group has an element outside SR^1")
    return LieSubspace(R, batch_theta(R, G.elements))


def descending_series(L, n_max):
    """[L_1, ..., L_n] with L_{k+1} = [L_k, L]."""
    out = [L]
    R = L.R
    for _ in range(n_max - 1):
        prev = out[-1]
        rows = [bracket(R, u, v) for u in prev.basis for v in L.basis]
        out.append(LieSubspace(R, rows, check=False))
    return out


def group_series(G, n_max):
    """[Gamma_1, ..., Gamma_n] with Gamma_{k+1} = (Gamma_k, Gamma)."""
    T = G.mul_table()
    inv = G.inverses()
    levels = [np.arange(G.n)]
    for _ in range(n_max - 1):
        prev = levels[-1]
        comm = T[T[np.ix_(prev, np.arange(G.n))], inv[T[np.ix_(np.arange(G.n), prev)].T]]
        gens = np.unique(comm)
        levels.append(_index_closure(T, G.id_index, gens))
    groups = [G]
    for idxs in levels[1:]:
        groups.append(FiniteMatrixGroup(G.R, G.elements[idxs]))
    return groups


def _index_closure(T, identity, gens):
    seen = {int(identity)}
    seen.update(int(g) for g in gens)
    frontier = np.array(sorted(seen), dtype=np.int64)
    gens = np.array(sorted(set(int(g) for g in gens)), dtype=np.int64)
    while frontier.size:
        prods = T[np.ix_(frontier, gens)].ravel()
        new = [int(v) for v in np.unique(prods) if int(v) not in seen]
        seen.update(new)
        frontier = np.array(new, dtype=np.int64)
    return np.array(sorted(seen), dtype=np.int64)


def pink_converse(L, cap=10 ** 6, rng=None, closure_samples=3000):
    """H = theta^{-1}(L) as a group, provided [L, L] <= L and tr(L·L)·L <= L.

    Both hypotheses are verified exactly on basis tuples; they make H
    closed under products and inverses, which is additionally spot-checked
    on a seeded sample.  Returns (H, P)."""
    ok, wit = L.bracket_closed()
    if not ok:
        raise NotPinkStable(f"bracket closure fails at {wit}")
    P = L.trace_pseudoring()
    ok, wit = L.stable_under(P)
    if not ok:
        raise NotPinkStable(f"tr(L·L)·L <= L fails at {wit}")
    R = L.R
    members = L.enumerate(cap=cap)
    H_rows = batch_theta_inv(R, members)
    H = FiniteMatrixGroup(R, H_rows, closure_verified=False)
    rng = rng or np.random.default_rng(0)
    n = len(H_rows)
    take = min(closure_samples, n * n)
    I = rng.integers(0, n, size=take)
    Jx = rng.integers(0, n, size=take)
    prods = R.batch_mul(H_rows[I], H_rows[Jx])
    back = batch_theta(R, prods)
    for row in back:
        if not L.contains(row):
            raise NotPinkStable("sampled product left theta^{-1}(L)")
    H.closure_verified = True
    return H, P


def star_law(R, x, y):
    """x * y = x·sqrt(1 + tr(y^2)/2) + y·sqrt(1 + tr(x^2)/2) on L."""
    p = R.p
    inv2 = pow(2, -1, p)
    xv = x if not isinstance(x, GmaElem) else x.v
    yv = y if not isinstance(y, GmaElem) else y.v
    sx = hensel_sqrt(R.A, (R.A.one + R.trace_vec(R.mul_vec(xv, xv)) * inv2) % p).v
    sy = hensel_sqrt(R.A, (R.A.one + R.trace_vec(R.mul_vec(yv, yv)) * inv2) % p).v
    return (R.ring_scale(sy, xv[None, :])[0] + R.ring_scale(sx, yv[None, :])[0]) % p


def _star_scalars(R, M):
    """sqrt(1 + tr(m^2)/2) for each row, as ring vectors."""
    p = R.p
    inv2 = pow(2, -1, p)
    M2 = R.batch_mul(M, M)
    return batch_sqrt_one_plus_m(R.A, (R.A.one + R.batch_trace(M2) * inv2) % p)


def _batch_star(R, X, Y):
    """Row-wise star products x_i * y_i via precomputed scalar factors."""
    SX = _star_scalars(R, X)
    SY = _star_scalars(R, Y)
    return (R.batch_mul(_scal(R, SY), X) + R.batch_mul(_scal(R, SX), Y)) % R.p


def star_quotient_checks(L, L2, cap=3 ** 9):
    """The star law is a commutative group law on L/L_2, and theta is a
    morphism Gamma/Gamma_2 -> (L/L_2, *).  Exhaustive on coset reps."""
    R = L.R
    reps = _coset_reps(L, L2, cap=cap)
    n = reps.shape[0]

    def red_rows(M):
        return np.array([_reduce_mod(L2, v) for v in M])

    zero = np.zeros((n, R.dim), dtype=np.int64)
    if not np.array_equal(red_rows(_batch_star(R, reps, zero)), red_rows(reps)):
        return False, ("identity", None)
    # commutativity and the first associativity leg on all pairs
    I, Jx = np.repeat(np.arange(n), n), np.tile(np.arange(n), n)
    XY = _batch_star(R, reps[I], reps[Jx])
    YX = _batch_star(R, reps[Jx], reps[I])
    if not np.array_equal(red_rows(XY), red_rows(YX)):
        return False, ("commutativity", None)
    XY_red = red_rows(XY).reshape(n, n, R.dim)
    # associativity on all triples: star(red(x*y), z) vs star(x, red(y*z))
    Ti = np.repeat(np.arange(n * n), n)
    Tk = np.tile(np.arange(n), n * n)
    left = _batch_star(R, XY_red.reshape(n * n, R.dim)[Ti], reps[Tk])
    Yi = np.repeat(np.arange(n), n * n)
    YZ_flat = XY_red.reshape(n * n, R.dim)       # reuse: red(y*z) over pairs
    right = _batch_star(R, reps[Yi], np.tile(YZ_flat, (n, 1))[: n * n * n])
    if not np.array_equal(red_rows(left), red_rows(right)):
        return False, ("associativity", None)
    return True, None


def _coset_reps(L, L2, cap):
    quot_dim = L.dim - L2.dim
    if L.R.p ** quot_dim > cap:
        raise TooLarge("quotient too large for exhaustive star checks")
    # complement of L2 in L: basis members not reducible to L2
    comp = []
    cur = L2.space
    for v in L.basis:
        if not cur.contains(v):
            comp.append(v)
            cur = cur.extend([v])
    comp = np.array(comp, dtype=np.int64).reshape(-1, L.R.dim)
    if comp.shape[0] == 0:
        return np.zeros((1, L.R.dim), dtype=np.int64)
    digits = np.indices((L.R.p,) * comp.shape[0]).reshape(comp.shape[0], -1).T
    return (digits @ comp) % L.R.p


def _reduce_mod(L2, v):
    return L2.space.reduce(v)


def theta_star_morphism_check(G, L, L2, rng=None, samples=300):
    """theta(gamma·gamma') = theta(gamma) * theta(gamma') mod L_2."""
    R = G.R
    rng = rng or np.random.default_rng(0)
    I = rng.integers(0, G.n, size=samples)
    Jx = rng.integers(0, G.n, size=samples)
    lhs = batch_theta(R, R.batch_mul(G.elements[I], G.elements[Jx]))
    rhs = _batch_star(R, batch_theta(R, G.elements[I]), batch_theta(R, G.elements[Jx]))
    for k in range(samples):
        if not np.array_equal(_reduce_mod(L2, lhs[k]), _reduce_mod(L2, rhs[k])):
            return False, (int(I[k]), int(Jx[k]))
    return True, None


# -- decomposition ----------------------------------------------------------

@dataclass
class Decomposition:
    decomposable: bool
    strongly: bool
    delta: FpSubspace = None      # diagonal part of L
    nabla: FpSubspace = None      # antidiagonal part of L
    I1: FpSubspace = None         # a-components of delta (delta = I1·J)
    B1: FpSubspace = None         # b-components of nabla
    C1: FpSubspace = None         # c-components of nabla
    witness: object = None


def decompose(L):
    """Split L into diagonal and antidiagonal parts when possible, and
    extract (I1, B1, C1)."""
    R = L.R
    p = R.p
    diag_rows, anti_rows = [], []
    for v in L.basis:
        dv = v.copy()
        dv[R.sb] = 0
        dv[R.sc] = 0
        if not L.contains(dv):
            return Decomposition(False, False, witness=v)
        diag_rows.append(dv)
        anti_rows.append((v - dv) % p)
    delta = FpSubspace(p, R.dim, diag_rows)
    nabla = FpSubspace(p, R.dim, anti_rows)
    I1 = FpSubspace(p, R.A.dim, [row[R.sa] for row in delta.basis])
    B1 = FpSubspace(p, R.db, [row[R.sb] for row in nabla.basis])
    C1 = FpSubspace(p, R.dc, [row[R.sc] for row in nabla.basis])
    strongly = True
    for v in nabla.basis:
        bv = v.copy()
        bv[R.sc] = 0
        if not L.contains(bv):
            strongly = False
            break
    return Decomposition(True, strongly, delta, nabla, I1, B1, C1)


def is_strongly_decomposable(L):
    d = decompose(L)
    return (d.decomposable and d.strongly), d.I1, d.B1, d.C1


def a_subspace_product(A, U, V):
    rows = [A.mul_vec(u, v) for u in U.basis for v in V.basis]
    return FpSubspace(A.p, A.dim, rows)


def trace_nabla_squared(R, nabla):
    rows = [R.trace_vec(R.mul_vec(u, v)) for u in nabla.basis for v in nabla.basis]
    return FpSubspace(R.p, R.A.dim, rows)


def decomposable_condition_report(L, dec=None):
    """The five closure conditions a decomposable L = I1·J + nabla must
    satisfy to be the Lie algebra of a subgroup of SR^1."""
    R = L.R
    A = R.A
    dec = dec or decompose(L)
    if not dec.decomposable:
        return {"decomposable": False}
    I1, nabla = dec.I1, dec.nabla
    rep = {"decomposable": True}
    rep["bracket_nabla_nabla_in_I1J"] = all(
        _in_I1J(R, I1, bracket(R, u, v))
        for u in nabla.basis for v in nabla.basis
    )
    rep["I1_bracket_J_nabla_in_nabla"] = all(
        nabla.contains(R.ring_scale(a, bracket(R, R.J, v)[None, :])[0])
        for a in I1.basis for v in nabla.basis
    )
    trn2 = trace_nabla_squared(R, nabla)
    rep["trace_nabla2_I1_in_I1"] = all(
        I1.contains(A.mul_vec(t, a)) for t in trn2.basis for a in I1.basis
    )
    rep["trace_nabla2_nabla_in_nabla"] = all(
        nabla.contains(R.ring_scale(t, v[None, :])[0])
        for t in trn2.basis for v in nabla.basis
    )
    I1sq = a_subspace_product(A, I1, I1)
    I1cube = a_subspace_product(A, I1sq, I1)
    rep["I1_cubed_in_I1"] = all(I1.contains(v) for v in I1cube.basis)
    return rep


def _in_I1J(R, I1, v):
    return (not v[R.sb].any()) and (not v[R.sc].any()) and I1.contains(v[R.sa])


def strong_condition_report(L, dec=None):
    """Closure conditions in the strongly decomposable presentation."""
    R = L.R
    A = R.A
    dec = dec or decompose(L)
    if not (dec.decomposable and dec.strongly):
        return {"strongly_decomposable": False}
    I1, B1, C1 = dec.I1, dec.B1, dec.C1
    rep = {"strongly_decomposable": True}
    bc = FpSubspace(R.p, A.dim, [R.pair(b, c) for b in B1.basis for c in C1.basis])
    rep["B1C1_in_I1"] = all(I1.contains(v) for v in bc.basis)
    rep["I1B1_in_B1"] = all(
        B1.contains(R.module_act(a, b[None, :], "b")[0]) for a in I1.basis for b in B1.basis
    )
    rep["I1C1_in_C1"] = all(
        C1.contains(R.module_act(a, c[None, :], "c")[0]) for a in I1.basis for c in C1.basis
    )
    I1sq = a_subspace_product(A, I1, I1)
    I1cube = a_subspace_product(A, I1sq, I1)
    rep["I1_cubed_in_I1"] = all(I1.contains(v) for v in I1cube.basis)
    return rep


def f_span(A, sub):
    """Span of a subspace of A over the embedded residue field."""
    rows = []
    consts = A.constants()
    for lam in consts:
        for v in sub.basis:
            rows.append(A.mul_vec(lam, v))
    return FpSubspace(A.p, A.dim, rows) if rows else FpSubspace(A.p, A.dim)


def fq_module_span(R, sub, which, Aq_consts):
    """Span of a module subspace over a set of constants of A."""
    rows = []
    for lam in Aq_consts:
        for v in sub.basis:
            rows.append(R.module_act(lam, v[None, :], which)[0])
    n = R.db if which == "b" else R.dc
    return FpSubspace(R.p, n, rows) if rows else FpSubspace(R.p, n)


# -- structure theorems: forward checks and converse constructions -----------

STRUCTURE_CLASSES = ("order2", "cyclic", "klein", "dihedral", "large")


def subfield_constants(A, d):
    """Constants of the degree-d subfield of the residue field."""
    fq = A.fq
    if fq.f % d:
        raise ValueError("not a subfield degree")
    qd = A.p ** d
    out = []
    for lam in range(fq.q):
        if fq.pow(lam, qd) == lam:
            out.append(A.constant(lam).v)
    return np.array(out, dtype=np.int64)


def sub_span(A, sub, consts):
    rows = [A.mul_vec(lam, v) for lam in consts for v in sub.basis]
    return FpSubspace(A.p, A.dim, rows) if rows else FpSubspace(A.p, A.dim)


def check_structure_theorem(cls_kind, G, L=None, subfield_degree=None):
    """Forward shape check: the Lie algebra of a well-adapted instance has
    the closure and span properties its class dictates.  Returns a report
    dict naming each condition; the caller decides pass/fail."""
    R = G.R
    A = R.A
    if L is None:
        gamma_idx = G.subgroup_sr1()
        Gamma = FiniteMatrixGroup(R, G.elements[gamma_idx])
        L = lie_of_subgroup(Gamma)
    dec = decompose(L)
    rep = {"class": cls_kind, "dim_L": L.dim}
    full_module_B = FpSubspace(R.p, R.db, np.eye(R.db, dtype=np.int64))
    full_module_C = FpSubspace(R.p, R.dc, np.eye(R.dc, dtype=np.int64))
    if cls_kind == "order2":
        rep.update(decomposable_condition_report(L, dec))
        if not dec.decomposable:
            return rep
        trn2 = trace_nabla_squared(R, dec.nabla)
        one_sp = FpSubspace(A.p, A.dim, [A.one])
        I1sq = a_subspace_product(A, dec.I1, dec.I1)
        span = f_span(A, one_sp.sum(dec.I1).sum(I1sq).sum(trn2))
        rep["span_1_I1_I1sq_trn2_is_A"] = span.dim == A.dim
        rep["A_B1_is_B"] = _a_module_span(R, dec.B1, "b") == full_module_B
        rep["A_C1_is_C"] = _a_module_span(R, dec.C1, "c") == full_module_C
        return rep
    if cls_kind in ("cyclic", "dihedral", "large"):
        d = subfield_degree or A.fq.f
        consts = subfield_constants(A, d)
        LQ = LieSubspace(R, [R.ring_scale(lam, v[None, :])[0]
                             for lam in consts for v in L.basis], check=False)
        decq = decompose(LQ)
        rep["WFq_L_strongly_decomposable"] = bool(decq.decomposable and decq.strongly)
        if not rep["WFq_L_strongly_decomposable"]:
            return rep
        I1t, B1t, C1t = decq.I1, decq.B1, decq.C1
        rep.update({f"strong_{k}": v for k, v in strong_condition_report(LQ, decq).items()})
        one_sp = FpSubspace(A.p, A.dim, [A.one])
        I1bar = f_span(A, I1t)
        I1sq = a_subspace_product(A, I1t, I1t)
        if cls_kind == "cyclic":
            rep["span_1_I1_I1sq_is_A"] = f_span(A, one_sp.sum(I1t).sum(I1sq)).dim == A.dim
            rep["F_B1_is_B"] = fq_module_span(R, B1t, "b", A.constants()) == full_module_B
            rep["F_C1_is_C"] = fq_module_span(R, C1t, "c", A.constants()) == full_module_C
        elif cls_kind == "dihedral":
            rep["B1_equals_C1"] = B1t == C1t
            span = one_sp.sum(I1t).sum(I1sq)
            bspan = FpSubspace(A.p, A.dim, B1t.basis) if R.db == A.dim else None
            if bspan is not None:
                span = span.sum(bspan)
            rep["span_1_I1_I1sq_B1_is_A"] = f_span(A, span).dim == A.dim
        else:  # large
            rep["B1_equals_I1"] = (R.db == A.dim and B1t == I1t)
            rep["C1_equals_I1"] = (R.dc == A.dim and C1t == I1t)
            I1sq2 = a_subspace_product(A, I1t, I1t)
            rep["I1_squared_in_I1"] = all(I1t.contains(v) for v in I1sq2.basis)
            rep["F_I1_is_m"] = f_span(A, I1t) == FpSubspace(A.p, A.dim, A.maxideal.basis)
        return rep
    if cls_kind == "klein":
        rep.update(decomposable_condition_report(L, dec))
        if not dec.decomposable:
            return rep
        lam_ok = None
        for lam in range(1, A.p):
            if _nabla_swap_invariant(R, dec.nabla, lam):
                lam_ok = lam
                break
        rep["nabla_swap_invariant"] = lam_ok is not None
        rep["swap_lambda"] = lam_ok
        trn2 = trace_nabla_squared(R, dec.nabla)
        one_sp = FpSubspace(A.p, A.dim, [A.one])
        I1sq = a_subspace_product(A, dec.I1, dec.I1)
        span = one_sp.sum(dec.I1).sum(I1sq).sum(trn2)
        if R.db == A.dim:
            span = span.sum(FpSubspace(A.p, A.dim, dec.B1.basis))
        rep["span_with_B1_is_A"] = f_span(A, span).dim == A.dim
        return rep
    raise ValueError(f"unknown structure class {cls_kind}")


def _a_module_span(R, sub, which):
    n = R.db if which == "b" else R.dc
    rows = [R.module_act(e, v[None, :], which)[0]
            for e in np.eye(R.A.dim, dtype=np.int64) for v in sub.basis]
    return FpSubspace(R.p, n, rows) if rows else FpSubspace(R.p, n)


def _nabla_swap_invariant(R, nabla, lam):
    """nabla stable under (b, c) -> (lam·c, b); needs B = C = A."""
    if R.db != R.A.dim or R.dc != R.A.dim:
        return False
    for v in nabla.basis:
        w = np.zeros(R.dim, dtype=np.int64)
        w[R.sb] = (lam * v[R.sc]) % R.p
        w[R.sc] = v[R.sb]
        if not nabla.contains(w):
            return False
    return True


def build_group_from_lie(cls_kind, R, lie_vectors, gbar_constants, cap=10 ** 6):
    """Converse construction: G = theta^{-1}(L)·s(Gbar).

    `gbar_constants` is a list of flat constant matrices (entries in the
    embedded residue field) forming a subgroup of R* that normalizes L.
    Returns (G, Gamma, tr) with tr the induced pseudo-representation.
    """
    L = LieSubspace(R, lie_vectors)
    Gamma, P = pink_converse(L, cap=cap)
    p = R.p
    consts = [np.asarray(v, dtype=np.int64) % p for v in gbar_constants]
    # the constant subgroup must normalize L
    for s in consts:
        sinv = R.inv_vec(s)
        for v in L.basis:
            conj = R.mul_vec(s, R.mul_vec(v, sinv))
            if not L.contains(conj):
                raise NotPinkStable("constant subgroup does not normalize L")
    rows = []
    seen = set()
    for s in consts:
        prods = R.batch_mul_elem(Gamma.elements, s)
        for v in prods:
            k = row_key(v)
            if k not in seen:
                seen.add(k)
                rows.append(v)
    G = FiniteMatrixGroup(R, np.array(rows), closure_verified=False)
    if not G.verify_closure():
        raise NotPinkStable("Gamma·s(Gbar) is not closed")
    G.closure_verified = True
    tr = PseudoRep.from_matrix_group(G)
    return G, Gamma, tr


def structure_round_trip(cls_kind, R, lie_vectors, gbar_constants, cap=10 ** 6):
    """Build the group from Lie data, recompute its Lie algebra, and check
    admissibility plus exact recovery of the input."""
    G, Gamma, tr = build_group_from_lie(cls_kind, R, lie_vectors, gbar_constants, cap=cap)
    L_in = LieSubspace(R, lie_vectors)
    gamma_idx = G.subgroup_sr1()
    Gamma2 = FiniteMatrixGroup(R, G.elements[gamma_idx])
    L_out = lie_of_subgroup(Gamma2)
    return {
        "lie_recovered": L_out == L_in,
        "admissible": is_admissible(tr),
        "group_order": G.n,
        "gamma_order": Gamma2.n,
        "G": G,
        "tr": tr,
        "L": L_out,
    }


# -- congruence subgroups ----------------------------------------------------

def principal_ideal(A, x):
    rows = [A.mul_vec(x, e) for e in np.eye(A.dim, dtype=np.int64)]
    return FpSubspace(A.p, A.dim, rows)


def candidate_ideals(A, cap=64):
    """Nonzero ideals to test for the congruence property.

    Truncated polynomial rings: exactly the (X^j), an exhaustive list.
    Otherwise: principal ideals of all elements, deduplicated, capped.
    """
    out = []
    if A.meta.get("kind") == "truncated_poly":
        f, k = A.fq_block
        for j in range(1, k):
            xj = np.zeros(A.dim, dtype=np.int64)
            xj[j * f] = 1
            name = "(X)" if j == 1 else f"(X^{j})"
            out.append((name, principal_ideal(A, xj)))
        return out, True
    seen = set()
    for vec in A.elements(cap=10 ** 5):
        if not vec.any():
            continue
        I = principal_ideal(A, vec)
        key = (I.dim, I.basis.tobytes())
        if key in seen or I.dim == 0:
            continue
        seen.add(key)
        out.append((f"({A.format_vec(vec)})", I))
        if len(out) >= cap:
            break
    return out, False


def congruence_lie_block(R, I):
    """theta of the principal congruence subgroup of I: traceless matrices
    with diagonal in I, b in I·B, c in I·C."""
    rows = []
    zb = np.zeros(R.db, dtype=np.int64)
    zc = np.zeros(R.dc, dtype=np.int64)
    for a in I.basis:
        rows.append(R.assemble(a, zb, zc, (-a) % R.p))
    za = np.zeros(R.A.dim, dtype=np.int64)
    for a in I.basis:
        for e in np.eye(R.db, dtype=np.int64):
            rows.append(R.assemble(za, R.module_act(a, e[None, :], "b")[0], zc, za))
        for e in np.eye(R.dc, dtype=np.int64):
            rows.append(R.assemble(za, zb, R.module_act(a, e[None, :], "c")[0], za))
    return FpSubspace(R.p, R.dim, rows)


def is_congruence_subgroup(L, R=None, ideal_cap=64):
    """(flag, witness): L contains the congruence block of some nonzero
    ideal.  Exhaustive over (X^j) for truncated bases."""
    R = R or L.R
    cands, exhaustive = candidate_ideals(R.A, cap=ideal_cap)
    for name, I in cands:
        block = congruence_lie_block(R, I)
        if all(L.contains(v) for v in block.basis):
            return True, name
    return False, None if exhaustive else "search capped"


def compute_A0(L):
    """A_0 = F_p·1 + I_1 + I_1^2 for decomposable L; verified to be a ring."""
    R = L.R
    A = R.A
    dec = decompose(L)
    if not dec.decomposable:
        raise ValueError("A_0 needs a decomposable L")
    one_sp = FpSubspace(A.p, A.dim, [A.one])
    I1sq = a_subspace_product(A, dec.I1, dec.I1)
    A0 = one_sp.sum(dec.I1).sum(I1sq)
    closed = all(A0.contains(A.mul_vec(u, v)) for u in A0.basis for v in A0.basis)
    return A0, closed


# -- the essential submodule and the measure bound ----------------------------

@dataclass
class EssentialData:
    S_indices: list
    A_ess: FpSubspace
    weakly_odd: bool
    I2: FpSubspace = None


def unit_squares(A, cap=10 ** 6):
    """Set of keys of squares of units of A."""
    vecs = A.elements(cap=cap)
    if isinstance(A, LocalRing):
        units = vecs[(vecs @ A.proj.T % A.p).any(axis=1)]
    else:
        units = np.array([v for v in vecs if A.is_unit_vec(v)])
    sq = A.batch_mul(units, units)
    return {row_key(v) for v in sq}


def essential_data(G, L2=None, squares=None):
    """S = {g : tr g = 0, -det g a unit square};
    A_ess = F-span of tr(g·L_2) over g in S."""
    R = G.R
    A = R.A
    p = R.p
    if L2 is None:
        gamma_idx = G.subgroup_sr1()
        Gamma = FiniteMatrixGroup(R, G.elements[gamma_idx])
        L = lie_of_subgroup(Gamma)
        L2 = descending_series(L, 2)[1]
    squares = squares if squares is not None else unit_squares(A)
    TR = R.batch_trace(G.elements)
    DET = R.batch_det(G.elements)
    S = [i for i in range(G.n)
         if not TR[i].any() and row_key((-DET[i]) % p) in squares]
    rows = []
    consts = A.constants()
    for i in S:
        for v in L2.basis:
            t = R.trace_vec(R.mul_vec(G.elements[i], v))
            rows.extend(A.batch_mul_elem(consts, t))
    A_ess = FpSubspace(p, A.dim, np.array(rows).reshape(-1, A.dim)) if rows \
        else FpSubspace(p, A.dim)
    dec = decompose(L2) if L2.dim else None
    I2 = dec.I1 if dec and dec.decomposable else None
    return EssentialData(S_indices=S, A_ess=A_ess, weakly_odd=bool(S), I2=I2)


@dataclass
class MeasureReport:
    bound: Fraction
    min_measure: Fraction
    n_forms: int
    passed: bool
    vacuous: bool = False


def key_measure_check(G, A_ess):
    """For every F-linear form l on A nonzero somewhere on A_ess, the exact
    counting measure of {g : l(tr g) != 0} is at least (p-1)/(p·|Gbar|).

    The quantifier runs over the full finite dual space, not a sample.
    """
    R = G.R
    A = R.A
    p = A.p
    gamma_count = len(G.subgroup_sr1())
    nbar = G.n // gamma_count
    bound = Fraction(p - 1, p * nbar)
    if A_ess.dim == 0:
        return MeasureReport(bound=bound, min_measure=Fraction(1), n_forms=0,
                             passed=True, vacuous=True)
    TR = R.batch_trace(G.elements)          # (n, dimA)
    if isinstance(A, LocalRing) and A.fq.f == 1:
        # F = F_p: forms are plain dual vectors
        forms = A.elements(cap=10 ** 6)      # all w in F_p^dim
        forms = forms[1:]                    # drop zero form
        on_ess = (A_ess.basis @ forms.T) % p  # (dim_ess, n_forms)
        keep = on_ess.any(axis=0)
        forms = forms[keep]
        vals = TR @ forms.T % p              # (n, n_forms)
        counts = (vals != 0).sum(axis=0)
        mm = Fraction(int(counts.min()), G.n)
        return MeasureReport(bound=bound, min_measure=mm,
                             n_forms=int(forms.shape[0]), passed=mm >= bound)
    # general residue field: F_q-linear forms via the block coordinates
    if A.fq_block is None:
        raise ValueError("F_q-linear forms need a block layout")
    f, k = A.fq_block
    fq = A.fq
    tr_coords = np.array([A.fq_coords(t) for t in TR], dtype=np.int64)  # (n, k)
    ess_coords = np.array([A.fq_coords(v) for v in A_ess.basis], dtype=np.int64)
    mt = fq.mul_table
    min_count = None
    n_forms = 0
    for w in _tuples(fq.q, k):
        if not any(w):
            continue
        ess_vals = _fq_form_apply(mt, fq, ess_coords, w)
        if not ess_vals.any():
            continue
        n_forms += 1
        vals = _fq_form_apply(mt, fq, tr_coords, w)
        cnt = int((vals != 0).sum())
        if min_count is None or cnt < min_count:
            min_count = cnt
    mm = Fraction(min_count, G.n)
    return MeasureReport(bound=bound, min_measure=mm, n_forms=n_forms, passed=mm >= bound)


def _tuples(q, k):
    idx = np.indices((q,) * k).reshape(k, -1).T
    return [tuple(int(v) for v in row) for row in idx]


def _fq_form_apply(mul_table, fq, coords, w):
    """sum_j w_j·x_j in F_q for rows of F_q-coordinates, via digit sums."""
    n = coords.shape[0]
    acc = np.zeros((n, fq.f), dtype=np.int64)
    for j, wj in enumerate(w):
        if wj == 0:
            continue
        prods = mul_table[coords[:, j], wj]
        digs = np.array([fq.digits(int(v)) for v in prods], dtype=np.int64)
        acc = (acc + digs) % fq.p
    return np.array([fq.encode(row) for row in acc], dtype=np.int64)


def measure_change_psi(R, L, L2, gamma, cap=10 ** 5):
    """The change of variables Psi(m) = m + sigma(m) on L_2, with

        sigma(m) = (sqrt(1 + tr(m^2)/2) - 1)·(tr(J·gamma)/tr(gamma))·J,

    and h(m) = tr(J·gamma·theta^{-1}(m)).  Verifies on the finite instance
    that Psi permutes L_2, that h∘Psi^{-1} is affine, and that the image of
    h is tr(J·gamma) + I_2."""
    A = R.A
    p = R.p
    gv = gamma.v if isinstance(gamma, GmaElem) else np.asarray(gamma) % p
    trg = R.trace_vec(gv)
    if not A.is_unit_vec(trg):
        raise OutOfDomain("tr(gamma) must be a unit")
    trJg = R.trace_vec(R.mul_vec(R.J, gv))
    coef = A.mul_vec(trJg, A.invert_vec(trg))
    members = L2.enumerate(cap=cap)
    inv2 = pow(2, -1, p)
    M2 = R.batch_mul(members, members)
    lam2 = (A.one + R.batch_trace(M2) * inv2) % p
    lam = batch_sqrt_one_plus_m(A, lam2)
    sig_scal = A.batch_mul_elem((lam - A.one) % p, coef)   # (n, dimA)
    psi = members.copy()
    psi[:, R.sa] = (psi[:, R.sa] + sig_scal) % p
    psi[:, R.sd] = (psi[:, R.sd] - sig_scal) % p
    # sigma lands in L2, so Psi maps L2 to itself; bijectivity by key count
    keys = {row_key(v) for v in psi}
    member_keys = {row_key(v) for v in members}
    bijective = keys == member_keys
    # h values
    Jg = R.mul_vec(R.J, gv)
    th_inv = batch_theta_inv(R, members)
    h = R.batch_trace(R.batch_mul(np.tile(Jg, (len(members), 1)), th_inv))
    # h(Psi^{-1}(m)) = tr(J gamma) + tr(J gamma m): affine with linear part known
    psi_index = {row_key(v): i for i, v in enumerate(psi)}
    h_of_psi_inv = np.empty_like(h)
    for i, v in enumerate(members):
        h_of_psi_inv[i] = h[psi_index[row_key(v)]]
    lin = R.batch_trace(R.batch_mul(np.tile(Jg, (len(members), 1)), members))
    affine_ok = np.array_equal(h_of_psi_inv, (trJg + lin) % p)
    # image of h = trJg + I2
    dec2 = decompose(LieSubspace(R, L2.basis, check=False))
    I2 = dec2.I1 if dec2.decomposable else None
    image_keys = {row_key(v) for v in h}
    if I2 is not None:
        expected = {row_key((trJg + v) % p) for v in I2.enumerate(cap=cap)}
        image_ok = image_keys == expected
    else:
        image_ok = None
    return {"bijective": bijective, "affine": affine_ok, "image_matches_trJg_plus_I2": image_ok}


# -- the two-generator example over F_q[X]/(X^k) ------------------------------

@dataclass
class TwoGeneratorExample:
    ring: LocalRing
    R: GmaStructure
    g: GmaElem
    h: GmaElem
    Gamma: FiniteMatrixGroup
    G: FiniteMatrixGroup
    L: LieSubspace
    L_expected: LieSubspace
    L_matches: bool
    relations_ok: bool
    essential: EssentialData = None
    congruence: tuple = None

    def dims(self, n_max=4):
        return [Lk.dim for Lk in descending_series(self.L, n_max)]


def expected_example_lie(R, A):
    """Span of {X^j·J : j odd} and {antidiag(X^j, (-1)^j X^j)}: traceless
    matrices with odd diagonal and antidiagonal parts b(X) = c(-X)."""
    f, k = A.fq_block
    rows = []
    zb = np.zeros(R.db, dtype=np.int64)
    zc = np.zeros(R.dc, dtype=np.int64)
    za = np.zeros(A.dim, dtype=np.int64)
    for j in range(1, k):
        xj = np.zeros(A.dim, dtype=np.int64)
        xj[j * f] = 1
        if j % 2 == 1:
            rows.append(R.assemble(xj, zb, zc, (-xj) % R.p))
        sign = 1 if j % 2 == 0 else -1
        rows.append(R.assemble(za, xj, (sign * xj) % R.p, za))
    return LieSubspace(R, rows, check=False)


def example8(p, k, cap=2 * 10 ** 6, with_essential=True, with_congruence=True):
    """The two-generator subgroup of SL_2^1(F_p[X]/(X^k)) generated by

        g = diag(X + sqrt(1+X^2), -X + sqrt(1+X^2)),
        h = [[sqrt(1-X^2), X], [-X, sqrt(1-X^2)]],

    together with G = Gamma ∪ J·Gamma, its Lie algebra, essential data and
    congruence status."""
    if p == 2:
        raise CharacteristicTwo("the example needs p odd")
    A = make_truncated_poly_ring(p, k)
    R = m2_structure(A)
    X = np.zeros(A.dim, dtype=np.int64)
    if k > 1:
        X[1] = 1
    one = A.one
    zero = np.zeros(A.dim, dtype=np.int64)
    X2 = A.mul_vec(X, X)
    s1 = hensel_sqrt(A, (one + X2) % p).v
    s2 = hensel_sqrt(A, (one - X2) % p).v
    g = R.elem((X + s1) % p, zero, zero, ((-X) % p + s1) % p)
    h = R.elem(s2, X, (-X) % p, s2)
    J = R.j_elem()
    rel_ok = (J * g * J == g) and (J * h * J == h.inverse())
    Gamma = generate_group(R, [g, h], cap=cap)
    G = generate_group(R, [g, h, J], cap=cap)
    L = lie_of_subgroup(Gamma)
    L_exp = expected_example_lie(R, A)
    ex = TwoGeneratorExample(
        ring=A, R=R, g=g, h=h, Gamma=Gamma, G=G, L=L, L_expected=L_exp,
        L_matches=(L == L_exp), relations_ok=bool(rel_ok),
    )
    if with_essential:
        series = descending_series(L, 2)
        ex.essential = essential_data(G, L2=series[1])
    if with_congruence:
        ex.congruence = is_congruence_subgroup(L, R)
    return ex


def essential_not_ideal_witness(A, A_ess):
    """(x, a) with x in A_ess, a in A, a·x outside A_ess, or None."""
    for x in A_ess.basis:
        for i in range(A.dim):
            a = np.eye(A.dim, dtype=np.int64)[i]
            prod = A.mul_vec(a, x)
            if not A_ess.contains(prod):
                return x, a
    # basis elements may not witness; sweep products of all members
    for x in A_ess.enumerate(cap=10 ** 5):
        if not x.any():
            continue
        for a in A.elements(cap=10 ** 5):
            if not A_ess.contains(A.mul_vec(a, x)):
                return x, a
    return None


# -- identity battery ---------------------------------------------------------

def random_elements(R, rng, n):
    return rng.integers(0, R.p, size=(n, R.dim))


def random_rad0(R, rng, n):
    basis = R.rad0().basis
    co = rng.integers(0, R.p, size=(n, basis.shape[0]))
    return (co @ basis) % R.p


def random_sr(R, rng, n):
    """Determinant-one elements: theta^{-1} of radical tracefree elements,
    twisted by constant diagonal matrices of determinant one."""
    core = batch_theta_inv(R, random_rad0(R, rng, n))
    A = R.A
    q = A.fq.q
    lams = rng.integers(1, q, size=n)
    out = np.empty_like(core)
    for i in range(n):
        lam = int(lams[i])
        s = A.constant(lam).v
        sinv = A.constant(A.fq.inv(lam)).v
        const = R.assemble(s, np.zeros(R.db, dtype=np.int64),
                           np.zeros(R.dc, dtype=np.int64), sinv)
        out[i] = R.mul_vec(core[i], const)
    return out


def pink_formula_battery(R, rng=None, n=1000, theta_fn=None):
    """The six theta/trace identities, each on n random tuples.

    Returns {name: violation_count}; every count must be zero.  `theta_fn`
    exists as a fault-injection hook for the verification driver.
    """
    rng = rng or np.random.default_rng(0)
    th = theta_fn or (lambda X: batch_theta(R, X))
    p = R.p
    A = R.A
    inv2 = pow(2, -1, p)
    X = random_elements(R, rng, n)
    Y = random_elements(R, rng, n)
    out = {}

    TX, TY = th(X), th(Y)
    lhs = (R.batch_mul(TX, TY) - R.batch_mul(TY, TX)) % p
    rhs = (th(R.batch_mul(X, Y)) - th(R.batch_mul(Y, X))) % p
    out["theta_bracket"] = int((lhs != rhs).any(axis=1).sum())

    S = random_sr(R, rng, n)
    TS, trS = th(S), R.batch_trace(S)
    lhs = R.batch_mul(_scal(R, trS), TY)
    rhs = (th(R.batch_mul(S, Y)) + th(R.batch_mul(R.batch_inv(S), Y))) % p
    out["trace_times_theta"] = int((lhs != rhs).any(axis=1).sum())

    trX, trY = R.batch_trace(X), R.batch_trace(Y)
    lhs = (2 * th(R.batch_mul(X, Y))) % p
    rhs = (R.batch_mul(TX, TY) - R.batch_mul(TY, TX)
           + R.batch_mul(_scal(R, trX), TY) + R.batch_mul(_scal(R, trY), TX)) % p
    out["theta_of_product"] = int((lhs != rhs).any(axis=1).sum())

    lhs = R.batch_trace(R.batch_mul(TX, TY))
    rhs = (R.batch_trace(R.batch_mul(X, Y))
           - A.batch_mul(trX, trY) * inv2) % p
    out["trace_of_theta_product"] = int((lhs != rhs).any(axis=1).sum())

    lhs = th(R.batch_inv(S))
    out["theta_of_inverse"] = int((lhs != (-TS) % p).any(axis=1).sum())

    Xr = random_rad0(R, rng, n)
    Yr = random_rad0(R, rng, n)
    Ur = random_rad0(R, rng, n)
    Vr = random_rad0(R, rng, n)
    br = lambda u, v: (R.batch_mul(u, v) - R.batch_mul(v, u)) % p
    uv = br(Ur, Vr)
    lhs = R.batch_mul(_scal(R, (4 * R.batch_trace(R.batch_mul(Xr, Yr))) % p), uv)
    rhs = (br(Yr, br(Xr, uv)) + br(Xr, br(Yr, uv))
           + br(br(Xr, Vr), br(Yr, Ur)) + br(br(Yr, Vr), br(Xr, Ur))) % p
    out["quadruple_bracket"] = int((lhs != rhs).any(axis=1).sum())
    return out


def _scal(R, T):
    out = np.zeros((T.shape[0], R.dim), dtype=np.int64)
    out[:, R.sa] = T
    out[:, R.sd] = T
    return out
