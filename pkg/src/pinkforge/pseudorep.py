"""Two-dimensional pseudo-representations of finite groups over a finite
local base: the trace/determinant axioms, kernels, the extension (T, D) to
the group algebra, reconstruction of a matrix realization inside a
generalized matrix algebra, residual classification, and the admissibility
and adaptedness predicates used by the Lie-theoretic layer.
"""

from dataclasses import dataclass, field

import numpy as np

from .fp import FpSubspace, nullspace, row_key
from .gma import GmaElem, GmaStructure, NotAdapted, batch_in_SR1
from .localring import LocalRing, RingElem, SemiLocalRing


class NotMultFree(ValueError):
    pass


class TooLarge(RuntimeError):
    pass


ALGEBRA_QUOTIENT_CAP = 10 ** 4  # |group| bound for A[G]/Ker constructions


class FiniteMatrixGroup:
    """Explicit finite subgroup of R* for a GmaStructure R.

    Elements are rows of an (n, dim) array; products, inverses and the full
    multiplication table are computed through R and cached.
    """

    def __init__(self, R, elements, generators=None, closure_verified=True):
        self.R = R
        self.elements = np.atleast_2d(np.asarray(elements, dtype=np.int64)) % R.p
        self.n = self.elements.shape[0]
        self.index = {row_key(self.elements[i]): i for i in range(self.n)}
        if len(self.index) != self.n:
            raise ValueError("duplicate elements")
        self.id_index = self.index.get(row_key(R.one))
        if self.id_index is None:
            raise ValueError("identity missing")
        self.generators = list(generators) if generators is not None else []
        self.closure_verified = closure_verified
        self._inv = None
        self._table = None

    @classmethod
    def generate(cls, R, gens, cap=2 * 10 ** 6):
        """BFS closure of the generators under multiplication."""
        gvecs = [g.v if isinstance(g, GmaElem) else np.asarray(g, dtype=np.int64) % R.p
                 for g in gens]
        for g in gvecs:
            if not R.is_unit(g):
                raise ValueError("generator is not invertible")
        gall = gvecs + [R.inv_vec(g) for g in gvecs]
        seen = {row_key(R.one)}
        rows = [R.one]
        frontier = np.array([R.one])
        while frontier.size:
            new = []
            for g in gall:
                prods = R.batch_mul_elem(frontier, g)
                for v in prods:
                    k = row_key(v)
                    if k not in seen:
                        seen.add(k)
                        new.append(v)
                        if len(seen) > cap:
                            raise TooLarge(f"group exceeds cap {cap}")
            rows.extend(new)
            frontier = np.array(new) if new else np.empty((0, R.dim), dtype=np.int64)
        return cls(R, np.array(rows), generators=gvecs)

    def elem(self, i):
        return GmaElem(self.R, self.elements[i])

    def __iter__(self):
        return (self.elem(i) for i in range(self.n))

    def __len__(self):
        return self.n

    def lookup(self, v):
        if isinstance(v, GmaElem):
            v = v.v
        return self.index.get(row_key(np.asarray(v, dtype=np.int64) % self.R.p))

    def inverses(self):
        if self._inv is None:
            self._inv = np.array([self.lookup(self.R.inv_vec(v)) for v in self.elements])
            if any(i is None for i in self._inv):
                raise ValueError("group not closed under inverse")
        return self._inv

    def mul_table(self):
        """(n, n) index table; rows i: products x_i * x_j."""
        if self._table is None:
            T = np.empty((self.n, self.n), dtype=np.int32)
            for i in range(self.n):
                prods = self.R.batch_mul_elem_left(self.elements[i], self.elements)
                for j in range(self.n):
                    k = self.index.get(row_key(prods[j]))
                    if k is None:
                        raise ValueError("group not closed under multiplication")
                    T[i, j] = k
            self._table = T
        return self._table

    def verify_closure(self, rng=None, samples=2000):
        """Spot-check closure on generator products plus a seeded sample."""
        rng = rng or np.random.default_rng(0)
        pairs = [(i, j) for i in range(min(self.n, 30)) for j in range(min(self.n, 30))]
        if self.n > 30:
            extra = rng.integers(0, self.n, size=(samples, 2))
            pairs += [tuple(t) for t in extra]
        for i, j in pairs:
            v = self.R.mul_vec(self.elements[i], self.elements[j])
            if row_key(v) not in self.index:
                return False
        return True

    def traces(self):
        return self.R.batch_trace(self.elements)

    def dets(self):
        return self.R.batch_det(self.elements)

    def subgroup_sr1(self):
        """Indices of G ∩ SR^1."""
        mask = batch_in_SR1(self.R, self.elements)
        return np.nonzero(mask)[0]


@dataclass
class GroupTable:
    """Abstract finite group: multiplication table, inverse map, identity."""

    table: np.ndarray
    identity: int
    labels: list = None

    def __post_init__(self):
        self.n = self.table.shape[0]
        inv = np.full(self.n, -1, dtype=np.int64)
        for i in range(self.n):
            hits = np.nonzero(self.table[i] == self.identity)[0]
            if hits.size != 1 and inv[i] < 0:
                if hits.size == 0:
                    raise ValueError("element without inverse")
            inv[i] = hits[0]
        self.inv = inv

    @classmethod
    def from_matrix_group(cls, G):
        return cls(table=np.asarray(G.mul_table(), dtype=np.int64), identity=G.id_index)

    def commutator_subgroup(self):
        T, inv = self.table, self.inv
        comms = set()
        for x in range(self.n):
            xy = T[x]
            yx = T[:, x]
            c = T[xy, inv[yx]]
            comms.update(int(v) for v in c)
        return _closure_indices(self, comms)

    def abelianization(self):
        """(class map, class count) for G / [G, G]."""
        H = self.commutator_subgroup()
        return _coset_classes(self, H)


def _closure_indices(gt, seed):
    seed = set(seed) | {gt.identity}
    frontier = list(seed)
    while frontier:
        nxt = []
        for x in frontier:
            for y in list(seed):
                for z in (int(gt.table[x, y]), int(gt.table[y, x])):
                    if z not in seed:
                        seed.add(z)
                        nxt.append(z)
        frontier = nxt
    return sorted(seed)


def _coset_classes(gt, subgroup_indices):
    sub = set(subgroup_indices)
    cls = np.full(gt.n, -1, dtype=np.int64)
    reps = []
    for i in range(gt.n):
        if cls[i] >= 0:
            continue
        c = len(reps)
        reps.append(i)
        for h in sub:
            cls[gt.table[i, h]] = c
    return cls, len(reps)


class PseudoRep:
    """Pair of maps (t, d) on a finite group with values in a finite
    F_p-algebra, held as (n, dimA) coefficient arrays."""

    def __init__(self, A, gt, t_vals, d_vals, matrix_group=None):
        self.A = A
        self._gt = gt
        self.t = np.atleast_2d(np.asarray(t_vals, dtype=np.int64)) % A.p
        self.d = np.atleast_2d(np.asarray(d_vals, dtype=np.int64)) % A.p
        n = gt.n if gt is not None else matrix_group.n
        if self.t.shape != (n, A.dim) or self.d.shape != (n, A.dim):
            raise ValueError("value table shape mismatch")
        self.matrix_group = matrix_group

    @property
    def gt(self):
        # multiplication tables are quadratic in the group order; build only
        # when an axiom-level operation actually needs one
        if self._gt is None:
            self._gt = GroupTable.from_matrix_group(self.matrix_group)
        return self._gt

    @classmethod
    def from_matrix_group(cls, G, build_table=False):
        gt = GroupTable.from_matrix_group(G) if build_table else None
        return cls(G.R.A, gt, G.traces(), G.dets(), matrix_group=G)

    def t_elem(self, i):
        return RingElem(self.A, self.t[i])

    def d_elem(self, i):
        return RingElem(self.A, self.d[i])

    def residual_t(self, i):
        return self.A.residue_int(self.t[i])

    def residual_d(self, i):
        return self.A.residue_int(self.d[i])

    def has_constant_det(self):
        consts = {row_key(r) for r in self.A.constants()}
        return all(row_key(r) in consts for r in self.d)

    def to_dict(self):
        """JSON-ready value table: base descriptor plus t and d rows."""
        return {
            "ring": self.A.descriptor(),
            "order": self.t.shape[0],
            "t": self.t.tolist(),
            "d": self.d.tolist(),
        }


def check_axioms(tr):
    """(ok, witness): d multiplicative into units, t central, t(1) = 2, and
    t(xy) + d(y) t(x y^-1) = t(x) t(y) on all pairs."""
    A, gt = tr.A, tr.gt
    p = A.p
    T = gt.table
    if not np.array_equal(tr.t[gt.identity], (2 * A.one) % p):
        return False, ("t(1) != 2", gt.identity)
    for i in range(gt.n):
        if not A.is_unit_vec(tr.d[i]):
            return False, ("d value not a unit", i)
    n = gt.n
    for x in range(n):
        # centrality t(xy) = t(yx)
        if not np.array_equal(tr.t[T[x]], tr.t[T[:, x]]):
            y = int(np.nonzero((tr.t[T[x]] != tr.t[T[:, x]]).any(axis=1))[0][0])
            return False, ("t not central", (x, y))
        # d(xy) = d(x) d(y)
        dx_dy = A.batch_mul_elem(tr.d, tr.d[x])
        if not np.array_equal(tr.d[T[x]], dx_dy):
            y = int(np.nonzero((tr.d[T[x]] != dx_dy).any(axis=1))[0][0])
            return False, ("d not multiplicative", (x, y))
        # trace relation against all y
        t_xy = tr.t[T[x]]
        t_xyinv = tr.t[T[x, gt.inv]]
        lhs = (t_xy + A.batch_mul(tr.d, t_xyinv)) % p
        rhs = A.batch_mul_elem(tr.t, tr.t[x])
        if not np.array_equal(lhs, rhs):
            y = int(np.nonzero((lhs != rhs).any(axis=1))[0][0])
            return False, ("trace relation fails", (x, y))
    return True, None


def kernel(tr):
    """Indices of ker(t, d) = {y : t(xy) = t(x) for all x}; the condition
    on d is implied when p is odd and checked explicitly when p = 2."""
    A, gt = tr.A, tr.gt
    T = gt.table
    out = []
    one = A.one
    for y in range(gt.n):
        if not np.array_equal(tr.t[T[:, y]], tr.t):
            continue
        if A.p == 2 and not np.array_equal(tr.d[y], one):
            continue
        out.append(y)
    return out


def is_normal(gt, indices):
    s = set(indices)
    return all(int(gt.table[gt.table[g, h], gt.inv[g]]) in s
               for g in range(gt.n) for h in indices)


def extend_to_algebra(tr, coeffs):
    """(T, D) of an element sum_g coeffs[g]·g of A[G].

    T is the A-linear extension of t.  D is the unique quadratic form with
    polarization f(x, y) = T(x)T(y) - T(xy) agreeing with d on group
    elements: D(sum c_g g) = sum c_g^2 d(g) + sum_{g<h} c_g c_h f(g, h).
    """
    A, gt = tr.A, tr.gt
    p = A.p
    C = np.atleast_2d(np.asarray(coeffs, dtype=np.int64)) % p
    if C.shape != (gt.n, A.dim):
        raise ValueError("coefficient table shape mismatch")
    Tval = np.zeros(A.dim, dtype=np.int64)
    for g in range(gt.n):
        if C[g].any():
            Tval = (Tval + A.mul_vec(C[g], tr.t[g])) % p
    Dval = np.zeros(A.dim, dtype=np.int64)
    support = [g for g in range(gt.n) if C[g].any()]
    for gi, g in enumerate(support):
        cg2 = A.mul_vec(C[g], C[g])
        Dval = (Dval + A.mul_vec(cg2, tr.d[g])) % p
        for h in support[gi + 1:]:
            f_gh = (A.mul_vec(tr.t[g], tr.t[h]) - tr.t[gt.table[g, h]]) % p
            Dval = (Dval + A.mul_vec(A.mul_vec(C[g], C[h]), f_gh)) % p
    return RingElem(A, Tval), RingElem(A, Dval)


def _trace_relation_matrix(tr):
    """Matrix of y -> (T(y g))_g on flat A[G] coordinates over F_p."""
    A, gt = tr.A, tr.gt
    p = A.p
    n, da = gt.n, A.dim
    # block (g, h): coefficient c_h e_i contributes e_i * t(h g) to T(y g)
    M = np.zeros((n * da, n * da), dtype=np.int64)
    for h in range(n):
        for g in range(n):
            t_hg = tr.t[gt.table[h, g]]
            # multiplication by basis vector e_i
            blk = np.array([A.mul_vec(np.eye(da, dtype=np.int64)[i], t_hg)
                            for i in range(da)]).T % p
            M[g * da:(g + 1) * da, h * da:(h + 1) * da] = blk
    return M


def linear_kernel(tr):
    """F_p-basis of Ker(T, D) inside A[G] (flat (n*dimA)-coordinates).

    For p odd, D vanishes automatically where all T(yx) do, since
    2 D(y) = T(y)^2 - T(y^2); for p = 2 the D condition is an additional
    F_2-linear constraint and is intersected in.
    """
    A, gt = tr.A, tr.gt
    p = A.p
    M = _trace_relation_matrix(tr)
    K = nullspace(M, p)
    if p == 2 and K.shape[0]:
        rows = []
        for v in K:
            _, Dv = extend_to_algebra(tr, v.reshape(gt.n, A.dim))
            rows.append(Dv.v)
        K2 = nullspace(np.array(rows).T, 2)
        K = (K2 @ K) % 2
    return FpSubspace(p, gt.n * A.dim, K)


@dataclass
class ResidualClass:
    """Row of the projective-image classification table."""

    kind: str          # 'cyclic' | 'dihedral' | 'large' | 'exceptional'
    order: int         # order of the projective image
    detail: str = ""   # e.g. 'PGL2(3)', 'A4', 'n=2'

    def tag(self):
        if self.kind == "cyclic":
            return "CyclicOrder2" if self.order == 2 else f"CyclicOrderN({self.order})"
        if self.kind == "dihedral":
            return "DihedralOrder4" if self.order == 4 else f"DihedralN({self.order})"
        if self.kind == "large":
            return f"LargeImage({self.detail})"
        return f"Exceptional({self.detail})"


def classify_projective_image(Gbar):
    """Classification of a finite subgroup of GL_2(F_q) by its image in
    PGL_2: cyclic Z/n, dihedral D_n, PSL_2/PGL_2 of a subfield, or
    A4/S4/A5.  Input: FiniteMatrixGroup over a field (m = 0)."""
    R = Gbar.R
    A = R.A
    if not isinstance(A, LocalRing) or A.maxideal.dim != 0:
        raise ValueError("classification expects a group over a field")
    p, q, f = A.p, A.fq.q, A.fq.f
    # scalar subgroup
    scal = [i for i in range(Gbar.n)
            if not Gbar.elements[i][R.sb].any() and not Gbar.elements[i][R.sc].any()
            and np.array_equal(Gbar.elements[i][R.sa], Gbar.elements[i][R.sd])]
    gt = GroupTable.from_matrix_group(Gbar)
    cls, ncls = _coset_classes(gt, scal)
    # projective multiplication table on coset classes
    reps = [int(np.nonzero(cls == c)[0][0]) for c in range(ncls)]
    ptab = np.array([[cls[gt.table[a, b]] for b in reps] for a in reps], dtype=np.int64)
    pid = int(cls[gt.identity])
    pgt = GroupTable(table=ptab, identity=pid)
    n = ncls
    orders = _element_orders(pgt)
    if max(orders) == n:
        return ResidualClass("cyclic", n, "n=2" if n == 2 else f"n={n}")
    if _is_dihedral(pgt, orders):
        return ResidualClass("dihedral", n)
    # Dickson: remaining subgroups of PGL_2 are PSL_2/PGL_2 of subfields or
    # A4, S4, A5; order plus the earlier exclusions identifies the class.
    for d in range(1, f + 1):
        if f % d:
            continue
        qd = p ** d
        if n == qd * (qd * qd - 1):
            return ResidualClass("large", n, f"PGL2({qd})")
        if p > 2 and n == qd * (qd * qd - 1) // 2:
            return ResidualClass("large", n, f"PSL2({qd})")
    for name, size in (("A4", 12), ("S4", 24), ("A5", 60)):
        if n == size:
            return ResidualClass("exceptional", n, name)
    raise NotMultFree(f"projective image of order {n} outside the classification")


def _element_orders(gt):
    orders = []
    for i in range(gt.n):
        o, x = 1, i
        while x != gt.identity:
            x = int(gt.table[x, i])
            o += 1
        orders.append(o)
    return orders


def _is_dihedral(gt, orders):
    n = gt.n
    if n % 2 or n < 4:
        return False
    half = n // 2
    cands = [i for i, o in enumerate(orders) if o == half]
    if half == 2:
        # Klein four-group counts as the order-4 dihedral
        return all(o <= 2 for o in orders)
    for x in cands:
        cyc = {gt.identity}
        y = x
        while y != gt.identity:
            cyc.add(y)
            y = int(gt.table[y, x])
        xinv = gt.inv[x]
        for y in range(n):
            if y in cyc or orders[y] != 2:
                continue
            if int(gt.table[gt.table[y, x], gt.inv[y]]) == xinv:
                return True
    return False



def _fq_add(fq, a, b):
    da = np.array(fq.digits(a), dtype=np.int64)
    db = np.array(fq.digits(b), dtype=np.int64)
    return fq.encode((da + db) % fq.p)


def _character_pairs(gt, fq, tbar, dbar):
    """Characters chi1, chi2 : G -> F_q* with chi1 + chi2 = tbar and
    chi1·chi2 = dbar, or None.  Candidate values at each element are the
    roots of x^2 - tbar·x + dbar; a depth-first search with product
    propagation glues them into a homomorphism."""
    cand = []
    for i in range(gt.n):
        roots = [x for x in range(1, fq.q)
                 if _fq_add(fq, fq.mul(x, x), dbar[i]) == fq.mul(tbar[i], x)]
        if not roots:
            return None
        cand.append(roots)
    if 1 not in cand[gt.identity]:
        return None
    chi = {gt.identity: 1}

    def propagate():
        changed = True
        while changed:
            changed = False
            known = list(chi.items())
            for i, vi in known:
                for j, vj in known:
                    k = int(gt.table[i, j])
                    val = fq.mul(vi, vj)
                    if k in chi:
                        if chi[k] != val:
                            return False
                    elif val not in cand[k]:
                        return False
                    else:
                        chi[k] = val
                        changed = True
        return True

    def dfs():
        if not propagate():
            return False
        rest = [i for i in range(gt.n) if i not in chi]
        if not rest:
            return True
        i = rest[0]
        for val in cand[i]:
            saved = dict(chi)
            chi[i] = val
            if dfs():
                return True
            chi.clear()
            chi.update(saved)
        return False

    if not dfs():
        return None
    chi1 = [chi[i] for i in range(gt.n)]
    chi2 = [fq.mul(dbar[i], fq.inv(chi1[i])) for i in range(gt.n)]
    return chi1, chi2


def _character_order(fq, values):
    n = 1
    cur = list(values)
    while any(v != 1 for v in cur):
        cur = [fq.mul(a, b) for a, b in zip(cur, values)]
        n += 1
        if n > fq.q:
            raise ArithmeticError("values do not define a character")
    return n


def residual_multfree_data(tr):
    """('reducible', (chi1, chi2)) or ('irreducible', None) for a residually
    multiplicity-free pseudo-representation; NotMultFree otherwise.

    Reducibility is decided by exhaustive character search over the finite
    group; the irreducible case is confirmed by the residual faithful
    quotient having F-dimension 4 (it is then the full 2x2 matrix algebra).
    """
    A, gt = tr.A, tr.gt
    fq = A.fq
    tbar = [tr.residual_t(i) for i in range(gt.n)]
    dbar = [tr.residual_d(i) for i in range(gt.n)]
    chars = _character_pairs(gt, fq, tbar, dbar)
    if chars is not None:
        chi1, chi2 = chars
        if chi1 == chi2:
            raise NotMultFree("residual representation is twice one character")
        return "reducible", chars
    # residual quotient dimension over F
    from .localring import make_truncated_poly_ring
    Fq_ring = make_truncated_poly_ring(fq.q, 1)
    trows = np.array([Fq_ring.fq.digits(v) for v in tbar], dtype=np.int64)
    drows = np.array([Fq_ring.fq.digits(v) for v in dbar], dtype=np.int64)
    res_tr = PseudoRep(Fq_ring, tr.gt, trows, drows)
    ker = linear_kernel(res_tr)
    dimF = (gt.n * fq.f - ker.dim) // fq.f
    if dimF == 4:
        return "irreducible", None
    raise NotMultFree(f"residual faithful quotient has F-dimension {dimF}")


def residual_eigendata(tr, g):
    """Distinct residual eigenvalues (lam, mu) of g, or None.

    Roots of x^2 - tbar(g) x + dbar(g) over F_q; requires the discriminant
    to be a nonzero square."""
    fq = tr.A.fq
    tb, db = tr.residual_t(g), tr.residual_d(g)
    roots = [x for x in range(fq.q) if _fq_add(fq, fq.mul(x, x), db) == fq.mul(tb, x)]
    roots = sorted(set(roots))
    if len(roots) == 2:
        return roots[0], roots[1]
    return None


class QuotientAlgebra:
    """A[G]/Ker(T, D) with multiplication induced from the group algebra."""

    def __init__(self, tr):
        A, gt = tr.A, tr.gt
        self.tr = tr
        self.A = A
        self.p = A.p
        self.N = gt.n * A.dim
        self.ker = linear_kernel(tr)
        piv = set(self.ker.pivots)
        self.comp = [i for i in range(self.N) if i not in piv]
        self.dim = len(self.comp)
        self.lift = np.zeros((self.dim, self.N), dtype=np.int64)
        for a, c in enumerate(self.comp):
            self.lift[a, c] = 1
        # projection N -> dim coordinates modulo the kernel
        P = np.zeros((self.dim, self.N), dtype=np.int64)
        E = np.eye(self.N, dtype=np.int64)
        for i in range(self.N):
            P[:, i] = self.ker.reduce(E[i])[self.comp]
        self.proj = P

    def class_of_group_elem(self, g):
        v = np.zeros(self.N, dtype=np.int64)
        da = self.A.dim
        v[g * da:(g + 1) * da] = self.A.one
        return self.proj @ v % self.p

    def group_alg_mul(self, x, y):
        """Product in A[G] on flat coordinates."""
        A, gt = self.A, self.tr.gt
        da = A.dim
        out = np.zeros(self.N, dtype=np.int64)
        xs = [g for g in range(gt.n) if x[g * da:(g + 1) * da].any()]
        ys = [h for h in range(gt.n) if y[h * da:(h + 1) * da].any()]
        for g in xs:
            cg = x[g * da:(g + 1) * da]
            for h in ys:
                ch = y[h * da:(h + 1) * da]
                k = int(gt.table[g, h])
                out[k * da:(k + 1) * da] = (out[k * da:(k + 1) * da] + A.mul_vec(cg, ch)) % self.p
        return out

    def mul(self, x, y):
        full = self.group_alg_mul(self.lift.T @ x % self.p, self.lift.T @ y % self.p)
        return self.proj @ full % self.p

    def scalar_embed(self, a_vec):
        """a·1 for a ring vector a."""
        v = np.zeros(self.N, dtype=np.int64)
        da = self.A.dim
        g1 = self.tr.gt.identity
        v[g1 * da:(g1 + 1) * da] = a_vec
        return self.proj @ v % self.p

    def T_of(self, x):
        Tv, _ = extend_to_algebra(self.tr, (self.lift.T @ x % self.p).reshape(self.tr.gt.n, self.A.dim))
        return Tv

    def D_of(self, x):
        _, Dv = extend_to_algebra(self.tr, (self.lift.T @ x % self.p).reshape(self.tr.gt.n, self.A.dim))
        return Dv


def build_td_representation(tr, g0=None, lam0=None, mu0=None):
    """Faithful GMA realization of an abstract pseudo-representation.

    Returns (R, G, rho_indices, embed_data): R the GmaStructure built on
    A[G]/Ker(T, D) via idempotent lifting at g0, G the image matrix group,
    rho_indices mapping group elements to rows of G.elements.

    Requires residual multiplicity-freeness and an element g0 with distinct
    residual eigenvalues (the first in enumeration order when omitted).
    """
    A, gt = tr.A, tr.gt
    p = A.p
    if gt.n > ALGEBRA_QUOTIENT_CAP:
        raise TooLarge(f"group of order {gt.n} exceeds the algebra-quotient cap")
    residual_multfree_data(tr)  # raises NotMultFree when violated
    if g0 is None:
        for g in range(gt.n):
            eig = residual_eigendata(tr, g)
            if eig is not None:
                g0, (lam0, mu0) = g, eig
                break
        else:
            raise NotAdapted("no element with distinct residual eigenvalues")
    else:
        eig = residual_eigendata(tr, g0)
        if eig is None:
            raise NotAdapted("g0 has no distinct residual eigenvalues")
        if lam0 is None:
            lam0, mu0 = eig
        elif {lam0, mu0} != set(eig):
            raise NotAdapted("prescribed eigenvalues disagree with g0")

    Q = QuotientAlgebra(tr)
    x0 = Q.class_of_group_elem(g0)
    s_lam = A.constant(lam0).v
    s_mu = A.constant(mu0).v
    diff_inv = A.invert_vec((s_lam - s_mu) % p)
    one_R = Q.scalar_embed(A.one)
    u = Q.mul(Q.scalar_embed(diff_inv), (x0 - Q.scalar_embed(s_mu)) % p)
    # idempotent refinement e <- 3e^2 - 2e^3; the defect u^2 - u is
    # nilpotent, so this stabilizes
    e = u
    for _ in range(8 * A.dim + 8):
        e2 = Q.mul(e, e)
        if np.array_equal(e2, e):
            break
        e = (3 * e2 - 2 * Q.mul(e2, e)) % p
    else:
        raise ArithmeticError("idempotent refinement did not stabilize")
    e1, e2c = e, (one_R - e) % p

    # split the quotient into e1·R·e1 (= A·e1), B' = e1·R·e2, C' = e2·R·e1
    E = np.eye(Q.dim, dtype=np.int64)
    def sandwich(lft, rgt):
        rows = [Q.mul(lft, Q.mul(E[i], rgt)) for i in range(Q.dim)]
        return FpSubspace(p, Q.dim, rows)
    Bsp = sandwich(e1, e2c)
    Csp = sandwich(e2c, e1)
    Asp = sandwich(e1, e1)
    Dsp = sandwich(e2c, e2c)
    if Asp.dim != A.dim or Dsp.dim != A.dim:
        raise ArithmeticError("corner components are not free of rank one")

    # coordinates: a = coefficient of x in A·e1, via a -> a·e1 linear solve
    a_to_corner = np.array([Q.mul(Q.scalar_embed(np.eye(A.dim, dtype=np.int64)[i]), e1)
                            for i in range(A.dim)]).T
    d_to_corner = np.array([Q.mul(Q.scalar_embed(np.eye(A.dim, dtype=np.int64)[i]), e2c)
                            for i in range(A.dim)]).T
    from .fp import solve as fp_solve

    def corner_coords(x, M):
        sol = fp_solve(M, x, p)
        if sol is None:
            raise ArithmeticError("corner element outside A·e")
        return sol

    # module data for the new GMA
    act_b = np.zeros((A.dim, Bsp.dim, Bsp.dim), dtype=np.int64)
    act_c = np.zeros((A.dim, Csp.dim, Csp.dim), dtype=np.int64)
    for i in range(A.dim):
        ai = Q.scalar_embed(np.eye(A.dim, dtype=np.int64)[i])
        for k, bb in enumerate(Bsp.basis):
            act_b[i, k] = Bsp.coords(Q.mul(ai, bb))
        for k, cc in enumerate(Csp.basis):
            act_c[i, k] = Csp.coords(Q.mul(ai, cc))
    pairing = np.zeros((Bsp.dim, Csp.dim, A.dim), dtype=np.int64)
    for k, bb in enumerate(Bsp.basis):
        for l, cc in enumerate(Csp.basis):
            pairing[k, l] = corner_coords(Q.mul(bb, cc), a_to_corner)
    R = GmaStructure(A, act_b, act_c, pairing, name="A[G]/Ker")

    def to_gma(x):
        a = corner_coords(Q.mul(e1, Q.mul(x, e1)), a_to_corner)
        d = corner_coords(Q.mul(e2c, Q.mul(x, e2c)), d_to_corner)
        b = Bsp.coords(Q.mul(e1, Q.mul(x, e2c)))
        c = Csp.coords(Q.mul(e2c, Q.mul(x, e1)))
        if b is None or c is None:
            raise ArithmeticError("element does not split along the idempotents")
        return R.assemble(a, b, c, d)

    rows = [to_gma(Q.class_of_group_elem(g)) for g in range(gt.n)]
    uniq, rho_idx = [], []
    index = {}
    for v in rows:
        k = row_key(v)
        if k not in index:
            index[k] = len(uniq)
            uniq.append(v)
        rho_idx.append(index[k])
    G = FiniteMatrixGroup(R, np.array(uniq))
    # contract checks of the construction
    for g in range(gt.n):
        v = G.elements[rho_idx[g]]
        if not np.array_equal(R.trace_vec(v), tr.t[g]) or not np.array_equal(R.det_vec(v), tr.d[g]):
            raise ArithmeticError("trace/determinant mismatch in the realization")
    v0 = G.elements[rho_idx[g0]]
    if v0[R.sb].any() or v0[R.sc].any():
        raise ArithmeticError("image of g0 is not diagonal")
    if A.residue_int(v0[R.sa]) != lam0 or A.residue_int(v0[R.sd]) != mu0:
        raise ArithmeticError("residual eigenvalues out of order")
    return R, G, rho_idx, {"g0": g0, "lam0": lam0, "mu0": mu0}


def is_admissible(tr):
    """F-module criterion: the span of t(G) over the embedded residue field
    equals A.  Valid for p odd with constant determinant."""
    A = tr.A
    if A.p == 2:
        raise ValueError("admissibility criterion needs p odd")
    if not tr.has_constant_det():
        return False
    consts = A.constants()
    rows = []
    for lam in consts:
        rows.extend(A.batch_mul_elem(tr.t, lam))
    sp = FpSubspace(A.p, A.dim, np.array(rows).reshape(-1, A.dim))
    return sp.dim == A.dim


def trace_f_span(tr):
    A = tr.A
    rows = []
    for lam in A.constants():
        rows.extend(A.batch_mul_elem(tr.t, lam))
    return FpSubspace(A.p, A.dim, np.array(rows).reshape(-1, A.dim))


def gbar_of(G):
    """Image of a matrix group in (R/rad R)*: pairs of residual data.

    Returns (labels, class_of) where labels[i] is a canonical tuple for the
    i-th residual class and class_of maps element index -> class index.
    """
    R = G.R
    rad = R.radical()
    labels = {}
    class_of = np.empty(G.n, dtype=np.int64)
    reps = []
    for i in range(G.n):
        red = _residual_label(R, G.elements[i], rad)
        if red not in labels:
            labels[red] = len(reps)
            reps.append(i)
        class_of[i] = labels[red]
    return list(labels.keys()), class_of, reps


def _residual_label(R, v, rad):
    profile = R.radical_profile()
    A = R.A
    if isinstance(A, SemiLocalRing):
        raise NotImplementedError("residual labels only for local base")
    a, b, c, d = R.comps(v)
    if profile[0] == "matrix":
        # reduce entries mod m; b, c are A-modules isomorphic to A here
        return ("m2", A.residue_int(a), _module_residue(R, b, "b"),
                _module_residue(R, c, "c"), A.residue_int(d))
    return ("diag", A.residue_int(a), A.residue_int(d))


def _module_residue(R, x, which):
    """Class of a module element modulo m·module, encoded as a tuple."""
    A = R.A
    dmod = R.db if which == "b" else R.dc
    sub_rows = []
    for mrow in A.maxideal.basis:
        for e in np.eye(dmod, dtype=np.int64):
            sub_rows.append(_act_row(R, mrow, e, which))
    sub = FpSubspace(R.p, dmod, sub_rows)
    return tuple(int(t) for t in sub.reduce(x))


def _act_row(R, a, m, which):
    return R.module_act(a, m[None, :], which)[0]


def s_of_residual(R, label):
    """Constant lift of a residual class label through the section s."""
    A = R.A
    if label[0] == "diag":
        return R.assemble(A.constant(label[1]).v, np.zeros(R.db, dtype=np.int64),
                          np.zeros(R.dc, dtype=np.int64), A.constant(label[2]).v)
    raise NotImplementedError("matrix-case constant lifts are built entrywise")


def is_well_adapted(G, g0_index, cls):
    """Definition check on a matrix group G realizing (t, d):

    (i) rho(g0) is diagonal with residually distinct entries and generates,
    together with the scalars of Gbar, the whole Gbar (cyclic residual
    class) or an index-2 subgroup (dihedral);
    (ii) the constant section of every residual class lies in G;
    (iii) a non-abelian Gbar contains a constant antidiagonal matrix
    [[0, b],[c, 0]] with b/c in the prime field.
    """
    R = G.R
    A = R.A
    v0 = G.elements[g0_index]
    if v0[R.sb].any() or v0[R.sc].any():
        return False, "rho(g0) not diagonal"
    if A.residue_int(v0[R.sa]) == A.residue_int(v0[R.sd]):
        return False, "rho(g0) residually scalar"
    # residual image data
    gt = GroupTable.from_matrix_group(G)
    labels, class_of, reps = gbar_of(G)
    nbar = len(labels)
    # (ii): constant lifts in G
    for lab in labels:
        const = _constant_lift(R, lab)
        if const is None or G.lookup(const) is None:
            return False, f"constant lift of {lab} missing from G"
    # subgroup of Gbar generated by class(g0) and scalar classes
    rad = R.radical()
    scal_classes = {int(class_of[i]) for i in range(G.n)
                    if _is_scalar_label(_residual_label(R, G.elements[i], rad))}
    # projective/residual table
    tab = np.array([[class_of[gt.table[reps[a], reps[b]]] for b in range(nbar)]
                    for a in range(nbar)], dtype=np.int64)
    bar_gt = GroupTable(table=tab, identity=int(class_of[gt.identity]))
    gen = _closure_indices(bar_gt, scal_classes | {int(class_of[g0_index])})
    idx = len(gen)
    if cls.kind == "cyclic":
        if idx != nbar:
            return False, "g0 and scalars do not generate Gbar"
    elif cls.kind == "dihedral":
        if 2 * idx != nbar:
            return False, "g0 and scalars do not generate an index-2 subgroup"
    else:
        return False, "well-adaptedness applies to cyclic or dihedral classes"
    # (iii)
    abelian = all(int(tab[a, b]) == int(tab[b, a]) for a in range(nbar) for b in range(nbar))
    if not abelian:
        ok = False
        for i in range(G.n):
            v = G.elements[i]
            if v[R.sa].any() or v[R.sd].any():
                continue
            b, c = v[R.sb], v[R.sc]
            if not b.any() or not c.any():
                continue
            if _constant_antidiag_prime_ratio(R, b, c):
                ok = True
                break
        if not ok:
            return False, "no constant antidiagonal with prime-field ratio"
    return True, None


def _is_scalar_label(label):
    if label[0] == "diag":
        return label[1] == label[2]
    off_zero = not any(label[2]) and not any(label[3])
    return label[1] == label[4] and off_zero


def _constant_lift(R, label):
    """Entrywise constant section of a residual label, for M2 and diagonal
    reduced cases (b, c components must be constant-liftable)."""
    A = R.A
    zb = np.zeros(R.db, dtype=np.int64)
    zc = np.zeros(R.dc, dtype=np.int64)
    if label[0] == "diag":
        return R.assemble(A.constant(label[1]).v, zb, zc, A.constant(label[2]).v)
    # matrix case with B = C = A: lift each entry through the constants section
    if R.db != A.dim or R.dc != A.dim:
        return None
    bres = A.residue_int(np.array(label[2], dtype=np.int64))
    cres = A.residue_int(np.array(label[3], dtype=np.int64))
    return R.assemble(A.constant(label[1]).v, A.constant(bres).v,
                      A.constant(cres).v, A.constant(label[4]).v)


def _constant_antidiag_prime_ratio(R, b, c):
    """b, c constant with b·c^{-1} in F_p*, for B = C = A (matrix case)."""
    A = R.A
    if R.db != A.dim or R.dc != A.dim:
        return False
    rb, rc = A.residue_int(b), A.residue_int(c)
    if rb == 0 or rc == 0:
        return False
    if not np.array_equal(b, A.constant(rb).v) or not np.array_equal(c, A.constant(rc).v):
        return False
    ratio = A.fq.mul(rb, A.fq.inv(rc))
    return ratio in {A.fq.encode([k] + [0] * (A.fq.f - 1)) for k in range(1, A.p)}


def commutator_trace_ideal(tr):
    """Smallest ideal I with t mod I invariant under commutator twists:
    generated by t(x y x^{-1} y^{-1} s) - t(s) over all x, y, s."""
    A, gt = tr.A, tr.gt
    p = A.p
    T, inv = gt.table, gt.inv
    rows = []
    for x in range(gt.n):
        for y in range(gt.n):
            c = int(T[T[x, y], inv[T[y, x]]])
            if c == gt.identity:
                continue
            # t(c s) - t(s) for all s at once
            diff = (tr.t[T[c]] - tr.t) % p
            rows.extend(diff)
    if not rows:
        return FpSubspace(p, A.dim)
    sp = FpSubspace(p, A.dim, rows)
    # saturate to an ideal
    while True:
        ext = [A.mul_vec(e, v) for v in sp.basis for e in np.eye(A.dim, dtype=np.int64)]
        sp2 = FpSubspace(p, A.dim, list(sp.basis) + ext)
        if sp2.dim == sp.dim:
            return sp2
        sp = sp2


def kernel_ideal_gap(tr):
    """Dimensions of Ker(T, D) versus the two-sided ideal generated by
    {g - 1 : g in ker(t, d)}.  The kernel can in principle be strictly
    larger; small instances are scanned for a witness rather than asserting
    either way."""
    A, gt = tr.A, tr.gt
    p = A.p
    ker_big = linear_kernel(tr)
    ker_grp = kernel(tr)
    N = gt.n * A.dim
    da = A.dim
    rows = []
    for y in ker_grp:
        base = np.zeros(N, dtype=np.int64)
        base[y * da:(y + 1) * da] = A.one
        base[gt.identity * da:(gt.identity + 1) * da] = (
            base[gt.identity * da:(gt.identity + 1) * da] - A.one) % p
        rows.append(base)
    if not rows:
        return ker_big.dim, 0
    # saturate to a two-sided ideal of A[G]: multiply by A-scaled group
    # elements on both sides
    span = FpSubspace(p, N, rows)
    while True:
        ext = list(span.basis)
        for v in span.basis:
            tab = v.reshape(gt.n, da)
            for g in range(gt.n):
                for side in ("l", "r"):
                    out = np.zeros((gt.n, da), dtype=np.int64)
                    for h in range(gt.n):
                        if not tab[h].any():
                            continue
                        k = int(gt.table[g, h]) if side == "l" else int(gt.table[h, g])
                        out[k] = (out[k] + tab[h]) % p
                    ext.append(out.reshape(N))
        for v in span.basis:
            tab = v.reshape(gt.n, da)
            for i in range(da):
                e = np.eye(da, dtype=np.int64)[i]
                out = np.array([A.mul_vec(e, tab[h]) for h in range(gt.n)])
                ext.append(out.reshape(N))
        span2 = FpSubspace(p, N, ext)
        if span2.dim == span.dim:
            break
        span = span2
    return ker_big.dim, span.dim


def residual_image_group(G):
    """The image of a matrix group in GL_2 of the residue field, as a
    matrix group over F_q (matrix-presented structures over a local base)."""
    from .localring import make_truncated_poly_ring
    R = G.R
    A = R.A
    if not isinstance(A, LocalRing) or R.db != A.dim or R.dc != A.dim:
        raise ValueError("residual image needs the matrix presentation over a local base")
    Fq = make_truncated_poly_ring(A.fq.q, 1)
    Rq = _m2_over(Fq)
    rows = []
    seen = set()
    for v in G.elements:
        a, b, c, d = R.comps(v)
        digits = []
        for comp in (a, b, c, d):
            digits.extend(Fq.fq.digits(A.residue_int(comp)))
        w = np.array(digits, dtype=np.int64)
        k = row_key(w)
        if k not in seen:
            seen.add(k)
            rows.append(w)
    return FiniteMatrixGroup(Rq, np.array(rows))


def _m2_over(A):
    from .gma import m2_structure
    return m2_structure(A)
