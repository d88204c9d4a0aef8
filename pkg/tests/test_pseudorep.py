import numpy as np
import pytest

from pinkforge.fp import FpSubspace
from pinkforge.gma import m2_structure
from pinkforge.instances import (
    const_diag,
    diag_group_constants,
    dihedral_constants,
    gl2_fp_constants,
    klein_constants,
    sl2_fp_constants,
)
from pinkforge.localring import make_truncated_poly_ring
from pinkforge.pseudorep import (
    FiniteMatrixGroup,
    GroupTable,
    NotMultFree,
    PseudoRep,
    build_td_representation,
    check_axioms,
    classify_projective_image,
    commutator_trace_ideal,
    extend_to_algebra,
    is_admissible,
    is_normal,
    is_well_adapted,
    kernel,
    kernel_ideal_gap,
    linear_kernel,
    residual_multfree_data,
)


def matrix_group(R, rows):
    return FiniteMatrixGroup(R, np.array(rows))


@pytest.fixture(scope="module")
def gl2_f3():
    A = make_truncated_poly_ring(3, 1)
    R = m2_structure(A)
    return FiniteMatrixGroup(R, np.array(gl2_fp_constants(R)))


def cyclic_group_table(n):
    T = np.fromfunction(lambda i, j: (i + j) % n, (n, n), dtype=np.int64)
    return GroupTable(table=T.astype(np.int64), identity=0)


def test_axioms_hold_for_matrix_groups(gl2_f3, example_family):
    tr = PseudoRep.from_matrix_group(gl2_f3)
    ok, wit = check_axioms(tr)
    assert ok, wit
    tr2 = PseudoRep.from_matrix_group(example_family[2].G)
    ok2, wit2 = check_axioms(tr2)
    assert ok2, wit2


def test_axioms_detect_perturbation(gl2_f3):
    tr = PseudoRep.from_matrix_group(gl2_f3)
    t_bad = tr.t.copy()
    i = 5
    t_bad[i] = (t_bad[i] + 1) % 3
    bad = PseudoRep(tr.A, tr.gt, t_bad, tr.d)
    ok, wit = check_axioms(bad)
    assert not ok and wit is not None


def test_axioms_character_sum():
    # t = chi1 + chi2, d = chi1*chi2 for two characters of Z/3 into F7*
    A = make_truncated_poly_ring(7, 1)
    gt = cyclic_group_table(3)
    chi1 = [1, 2, 4]   # 2 has order 3 mod 7
    chi2 = [1, 4, 2]
    t = [[(
        chi1[g] + chi2[g]) % 7] for g in range(3)]
    d = [[chi1[g] * chi2[g] % 7] for g in range(3)]
    tr = PseudoRep(A, gt, t, d)
    ok, wit = check_axioms(tr)
    assert ok, wit


def test_kernel_examples(gl2_f3, example_family):
    tr = PseudoRep.from_matrix_group(gl2_f3)
    assert kernel(tr) == [gl2_f3.id_index]
    # inflation from a quotient: pull back along Z/6 -> Z/3
    A = make_truncated_poly_ring(7, 1)
    gt6 = cyclic_group_table(6)
    chi = [1, 4, 2, 1, 4, 2]     # factors through Z/3
    t = [[(chi[g] + pow(chi[g], 6, 7)) % 7] for g in range(6)]
    tinv = [pow(chi[g], 5, 7) for g in range(6)]
    t = [[(chi[g] + tinv[g]) % 7] for g in range(6)]
    d = [[1] for _ in range(6)]
    tr6 = PseudoRep(A, gt6, t, d)
    ok, _ = check_axioms(tr6)
    assert ok
    ker = kernel(tr6)
    assert ker == [0, 3]                 # the inflation kernel
    assert is_normal(gt6, ker)


def test_kernel_of_example_group(example_family):
    # exhaustive kernel of (tr, det) on the k = 2 group: traces on Gamma are
    # constant (tr(m^2) dies in (X^2)) and J-coset traces see only the
    # diagonal part of theta, so the kernel is exactly the antidiagonal
    # one-parameter subgroup {1, h, h^2}, not the trivial group
    ex = example_family[2]
    tr = PseudoRep.from_matrix_group(ex.G)
    ker = kernel(tr)
    h_idx = ex.G.lookup(ex.h)
    hinv_idx = ex.G.lookup(ex.h.inverse())
    assert sorted(ker) == sorted([ex.G.id_index, h_idx, hinv_idx])
    assert is_normal(tr.gt, ker)
    # the quotient pseudo-representation has trivial kernel
    gt = tr.gt
    cls_map, ncls = _cosets(gt, ker)
    reps = [int(np.nonzero(cls_map == c)[0][0]) for c in range(ncls)]
    qt = np.array([[cls_map[gt.table[a, b]] for b in reps] for a in reps])
    qgt = GroupTable(table=qt.astype(np.int64), identity=int(cls_map[gt.identity]))
    qtr = PseudoRep(tr.A, qgt, tr.t[reps], tr.d[reps])
    ok, _ = check_axioms(qtr)
    assert ok
    assert kernel(qtr) == [qgt.identity]


def _cosets(gt, subgroup):
    cls = np.full(gt.n, -1, dtype=np.int64)
    count = 0
    for i in range(gt.n):
        if cls[i] >= 0:
            continue
        for h in subgroup:
            cls[gt.table[i, h]] = count
        count += 1
    return cls, count


def test_extension_restriction_and_quadratic_rules(gl2_f3):
    tr = PseudoRep.from_matrix_group(gl2_f3)
    A = tr.A
    n = tr.gt.n
    rng = np.random.default_rng(0)
    # restriction: T(g) = t(g), D(g) = d(g)
    for g in (0, 3, 17):
        C = np.zeros((n, 1), dtype=np.int64)
        C[g] = 1
        Tv, Dv = extend_to_algebra(tr, C)
        assert np.array_equal(Tv.v, tr.t[g]) and np.array_equal(Dv.v, tr.d[g])
    # D(g + h) = d(g) + d(h) + t(g)t(h) - t(gh)
    for _ in range(30):
        g, h = rng.integers(0, n, size=2)
        if g == h:
            continue
        C = np.zeros((n, 1), dtype=np.int64)
        C[g] = 1
        C[h] = 1
        _, Dv = extend_to_algebra(tr, C)
        want = (tr.d[g] + tr.d[h] + A.mul_vec(tr.t[g], tr.t[h])
                - tr.t[tr.gt.table[g, h]]) % 3
        assert np.array_equal(Dv.v, want)
    # homogeneity D(lam x) = lam^2 D(x)
    for _ in range(20):
        C = rng.integers(0, 3, size=(n, 1))
        lam = int(rng.integers(1, 3))
        _, D1 = extend_to_algebra(tr, C)
        _, D2 = extend_to_algebra(tr, (lam * C) % 3)
        assert np.array_equal(D2.v, (lam * lam * D1.v) % 3)


def test_extension_TD7_and_multiplicativity(example_family):
    # T(xy) + D(y) T(x y^{-1}) = T(x) T(y) for invertible y = group elements,
    # and D multiplicative on random algebra elements
    G = example_family[2].G
    tr = PseudoRep.from_matrix_group(G)
    A, gt = tr.A, tr.gt
    rng = np.random.default_rng(1)
    for _ in range(20):
        C = rng.integers(0, 3, size=(gt.n, A.dim))
        y = int(rng.integers(0, gt.n))
        Tx, Dx = extend_to_algebra(tr, C)
        # x·y and x·y^{-1} as coefficient tables (right translation)
        Cy = np.zeros_like(C)
        Cyi = np.zeros_like(C)
        for g in range(gt.n):
            Cy[gt.table[g, y]] = C[g]
            Cyi[gt.table[g, gt.inv[y]]] = C[g]
        Txy, Dxy = extend_to_algebra(tr, Cy)
        Txyi, _ = extend_to_algebra(tr, Cyi)
        lhs = (Txy.v + A.mul_vec(tr.d[y], Txyi.v)) % 3
        rhs = A.mul_vec(Tx.v, tr.t[y])
        assert np.array_equal(lhs, rhs)
        # multiplicativity against a group element: D(xy) = D(x) d(y)
        assert np.array_equal(Dxy.v, A.mul_vec(Dx.v, tr.d[y]))


def test_linear_kernel_codimension(gl2_f3):
    tr = PseudoRep.from_matrix_group(gl2_f3)
    ker = linear_kernel(tr)
    # faithful quotient is the full 2x2 matrix algebra: codimension 4
    assert tr.gt.n * tr.A.dim - ker.dim == 4
    # D vanishes on the kernel (p odd)
    for v in ker.basis[:10]:
        _, Dv = extend_to_algebra(tr, v.reshape(tr.gt.n, tr.A.dim))
        assert Dv.is_zero()


def test_keruker_both_directions():
    # ker(t,d) elements g correspond exactly to g - 1 in Ker(T, D)
    A = make_truncated_poly_ring(7, 1)
    gt = cyclic_group_table(6)
    chi = [1, 4, 2, 1, 4, 2]
    t = [[(chi[g] + pow(chi[g], 5, 7)) % 7] for g in range(6)]
    d = [[1] for _ in range(6)]
    tr = PseudoRep(A, gt, t, d)
    ker_grp = set(kernel(tr))
    K = linear_kernel(tr)
    for g in range(6):
        v = np.zeros(6, dtype=np.int64)
        v[g] += 1
        v[0] -= 1
        assert K.contains(v % 7) == (g in ker_grp)


def test_kernel_ideal_gap_reported():
    # the linear kernel can exceed the ideal generated by kernel-group
    # elements; we record the comparison on a small instance without
    # asserting strictness either way
    A = make_truncated_poly_ring(7, 1)
    gt = cyclic_group_table(6)
    chi = [1, 4, 2, 1, 4, 2]
    t = [[(chi[g] + pow(chi[g], 5, 7)) % 7] for g in range(6)]
    d = [[1] for _ in range(6)]
    tr = PseudoRep(A, gt, t, d)
    big, small = kernel_ideal_gap(tr)
    assert big >= small >= 0


def test_build_td_irreducible_gives_matrix_algebra(gl2_f3):
    tr = PseudoRep.from_matrix_group(gl2_f3)
    kind, _ = residual_multfree_data(tr)
    assert kind == "irreducible"
    R, G, rho_idx, info = build_td_representation(tr)
    # isomorphic to M2(A): modules of rank one with unit pairing values
    assert R.db == 1 and R.dc == 1
    assert R.bc_ideal().contains(R.A.one)
    from pinkforge.gma import is_faithful
    assert is_faithful(R)
    # kernel of rho equals ker(t, d) (both trivial here)
    assert len({rho_idx[g] for g in range(tr.gt.n)}) == tr.gt.n


def test_build_td_reducible_gives_bc_in_m():
    # rho = 1 + chi~ deformed over F5[eps]: BC lands inside m
    A = make_truncated_poly_ring(5, 2)
    R0 = m2_structure(A)
    z = np.zeros(2, dtype=np.int64)
    # diagonal matrix diag(1, 2(1+eps)) generates a cyclic group
    d22 = A.elem([2, 2])     # 2 + 2eps = 2(1+eps)
    g = R0.elem(A.one, z, z, d22.v)
    G = FiniteMatrixGroup.generate(R0, [g])
    tr = PseudoRep.from_matrix_group(G)
    kind, chars = residual_multfree_data(tr)
    assert kind == "reducible"
    R, GG, rho_idx, info = build_td_representation(tr)
    bc = R.bc_ideal()
    for v in bc.basis:
        assert R.A.maxideal.contains(v)
    # trace/determinant reproduced
    for i in range(tr.gt.n):
        v = GG.elements[rho_idx[i]]
        assert np.array_equal(R.trace_vec(v), tr.t[i])
        assert np.array_equal(R.det_vec(v), tr.d[i])


def test_build_td_not_multfree_rejected():
    # t = 2·chi is a repeated character
    A = make_truncated_poly_ring(7, 1)
    gt = cyclic_group_table(3)
    chi = [1, 2, 4]
    t = [[2 * chi[g] % 7] for g in range(3)]
    d = [[chi[g] * chi[g] % 7] for g in range(3)]
    tr = PseudoRep(A, gt, t, d)
    with pytest.raises(NotMultFree):
        build_td_representation(tr)


def test_build_td_adapted_uniqueness(gl2_f3):
    # two constructions adapted to the same (g0, lam, mu) are matched by a
    # unique A-linear trace-preserving isomorphism fixing rho: here we check
    # the stronger statement that the built data agree coordinatewise after
    # reordering, since both are produced by the same canonical split
    tr = PseudoRep.from_matrix_group(gl2_f3)
    # choose g0 = diag(1, 2): find its index
    g0 = None
    A = tr.A
    for i in range(tr.gt.n):
        v = gl2_f3.elements[i]
        R0 = gl2_f3.R
        if not v[R0.sb].any() and not v[R0.sc].any() \
           and A.residue_int(v[R0.sa]) == 1 and A.residue_int(v[R0.sd]) == 2:
            g0 = i
    assert g0 is not None
    R1, G1, idx1, info1 = build_td_representation(tr, g0=g0, lam0=1, mu0=2)
    R2, G2, idx2, info2 = build_td_representation(tr, g0=g0, lam0=1, mu0=2)
    assert info1 == info2
    assert np.array_equal(G1.elements[idx1], G2.elements[idx2])
    # rho(g0) diagonal with the prescribed residues
    v0 = G1.elements[idx1[g0]]
    assert not v0[R1.sb].any() and not v0[R1.sc].any()


def test_classification_table(gl2_f3):
    A = make_truncated_poly_ring(5, 1)
    R = m2_structure(A)
    # {diag(a, a^-1)}: projective image of order 2, chi^2 = chi'^2
    pairs = [(a, pow(a, 3, 5)) for a in range(1, 5)]
    G = FiniteMatrixGroup(R, np.array(diag_group_constants(R, pairs)))
    cls = classify_projective_image(G)
    assert cls.kind == "cyclic" and cls.order == 2
    assert cls.tag() == "CyclicOrder2"
    # diag(2, 1): order 4 projective image
    G2 = FiniteMatrixGroup(R, np.array(diag_group_constants(R, [(2, 1)])))
    cls2 = classify_projective_image(G2)
    assert cls2.kind == "cyclic" and cls2.order == 4
    # diagonal + antidiagonal over F5: diag(2, 1) with the swap gives a
    # projective dihedral group of order 8
    from pinkforge.instances import gl2_constants
    G3 = FiniteMatrixGroup(R, np.array(gl2_constants(R, [((2, 0), (0, 1)),
                                                         ((0, 1), (1, 0))])))
    cls3 = classify_projective_image(G3)
    assert cls3.kind == "dihedral" and cls3.order == 8
    assert cls3.tag() == "DihedralN(8)"
    # Klein
    G4 = FiniteMatrixGroup(R, np.array(klein_constants(R)))
    cls4 = classify_projective_image(G4)
    assert cls4.kind == "dihedral" and cls4.order == 4
    assert cls4.tag() == "DihedralOrder4"
    # GL2(F3): large image PGL2(3)
    cls5 = classify_projective_image(gl2_f3)
    assert cls5.kind == "large" and cls5.detail == "PGL2(3)"
    # SL2(F3) has projective image PSL2(3)
    Af = make_truncated_poly_ring(3, 1)
    Rf = m2_structure(Af)
    G6 = FiniteMatrixGroup(Rf, np.array(sl2_fp_constants(Rf)))
    cls6 = classify_projective_image(G6)
    assert cls6.kind == "large" and cls6.detail == "PSL2(3)"


def test_classification_conjugation_invariant(gl2_f3):
    # conjugating the group leaves the class unchanged
    R = gl2_f3.R
    rng = np.random.default_rng(2)
    for _ in range(3):
        while True:
            v = rng.integers(0, 3, size=R.dim)
            if R.is_unit(v):
                break
        vin = R.inv_vec(v)
        conj = np.array([R.mul_vec(v, R.mul_vec(g, vin)) for g in gl2_f3.elements])
        Gc = FiniteMatrixGroup(R, conj)
        assert classify_projective_image(Gc).tag() == "LargeImage(PGL2(3))"


def test_exceptional_classification():
    # the binary tetrahedral group in SL2(F7): quaternions i, j and the
    # 3-cycle (−1+i+j+k)/2; its projective image is A4
    A = make_truncated_poly_ring(7, 1)
    R = m2_structure(A)
    from pinkforge.instances import gl2_constants
    gens = [((0, 6), (1, 0)), ((2, 3), (3, 5)), ((6, 2), (3, 0))]
    G = FiniteMatrixGroup(R, np.array(gl2_constants(R, gens)))
    cls = classify_projective_image(G)
    assert cls.kind == "exceptional" and cls.detail == "A4"
    assert cls.tag() == "Exceptional(A4)"


def test_is_admissible_examples(example_family):
    # two-generator example: admissible at every k
    for k in (2, 4):
        tr = PseudoRep.from_matrix_group(example_family[k].G)
        assert is_admissible(tr)
    # constant pseudo-rep into F3[eps] is not admissible
    A = make_truncated_poly_ring(3, 2)
    gt = cyclic_group_table(2)
    t = [[2, 0], [1, 0]]
    d = [[1, 0], [1, 0]]   # trivial character pair values in constants
    tr2 = PseudoRep(A, gt, t, d)
    assert not is_admissible(tr2)
    # tautological GL2(F3) over F3 is admissible
    Af = make_truncated_poly_ring(3, 1)
    Rf = m2_structure(Af)
    G = FiniteMatrixGroup(Rf, np.array(gl2_fp_constants(Rf)))
    assert is_admissible(PseudoRep.from_matrix_group(G))


def test_well_adapted_on_example(example_family):
    # the adapted element must have residually distinct diagonal entries:
    # in the two-generator example that is J (residually diag(1, -1)), not
    # the generator g, which reduces to the identity
    ex = example_family[2]
    from pinkforge.pseudorep import ResidualClass
    j0 = ex.G.lookup(ex.R.j_elem())
    ok, why = is_well_adapted(ex.G, j0, ResidualClass("cyclic", 2))
    assert ok, why
    g0 = ex.G.lookup(ex.g)
    ok2, why2 = is_well_adapted(ex.G, g0, ResidualClass("cyclic", 2))
    assert not ok2 and "scalar" in why2
    h0 = ex.G.lookup(ex.h)
    ok3, why3 = is_well_adapted(ex.G, h0, ResidualClass("cyclic", 2))
    assert not ok3           # rho(h) is not even diagonal


def test_commutator_trace_ideal():
    # abelian group: zero ideal
    A = make_truncated_poly_ring(3, 2)
    R = m2_structure(A)
    z = np.zeros(2, dtype=np.int64)
    g = R.elem(A.elem([1, 1]).v, z, z, A.elem([1, 1]).inverse().v)
    G = FiniteMatrixGroup.generate(R, [g])
    tr = PseudoRep.from_matrix_group(G)
    assert commutator_trace_ideal(tr).dim == 0
    # GL2(F3) over F3: the whole ring
    Af = make_truncated_poly_ring(3, 1)
    Rf = m2_structure(Af)
    Gf = FiniteMatrixGroup(Rf, np.array(gl2_fp_constants(Rf)))
    trf = PseudoRep.from_matrix_group(Gf)
    I = commutator_trace_ideal(trf)
    assert I.dim == 1
    # minimality: the quotient by I factors through an abelianization; any
    # ideal with that property contains every generator, hence contains I
    ex = None


def test_commutator_trace_ideal_minimality(example_family):
    G = example_family[2].G
    tr = PseudoRep.from_matrix_group(G)
    I = commutator_trace_ideal(tr)
    gt, A = tr.gt, tr.A
    # quotient values factor through commutator twists
    for x in range(0, gt.n, 3):
        for y in range(0, gt.n, 3):
            c = gt.table[gt.table[x, y], gt.inv[gt.table[y, x]]]
            for s in range(0, gt.n, 5):
                diff = (tr.t[gt.table[c, s]] - tr.t[s]) % A.p
                assert I.contains(diff)


def test_build_td_unique_isomorphism_to_tautology(gl2_f3):
    # the tautological embedding of GL2(F3) is itself adapted to
    # g0 = diag(1, 2); the rebuilt realization must be matched to it by an
    # A-linear map fixing rho, which is then checked to be a GMA morphism
    from pinkforge.fp import solve
    tr = PseudoRep.from_matrix_group(gl2_f3)
    A = tr.A
    R0 = gl2_f3.R
    g0 = next(i for i in range(gl2_f3.n)
              if not gl2_f3.elements[i][R0.sb].any()
              and not gl2_f3.elements[i][R0.sc].any()
              and A.residue_int(gl2_f3.elements[i][R0.sa]) == 1
              and A.residue_int(gl2_f3.elements[i][R0.sd]) == 2)
    R1, G1, idx1, info = build_td_representation(tr, g0=g0, lam0=1, mu0=2)
    # solve Psi: R1 -> R0 linear with Psi(rho1(g)) = rho0(g) for all g;
    # Psi is an (R0.dim x R1.dim) unknown, flattened row-major
    n = tr.gt.n
    cols = R0.dim * R1.dim
    Msys = np.zeros((n * R0.dim, cols), dtype=np.int64)
    rhs = np.zeros(n * R0.dim, dtype=np.int64)
    for g in range(n):
        v1 = G1.elements[idx1[g]]
        v0 = gl2_f3.elements[g]
        for r in range(R0.dim):
            row = g * R0.dim + r
            for c in range(R1.dim):
                Msys[row, r * R1.dim + c] = v1[c]
            rhs[row] = v0[r]
    sol = solve(Msys, rhs, 3)
    assert sol is not None
    Psi = sol.reshape(R0.dim, R1.dim)
    # Psi matches rho everywhere and is multiplicative on the group span
    for g in range(n):
        assert np.array_equal(Psi @ G1.elements[idx1[g]] % 3, gl2_f3.elements[g])
    rng = np.random.default_rng(12)
    for _ in range(50):
        x = rng.integers(0, 3, size=R1.dim)
        y = rng.integers(0, 3, size=R1.dim)
        assert np.array_equal(Psi @ R1.mul_vec(x, y) % 3,
                              R0.mul_vec(Psi @ x % 3, Psi @ y % 3))
    # and it is a GMA morphism: each component block maps to its counterpart
    for (s1, s0) in ((R1.sa, R0.sa), (R1.sb, R0.sb), (R1.sc, R0.sc), (R1.sd, R0.sd)):
        E = np.zeros((R1.dim, R1.dim), dtype=np.int64)
        for j in range(s1.start, s1.stop):
            E[j, j] = 1
        img = Psi @ E % 3
        for j in range(R1.dim):
            col = img[:, j]
            outside = np.ones(R0.dim, dtype=bool)
            outside[s0] = False
            assert not col[outside].any()


def test_build_td_kernel_both_ways():
    # exGMA(vi): ker rho = ker(t, d), computed on a reducible instance with
    # a genuinely nontrivial kernel (inflation through Z/8 -> Z/4)
    A = make_truncated_poly_ring(5, 2)
    R0 = m2_structure(A)
    z = np.zeros(2, dtype=np.int64)
    d2 = A.elem([2, 0])          # order 4 in F5*
    g = R0.elem(A.one, z, z, d2.v)
    G0 = FiniteMatrixGroup.generate(R0, [g])
    assert G0.n == 4
    # abstract group Z/8 surjecting onto G0 = <g> of order 4
    T = np.fromfunction(lambda i, j: (i + j) % 8, (8, 8), dtype=np.int64)
    gt = GroupTable(table=T.astype(np.int64), identity=0)
    powers = [g ** k for k in range(4)]
    tvals = np.array([powers[k % 4].trace().v for k in range(8)])
    dvals = np.array([powers[k % 4].det().v for k in range(8)])
    tr = PseudoRep(A, gt, tvals, dvals)
    ok, _ = check_axioms(tr)
    assert ok
    ker_td = kernel(tr)
    assert ker_td == [0, 4]
    R, G, rho_idx, _ = build_td_representation(tr)
    ker_rho = [g for g in range(8) if rho_idx[g] == rho_idx[0]]
    assert ker_rho == ker_td


def test_residual_image_group_and_serialization(example_family):
    from pinkforge.pseudorep import residual_image_group
    ex = example_family[3]
    Gbar = residual_image_group(ex.G)
    assert Gbar.n == 2                       # {Id, J} residually
    cls = classify_projective_image(Gbar)
    assert cls.tag() == "CyclicOrder2"
    tr = PseudoRep.from_matrix_group(ex.G)
    import json
    d = tr.to_dict()
    json.dumps(d)
    assert d["order"] == ex.G.n and len(d["t"]) == ex.G.n
