"""Batch command-line surface.

Subcommands:
  verify       run the full assertion battery on a configured instance family
  example8     the two-generator example over F_p[X]/(X^k), full report
  density      prime-coefficient density of a named form
  delta-power  write Delta^n mod p to a file (bit-packed / byte payload)
  cyclotomic   residue-class constancy sweep of a_ell
  span         Hecke-stable span of a named form with operator matrices
  analyze      Lie report for a generated matrix group over F_q[X]/(X^k)

All reports are JSON with sorted keys; identical configuration (including
the seed) produces identical bytes.  Exit codes: 0 pass, 1 assertion
failure, 2 usage error.  PINKFORGE_THREADS bounds check-level parallelism.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from .fp import FpSubspace
from .gma import m2_structure, m2_quotient_map, reduced_residue_gma
from .localring import make_truncated_poly_ring
from .modforms import (
    DegreeExhausted,
    FpSeries,
    cyclotomic_test,
    delta_expansion,
    density_sweep,
    hecke_T,
    hecke_span,
    nilpotency_check,
    prime_sieve,
    series_pow,
)
from .pinklie import (
    LieSubspace,
    batch_theta,
    batch_theta_inv,
    compute_A0,
    decompose,
    descending_series,
    essential_data,
    essential_not_ideal_witness,
    example8,
    expected_example_lie,
    generate_group,
    group_series,
    is_congruence_subgroup,
    key_measure_check,
    lie_of_subgroup,
    measure_change_psi,
    pink_converse,
    pink_formula_battery,
    random_rad0,
    star_quotient_checks,
    structure_round_trip,
    theta_star_morphism_check,
)
from .pseudorep import FiniteMatrixGroup
from .instances import structure_parameter_sets


def _threads():
    try:
        return max(1, int(os.environ.get("PINKFORGE_THREADS", "1")))
    except ValueError:
        return 1


def emit(report, out=None):
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, FpSubspace):
        return obj.basis.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


# -- named forms ----------------------------------------------------------------

def parse_form(name, p, deg):
    """'delta^N' or 'delta' -> the corresponding series mod p."""
    name = name.strip().lower()
    if name in ("delta", "delta^1"):
        return delta_expansion(p, deg)
    if name.startswith("delta^"):
        n = int(name.split("^", 1)[1])
        return series_pow(delta_expansion(p, deg), n)
    raise argparse.ArgumentTypeError(f"unknown form {name!r}")


# -- verify battery ---------------------------------------------------------------

def _check_ring_axioms(seed):
    rng = np.random.default_rng(seed)
    details = {}
    ok = True
    for (q, k) in ((3, 3), (9, 2), (5, 2), (3, 1)):
        A = make_truncated_poly_ring(q, k)
        X = rng.integers(0, A.p, size=(200, A.dim))
        Y = rng.integers(0, A.p, size=(200, A.dim))
        Z = rng.integers(0, A.p, size=(200, A.dim))
        assoc = np.array_equal(A.batch_mul(A.batch_mul(X, Y), Z),
                               A.batch_mul(X, A.batch_mul(Y, Z)))
        distr = np.array_equal(A.batch_mul(X, (Y + Z) % A.p),
                               (A.batch_mul(X, Y) + A.batch_mul(X, Z)) % A.p)
        # units are exactly the complement of the maximal ideal
        elems = A.elements(cap=10 ** 5)
        unit_mask = np.array([A.is_unit_vec(v) for v in elems])
        ideal_mask = np.array([A.maxideal.contains(v) for v in elems])
        units_ok = bool((unit_mask ^ ideal_mask).all())
        # square roots on 1+m: existence and uniqueness by exhaustion
        from .localring import hensel_sqrt
        sq_ok = True
        if A.p > 2 and A.p ** A.maxideal.dim <= 3 ** 5:
            one_plus_m = [(A.one + v) % A.p for v in A.maxideal.enumerate()]
            for x in one_plus_m:
                y = hensel_sqrt(A, x).v
                roots = [u for u in one_plus_m if np.array_equal(A.mul_vec(u, u), x)]
                if len(roots) != 1 or not np.array_equal(roots[0], y):
                    sq_ok = False
        this = assoc and distr and units_ok and sq_ok
        details[f"F{q}[X]/(X^{k})"] = {"assoc": bool(assoc), "distr": bool(distr),
                                       "units_match_ideal": units_ok, "sqrt_unique": sq_ok}
        ok = ok and this
    return ok, details


def _battery_structures():
    A1 = make_truncated_poly_ring(3, 3)
    A2 = make_truncated_poly_ring(5, 2)
    A3 = make_truncated_poly_ring(3, 3)
    return [
        ("M2(F3[X]/(X^3))", m2_structure(A1)),
        ("M2(F5[eps])", m2_structure(A2)),
        ("reduced(F3[X]/(X^3))", reduced_residue_gma(A3)),
    ]


def _check_theta_identities(seed, n_tuples=1000, fault=None):
    details = {}
    ok = True
    for name, R in _battery_structures():
        theta_fn = None
        if fault == "theta":
            def theta_fn(X, R=R):
                out = batch_theta(R, X)
                out[:, 0] = (out[:, 0] + 1) % R.p   # corrupt the a-component
                return out
        res = pink_formula_battery(R, np.random.default_rng(seed), n=n_tuples,
                                   theta_fn=theta_fn)
        details[name] = res
        ok = ok and not any(res.values())
    return ok, details


def _central_series_seeds(seed, count=20):
    """Seeded generator sets over rings of dimension <= 5, sized so that the
    generated groups stay exhaustively enumerable."""
    rings = [(3, 2, 2), (3, 3, 2), (5, 2, 2), (9, 2, 2), (7, 2, 2),
             (3, 4, 1), (5, 3, 1)]
    out = []
    rng = np.random.default_rng(seed)
    for i in range(count):
        q, k, ngens = rings[i % len(rings)]
        out.append((q, k, int(rng.integers(0, 2 ** 31)), ngens))
    return out


def _check_central_series(seed, count=20, cap=30000):
    details = []
    ok = True
    checked = 0
    for (q, k, s, ngens) in _central_series_seeds(seed, count):
        A = make_truncated_poly_ring(q, k)
        R = m2_structure(A)
        rng = np.random.default_rng(s)
        gens = batch_theta_inv(R, random_rad0(R, rng, ngens))
        G = generate_group(R, [R.elem(g) for g in gens], cap=cap)
        if G.n > 4000:
            details.append({"ring": f"F{q}[X]/(X^{k})", "skipped": G.n})
            continue
        checked += 1
        L = lie_of_subgroup(G)
        gs = group_series(G, 4)
        ls = descending_series(L, 4)
        agree = True
        for n in range(1, 4):
            want = {v.astype(np.int8).tobytes()
                    for v in batch_theta_inv(R, ls[n].enumerate(cap=10 ** 6))}
            got = {v.astype(np.int8).tobytes() for v in gs[n].elements}
            agree = agree and (want == got)
        gamma_eq = G.n == R.p ** L.dim
        details.append({"ring": f"F{q}[X]/(X^{k})", "order": G.n,
                        "series_agree": agree, "gamma_is_full_preimage": gamma_eq})
        ok = ok and agree
    return ok and checked >= count, details


def _check_converse(seed):
    A = make_truncated_poly_ring(3, 4)
    R = m2_structure(A)
    from .instances import component_block_rows, monomial
    rows = component_block_rows(R, list(A.maxideal.basis))
    L = LieSubspace(R, rows)
    H, P = pink_converse(L)
    LH = lie_of_subgroup(H)
    dims = [s.dim for s in descending_series(LH, 4)]
    ok = (H.n == 3 ** 9) and (LH == L) and dims == [9, 6, 3, 0]
    return ok, {"order": H.n, "series_dims": dims}


def _check_star_law(seed):
    ex = example8(3, 4, with_essential=False, with_congruence=False)
    L2 = descending_series(ex.L, 2)[1]
    ok1, _ = star_quotient_checks(ex.L, L2, cap=3 ** 3)
    ok2, _ = theta_star_morphism_check(ex.Gamma, ex.L, L2,
                                       rng=np.random.default_rng(seed))
    return ok1 and ok2, {"group_law": ok1, "morphism": ok2}


def _check_example_family(seed):
    details = {}
    ok = True
    for k in (2, 3, 4):
        ex = example8(3, k)
        rep = key_measure_check(ex.G, ex.essential.A_ess)
        d = {"gamma": ex.Gamma.n, "dim_L": ex.L.dim, "lie_shape": ex.L_matches,
             "relations": ex.relations_ok, "congruence": ex.congruence[0],
             "measure_ok": rep.passed}
        this = ex.L_matches and ex.relations_ok and rep.passed
        if k >= 4:
            this = this and not ex.congruence[0]
        details[f"k={k}"] = d
        ok = ok and this
    return ok, details


def _check_structure_round_trips(seed):
    from .pinklie import check_structure_theorem
    picks = {}
    for cls, build in structure_parameter_sets():
        picks.setdefault(cls, build)   # first (smallest) instance per class
    details = {}
    ok = True
    for cls, build in picks.items():
        data = build()
        rep = structure_round_trip(cls, data["R"], data["lie_rows"], data["gbar"])
        this = rep["lie_recovered"] and rep["admissible"]
        details[cls] = {"recovered": rep["lie_recovered"], "admissible": rep["admissible"],
                        "order": rep["group_order"]}
        ok = ok and this
    return ok, details


def _check_complements(seed):
    """Trace multiplication, coset transport, functoriality, and the
    pseudo-ring description of P on the k=4 example."""
    ex = example8(3, 4, with_essential=False, with_congruence=False)
    R, G, L = ex.R, ex.Gamma, ex.L
    series = descending_series(L, 4)
    ok_mult = True
    for gi in range(G.n):
        t = R.trace_vec(G.elements[gi])
        for Ln in series:
            scaled = FpSubspace(R.p, R.dim, [R.ring_scale(t, v[None, :])[0] for v in Ln.basis]) \
                if Ln.dim else FpSubspace(R.p, R.dim)
            if not (scaled.dim == Ln.dim and all(Ln.contains(v) for v in scaled.basis)):
                ok_mult = False
    # theta transports Gamma_n-cosets to L_n-cosets inside Gamma_2
    gs = group_series(G, 3)
    g2, g3 = gs[1], gs[2]
    L2, L3 = series[1], series[2]
    ok_coset = {batch_theta(R, g2.elements[i][None, :])[0].astype(np.int8).tobytes()
                for i in range(g2.n)} == {v.astype(np.int8).tobytes()
                                          for v in L2.enumerate(cap=10 ** 6)}
    for i in range(min(g2.n, 8)):
        base = batch_theta(R, R.batch_mul_elem_left(g2.elements[i], g3.elements))
        want = {(v % R.p).astype(np.int8).tobytes()
                for v in (batch_theta(R, g2.elements[i][None, :])[0] + L3.enumerate(cap=10 ** 6)) % R.p}
        got = {v.astype(np.int8).tobytes() for v in base}
        ok_coset = ok_coset and (want == got)
    # functoriality through truncation F3[X]/(X^4) -> F3[X]/(X^2)
    A = ex.ring
    xs = np.zeros(A.dim, dtype=np.int64)
    xs[2] = 1   # X^2 generates the truncation ideal
    Rq, apply = m2_quotient_map(R, [xs])
    Gq = generate_group(Rq, [Rq.elem(v) for v in apply(np.array([ex.g.v, ex.h.v]))])
    Lq = lie_of_subgroup(Gq)
    ok_functo = True
    for n in range(4):
        pushed = FpSubspace(Rq.p, Rq.dim, apply(series[n].basis)) if series[n].dim \
            else FpSubspace(Rq.p, Rq.dim)
        target = descending_series(Lq, 4)[n]
        ok_functo = ok_functo and pushed == target.space
    # P equals the closed pseudo-ring generated by tr(gamma) - 2
    P = L.trace_pseudoring()
    A_ = R.A
    rows = [(R.trace_vec(G.elements[i]) - 2 * A_.one) % R.p for i in range(G.n)]
    Q = FpSubspace(R.p, A_.dim, rows)
    while True:
        ext = [A_.mul_vec(u, v) for u in Q.basis for v in Q.basis]
        Q2 = FpSubspace(R.p, A_.dim, list(Q.basis) + ext)
        if Q2.dim == Q.dim:
            break
        Q = Q2
    ok_pseudo = Q == P
    ok = ok_mult and ok_coset and ok_functo and ok_pseudo
    return ok, {"trace_multiplication": ok_mult, "coset_transport": ok_coset,
                "functoriality": ok_functo, "pseudo_ring_description": ok_pseudo}


def _check_psi(seed):
    ex = example8(3, 4, with_essential=False, with_congruence=False)
    L2 = descending_series(ex.L, 2)[1]
    rng = np.random.default_rng(seed)
    oks = []
    for _ in range(3):
        gamma = ex.Gamma.elements[int(rng.integers(0, ex.Gamma.n))]
        rep = measure_change_psi(ex.R, ex.L, L2, gamma)
        oks.append(rep["bijective"] and rep["affine"]
                   and rep["image_matches_trJg_plus_I2"] in (True, None))
    return all(oks), {"trials": len(oks)}


def _check_series_identities(seed):
    d = delta_expansion(2, 100000)
    supp_ok = set(d.support()) == {n * n for n in range(1, 317, 2)}
    d3 = delta_expansion(3, 64)
    frob = series_pow(d3, 3) == d3.dilate(3)
    f = series_pow(delta_expansion(2, 40000), 5)
    hecke_ok = hecke_T(3, 0, f).coeff(1) == f.coeff(3)
    return supp_ok and frob and hecke_ok, {
        "delta_mod2_support": supp_ok, "frobenius": bool(frob), "hecke_a1": hecke_ok}


VERIFY_CHECKS = [
    ("ring_axioms", _check_ring_axioms),
    ("theta_identities", _check_theta_identities),
    ("central_series_match", _check_central_series),
    ("converse_theorem", _check_converse),
    ("star_law", _check_star_law),
    ("example_family", _check_example_family),
    ("structure_round_trips", _check_structure_round_trips),
    ("theory_complements", _check_complements),
    ("measure_change_of_variables", _check_psi),
    ("series_identities", _check_series_identities),
]


def cmd_verify(args):
    results = {}

    def run(item):
        name, fn = item
        if name == "theta_identities":
            ok, details = fn(args.seed, n_tuples=args.tuples, fault=args.inject_fault)
        else:
            ok, details = fn(args.seed)
        return name, ok, details

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, VERIFY_CHECKS))
    else:
        rows = [run(item) for item in VERIFY_CHECKS]
    for name, ok, details in sorted(rows):
        results[name] = {"passed": ok, "details": details}
    passed = all(r["passed"] for r in results.values())
    report = {
        "command": "verify",
        "version": __version__,
        "config": {"seed": args.seed, "tuples": args.tuples,
                   "inject_fault": args.inject_fault},
        "passed": passed,
        "checks": results,
    }
    emit(report, args.out)
    for name, r in results.items():
        print(f"[{'PASS' if r['passed'] else 'FAIL'}] {name}", file=sys.stderr)
    return 0 if passed else 1


def cmd_example8(args):
    ex = example8(args.p, args.k, cap=args.cap)
    L = ex.L
    series = descending_series(L, 4)
    dec = decompose(L)
    P = L.trace_pseudoring()
    measure = key_measure_check(ex.G, ex.essential.A_ess)
    wit = essential_not_ideal_witness(ex.ring, ex.essential.A_ess) \
        if ex.essential.A_ess.dim else None
    checks = {
        "conjugation_relations": ex.relations_ok,
        "lie_algebra_shape": ex.L_matches,
        "measure_bound": measure.passed,
    }
    report = {
        "command": "example8",
        "version": __version__,
        "config": {"p": args.p, "k": args.k, "cap": args.cap},
        "ring": ex.ring.descriptor(),
        "gamma_order": ex.Gamma.n,
        "group_order": ex.G.n,
        "dim_L": [s.dim for s in series],
        "decomposable": dec.decomposable,
        "strongly_decomposable": dec.strongly,
        "I1": dec.I1, "B1": dec.B1, "C1": dec.C1,
        "P": P,
        "A_ess": ex.essential.A_ess,
        "weakly_odd": ex.essential.weakly_odd,
        "congruence_subgroup": ex.congruence[0],
        "congruence_witness": ex.congruence[1],
        "measure": {"bound": measure.bound, "min": measure.min_measure,
                    "forms": measure.n_forms, "passed": measure.passed,
                    "vacuous": measure.vacuous},
        "essential_not_ideal_witness": None if wit is None else
            {"x": wit[0].tolist(), "a": wit[1].tolist()},
        "checks": checks,
    }
    emit(report, args.out)
    return 0 if all(checks.values()) else 1


def cmd_density(args):
    f = parse_form(args.form, args.p, args.X)
    rep = density_sweep(f, args.X, Np=args.np)
    report = {
        "command": "density",
        "version": __version__,
        "config": {"p": args.p, "form": args.form, "X": args.X, "np": args.np},
        "report": rep.to_dict(),
    }
    emit(report, args.out)
    return 0


def cmd_delta_power(args):
    f = series_pow(delta_expansion(args.p, args.deg), args.n)
    header = f"{args.p} {args.deg}\n".encode()
    if args.p == 2:
        payload = f.bits.to_bytes(args.deg // 8 + 1, "little")
    else:
        payload = bytes(int(c) for c in f.coeffs_array())
    with open(args.out, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    print(json.dumps({"command": "delta-power", "version": __version__,
                      "config": {"p": args.p, "n": args.n, "deg": args.deg},
                      "bytes": len(header) + len(payload), "out": args.out},
                     sort_keys=True))
    return 0


def cmd_cyclotomic(args):
    f = parse_form(args.form, args.p, args.X)
    verdict, data = cyclotomic_test(f, args.M, args.X, Np=args.np or 1)
    report = {
        "command": "cyclotomic",
        "version": __version__,
        "config": {"p": args.p, "form": args.form, "M": args.M, "X": args.X},
        "cyclotomic": verdict,
        "table" if verdict else "violation": data if verdict else list(data),
    }
    emit(report, args.out)
    return 0


def cmd_span(args):
    primes = [int(t) for t in args.primes.split(",")]
    f = parse_form(args.form, args.p, args.deg)
    span = hecke_span(f, primes, max_dim=args.max_dim, k_eff=args.k_eff)
    nil = {}
    if args.p == 2:
        for ell in primes:
            order, _ = nilpotency_check(span, ell, 0)
            nil[str(ell)] = order
    report = {
        "command": "span",
        "version": __version__,
        "config": {"p": args.p, "form": args.form, "primes": primes,
                   "deg": args.deg, "max_dim": args.max_dim},
        "dim": span.dim,
        "usable_deg": span.usable_deg,
        "matrices": {str(ell): span.matrices[ell].tolist() for ell in primes},
        "nilpotency_order": nil,
    }
    emit(report, args.out)
    return 0


def cmd_analyze(args):
    A = make_truncated_poly_ring(args.q, args.k)
    R = m2_structure(A)
    if args.gens_preset == "example8":
        ex = example8(A.p, args.k, cap=args.cap, with_essential=False,
                      with_congruence=False)
        gens = [ex.g, ex.h, R.j_elem()]
    else:
        data = json.loads(args.gens)
        gens = [R.elem(np.array(v, dtype=np.int64)) for v in data]
    G = generate_group(R, gens, cap=args.cap)
    gamma_idx = G.subgroup_sr1()
    Gamma = FiniteMatrixGroup(R, G.elements[gamma_idx])
    L = lie_of_subgroup(Gamma)
    series = descending_series(L, 4)
    dec = decompose(L)
    ess = essential_data(G, L2=series[1])
    measure = key_measure_check(G, ess.A_ess)
    cong = is_congruence_subgroup(L, R)
    from .pseudorep import classify_projective_image, residual_image_group
    try:
        residual_class = classify_projective_image(residual_image_group(G)).tag()
    except ValueError:
        residual_class = None
    report = {
        "command": "analyze",
        "version": __version__,
        "config": {"q": args.q, "k": args.k, "cap": args.cap,
                   "gens_preset": args.gens_preset},
        "generators": [g.v.tolist() for g in gens],
        "ring": A.descriptor(),
        "residual_class": residual_class,
        "group_order": G.n,
        "gamma_order": Gamma.n,
        "dim_L": [s.dim for s in series],
        "decomposable": dec.decomposable,
        "strongly_decomposable": dec.strongly,
        "I1": dec.I1, "B1": dec.B1, "C1": dec.C1,
        "P": L.trace_pseudoring(),
        "A_ess": ess.A_ess,
        "weakly_odd": ess.weakly_odd,
        "congruence_subgroup": cong[0],
        "congruence_witness": cong[1],
        "measure": {"bound": measure.bound, "min": measure.min_measure,
                    "forms": measure.n_forms, "passed": measure.passed,
                    "vacuous": measure.vacuous},
    }
    emit(report, args.out)
    return 0 if measure.passed else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="pink", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="run the assertion battery")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tuples", type=int, default=1000)
    v.add_argument("--inject-fault", choices=["theta"], default=None,
                   help="test hook: corrupt a map and expect failure")
    v.add_argument("--out", default=None)
    v.set_defaults(fn=cmd_verify)

    e = sub.add_parser("example8", help="two-generator example report")
    e.add_argument("--p", type=int, default=3)
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--cap", type=int, default=2 * 10 ** 6)
    e.add_argument("--out", default=None)
    e.set_defaults(fn=cmd_example8)

    d = sub.add_parser("density", help="prime-coefficient density sweep")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--form", required=True, help="delta^N")
    d.add_argument("--X", type=int, required=True)
    d.add_argument("--np", type=int, default=None, help="level-characteristic product")
    d.add_argument("--out", default=None)
    d.set_defaults(fn=cmd_density)

    dp = sub.add_parser("delta-power", help="write Delta^n mod p to a file")
    dp.add_argument("--p", type=int, required=True)
    dp.add_argument("--n", type=int, required=True)
    dp.add_argument("--deg", type=int, required=True)
    dp.add_argument("--out", required=True)
    dp.set_defaults(fn=cmd_delta_power)

    c = sub.add_parser("cyclotomic", help="a_ell constancy mod M")
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--form", required=True)
    c.add_argument("--M", type=int, required=True)
    c.add_argument("--X", type=int, required=True)
    c.add_argument("--np", type=int, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(fn=cmd_cyclotomic)

    s = sub.add_parser("span", help="Hecke-stable span with matrices")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--form", required=True)
    s.add_argument("--primes", required=True, help="comma-separated")
    s.add_argument("--deg", type=int, required=True)
    s.add_argument("--max-dim", type=int, default=64)
    s.add_argument("--k-eff", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=cmd_span)

    a = sub.add_parser("analyze", help="Lie report for a generated group")
    a.add_argument("--q", type=int, required=True)
    a.add_argument("--k", type=int, required=True)
    a.add_argument("--gens", default=None, help="JSON list of flat coordinate rows")
    a.add_argument("--gens-preset", choices=["example8"], default=None)
    a.add_argument("--cap", type=int, default=2 * 10 ** 6)
    a.add_argument("--out", default=None)
    a.set_defaults(fn=cmd_analyze)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.cmd == "analyze" and not (args.gens or args.gens_preset):
        ap.error("analyze needs --gens or --gens-preset")
    try:
        return args.fn(args)
    except (DegreeExhausted, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
