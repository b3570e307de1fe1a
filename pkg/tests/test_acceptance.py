"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import itertools
import random
import time

import gmpy2
import numpy as np
import pytest

from symcurve import linalg
from symcurve.curves import symbol_at
from symcurve.diagrams import ReducedDiagram, reduced_diagrams_up_to
from symcurve.frames import (curve_from_structure, default_jet_order, equivalence_test, flat_curve,
                             free_matrix, invariant_fingerprint, normalize, random_curve,
                             random_symplectic, reconstruct, recovered_fiber, structure_from_free,
                             structure_function)
from symcurve.frenet import EuclideanCurve, frenet_frame
from symcurve.jets import Jet, MatrixJet
from symcurve.prolongation import (coboundary_image, coboundary_pairs, coboundary_test,
                                   complementarity_audit, d_condition_kernel, d_operator,
                                   flat_symmetry_check, graded_algebra, normalization_space,
                                   prolongation, unparametrized_prolongation)
from symcurve.scalars import EXACT

Q = gmpy2.mpq


def diagrams(max_boxes):
    out = []
    for d in reduced_diagrams_up_to(max_boxes):
        if d not in out:
            out.append(d)
    return out


D8 = diagrams(8)
D6 = diagrams(6)


def closed_form(red):
    return sum(r * (r - 1) // 2 for r in red.multiplicities)


def random_vec(alg, rng, degrees, height=6):
    return {g: Q(rng.randint(-height, height), rng.randint(1, height))
            for g in range(alg.coords.n) if alg.coords.degree[g] in degrees}


def roundtrip_order(red):
    p = red.lengths[0]
    return 12 if p <= 3 else default_jet_order(red)


def report(capsys, number, ok, detail):
    line = "criterion %2d %s  %s" % (number, "PASS" if ok else "FAIL", detail)
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


# --- algebra -----------------------------------------------------------------


def crit1():
    t = time.time()
    bad = []
    for red in D8:
        U = prolongation(red)
        dims = U.dims()
        if U.dim() != closed_form(red) or any(v for k, v in dims.items() if k >= 1):
            bad.append(red.label())
    elapsed = time.time() - t
    ok = not bad and elapsed < 60
    return ok, "%d diagrams, closed form mismatches %s, %.1f s" % (len(D8), bad, elapsed)


def crit2():
    bad = []
    pairs = 0
    for red in D8:
        alg = graded_algebra(red)
        U = prolongation(alg)
        E = U.echelon()
        elems = [alg.endo(v) for v in U.all_vectors()]
        for x, y in itertools.product(elems, repeat=2):
            pairs += 1
            if not E.contains(alg.vec(x.bracket(y))):
                bad.append(red.label())
    return not bad, "%d basis pairs, failures %s" % (pairs, sorted(set(bad)))


def crit3():
    rng = random.Random(3)
    bad = []
    for red in D8:
        alg = graded_algebra(red)
        n = alg.coords.n
        for k in range(0, alg.top + 1):
            Ek, Ei = linalg.Echelon(n), linalg.Echelon(n)
            ker, img = d_condition_kernel(alg, k), coboundary_image(alg, k)
            for v in ker:
                Ek.add(v)
            for v in img:
                Ei.add(v)
            if not (Ek.dim == Ei.dim and all(Ek.contains(v) for v in img)
                    and all(Ei.contains(v) for v in ker)):
                bad.append((red.label(), k))
        for _ in range(50):
            X = alg.endo(random_vec(alg, rng, range(1, alg.top + 1)))
            Y = alg.delta.bracket(X)
            cert = coboundary_test(Y)
            if not cert.verdict or alg.delta.bracket(cert.preimage) != Y:
                bad.append((red.label(), "roundtrip"))
    return not bad, "%d diagrams x 50 roundtrips, failures %s" % (len(D8), bad[:5])


def crit4():
    rng = random.Random(4)
    checked = 0
    bad = []
    for red in D8:
        alg = graded_algebra(red)
        dd = alg.diagram
        pairs = [(b, rho) for b, rho in coboundary_pairs(dd) if b.row == rho.row]
        for _ in range(100):
            Y = alg.endo(random_vec(alg, rng, range(0, alg.top + 1)))
            for b, rho in pairs:
                D = d_operator(Y, b, rho)
                want = D.T if dd.position(b) % 2 == 1 else -D.T
                checked += 1
                if not np.array_equal(D, want):
                    bad.append((red.label(), b, rho))
    return not bad, "%d D-values, failures %s" % (checked, bad[:5])


def crit5():
    bad = []
    for red in D8:
        alg = graded_algebra(red)
        if not complementarity_audit(normalization_space(alg, "phi0"), ad_samples=20,
                                     rng=random.Random(5))["ok"]:
            bad.append((red.label(), "phi0"))
        for s in range(5):
            audit = complementarity_audit(normalization_space(alg, random.Random(100 + s)))
            if not audit["ok"]:
                bad.append((red.label(), s))
    return not bad, "phi0 + 5 random assignments, 20 Cayley elements each, failures %s" % bad[:5]


def crit10():
    rng = random.Random(10)
    bad = []
    for red in D8:
        alg = graded_algebra(red)
        U = prolongation(alg)
        for y in U.elements():
            if not flat_symmetry_check(y):
                bad.append((red.label(), "member"))
        tried = 0
        while tried < 50:
            X = alg.endo(random_vec(alg, rng, range(0, alg.top + 1)))
            if U.contains(X):
                continue
            tried += 1
            if flat_symmetry_check(X):
                bad.append((red.label(), "non-member"))
    return not bad, "%d diagrams, failures %s" % (len(D8), bad[:5])


def crit11():
    bad = [red.label() for red in D8
           if unparametrized_prolongation(red).dim() - prolongation(red).dim() != 3]
    return not bad, "%d diagrams, failures %s" % (len(D8), bad)


# --- curves ------------------------------------------------------------------


def crit6():
    worst = 0
    bad = []
    for red in D6:
        res = normalize(flat_curve(red))
        alg = graded_algebra(red)
        u0 = prolongation(alg).dims().get(0, 0)
        for k, seq in res.free.items():
            for vec in seq:
                for x in vec:
                    worst = max(worst, abs(x))
        for stage in res.trace:
            expect = u0 + sum(alg.dim(j) for j in range(stage.degree + 1, alg.top + 1))
            if stage.residual_gauge_dim != expect:
                bad.append((red.label(), stage.degree))
    ok = worst <= 1e-40 and not bad
    return ok, "%d diagrams, max |coefficient| %.2e, trace mismatches %s" % (len(D6), worst, bad)


def _fiber_error(res, gen):
    be = res.backend
    U = recovered_fiber(res, gen.gamma)
    alg = graded_algebra(res.reduced)
    deg = alg.model.entry_degrees
    worst = 0
    with be.context():
        for k, order in res.orders.items():
            for n in range(order + 1):
                drawn = linalg.coerce_matrix(gen.C.coeffs[n], be)
                target = U.T.dot(drawn).dot(U)
                worst = max(worst, linalg.max_abs((free_matrix(res, k, n) - target)[deg == k]))
        # the fiber must lie in the residual group, so its transpose is its inverse
        signs_ok = linalg.max_abs(U.T.dot(U) - linalg.identity(U.shape[0], be)) < 1e-30
        if res.reduced.multiplicity_one:
            signs_ok = signs_ok and all(abs(abs(x) - 1) < 1e-30 or abs(x) < 1e-30 for x in U.flat)
    return worst, signs_ok


def crit7():
    worst = 0
    slow = 0
    bad = []
    for red in D6:
        K = roundtrip_order(red)
        for seed in range(10):
            gen = random_curve(red, seed=seed, jet_order=K)
            t = time.time()
            res = normalize(gen.curve, jet_order=K)
            elapsed = time.time() - t
            if red.m <= 4 and K <= 12:
                slow = max(slow, elapsed)
            err, signs_ok = _fiber_error(res, gen)
            worst = max(worst, err)
            if err > 1e-30 or not signs_ok:
                bad.append((red.label(), seed))
    ok = not bad and slow < 5
    return ok, "%d curves, max error %.2e, slowest (m<=4, K<=12) %.2f s, failures %s" % (
        10 * len(D6), worst, slow, bad[:5])


def _fingerprint_gap(f1, f2):
    if f1.kind == "complete":
        gap = 0
        for k in f1.values:
            for n in range(min(f1.orders[k], f2.orders[k]) + 1):
                gap = max([gap] + [abs(x - y) for x, y in zip(f1.values[k][n], f2.values[k][n])])
        return gap
    return max([0] + [abs(x - y) for x, y in zip(f1.values, f2.values)])


def crit8():
    worst = 0
    rng = random.Random(8)
    cases = [[(2, 1), (1, 1)], [(3, 1)], [(1, 2)]]
    for rows in cases:
        c = random_curve(ReducedDiagram(rows), seed=1).curve
        res = normalize(c)
        base = invariant_fingerprint(res)
        with res.backend.context():
            for _ in range(20):
                A = random_symplectic(c.m, rng)
                f = invariant_fingerprint(normalize(c.transformed(A)))
                worst = max(worst, _fingerprint_gap(base, f))
    return worst <= 1e-30, "%d diagrams x 20 transforms, max gap %.2e" % (len(cases), worst)


def crit9():
    rng = random.Random(9)
    worst = 0
    for red in D6:
        c = random_curve(red, seed=2).curve
        c = c.transformed(random_symplectic(c.m, rng))
        # the generated frame is a truncated jet, so the symbol is taken at its base point
        s = symbol_at(c)
        worst = max(worst, s.commutation_defect, s.symplectic_defect, s.grading_defect)
    return worst <= 1e-30, "%d diagrams, max defect %.2e" % (len(D6), worst)


def _perturbed(gen, red, K):
    coeffs = {k: [list(v) for v in seq] for k, seq in gen.coefficients.items()}
    k = min(k for k in coeffs if coeffs[k] and coeffs[k][0])
    coeffs[k][1][0] += 1
    C = structure_from_free(gen.N, coeffs, K - 1)
    return curve_from_structure(C, red, K)[0]


def crit12():
    rng = random.Random(12)
    wrong = []
    count = 0
    for p in range(1, 5):
        red = ReducedDiagram([(p, 1)])
        K = default_jet_order(red)
        for seed in range(25):
            gen = random_curve(red, seed=seed, jet_order=K)
            A = random_symplectic(gen.curve.m, rng)
            v_eq = equivalence_test(gen.curve, gen.curve.transformed(A))
            v_ne = equivalence_test(gen.curve, _perturbed(gen, red, K))
            count += 2
            if v_eq.verdict != "equivalent" or not v_eq.complete:
                wrong.append((p, seed, "eq", v_eq.verdict))
            if v_ne.verdict != "inequivalent" or not v_ne.complete:
                wrong.append((p, seed, "ne", v_ne.verdict))
    return not wrong, "%d pairs, wrong verdicts %s" % (count, wrong[:5])


def crit13():
    notes = []
    # helix (2 cos t, 2 sin t, t): curvature 2/5, torsion 1/5
    K = 12
    cos = [Q(0) if n % 2 else Q((-1) ** (n // 2), _fact(n)) for n in range(K + 1)]
    sin = [Q((-1) ** (n // 2), _fact(n)) if n % 2 else Q(0) for n in range(K + 1)]
    helix = EuclideanCurve([Jet([2 * c for c in cos]), Jet([2 * s for s in sin]),
                            Jet([Q(0), Q(1)] + [Q(0)] * (K - 1))])
    res = frenet_frame(helix)
    be = res.R.backend
    with be.context():
        k, t = res.curvatures
        helix_err = max(abs(k.coeffs[0] - Q(2, 5)), abs(t.coeffs[0] - Q(1, 5)),
                        max(abs(x) for x in k.coeffs[1:] + t.coeffs[1:]))
        support = True
        for M in res.R.coeffs:
            for i in range(3):
                for j in range(i):
                    if i != j + 1 and abs(M[i, j]) > 1e-30:
                        support = False
        support = support and all(x.coeffs[0] > 0 for x in res.curvatures)
    notes.append("helix error %.2e" % helix_err)
    exact = True
    for rows in ([(1, 1)], [(2, 1), (1, 1)], [(3, 1)], [(1, 3)]):
        gen = random_curve(ReducedDiagram(rows), seed=13)
        model = gen.N.algebra.model
        G = reconstruct(gen.C, linalg.identity(model.dim, EXACT))
        C = structure_function(G, model.J)
        exact = exact and all(np.array_equal(a, b) for a, b in zip(C.coeffs, gen.C.coeffs))
    R = MatrixJet([np.array([[0, -Q(n + 1, 3), Q(0)], [Q(n + 1, 3), 0, -Q(1, n + 2)],
                             [Q(0), Q(1, n + 2), 0]], dtype=object) for n in range(6)])
    G = reconstruct(R, linalg.identity(3, EXACT))
    exact = exact and all(np.array_equal(a, b) for a, b in zip(structure_function(G).coeffs, R.coeffs))
    notes.append("subdiagonal support %s, exact roundtrip %s" % (support, exact))
    return helix_err <= 1e-10 and support and exact, ", ".join(notes)


def _fact(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


CRITERIA = {1: crit1, 2: crit2, 3: crit3, 4: crit4, 5: crit5, 6: crit6, 7: crit7, 8: crit8,
            9: crit9, 10: crit10, 11: crit11, 12: crit12, 13: crit13}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number]()
    assert report(capsys, number, ok, detail), detail


if __name__ == "__main__":
    import sys
    chosen = [int(a) for a in sys.argv[1:]] or sorted(CRITERIA)
    for number in chosen:
        fn = CRITERIA[number]
        report(None, number, *fn())
