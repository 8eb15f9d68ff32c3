"""Acceptance criteria, each run at its stated tolerance.

Every test prints a single ``PASS``/``FAIL`` line (visible with ``-s``, and
repeated in the terminal summary) before asserting.
"""
import time

import numpy as np

from twirlkit import groups as gm
from twirlkit import matrix as mx
from twirlkit.oracle import mc_compare, mc_twirl
from twirlkit.representability import (
    brs_prescription,
    check_representable,
    counterexample_report,
    twirled_operation,
)
from twirlkit.twirl import (
    apply_twirl,
    build_twirl,
    coherence_projector,
    compose_twirls,
    partial_inverse,
    twirled_purity_prediction,
)

from conftest import ACCEPTANCE_LINES
from helpers import random_channel, random_charges, random_fejer, random_state


def verdict(number, name, ok, detail):
    line = f"[{number:02d}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def random_qubit_params(rng):
    p = rng.uniform()
    b = np.sqrt(p * (1 - p)) * np.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return p, b, rng.uniform(-np.pi, np.pi)


def diag_kraus_op(rng, d, n_kraus=2):
    """Channel whose Kraus operators are all diagonal, hence covariant."""
    weights = rng.dirichlet(np.ones(n_kraus), size=d).T
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(n_kraus, d)))
    return mx.KrausOperation(tuple(np.diag(np.sqrt(w) * ph) for w, ph in zip(weights, phases)))


def test_counterexample_reproduction():
    r = counterexample_report(0.75, 0.25j, np.pi / 2)
    err = max(np.abs(r.sigma_prime.entries - np.diag([0.25, 0.75])).max(),
              np.abs(r.sigma_dprime.entries - np.diag([0.5, 0.5])).max(),
              np.abs(r.sigma_prime.entries - r.closed_form_prime).max(),
              np.abs(r.sigma_dprime.entries - r.closed_form_dprime).max(),
              abs(r.trace_distance - 0.25))
    rng = np.random.default_rng(101)
    sweep_err = 0.0
    real_max = 0.0
    for i in range(100):
        p, b, theta = random_qubit_params(rng)
        if i % 10 == 0:
            b = complex(b.real, 0.0)
        s = counterexample_report(p, b, theta)
        expected = abs(b.imag * np.sin(theta))
        sweep_err = max(sweep_err, abs(s.trace_distance - expected))
        if b.imag == 0:
            real_max = max(real_max, s.trace_distance)
    ok = err <= 1e-12 and sweep_err <= 1e-12 and real_max <= 1e-12 and r.prescription_fails
    verdict(1, "counterexample reproduction", ok,
            f"example err {err:.1e}, sweep err {sweep_err:.1e}, Im(b)=0 distance {real_max:.1e}")


def test_composition_rule():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 7))
        rep = gm.U1Rep(random_charges(rng, d))
        t1 = build_twirl(random_fejer(rng, int(rng.integers(0, 4))), rep)
        t2 = build_twirl(random_fejer(rng, int(rng.integers(0, 4))), rep)
        rho = random_state(rng, d)
        composed = apply_twirl(compose_twirls(t1, t2), rho)
        sequential = apply_twirl(t1, apply_twirl(t2, rho))
        worst = max(worst, np.linalg.norm(composed - sequential))
    verdict(2, "composition rule", worst <= 1e-10, f"max Frobenius gap {worst:.1e}")


def test_associativity():
    rng = np.random.default_rng(103)
    worst = 0.0
    frep = gm.permutation_rep(3)
    for i in range(20):
        if i % 4 == 3:
            rep = frep
            ts = [build_twirl(gm.FiniteGroupDensity(frep.group, rng.dirichlet(np.ones(6))), rep)
                  for _ in range(3)]
        else:
            rep = gm.U1Rep(random_charges(rng, int(rng.integers(2, 5))))
            ts = [build_twirl(random_fejer(rng, int(rng.integers(0, 3))), rep) for _ in range(3)]
        a, b, c = ts
        left = compose_twirls(compose_twirls(a, b), c).superop()
        right = compose_twirls(a, compose_twirls(b, c)).superop()
        product = a.superop() @ b.superop() @ c.superop()
        left_mul = (a.superop() @ b.superop()) @ c.superop()
        right_mul = a.superop() @ (b.superop() @ c.superop())
        worst = max(worst, np.abs(left - right).max(), np.abs(left - product).max(),
                    np.abs(left_mul - right_mul).max())
    verdict(3, "associativity", worst <= 1e-10, f"max entry gap {worst:.1e}")


def test_purity_formula():
    rng = np.random.default_rng(104)
    formula_err = 0.0
    increase = -np.inf
    for _ in range(100):
        d = int(rng.integers(1, 7))
        rep = gm.U1Rep(random_charges(rng, d))
        t = build_twirl(random_fejer(rng, int(rng.integers(0, 4))), rep)
        rho = random_state(rng, d, rank=int(rng.integers(1, d + 1)))
        after = mx.purity(apply_twirl(t, rho))
        formula_err = max(formula_err, abs(after - twirled_purity_prediction(rho, t)))
        increase = max(increase, after - mx.purity(rho))
    ok = formula_err <= 1e-12 and increase <= 1e-12
    verdict(4, "purity formula", ok,
            f"formula err {formula_err:.1e}, max purity change {increase:.1e}")


def test_representability_equivalence():
    rng = np.random.default_rng(105)
    mismatches = 0
    n_pass = n_fail = 0
    for i in range(200):
        d = int(rng.integers(2, 5))
        rep = gm.U1Rep(random_charges(rng, d))
        kind = i % 4
        if kind == 0:
            w = gm.uniform_u1()
        elif kind == 1:
            w = gm.delta_density_u1(rng.uniform(0, 2 * np.pi), rep.max_difference())
        else:
            w = random_fejer(rng, int(rng.integers(0, 3)))
        t = build_twirl(w, rep)
        choice = rng.integers(3)
        if choice == 0:
            op = random_channel(rng, d)
        elif choice == 1:
            op = diag_kraus_op(rng, d)
        else:
            op = mx.KrausOperation.unitary(np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, d))))
        report = check_representable(op, t)
        s = t.superop()
        gap = np.linalg.norm(twirled_operation(op, t) @ s - s @ mx.kraus_to_superop(op))
        condition = report.residual <= 1e-10
        commutes = gap <= 1e-9
        mismatches += condition != commutes
        n_pass += condition
        n_fail += not condition

    qubit = gm.U1Rep(np.array([0, 1]))
    total = build_twirl(gm.uniform_u1(), qubit)
    z_worst = 0.0
    for theta in rng.uniform(0, 2 * np.pi, 20):
        z_worst = max(z_worst, check_representable(
            mx.KrausOperation.unitary(mx.z_rotation(theta)), total).residual)
    x_report = check_representable(mx.KrausOperation.unitary(mx.x_rotation(np.pi / 2)), total)
    ok = (mismatches == 0 and n_pass > 0 and n_fail > 0 and z_worst <= 1e-10
          and not x_report.representable and x_report.residual >= 0.1)
    verdict(5, "representability equivalence", ok,
            f"{mismatches} mismatches over {n_pass} pass / {n_fail} fail, "
            f"z residual {z_worst:.1e}, x(pi/2) residual {x_report.residual:.3f}")


def test_total_twirl_identities():
    rng = np.random.default_rng(106)
    worst = 0.0
    for i in range(30):
        if i % 3 == 2:
            rep = gm.permutation_rep(3)
            t = build_twirl(gm.uniform_finite(rep.group), rep)
            op = mx.KrausOperation.unitary(rep.unitaries[int(rng.integers(6))])
        else:
            d = int(rng.integers(2, 6))
            rep = gm.U1Rep(random_charges(rng, d))
            t = build_twirl(gm.uniform_u1(), rep)
            op = diag_kraus_op(rng, d)
        s = t.superop()
        s_op = mx.kraus_to_superop(op)
        lift = twirled_operation(op, t)
        worst = max(worst,
                    np.abs(coherence_projector(t) - s).max(),
                    np.abs(partial_inverse(t).superop() @ s - s).max(),
                    np.abs(lift - s @ s_op).max(),
                    np.abs(s @ s_op - s @ s_op @ s).max())
    verdict(6, "total-twirl identities", worst <= 1e-12, f"max entry gap {worst:.1e}")


def test_cptp():
    rng = np.random.default_rng(107)
    min_eig = np.inf
    tp_err = 0.0
    frep = gm.permutation_rep(3)
    crep = gm.cyclic_phase_rep(5, [0, 1, 2, 4])
    for i in range(500):
        kind = i % 5
        if kind == 3:
            t = build_twirl(gm.FiniteGroupDensity(frep.group, rng.dirichlet(np.ones(6))), frep)
        elif kind == 4:
            t = build_twirl(gm.FiniteGroupDensity(crep.group, rng.dirichlet(np.ones(5))), crep)
        else:
            d = int(rng.integers(1, 7))
            rep = gm.U1Rep(random_charges(rng, d))
            t = build_twirl(random_fejer(rng, int(rng.integers(0, 5))), rep)
        c = mx.choi_matrix(t.superop())
        min_eig = min(min_eig, mx.choi_min_eigenvalue(c))
        tp_err = max(tp_err, mx.choi_trace_error(c))
    ok = min_eig >= -1e-10 and tp_err <= 1e-12
    verdict(7, "CPTP", ok, f"min Choi eigenvalue {min_eig:.1e}, TP error {tp_err:.1e}")


def test_mc_oracle():
    rep = gm.U1Rep(np.array([0, 1]))
    w = gm.uniform_u1()
    rho = mx.qubit_state(0.75, 0.25j)
    analytic = apply_twirl(build_twirl(w, rep), rho)
    start = time.perf_counter()
    est = mc_twirl(rho, w, rep, 100_000, seed=2024)
    v = mc_compare(est, analytic, k=4.0)
    elapsed = time.perf_counter() - start

    ns = (1_000, 10_000, 100_000)
    errors = np.array([[np.abs(mc_twirl(rho, w, rep, n, seed).mean - analytic).max() for n in ns]
                       for seed in range(20)])
    mean_err = errors.mean(axis=0)
    ratios = mean_err[1:] / mean_err[:-1]
    # 1/sqrt(10) ~ 0.316 per decade
    converges = bool(np.all((ratios >= 0.15) & (ratios <= 0.7)))
    ok = v.passed and converges and elapsed <= 10
    verdict(8, "MC oracle", ok,
            f"err {v.max_error:.2e} <= {v.allowed:.2e}, decade ratios "
            f"{ratios[0]:.3f}/{ratios[1]:.3f}, n=1e5 in {elapsed:.2f}s")


def test_brs_prescription():
    rng = np.random.default_rng(109)
    cov_worst = 0.0
    for i in range(20):
        if i % 2:
            rep = gm.U1Rep(np.array([0, 1]))
            op = mx.KrausOperation.unitary(mx.z_rotation(rng.uniform(0, 2 * np.pi)))
        else:
            d = int(rng.integers(2, 5))
            rep = gm.U1Rep(random_charges(rng, d))
            op = mx.KrausOperation.unitary(np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, d))))
        t = build_twirl(gm.uniform_u1(), rep).superop()
        gap = brs_prescription(op, rep) @ t - t @ mx.kraus_to_superop(op)
        cov_worst = max(cov_worst, np.abs(gap).max())
    x_worst = 0.0
    for _ in range(20):
        p, b, theta = random_qubit_params(rng)
        r = counterexample_report(p, b, theta)
        c = np.cos(theta)
        expected = 0.5 * np.diag([1 + (2 * p - 1) * c, 1 - (2 * p - 1) * c])
        x_worst = max(x_worst, np.abs(r.sigma_dprime.entries - expected).max())
    ok = cov_worst <= 1e-10 and x_worst <= 1e-12
    verdict(9, "BRS prescription", ok,
            f"covariant gap {cov_worst:.1e}, x-rotation sigma'' err {x_worst:.1e}")


def test_diagonal_invariance():
    rng = np.random.default_rng(110)
    worst = 0.0
    for i in range(50):
        d = int(rng.integers(1, 8))
        if i % 5 == 4:
            rep = gm.cyclic_phase_rep(4, rng.integers(0, 4, size=d))
            t = build_twirl(gm.FiniteGroupDensity(rep.group, rng.dirichlet(np.ones(4))), rep)
        else:
            rep = gm.U1Rep(random_charges(rng, d))
            t = build_twirl(random_fejer(rng, int(rng.integers(0, 4))), rep)
        m = np.diag(rng.normal(size=d) + 1j * rng.normal(size=d))
        worst = max(worst, np.abs(apply_twirl(t, m) - m).max())
    verdict(10, "diagonal invariance", worst <= 1e-14, f"max entry error {worst:.1e}")
