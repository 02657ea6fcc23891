"""Acceptance suite: one test and one printed PASS/FAIL line per criterion."""
import time

import numpy as np
import pytest

from omtl.benchmark.data import synth_generate
from omtl.benchmark.evaluation import evaluate_online
from omtl.benchmark.metrics import metrics, prefix_regret_losses, regret_curve
from omtl.benchmark.protocol import SplitSpec, prepare, split_counts
from omtl.benchmark.stats import friedman_fisher
from omtl.contenders import Mogd, instantaneous_objective, mogd_gradient
from omtl.mt_oslssvr import MtOslssvr, mt_kernel_eval
from omtl.mt_wrls import MtWrls
from omtl.task_graph import TaskGraph, build_interaction_matrix, edge_sum_penalty, stacked_quadratic_form
from omtl.wrls import wrls_init

from oracles import kernel_matrix, primal_solution, random_sims, random_stream, rkhs_feature, rkhs_inner, weighted_ridge

LAMS = (0.1, 1.0, 10.0)
N_STREAMS = 20


def verdict(capsys, number, title, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}", flush=True)
    assert ok, f"criterion {number} failed: {detail}"


def sweep():
    """The shared random streams: T=3, d=2, n=60, gamma=0.5, symmetric sims."""
    rng = np.random.default_rng(2024)
    for lam in LAMS:
        for _ in range(N_STREAMS):
            S = random_sims(rng, 3)
            tasks, X, Y = random_stream(rng, 3, 2, 60)
            yield lam, S, tasks, X, Y


def test_criterion_01_mt_wrls_exactness(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    for lam, S, tasks, X, Y in sweep():
        m = MtWrls(TaskGraph.from_similarities(S, 0.5, lam), 2, 1.0)
        for i in range(60):
            m.step(tasks[i], X[i], Y[i])
            ref = primal_solution(tasks[:i + 1], X[:i + 1], Y[:i + 1], S, 0.5, lam)
            worst = max(worst, float(np.max(np.abs(m.weights.ravel() - ref))))
    dt = time.perf_counter() - t0
    verdict(capsys, 1, "MT-WRLS exactness", worst <= 1e-7 and dt < 10,
            f"max |w - w_dense| = {worst:.2e} (tol 1e-7), {dt:.2f}s (limit 10s)")


def test_criterion_02_mt_oslssvr_oracle(capsys):
    t0 = time.perf_counter()
    worst_a = worst_p = 0.0
    for lam, S, tasks, X, Y in sweep():
        m = MtOslssvr(TaskGraph.from_similarities(S, 0.5, lam), 2, nu=1e-12)
        for i in range(60):
            pred = m.step(tasks[i], X[i], Y[i])
            if i:
                # pre-update prediction against the dense solution on the previous prefix
                K = kernel_matrix(tasks[:i], X[:i], S, 0.5)
                alpha = np.linalg.solve(K + lam * np.eye(i), Y[:i])
                kq = kernel_matrix(np.append(tasks[:i], tasks[i]), np.vstack([X[:i], X[i]]), S, 0.5)[-1, :i]
                worst_p = max(worst_p, abs(pred - kq @ alpha))
        K = kernel_matrix(tasks, X, S, 0.5)
        alpha = np.linalg.solve(K + lam * np.eye(60), Y)
        f = np.array([m.predict(t, x) for t, x in zip(tasks, X)])
        worst_a = max(worst_a, float(np.max(np.abs((Y - f) / lam - alpha))))
        worst_p = max(worst_p, float(np.max(np.abs(f - K @ alpha))))
    dt = time.perf_counter() - t0
    verdict(capsys, 2, "MT-OSLSSVR oracle equivalence", max(worst_a, worst_p) <= 1e-6 and dt < 30,
            f"max alpha dev {worst_a:.2e}, max prediction dev {worst_p:.2e} (tol 1e-6), {dt:.2f}s (limit 30s)")


def test_criterion_03_primal_dual(capsys):
    worst = 0.0
    for lam, S, tasks, X, Y in sweep():
        g = TaskGraph.from_similarities(S, 0.5, lam)
        p = MtWrls(g, 2, 1.0).run(tasks, X, Y)
        d = MtOslssvr(g, 2, nu=1e-12).run(tasks, X, Y)
        worst = max(worst, float(np.max(np.abs(p - d))))
    verdict(capsys, 3, "primal-dual agreement", worst <= 1e-5,
            f"max per-step prediction gap {worst:.2e} (tol 1e-5)")


def test_criterion_04_kernel_identity(capsys):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        T, d = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        g = TaskGraph.from_similarities(random_sims(rng, T), rng.uniform(0.1, 3.0), 1.0)
        x, x2 = rng.standard_normal((2, d))
        s, t = rng.integers(0, T, 2)
        ref = rkhs_inner(rkhs_feature(x, s, g.A), rkhs_feature(x2, t, g.A), g.A, d)
        worst = max(worst, abs(mt_kernel_eval(x, s, x2, t, g) - ref))
    verdict(capsys, 4, "kernel identity", worst <= 1e-10,
            f"max |K - <phi,phi>_H| = {worst:.2e} over 1000 pairs (tol 1e-10)")


def test_criterion_05_quadratic_form_identity(capsys):
    # literal neighbour double sum vs w'(A kron I)w; see the notes on the sim^2 weighting
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        T, d = int(rng.integers(2, 7)), int(rng.integers(1, 5))
        S, gamma = random_sims(rng, T), rng.uniform(0.01, 2.0)
        w = rng.standard_normal(T * d)
        q = stacked_quadratic_form(w, build_interaction_matrix(S, gamma))
        worst = max(worst, abs(edge_sum_penalty(w, S, gamma) - q) / abs(q))
    verdict(capsys, 5, "quadratic-form/regularizer identity", worst <= 1e-9,
            f"max relative error {worst:.3e} (tol 1e-9); the double sum weights pairs by sim^2, "
            "the quadratic form by sim/2, so no constant factor reconciles them")


def test_criterion_06_gradient_check(capsys):
    rng = np.random.default_rng(6)
    worst = 0.0
    h = 1e-5
    for lam in (0.01, 0.5, 2.0):
        for gamma in (0.1, 1.0, 5.0):
            for sim in (0.0, 0.4, 1.0):
                S = np.full((3, 3), sim)
                np.fill_diagonal(S, 0)
                g = TaskGraph.from_similarities(S, gamma, lam)
                W, x, y, t = rng.standard_normal((3, 4)), rng.standard_normal(4), rng.standard_normal(), 2
                fd = np.zeros(4)
                for j in range(4):
                    Wp, Wm = W.copy(), W.copy()
                    Wp[t, j] += h
                    Wm[t, j] -= h
                    fd[j] = (instantaneous_objective(Wp, g, t, x, y) - instantaneous_objective(Wm, g, t, x, y)) / (2 * h)
                an = mogd_gradient(W, g, t, x, y)
                worst = max(worst, float(np.max(np.abs(an - fd)) / np.max(np.abs(fd))))
    verdict(capsys, 6, "MOGD gradient check", worst <= 1e-5,
            f"max relative error {worst:.2e} over the 3x3x3 grid (tol 1e-5)")


def test_criterion_07_wrls_recursion(capsys):
    rng = np.random.default_rng(7)
    worst = 0.0
    for sigma in (0.8, 1.0):
        for _ in range(N_STREAMS):
            D = 6
            X, Y = rng.standard_normal((60, D)), rng.standard_normal(60)
            P0 = np.diag(rng.uniform(0.5, 2.0, D))
            s = wrls_init(D, P0, sigma=sigma)
            for i in range(60):
                s.step(X[i], Y[i])
                ref = weighted_ridge(X[:i + 1], Y[:i + 1], P0, sigma)
                worst = max(worst, float(np.max(np.abs(s.w - ref)) / max(1.0, np.max(np.abs(ref)))))
    verdict(capsys, 7, "WRLS recursion", worst <= 1e-7,
            f"max deviation from the sigma-weighted batch solve {worst:.2e} (tol 1e-7)")


def test_criterion_08_sparsity(capsys):
    p = prepare(synth_generate(10, 400, 0.9, 8), SplitSpec(0.275))
    tasks, X, Y = p.stream("train")
    t2, X2, Y2 = p.stream("test")
    tasks, X, Y = np.concatenate([tasks, t2]), np.vstack([X, X2]), np.concatenate([Y, Y2])
    g = TaskGraph.from_similarities(p.sims, 1.0, 1.0)
    sizes, counts_ok, per_step = [], True, []
    for nu in (1e-3, 1e-2, 1e-1):
        m = MtOslssvr(g, p.d, nu)
        evals = []
        for t, x, y in zip(tasks, X, Y):
            before = m.m
            m.step(int(t), x, y)
            evals.append(m.last_kernel_evals)
            counts_ok &= m.last_kernel_evals == before + 1
        sizes.append(m.m)
        per_step.append(max(evals))
    n = len(Y)
    monotone = all(a >= b for a, b in zip(sizes, sizes[1:]))
    bounded = all(e <= s + 1 for e, s in zip(per_step, sizes)) and max(sizes) < n
    verdict(capsys, 8, "sparsity monotonicity and cost", monotone and counts_ok and bounded,
            f"m_n for nu=1e-3/1e-2/1e-1: {sizes}; max kernel evals per step {per_step} "
            f"(= m+1, d={p.d}, n={n})")


def test_criterion_09_direction_of_effect(capsys):
    t0 = time.perf_counter()
    methods = ["mt-wrls", "mt-oslssvr", "wrls", "oslssvr", "mogd"]
    table = []
    for seed in range(10):
        p = prepare(synth_generate(10, 400, 0.9, 100 + seed), SplitSpec(0.275))
        table.append([evaluate_online(m, p).mean.relrmse for m in methods])
    table = np.array(table)
    mean = dict(zip(methods, table.mean(axis=0)))
    f = friedman_fisher(table)
    wins = dict(zip(methods, zip(f.victories.tolist(), f.defeats.tolist())))
    dt = time.perf_counter() - t0
    ok = (mean["mt-wrls"] < mean["wrls"] and mean["mt-oslssvr"] < mean["oslssvr"]
          and max(mean["mt-wrls"], mean["mt-oslssvr"]) < mean["mogd"]
          and all(wins[m][0] > wins[m][1] for m in ("mt-wrls", "mt-oslssvr")) and dt < 600)
    detail = ", ".join(f"{m} {mean[m]:.4f} ({wins[m][0]}W/{wins[m][1]}L)" for m in methods)
    verdict(capsys, 9, "direction of effect", ok,
            f"mean RELRMSE {detail}; Friedman p={f.p_value:.2e}; {dt:.0f}s (limit 600s)")


def test_criterion_10_unit_truths(capsys):
    rng = np.random.default_rng(10)
    a, b = rng.standard_normal((2, 50))
    m = metrics(b, a, b)
    stat = friedman_fisher(np.tile([0.1, 0.2, 0.3], (10, 1))).statistic
    splits = (split_counts(400, 0.275), split_counts(400, 0.45))
    ok = m.relrmse == 1.0 and m.relmae == 1.0 and stat == pytest.approx(20.0, abs=1e-12) \
        and splits == ((110, 290), (180, 220))
    verdict(capsys, 10, "metrics/statistics unit truths", ok,
            f"persistence REL = ({m.relrmse}, {m.relmae}); Friedman = {stat}; splits = {splits}")


def _trajectory(model, tasks, X, Y):
    out = []
    for t, x, y in zip(tasks, X, Y):
        model.step(int(t), x, y)
        out.append(np.array(model.weights, dtype=float).ravel().copy())
    return out


def test_criterion_11_regret(capsys):
    rng = np.random.default_rng(11)
    S = random_sims(rng, 3)
    g = TaskGraph.from_similarities(S, 0.5, 1.0)
    tasks, X, Y = random_stream(rng, 3, 2, 60)
    regret, _ = regret_curve(*prefix_regret_losses(_trajectory(MtWrls(g, 2), tasks, X, Y), tasks, X, Y, g))
    wrls_worst = float(np.max(np.abs(regret)))
    drops = []
    for seed in range(5):
        r = np.random.default_rng(1100 + seed)
        w_true = r.standard_normal((3, 2))
        tk = np.tile(np.arange(3), 134)[:400]
        Xs = r.standard_normal((400, 2))
        Ys = np.einsum("ij,ij->i", Xs, w_true[tk]) + 0.1 * r.standard_normal(400)
        gm = TaskGraph.from_similarities(random_sims(r, 3), 1.0, 1e-3)
        _, avg = regret_curve(*prefix_regret_losses(_trajectory(Mogd(gm, 2, 0.1), tk, Xs, Ys), tk, Xs, Ys, gm))
        drops.append((avg[49], avg[399]))
    ok = wrls_worst <= 1e-6 and all(late < early for early, late in drops)
    verdict(capsys, 11, "regret sanity", ok,
            f"MT-WRLS max |regret| over n=60: {wrls_worst:.2e} (tol 1e-6); MOGD avg regret n=50 -> n=400: "
            + ", ".join(f"{e:.3g}->{l:.3g}" for e, l in drops))
