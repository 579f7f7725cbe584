"""End-to-end acceptance gate.

One test per numbered criterion; each prints a single PASS/FAIL line (visible
with -v via the test outcome, and in captured output via the report() call).
Statistical criteria use pinned seeds so reruns are reproducible.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import CHAIN_TEXT, build_chain, build_k4, build_random_ic
from influmax.baseline import GreedyConfig, _estimate
from influmax.cli import main as cli_main
from influmax.coverage import RRCollection, fraction_covered, greedy_max_coverage
from influmax.evaluator import (exact_expected_kappa, exact_ept, exact_spread,
                                exhaustive_opt, simulate_spread)
from influmax.graph import from_edge_arrays
from influmax.models import IC, LT, WC, assign_lt_uniform, assign_weighted_cascade
from influmax.sampler import RRSet, generate_rr_batch
from influmax.tim import (TimParams, default_epsilon_prime, kpt_estimation,
                          refine_kpt, run_tim)


def report(num: int, name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {num:2d}] {name}: {status} {detail}", flush=True)
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def lt_instance(n_seed: int, weight_seed: int, n: int = 5, max_edges: int = 10):
    g = build_random_ic(np.random.default_rng(n_seed), n=n, max_edges=max_edges)
    return assign_lt_uniform(g.with_payload(edge_prob=None),
                             np.random.default_rng(weight_seed))


def test_criterion_01_approximation_guarantee():
    t0 = time.perf_counter()
    bound = 1.0 - 1.0 / math.e - 0.2
    successes = 0
    runs = 100
    for i in range(runs):
        g = build_random_ic(np.random.default_rng(1000 + i), n=8, max_edges=16)
        oracle = exhaustive_opt(g, WC, 2)
        res = run_tim(g, WC, TimParams(k=2, epsilon=0.2, ell=1.0,
                                       master_seed=2000 + i))
        achieved = exact_spread(g, WC, res.seed_indices)
        successes += achieved >= bound * oracle.opt_value - 1e-9
    elapsed = time.perf_counter() - t0
    report(1, "approximation guarantee", successes >= 99 and elapsed < 300,
           f"({successes}/100 runs met (1-1/e-0.2)*OPT in {elapsed:.1f}s)")


def test_criterion_02_estimator_identity():
    t0 = time.perf_counter()
    theta = 100_000
    cases = [
        (build_chain(), IC, [[0], [1], [2], [0, 2], [0, 1, 2]]),
        (build_k4(), IC, [[0], [3], [0, 1], [2, 3], [0, 1, 2, 3]]),
        (build_random_ic(np.random.default_rng(201), n=8, max_edges=16), WC,
         [[0], [4], [1, 6], [0, 2, 7], [3, 5]]),
        (build_random_ic(np.random.default_rng(202), n=6, max_edges=12), IC,
         [[0], [5], [1, 2], [0, 3, 4], [2, 5]]),
        (lt_instance(203, 204, n=5, max_edges=8), LT,
         [[0], [1], [2, 3], [0, 4], [1, 2, 3]]),
    ]
    worst = 0.0
    ok = True
    for gi, (g, model, seed_sets) in enumerate(cases):
        n = g.node_count
        batch = generate_rr_batch(g, model, theta,
                                  np.random.default_rng(300 + gi))
        coll = RRCollection.from_batch(batch, n)
        for seeds in seed_sets:
            f = fraction_covered(coll, seeds)
            exact = exact_spread(g, model, seeds)
            p = exact / n
            se = n * math.sqrt(p * (1.0 - p) / theta)
            gap = abs(n * f - exact)
            worst = max(worst, gap / se if se > 0 else gap)
            ok = ok and gap <= 4.0 * se + 1e-9
    elapsed = time.perf_counter() - t0
    report(2, "estimator identity", ok and elapsed < 60,
           f"(worst gap {worst:.2f} sigma over 25 cases, {elapsed:.1f}s)")


def test_criterion_03_ept_identity():
    g = build_chain()
    n, m = g.node_count, g.edge_count
    lhs = n / m * exact_ept(g, IC)
    indeg = g.in_degrees
    rhs = sum(indeg[v] / m * exact_spread(g, IC, [v]) for v in range(n))
    exact_ok = abs(lhs - 1.25) < 1e-12 and abs(rhs - 1.25) < 1e-12

    theta = 100_000
    batch = generate_rr_batch(g, IC, theta, np.random.default_rng(42))
    w = np.asarray(batch.widths, dtype=np.float64)
    emp_lhs = n / m * w.mean()
    se_lhs = n / m * w.std(ddof=1) / math.sqrt(theta)
    # forward side: mixture over an in-degree-proportional start node
    emp_rhs, var_rhs = 0.0, 0.0
    for v in range(n):
        pv = indeg[v] / m
        if pv == 0:
            continue
        est = simulate_spread(g, IC, [v], 50_000, np.random.default_rng(50 + v))
        emp_rhs += pv * est.mean
        var_rhs += (pv * est.std_error) ** 2
    gap = abs(emp_lhs - emp_rhs)
    tol = 3.0 * math.sqrt(se_lhs ** 2 + var_rhs)
    report(3, "expected-width identity",
           exact_ok and gap <= tol,
           f"(both oracle sides = 1.25, empirical gap {gap:.4f} <= {tol:.4f})")


def oracle_instances():
    return [
        ("chain", build_chain(), IC),
        ("k4", build_k4(), IC),
        ("wc5", build_random_ic(np.random.default_rng(205), n=5, max_edges=10), WC),
        ("lt5", lt_instance(206, 207, n=5, max_edges=10), LT),
    ]


def test_criterion_04_kpt_identity():
    worst = 0.0
    ok = True
    for name, g, model in oracle_instances():
        assert g.edge_count <= 12
        for k in (1, 2, 3):
            lhs = g.node_count * exact_expected_kappa(g, model, k)
            rhs = exhaustive_opt(g, model, k).kpt_exact
            worst = max(worst, abs(lhs - rhs))
            ok = ok and abs(lhs - rhs) <= 1e-9
    report(4, "kappa / sampled-spread identity", ok,
           f"(max |n*E[kappa] - KPT| = {worst:.2e} over 12 cases)")


def test_criterion_05_sandwich_bound():
    instances = oracle_instances() + [
        ("wc8", build_random_ic(np.random.default_rng(201), n=8, max_edges=16), WC),
        ("ic6", build_random_ic(np.random.default_rng(202), n=6, max_edges=12), IC),
    ]
    ok = True
    checked = 0
    for name, g, model in instances:
        if g.edge_count < 1:
            continue
        n, m = g.node_count, g.edge_count
        for k in (1, 2):
            oracle = exhaustive_opt(g, model, k)
            lower = n / m * oracle.ept_exact
            ok = ok and lower <= oracle.kpt_exact + 1e-9
            ok = ok and oracle.kpt_exact <= oracle.opt_value + 1e-9
            checked += 1
    report(5, "lower-bound sandwich", ok,
           f"((n/m)EPT <= KPT <= OPT on {checked} instance/k pairs)")


def estimation_instances():
    return [
        ("chain", build_chain(), IC),
        ("k4", build_k4(), IC),
        ("wc8", build_random_ic(np.random.default_rng(201), n=8, max_edges=16), WC),
    ]


def test_criterion_06_kpt_star_range():
    runs = 200
    k = 2
    ok = True
    details = []
    for name, g, model in estimation_instances():
        oracle = exhaustive_opt(g, model, k)
        allowed = math.ceil(runs / g.node_count)
        violations = 0
        for seed in range(runs):
            est = kpt_estimation(g, model, k, 1.0,
                                 np.random.default_rng([600, seed]))
            inside = (oracle.kpt_exact / 4.0 - 1e-9 <= est.kpt_star
                      <= oracle.opt_value + 1e-9)
            violations += not inside
        details.append(f"{name}:{violations}/{allowed}")
        ok = ok and violations <= allowed
    report(6, "first-phase estimate range", ok,
           "(violations/allowed " + " ".join(details) + ")")


def test_criterion_07_refinement_dominance():
    runs = 200
    k = 2
    eps_prime = default_epsilon_prime(k, 1.0, 0.2)
    ok = True
    details = []
    for name, g, model in estimation_instances():
        oracle = exhaustive_opt(g, model, k)
        allowed = math.ceil(runs / g.node_count)
        above = 0
        dominated = 0
        for seed in range(runs):
            rng = np.random.default_rng([700, seed])
            est = kpt_estimation(g, model, k, 1.0, rng)
            refined = refine_kpt(g, model, k, 1.0, est.kpt_star,
                                 est.last_sets, eps_prime, rng)
            dominated += refined.kpt_plus >= est.kpt_star - 1e-12
            above += refined.kpt_plus > oracle.opt_value + 1e-9
        details.append(f"{name}:{above}/{allowed}")
        ok = ok and dominated == runs and above <= allowed
    report(7, "refined estimate dominance", ok,
           "(KPT+ >= KPT* always; OPT excursions " + " ".join(details) + ")")


def test_criterion_08_max_coverage_ratio():
    import itertools
    rng = np.random.default_rng(800)
    bound = 1.0 - 1.0 / math.e
    successes = 0
    total = 500
    for _ in range(total):
        n = int(rng.integers(2, 9))
        num_sets = int(rng.integers(1, 13))
        sets = []
        for _ in range(num_sets):
            size = int(rng.integers(1, n + 1))
            sets.append(frozenset(rng.choice(n, size=size, replace=False).tolist()))
        k = int(rng.integers(1, 4))
        coll = RRCollection.from_rr_sets(
            [RRSet(min(s), s, 0) for s in sets], n)
        _, covered = greedy_max_coverage(coll, k)
        best = max(
            sum(1 for s in sets if set(combo) & s)
            for combo in itertools.combinations(range(n), min(k, n)))
        successes += covered >= bound * best - 1e-12
    report(8, "greedy coverage ratio", successes == total,
           f"({successes}/{total} collections met (1-1/e)*optimal)")


def _benchmark_graph():
    n, m_target = 10_000, 50_000
    rng = np.random.default_rng(12345)
    tails = rng.integers(0, n, size=m_target)
    heads = rng.integers(0, n, size=m_target)
    keep = tails != heads
    return assign_weighted_cascade(
        from_edge_arrays(tails[keep], heads[keep], n))


def test_criterion_09_performance_trend():
    g = _benchmark_graph()
    # warm the jitted kernels so compilation is not billed to either side
    generate_rr_batch(g, WC, 10, np.random.default_rng(0))
    simulate_spread(g, WC, [0], 10, np.random.default_rng(0))

    t0 = time.perf_counter()
    res = run_tim(g, WC, TimParams(k=50, epsilon=0.2, ell=1.0, master_seed=1))
    tim_seconds = time.perf_counter() - t0
    assert len(res.seeds) == 50

    # Lower-bound the greedy baseline by its mandatory work: both greedy
    # modes must estimate the spread of every single-node candidate in the
    # first round. Evaluate candidates until the 10x threshold is proven,
    # or fall back to timing the full run if the whole first round is fast.
    threshold = 10.0 * tim_seconds
    config = GreedyConfig(r=10_000, master_seed=1)
    t1 = time.perf_counter()
    evaluated = 0
    greedy_seconds = 0.0
    for v in range(g.node_count):
        _estimate(g, WC, [v], config, 0, v)
        evaluated += 1
        greedy_seconds = time.perf_counter() - t1
        if greedy_seconds > threshold:
            break
    else:
        from influmax.baseline import greedy_select
        t2 = time.perf_counter()
        greedy_select(g, WC, 50, config)
        greedy_seconds += time.perf_counter() - t2
    ok = tim_seconds < 60.0 and greedy_seconds >= threshold
    report(9, "desk-scale performance trend", ok,
           f"(two-phase {tim_seconds:.1f}s; greedy >= {greedy_seconds:.1f}s "
           f"after {evaluated}/{g.node_count} first-round candidates)")


def test_criterion_10_cli_determinism(tmp_path, capsys):
    chain_path = tmp_path / "chain.txt"
    chain_path.write_text(CHAIN_TEXT)
    k4_path = tmp_path / "k4.txt"
    k4_path.write_text("".join(f"{u} {v} 1.0\n"
                               for u in range(4) for v in range(4) if u != v))
    bare_path = tmp_path / "bare8.txt"
    rng = np.random.default_rng(9)
    lines = {f"{int(rng.integers(0, 8))} {int(rng.integers(0, 8))}"
             for _ in range(16)}
    bare_path.write_text("\n".join(sorted(lines)) + "\n")

    jobs = [
        (str(chain_path), "ic"),
        (str(k4_path), "ic"),
        (str(bare_path), "wc"),
        (str(bare_path), "lt"),
    ]
    ok = True
    for path, model in jobs:
        outputs = []
        for _ in range(3):
            code = cli_main(["select", "--graph", path, "--model", model,
                             "--k", "2", "--epsilon", "0.5",
                             "--algorithm", "tim+", "--seed", "42",
                             "--threads", "1"])
            captured = capsys.readouterr().out
            assert code == 0
            outputs.append(json.dumps(json.loads(captured)["seeds"]))
        ok = ok and outputs[0] == outputs[1] == outputs[2]
    report(10, "fixed-seed determinism", ok,
           f"(3 identical seed lists on {len(jobs)} graph/model pairs)")
