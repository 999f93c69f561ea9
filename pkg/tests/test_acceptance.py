"""End-to-end acceptance criteria.

Each test evaluates one criterion, records a PASS/FAIL summary line (shown at
the end of the pytest run) and asserts every sub-check.
"""

import math
import time

import numpy as np
import pytest

from hittime.expbounds import (envelope_for, ee_check, lemma_suite, verify_exponential_law)
from hittime.hitting import (green_diagonal, green_function, mean_hitting_time,
                             mean_hitting_time_via_local_times, mean_hitting_times,
                             survival_curve, taboo_probability)
from hittime.linalg import Killed
from hittime.hypotheses import (PresetFamily, evaluate_hypotheses, evaluate_point, loglog_fit,
                                metastable_set_checks, theorem_inequality_suite)
from hittime.models import (abc_pair, abc_scaling_exponents, build_abc_model, build_h_model,
                            build_metropolis, build_preset, h_model_pair, metropolis_h_model)
from hittime.montecarlo import dkw_band, ks_distance, sample_hitting_times
from hittime.network import edge_resistances, total_resistance_vs_green, voltage
from hittime.recurrence import balanced_certificate

from conftest import random_birth_death, random_chain

P_GRID = [1e-2, 10**-2.5, 1e-3, 10**-3.5, 1e-4]
L_GRID = [64, 128, 256, 512, 1024]


def _within(value, target, tol):
    return (abs(value - target) <= tol, f"{value:.4f}")


def _slope(grid, values):
    return loglog_fit(grid, values).slope


def _abc_points(abc):
    return [evaluate_point(build_abc_model(*abc, L), abc_pair(L), L, quantiles=False)
            for L in L_GRID]


def _finish(record, number, checks):
    ok, line = record(number, checks)
    assert ok, line


def test_criterion_1_h_model_exponents(acceptance):
    start = time.perf_counter()
    family = PresetFamily("h", "p", h=0.25)
    sweep = evaluate_hypotheses(family, P_GRID, "p", family.direction, quantiles=False)
    elapsed = time.perf_counter() - start
    checks = {
        "rho_A_slope": _within(sweep.fits["local_time_ratio"].slope, 0.5, 0.05),
        "rho_B_slope": _within(sweep.fits["mean_time_ratio"].slope, 0.75, 0.05),
        "runtime_s": (elapsed < 1.0, f"{elapsed:.3f}"),
    }
    _finish(acceptance, 1, checks)


def test_criterion_2_example_one(acceptance):
    start = time.perf_counter()
    pts = _abc_points((5 / 8, 1 / 4, 7 / 4))
    elapsed = time.perf_counter() - start
    lt0 = [p.local_time_at_start for p in pts]
    checks = {
        "local_time_at_start": _within(_slope(L_GRID, lt0), 17 / 8, 0.1),
        "sup_local_time": _within(_slope(L_GRID, [p.sup_local_time for p in pts]), 5 / 4, 0.1),
        "L_rho_A": _within(_slope(L_GRID, [L * p.local_time_ratio for L, p in zip(L_GRID, pts)]),
                           1 / 8, 0.05),
        "sup_return_over_local_time": _within(
            _slope(L_GRID, [p.sup_return_time / p.local_time_at_start for p in pts]), -1 / 8, 0.05),
        "runtime_s": (elapsed < 10.0, f"{elapsed:.3f}"),
    }
    _finish(acceptance, 2, checks)


def test_criterion_3_example_two(acceptance):
    pts = _abc_points((0.0, 0.0, 1.5))
    tails = []
    for L, p in zip(L_GRID, pts):
        chain = build_abc_model(0.0, 0.0, 1.5, L)
        t = int(math.floor(p.local_time_at_start))
        K = Killed(chain, {0, L})
        tails.append(float(K.tails([t])[0, K.index[L // 2]]))
    checks = {
        "exit_time": _within(_slope(L_GRID, [p.exit_time for p in pts]), 5 / 2, 0.1),
        "rho_B": _within(_slope(L_GRID, [p.mean_time_ratio for p in pts]), -1 / 2, 0.05),
        "local_time_at_start": _within(_slope(L_GRID, [p.local_time_at_start for p in pts]),
                                       3 / 2, 0.1),
        "tail_increasing": (bool(np.all(np.diff(tails) > 0)),
                            "[" + ", ".join(f"{v:.3f}" for v in tails) + "]"),
        "tail_at_1024_ge_0.9": (tails[-1] >= 0.9, f"{tails[-1]:.4f}"),
    }
    _finish(acceptance, 3, checks)


# one triple per regime of the max local time (c < 1, 1 <= c <= b+1, c > b+1)
# and per branch of the max return time, including b > 1 with 2 < c <= b+1
ABC_TRIPLES = [
    (0.5, 0.25, 0.5),
    (0.5, 0.25, 1.0),
    (1.0, 0.5, 1.25),
    (5 / 8, 1 / 4, 7 / 4),
    (1.5, 1.25, 2.5),
    (2.0, 1.5, 3.0),
    (1.5, 1.2, 2.2),
]


def test_criterion_4_abc_scaling(acceptance):
    checks = {}
    for abc in ABC_TRIPLES:
        pts = _abc_points(abc)
        pred = abc_scaling_exponents(*abc)
        lt = _slope(L_GRID, [p.sup_local_time for p in pts])
        rt = _slope(L_GRID, [p.sup_return_time for p in pts])
        name = "(" + ",".join(f"{v:g}" for v in abc) + ")"
        ok = abs(lt - pred["max_local_time"]) <= 0.15 and abs(rt - pred["max_return_time"]) <= 0.15
        checks[name] = (ok, f"lt {lt:.3f}/{pred['max_local_time']:g} "
                            f"ret {rt:.3f}/{pred['max_return_time']:g}")
    checks["triples"] = (len(ABC_TRIPLES) >= 6, str(len(ABC_TRIPLES)))
    _finish(acceptance, 4, checks)


def test_criterion_5_envelope(acceptance):
    checks = {}
    devs = []
    for p in (1e-3, 1e-4):
        chain, pair = build_h_model(p, 0.25), h_model_pair()
        rep = verify_exponential_law(chain, pair, balanced_certificate(chain, pair),
                                     from_basin=True)
        devs.append(rep.max_deviation)
        from_zero = [b for b in rep.basin if b["start"] == 0]
        checks[f"p={p:g}"] = (bool(np.all(rep.measured <= rep.envelope)) and rep.t.size == 200,
                              f"max ratio {rep.max_ratio:.3f}")
        checks[f"basin_z0_p={p:g}"] = (len(from_zero) == 1 and from_zero[0]["passed"],
                                       f"{from_zero[0]['max_ratio']:.3f}" if from_zero else "absent")
    checks["deviation_decreasing"] = (devs[1] < devs[0], f"{devs[0]:.3e} > {devs[1]:.3e}")
    _finish(acceptance, 5, checks)


def _criterion_chains():
    chains = [("h", build_h_model(1e-3, 0.25), h_model_pair())]
    for name in ("abc-ex1", "abc-ex2"):
        chain, pair, _ = build_preset(name, L=128)
        chains.append((name, chain, pair))
    for seed in range(200):
        chain, pair = random_chain(seed, metastable=seed % 2 == 1)
        chains.append((f"random{seed}", chain, pair))
    return chains


@pytest.fixture(scope="module")
def criterion_chains():
    return _criterion_chains()


def test_criterion_6_lemma_suite(acceptance, criterion_chains):
    failed, count = [], 0
    for name, chain, pair in criterion_chains:
        cert = balanced_certificate(chain, pair)
        if cert is None:
            failed.append(f"{name}: no certificate")
            continue
        report = lemma_suite(chain, pair, cert, tolerance=1e-10)
        count += sum(not c.informational for c in report.checks)
        if not report.passed:
            failed.append(f"{name}: {sorted({c.name for c in report.failures})}")
    checks = {"chains": (len(criterion_chains) == 203, str(len(criterion_chains))),
              "checks": (count > 0, str(count)),
              "violations": (not failed, str(len(failed)) if not failed else "; ".join(failed[:3]))}
    _finish(acceptance, 6, checks)


def test_criterion_7_theorem_inequalities(acceptance, criterion_chains):
    failed, members = [], 0
    for name, chain, pair in criterion_chains:
        T = mean_hitting_time(chain, pair.x0, pair.G)
        TLT = green_diagonal(chain, pair.G)[pair.x0]
        report = theorem_inequality_suite(chain, pair)
        if not (TLT <= T * (1 + 1e-10) and report.passed):
            failed.append(name)
        meta = metastable_set_checks(chain, pair.G, 0.2)
        members += len(meta.checks)
        if not meta.passed:
            failed.append(f"{name} metastable")
    checks = {"violations": (not failed, ", ".join(failed[:5]) or "0"),
              "member_pair_checks": (members > 0, str(members))}
    _finish(acceptance, 7, checks)


def _reversible_chains():
    out = [build_h_model(1e-3, 0.25), build_abc_model(5 / 8, 1 / 4, 7 / 4, 64),
           build_abc_model(0.0, 0.0, 1.5, 64)]
    out += [random_birth_death(s) for s in range(10)]
    for seed in range(10):
        rng = np.random.default_rng(seed)
        n = 6
        K = np.triu(rng.random((n, n)), 1)
        K = K + K.T
        K /= K.sum(axis=1).max() * 1.01
        out.append(build_metropolis(rng.normal(size=n), 1.0, K))
    return out


def test_criterion_8_oracle_equivalences(acceptance):
    green_gap = txi_gap = 0.0
    for seed in range(50):
        chain, pair = random_chain(seed)
        direct = mean_hitting_times(chain, pair.G)
        rows = green_function(chain, pair.G).matrix.sum(axis=1)
        free = [x for x in range(chain.n) if x not in pair.G]
        green_gap = max(green_gap, float(np.max(np.abs(rows[free] / direct[free] - 1))))
        via = mean_hitting_time_via_local_times(chain, pair.x0, pair.G)
        txi_gap = max(txi_gap, abs(via / direct[pair.x0] - 1))
    rlt_gap = volt_gap = 0.0
    for chain in _reversible_chains():
        net = edge_resistances(chain)
        B = {chain.n - 1}
        for x in range(chain.n - 1):
            rlt_gap = max(rlt_gap, total_resistance_vs_green(net, chain, x, B)[2])
        x = 0
        v = voltage(net, x, B)
        for y in range(1, chain.n - 1):
            volt_gap = max(volt_gap, abs(v[y] - taboo_probability(chain, y, {x}, B)))
    metro = max(float(np.max(np.abs(metropolis_h_model(p, h).dense()
                                    - build_h_model(p, h).dense())))
                for p in P_GRID for h in (0.25, 0.5, 0.75))
    checks = {"green_row_sums": (green_gap <= 1e-8, f"{green_gap:.1e}"),
              "local_time_decomposition": (txi_gap <= 1e-8, f"{txi_gap:.1e}"),
              "resistance_local_time": (rlt_gap <= 1e-10, f"{rlt_gap:.1e}"),
              "voltage_taboo": (volt_gap <= 1e-10, f"{volt_gap:.1e}"),
              "metropolis": (metro <= 1e-15, f"{metro:.1e}")}
    _finish(acceptance, 8, checks)


def test_criterion_9_early_exponential(acceptance):
    alphas = {}
    bound = None
    for p in (1e-2, 1e-3, 1e-4):
        chain, pair = build_h_model(p, 0.25), h_model_pair()
        params, T = envelope_for(chain, pair, balanced_certificate(chain, pair))
        eta = params.scale_fraction
        alphas[p] = ee_check(chain, pair, int(eta * T))
        if p == 1e-4:
            bound = 5 * (params.recurrence_fraction + params.recurrence_error) / eta
    a = list(alphas.values())
    checks = {"alpha_1e-4": (alphas[1e-4] <= bound, f"{alphas[1e-4]:.3e} <= {bound:.3e}"),
              "decreasing": (a[0] > a[1] > a[2], ", ".join(f"{v:.3e}" for v in a))}
    _finish(acceptance, 9, checks)


def test_criterion_10_monte_carlo(acceptance, tmp_path):
    chain, pair = build_h_model(1e-3, 0.25), h_model_pair()
    n = 10**5
    first = sample_hitting_times(chain, pair.x0, pair.G, n, seed=20240601)
    second = sample_hitting_times(chain, pair.x0, pair.G, n, seed=20240601, workers=2)
    curve = survival_curve(chain, pair.x0, pair.G, threshold=1e-12)
    d, band = ks_distance(first, curve), dkw_band(n, 0.01)
    first.to_csv(tmp_path / "a.csv")
    second.to_csv(tmp_path / "b.csv")
    same = (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    checks = {"ks_within_band": (d <= band, f"{d:.4f} <= {band:.4f}"),
              "byte_identical": (same and first.times.tobytes() == second.times.tobytes(),
                                 str(same))}
    _finish(acceptance, 10, checks)
