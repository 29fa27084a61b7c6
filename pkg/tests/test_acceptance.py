"""End-to-end acceptance suite: one test per criterion, numbered 1 to 12.

Each test attaches a one-line ``detail`` that the conftest hook prints in a
pass/fail table at the end of the run. Long Monte Carlo criteria carry the
``slow`` marker.
"""

import math
import time

import numpy as np
import pytest

from betacoal import CoalescentParams, decrement_deviation
from betacoal.asymptotics import (
    bounded_ratio,
    c_coeff,
    c_coeff_alt,
    decrement_weighted_sum_residual,
    inversion_residual,
    kappa,
    m_coeff,
    weighted_sum_residual,
)
from betacoal.cli import branch_identity_estimate
from betacoal.exact import (
    DiscreteLaw,
    central_moments,
    exact_law_X,
    exact_laws_X,
    exact_moments_L,
    exact_moments_tau,
    exact_moments_X,
)
from betacoal.metrics import (
    EmpiricalSample,
    chi_T,
    chi_wasserstein_bound,
    empirical_cf,
    wasserstein_1_cdf,
    wasserstein_q_discrete,
)
from betacoal.rates import digamma, total_rate, total_rate_generic
from betacoal.renewal import exact_first_passage_law, exact_first_passage_laws
from betacoal.simulate import SimulationConfig, monte_carlo
from betacoal.stable import StableSpec, limit_spec, normalize, regime_for, sample_stable, stable_cf
from oracles import collision_law_by_paths, passage_law_by_sequences

DYADIC = [2**k for k in range(7, 15)] + [20_000]


def fmt(values):
    return "[" + ", ".join(f"{v:.4g}" for v in values) + "]"


def decreasing(values, strict=True):
    pairs = list(zip(values, values[1:]))
    return all(x > y for x, y in pairs) if strict else all(x >= y for x, y in pairs)


def test_criterion_01_brute_force_laws(record_property):
    exact_law_X(3, CoalescentParams(1, 1))
    exact_first_passage_law(3, CoalescentParams(1, 1))
    start = time.perf_counter()
    worst = 0.0
    for a, b in [(1, 1), (0.5, 1), (1, 2)]:
        for n in range(2, 7):
            brute = collision_law_by_paths(n, a, b)
            law = exact_law_X(n, CoalescentParams(a, b))
            got = dict(zip(law.support.tolist(), law.probs.tolist()))
            for x in set(brute) | set(got):
                worst = max(worst, abs(brute.get(x, 0.0) - got.get(x, 0.0)))
    for a in (0.5, 1.0):
        for n in range(1, 9):
            brute = passage_law_by_sequences(n, a)
            law = exact_first_passage_law(n, CoalescentParams(a, 1))
            for j, p in zip(law.support, law.probs):
                worst = max(worst, abs(brute.get(int(j), 0.0) - p))
    elapsed = time.perf_counter() - start
    record_property("detail", f"max atom error {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-12
    assert elapsed < 1.0


@pytest.mark.slow
def test_criterion_02_monte_carlo_against_recursions(record_property):
    worst = 0.0
    for a, b in [(1, 1), (1, 0.5), (1, 2), (0.5, 1)]:
        p = CoalescentParams(a, b)
        tables = {
            "X": exact_moments_X(1000, 1, p),
            "L": exact_moments_L(1000, 1, p),
            "tau": exact_moments_tau(1000, 1, p),
        }
        for i, n in enumerate((10, 100, 1000)):
            r = monte_carlo(SimulationConfig(p, n, 10**5, master_seed=100 + i))
            for name, table in tables.items():
                s = r.summary[name]
                worst = max(worst, abs(s.mean - table.moment(n, 1)) / s.stderr)
    record_property("detail", f"largest |mean - exact| = {worst:.2f} standard errors")
    assert worst <= 4


def test_criterion_03_analytic_identities(record_property):
    inv = max(inversion_residual(j, b) for j in range(2, 13) for b in (0.3, 1.0, 2.7))
    kap = max(abs(kappa(j + 1, b) - kappa(j, b) - 2 - digamma(b + j))
              for j in range(0, 20) for b in (0.3, 1.0, 2.7))
    cc = max(abs(c_coeff(b, al, p) - c_coeff_alt(b, al, p))
             for b in (0.3, 1.0, 2.7) for al, p in [(1, 1), (2, 2), (1.5, 0)])
    rate = max(abs(total_rate(n, CoalescentParams(1, b)) / total_rate_generic(n, CoalescentParams(1, b)) - 1)
               for b in (0.3, 1.0, 2.7) for n in range(2, 1001))
    record_property("detail", f"inversion {inv:.1e}, kappa {kap:.1e}, c forms {cc:.1e}, rate {rate:.1e}")
    assert inv <= 1e-9 and kap <= 1e-11 and cc <= 1e-11 and rate <= 1e-10


@pytest.fixture(scope="module")
def moment_tables():
    out = {}
    for b in (0.5, 1.0, 2.0):
        p = CoalescentParams(1, b)
        out[b] = (exact_moments_X(20_000, 3, p), exact_moments_L(20_000, 3, p))
    return out


@pytest.mark.slow
def test_criterion_04_moment_expansions(moment_tables, record_property):
    ratios = {}
    for b, (tx, tl) in moment_tables.items():
        for name, table, scale in (("X", tx, 1.0), ("L", tl, b)):
            for j in (1, 2, 3):
                resid = []
                for n in DYADIC:
                    ln = math.log(n)
                    lead = (n / ln) ** j / scale**j
                    resid.append((table.moment(n, j) / lead - 1 - m_coeff(j, b) / ln) * ln**2)
                ratios[(b, name, j)] = bounded_ratio(resid)
    worst = max(ratios, key=ratios.get)
    record_property("detail", f"max growth ratio {ratios[worst]:.3f} at b={worst[0]}, {worst[1]}, j={worst[2]}")
    assert ratios[worst] <= 2


@pytest.mark.slow
def test_criterion_05_variance_expansion(moment_tables, record_property):
    failures, finals = [], []
    for b, (tx, tl) in moment_tables.items():
        for name, table, const in (("X", tx, 2 * b), ("L", tl, 2 * b**3)):
            ratio = [central_moments(table, n, 2) * const * math.log(n) ** 3 / n**2 for n in DYADIC]
            upper = [abs(r - 1) for r in ratio[len(ratio) // 2:]]
            finals.append(f"{name}(b={b})={ratio[-1]:.3f}")
            if not 0.5 <= ratio[-1] <= 1.5:
                failures.append(f"{name} b={b} final {ratio[-1]:.3f}")
            if not decreasing(upper):
                failures.append(f"{name} b={b} |ratio-1| {fmt(upper)}")
    record_property("detail", "; ".join(finals) + (" | " + "; ".join(failures) if failures else ""))
    assert not failures


def test_criterion_06_appendix_sums(record_property):
    grid = [2**k for k in range(7, 18)]
    ratios = {}
    for alpha, p in [(1, 1), (2, 2), (1.5, 0)]:
        ratios[("plain", alpha, p)] = bounded_ratio([weighted_sum_residual(n, alpha, p) for n in grid])
        for b in (0.5, 1.0, 2.0):
            ratios[(b, alpha, p)] = bounded_ratio(
                [decrement_weighted_sum_residual(n, alpha, p, b) for n in grid])
    worst = max(ratios, key=ratios.get)
    record_property("detail", f"max growth ratio {ratios[worst]:.3f} at {worst}")
    assert ratios[worst] <= 2


def test_criterion_07_decrement_deviation(record_property):
    grid = [2**k for k in range(7, 15)]
    out = []
    for a, q in [(1.0, 0.5), (0.5, 0.8)]:
        p = CoalescentParams(a, 1)
        scaled = [decrement_deviation(n, q, p) * n ** (2 - a - q) for n in grid]
        out.append((a, q, scaled[-1] / np.median(scaled)))
    record_property("detail", "last/median " + ", ".join(f"(a={a},q={q}) {r:.3f}" for a, q, r in out))
    assert all(r <= 2 for *_, r in out)


@pytest.mark.slow
def test_criterion_08_stable_sampler(record_property):
    z = np.array([-5, -2, -1, -0.5, 0.5, 1, 2, 5])
    tol = 4 / math.sqrt(10**6)
    worst = 0.0
    for i, alpha in enumerate((1.0, 1.25, 1.5, 1.75)):
        spec = StableSpec(alpha)
        x = sample_stable(spec, np.random.default_rng(800 + i), 10**6)
        gap = empirical_cf(x, z) - stable_cf(spec, z)
        worst = max(worst, np.abs(gap.real).max(), np.abs(gap.imag).max())
    record_property("detail", f"max cf component error {worst:.2e} (tolerance {tol:.0e})")
    assert worst <= tol


@pytest.mark.slow
def test_criterion_09_limit_law_trend(record_property):
    lines, ok = [], True
    for a, b, functionals in [(0.5, 1.0, ("X",)), (1.0, 1.0, ("X", "L")), (1.0, 2.0, ("X", "L"))]:
        p = CoalescentParams(a, b)
        spec = limit_spec(p)
        ref = lambda t, spec=spec: stable_cf(spec, t)
        dist = {f: [] for f in functionals}
        for i, n in enumerate((10**3, 10**4, 10**5)):
            r = monte_carlo(SimulationConfig(p, n, 10**5, master_seed=900 + i))
            raw = {"X": r.collisions, "L": r.branch_length}
            for f in functionals:
                values = normalize(raw[f], n, p, regime_for(p, f))
                dist[f].append(chi_T(EmpiricalSample.of(values), ref, 2.0))
        for f, d in dist.items():
            ok &= decreasing(d)
            lines.append(f"{f}(a={a},b={b}) {fmt(d)}")
    record_property("detail", "chi_2 " + "; ".join(lines))
    assert ok


def test_criterion_10_renewal_coupling(record_property):
    p = CoalescentParams(0.5, 1)
    laws_x = exact_laws_X(2000, p)
    laws_n = exact_first_passage_laws(2000, p)
    scaled = []
    for n in (500, 1000, 2000):
        x = DiscreteLaw.from_dense(laws_x[n, :n].copy())
        nn = DiscreteLaw.from_dense(laws_n[n, : n + 1].copy())
        scaled.append(wasserstein_1_cdf(x, nn) / n**0.5)
    record_property("detail", f"d1/sqrt(n) over 500, 1000, 2000: {fmt(scaled)}")
    assert decreasing(scaled, strict=False)


@pytest.mark.slow
def test_criterion_11_branch_length_identity(record_property):
    p = CoalescentParams(1, 1)
    est = [branch_identity_estimate(p, n, 10**4, 1100 + i) for i, n in enumerate((10**4, 10**5, 10**6))]
    gaps = [abs(e - 1) for e in est]
    record_property("detail", f"E(bL-X)^2/n over 1e4, 1e5, 1e6: {fmt(est)}")
    assert decreasing(gaps) and 0.8 <= est[-1] <= 1.2


def random_law(rng, size):
    support = np.sort(rng.choice(np.arange(-8, 9), size=size, replace=False)).astype(float)
    return DiscreteLaw(support, rng.dirichlet(np.ones(size)))


def test_criterion_12_metric_properties(record_property):
    rng = np.random.default_rng(1200)
    worst = {"homogeneity": 0.0, "translation": 0.0, "triangle": 0.0, "domination": 0.0}
    for _ in range(1000):
        q = rng.choice([0.25, 0.5, 0.75, 1.0])
        p, r, s = (random_law(rng, int(rng.integers(1, 5))) for _ in range(3))
        c, shift, T = rng.uniform(0.2, 3.0), rng.uniform(-5, 5), rng.uniform(0.5, 4.0)
        base = wasserstein_q_discrete(p, r, q)
        scaled = wasserstein_q_discrete(DiscreteLaw(c * p.support, p.probs), DiscreteLaw(c * r.support, r.probs), q)
        moved = wasserstein_q_discrete(DiscreteLaw(p.support + shift, p.probs),
                                       DiscreteLaw(r.support + shift, r.probs), q)
        worst["homogeneity"] = max(worst["homogeneity"], abs(scaled - c**q * base))
        worst["translation"] = max(worst["translation"], abs(moved - base))
        via = base + wasserstein_q_discrete(r, s, q)
        worst["triangle"] = max(worst["triangle"], wasserstein_q_discrete(p, s, q) - via)
        worst["domination"] = max(worst["domination"], chi_T(p, r, T) - chi_wasserstein_bound(T, q) * base)
    record_property("detail", ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert all(v <= 1e-9 for v in worst.values())
