import math

import numpy as np
import pytest

from centclust.clusterings import Clustering
from centclust.metrics import approx_distance, exact_distance
from centclust.summaries import (
    cluster_count_distribution,
    conditional_central_clustering,
    credible_region,
    detect_modes,
    empirical_central_clustering,
    filter_trace_by_k,
    hpd_region,
    median_clustering,
    quantile_clustering,
    region_contains,
    trace_distance_matrix,
)
from trace_builders import make_trace


def two_block(n, moved):
    """Two equal blocks of n/2 with `moved` leading units shifted to block 1;
    distance from the unmoved version is exactly moved/n under both metrics."""
    lab = np.repeat([0, 1], n // 2)
    lab[:moved] = 1
    return Clustering(lab)


A4 = Clustering([0, 0, 1, 1])
B4 = Clustering([0, 1, 0, 1])  # equal-cell table against A4, distance 0.5


# ------------------------------------------------------------------- oracles


def naive_central(D, eps):
    N = D.shape[0]
    counts = [sum(1 for j in range(N) if D[i, j] < eps) for i in range(N)]
    best = max(range(N), key=lambda i: (counts[i], -i))
    return best, counts[best] / N


def naive_credible(D, center, target, zeta):
    N = D.shape[0]
    m = 0
    while True:
        m += 1
        members = [i for i in range(N) if D[center, i] < m * zeta]
        if len(members) / N >= target:
            return m, members


def naive_hpd(D, modes, target, zeta, grow_all=False):
    N = D.shape[0]
    J = len(modes)
    steps = [0] * J

    def inside(p):
        return any(D[modes[j], p] < steps[j] * zeta for j in range(J))

    def count():
        return sum(1 for p in range(N) if inside(p))

    for p in range(N):
        while not inside(p):
            if grow_all:
                for j in range(J):
                    steps[j] += 1
            else:
                j = min(range(J), key=lambda j: (D[modes[j], p], j))
                steps[j] += 1
            if count() / N >= target:
                return steps, [i for i in range(N) if inside(i)]
    return steps, [i for i in range(N) if inside(i)]


# --------------------------------------------------------------- central / modes


def test_central_all_identical():
    t = make_trace([A4] * 5)
    assert empirical_central_clustering(t, 0.3) == (0, 1.0)


def test_central_three_vs_one():
    t = make_trace([A4, A4, A4, B4])
    assert empirical_central_clustering(t, 0.1) == (0, 0.75)
    # every neighborhood saturates at eps above the only distance: index tie-break
    assert empirical_central_clustering(t, 0.6) == (0, 1.0)


def test_central_rejects_nonpositive_epsilon():
    t = make_trace([A4])
    with pytest.raises(ValueError):
        empirical_central_clustering(t, 0.0)
    with pytest.raises(ValueError):
        empirical_central_clustering(t, -0.1)


def test_central_matches_enumeration_random():
    rng = np.random.default_rng(0)
    cl = [Clustering(rng.integers(0, 3, size=12)) for _ in range(11)]
    t = make_trace(cl)
    for kind in ("approx", "exact"):
        D = trace_distance_matrix(t, kind=kind)
        for eps in (0.05, 0.21, 0.4, 0.75):
            assert empirical_central_clustering(t, eps, kind=kind) == naive_central(D, eps)


def test_detect_modes_unimodal():
    t = make_trace([A4] * 6)
    rep = detect_modes(t, epsilon_grid=[0.1, 0.5, 0.9])
    assert rep.mode_indices == [0]
    assert rep.neighborhood_probs == [1.0]
    assert rep.epsilons == [0.1]


def test_detect_modes_merges_duplicates_and_keeps_distinct():
    # 4 copies of A then 2 of B: A is the global mode; B never attains the max
    t = make_trace([A4, A4, A4, A4, B4, B4])
    rep = detect_modes(t, epsilon_grid=[0.25, 0.75])
    assert rep.mode_indices == [0]
    t2 = make_trace([A4, A4, B4, B4])
    rep2 = detect_modes(t2, epsilon_grid=[0.25])
    # equal masses: both argmax attainers kept, duplicates merged
    assert rep2.mode_indices == [0, 2]
    assert rep2.epsilons == [0.25, 0.25]


def test_detect_modes_skips_degenerate_grid_points():
    # isolated points: every neighborhood is the point itself at small eps,
    # and everything at large eps; neither grid point discriminates
    c1 = two_block(20, 0)
    c2 = two_block(20, 4)
    c3 = two_block(20, 8)
    t = make_trace([c1, c2, c3])
    rep = detect_modes(t, epsilon_grid=[0.05, 0.9])
    assert rep.mode_indices == []
    # adding a duplicate makes the pair the mode at small eps
    t2 = make_trace([c1, c2, c3, c2])
    rep2 = detect_modes(t2, epsilon_grid=[0.05, 0.9])
    assert rep2.mode_indices == [1]
    assert rep2.neighborhood_probs == [0.5]


# ------------------------------------------------------------ credible regions


def test_credible_all_identical():
    t = make_trace([A4] * 8)
    r = credible_region(t, 0, target_prob=0.95, zeta=0.01)
    assert r.radii == [0.01] and r.radius_steps == [1]
    assert r.achieved_prob == 1.0
    assert list(r.members) == list(range(8))


def test_credible_nineteen_one():
    t = make_trace([A4] * 19 + [B4])
    r = credible_region(t, 0, target_prob=0.95, zeta=0.01)
    assert r.radius_steps == [1]
    assert r.achieved_prob == 0.95
    assert 19 not in r.members


def test_credible_matches_naive_loop():
    rng = np.random.default_rng(1)
    cl = [two_block(40, int(rng.integers(0, 15))) for _ in range(12)]
    t = make_trace(cl)
    D = trace_distance_matrix(t, kind="approx")
    for target in (0.5, 0.76, 0.95):
        for zeta in (0.01, 0.003, 1e-4):
            for center in (0, 3):
                m, members = naive_credible(D, center, target, zeta)
                r = credible_region(t, center, target_prob=target, zeta=zeta)
                assert r.radius_steps == [m]
                assert r.radii == [m * zeta]
                assert list(r.members) == members
                assert r.achieved_prob == len(members) / len(cl)


def test_credible_tiny_zeta_jump_path():
    # zeta small enough that the naive loop would need ~10^9 steps
    t = make_trace([A4] * 19 + [B4])
    r = credible_region(t, 19, target_prob=0.96, zeta=1e-9)
    # must cover the 19 copies at distance 0.5: smallest m with 0.5 < m*1e-9
    assert r.radius_steps == [500_000_001]
    assert not 0.5 < (r.radius_steps[0] - 1) * 1e-9
    assert r.achieved_prob == 1.0


def test_credible_validates_target():
    t = make_trace([A4] * 4)
    for bad in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(ValueError):
            credible_region(t, 0, target_prob=bad, zeta=0.01)


# ----------------------------------------------------------------- HPD regions


def test_hpd_single_mode_equals_credible():
    rng = np.random.default_rng(2)
    cl = [two_block(40, int(rng.integers(0, 12))) for _ in range(10)]
    t = make_trace(cl)
    for target in (0.6, 0.95):
        c = credible_region(t, 2, target_prob=target, zeta=0.005)
        h = hpd_region(t, [2], target_prob=target, zeta=0.005)
        assert h.radius_steps == c.radius_steps
        assert list(h.members) == list(c.members)
        assert h.achieved_prob == c.achieved_prob


def test_hpd_matches_naive_loop():
    rng = np.random.default_rng(3)
    cl = [two_block(60, int(rng.integers(0, 25))) for _ in range(12)]
    t = make_trace(cl)
    D = trace_distance_matrix(t, kind="approx")
    for modes in ([0, 1], [4, 9], [0, 5, 11]):
        for target in (0.7, 0.95):
            for zeta in (0.02, 0.004):
                steps, members = naive_hpd(D, modes, target, zeta)
                r = hpd_region(t, modes, target_prob=target, zeta=zeta)
                assert r.radius_steps == steps
                assert list(r.members) == members


def test_hpd_grow_all_variant_matches_naive():
    rng = np.random.default_rng(4)
    cl = [two_block(60, int(rng.integers(0, 25))) for _ in range(10)]
    t = make_trace(cl)
    D = trace_distance_matrix(t, kind="approx")
    steps, members = naive_hpd(D, [0, 3], 0.9, 0.01, grow_all=True)
    r = hpd_region(t, [0, 3], target_prob=0.9, zeta=0.01, grow="all")
    assert r.radius_steps == steps
    assert list(r.members) == members


def test_hpd_two_masses():
    # 6 copies of A, 4 of B: both radii positive at target 0.95
    t = make_trace([A4] * 6 + [B4] * 4)
    r = hpd_region(t, [0, 6], target_prob=0.95, zeta=0.01)
    assert all(s >= 1 for s in r.radius_steps)
    assert r.achieved_prob >= 0.95
    for s, radius in zip(r.radius_steps, r.radii):
        assert radius == s * 0.01


def test_hpd_high_target_counts():
    rng = np.random.default_rng(5)
    cl = [two_block(1000, int(rng.integers(0, 400))) for _ in range(1000)]
    t = make_trace(cl)
    D = trace_distance_matrix(t, kind="approx")
    r = hpd_region(t, [0], target_prob=0.999, zeta=0.05, dmat=D)
    assert len(r.members) >= 999


# ------------------------------------------------------------------ conditional


def test_conditional_homogeneous_equals_unconditional():
    rng = np.random.default_rng(6)
    cl = [Clustering(rng.integers(0, 3, size=15)) for _ in range(9)]
    cl = [c for c in cl if c.k == 3]
    t = make_trace(cl)
    uncond = detect_modes(t, epsilon_grid=[0.1, 0.3, 0.6])
    cond = conditional_central_clustering(t, 3, epsilon_grid=[0.1, 0.3, 0.6])
    assert cond.mode_indices == uncond.mode_indices
    assert cond.neighborhood_probs == uncond.neighborhood_probs


def test_conditional_restricts_candidates_and_neighborhoods():
    c2 = two_block(12, 0)          # k = 2
    c2b = two_block(12, 2)
    c3 = Clustering([0] * 4 + [1] * 4 + [2] * 4)
    t = make_trace([c2, c2b, c3, c2, c3, c2b])
    sub, idx = filter_trace_by_k(t, 2)
    assert list(idx) == [0, 1, 3, 5]
    assert len(sub) == 4
    cond = conditional_central_clustering(t, 2, epsilon_grid=[0.1])
    # neighborhoods count only k=2 entries; probabilities over the subtrace
    assert all(t[i].k == 2 for i in cond.mode_indices)
    D = trace_distance_matrix(sub, kind="approx")
    best, prob = naive_central(D, 0.1)
    assert cond.mode_indices[0] == idx[best]
    assert cond.neighborhood_probs[0] == prob


def test_conditional_missing_k_lists_available():
    t = make_trace([A4, B4])
    with pytest.raises(ValueError, match=r"available.*2"):
        conditional_central_clustering(t, 99, epsilon_grid=[0.5])


# -------------------------------------------------------------- median / quantile


def test_median_all_identical():
    assert median_clustering(make_trace([A4] * 5)) == 0


def test_median_majority():
    assert median_clustering(make_trace([B4, A4, A4, A4])) == 1


def test_median_duplication_invariant():
    rng = np.random.default_rng(7)
    cl = [two_block(30, int(rng.integers(0, 12))) for _ in range(7)]
    t1 = make_trace(cl)
    t2 = make_trace([c for c in cl for _ in range(2)])
    med1 = median_clustering(t1)
    med2 = median_clustering(t2)
    assert t1[med1].clustering == t2[med2].clustering


def test_median_matches_enumeration():
    rng = np.random.default_rng(8)
    cl = [Clustering(rng.integers(0, 4, size=14)) for _ in range(10)]
    t = make_trace(cl)
    for kind in ("approx", "exact"):
        D = trace_distance_matrix(t, kind=kind)
        sums = D.sum(axis=1)
        assert median_clustering(t, kind=kind) == int(np.argmin(sums))


def test_quantile_endpoints():
    t = make_trace([A4, B4, A4, two_block(4, 1)])
    assert quantile_clustering(t, 0, 0.0) == 0
    far = quantile_clustering(t, 0, 1.0)
    D = trace_distance_matrix(t, kind="approx")
    assert D[0, far] == D[0].max()


def test_quantile_middle_rank():
    a = two_block(40, 0)
    b = two_block(40, 8)   # 0.2 from a
    c = two_block(40, 18)  # 0.45 from a
    assert approx_distance(a, b).value == 0.2
    assert approx_distance(a, c).value == 0.45
    t = make_trace([a, b, c])
    assert quantile_clustering(t, 0, 0.5) == 1


def test_quantile_matches_enumeration():
    rng = np.random.default_rng(9)
    cl = [Clustering(rng.integers(0, 3, size=12)) for _ in range(9)]
    t = make_trace(cl)
    D = trace_distance_matrix(t, kind="approx")
    N = len(cl)
    for q in (0.0, 0.1, 0.25, 0.5, 0.77, 1.0):
        order = np.argsort(D[2], kind="stable")
        rank = min(max(math.ceil(q * N), 1), N)
        assert quantile_clustering(t, 2, q) == int(order[rank - 1])


# ------------------------------------------------------------------ distributions


def test_cluster_count_distribution_uniform():
    t = make_trace([Clustering([0, 1, 2] + [0] * 5)] * 4)
    assert cluster_count_distribution(t) == {3: 1.0}


def test_cluster_count_distribution_mixed():
    c2 = two_block(12, 0)
    c3 = Clustering([0] * 4 + [1] * 4 + [2] * 4)
    t = make_trace([c2, c2, c2, c3])
    assert cluster_count_distribution(t) == {2: 0.75, 3: 0.25}


def test_cluster_count_distribution_members_subset():
    c2 = two_block(12, 0)
    c3 = Clustering([0] * 4 + [1] * 4 + [2] * 4)
    t = make_trace([c2, c3, c2, c3])
    assert cluster_count_distribution(t, members=[1, 3]) == {3: 1.0}


# ------------------------------------------------------------------- invariance


def test_summaries_invariant_under_relabeling():
    rng = np.random.default_rng(10)
    cl = [Clustering(rng.integers(0, 3, size=15)) for _ in range(8)]
    relabeled = []
    for c in cl:
        perm = rng.permutation(c.k)
        relabeled.append(Clustering(perm[c.labels]))
    t1, t2 = make_trace(cl), make_trace(relabeled)
    assert empirical_central_clustering(t1, 0.3) == empirical_central_clustering(t2, 0.3)
    assert median_clustering(t1) == median_clustering(t2)
    r1 = credible_region(t1, 0, target_prob=0.8, zeta=0.01)
    r2 = credible_region(t2, 0, target_prob=0.8, zeta=0.01)
    assert r1.radius_steps == r2.radius_steps and list(r1.members) == list(r2.members)


def test_central_consistency_with_growing_trace():
    # sampling from a fixed 4-point clustering distribution: recovery of the
    # highest-mass point improves with trace length and is certain at N=5000
    support = [two_block(80, m) for m in (0, 12, 24, 36)]
    D = trace_distance_matrix(make_trace(support), kind="approx")
    assert D[np.triu_indices(4, 1)].min() >= 0.125
    probs = [0.4, 0.3, 0.2, 0.1]
    recovered = {}
    for N in (50, 500, 5000):
        hits = 0
        for rep in range(20):
            rng = np.random.default_rng(1000 + rep)
            picks = rng.choice(4, size=N, p=probs)
            t = make_trace([support[i] for i in picks])
            idx, _ = empirical_central_clustering(t, 0.1)
            hits += t[idx].clustering == support[0]
        recovered[N] = hits
    assert recovered[50] <= recovered[500] <= recovered[5000] == 20


def test_exact_metric_flag_changes_nothing_on_agreeing_geometry():
    cl = [two_block(20, m) for m in (0, 2, 4, 8)]
    t = make_trace(cl * 2)
    for eps in (0.15, 0.35):
        assert empirical_central_clustering(t, eps, kind="exact") == \
            empirical_central_clustering(t, eps, kind="approx")


# ------------------------------------------------------------- bimodal builder


@pytest.fixture(scope="module")
def bimodal():
    from trace_builders import bimodal_trace

    trace, info = bimodal_trace()
    dmat = trace_distance_matrix(trace, kind="approx")
    return trace, info, dmat


def test_bimodal_geometry_is_exact(bimodal):
    trace, info, dmat = bimodal
    a, b = info["a_index"], info["b_index"]
    assert dmat[a, b] == info["delta"]
    assert exact_distance(trace[a].clustering, trace[b].clustering).value == info["delta"]
    for s, radius, cross in zip(info["sat_indices"], info["sat_radii"], info["cross"]):
        assert dmat[b, s] == radius
        assert dmat[a, s] == cross
        sat = trace[s].clustering
        assert exact_distance(trace[b].clustering, sat).value == radius
        assert exact_distance(trace[a].clustering, sat).value == cross


def test_bimodal_two_modes(bimodal):
    trace, info, dmat = bimodal
    rep = detect_modes(trace, info["grid"], dmat=dmat)
    assert rep.mode_indices == [info["a_index"], info["b_index"]]
    assert rep.neighborhood_probs == [0.6, 1.0]
    assert rep.epsilons[0] == info["grid"][0]
    assert rep.epsilons[1] == info["grid"][-1]


def test_bimodal_hpd(bimodal):
    trace, info, dmat = bimodal
    r = hpd_region(trace, [info["a_index"], info["b_index"]],
                   target_prob=0.95, zeta=1e-3, dmat=dmat)
    assert r.radius_steps == [1, 7]
    assert len(r.members) == 238
    assert r.achieved_prob == 238 / 250
    assert 0.95 <= r.achieved_prob <= 0.958


# ------------------------------------------------------------- region membership


def test_region_contains_center_and_outsiders():
    trace = make_trace([A4] * 19 + [B4])
    r = credible_region(trace, 0, target_prob=0.95, zeta=1e-3)
    assert r.radius_steps == [1]
    assert region_contains(trace, r, A4)
    assert not region_contains(trace, r, B4)
    # not in the trace at all, distance 0.25 from the center
    assert not region_contains(trace, r, Clustering([0, 0, 0, 1]))


def test_region_contains_after_growth():
    a = two_block(8, 0)
    trace = make_trace([a] * 3 + [two_block(8, 1)])
    r = credible_region(trace, 0, target_prob=0.99, zeta=0.1)
    # covering the moved-1 partner at distance 1/8 needs radius 2 * 0.1
    assert r.radius_steps == [2]
    assert region_contains(trace, r, two_block(8, 1))
    assert not region_contains(trace, r, two_block(8, 3))


def test_region_contains_multiple_balls(bimodal):
    trace, info, dmat = bimodal
    r = hpd_region(trace, [info["a_index"], info["b_index"]],
                   target_prob=0.95, zeta=1e-3, dmat=dmat)
    a = trace[info["a_index"]].clustering
    b = trace[info["b_index"]].clustering
    assert region_contains(trace, r, a) and region_contains(trace, r, b)
    # satellites sit at least 0.0064 from both centers, past both radii
    far = trace[info["sat_indices"][-1]].clustering
    assert not region_contains(trace, r, far)
