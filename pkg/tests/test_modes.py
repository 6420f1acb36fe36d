"""Fault modes, registries, and the distinguishability machinery."""

import numpy as np
import pytest

from kldiag import (
    FaultMode,
    GaussianPdf,
    ModeRegistry,
    build_search_index,
    distinguishability,
    kl_gaussian,
    ordered_subset,
    pruned_search,
    quantile_report,
    within_class,
)


def _pdf1(mean, var=1.0, theta=None):
    return GaussianPdf(mean=np.array([float(mean)]), cov=np.array([[float(var)]]), theta=theta)


def _random_pdf(rng, n):
    a = rng.standard_normal((n, n))
    return GaussianPdf(mean=rng.standard_normal(n), cov=a @ a.T + 0.5 * np.eye(n))


def test_distinguishability_hand_value():
    mode = FaultMode("f1", members=(_pdf1(0.0), _pdf1(3.0)))
    value, idx = distinguishability(_pdf1(1.0), mode)
    assert value == pytest.approx(0.5, abs=1e-12)  # min(0.5, 2.0)
    assert idx == 0


def test_distinguishability_zero_for_own_member():
    member = _pdf1(0.7, 1.3)
    mode = FaultMode("f1", members=(member, _pdf1(5.0)))
    value, idx = distinguishability(member, mode)
    assert value == 0.0
    assert idx == 0


def test_distinguishability_tie_takes_lowest_index():
    mode = FaultMode("f1", members=(_pdf1(1.0), _pdf1(-1.0)))
    value, idx = distinguishability(_pdf1(0.0), mode)
    assert value == pytest.approx(0.5, abs=1e-12)
    assert idx == 0


def test_within_class_leave_one_out():
    mode = FaultMode("f1", members=(_pdf1(0.0), _pdf1(0.1), _pdf1(5.0)))
    values = within_class(mode)
    assert values[0] == pytest.approx(0.005, abs=1e-12)  # to the 0.1 neighbor
    assert values[1] == pytest.approx(0.005, abs=1e-12)
    assert values[2] == pytest.approx(0.5 * 4.9**2, abs=1e-10)
    with pytest.raises(ValueError, match="at least 2"):
        within_class(FaultMode("f1", members=(_pdf1(0.0),)))


def test_ordered_subset_sorts_by_divergence():
    members = tuple(_pdf1(m, theta=10.0 * m) for m in (0.0, 1.0, 2.0, 3.0))
    mode = FaultMode("f1", members=members)
    pairs = ordered_subset(_pdf1(1.2), mode, l=2)
    assert [th for _, th in pairs] == [10.0, 20.0]
    assert pairs[0][0] is members[1]


def test_ordered_subset_l_larger_than_mode():
    mode = FaultMode("f1", members=(_pdf1(0.0, theta=1.0), _pdf1(1.0, theta=2.0)))
    pairs = ordered_subset(_pdf1(0.4), mode, l=10)
    assert len(pairs) == 2
    with pytest.raises(ValueError):
        ordered_subset(_pdf1(0.0), mode, l=0)


def test_detect_not_harder_than_isolate():
    """With fault-free members merged into every fault mode, no batch is ever
    closer to the fault-free mode than to a fault mode."""
    rng = np.random.default_rng(77)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        nf_members = tuple(_random_pdf(rng, n) for _ in range(int(rng.integers(2, 5))))
        nf = FaultMode("NF", members=nf_members)
        modes = {"NF": nf}
        for j in range(int(rng.integers(1, 4))):
            own = tuple(_random_pdf(rng, n) for _ in range(int(rng.integers(1, 4))))
            modes[f"f{j}"] = FaultMode(f"f{j}", members=own + nf_members, includes_nf=True)
        registry = ModeRegistry(modes=modes)
        p = _random_pdf(rng, n)
        d_nf, _ = distinguishability(p, registry.nf_mode)
        for label in registry.fault_labels():
            d_j, _ = distinguishability(p, registry.modes[label])
            assert d_j <= d_nf


def test_adding_members_never_increases_distinguishability():
    rng = np.random.default_rng(88)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        members = tuple(_random_pdf(rng, n) for _ in range(int(rng.integers(1, 6))))
        mode = FaultMode("f1", members=members)
        grown = FaultMode("f1", members=members + (_random_pdf(rng, n),))
        p = _random_pdf(rng, n)
        assert distinguishability(p, grown)[0] <= distinguishability(p, mode)[0]


def test_quantile_report_median():
    values = np.arange(1.0, 101.0)
    report = quantile_report(values)
    assert report.shape == (5,)
    assert report[2] == pytest.approx(50.5)
    assert report[0] == pytest.approx(10.9)
    with pytest.raises(ValueError, match="empty"):
        quantile_report([])
    with pytest.raises(ValueError, match="fractions"):
        quantile_report([1.0, 2.0], quantiles=(1.5,))


def test_registry_validation():
    nf = FaultMode("NF", members=(_pdf1(0.0),))
    with pytest.raises(ValueError, match="fault-free"):
        ModeRegistry(modes={"f1": FaultMode("f1", members=(_pdf1(1.0),))})
    with pytest.raises(ValueError, match="stored under"):
        ModeRegistry(modes={"NF": nf, "f1": FaultMode("f2", members=(_pdf1(1.0),))})
    with pytest.raises(ValueError, match="dimension"):
        ModeRegistry(modes={
            "NF": nf,
            "f1": FaultMode("f1", members=(_random_pdf(np.random.default_rng(0), 2),)),
        })
    registry = ModeRegistry(modes={"NF": nf, "f1": FaultMode("f1", members=(_pdf1(1.0),))})
    assert registry.fault_labels() == ["f1"]
    assert registry.nf_mode is nf


def test_mode_validation():
    with pytest.raises(ValueError, match="at least one"):
        FaultMode("f1", members=())
    with pytest.raises(ValueError, match="dimension"):
        FaultMode("f1", members=(_pdf1(0.0), _random_pdf(np.random.default_rng(1), 2)))
    mode = FaultMode("f1", members=(_pdf1(0.0, theta=5.0), _pdf1(1.0, theta=10.0)))
    np.testing.assert_array_equal(mode.member_thetas(), [5.0, 10.0])
    with pytest.raises(ValueError, match="without a fault size"):
        FaultMode("f1", members=(_pdf1(0.0),)).member_thetas()


# ---------------------------------------------------------------------------
# clustered search


def _seeded_mode(count=60, n=2, seed=5):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-8.0, 8.0, size=(6, n))
    members = []
    for i in range(count):
        c = centers[i % len(centers)]
        a = rng.standard_normal((n, n)) * 0.3
        members.append(GaussianPdf(mean=c + 0.3 * rng.standard_normal(n),
                                   cov=a @ a.T + np.eye(n)))
    return FaultMode("f1", members=tuple(members))


def test_index_is_deterministic():
    mode = _seeded_mode()
    a = build_search_index(mode, cluster_count=6)
    b = build_search_index(mode, cluster_count=6)
    assert a.medoids == b.medoids
    for ca, cb in zip(a.clusters, b.clusters):
        np.testing.assert_array_equal(ca, cb)
    # each medoid belongs to the cluster it represents
    for c, medoid in enumerate(a.medoids):
        assert medoid in a.clusters[c]


def test_index_cluster_count_bounds():
    mode = _seeded_mode(count=10)
    with pytest.raises(ValueError, match="cluster_count"):
        build_search_index(mode, cluster_count=0)
    with pytest.raises(ValueError, match="cluster_count"):
        build_search_index(mode, cluster_count=11)
    trivial = build_search_index(mode, cluster_count=10)
    assert len(trivial.medoids) == 10


def test_pruned_search_upper_bounds_the_exact_minimum():
    mode = _seeded_mode()
    index = build_search_index(mode, cluster_count=6)
    rng = np.random.default_rng(6)
    exact_hits = 0
    for _ in range(100):
        p = GaussianPdf(mean=rng.uniform(-8.0, 8.0, size=2), cov=np.eye(2))
        exact_value, exact_idx = distinguishability(p, mode)
        pruned_value, pruned_idx = pruned_search(index, p, slack=3.0)
        assert pruned_value >= exact_value - 1e-15
        if pruned_idx == exact_idx:
            assert pruned_value == exact_value
            exact_hits += 1
    assert exact_hits >= 90  # mild clustering, generous slack


def test_pruned_search_with_infinite_slack_is_exhaustive():
    mode = _seeded_mode(count=30)
    index = build_search_index(mode, cluster_count=5)
    rng = np.random.default_rng(7)
    for _ in range(25):
        p = GaussianPdf(mean=rng.uniform(-8.0, 8.0, size=2), cov=np.eye(2))
        assert pruned_search(index, p, slack=np.inf) == distinguishability(p, mode)
    with pytest.raises(ValueError, match="slack"):
        pruned_search(index, p, slack=0.5)


def test_exhaustive_equals_naive_scan_bitwise():
    mode = _seeded_mode(count=25)
    rng = np.random.default_rng(9)
    for _ in range(25):
        p = GaussianPdf(mean=rng.uniform(-8.0, 8.0, size=2), cov=np.eye(2))
        naive = [kl_gaussian(p, q) for q in mode.members]
        value, idx = distinguishability(p, mode)
        assert value == min(naive)
        assert idx == int(np.argmin(naive))
