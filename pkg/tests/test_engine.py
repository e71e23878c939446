from itertools import product

import numpy as np
import pytest

from krr import (
    AggregationFn,
    GeneratorParams,
    KrrConfig,
    RatingTable,
    aggregate,
    generate,
    k_curve,
    krippendorff_alpha,
    krr_bootstrap,
    krr_empirical,
    pair_aggregates,
    true_icc,
)
from krr.engine import bootstrap_replication
from krr.errors import BadRedundancy, IncompleteData, ReplicationMismatch, ScaleMismatch

from oracles import alpha_bruteforce, close


def replicas(phi=1.35, eps=1.0, n=353, k=13, seeds=(1, 2)):
    """Two independent replications over the same items, sharing item effects."""
    rng = np.random.default_rng(seeds[0])
    effects = rng.normal(0, np.sqrt(phi), size=n)
    out = []
    for s in seeds:
        noise = np.random.default_rng([s, 99]).normal(0, np.sqrt(eps), size=(n, k))
        out.append(RatingTable(tuple(f"w{i}" for i in range(n)), 5 + effects[:, None] + noise))
    return out


def test_config_validation():
    with pytest.raises(ValueError):
        KrrConfig(k=0)
    with pytest.raises(ValueError):
        KrrConfig(draws=0)
    with pytest.raises(ScaleMismatch):
        KrrConfig(coefficient="kappa")
    KrrConfig(coefficient="kappa", aggregation=AggregationFn("majority"))
    assert KrrConfig(metric="ordinal").coefficient_name == "alpha-ordinal"


def test_identical_replications():
    t = RatingTable.from_rows([[1, 2, 3], [4, 6, 5], [9, 7, 8], [2, 2, 3]])
    # draws from the two copies are independent, so only full k is certain to agree
    assert krr_empirical(t, t, KrrConfig(k=3, draws=5)).value == 1.0
    per_item_const = RatingTable.from_rows([[1, 1, 1], [4, 4, 4], [9, 9, 9]])
    for k in (1, 2, 3):
        assert krr_empirical(per_item_const, per_item_const, KrrConfig(k=k)).value == 1.0


def test_full_k_is_deterministic_single_draw():
    a, b = replicas(n=40, k=5)
    r = krr_empirical(a, b, KrrConfig(k=5, draws=30))
    assert r.draws == 1 and r.dispersion == 0.0
    direct = krippendorff_alpha(pair_aggregates(aggregate(a), aggregate(b)), "interval").value
    assert r.value == direct


def test_empirical_reports_seed_and_spread():
    a, b = replicas(n=60, k=6)
    r = krr_empirical(a, b, KrrConfig(k=2, draws=12, seed=5))
    assert (r.method, r.k, r.seed, r.draws, r.n_items) == ("krr_empirical", 2, 5, 12, 60)
    assert r.dispersion > 0
    assert r == krr_empirical(a, b, KrrConfig(k=2, draws=12, seed=5))


def test_empirical_item_order_does_not_matter():
    a, b = replicas(n=30, k=4)
    shuffled = b.take_items(np.random.default_rng(0).permutation(30))
    cfg = KrrConfig(k=2, draws=4, seed=1)
    assert krr_empirical(a, shuffled, cfg).value == krr_empirical(a, b, cfg).value


def test_empirical_errors():
    a, b = replicas(n=10, k=3)
    with pytest.raises(BadRedundancy):
        krr_empirical(a, b, KrrConfig(k=4))
    with pytest.raises(ReplicationMismatch):
        krr_empirical(a, b.take_items(range(9)), KrrConfig(k=1))


def test_empirical_with_ragged_items():
    a = RatingTable.from_rows([[1, 2, 3], [5, 6, None], [9, 8, 7]], item_ids="xyz")
    b = RatingTable.from_rows([[2, 2], [6, 5], [8, 9]], item_ids="xyz")
    r = krr_empirical(a, b, KrrConfig(k=2, draws=10))
    assert r.draws == 10 and -1 <= r.value <= 1
    with pytest.raises(BadRedundancy):
        krr_empirical(a, b, KrrConfig(k=3))


def test_majority_binary_full_k_matches_enumeration():
    # every pair of binary 3-rating replications over 3 items whose majorities are not all equal
    triples = list(product([0, 1], repeat=3))
    checked = 0
    for rows_a in product(triples[::3], repeat=3):
        rows_b = [tuple(1 - v for v in r) if i == 0 else r for i, r in enumerate(rows_a)]
        a = RatingTable.from_rows(rows_a, item_ids="pqr", scale="nominal", alphabet=(0, 1))
        b = RatingTable.from_rows(rows_b, item_ids="pqr", scale="nominal", alphabet=(0, 1))
        maj = lambda rows: [int(sum(r) >= 2) for r in rows]  # noqa: E731
        expected = alpha_bruteforce([[x, y] for x, y in zip(maj(rows_a), maj(rows_b))], "nominal")
        if expected is None:
            continue
        cfg = KrrConfig(k=3, aggregation=AggregationFn("majority"), metric="nominal")
        assert close(krr_empirical(a, b, cfg).value, expected)
        checked += 1
    assert checked


def test_kappa_route():
    a = RatingTable.from_rows([["y", "y", "n"], ["n", "n", "n"], ["y", "y", "y"], ["n", "y", "n"]],
                              item_ids="abcd", scale="nominal")
    cfg = KrrConfig(k=3, aggregation=AggregationFn("majority"), coefficient="kappa")
    r = krr_empirical(a, a, cfg)
    assert r.value == 1.0 and r.coefficient == "kappa"


def test_bootstrap_constant_items():
    t = RatingTable.from_rows([[v] * 4 for v in (1, 2, 5, 7, 7)])
    r = krr_bootstrap(t, KrrConfig(k=4, bootstrap_iterations=10))
    assert r.value == 1.0 and r.dispersion == 0.0
    assert r.bootstrap_iterations == 10 and r.draws is None


def test_bootstrap_preserves_sample_size():
    t = generate(GeneratorParams(n=25, k=7, seed=0))
    rep = bootstrap_replication(t, np.random.default_rng(0))
    assert rep.shape == t.shape
    for new, old in zip(rep.values, t.values):
        assert set(new) <= set(old)


def test_bootstrap_reproducible_and_preconditions():
    t = generate(GeneratorParams(n=30, k=5, seed=4))
    cfg = KrrConfig(k=5, bootstrap_iterations=20, seed=8)
    assert krr_bootstrap(t, cfg) == krr_bootstrap(t, cfg)
    assert krr_bootstrap(t, cfg) != krr_bootstrap(t, KrrConfig(k=5, bootstrap_iterations=20, seed=9))
    with pytest.raises(BadRedundancy):
        krr_bootstrap(t, KrrConfig(k=3))
    with pytest.raises(IncompleteData):
        krr_bootstrap(RatingTable.from_rows([[1, 2], [3, None]]), KrrConfig(k=2))


def test_bootstrap_consecutive_pairing():
    t = generate(GeneratorParams(n=50, k=5, seed=4))
    r = krr_bootstrap(t, KrrConfig(k=5, bootstrap_iterations=15, pairing="consecutive"))
    assert r.bootstrap_iterations == 15 and 0 < r.value < 1


def test_methods_agree_on_simulated_replications():
    """Same shape as a 353-item, 13-rating replication pair, single-rating reliability 0.574."""
    phi = 0.574 / (1 - 0.574)
    a, b = replicas(phi=phi, eps=1.0)
    params = GeneratorParams(sigma2_phi=phi, sigma2_eps=1.0)
    cfg = KrrConfig(k=13, seed=0)
    emp1 = krr_empirical(a, b, KrrConfig(k=1, draws=30)).value
    emp13 = krr_empirical(a, b, cfg).value
    boot = krr_bootstrap(a, cfg).value
    assert emp1 == pytest.approx(true_icc(params, 1), abs=0.05)
    assert emp13 == pytest.approx(true_icc(params, 13), abs=0.02)
    assert boot == pytest.approx(emp13, abs=0.02)
    rows = k_curve(a, b, KrrConfig(draws=10), k_max=13)
    for row in rows:
        assert abs(row["sb"].value - row["krr_empirical"].value) < 0.05


def test_k_curve_perfect_agreement():
    t = RatingTable.from_rows([[v] * 4 for v in (1, 3, 4, 8, 2)])
    rows = k_curve(t, t, KrrConfig(draws=3))
    assert len(rows) == 4
    assert rows[0]["icc"] is None
    for row in rows:
        for point in row.values():
            if point is not None:
                assert point.value == 1.0


def test_k_curve_single_table():
    t = generate(GeneratorParams(n=40, k=6, seed=1))
    rows = k_curve(t, None, KrrConfig(draws=4), k_max=1)
    assert rows == [{"icc": None, "sb": rows[0]["sb"]}]
    pilots = k_curve(t, None, KrrConfig(draws=4), k_max=6)
    assert pilots[0]["sb"] == rows[0]["sb"]
    sb = [r["sb"].value for r in pilots]
    assert all(x < y for x, y in zip(sb, sb[1:]))


def test_k_curve_nominal_has_empirical_only():
    t = RatingTable.from_rows([["a", "a", "b"], ["b", "b", "b"], ["a", "a", "a"]], scale="nominal")
    cfg = KrrConfig(draws=2, aggregation=AggregationFn("majority", "lowest-label"), metric="nominal")
    rows = k_curve(t, t, cfg)
    assert all(r["icc"] is None and r["sb"] is None for r in rows)
    assert rows[-1]["krr_empirical"].value == 1.0
