import json

import numpy as np
import pytest

from stieltjes import dist_model as dm
from stieltjes import fingerprint as fp
from stieltjes.errors import GridDimensionMismatch, GridMismatch
from stieltjes.muntz import MuntzSequence


def primes():
    return MuntzSequence.primes()


# ---------------------------------------------------------------------------
# computing


def test_exponential_on_primes():
    f = fp.compute_fingerprint(dm.exponential(1.0), primes(), 3)
    assert np.allclose(f.values, [1 / 3, 1 / 4, 1 / 6], atol=1e-10)
    assert f.kinds == ("primes",)


def test_point_mass_all_ones():
    f = fp.compute_fingerprint(dm.point_mass(0.0), primes(), 5)
    assert np.array_equal(f.values, np.ones(5))


def test_marshall_olkin_tensor():
    mo = dm.make_catalog("marshall-olkin", {"lambda1": 1, "lambda2": 1, "lambda12": 1})
    f = fp.compute_fingerprint(mo, [primes(), primes()], 2)
    lam = 3.0

    def closed(s, t):
        return ((lam + s + t) * 4 + s * t) / ((lam + s + t) * (2 + s) * (2 + t))

    expect = [[closed(2, 2), closed(2, 3)], [closed(3, 2), closed(3, 3)]]
    assert np.allclose(f.values, expect, atol=1e-12)
    assert f.values.shape == (2, 2)


def test_grid_dimension_mismatch():
    with pytest.raises(GridDimensionMismatch):
        fp.compute_fingerprint(dm.exponential(1.0), [primes(), primes()], 2)


def test_axis_monotonicity():
    f = fp.compute_fingerprint(dm.exponential(1.0), primes(), 8)
    assert np.all(np.diff(f.values) < -1e-12)
    mo = dm.make_catalog("marshall-olkin", {"lambda1": 1, "lambda2": 1, "lambda12": 1})
    f2 = fp.compute_fingerprint(mo, [primes(), primes()], 3)
    assert np.all(np.diff(f2.values, axis=0) < -1e-12)
    assert np.all(np.diff(f2.values, axis=1) < -1e-12)


def test_scale_equivariance():
    lam = 2.5
    grid = [2.0, 3.0, 5.0, 7.0]
    f_scaled = fp.compute_fingerprint(dm.exponential(lam), [grid], None)
    f_unit = fp.compute_fingerprint(
        dm.exponential(1.0), [[g / lam for g in grid]], None
    )
    assert np.allclose(f_scaled.values, f_unit.values, atol=1e-10)


# ---------------------------------------------------------------------------
# comparing


def test_self_comparison_indistinguishable():
    f1 = fp.compute_fingerprint(dm.exponential(1.0), primes(), 10)
    f2 = fp.compute_fingerprint(dm.exponential(1.0), primes(), 10)
    rep = fp.compare(f1, f2, 1e-9)
    assert rep.verdict == "indistinguishable"
    assert "finite grid prefix" in rep.note


def test_close_gamma_is_distinct():
    f1 = fp.compute_fingerprint(dm.exponential(1.0), primes(), 10)
    f2 = fp.compute_fingerprint(dm.gamma_dist(1.0, 1.001), primes(), 10)
    rep = fp.compare(f1, f2, 1e-9)
    assert rep.verdict == "distinct"
    # largest deviation sits at the smallest grid point for this pair
    assert rep.argmax == (0,)
    assert rep.max_delta == pytest.approx(
        abs(1 / 3 - (1 / 3) ** 1.001), rel=1e-6
    )


def test_comparison_symmetry():
    f1 = fp.compute_fingerprint(dm.exponential(1.0), primes(), 8)
    f2 = fp.compute_fingerprint(dm.exponential(1.3), primes(), 8)
    r12 = fp.compare(f1, f2, 1e-9)
    r21 = fp.compare(f2, f1, 1e-9)
    assert r12.verdict == r21.verdict == "distinct"
    assert r12.max_delta == r21.max_delta


def test_moran_downton_r0_equals_product():
    md = dm.make_catalog("moran-downton", {"r": 0.0})
    pr = dm.ProductJoint([dm.exponential(1.0), dm.exponential(1.0)])
    f1 = fp.compute_fingerprint(md, [primes(), primes()], 8)
    f2 = fp.compute_fingerprint(pr, [primes(), primes()], 8)
    rep = fp.compare(f1, f2, 1e-9)
    assert rep.verdict == "indistinguishable"


def test_grid_growth_monotone_separation():
    d1, d2 = dm.exponential(1.0), dm.exponential(1.4)
    deltas = []
    for L in (2, 4, 6, 8):
        f1 = fp.compute_fingerprint(d1, primes(), L)
        f2 = fp.compute_fingerprint(d2, primes(), L)
        deltas.append(fp.compare(f1, f2, 1e-9).max_delta)
    assert all(b >= a - 1e-15 for a, b in zip(deltas, deltas[1:]))
    # distinct at the shortest prefix stays distinct at every longer one
    assert all(d > 1e-9 for d in deltas)


def test_grid_mismatch_raises():
    f1 = fp.compute_fingerprint(dm.exponential(1.0), primes(), 4)
    f2 = fp.compute_fingerprint(dm.exponential(1.0), primes(), 5)
    with pytest.raises(GridMismatch):
        fp.compare(f1, f2)


def test_degenerate_point_masses_indistinguishable():
    f1 = fp.compute_fingerprint(dm.point_mass(0.0), primes(), 6)
    f2 = fp.compute_fingerprint(dm.point_mass(0.0), primes(), 6)
    assert fp.compare(f1, f2, 1e-9).verdict == "indistinguishable"


# ---------------------------------------------------------------------------
# experiment


def test_collision_experiment_clean_small():
    rep = fp.collision_experiment(seed=7, trials=20, prefix_len=8, tol=1e-9)
    assert rep.clean
    assert rep.false_merges == 0 and rep.false_splits == 0
    assert rep.min_distinct_margin > 0
    assert rep.max_equal_delta == 0.0


def test_collision_experiment_empty():
    rep = fp.collision_experiment(seed=1, trials=0)
    assert rep.trials == 0
    assert rep.clean
    assert rep.max_equal_delta == 0.0


def test_collision_experiment_deterministic():
    r1 = fp.collision_experiment(seed=5, trials=5)
    r2 = fp.collision_experiment(seed=5, trials=5)
    assert r1.min_distinct_margin == r2.min_distinct_margin


def test_perturbation_separation():
    rng = np.random.default_rng(3)
    for _ in range(10):
        spec = fp._random_mixture_spec(rng)
        pert = fp._perturb_spec(rng, spec)
        gap = fp.kolmogorov_gap(fp._build_mixture(spec), fp._build_mixture(pert))
        assert gap >= 0.01


# ---------------------------------------------------------------------------
# serialization


def test_to_dict_stable_and_json_clean():
    f = fp.compute_fingerprint(dm.exponential(1.0), primes(), 4)
    d1 = json.dumps(f.to_dict())
    f2 = fp.compute_fingerprint(dm.exponential(1.0), primes(), 4)
    d2 = json.dumps(f2.to_dict())
    assert d1 == d2  # timestamps excluded; identical inputs, identical bytes
    doc = json.loads(d1)
    assert doc["shape"] == [4]
    assert doc["values"][0] == pytest.approx(1 / 3)
