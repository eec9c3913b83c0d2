import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stieltjes import dist_model as dm
from stieltjes.errors import (
    MissingMarginal,
    ParameterOutOfRange,
    SeriesDiverged,
    UnknownCatalogName,
)

RNG = np.random.default_rng(2024)


def catalog_1d():
    return [
        dm.exponential(1.0),
        dm.exponential(0.4),
        dm.gamma_dist(2.0, 3.0),
        dm.gamma_dist(1.0, 1.001),
        dm.positive_stable(0.5),
        dm.point_mass(0.7),
        dm.mixture([(0.3, dm.point_mass(0.0)), (0.7, dm.exponential(2.0))]),
        dm.mixture(
            [(0.2, dm.point_mass(0.5)), (0.5, dm.point_mass(1.0)), (0.3, dm.point_mass(2.0))]
        ),
    ]


def catalog_joint():
    return [
        dm.make_catalog("marshall-olkin", {"lambda1": 1, "lambda2": 2, "lambda12": 0.5}),
        dm.make_catalog("freund", {"alpha": 1, "alpha_prime": 2, "beta": 1, "beta_prime": 2}),
        dm.make_catalog("moran-downton", {"r": 0.5}),
        dm.make_catalog("bivariate-gamma", {"r": 0.3, "q": 2.0}),
        dm.make_catalog("blm", {"theta": 3.0, "f_lambda": 2.0, "g_lambda": 2.0}),
        dm.ProductJoint([dm.exponential(1.0), dm.gamma_dist(2.0, 2.0)]),
        dm.make_catalog("trivariate-gamma", {"alpha": 1.0, "a": 0.5, "b": 0.5}),
        dm.make_catalog("product-exponential", {"lambda1": 1, "lambda2": 2, "lambda3": 3}),
    ]


# ---------------------------------------------------------------------------
# catalog construction


def test_make_catalog_exponential():
    d = dm.make_catalog("exponential", {"lambda": 1})
    x = np.array([0.0, 0.5, 1.0, 3.0])
    assert np.allclose(d.cdf(x), 1 - np.exp(-x))


def test_make_catalog_marshall_olkin_survival():
    j = dm.make_catalog("marshall-olkin", {"lambda1": 1, "lambda2": 1, "lambda12": 1})
    assert math.isclose(j.survival(1.0, 2.0), math.exp(-5.0), rel_tol=1e-14)


def test_make_catalog_rejects_bad_r():
    with pytest.raises(ParameterOutOfRange, match=r"\[0, 1\)"):
        dm.make_catalog("moran-downton", {"r": 1.2})


def test_make_catalog_unknown_name():
    with pytest.raises(UnknownCatalogName):
        dm.make_catalog("noshuchdist", {})


def test_make_catalog_names_constraint():
    with pytest.raises(ParameterOutOfRange, match="a\\^2 \\+ b\\^2 < 1"):
        dm.make_catalog("trivariate-gamma", {"alpha": 1.0, "a": 0.8, "b": 0.7})


def test_catalog_listing():
    names = dm.catalog_names()
    assert "exponential" in names and "trivariate-gamma" in names
    info = dm.catalog_info("gamma")
    assert info["params"] == ["lambda", "q"]


# ---------------------------------------------------------------------------
# univariate invariants


def test_cdf_monotone_and_survival_complement():
    xs = np.sort(RNG.uniform(0.0, 20.0, size=1000))
    for d in catalog_1d():
        F = d.cdf(xs)
        assert np.all(np.diff(F) >= -1e-14)
        assert np.max(np.abs(d.survival(xs) + F - 1.0)) <= 1e-12
        assert d.cdf(d.tail_quantile() * 4 + 50.0) >= 0.999


def test_atom_at_zero_included_right_continuity():
    d = dm.mixture([(0.3, dm.point_mass(0.0)), (0.7, dm.exponential(1.0))])
    assert math.isclose(d.cdf(0.0), 0.3, abs_tol=1e-15)


def test_mass_validation():
    with pytest.raises(ParameterOutOfRange, match="sum to 1"):
        dm.Distribution1D(atoms=[(0.0, 0.5)])
    with pytest.raises(ParameterOutOfRange, match="mass"):
        dm.Distribution1D(atoms=[(0.0, 0.0), (1.0, 1.0)])
    with pytest.raises(ParameterOutOfRange, match="location"):
        dm.Distribution1D(atoms=[(-1.0, 1.0)])


@settings(max_examples=25, deadline=None)
@given(
    lam=st.floats(0.1, 10.0),
    w=st.floats(0.05, 0.95),
    a=st.floats(0.0, 5.0),
    x1=st.floats(0.0, 30.0),
    x2=st.floats(0.0, 30.0),
)
def test_mixture_cdf_monotone_property(lam, w, a, x1, x2):
    d = dm.mixture([(w, dm.point_mass(a)), (1.0 - w, dm.exponential(lam))])
    lo, hi = min(x1, x2), max(x1, x2)
    assert d.cdf(lo) <= d.cdf(hi) + 1e-14
    assert 0.0 <= d.cdf(lo) <= 1.0


# ---------------------------------------------------------------------------
# positive stable series


def test_stable_series_matches_levy_closed_form():
    val = dm.positive_stable_density(0.5, 1.0, 50)
    closed = (4 * math.pi) ** -0.5 * math.exp(-0.25)
    assert abs(val.value - closed) <= 1e-8


def test_stable_series_closed_form_range():
    for x in np.linspace(0.5, 20.0, 12):
        val = dm.positive_stable_density(0.5, float(x), 60)
        closed = (4 * math.pi) ** -0.5 * x**-1.5 * math.exp(-1.0 / (4 * x))
        assert abs(val.value - closed) <= 1e-8


def test_stable_series_large_x_first_term():
    val = dm.positive_stable_density(0.5, 1e6, 2)
    first = math.gamma(1.5) / math.pi * 1e6**-1.5
    assert math.isclose(val.value, first, rel_tol=1e-9)
    assert val.error_bound < 1e-12


def test_stable_series_diverges_small_x():
    with pytest.raises(SeriesDiverged):
        dm.positive_stable_density(0.9, 1e-6, 50)


def test_stable_dist_scipy_matches_series():
    st_dist = dm.positive_stable(0.7)
    series = dm.positive_stable_density(0.7, 2.0, 80)
    assert abs(st_dist.density(2.0) - series.value) <= 1e-7


# ---------------------------------------------------------------------------
# BLM


def test_blm_survival_diagonal_branches_agree():
    spec = dm.BlmSpec(dm.exponential(2.0), dm.exponential(2.0), 3.0)
    ts = RNG.uniform(0.0, 5.0, size=1000)
    lower = np.exp(-3.0 * ts) * spec.F.survival(np.zeros_like(ts))
    upper = np.exp(-3.0 * ts) * spec.G.survival(np.zeros_like(ts))
    vals = dm.blm_survival(spec, ts, ts)
    assert np.array_equal(lower, upper)
    assert np.array_equal(vals, lower)


def test_blm_survival_offdiagonal_value():
    # theta=4 keeps p(theta)=0 admissible; survival at (2,1) is e^{-4} e^{-2}
    spec = dm.BlmSpec(dm.exponential(2.0), dm.exponential(2.0), 4.0)
    assert math.isclose(
        dm.blm_survival(spec, 2.0, 1.0), math.exp(-4.0) * math.exp(-2.0), rel_tol=1e-14
    )


def test_blm_singular_mass_values():
    assert math.isclose(
        dm.BlmSpec(dm.exponential(2.0), dm.exponential(2.0), 4.0).singular_mass, 0.0,
        abs_tol=1e-12,
    )
    assert math.isclose(
        dm.BlmSpec(dm.exponential(2.0), dm.exponential(2.0), 3.0).singular_mass,
        1.0 / 3.0, rel_tol=1e-12,
    )


def test_blm_rejects_inadmissible_theta():
    # p(1) = 3 > 1: the quoted formula value is valid but not a probability
    with pytest.raises(ParameterOutOfRange, match="p\\(theta\\)"):
        dm.BlmSpec(dm.exponential(2.0), dm.exponential(2.0), 1.0)


def test_blm_requires_positive_support():
    withatom = dm.mixture([(0.5, dm.point_mass(0.0)), (0.5, dm.exponential(1.0))])
    with pytest.raises(ParameterOutOfRange, match="positive support"):
        dm.BlmSpec(withatom, dm.exponential(1.0), 1.0)


def test_blm_diagonal_mass_monte_carlo():
    # BLM(Exp(a), Exp(a'), theta) == Marshall-Olkin(theta-a', theta-a, a+a'-theta),
    # which has the classic min-of-exponentials sampler; diagonal hits have
    # probability lambda12/lambda = p(theta).
    a = ap = 2.0
    theta = 3.0
    spec = dm.BlmSpec(dm.exponential(a), dm.exponential(ap), theta)
    l1, l2, l12 = theta - ap, theta - a, a + ap - theta
    rng = np.random.default_rng(7)
    n = 200_000
    e1 = rng.exponential(1.0 / l1, n)
    e2 = rng.exponential(1.0 / l2, n)
    e12 = rng.exponential(1.0 / l12, n)
    x = np.minimum(e1, e12)
    y = np.minimum(e2, e12)
    frac = np.mean(x == y)
    assert abs(frac - spec.singular_mass) < 0.01
    # simulated joint survival agrees with the BLM formula at a few points
    for (px, py) in [(0.5, 0.2), (1.0, 1.0), (0.3, 1.2)]:
        emp = np.mean((x > px) & (y > py))
        assert abs(emp - dm.blm_survival(spec, px, py)) < 0.01


# ---------------------------------------------------------------------------
# joint invariants


def test_inclusion_exclusion_trivial_examples():
    pr2 = dm.ProductJoint([dm.exponential(1.0), dm.exponential(1.0)])
    assert math.isclose(dm.inclusion_exclusion_survival(pr2, (0.0, 0.0)), 1.0, abs_tol=1e-14)
    pr3 = dm.ProductJoint([dm.exponential(1.0)] * 3)
    assert math.isclose(
        dm.inclusion_exclusion_survival(pr3, (1.0, 1.0, 1.0)), math.exp(-3.0), rel_tol=1e-12
    )
    mo = dm.make_catalog("marshall-olkin", {"lambda1": 1, "lambda2": 1, "lambda12": 1})
    assert math.isclose(
        dm.inclusion_exclusion_survival(mo, (1.0, 1.0)), math.exp(-3.0), rel_tol=1e-12
    )


def test_inclusion_exclusion_matches_direct_survival_on_grids():
    rng = np.random.default_rng(31)
    for j in catalog_joint():
        axes = [np.sort(rng.uniform(0.05, 4.0, size=5)) for _ in range(j.dim)]
        worst = 0.0
        for pt in np.stack(np.meshgrid(*axes), axis=-1).reshape(-1, j.dim):
            gap = abs(dm.inclusion_exclusion_survival(j, tuple(pt)) - float(j.survival(*pt)))
            worst = max(worst, gap)
        assert worst <= 1e-10, f"{j.kind}: worst gap {worst}"


def test_joint_cdf_monotone_and_saturates():
    for j in catalog_joint():
        pts = RNG.uniform(0.1, 3.0, size=(40, j.dim))
        for pt in pts:
            base = float(j.cdf(*pt))
            assert -1e-12 <= base <= 1 + 1e-12
            for ax in range(j.dim):
                bumped = pt.copy()
                bumped[ax] += 0.5
                assert float(j.cdf(*bumped)) >= base - 1e-12
        far = [60.0] * j.dim
        assert float(j.cdf(*far)) >= 0.999


def test_product_cdf_is_exact_product():
    f1, f2 = dm.exponential(1.0), dm.gamma_dist(2.0, 2.0)
    j = dm.ProductJoint([f1, f2])
    xs = RNG.uniform(0.0, 5.0, size=(50, 2))
    for x, y in xs:
        assert float(j.cdf(x, y)) == float(f1.cdf(x)) * float(f2.cdf(y))


def test_marginals_of_every_order():
    tg = dm.make_catalog("trivariate-gamma", {"alpha": 1.0, "a": 0.5, "b": 0.5})
    for idx in [(0,), (1,), (2,)]:
        m = tg.marginal(idx)
        assert isinstance(m, dm.Distribution1D)
        assert math.isclose(m.cdf(100.0), 1.0, abs_tol=1e-9)
    for idx in [(0, 1), (0, 2), (1, 2)]:
        m2 = tg.marginal(idx)
        assert m2.dim == 2
        # pair marginal must agree with the full cdf at a large third coordinate
        pt = (0.8, 1.3)
        full = {
            (0, 1): tg.cdf(pt[0], pt[1], 200.0),
            (0, 2): tg.cdf(pt[0], 200.0, pt[1]),
            (1, 2): tg.cdf(200.0, pt[0], pt[1]),
        }[idx]
        assert abs(float(m2.cdf(*pt)) - float(full)) <= 1e-9
    with pytest.raises(MissingMarginal):
        tg.marginal((0, 1, 2, 3))


def test_freund_marginal_consistency():
    fr = dm.make_catalog("freund", {"alpha": 1, "alpha_prime": 2, "beta": 1.5, "beta_prime": 0.7})
    mx = fr.marginal((0,))
    my = fr.marginal((1,))
    for x in (0.3, 1.0, 2.5):
        assert abs(float(mx.cdf(x)) - float(fr.cdf(x, 400.0))) <= 1e-9
        assert abs(float(my.cdf(x)) - float(fr.cdf(400.0, x))) <= 1e-9


def test_freund_cdf_matches_density_integral():
    # the density jumps across the diagonal, so integrate y with a
    # breakpoint at y=x inside an outer (non-vectorized) x integration
    fr = dm.make_catalog("freund", {"alpha": 1, "alpha_prime": 2, "beta": 1, "beta_prime": 2})
    from stieltjes._quadrature import adaptive_quad

    for (X, Y) in [(0.7, 1.2), (1.5, 0.4)]:
        def inner(x):
            return adaptive_quad(
                lambda y, xv=x: np.asarray(fr.density(xv, y)),
                0.0, Y, 1e-12, breakpoints=[x],
            ).value

        def outer(xs):
            return np.array([inner(float(x)) for x in np.atleast_1d(xs)])

        res = adaptive_quad(outer, 0.0, X, 1e-10, breakpoints=[Y])
        assert abs(res.value - float(fr.cdf(X, Y))) <= 1e-8


def test_gamma_series_tail_rejection():
    with pytest.raises(ParameterOutOfRange, match="series"):
        dm.moran_downton(0.99999)


def test_spec_dict_round_trip_kinds():
    from stieltjes import specio

    j = dm.make_catalog("marshall-olkin", {"lambda1": 1, "lambda2": 2, "lambda12": 0.5})
    again = specio.spec_from_dict(j.spec_dict())
    pts = RNG.uniform(0.1, 4.0, size=(20, 2))
    for pt in pts:
        assert float(j.cdf(*pt)) == float(again.cdf(*pt))
