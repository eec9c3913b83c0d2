"""Nonnegative distributions with atoms, densities, and singular parts.

Univariate laws are atom lists plus an absolutely continuous part; joint laws
(dim 2..4) come from a small catalog: independent products, Marshall-Olkin,
Freund, Moran-Downton, bivariate lack-of-memory (with its singular diagonal),
and bivariate/trivariate Gamma series families.  Every law exposes CDF,
survival, and marginals of every order; catalog entries also carry their
closed-form Laplace-Stieltjes transform.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln

from .errors import (
    MissingMarginal,
    ParameterOutOfRange,
    SeriesDiverged,
    UnknownCatalogName,
)

_MASS_TOL = 1e-12


def _exp_em1ratio(u, c, t):
    """exp(u) * (1 - exp(-c*t)) / c  ==  (exp(u) - exp(u - c*t)) / c.

    Stable as c -> 0 (limit exp(u)*t) and overflow-free provided both
    exponents u and u - c*t are <= 0, which the callers guarantee.
    Broadcasts.
    """
    u = np.asarray(u, dtype=float)
    c = np.asarray(c, dtype=float)
    t = np.asarray(t, dtype=float)
    small = np.abs(c) * np.maximum(np.abs(t), 1.0) < 1e-8
    csafe = np.where(small, 1.0, c)
    out = np.where(
        small,
        np.exp(u) * t * (1.0 - 0.5 * c * t),
        (np.exp(u) - np.exp(u - csafe * t)) / csafe,
    )
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# Univariate distributions


class Distribution1D:
    """A distribution on [0, inf): atoms plus an absolutely continuous part.

    Parameters
    ----------
    atoms : sequence of (location, mass)
        Point masses; locations >= 0, masses > 0.
    ac_weight : float
        Weight of the absolutely continuous part, in [0, 1].
    ac_density, ac_cdf : callables or None
        Normalized density / CDF of the AC part (each integrates /
        saturates to 1 on its own); both vectorized over numpy arrays.
    transform_terms : list of tuples or None
        Closed-form transform description, one tuple per component:
        ``("atom", mass, loc)``, ``("gamma", weight, rate, shape)`` or
        ``("stable", weight, alpha)``.  Used for the closed-form route and
        for synthesizing exact transform derivatives.
    """

    def __init__(
        self,
        atoms: Sequence[tuple[float, float]] = (),
        ac_weight: float = 0.0,
        ac_density: Callable | None = None,
        ac_cdf: Callable | None = None,
        *,
        transform_terms: list[tuple] | None = None,
        catalog_id: str | None = None,
        params: dict | None = None,
        density_at_zero: float | None = None,
        mean: float | None = None,
    ):
        atoms = tuple((float(a), float(m)) for a, m in atoms)
        for loc, mass in atoms:
            if loc < 0:
                raise ParameterOutOfRange("atom location must be >= 0")
            if not 0 < mass <= 1 + _MASS_TOL:
                raise ParameterOutOfRange("atom mass must lie in (0, 1]")
        total = sum(m for _, m in atoms) + ac_weight
        if abs(total - 1.0) > _MASS_TOL:
            raise ParameterOutOfRange(
                f"atom masses + AC weight must sum to 1 (got {total!r})"
            )
        if ac_weight > 0 and ac_cdf is None:
            raise ParameterOutOfRange("an AC part needs a CDF evaluator")
        self.atoms = tuple(sorted(atoms))
        self.ac_weight = float(ac_weight)
        self.ac_density = ac_density
        self.ac_cdf = ac_cdf
        self.transform_terms = transform_terms
        self.catalog_id = catalog_id
        self.params = dict(params) if params else None
        self.density_at_zero = density_at_zero
        self.mean = mean
        self._q9999 = None

    dim = 1

    @property
    def has_density(self) -> bool:
        return self.ac_weight == 0.0 or self.ac_density is not None

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.ac_weight > 0:
            out = self.ac_weight * np.asarray(self.ac_cdf(np.maximum(x, 0.0)))
            out = np.where(x < 0, 0.0, out)
        for loc, mass in self.atoms:
            out = out + mass * (x >= loc)
        return float(out) if out.ndim == 0 else out

    def survival(self, x):
        out = 1.0 - self.cdf(x)
        return out

    def density(self, x):
        """Defective density of the AC part (weight included); atoms excluded."""
        if self.ac_density is None:
            raise ParameterOutOfRange("distribution has no density evaluator")
        x = np.asarray(x, dtype=float)
        out = self.ac_weight * np.asarray(self.ac_density(x))
        return float(out) if out.ndim == 0 else out

    def closed_ls(self, s: float) -> float | None:
        """Closed-form transform value, or None if not available."""
        if self.transform_terms is None:
            return None
        total = 0.0
        for term in self.transform_terms:
            if term[0] == "atom":
                _, m, loc = term
                total += m * math.exp(-s * loc)
            elif term[0] == "gamma":
                _, w, rate, shape = term
                total += w * (rate / (rate + s)) ** shape
            elif term[0] == "stable":
                _, w, alpha = term
                total += w * math.exp(-(s**alpha))
            else:  # pragma: no cover
                raise ValueError(f"unknown transform term {term[0]!r}")
        return total

    @property
    def has_closed_ls(self) -> bool:
        return self.transform_terms is not None

    def quantile(self, p: float) -> float:
        """Generalized inverse of the CDF by bisection."""
        if not 0 < p < 1:
            raise ParameterOutOfRange("quantile level must lie in (0, 1)")
        hi = 1.0
        for _ in range(200):
            if self.cdf(hi) >= p:
                break
            hi *= 2.0
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.cdf(mid) >= p:
                hi = mid
            else:
                lo = mid
        return hi

    def tail_quantile(self) -> float:
        """Cached 0.9999 quantile, used for integration truncation."""
        if self._q9999 is None:
            self._q9999 = self.quantile(0.9999)
        return self._q9999

    def spec_dict(self) -> dict:
        if self.catalog_id is not None:
            return {"kind": self.catalog_id, "params": dict(self.params or {})}
        if getattr(self, "_mixture_spec", None) is not None:
            return {"mixture": [dict(e) for e in self._mixture_spec]}
        raise ValueError("distribution has no serializable spec")


def point_mass(location: float) -> Distribution1D:
    if location < 0:
        raise ParameterOutOfRange("point-mass: location must be >= 0")
    return Distribution1D(
        atoms=[(location, 1.0)],
        transform_terms=[("atom", 1.0, float(location))],
        catalog_id="point-mass",
        params={"location": float(location)},
        density_at_zero=0.0,
        mean=float(location),
    )


def exponential(lam: float) -> Distribution1D:
    if lam <= 0:
        raise ParameterOutOfRange("exponential: lambda must be > 0")
    lam = float(lam)
    return Distribution1D(
        ac_weight=1.0,
        ac_density=lambda x: lam * np.exp(-lam * np.asarray(x, dtype=float)),
        ac_cdf=lambda x: -np.expm1(-lam * np.asarray(x, dtype=float)),
        transform_terms=[("gamma", 1.0, lam, 1.0)],
        catalog_id="exponential",
        params={"lambda": lam},
        density_at_zero=lam,
        mean=1.0 / lam,
    )


def gamma_dist(lam: float, q: float) -> Distribution1D:
    if lam <= 0:
        raise ParameterOutOfRange("gamma: lambda must be > 0")
    if q <= 0:
        raise ParameterOutOfRange("gamma: shape q must be > 0")
    lam, q = float(lam), float(q)
    lognorm = q * math.log(lam) - gammaln(q)

    def density(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logd = lognorm + (q - 1.0) * np.log(x) - lam * x
            out = np.where(x > 0, np.exp(logd), 0.0)
        return out

    if q > 1:
        f0 = 0.0
    elif q == 1:
        f0 = lam
    else:
        f0 = math.inf
    return Distribution1D(
        ac_weight=1.0,
        ac_density=density,
        ac_cdf=lambda x: gammainc(q, lam * np.asarray(x, dtype=float)),
        transform_terms=[("gamma", 1.0, lam, q)],
        catalog_id="gamma",
        params={"lambda": lam, "q": q},
        density_at_zero=f0,
        mean=q / lam,
    )


@dataclass(frozen=True)
class StableDensityValue:
    value: float
    error_bound: float
    terms_used: int


def positive_stable_density(alpha: float, x: float, terms: int) -> StableDensityValue:
    """Partial sum of the positive stable density series at a point.

    The series alternates and its terms first grow for small x; evaluation
    stops when the term magnitude drops below 1e-16 of the partial sum or
    the term budget runs out.  The reported error bound is the magnitude of
    the first omitted (nonzero) term.

    Raises SeriesDiverged when the budget runs out while terms are still
    growing, i.e. x is too small for the requested accuracy.
    """
    if not 0 < alpha < 1:
        raise ParameterOutOfRange("positive-stable: alpha must lie in (0, 1)")
    if x <= 0:
        raise ParameterOutOfRange("positive-stable density: x must be > 0")
    if terms < 1:
        raise ParameterOutOfRange("positive-stable density: terms must be >= 1")

    def term_parts(k: int):
        """Signed term and its sine-free magnitude envelope."""
        logmag = gammaln(alpha * k + 1.0) - gammaln(k + 1.0) - alpha * k * math.log(x)
        logmag -= math.log(math.pi * x)
        if logmag > 700.0:
            raise SeriesDiverged(
                f"series terms overflow at k={k} (x={x:g} too small for alpha={alpha:g})"
            )
        env = math.exp(logmag)
        sk = math.sin(alpha * k * math.pi)
        if abs(sk) < 1e-13:
            sk = 0.0
        # -(1/(pi x)) * (-x^-alpha)^k * sin(...) = -(1/(pi x)) (-1)^k x^{-ak} sin(...)
        return -((-1.0) ** k) * env * sk, env

    total = 0.0
    prev_env = None
    growing = False
    used = 0
    for k in range(1, terms + 1):
        t, env = term_parts(k)
        used = k
        total += t
        if env < 1e-16 * abs(total):
            growing = False
            break
        growing = prev_env is not None and env > prev_env
        prev_env = env
    else:
        if growing:
            raise SeriesDiverged(
                f"terms still growing after {terms} terms (x={x:g}, alpha={alpha:g})"
            )
    _, bound = term_parts(used + 1)
    return StableDensityValue(total, bound, used)


def positive_stable(alpha: float) -> Distribution1D:
    """Positive stable law with transform exp(-s^alpha).

    alpha = 1/2 uses the closed-form (Levy) density and CDF; other alphas
    delegate density/CDF evaluation to scipy's stable implementation.
    """
    if not 0 < alpha < 1:
        raise ParameterOutOfRange("positive-stable: alpha must lie in (0, 1)")
    alpha = float(alpha)
    if alpha == 0.5:
        from scipy.special import erfc

        def density(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(
                    x > 0,
                    (4.0 * math.pi) ** -0.5 * x ** -1.5 * np.exp(-0.25 / np.maximum(x, 1e-300)),
                    0.0,
                )
            return out

        def cdf(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                out = np.where(x > 0, erfc(0.5 / np.sqrt(np.maximum(x, 1e-300))), 0.0)
            return out
    else:
        from scipy.stats import levy_stable

        scale = math.cos(math.pi * alpha / 2.0) ** (1.0 / alpha)
        frozen = levy_stable(alpha, 1.0, loc=0.0, scale=scale)

        def density(x):
            x = np.asarray(x, dtype=float)
            return np.where(x > 0, frozen.pdf(np.maximum(x, 1e-300)), 0.0)

        def cdf(x):
            x = np.asarray(x, dtype=float)
            return np.where(x > 0, frozen.cdf(np.maximum(x, 1e-300)), 0.0)

    return Distribution1D(
        ac_weight=1.0,
        ac_density=density,
        ac_cdf=cdf,
        transform_terms=[("stable", 1.0, alpha)],
        catalog_id="positive-stable",
        params={"alpha": alpha},
        density_at_zero=0.0,
        mean=math.inf,
    )


def mixture(components: Sequence[tuple[float, Distribution1D]]) -> Distribution1D:
    """Finite mixture of univariate laws; weights must sum to 1."""
    if not components:
        raise ParameterOutOfRange("mixture: needs at least one component")
    wsum = sum(w for w, _ in components)
    if abs(wsum - 1.0) > _MASS_TOL:
        raise ParameterOutOfRange(f"mixture: weights must sum to 1 (got {wsum!r})")
    atom_masses: dict[float, float] = {}
    ac_parts = []
    terms = []
    have_terms = True
    mean = 0.0
    have_mean = True
    spec_entries = []
    for w, d in components:
        if w <= 0:
            raise ParameterOutOfRange("mixture: weights must be > 0")
        for loc, m in d.atoms:
            atom_masses[loc] = atom_masses.get(loc, 0.0) + w * m
        if d.ac_weight > 0:
            ac_parts.append((w * d.ac_weight, d.ac_density, d.ac_cdf))
        if d.transform_terms is None:
            have_terms = False
        elif have_terms:
            for t in d.transform_terms:
                terms.append((t[0], w * t[1], *t[2:]))
        if d.mean is None or not math.isfinite(d.mean):
            have_mean = False
        elif have_mean:
            mean += w * d.mean
        spec_entries.append({"weight": float(w), "spec": d.spec_dict()})

    ac_weight = sum(p[0] for p in ac_parts)
    if ac_parts:
        if any(p[1] is None for p in ac_parts):
            ac_density = None
        else:
            def ac_density(x, _parts=tuple(ac_parts), _w=ac_weight):
                x = np.asarray(x, dtype=float)
                return sum(w * np.asarray(f(x)) for w, f, _ in _parts) / _w

        def ac_cdf(x, _parts=tuple(ac_parts), _w=ac_weight):
            x = np.asarray(x, dtype=float)
            return sum(w * np.asarray(c(x)) for w, _, c in _parts) / _w
    else:
        ac_density = ac_cdf = None

    f0s = [d.density_at_zero for _, d in components]
    if any(v is None for v in f0s):
        f0 = None
    else:
        f0 = sum(w * v for (w, _), v in zip(components, f0s))
    out = Distribution1D(
        atoms=sorted(atom_masses.items()),
        ac_weight=ac_weight,
        ac_density=ac_density,
        ac_cdf=ac_cdf,
        transform_terms=terms if have_terms else None,
        density_at_zero=f0,
        mean=mean if have_mean else None,
    )
    out._mixture_spec = spec_entries
    return out


# ---------------------------------------------------------------------------
# Joint distributions


class JointDist:
    """Base for n-dimensional laws (n in {2,3,4}).

    Subclasses provide vectorized ``cdf(*xs)`` and a kind-specific direct
    ``survival(*xs)``, plus ``marginal(indices)`` for every proper subset of
    axes.  ``closed_ls(s)`` returns (value, est_error) or None.
    ``diagonal_seam`` marks 2-D kinds whose CDF has a kink on {x=y}, which
    quadrature must split along.
    """

    dim: int
    kind: str
    diagonal_seam = False

    def cdf(self, *xs):
        raise NotImplementedError

    def survival(self, *xs):
        raise NotImplementedError

    def marginal(self, indices: tuple[int, ...]):
        raise MissingMarginal(f"{self.kind}: marginal {indices} unavailable")

    def closed_ls(self, s: Sequence[float]):
        return None

    @property
    def has_closed_ls(self) -> bool:
        return self.closed_ls([1.0] * self.dim) is not None

    def spec_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


class ProductJoint(JointDist):
    """Independent coordinates with arbitrary univariate factors."""

    kind = "product"

    def __init__(self, factors: Sequence[Distribution1D]):
        if not 2 <= len(factors) <= 4:
            raise ParameterOutOfRange("product: dimension must lie in {2, 3, 4}")
        self.factors = tuple(factors)
        self.dim = len(factors)

    def cdf(self, *xs):
        out = 1.0
        for f, x in zip(self.factors, xs):
            out = out * f.cdf(x)
        return out

    def survival(self, *xs):
        out = 1.0
        for f, x in zip(self.factors, xs):
            out = out * f.survival(x)
        return out

    def marginal(self, indices):
        if len(indices) == 1:
            return self.factors[indices[0]]
        return ProductJoint([self.factors[i] for i in indices])

    def closed_ls(self, s):
        vals = []
        for f, si in zip(self.factors, s):
            v = f.closed_ls(si)
            if v is None:
                return None
            vals.append(v)
        return math.prod(vals), 0.0

    def spec_dict(self):
        if all(f.catalog_id == "exponential" for f in self.factors):
            return {
                "kind": "product-exponential",
                "params": {
                    f"lambda{i+1}": f.params["lambda"]
                    for i, f in enumerate(self.factors)
                },
            }
        raise ValueError("only all-exponential products are serializable")


class MarshallOlkinJoint(JointDist):
    """Bivariate exponential with a common shock: survival
    exp(-l1*x - l2*y - l12*max(x, y))."""

    kind = "marshall-olkin"
    diagonal_seam = True
    dim = 2

    def __init__(self, lambda1: float, lambda2: float, lambda12: float):
        if min(lambda1, lambda2, lambda12) <= 0:
            raise ParameterOutOfRange(
                "marshall-olkin: lambda1, lambda2, lambda12 must all be > 0"
            )
        self.l1, self.l2, self.l12 = float(lambda1), float(lambda2), float(lambda12)
        self.params = {"lambda1": self.l1, "lambda2": self.l2, "lambda12": self.l12}

    def survival(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.exp(-self.l1 * x - self.l2 * y - self.l12 * np.maximum(x, y))
        return float(out) if out.ndim == 0 else out

    def cdf(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        fx = -np.expm1(-(self.l1 + self.l12) * x)
        gy = -np.expm1(-(self.l2 + self.l12) * y)
        out = self.survival(x, y) - 1.0 + fx + gy
        return float(out) if out.ndim == 0 else out

    def marginal(self, indices):
        if indices == (0,):
            return exponential(self.l1 + self.l12)
        if indices == (1,):
            return exponential(self.l2 + self.l12)
        raise MissingMarginal(f"marshall-olkin: no marginal {indices}")

    def closed_ls(self, s):
        si, ti = float(s[0]), float(s[1])
        lam = self.l1 + self.l2 + self.l12
        num = (lam + si + ti) * (self.l1 + self.l12) * (self.l2 + self.l12)
        num += si * ti * self.l12
        den = (lam + si + ti) * (self.l1 + self.l12 + si) * (self.l2 + self.l12 + ti)
        return num / den, 0.0


class FreundJoint(JointDist):
    """Freund's bivariate exponential: component failure shifts the
    survivor's rate (alpha -> alpha' when Y fails first, beta -> beta')."""

    kind = "freund"
    diagonal_seam = True
    dim = 2

    def __init__(self, alpha: float, alpha_prime: float, beta: float, beta_prime: float):
        if min(alpha, alpha_prime, beta, beta_prime) <= 0:
            raise ParameterOutOfRange("freund: all four rates must be > 0")
        self.a, self.ap = float(alpha), float(alpha_prime)
        self.b, self.bp = float(beta), float(beta_prime)
        self.params = {
            "alpha": self.a,
            "alpha_prime": self.ap,
            "beta": self.b,
            "beta_prime": self.bp,
        }

    def density(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        A = self.a + self.b
        lower = self.ap * self.b * np.exp(-(A - self.ap) * y - self.ap * x)
        upper = self.a * self.bp * np.exp(-(A - self.bp) * x - self.bp * y)
        out = np.where(x > y, lower, upper)
        out = np.where((x <= 0) | (y <= 0), 0.0, out)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        A = self.a + self.b
        lo = np.minimum(x, y)
        # H(x,y) = 1 - e^{-A min} - a e^{-bp y} g(A-bp, min) - b e^{-ap x} g(A-ap, min)
        # with g(c, u) = (1 - e^{-cu})/c; valid on both sides of the diagonal.
        out = (
            -np.expm1(-A * lo)
            - self.a * _exp_em1ratio(-self.bp * y, A - self.bp, lo)
            - self.b * _exp_em1ratio(-self.ap * x, A - self.ap, lo)
        )
        out = np.where((x <= 0) | (y <= 0), 0.0, np.maximum(out, 0.0))
        return float(out) if out.ndim == 0 else out

    def survival(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        A = self.a + self.b
        lo = np.minimum(x, y)
        hi = np.maximum(x, y)
        ge = x >= y  # on the x-majorized side the survivor is X with rate alpha'
        surv_lower = np.exp(-A * hi) + self.b * (
            _exp_em1ratio(-self.ap * hi, A - self.ap, hi)
            - _exp_em1ratio(-self.ap * hi, A - self.ap, lo)
        )
        surv_upper = np.exp(-A * hi) + self.a * (
            _exp_em1ratio(-self.bp * hi, A - self.bp, hi)
            - _exp_em1ratio(-self.bp * hi, A - self.bp, lo)
        )
        out = np.where(ge, surv_lower, surv_upper)
        return float(out) if out.ndim == 0 else out

    def marginal(self, indices):
        A = self.a + self.b

        if indices == (0,):
            rate_changed, other = self.ap, self.b
        elif indices == (1,):
            rate_changed, other = self.bp, self.a
        else:
            raise MissingMarginal(f"freund: no marginal {indices}")

        def cdf(x, _A=A, _r=rate_changed, _o=other):
            x = np.asarray(x, dtype=float)
            return -np.expm1(-_A * x) - _o * _exp_em1ratio(-_r * x, _A - _r, x)

        def dens(x, _A=A, _r=rate_changed, _o=other):
            x = np.asarray(x, dtype=float)
            return _A * np.exp(-_A * x) - _o * (
                np.exp(-_A * x) - _r * _exp_em1ratio(-_r * x, _A - _r, x)
            )

        # each marginal is a signed combination of Exp(A) and Exp(r') tails:
        # Fbar(x) = (1 - o/(A - r)) e^{-Ax} + o/(A - r) e^{-rx}
        c = A - rate_changed
        if abs(c) > 1e-10:
            w2 = other / c
            terms = [
                ("gamma", 1.0 - w2, A, 1.0),
                ("gamma", w2, rate_changed, 1.0),
            ]
        else:
            terms = None
        out = Distribution1D(
            ac_weight=1.0,
            ac_density=dens,
            ac_cdf=cdf,
            transform_terms=terms,
            mean=None,
        )
        return out

    def closed_ls(self, s):
        si, ti = float(s[0]), float(s[1])
        A = self.a + self.b
        val = (
            self.ap * self.b / (self.ap + si) + self.a * self.bp / (self.bp + ti)
        ) / (A + si + ti)
        return val, 0.0


# -- bivariate lack-of-memory -------------------------------------------------


@dataclass(frozen=True)
class BlmSpec:
    """Parameters of the bivariate lack-of-memory law.

    F and G are the (positive-support) marginals, theta the diagonal decay
    rate.  The diagonal carries singular mass p = (f(0) + g(0))/theta - 1,
    which must land in [0, 1]; f(0), g(0) are the right limits F(e)/e.
    """

    F: Distribution1D
    G: Distribution1D
    theta: float

    def __post_init__(self):
        if self.theta <= 0:
            raise ParameterOutOfRange("blm: theta must be > 0")
        for name, d in (("F", self.F), ("G", self.G)):
            if d.cdf(0.0) > _MASS_TOL:
                raise ParameterOutOfRange(f"blm: {name} must have positive support")
        p = self.singular_mass
        if p < -1e-9:
            raise ParameterOutOfRange(
                f"blm: diagonal mass p(theta) = {p:.6g} must be >= 0"
            )
        if p > 1.0 + 1e-9:
            raise ParameterOutOfRange(
                f"blm: diagonal mass p(theta) = {p:.6g} must be <= 1"
            )

    @property
    def singular_mass(self) -> float:
        f0 = _density_at_zero(self.F)
        g0 = _density_at_zero(self.G)
        return (f0 + g0) / self.theta - 1.0


def _density_at_zero(d: Distribution1D) -> float:
    if d.density_at_zero is not None:
        return d.density_at_zero
    eps = 1e-7
    return d.cdf(eps) / eps


def blm_survival(spec: BlmSpec, x, y):
    """Joint survival of the lack-of-memory law; both branches agree on x=y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lower = np.exp(-spec.theta * y) * spec.F.survival(np.maximum(x - y, 0.0))
    upper = np.exp(-spec.theta * x) * spec.G.survival(np.maximum(y - x, 0.0))
    out = np.where(x >= y, lower, upper)
    return float(out) if out.ndim == 0 else out


class BlmJoint(JointDist):
    """Lack-of-memory law as a joint distribution (singular diagonal mass)."""

    kind = "blm"
    diagonal_seam = True
    dim = 2

    def __init__(self, spec: BlmSpec):
        self.spec = spec
        self.params = None

    def survival(self, x, y):
        return blm_survival(self.spec, x, y)

    def cdf(self, x, y):
        out = (
            np.asarray(self.survival(x, y))
            - 1.0
            + np.asarray(self.spec.F.cdf(x))
            + np.asarray(self.spec.G.cdf(y))
        )
        return float(out) if out.ndim == 0 else out

    def marginal(self, indices):
        if indices == (0,):
            return self.spec.F
        if indices == (1,):
            return self.spec.G
        raise MissingMarginal(f"blm: no marginal {indices}")

    def closed_ls(self, s):
        si, ti = float(s[0]), float(s[1])
        lf = self.spec.F.closed_ls(si)
        lg = self.spec.G.closed_ls(ti)
        if lf is None or lg is None:
            return None
        th = self.spec.theta
        val = ((th + si) * lf + (th + ti) * lg - th) / (th + si + ti)
        return val, 0.0

    def spec_dict(self):
        if (
            self.spec.F.catalog_id == "exponential"
            and self.spec.G.catalog_id == "exponential"
        ):
            return {
                "kind": "blm",
                "params": {
                    "theta": self.spec.theta,
                    "f_lambda": self.spec.F.params["lambda"],
                    "g_lambda": self.spec.G.params["lambda"],
                },
            }
        raise ValueError("only exponential-marginal BLM specs are serializable")


# -- gamma series families ----------------------------------------------------


class GammaSeries2D(JointDist):
    """Bivariate law of the form sum_t c_t Gamma(shape_xt) x Gamma(shape_yt),
    all coefficients nonnegative and summing to 1.  Covers Moran-Downton,
    the standard bivariate Gamma, and pair marginals of the trivariate Gamma.
    """

    dim = 2

    def __init__(self, coeffs, shapes_x, shapes_y, rate_x, rate_y, tail, kind, params):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.shapes_x = np.asarray(shapes_x, dtype=float)
        self.shapes_y = np.asarray(shapes_y, dtype=float)
        self.rate_x = float(rate_x)
        self.rate_y = float(rate_y)
        self.series_tail = float(tail)
        self.kind = kind
        self.params = params

    def _shape_cdfs(self, shapes, rate, x, upper=False):
        fn = gammaincc if upper else gammainc
        uniq, inv = np.unique(shapes, return_inverse=True)
        x = np.asarray(x, dtype=float)
        table = np.stack([fn(a, rate * x) for a in uniq])
        return table[inv]

    def _combine(self, x, y, upper):
        px = self._shape_cdfs(self.shapes_x, self.rate_x, x, upper)
        py = self._shape_cdfs(self.shapes_y, self.rate_y, y, upper)
        out = np.einsum("t,t...,t...->...", self.coeffs, px, py)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return self._combine(x, y, upper=False)

    def survival(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return self._combine(x, y, upper=True)

    def cdf_tensor(self, nodes):
        px = self._shape_cdfs(self.shapes_x, self.rate_x, nodes[0])  # (t, nx)
        py = self._shape_cdfs(self.shapes_y, self.rate_y, nodes[1])  # (t, ny)
        return (self.coeffs[:, None] * px).T @ py

    def survival_tensor(self, nodes):
        px = self._shape_cdfs(self.shapes_x, self.rate_x, nodes[0], upper=True)
        py = self._shape_cdfs(self.shapes_y, self.rate_y, nodes[1], upper=True)
        return (self.coeffs[:, None] * px).T @ py

    def _axis_marginal(self, shapes, rate):
        agg: dict[float, float] = {}
        for c, a in zip(self.coeffs, shapes):
            agg[float(a)] = agg.get(float(a), 0.0) + float(c)
        pairs = sorted(agg.items())
        slack = max(0.0, 1.0 - sum(w for _, w in pairs))
        # fold the truncated series tail into the largest-shape component so
        # masses still sum to 1 exactly
        if slack > 0:
            a_last, w_last = pairs[-1]
            pairs[-1] = (a_last, w_last + slack)
        comps = [(w, gamma_dist(rate, a)) for a, w in pairs]
        total = sum(w for w, _ in comps)
        comps = [(w / total, d) for w, d in comps]
        return mixture(comps)

    def marginal(self, indices):
        if indices == (0,):
            return self._axis_marginal(self.shapes_x, self.rate_x)
        if indices == (1,):
            return self._axis_marginal(self.shapes_y, self.rate_y)
        raise MissingMarginal(f"{self.kind}: no marginal {indices}")

    def closed_ls(self, s):
        si, ti = float(s[0]), float(s[1])
        fx = (self.rate_x / (self.rate_x + si)) ** self.shapes_x
        fy = (self.rate_y / (self.rate_y + ti)) ** self.shapes_y
        return float(np.sum(self.coeffs * fx * fy)), self.series_tail


def _geometric_tail(first_omitted: float, ratio_sup: float) -> float:
    if ratio_sup >= 1.0:
        return math.inf
    return first_omitted / (1.0 - ratio_sup)


class _MoranDowntonJoint(GammaSeries2D):
    """Moran-Downton bivariate exponential; marginals are exactly Exp(1)."""

    def marginal(self, indices):
        if indices in ((0,), (1,)):
            return exponential(1.0)
        raise MissingMarginal(f"moran-downton: no marginal {indices}")

    def closed_ls(self, s):
        r = self.params["r"]
        return 1.0 / ((1.0 + s[0]) * (1.0 + s[1]) - r * s[0] * s[1]), 0.0


def moran_downton(r: float) -> GammaSeries2D:
    if not 0 <= r < 1:
        raise ParameterOutOfRange("moran-downton: r must lie in [0, 1)")
    r = float(r)
    c = 1.0 / (1.0 - r)
    if r == 0.0:
        n_terms, tail = 1, 0.0
    else:
        n_terms = max(2, int(math.ceil(math.log(1e-14) / math.log(r))) + 1)
        tail = _geometric_tail((1.0 - r) * r**n_terms, r)
        if n_terms > 4000 or tail > 1e-10:
            raise ParameterOutOfRange(
                "moran-downton: r too close to 1 for the series truncation bound"
            )
    k = np.arange(n_terms)
    coeffs = (1.0 - r) * r**k
    shapes = (k + 1).astype(float)
    return _MoranDowntonJoint(
        coeffs, shapes, shapes, c, c, tail, "moran-downton", {"r": r}
    )


class _BivariateGammaJoint(GammaSeries2D):
    """Standard bivariate Gamma; marginals are Gamma(rate 1-r, shape q)."""

    def marginal(self, indices):
        if indices in ((0,), (1,)):
            return gamma_dist(1.0 - self.params["r"], self.params["q"])
        raise MissingMarginal(f"bivariate-gamma: no marginal {indices}")

    def closed_ls(self, s):
        r, q = self.params["r"], self.params["q"]
        return ((1.0 - r) / ((1.0 + s[0]) * (1.0 + s[1]) - r)) ** q, 0.0


def bivariate_gamma(r: float, q: float) -> GammaSeries2D:
    if not 0 <= r < 1:
        raise ParameterOutOfRange("bivariate-gamma: r must lie in [0, 1)")
    if q <= 0:
        raise ParameterOutOfRange("bivariate-gamma: q must be > 0")
    r, q = float(r), float(q)
    coeffs = [(1.0 - r) ** q]
    n = 0
    while coeffs[-1] > 1e-15 or n < 2:
        coeffs.append(coeffs[-1] * r * (q + n) / (n + 1.0))
        n += 1
        if n > 4000:
            break
    ratio_sup = r * max(1.0, (q + n) / (n + 1.0))
    tail = _geometric_tail(coeffs[-1], ratio_sup) if r > 0 else 0.0
    if tail > 1e-10:
        raise ParameterOutOfRange(
            "bivariate-gamma: r too close to 1 for the series truncation bound"
        )
    coeffs = np.asarray(coeffs[:-1] if r > 0 else coeffs[:1])
    shapes = q + np.arange(len(coeffs), dtype=float)
    return _BivariateGammaJoint(
        coeffs, shapes, shapes, 1.0, 1.0, tail, "bivariate-gamma", {"r": r, "q": q}
    )


class TriGammaJoint(JointDist):
    """Trivariate Gamma family: a double series of Gamma product terms."""

    kind = "trivariate-gamma"
    dim = 3

    def __init__(self, alpha: float, a: float, b: float, n_max: int = 60):
        if alpha <= 0 or a <= 0 or b <= 0:
            raise ParameterOutOfRange("trivariate-gamma: alpha, a, b must be > 0")
        if a * a + b * b >= 1:
            raise ParameterOutOfRange("trivariate-gamma: need a^2 + b^2 < 1")
        self.alpha, self.a, self.b = float(alpha), float(a), float(b)
        u, v = a * a, b * b
        pref = (1.0 - u - v) ** alpha
        rows = []
        row_total = pref  # n = 0 row
        n = 0
        while n <= n_max:
            # binomial split of row_total over ell: C(n,l) u^l v^(n-l) / (u+v)^n
            ell = np.arange(n + 1)
            logw = (
                gammaln(n + 1)
                - gammaln(ell + 1)
                - gammaln(n - ell + 1)
                + ell * math.log(u)
                + (n - ell) * math.log(v)
            )
            rows.append(row_total / (u + v) ** n * np.exp(logw))
            row_total *= (n + alpha) / (n + 1.0) * (u + v)
            if row_total < 1e-14 and n >= 2:
                n += 1
                break
            n += 1
        ratio_sup = (u + v) * max(1.0, (n + alpha) / (n + 1.0))
        tail = _geometric_tail(row_total, ratio_sup)
        if tail > 1e-10:
            raise ParameterOutOfRange(
                "trivariate-gamma: series tail bound exceeds 1e-10 at the "
                f"truncation order {n_max}; a^2+b^2 = {u + v:.4g} is too large"
            )
        self.rows = rows           # rows[n][ell] = coefficient c_{n, ell}
        self.series_tail = tail
        self.params = {"alpha": self.alpha, "a": self.a, "b": self.b}

    def _tables(self, x, upper=False):
        fn = gammaincc if upper else gammainc
        n_rows = len(self.rows)
        x = np.asarray(x, dtype=float)
        return np.stack([fn(self.alpha + k, x) for k in range(n_rows)])

    def _combine(self, x, y, z, upper):
        x, y, z = np.broadcast_arrays(
            np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
        )
        px = self._tables(x, upper)
        py = self._tables(y, upper)
        pz = self._tables(z, upper)
        out = np.zeros(x.shape)
        for n, row in enumerate(self.rows):
            inner = np.zeros(x.shape)
            for ell, cnl in enumerate(row):
                inner += cnl * px[ell] * pz[n - ell]
            out += inner * py[n]
        return float(out) if out.ndim == 0 else out

    def cdf(self, x, y, z):
        return self._combine(x, y, z, upper=False)

    def survival(self, x, y, z):
        return self._combine(x, y, z, upper=True)

    def _tensor(self, nodes, upper):
        px = self._tables(nodes[0], upper)  # (K, nx)
        py = self._tables(nodes[1], upper)
        pz = self._tables(nodes[2], upper)
        nx, ny, nz = px.shape[1], py.shape[1], pz.shape[1]
        out = np.zeros((nx, ny, nz))
        for n, row in enumerate(self.rows):
            w = row[:, None] * px[: n + 1]          # (n+1, nx)
            inner = w.T @ pz[n::-1]                 # (nx, nz); pz rows n-ell
            out += inner[:, None, :] * py[n][None, :, None]
        return out

    def cdf_tensor(self, nodes):
        return self._tensor(nodes, upper=False)

    def survival_tensor(self, nodes):
        return self._tensor(nodes, upper=True)

    def marginal(self, indices):
        K = len(self.rows)
        if len(indices) == 1:
            w = np.zeros(K)
            for n, row in enumerate(self.rows):
                if indices == (0,):
                    w[: n + 1] += row
                elif indices == (1,):
                    w[n] += row.sum()
                elif indices == (2,):
                    w[: n + 1] += row[::-1]
                else:
                    raise MissingMarginal(f"trivariate-gamma: no marginal {indices}")
            w[np.argmax(w)] += max(0.0, 1.0 - w.sum())
            comps = [
                (wi / w.sum(), gamma_dist(1.0, self.alpha + k))
                for k, wi in enumerate(w)
                if wi > 0
            ]
            return mixture(comps)
        if len(indices) == 2:
            coeffs, sx, sy = [], [], []
            for n, row in enumerate(self.rows):
                for ell, cnl in enumerate(row):
                    coeffs.append(cnl)
                    if indices == (0, 1):
                        sx.append(self.alpha + ell)
                        sy.append(self.alpha + n)
                    elif indices == (0, 2):
                        sx.append(self.alpha + ell)
                        sy.append(self.alpha + n - ell)
                    elif indices == (1, 2):
                        sx.append(self.alpha + n)
                        sy.append(self.alpha + n - ell)
                    else:
                        raise MissingMarginal(
                            f"trivariate-gamma: no marginal {indices}"
                        )
            return GammaSeries2D(
                coeffs, sx, sy, 1.0, 1.0, self.series_tail,
                f"trivariate-gamma-marginal-{indices}", None,
            )
        raise MissingMarginal(f"trivariate-gamma: no marginal {indices}")

    def closed_ls(self, s):
        si, ti, ui = (float(v) for v in s)
        fx = 1.0 / (1.0 + si)
        fy = 1.0 / (1.0 + ti)
        fz = 1.0 / (1.0 + ui)
        total = 0.0
        for n, row in enumerate(self.rows):
            ell = np.arange(n + 1)
            total += fy ** (self.alpha + n) * float(
                np.sum(row * fx ** (self.alpha + ell) * fz ** (self.alpha + n - ell))
            )
        return total, self.series_tail


# ---------------------------------------------------------------------------
# Inclusion-exclusion


def inclusion_exclusion_survival(joint: JointDist, x: Sequence[float]) -> float:
    """Joint survival from the CDF and all lower-order marginal CDFs.

    Alternating sum over marginal orders; needs every marginal evaluator.
    """
    if len(x) != joint.dim:
        raise ParameterOutOfRange(
            f"point has dimension {len(x)}, distribution has {joint.dim}"
        )
    n = joint.dim
    total = 1.0
    for k in range(1, n + 1):
        for subset in itertools.combinations(range(n), k):
            if k == n:
                h = joint.cdf(*x)
            else:
                marg = joint.marginal(subset)
                pts = [x[i] for i in subset]
                h = marg.cdf(*pts) if k > 1 else marg.cdf(pts[0])
            total += (-1.0) ** k * float(h)
    return total


# ---------------------------------------------------------------------------
# Catalog

_CATALOG: dict[str, dict] = {}


def _register(name, param_names, constraints, builder):
    _CATALOG[name] = {
        "params": param_names,
        "constraints": constraints,
        "builder": builder,
    }


_register("exponential", ["lambda"], "lambda > 0",
          lambda p: exponential(p["lambda"]))
_register("gamma", ["lambda", "q"], "lambda > 0, q > 0",
          lambda p: gamma_dist(p["lambda"], p["q"]))
_register("positive-stable", ["alpha"], "0 < alpha < 1",
          lambda p: positive_stable(p["alpha"]))
_register("point-mass", ["location"], "location >= 0",
          lambda p: point_mass(p["location"]))
_register("marshall-olkin", ["lambda1", "lambda2", "lambda12"],
          "all rates > 0",
          lambda p: MarshallOlkinJoint(p["lambda1"], p["lambda2"], p["lambda12"]))
_register("freund", ["alpha", "alpha_prime", "beta", "beta_prime"],
          "all four rates > 0",
          lambda p: FreundJoint(p["alpha"], p["alpha_prime"], p["beta"], p["beta_prime"]))
_register("moran-downton", ["r"], "0 <= r < 1",
          lambda p: moran_downton(p["r"]))
_register("bivariate-gamma", ["r", "q"], "0 <= r < 1, q > 0",
          lambda p: bivariate_gamma(p["r"], p["q"]))
_register("trivariate-gamma", ["alpha", "a", "b"],
          "alpha, a, b > 0 and a^2 + b^2 < 1",
          lambda p: TriGammaJoint(p["alpha"], p["a"], p["b"]))
_register("blm", ["theta", "f_lambda", "g_lambda"],
          "theta > 0 and (f_lambda + g_lambda)/theta - 1 in [0, 1]",
          lambda p: BlmJoint(BlmSpec(exponential(p["f_lambda"]),
                                     exponential(p["g_lambda"]), p["theta"])))


def _product_exponential(p: dict):
    rates = [p[k] for k in sorted(p) if k.startswith("lambda")]
    if not 2 <= len(rates) <= 4:
        raise ParameterOutOfRange(
            "product-exponential: needs lambda1..lambdaN with N in {2, 3, 4}"
        )
    return ProductJoint([exponential(r) for r in rates])


_register("product-exponential", ["lambda1", "lambda2", "[lambda3]", "[lambda4]"],
          "2 to 4 positive rates", _product_exponential)


def catalog_names() -> list[str]:
    return sorted(_CATALOG)


def catalog_info(name: str) -> dict:
    if name not in _CATALOG:
        raise UnknownCatalogName(f"unknown catalog entry {name!r}")
    entry = _CATALOG[name]
    return {"params": list(entry["params"]), "constraints": entry["constraints"]}


def make_catalog(name: str, params: dict):
    """Build a catalog distribution by name; raises UnknownCatalogName /
    ParameterOutOfRange with the violated constraint in the message."""
    key = str(name).lower()
    if key not in _CATALOG:
        raise UnknownCatalogName(f"unknown catalog entry {name!r}")
    entry = _CATALOG[key]
    if key != "product-exponential":
        missing = [p for p in entry["params"] if p not in params]
        if missing:
            raise ParameterOutOfRange(f"{key}: missing parameter(s) {missing}")
        extra = [p for p in params if p not in entry["params"]]
        if extra:
            raise ParameterOutOfRange(f"{key}: unknown parameter(s) {extra}")
    return entry["builder"]({k: float(v) for k, v in params.items()})
