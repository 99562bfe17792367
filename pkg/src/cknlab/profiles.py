"""Barenblatt-type profiles, weighted norms, energies and optimality residuals.

Profiles come in two flavors.  ``AnalyticProfile`` wraps a closed-form radial
function together with exact derivatives; ``RadialProfile`` stores sampled
values on a graded grid with optional derivative data and an asserted tail
decay power.  Norms of analytic profiles go through the tanh-sinh quadrature
(no truncation); norms of grid profiles use the trapezoid rule plus power-law
head and tail corrections controlled by the tail exponent.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
import numpy as np

from . import quadrature as quad
from .errors import DivergentNorm, ZeroDenominator
from .params import ProblemParams, derive

__all__ = [
    "RadialProfile",
    "AnalyticProfile",
    "default_grid",
    "w_star",
    "w_gamma_star",
    "barenblatt_mass",
    "dilate_to_mass",
    "weighted_norm",
    "gradient_norm",
    "quotient",
    "energy",
    "el_residual",
]


def default_grid(r_min: float = 1e-4, r_max: float = 1e4,
                 points_per_decade: int = 64) -> np.ndarray:
    """Geometric grid resolving both the origin weight and the algebraic tail."""
    decades = math.log10(r_max / r_min)
    n = max(2, int(round(decades * points_per_decade)) + 1)
    return np.geomspace(r_min, r_max, n)


@dataclass
class RadialProfile:
    """A radial function sampled on a strictly increasing positive grid.

    tail_exponent, when set, asserts that values decay like r^(-tail_exponent)
    and enables the analytic tail corrections in norm computations.
    """

    radii: np.ndarray
    values: np.ndarray
    tail_exponent: float | None = None
    derivs: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.derivs is not None:
            self.derivs = np.asarray(self.derivs, dtype=float)
        if self.radii.ndim != 1 or self.radii.size < 2:
            raise ValueError("radii must be a 1-D grid with at least two points")
        if self.radii[0] <= 0 or np.any(np.diff(self.radii) <= 0):
            raise ValueError("radii must be strictly increasing and positive")
        if self.values.shape != self.radii.shape:
            raise ValueError("values must match radii in shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    # -- tail fit -------------------------------------------------------------

    def tail_slope_ok(self, rel_window: float = 100.0, max_rel_err: float = 0.05) -> bool:
        """Check the asserted decay power against a log-log fit of the tail."""
        if self.tail_exponent is None:
            return True
        r, v = self.radii, self.values
        mask = (r >= r[-1] / rel_window) & (v > 0)
        if mask.sum() < 4:
            return False
        slope = np.polyfit(np.log(r[mask]), np.log(v[mask]), 1)[0]
        return abs(-slope - self.tail_exponent) <= max_rel_err * abs(self.tail_exponent)

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "schema": "cknlab/profile/1",
            "radii": self.radii.tolist(),
            "values": self.values.tolist(),
            "tail_exponent": self.tail_exponent,
            "derivs": None if self.derivs is None else self.derivs.tolist(),
            "meta": self.meta,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RadialProfile":
        obj = json.loads(text)
        return cls(
            radii=np.array(obj["radii"], dtype=float),
            values=np.array(obj["values"], dtype=float),
            tail_exponent=obj.get("tail_exponent"),
            derivs=None if obj.get("derivs") is None
            else np.array(obj["derivs"], dtype=float),
            meta=obj.get("meta", {}),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        if self.derivs is None:
            writer.writerow(["r", "w"])
            for r, w in zip(self.radii, self.values):
                writer.writerow([repr(float(r)), repr(float(w))])
        else:
            writer.writerow(["r", "w", "dw"])
            for r, w, dw in zip(self.radii, self.values, self.derivs):
                writer.writerow([repr(float(r)), repr(float(w)), repr(float(dw))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RadialProfile":
        rows = list(csv.reader(io.StringIO(text)))
        header, data = rows[0], rows[1:]
        cols = np.array([[float(x) for x in row] for row in data])
        derivs = cols[:, 2] if len(header) > 2 else None
        return cls(radii=cols[:, 0], values=cols[:, 1], derivs=derivs)


class AnalyticProfile:
    """Closed-form radial profile with exact first and second derivatives.

    Represents w(r) = amplitude * (b + r^c)^(-k); both Barenblatt families and
    their dilates take this form.
    """

    def __init__(self, amplitude: float, b: float, c: float, k: float):
        self.amplitude = float(amplitude)
        self.b = float(b)
        self.c = float(c)
        self.k = float(k)
        # decay power of w itself: r^(-c k)
        self.tail_exponent = c * k

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore", under="ignore"):
            return self.amplitude * (self.b + r**self.c) ** (-self.k)

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore", under="ignore"):
            s = r**self.c
            return (-self.amplitude * self.k * self.c) * r ** (self.c - 1.0) \
                * (self.b + s) ** (-self.k - 1.0)

    def second_deriv(self, r):
        r = np.asarray(r, dtype=float)
        a, b, c, k = self.amplitude, self.b, self.c, self.k
        with np.errstate(over="ignore", under="ignore"):
            s = r**c
            base = (b + s) ** (-k - 2.0)
            t_sq = (k + 1.0) * (c * r ** (c - 1.0)) ** 2
            t_curv = (b + s) * c * (c - 1.0) * r ** (c - 2.0)
            return a * k * base * (t_sq - t_curv)

    def sample(self, radii: np.ndarray | None = None,
               with_derivs: bool = True) -> RadialProfile:
        radii = default_grid() if radii is None else np.asarray(radii, dtype=float)
        return RadialProfile(
            radii=radii,
            values=self(radii),
            tail_exponent=self.tail_exponent,
            derivs=self.deriv(radii) if with_derivs else None,
            meta={"derivatives": "analytic" if with_derivs else "absent"},
        )

    def scaled(self, amp_factor: float, dilation: float) -> "AnalyticProfile":
        """Profile amp_factor * w(dilation * r), still in closed form.

        amp (b + (lam r)^c)^(-k) = amp lam^(-c k) (b lam^(-c) + r^c)^(-k).
        """
        lam = dilation
        return AnalyticProfile(
            amplitude=amp_factor * self.amplitude * lam ** (-self.c * self.k),
            b=self.b * lam ** (-self.c),
            c=self.c,
            k=self.k,
        )


def w_star(params: ProblemParams) -> AnalyticProfile:
    """Unit-coefficient optimizer (1 + r^(2-gamma))^(-1/(p-1))."""
    return AnalyticProfile(amplitude=1.0, b=1.0, c=2.0 - params.gamma,
                           k=1.0 / (params.p - 1.0))


def w_gamma_star(params: ProblemParams) -> AnalyticProfile:
    """Normalized optimizer (a/(b + r^(2-gamma)))^(1/(p-1)).

    Solves the unit-multiplier Euler-Lagrange equation exactly; its peak value
    is (a/b)^(1/(p-1)) = (p (2-gamma)/eta)^(1/(p-1)).
    """
    ex = derive(params)
    k = 1.0 / (params.p - 1.0)
    return AnalyticProfile(amplitude=ex.a_gamma**k, b=ex.b_gamma,
                           c=2.0 - params.gamma, k=k)


def barenblatt_mass(params: ProblemParams) -> float:
    """Closed form of the weighted L^(2p) mass of the normalized optimizer."""
    ex = derive(params)
    prof = w_gamma_star(params)
    q = 2.0 * params.p
    integral = quad.power_law_weighted_integral(
        params.d - params.gamma, prof.b, prof.c, q * prof.k)
    return ex.sphere_area * prof.amplitude**q * integral


def dilate_to_mass(params: ProblemParams, mass: float) -> AnalyticProfile:
    """Member of the constrained-minimizer family with prescribed mass.

    The family alpha * w_gamma_star(alpha^((p-1)/(2-gamma)) x) consists of all
    radial solutions of the constrained problem; its weighted L^(2p) mass is a
    pure power of alpha, so the matching alpha is explicit.
    """
    d, g, p = params.d, params.gamma, params.p
    base = w_gamma_star(params)
    m_base = barenblatt_mass(params)
    expo = 2.0 * p - (p - 1.0) * (d - g) / (2.0 - g)
    alpha = (mass / m_base) ** (1.0 / expo)
    lam = alpha ** ((p - 1.0) / (2.0 - g))
    return base.scaled(alpha, lam)


def _grid_weighted_integral(prof: RadialProfile, integrand: np.ndarray,
                            weight_exp: float, decay_exp: float | None) -> float:
    """Simpson rule in log radius with power-law head/tail closure.

    integrand must already be sampled on prof.radii; decay_exp is the decay
    power of the integrand itself (used for the tail correction), or None to
    skip the tail model.  Integration in the log variable suits the graded
    grids these profiles live on.
    """
    from scipy.integrate import simpson

    r = prof.radii
    y = integrand * r**weight_exp
    total = float(simpson(y * r, x=np.log(r)))
    # head: integrand roughly constant below r_min
    total += integrand[0] * r[0] ** (weight_exp + 1.0) / (weight_exp + 1.0)
    # tail: integrand ~ C r^(-decay_exp) beyond r_max
    if decay_exp is not None:
        expo = weight_exp - decay_exp
        if expo >= -1.0:
            raise DivergentNorm(
                f"tail decay r^-{decay_exp} too slow against weight r^{weight_exp}"
            )
        C = integrand[-1] * r[-1] ** decay_exp
        total += C * r[-1] ** (expo + 1.0) / (-(expo + 1.0))
    return total


def weighted_norm(w, q: float, gamma: float, params: ProblemParams,
                  scheme: quad.RadialQuadrature | None = None) -> float:
    """Weighted Lebesgue norm (|S^(d-1)| int |w|^q r^(d-1-gamma) dr)^(1/q)."""
    if q < 1:
        raise ValueError(f"norm exponent must satisfy q >= 1, got {q}")
    d = params.d
    area = quad.sphere_area(d)
    if isinstance(w, AnalyticProfile):
        if w.tail_exponent * q <= d - gamma:
            raise DivergentNorm(
                f"q * tail_exponent = {q * w.tail_exponent} must exceed "
                f"d - gamma = {d - gamma}"
            )
        integral = quad.integrate(lambda r: np.abs(w(r)) ** q, d, gamma, scheme)
    elif isinstance(w, RadialProfile):
        decay = None if w.tail_exponent is None else q * w.tail_exponent
        if decay is not None and decay <= d - gamma:
            raise DivergentNorm(
                f"q * tail_exponent = {decay} must exceed d - gamma = {d - gamma}"
            )
        integral = _grid_weighted_integral(
            w, np.abs(w.values) ** q, d - 1.0 - gamma, decay)
    else:  # bare callable: trust integrability, let the quadrature complain
        integral = quad.integrate(lambda r: np.abs(w(r)) ** q, d, gamma, scheme)
    return (area * integral) ** (1.0 / q)


def _grid_derivative(prof: RadialProfile) -> np.ndarray:
    """Centered differences on the (non-uniform) grid, one-sided at the ends."""
    r, v = prof.radii, prof.values
    dv = np.empty_like(v)
    dv[1:-1] = (v[2:] - v[:-2]) / (r[2:] - r[:-2])
    dv[0] = (v[1] - v[0]) / (r[1] - r[0])
    dv[-1] = (v[-1] - v[-2]) / (r[-1] - r[-2])
    return dv


def gradient_norm(w, params: ProblemParams,
                  scheme: quad.RadialQuadrature | None = None) -> float:
    """Unweighted gradient norm (|S^(d-1)| int w'(r)^2 r^(d-1) dr)^(1/2)."""
    d = params.d
    area = quad.sphere_area(d)
    if isinstance(w, AnalyticProfile):
        integral = quad.integrate(lambda r: w.deriv(r) ** 2, d, 0.0, scheme)
        return math.sqrt(area * integral)
    if not isinstance(w, RadialProfile):
        raise TypeError("gradient_norm expects an AnalyticProfile or RadialProfile")
    if w.derivs is not None:
        dv = w.derivs
        flagged = w.meta.get("derivatives", "provided")
    else:
        dv = _grid_derivative(w)
        flagged = "finite_difference"
    decay = None if w.tail_exponent is None else 2.0 * (w.tail_exponent + 1.0)
    if decay is not None and decay <= d:
        raise DivergentNorm("derivative tail decays too slowly for the gradient norm")
    prof = RadialProfile(radii=w.radii, values=np.abs(dv),
                         meta={"derivatives": flagged})
    integral = _grid_weighted_integral(prof, dv**2, d - 1.0, decay)
    return math.sqrt(area * integral)


def quotient(w, params: ProblemParams,
             scheme: quad.RadialQuadrature | None = None) -> float:
    """Scale- and dilation-invariant quotient whose infimum is 1/C."""
    ex = derive(params)
    p, g = params.p, params.gamma
    n2p = weighted_norm(w, 2 * p, g, params, scheme)
    if n2p == 0.0:
        raise ZeroDenominator("profile has vanishing weighted L^(2p) norm")
    grad = gradient_norm(w, params, scheme)
    np1 = weighted_norm(w, p + 1, g, params, scheme)
    return grad**ex.vartheta * np1 ** (1.0 - ex.vartheta) / n2p


def energy(w, params: ProblemParams, J: float,
           scheme: quad.RadialQuadrature | None = None) -> tuple[float, float]:
    """Energy pair (E, G) of the non-scale-invariant formulation.

    G = 0.5 |grad w|_2^2 + (p+1)^(-1) |w|_(p+1,gamma)^(p+1) and
    E = G - J |w|_(2p,gamma)^(2 p theta).  E is nonnegative only when J is the
    optimal constant; for other J the sign carries no meaning.
    """
    ex = derive(params)
    p, g = params.p, params.gamma
    grad = gradient_norm(w, params, scheme)
    np1 = weighted_norm(w, p + 1, g, params, scheme)
    n2p = weighted_norm(w, 2 * p, g, params, scheme)
    G = 0.5 * grad**2 + np1 ** (p + 1) / (p + 1)
    E = G - J * n2p ** (2.0 * p * ex.theta_gamma)
    return E, G


def el_residual(w, params: ProblemParams,
                radii: np.ndarray | None = None) -> float:
    """Sup-norm optimality residual of the unit-multiplier equation.

    Evaluates -w'' - (d-1)/r w' + r^(-gamma) (w^p - w^(2p-1)) on interior grid
    points and normalizes pointwise by the largest of the three term
    magnitudes, so that the residual is meaningful across many decades.
    """
    d, g, p = params.d, params.gamma, params.p
    if isinstance(w, AnalyticProfile):
        r = default_grid() if radii is None else np.asarray(radii, dtype=float)
        v, dv, ddv = w(r), w.deriv(r), w.second_deriv(r)
    elif isinstance(w, RadialProfile):
        r = w.radii
        v = w.values
        dv = w.derivs if w.derivs is not None else _grid_derivative(w)
        dprof = RadialProfile(radii=r, values=dv)
        ddv = _grid_derivative(dprof)
        # one-sided stencils at the ends feed the neighboring centered ones,
        # so a two-point margin is dropped on each side
        r, v, dv, ddv = r[2:-2], v[2:-2], dv[2:-2], ddv[2:-2]
    else:
        raise TypeError("el_residual expects an AnalyticProfile or RadialProfile")
    t_lap = -ddv
    t_drift = -(d - 1.0) / r * dv
    t_nonlin = r ** (-g) * (v**p - v ** (2 * p - 1))
    res = np.abs(t_lap + t_drift + t_nonlin)
    scale = np.maximum.reduce([np.abs(t_lap), np.abs(t_drift), np.abs(t_nonlin)])
    scale = np.maximum(scale, 1e-300)
    return float(np.max(res / scale))
