"""Singularity constants of the tree/forest composition and the asymptotic
laws they drive.

The generating function T(z) = C(z*D(z)) of rooted-tree counts inherits the
square-root singularity of the Cayley function C at argument value 1/e, so
the dominant singularity rho of T solves rho*D(rho) = 1/e. Everything here
is evaluated with mpmath at a configurable working precision from the exact
rational truncation of D; the truncation error decays like rho^(order/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from .errors import NonConvergenceError, UsageError
from .series import DEFAULT_ORDER, dforest_weights

DEFAULT_PRECISION = 50

_NEWTON_START = "0.3"
_MAX_NEWTON_STEPS = 200


@dataclass(frozen=True)
class SingularityConstants:
    """Numeric constants at the dominant singularity.

    rho        dominant singularity of T, root of rho*D(rho) = 1/e
    d_rho      D(rho)  (equals 1/(e*rho))
    d1_rho     D'(rho)
    b          amplitude of the square-root term of 1 - T near rho,
               b = sqrt(2e * (D(rho) + rho*D'(rho)))
    c          b^2/3
    c1         tail constant of the largest-forest law,
               b / (2*sqrt(pi) * (1 - sqrt(rho)) * (D(rho) + rho*D'(rho)))
    residual   |rho*D(rho) - 1/e| achieved by the Newton solve
    """

    rho: mpf
    d_rho: mpf
    d1_rho: mpf
    b: mpf
    c: mpf
    c1: mpf
    residual: mpf
    order: int
    precision: int

    def as_strings(self, digits: int | None = None) -> dict[str, str]:
        d = digits or self.precision
        return {
            "rho": mpmath.nstr(self.rho, d),
            "d_rho": mpmath.nstr(self.d_rho, d),
            "d1_rho": mpmath.nstr(self.d1_rho, d),
            "b": mpmath.nstr(self.b, d),
            "c": mpmath.nstr(self.c, d),
            "c1": mpmath.nstr(self.c1, d),
            "residual": mpmath.nstr(self.residual, 5),
            "order": str(self.order),
            "precision": str(self.precision),
        }


def _poly_eval(coeffs: list[mpf], z: mpf) -> mpf:
    acc = mpf(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _to_mpf(q: Fraction) -> mpf:
    return mpf(q.numerator) / mpf(q.denominator)


def compute_constants(
    order: int = DEFAULT_ORDER,
    precision: int = DEFAULT_PRECISION,
    max_steps: int = _MAX_NEWTON_STEPS,
) -> SingularityConstants:
    """Solve rho*D_order(rho) = exp(-1) by Newton iteration from 0.3 and
    derive the dependent constants. Raises NonConvergenceError if the step
    size fails to reach the requested precision within max_steps."""
    if order < 8:
        raise UsageError("need series order >= 8 for a meaningful solve")
    if precision < 10:
        raise UsageError("precision below 10 digits is not supported")
    d_exact = dforest_weights(order)
    with mpmath.workdps(precision + 15):
        d = [_to_mpf(q) for q in d_exact]
        d1 = [k * d[k] for k in range(1, order + 1)]
        target = mpmath.exp(-1)
        z = mpf(_NEWTON_START)
        tol = mpf(10) ** (-(precision + 5))
        for _ in range(max_steps):
            dz_val = _poly_eval(d, z)
            deriv = dz_val + z * _poly_eval(d1, z)
            step = (z * dz_val - target) / deriv
            z = z - step
            if abs(step) < tol:
                break
        else:
            raise NonConvergenceError("Newton iteration for rho did not converge")
        rho = z
        d_rho = _poly_eval(d, rho)
        d1_rho = _poly_eval(d1, rho)
        residual = abs(rho * d_rho - target)
        slope = d_rho + rho * d1_rho  # derivative of z*D(z) at rho
        b = mpmath.sqrt(2 * mpmath.e * slope)
        c = b * b / 3
        c1 = b / (2 * mpmath.sqrt(mpmath.pi) * (1 - mpmath.sqrt(rho)) * slope)
        return SingularityConstants(
            rho=rho, d_rho=d_rho, d1_rho=d1_rho, b=b, c=c, c1=c1,
            residual=residual, order=order, precision=precision,
        )


def tn_asymptotic(n: int, k: SingularityConstants) -> mpf:
    """First-order approximation of the rooted-tree count t_n:
    (b*sqrt(rho) / (2*sqrt(pi))) * rho^(-n) * n^(-3/2)."""
    if n < 1:
        raise UsageError("n must be >= 1")
    with mpmath.workdps(k.precision + 15):
        amp = k.b * mpmath.sqrt(k.rho) / (2 * mpmath.sqrt(mpmath.pi))
        return amp * mpmath.power(k.rho, -n) * mpmath.power(n, mpf(-1.5))


@dataclass(frozen=True)
class MomentSummary:
    mean_c: mpf
    var_c: mpf
    mean_d: mpf
    var_d: mpf


def cn_moments(n: int, k: SingularityConstants) -> MomentSummary:
    """Leading-order mean and variance of the fixed-point count of a random
    size-n tree, plus the complementary moved-node count."""
    if n < 1:
        raise UsageError("n must be >= 1")
    with mpmath.workdps(k.precision + 15):
        b2rho = k.b * k.b * k.rho
        mean_c = 2 * n / b2rho
        var = mpf(11) * n / (12 * b2rho)
        mean_d = n * (1 - 2 / b2rho)
        return MomentSummary(mean_c=mean_c, var_c=var, mean_d=mean_d, var_d=var)


def forest_prob_asymptotic(m: int, k: SingularityConstants) -> mpf:
    """Limiting probability that the forest hanging at a random fixed point
    has size m: d_m * rho^m / D(rho)."""
    if m < 0:
        raise UsageError("m must be >= 0")
    d_exact = dforest_weights(m) if m >= 1 else [Fraction(1)]
    with mpmath.workdps(k.precision + 15):
        return _to_mpf(d_exact[m]) * mpmath.power(k.rho, m) / k.d_rho


def forest_pgf(u, k: SingularityConstants) -> mpf:
    """Probability generating function D(rho*u)/D(rho) of the limiting
    forest-size law, evaluated from the order-k.order truncation."""
    d_exact = dforest_weights(k.order)
    with mpmath.workdps(k.precision + 15):
        um = mpf(u) if not isinstance(u, Fraction) else _to_mpf(u)
        num = _poly_eval([_to_mpf(q) for q in d_exact], k.rho * um)
        return num / k.d_rho


def ln_tail_prob(n: int, m: int, k: SingularityConstants) -> mpf:
    """Asymptotic P(largest attached forest in a size-n tree is <= m):
    exp(-c1 * n * rho^(m/2) / m^(3/2))."""
    if n < 1 or m < 1:
        raise UsageError("need n >= 1 and m >= 1")
    with mpmath.workdps(k.precision + 15):
        lam = k.c1 * n * mpmath.power(k.rho, mpf(m) / 2) / mpmath.power(m, mpf(1.5))
        return mpmath.exp(-lam)


def ln_expectation(n: int, k: SingularityConstants) -> mpf:
    """Two-term growth of the expected largest forest size,
    -2*ln(n)/ln(rho) - 3*ln(ln(n))/ln(rho); the additive constant term is
    not included."""
    if n < 3:
        raise UsageError("n must be >= 3")
    with mpmath.workdps(k.precision + 15):
        lr = mpmath.log(k.rho)
        return -(2 * mpmath.log(n) + 3 * mpmath.log(mpmath.log(n))) / lr


def table1(max_m: int, k: SingularityConstants) -> list[tuple[int, mpf, mpf]]:
    """Rows (m, P[size == m], P[size >= m]) of the limiting forest-size law;
    the tail column comes from summing the point masses."""
    if max_m < 0:
        raise UsageError("max_m must be >= 0")
    rows = []
    with mpmath.workdps(k.precision + 15):
        cum = mpf(0)
        for m in range(max_m + 1):
            p = forest_prob_asymptotic(m, k)
            rows.append((m, p, 1 - cum))
            cum += p
    return rows
