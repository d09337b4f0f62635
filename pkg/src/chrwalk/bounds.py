"""Closed-form bound calculators for the coordinate walk's mixing analysis.

Every universal constant that the underlying analysis leaves unspecified is a
configuration field defaulting to 1; outputs are shape-only until a caller
pins the constants.  The calculators compose: the s-conductance lower bound
for the coordinate walk factors exactly into the multi-step flow comparison,
the single-step flow comparison, and the Gaussian-iterate flow coefficient
(see :func:`composed_conductance_coefficient`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class BoundParams:
    """Inputs shared by the bound calculators.

    ``eps_regime(sigma)`` returns the robust-interior margin ``100 n sigma ln n``
    used when converting the overlap property into a flow bound; the Gaussian
    walk's deviation must be small enough to keep it below 1/2.
    """

    n: int
    R: float = 1.0
    M: float = 1.0
    eps: float = 0.25
    s: float = 0.125
    sigma: float = 1e-3
    C_main: float = 1.0
    c_cond: float = 1.0
    c_flow: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension n must be at least 2")
        if self.R < 1:
            raise ValueError("outer radius R must be at least 1")
        if self.M < 1:
            raise ValueError("warmness M must be at least 1")
        if not 0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 1/2)")
        if not 0 < self.s < 0.5:
            raise ValueError("s must lie in (0, 1/2)")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def eps_regime(self, sigma: float | None = None) -> float:
        sig = self.sigma if sigma is None else sigma
        return 100.0 * self.n * sig * math.log(self.n)


OVERLAP_EPS_COEFF = 100.0   # robust-interior margin coefficient
FLOW_COEFF_PROOF = 1.0 / 32.0   # Gaussian-iterate flow coefficient as instantiated
TAU_COEFF = 20.0            # iterate count coefficient: tau = ceil(20 n ln n)


def mixing_step_bound(params: BoundParams) -> int:
    """Steps after which the coordinate walk is within eps of uniform, from an
    M-warm start: ``ceil(C M^4 R^4 n^7 ln^6 n ln(2M/eps) / eps^4)``.

    Shape-only unless ``C_main`` is pinned; the analysis proves existence of
    the constant, not its value.
    """
    p = params
    value = (p.C_main * p.M ** 4 * p.R ** 4 * float(p.n) ** 7
             * math.log(p.n) ** 6 * math.log(2.0 * p.M / p.eps) / p.eps ** 4)
    return math.ceil(value)


def tv_bound_from_conductance(h_s: float, phi_s: float, s: float, k: int) -> float:
    """TV upper bound ``(1 + (1 - phi_s^2/2)^k / s) * h_s`` after k steps.

    ``h_s`` is the warm-start discrepancy at level s and ``phi_s`` the
    s-conductance of the scheme.
    """
    if h_s < 0:
        raise ValueError("h_s must be non-negative")
    if not 0 <= phi_s <= 1:
        raise ValueError("phi_s must lie in [0, 1]")
    if not 0 < s < 0.5:
        raise ValueError("s must lie in (0, 1/2)")
    if k < 0:
        raise ValueError("k must be non-negative")
    return (1.0 + (1.0 - phi_s ** 2 / 2.0) ** k / s) * h_s


def chr_conductance_lower_bound(s: float, R: float, n: int, c_cond: float = 1.0) -> float:
    """Lower bound ``c s^2 / (R^2 n^{3.5} ln^3 n)`` on the coordinate walk's
    s-conductance."""
    if not 0 < s < 0.5:
        raise ValueError("s must lie in (0, 1/2)")
    if R < 1 or n < 2:
        raise ValueError("need R >= 1 and n >= 2")
    return c_cond * s * s / (R * R * float(n) ** 3.5 * math.log(n) ** 3)


def chr_gaussian_flow_factor(sigma: float, R: float) -> float:
    """Factor ``sigma sqrt(pi) / (R sqrt(2))`` by which one-step coordinate-walk
    flow dominates one-step Gaussian-walk flow.

    Equals ``sqrt(2 pi) sigma / (2R)``, the pointwise floor of the density
    ratio between the two transition kernels off the current point.
    """
    if sigma <= 0 or R < 1:
        raise ValueError("need sigma > 0 and R >= 1")
    return sigma * math.sqrt(math.pi) / (R * math.sqrt(2.0))


def multi_step_flow_factor(tau: int) -> float:
    """Factor 1/tau relating single-step flow to tau-step flow of the same scheme."""
    if tau < 1:
        raise ValueError("tau must be at least 1")
    return 1.0 / tau


def gaussian_iterate_flow_bound(sigma: float, R: float, n: int, eps: float,
                                measure_s: float, measure_complement: float,
                                c_flow: float = 1.0) -> float:
    """Flow lower bound ``(c sigma / (R sqrt n)) (min(measures) - eps)`` for the
    tau-step Gaussian walk across a partition, clamped below at zero.

    ``eps`` is the robust-interior margin ``100 n sigma ln n``; the bound only
    applies while it is below 1/2, and a violation raises rather than clamps.
    """
    if sigma <= 0 or R < 1 or n < 2:
        raise ValueError("need sigma > 0, R >= 1, n >= 2")
    if eps >= 0.5:
        raise ValueError(f"regime violation: margin eps = {eps} is not below 1/2")
    for m in (measure_s, measure_complement):
        if not 0 <= m <= 1:
            raise ValueError("measures must lie in [0, 1]")
    if abs(measure_s + measure_complement - 1.0) > 1e-9:
        raise ValueError("partition measures must sum to 1")
    val = (c_flow * sigma / (R * math.sqrt(n))) * (min(measure_s, measure_complement) - eps)
    return max(val, 0.0)


def composed_conductance_coefficient(c_flow: float = FLOW_COEFF_PROOF,
                                     eps_coeff: float = OVERLAP_EPS_COEFF,
                                     tau_coeff: float = TAU_COEFF) -> float:
    """The constant that makes :func:`chr_conductance_lower_bound` equal the
    product of its three ingredient factors.

    With ``sigma = s / (eps_coeff n ln n)`` and (un-ceiled) ``tau = tau_coeff n ln n``,

        (1/tau) * chr_gaussian_flow_factor(sigma, R) * c_flow sigma / (R sqrt n)
            = [c_flow sqrt(pi/2) / (tau_coeff eps_coeff^2)] * s^2 / (R^2 n^3.5 ln^3 n),

    so the composed coefficient is ``c_flow sqrt(pi/2) / (tau_coeff eps_coeff^2)``.
    """
    return c_flow * math.sqrt(math.pi / 2.0) / (tau_coeff * eps_coeff ** 2)


@dataclass(frozen=True)
class BoundTableRow:
    label: str
    value: float
    note: str = ""


def bound_table(params: BoundParams) -> list[BoundTableRow]:
    """Every calculator evaluated at one parameter set, for reports and the CLI."""
    p = params
    tau = math.ceil(TAU_COEFF * p.n * math.log(p.n))
    sigma_from_s = p.s / (OVERLAP_EPS_COEFF * p.n * math.log(p.n))
    rows = [
        BoundTableRow("mixing-steps", float(mixing_step_bound(p)),
                      f"C_main={p.C_main} (shape-only unless pinned)"),
        BoundTableRow("s-conductance-lower", chr_conductance_lower_bound(p.s, p.R, p.n, p.c_cond),
                      f"s={p.s} c_cond={p.c_cond}"),
        BoundTableRow("flow-factor-one-step", chr_gaussian_flow_factor(p.sigma, p.R),
                      f"sigma={p.sigma}"),
        BoundTableRow("flow-factor-multi-step", multi_step_flow_factor(tau),
                      f"tau={tau}"),
        BoundTableRow("overlap-margin", p.eps_regime(),
                      "100 n sigma ln n; bound regime needs < 1/2"),
        BoundTableRow("sigma-from-s", sigma_from_s,
                      "deviation that makes the overlap margin equal s"),
        BoundTableRow("tv-after-k", tv_bound_from_conductance(
            p.M * p.s, chr_conductance_lower_bound(p.s, p.R, p.n, p.c_cond), p.s,
            mixing_step_bound(p)),
            "warm-start discrepancy M*s at the mixing-steps count"),
    ]
    return rows
