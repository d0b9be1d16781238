"""Query-count bounds for simulating the controlled evolutions with
time-ordered Trotter-Suzuki formulas.

Only the arithmetic of the bounds is implemented; nothing here builds a
circuit. Ceilings of base-2 logarithms are computed exactly from the
binary representation of the argument.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SmoothnessError
from .hamiltonians import deriv_s, spectral_norm

BLOWUP = 1e12


def ceil_log2(x):
    """Exact ``ceil(log2(x))`` for a positive finite float."""
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"ceil_log2 needs a positive finite argument, got {x}")
    m, e = math.frexp(x)  # x = m 2^e with 0.5 <= m < 1
    return e - 1 if m == 0.5 else e


def z_iterations(n):
    """Number of applications of ``n -> ceil(2 log2 n)`` needed to reach a value <= 6."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    count = 0
    while n > 6:
        n = (n * n - 1).bit_length()  # ceil(log2(n^2)) for integer n >= 1
        count += 1
    return count


@dataclass(frozen=True)
class CostParams:
    M: int
    d: int
    k: int
    Lam: float
    maxT: float
    eps: float
    L: int
    n: int
    n_H: int
    Gamma: float
    N_T: int
    dHdt_max: float = None       # bound on ||dH/dt||; Lam**2 when omitted
    min_spacing: float = None    # smallest gap between non-smooth times, as a fraction of maxT

    def __post_init__(self):
        for name in ("M", "d", "k", "n", "n_H", "N_T"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.L < 0:
            raise ValueError("L must be >= 0")
        for name in ("Lam", "maxT", "eps", "Gamma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class QueryReport:
    N_queries: float
    C: int
    z_n: int
    n_H_min: int
    N_T_min: int
    N_f: int
    warnings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.warnings


def _trotter_scale(p):
    return 32 * p.k * p.M * p.d**2 * (5.0 / 3.0) ** (p.k - 1)


def min_n_H(p):
    return 2 * ceil_log2(_trotter_scale(p) * p.Lam * p.maxT / p.eps) + 6


def min_N_T(p):
    deriv = p.Lam**2 if p.dHdt_max is None else p.dHdt_max
    need = ceil_log2(deriv * _trotter_scale(p) * p.maxT**2 / p.eps)
    if p.min_spacing is not None:
        # maxT / 2^N_T < min_spacing * maxT  <=>  N_T > log2(1 / min_spacing)
        need = max(need, math.floor(math.log2(1.0 / p.min_spacing)) + 1)
    return max(need, 1)


def check_conditions(p):
    """Human-readable list of violated preconditions (empty when all hold)."""
    warns = []
    eps_cap = min(1.0, 27.0 * (5.0 / 3.0) ** (p.k - 1) * p.d**2 * p.Lam * p.maxT)
    if not 0 < p.eps <= eps_cap:
        warns.append(f"eps={p.eps} exceeds its cap {eps_cap}")
    if p.N_T < min_N_T(p):
        warns.append(f"N_T={p.N_T} below the required {min_N_T(p)}")
    if p.n_H < min_n_H(p):
        warns.append(f"n_H={p.n_H} below the required {min_n_H(p)}")
    if p.min_spacing is not None and not 2.0 ** (-p.N_T) < p.min_spacing:
        warns.append("time register too coarse to resolve the non-smooth points")
    return warns


def oracle_cost_C(p):
    """``4 n (z_n + 2) + 3 n_H + 2 ceil(log2(6 Gamma maxT / eps))``."""
    return 4 * p.n * (z_iterations(p.n) + 2) + 3 * p.n_H + 2 * ceil_log2(6.0 * p.Gamma * p.maxT / p.eps)


def query_bound(p):
    """Upper bound on the number of queries, with the derived register sizes and warnings."""
    C = oracle_cost_C(p)
    x = p.d**2 * p.Lam * p.maxT
    bracket = (p.L + 1) + 24 * p.k * x * (5.0 / 3.0) ** p.k * (6.0 * x / (p.eps / 6.0)) ** (1.0 / (2 * p.k))
    N = 12 * C * p.M * p.d**2 * 5 ** (p.k - 1) * bracket
    return QueryReport(float(N), C, z_iterations(p.n), min_n_H(p), min_N_T(p),
                       ceil_log2(p.Gamma) if p.Gamma > 0 else 0, check_conditions(p))


def lambda_smooth(family, path, P, grid=257, time_scale=1.0):
    """Estimate of the smallest Lambda for which ``H(f(s))`` is Lambda-P-smooth.

    Derivatives are exact (chain rule through the path) and taken with
    respect to ``t = time_scale * s``. Grid points are cell midpoints on each
    smooth segment, so breakpoints and the two ends are never sampled.
    """
    s = np.concatenate([lo + (hi - lo) * (np.arange(grid) + 0.5) / grid for lo, hi in path.segments()])
    best = 0.0
    for p in range(P + 1):
        norms = spectral_norm(deriv_s(family, path, s, p)) / time_scale**p
        peak = float(np.max(norms))
        if not np.isfinite(peak) or peak > BLOWUP:
            raise SmoothnessError(f"derivative of order {p} reaches {peak:.3g}")
        best = max(best, peak ** (1.0 / (p + 1)))
    return best


def report_table(p, rep):
    """Two-column (key, value) rows for text or CSV output."""
    rows = [(k, getattr(p, k)) for k in ("M", "d", "k", "Lam", "maxT", "eps", "L", "n", "n_H", "Gamma", "N_T")]
    rows += [("n_H_min", rep.n_H_min), ("N_T_min", rep.N_T_min), ("z_n", rep.z_n), ("C", rep.C),
             ("N_queries", rep.N_queries), ("N_f", rep.N_f), ("warnings", "; ".join(rep.warnings) or "none")]
    return rows
