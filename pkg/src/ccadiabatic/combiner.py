"""Weighted combination of counter-rotated evolutions and first-order predictors.

The post-selected operator of the two-branch gadget is
``cos^2(theta) U_A + sin^2(theta) U_B``; with more branches the weights are
any nonnegative numbers summing to one.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import BoundaryNotFlat, DegenerateCombination, GapCollapse
from .hamiltonians import deriv_s, spectral_norm
from .spectral import GAP_TOL, coupling, energy_integral, gap_integral

WEIGHT_TOL = 1e-12
FLAT_TOL = 1e-6


@dataclass
class Branch:
    path: object
    T: float
    weight: float
    path_id: str = ""


@dataclass
class CombinationPlan:
    branches: list
    theta: float = None

    def __post_init__(self):
        w = np.array([b.weight for b in self.branches], dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        if any(not b.T > 0 for b in self.branches):
            raise ValueError("branch times must be positive")

    @classmethod
    def two_branch(cls, path_A, T_A, path_B, T_B, theta, ids=("A", "B")):
        c2 = np.cos(theta) ** 2
        return cls([Branch(path_A, float(T_A), c2, ids[0]), Branch(path_B, float(T_B), 1.0 - c2, ids[1])], theta)

    @property
    def weights(self):
        return np.array([b.weight for b in self.branches])

    @property
    def times(self):
        return np.array([b.T for b in self.branches])

    def to_record(self):
        return {
            "theta": self.theta,
            "branches": [{"path_id": b.path_id, "T": b.T, "weight": b.weight, "path": b.path.to_record()}
                         for b in self.branches],
        }


@dataclass
class GadgetOutcome:
    success_state: np.ndarray
    p_success: float
    raw_combination: np.ndarray
    diabatic_error: float = float("nan")
    extras: dict = field(default_factory=dict)


def combine(results, plan, tr=None):
    """Post-selected state of the weighted combination of counter-rotated branches.

    ``tr`` (any track of the shared family) supplies the final ground state
    used for ``diabatic_error``.
    """
    if len(results) != len(plan.branches):
        raise ValueError("one result per branch required")
    starts = [r.start for r in results if r.start is not None]
    if any(s.shape != starts[0].shape or not np.allclose(s, starts[0], atol=1e-12) for s in starts):
        raise ValueError("branches must share the start state")
    raw = sum(w * r.counter_rotated_state for w, r in zip(plan.weights, results))
    p = float(np.vdot(raw, raw).real)
    if p < 1e-28:
        raise DegenerateCombination("branches interfere to zero")
    state = raw / np.sqrt(p)
    err = float("nan")
    if tr is not None:
        g = tr.vectors[-1][:, tr.ground_index]
        err = float(np.linalg.norm(state - g * (g.conj() @ state)))
    return GadgetOutcome(state, p, raw, err)


def difference_bound(result_A, result_B):
    """Lower bound ``1 - ||(U_A - U_B) psi||^2`` on the two-branch success probability."""
    diff = result_A.counter_rotated_state - result_B.counter_rotated_state
    return 1.0 - float(np.vdot(diff, diff).real)


def _boundary_factor(family, path, tr, n, s, order):
    """``<n|d^order H/ds^order|g> / gap^(order + 1)`` at s in the track's gauge."""
    g = tr.ground_index
    k = tr.nearest(s)
    V = tr.vectors[k]
    gap = tr.energies[k, n] - tr.energies[k, g]
    if abs(gap) < GAP_TOL:
        raise GapCollapse(f"levels {n} and {g} degenerate at s={s}")
    D = deriv_s(family, path, s, order)
    return complex(V[:, n].conj() @ D @ V[:, g]) / gap ** (order + 1)


def predict_counter_rotated(family, path, T, tr, n, m=0):
    """First-order amplitude on level n in the frame rotating with the ground energy.

    This is the quantity that adds linearly across branches of a combination.
    """
    if m == 0:
        X1 = coupling(family, path, 1.0, n, tr.ground_index, tr, side="left") / tr.gap(n)[-1]
        X0 = coupling(family, path, 0.0, n, tr.ground_index, tr) / tr.gap(n)[0]
        G = gap_integral(tr, n)
        return (X1 - np.exp(-1j * T * G) * X0) / (1j * T)
    _check_flat(family, path, m)
    G = gap_integral(tr, n)
    X1 = _boundary_factor(family, path, tr, n, 1.0, m + 1)
    X0 = _boundary_factor(family, path, tr, n, 0.0, m + 1)
    return 1j ** (m - 1) * (X1 - np.exp(-1j * T * G) * X0) / T ** (m + 1)


def _check_flat(family, path, m):
    for s in (0.0, 1.0):
        for j in range(1, m + 1):
            nrm = float(spectral_norm(deriv_s(family, path, s, j)))
            if nrm > FLAT_TOL:
                raise BoundaryNotFlat(f"derivative order {j} of H has norm {nrm:.3g} at s={s}")


def predict_first_order(family, path, T, tr, n):
    """First-order amplitude on the labelled level n at s = 1, including its dynamical phase."""
    return predict_counter_rotated(family, path, T, tr, n) * np.exp(-1j * T * energy_integral(tr))


def predict_first_order_bc(family, path, T, tr, n, m):
    """Leading amplitude when the first ``m`` s-derivatives of H vanish at both ends."""
    return predict_counter_rotated(family, path, T, tr, n, m) * np.exp(-1j * T * energy_integral(tr))


def predict_combined(family, plan, tracks, n, m=0):
    """Weighted sum of per-branch counter-rotated predictions, in the first track's basis at s = 1."""
    ref = tracks[0].vectors[-1][:, n]
    total = 0.0
    ms = [m] * len(tracks) if np.isscalar(m) else list(m)
    for b, tr, mj in zip(plan.branches, tracks, ms):
        align = ref.conj() @ tr.vectors[-1][:, n]
        total = total + b.weight * align * predict_counter_rotated(family, b.path, b.T, tr, n, mj)
    return complex(total)


def norm_integral(family, path, points=1025):
    """``int_0^1 ||H(f(s))|| ds`` by Simpson's rule on each smooth segment."""
    total = 0.0
    for lo, hi in path.segments():
        s = np.linspace(lo, hi, points)
        total += simpson(spectral_norm(family.value_at(path(s))), x=s)
    return float(total)


def cost(plan, family, p_success, norm_integrals=None):
    """``max_j (int ||H_j|| ds) T_j / p_success``."""
    if not p_success > 0:
        raise ValueError("p_success must be positive")
    if norm_integrals is None:
        norm_integrals = [norm_integral(family, b.path) for b in plan.branches]
    return max(I * b.T for I, b in zip(norm_integrals, plan.branches)) / p_success
