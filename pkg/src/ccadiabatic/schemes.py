"""Choice of paths, times and weights that cancel first-order transitions.

Every solver returns a :class:`SchemeSolution` holding the combination plan,
the tracks used for each branch and diagnostics (gap integrals, chosen
integers, predicted residual amplitudes).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .combiner import Branch, CombinationPlan, predict_combined, predict_counter_rotated
from .errors import (DuplicateBranches, IdenticalPaths, NoPositiveTimes,
                     PhaseMatchingImpossible, SingularSystem, SpectrumNotSymmetric)
from .paths import bc_dual, complete_antisym_dual, partial_antisym_dual, time_reversed
from .spectral import gap_integral, track

SYMMETRY_TOL = 1e-8


@dataclass
class SchemeSolution:
    plan: CombinationPlan
    target_levels: list
    branch_index: object = None
    diagnostics: dict = field(default_factory=dict)
    tracks: list = field(default_factory=list, repr=False)

    @property
    def theta(self):
        return self.plan.theta

    @property
    def times(self):
        return self.plan.times

    def predicted_amplitudes(self, family, levels=None, m=0):
        """Combined first-order amplitude per level, plus the largest single-branch one."""
        out = {}
        for n in levels or self.target_levels:
            comb = predict_combined(family, self.plan, self.tracks, n, m)
            ms = [m] * len(self.tracks) if np.isscalar(m) else m
            single = max(abs(predict_counter_rotated(family, b.path, b.T, tr, n, mj))
                         for b, tr, mj in zip(self.plan.branches, self.tracks, ms))
            out[n] = (comb, single)
        return out

    def to_record(self):
        return {
            "plan": self.plan.to_record(),
            "target_levels": list(self.target_levels),
            "branch_index": self.branch_index,
            "diagnostics": {k: _plain(v) for k, v in self.diagnostics.items()},
        }


def _plain(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _tracks(family, paths, grid_points, given=None):
    if given is not None:
        if len(given) != len(paths) or any(tr.path is not p for tr, p in zip(given, paths)):
            raise ValueError("supplied tracks must belong to the branch paths")
        return list(given)
    return [track(family, p, grid_points) for p in paths]


def _same_path(f_A, f_B, points=257):
    s = np.linspace(0.0, 1.0, points)
    return np.allclose(f_A(s), f_B(s), rtol=0.0, atol=1e-14) and np.allclose(
        f_A.derivative(s, 1), f_B.derivative(s, 1), rtol=0.0, atol=1e-14)


def solve_partial(family, f_A, T_A, level=1, n=0, delta=0.2, f_B=None, grid_points=257, tracks=None):
    """Two-branch scheme cancelling the s = 1 boundary term and the s = 0 term by phase.

    ``T_B = (G_A T_A + (2n + 1) pi) / G_B`` and ``tan^2 theta = T_B / T_A``,
    where ``G`` are the gap integrals of the target level on each path.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if f_B is None:
        f_B = tracks[1].path if tracks is not None else partial_antisym_dual(f_A, delta)
    tr_A, tr_B = _tracks(family, (f_A, f_B), grid_points, tracks)
    G_A, G_B = gap_integral(tr_A, level), gap_integral(tr_B, level)
    T_B = (G_A * T_A + (2 * n + 1) * math.pi) / G_B
    if not T_B > 0:
        raise NoPositiveTimes(f"T_B = {T_B} for n = {n}")
    theta = math.atan(math.sqrt(T_B / T_A))
    plan = CombinationPlan.two_branch(f_A, T_A, f_B, T_B, theta)
    sol = SchemeSolution(plan, [level], n, {"G_A": G_A, "G_B": G_B, "delta": delta}, [tr_A, tr_B])
    comb, single = sol.predicted_amplitudes(family)[level]
    sol.diagnostics.update(predicted_combined=comb, predicted_single=single)
    return sol


def nearest_complete_index(G_A, G_B, T_A):
    """Integer n making ``T_B = (G_A T_A + 2 n pi)/G_B`` closest to ``T_A``, kept positive."""
    n = round(T_A * (G_B - G_A) / (2.0 * math.pi))
    while (G_A * T_A + 2 * n * math.pi) / G_B <= 0:
        n += 1
    return n


def solve_complete(family, f_A, T_A, level=1, n=None, delta=0.2, f_B=None, m=0, grid_points=257, tracks=None):
    """Two-branch scheme with both boundary terms reversed on the second path.

    ``T_B = (G_A T_A + 2 n pi) / G_B`` and ``tan^2 theta = (T_B / T_A)^(m + 1)``,
    where ``m`` is the number of vanishing boundary derivatives of both
    paths (``m = 0`` for ordinary paths). ``n`` defaults to the value giving
    the smallest ``|T_B - T_A|``.
    """
    if f_B is None and tracks is not None:
        f_B = tracks[1].path
    elif f_B is None:
        f_B = complete_antisym_dual(f_A, delta) if m == 0 else bc_dual(f_A, m, delta)
    if _same_path(f_A, f_B):
        raise IdenticalPaths("the two branches follow the same path")
    tr_A, tr_B = _tracks(family, (f_A, f_B), grid_points, tracks)
    G_A, G_B = gap_integral(tr_A, level), gap_integral(tr_B, level)
    if n is None:
        n = nearest_complete_index(G_A, G_B, T_A)
    T_B = (G_A * T_A + 2 * n * math.pi) / G_B
    if not T_B > 0:
        raise NoPositiveTimes(f"T_B = {T_B} for n = {n}")
    theta = math.atan((T_B / T_A) ** ((m + 1) / 2.0))
    plan = CombinationPlan.two_branch(f_A, T_A, f_B, T_B, theta)
    sol = SchemeSolution(plan, [level], n, {"G_A": G_A, "G_B": G_B, "delta": delta, "m": m}, [tr_A, tr_B])
    comb, single = sol.predicted_amplitudes(family, m=m)[level]
    sol.diagnostics.update(predicted_combined=comb, predicted_single=single)
    return sol


def spectrum_symmetry_defect(family, f_lo=0.0, f_hi=1.0, points=513):
    """Largest difference between the spectra of H(f) and H(1 - f) over [f_lo, f_hi]."""
    f = np.linspace(f_lo, f_hi, points)
    a = np.linalg.eigvalsh(family.value_at(f))
    b = np.linalg.eigvalsh(family.value_at(1.0 - f))
    return float(np.max(np.abs(a - b)))


def symmetric_all(family, f_base, delta, T, grid_points=257, levels=None, tracks=None):
    """Equal-weight, equal-time pair of a partial dual and its time reverse.

    When the spectrum of H(f) is symmetric under ``f -> 1 - f`` this
    cancels the first-order amplitude on every excited level at once.
    ``tracks`` from an earlier call with the same base path may be reused.
    """
    if tracks is not None:
        f_A, f_B = tracks[0].path, tracks[1].path
    else:
        f_B = partial_antisym_dual(f_base, delta)
        f_A = time_reversed(f_B)
    fs = f_B(np.linspace(0.0, 1.0, 2001))
    defect = spectrum_symmetry_defect(family, min(fs.min(), 0.0), max(fs.max(), 1.0))
    if defect > SYMMETRY_TOL:
        raise SpectrumNotSymmetric(f"spectra of H(f) and H(1-f) differ by {defect:.3g}")
    tr_A, tr_B = _tracks(family, (f_A, f_B), grid_points, tracks)
    levels = list(range(1, family.dim)) if levels is None else list(levels)
    G = {n: (gap_integral(tr_A, n), gap_integral(tr_B, n)) for n in levels}
    plan = CombinationPlan.two_branch(f_A, T, f_B, T, math.pi / 4, ids=("reversed", "dual"))
    diag = {"delta": delta, "symmetry_defect": defect, "gap_integrals": G}
    sol = SchemeSolution(plan, levels, None, diag, [tr_A, tr_B])
    sol.diagnostics["predicted"] = {n: v for n, v in sol.predicted_amplitudes(family, levels).items()}
    return sol


def three_level_times(G, n=None, m=None, max_index=64, full_output=False):
    """Solve ``G @ (T_A, T_B) = ((2n+1) pi, (2m+1) pi)`` for positive times.

    ``G[i, j]`` is the gap integral of excited level i+1 on path j. Without
    explicit integers the smallest pair (by n + m, then n) giving positive
    times is used.
    """
    G = np.asarray(G, dtype=float)
    det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    if abs(det) <= 1e-10:
        raise SingularSystem(f"determinant {det:.3g}")
    if n is not None and m is not None:
        candidates = [(n, m)]
    else:
        ns = range(max_index + 1) if n is None else [n]
        ms = range(max_index + 1) if m is None else [m]
        candidates = sorted(((i, j) for i in ns for j in ms), key=lambda p: (p[0] + p[1], p[0]))
    for i, j in candidates:
        rhs = np.array([(2 * i + 1) * math.pi, (2 * j + 1) * math.pi])
        T = np.linalg.solve(G, rhs)
        if np.all(T > 0):
            out = (float(T[0]), float(T[1]))
            return (out, (i, j)) if full_output else out
    raise NoPositiveTimes(f"no positive solution with integers up to {max_index}")


def four_unitary_scheme(family, f_A, f_B, T_A, T_C=None, levels=(1, 2), n=0, max_k=64, grid_points=257, tracks=None):
    """Four branches (f_A, T_A), (f_B, T_B), (f_A, T_C), (f_B, T_D) cancelling two levels.

    ``f_B`` must reverse the slope of ``f_A`` at s = 1 only. Each pair
    (A, B) and (C, D) cancels level ``e1`` on its own, as in the two-branch
    partial scheme. ``T_C`` is then placed where the residual ``e2``
    amplitudes of the two pairs are antiparallel, and the pair weights are
    set so they cancel. If ``T_C`` is given, the admissible time nearest to
    it is used.
    """
    e1, e2 = levels
    if T_C is not None and math.isclose(T_C, T_A, rel_tol=1e-12):
        raise DuplicateBranches("T_C equals T_A: the four branches collapse to two")
    tr_A, tr_B = _tracks(family, (f_A, f_B), grid_points, tracks)
    g1A, g1B = gap_integral(tr_A, e1), gap_integral(tr_B, e1)
    g2A, g2B = gap_integral(tr_A, e2), gap_integral(tr_B, e2)

    def partner(T):
        return (g1A * T + (2 * n + 1) * math.pi) / g1B

    def half_angles(T):
        TB = partner(T)
        return 0.5 * (T * g2A + TB * g2B), 0.5 * (T * g2A - TB * g2B)

    kappa = g2A + g2B * g1A / g1B
    if abs(kappa) < 1e-12:
        raise PhaseMatchingImpossible("the e2 phase of a pair does not change with its time")
    T_B = partner(T_A)
    _, hd_A = half_angles(T_A)
    cos_A = math.cos(hd_A)
    ks = sorted((k for k in range(-max_k, max_k + 1) if k),
                key=lambda k: (abs(T_A + 2 * k * math.pi / kappa - T_C), k) if T_C is not None else (abs(k), -k))
    for k in ks:
        Tc = T_A + 2 * k * math.pi / kappa
        if Tc <= 0 or partner(Tc) <= 0:
            continue
        cos_C = math.cos(half_angles(Tc)[1])
        if abs(cos_C) < 1e-3 or (-1) ** k * cos_C * cos_A >= 0:
            continue
        break
    else:
        raise PhaseMatchingImpossible("no admissible T_C within the scanned range")
    T_D = partner(Tc)
    a = 1.0
    b = a * T_B / T_A
    c = Tc * (a / T_A) * abs(cos_A) / abs(cos_C)
    d = c * T_D / Tc
    w = np.array([a, b, c, d])
    w = w / w.sum()
    plan = CombinationPlan([Branch(f_A, T_A, w[0], "A"), Branch(f_B, T_B, w[1], "B"),
                            Branch(f_A, Tc, w[2], "C"), Branch(f_B, T_D, w[3], "D")])
    tracks = [tr_A, tr_B, tr_A, tr_B]
    diag = {"gap_integrals": {e1: (g1A, g1B), e2: (g2A, g2B)}, "k": k, "kappa": kappa,
            "weights": w.tolist(), "times": [T_A, T_B, Tc, T_D]}
    sol = SchemeSolution(plan, [e1, e2], n, diag, tracks)
    sol.diagnostics["predicted"] = sol.predicted_amplitudes(family, [e1, e2])
    return sol
