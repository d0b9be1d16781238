"""Schedule functions f(s) on [0, 1] and the dual-path constructions.

A path is evaluated with ``path(s)`` and differentiated with
``path.derivative(s, order)``; both accept scalars or arrays. Piecewise
paths evaluate to the right-hand piece at an interior breakpoint unless
``side="left"`` is passed.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial as _P

from .errors import InterpolationError

CONDITION_LIMIT = 1e12


class SchedulePath:
    kind = "abstract"
    breakpoints = ()

    def __call__(self, s):
        return self.derivative(s, 0)

    def derivative(self, s, order=1, side="right"):
        raise NotImplementedError

    def to_record(self):
        raise NotImplementedError

    def to_json(self):
        return json.dumps(self.to_record(), sort_keys=True)

    def segments(self):
        """Closed intervals between consecutive breakpoints (including 0 and 1)."""
        edges = [0.0, *self.breakpoints, 1.0]
        return list(zip(edges[:-1], edges[1:]))


class PolynomialPath(SchedulePath):
    """Polynomial in the local variable ``u = (s - lo) / (hi - lo)``.

    With ``lo=0, hi=1`` the coefficients are the ordinary ones in s.
    """

    kind = "polynomial"

    def __init__(self, coeffs, lo=0.0, hi=1.0, label=None):
        if hi <= lo:
            raise ValueError("need lo < hi")
        self.coeffs = np.array(coeffs, dtype=float)
        self.lo = float(lo)
        self.hi = float(hi)
        self.label = label
        self._poly = _P(self.coeffs)
        self._derivs = {0: self._poly}

    def _dpoly(self, order):
        if order not in self._derivs:
            self._derivs[order] = self._poly.deriv(order)
        return self._derivs[order]

    def derivative(self, s, order=1, side="right"):
        s = np.asarray(s, dtype=float)
        w = self.hi - self.lo
        u = (s - self.lo) / w
        return self._dpoly(order)(u) / w**order

    def global_coefficients(self):
        """Coefficients in powers of s (lowest first); may be ill-conditioned."""
        w = self.hi - self.lo
        u_of_s = _P([-self.lo / w, 1.0 / w])
        return self._poly(u_of_s).coef

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def to_record(self):
        rec = {"kind": self.kind, "coeffs": self.coeffs.tolist(), "lo": self.lo, "hi": self.hi}
        if self.label:
            rec["label"] = self.label
        return rec


def linear():
    return PolynomialPath([0.0, 1.0], label="linear")


def smoothstep():
    """``s^2 (3 - 2 s)``: zero slope at both ends."""
    return PolynomialPath([0.0, 0.0, 3.0, -2.0], label="smoothstep")


class LAEPath(SchedulePath):
    """Local adiabatic schedule for N-dimensional search.

    ``f(s) = [a - tan(c (1 - 2 s))] / (2 a)`` with ``a = sqrt(N - 1)`` and
    ``c = arctan(a)``. Derivatives of any order use the recursion for
    derivatives of tan as polynomials in tan.
    """

    kind = "lae"

    def __init__(self, N):
        N = int(N)
        if N < 2:
            raise ValueError("LAE path needs N >= 2")
        self.N = N
        self.a = math.sqrt(N - 1)
        self.c = math.atan(self.a)
        self._tan_polys = [_P([0.0, 1.0])]

    def _tan_poly(self, k):
        while len(self._tan_polys) <= k:
            p = self._tan_polys[-1]
            self._tan_polys.append(p.deriv() * _P([1.0, 0.0, 1.0]))
        return self._tan_polys[k]

    def derivative(self, s, order=1, side="right"):
        s = np.asarray(s, dtype=float)
        t = np.tan(self.c * (1.0 - 2.0 * s))
        if order == 0:
            return (self.a - t) / (2.0 * self.a)
        scale = -((-2.0 * self.c) ** order) / (2.0 * self.a)
        return scale * self._tan_poly(order)(t)

    def to_record(self):
        return {"kind": self.kind, "N": self.N}


def lae_path(N):
    return LAEPath(N)


class PiecewisePath(SchedulePath):
    """Concatenation of paths on consecutive intervals covering [0, 1]."""

    kind = "piecewise"

    def __init__(self, pieces, conditions=(), label=None, params=None):
        pieces = [(float(lo), float(hi), p) for lo, hi, p in pieces]
        if pieces[0][0] != 0.0 or pieces[-1][1] != 1.0:
            raise ValueError("pieces must cover [0, 1]")
        for (lo0, hi0, _), (lo1, _, _) in zip(pieces[:-1], pieces[1:]):
            if hi0 != lo1:
                raise ValueError("pieces must be contiguous")
        self.pieces = pieces
        self.breakpoints = tuple(hi for _, hi, _ in pieces[:-1])
        # (s, order, target, side) tuples recorded by the constructing routine
        self.conditions = tuple(conditions)
        self.label = label
        self.params = dict(params or {})

    def _index(self, s, side):
        bp = np.asarray(self.breakpoints)
        return np.searchsorted(bp, s, side="right" if side == "right" else "left")

    def derivative(self, s, order=1, side="right"):
        s = np.asarray(s, dtype=float)
        idx = self._index(s, side)
        out = np.empty(s.shape, dtype=float)
        for i, (_, _, p) in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                out[mask] = p.derivative(s[mask], order, side)
        return out[()] if out.ndim == 0 else out

    def condition_residuals(self):
        """|achieved - target| for each recorded boundary/join condition.

        High-order derivatives on short segments lose digits when evaluated
        in s; :meth:`system_residuals` is the scale-free measure.
        """
        return np.array([abs(float(self.derivative(s, j, side)) - t) for s, j, t, side in self.conditions])

    def system_residuals(self):
        """Residuals of the linear systems that define the polynomial segments.

        Conditions are expressed in the local variable u of each segment, so a
        derivative condition of order j appears multiplied by width^j.
        """
        out = [np.abs(p.system[0] @ p.coeffs - p.system[1]) for _, _, p in self.pieces if hasattr(p, "system")]
        return np.concatenate(out) if out else np.zeros(0)

    def to_record(self):
        return {
            "kind": self.kind,
            "label": self.label,
            "params": self.params,
            "breakpoints": list(self.breakpoints),
            "segments": [{"lo": lo, "hi": hi, "path": p.to_record()} for lo, hi, p in self.pieces],
        }


class ReversedPath(SchedulePath):
    """``1 - f(1 - s)``."""

    kind = "reversed"

    def __init__(self, base):
        self.base = base
        self.breakpoints = tuple(sorted(1.0 - b for b in base.breakpoints))

    def derivative(self, s, order=1, side="right"):
        s = np.asarray(s, dtype=float)
        flipped = "left" if side == "right" else "right"
        val = self.base.derivative(1.0 - s, order, flipped)
        if order == 0:
            return 1.0 - val
        return (-1.0) ** (order + 1) * val

    @property
    def conditions(self):
        return tuple((1.0 - s, j, (-1.0) ** (j + 1) * t if j else 1.0 - t, "left" if side == "right" else "right")
                     for s, j, t, side in getattr(self.base, "conditions", ()))

    def condition_residuals(self):
        return np.array([abs(float(self.derivative(s, j, side)) - t) for s, j, t, side in self.conditions])

    def system_residuals(self):
        return self.base.system_residuals()

    def to_record(self):
        return {"kind": self.kind, "base": self.base.to_record()}


def time_reversed(path):
    return ReversedPath(path)


def path_from_record(rec):
    kind = rec["kind"]
    if kind == "polynomial":
        return PolynomialPath(rec["coeffs"], rec["lo"], rec["hi"], label=rec.get("label"))
    if kind == "lae":
        return LAEPath(rec["N"])
    if kind == "reversed":
        return ReversedPath(path_from_record(rec["base"]))
    if kind == "piecewise":
        pieces = [(seg["lo"], seg["hi"], path_from_record(seg["path"])) for seg in rec["segments"]]
        return PiecewisePath(pieces, label=rec.get("label"), params=rec.get("params"))
    raise ValueError(f"unknown path kind {kind!r}")


def path_from_json(text):
    return path_from_record(json.loads(text))


# ---------------------------------------------------------------------------
# polynomial continuation by Hermite-type boundary conditions

def _solve_segment(lo, hi, conditions, degree):
    """Polynomial on [lo, hi] meeting ``conditions`` = [(s, order, value)].

    Coefficients are solved in the local variable u in [0, 1], which keeps
    the system well conditioned for the degrees used here.
    """
    w = hi - lo
    n = degree + 1
    if len(conditions) != n:
        raise InterpolationError(f"{len(conditions)} conditions for degree {degree}")
    A = np.zeros((n, n))
    b = np.zeros(n)
    for row, (s, j, value) in enumerate(conditions):
        u0 = (s - lo) / w
        for k in range(j, n):
            A[row, k] = math.factorial(k) / math.factorial(k - j) * u0 ** (k - j)
        b[row] = value * w**j
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise InterpolationError(f"boundary system condition number {cond:.3g} too large; try a larger delta")
    try:
        coeffs = np.linalg.solve(A, b)
        coeffs = coeffs + np.linalg.solve(A, b - A @ coeffs)  # one refinement step
    except np.linalg.LinAlgError as exc:
        raise InterpolationError(str(exc)) from exc
    seg = PolynomialPath(coeffs, lo, hi)
    seg.system = (A, b)
    return seg


def _deriv(path, s, j):
    return float(path.derivative(s, j))


def partial_antisym_dual(f_A, delta):
    """Follow ``f_A`` up to ``1 - delta`` then switch to a quartic ending with reversed slope.

    The quartic matches value, slope and curvature of ``f_A`` at the join,
    reaches 1 at s = 1 and has slope ``-f_A'(1)`` there.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    a = 1.0 - delta
    conds = [(a, j, _deriv(f_A, a, j)) for j in range(3)]
    conds += [(1.0, 0, 1.0), (1.0, 1, -_deriv(f_A, 1.0, 1))]
    quartic = _solve_segment(a, 1.0, conds, 4)
    recorded = [(s, j, v, "right") for s, j, v in conds]
    return PiecewisePath([(0.0, a, f_A), (a, 1.0, quartic)], recorded,
                         label="partial_antisym_dual", params={"delta": delta})


def complete_antisym_dual(f_A, delta):
    """Quartic continuations on [0, delta/2] and [1 - delta/2, 1] reversing both end slopes."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    lo_join, hi_join = delta / 2.0, 1.0 - delta / 2.0
    left = [(0.0, 0, 0.0), (0.0, 1, -_deriv(f_A, 0.0, 1))]
    left += [(lo_join, j, _deriv(f_A, lo_join, j)) for j in range(3)]
    right = [(hi_join, j, _deriv(f_A, hi_join, j)) for j in range(3)]
    right += [(1.0, 0, 1.0), (1.0, 1, -_deriv(f_A, 1.0, 1))]
    qa = _solve_segment(0.0, lo_join, left, 4)
    qb = _solve_segment(hi_join, 1.0, right, 4)
    recorded = [(s, j, v, "left") for s, j, v in left] + [(s, j, v, "right") for s, j, v in right]
    return PiecewisePath([(0.0, lo_join, qa), (lo_join, hi_join, f_A), (hi_join, 1.0, qb)], recorded,
                         label="complete_antisym_dual", params={"delta": delta})


def bc_dual(f_A, m, delta):
    """Dual path for boundary-cancellation schedules of flatness order ``m``.

    On [0, delta] and [1 - delta, 1] the path is a polynomial of degree
    ``2m + 4`` (the smallest meeting the condition count) that

    * matches ``f_A`` through derivative order ``m + 2`` at the join,
    * has vanishing derivatives of orders 1..m at the boundary, and
    * has the opposite ``(m + 1)``-th derivative to ``f_A`` at the boundary.

    ``m = 0`` gives the completely antisymmetric conditions with joins at
    ``delta`` and ``1 - delta``.
    """
    m = int(m)
    if m < 0:
        raise ValueError("m must be >= 0")
    if not 0.0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 0.5) so the joins stay ordered")
    degree = 2 * m + 4
    lo_join, hi_join = delta, 1.0 - delta
    left = [(0.0, 0, 0.0)] + [(0.0, j, 0.0) for j in range(1, m + 1)]
    left += [(0.0, m + 1, -_deriv(f_A, 0.0, m + 1))]
    left += [(lo_join, j, _deriv(f_A, lo_join, j)) for j in range(m + 3)]
    right = [(hi_join, j, _deriv(f_A, hi_join, j)) for j in range(m + 3)]
    right += [(1.0, 0, 1.0)] + [(1.0, j, 0.0) for j in range(1, m + 1)]
    right += [(1.0, m + 1, -_deriv(f_A, 1.0, m + 1))]
    qa = _solve_segment(0.0, lo_join, left, degree)
    qb = _solve_segment(hi_join, 1.0, right, degree)
    recorded = [(s, j, v, "left") for s, j, v in left] + [(s, j, v, "right") for s, j, v in right]
    return PiecewisePath([(0.0, lo_join, qa), (lo_join, hi_join, f_A), (hi_join, 1.0, qb)], recorded,
                         label="bc_dual", params={"delta": delta, "m": m})


# ---------------------------------------------------------------------------
# validation and dumps

@dataclass
class ValidationReport:
    f0: float
    f1: float
    join_defects: list = field(default_factory=list)  # (s, value, slope, curvature) jumps
    f_min: float = 0.0
    f_max: float = 1.0
    monotone: bool = True
    tol: float = 1e-9

    @property
    def endpoints_ok(self):
        return abs(self.f0) <= self.tol and abs(self.f1 - 1.0) <= self.tol

    @property
    def max_join_defect(self):
        return max((max(abs(v) for v in d[1:]) for d in self.join_defects), default=0.0)

    @property
    def ok(self):
        return self.endpoints_ok and self.max_join_defect <= self.tol


def validate(path, samples=10_000, tol=1e-9):
    s = np.union1d(np.linspace(0.0, 1.0, samples + 1), path.breakpoints)
    f = path(s)
    defects = []
    for b in path.breakpoints:
        jumps = [float(path.derivative(b, j, "right") - path.derivative(b, j, "left")) for j in range(3)]
        defects.append((b, *jumps))
    df = np.diff(f)
    monotone = bool(np.all(df >= -1e-15) or np.all(df <= 1e-15))
    return ValidationReport(float(path(0.0)), float(path(1.0)), defects,
                            float(f.min()), float(f.max()), monotone, tol)


def sample_csv(path, points=1001):
    """CSV text with columns s, f, fdot."""
    s = np.union1d(np.linspace(0.0, 1.0, points), path.breakpoints)
    rows = ["s,f,fdot"]
    for si, fi, di in zip(s, path(s), path.derivative(s, 1)):
        rows.append(f"{float(si)!r},{float(fi)!r},{float(di)!r}")
    return "\n".join(rows) + "\n"
