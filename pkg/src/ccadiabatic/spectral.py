"""Instantaneous eigensystems followed continuously along a path.

Levels are labelled at s = 0 by energy (ties broken by the first-order
splitting under dH/df) and then followed by maximal overlap, so a label
stays attached to one adiabatic level even where energies cross. Phases
are fixed so that overlaps between consecutive frames are real and
positive, the discrete form of a parallel-transported gauge.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import linear_sum_assignment

from .errors import GapCollapse, QuadratureError

GAP_TOL = 1e-9
CLUSTER_TOL = 1e-9
MAX_REFINEMENTS = 16


@dataclass(frozen=True)
class SpectralFrame:
    s: float
    energies: np.ndarray
    vectors: np.ndarray
    ground_index: int = 0


def _polar_unitary(M):
    X, _, Yh = np.linalg.svd(M)
    return X @ Yh


def _clusters(w, scale):
    """Split sorted eigenvalues into runs closer than CLUSTER_TOL * scale."""
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] < CLUSTER_TOL * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _initial_frame(H, dH):
    """Eigenbasis at the first grid point, degeneracies lifted by dH."""
    w, U = np.linalg.eigh(H)
    scale = max(1.0, np.max(np.abs(w)))
    cols, keys = [], []
    for grp in _clusters(w, scale):
        W = U[:, grp]
        if len(grp) > 1:
            mu, R = np.linalg.eigh(W.conj().T @ dH @ W)
            W = W @ R
        else:
            mu = [0.0]
        for j in range(len(grp)):
            cols.append(W[:, j])
            keys.append((w[grp].mean(), mu[j]))
    order = sorted(range(len(cols)), key=lambda i: keys[i])
    V = np.stack([cols[i] for i in order], axis=1)
    return _fix_reference_phase(V)


def _fix_reference_phase(V):
    # make the largest component of each column real positive (reproducible start gauge)
    idx = np.argmax(np.abs(V), axis=0)
    ph = V[idx, np.arange(V.shape[1])]
    return V * (np.abs(ph) / ph)[None, :]


def align_to(V_prev, w, U):
    """Relabel and rephase the eigenbasis ``(w, U)`` to follow ``V_prev``.

    Returns the new labelled vectors. Near-degenerate clusters are matched
    as whole subspaces and rotated by the polar factor closest to the
    previous vectors.
    """
    d = len(w)
    scale = max(1.0, np.max(np.abs(w)))
    groups = _clusters(w, scale)
    O = np.abs(V_prev.conj().T @ U) ** 2  # label x column
    slot_group = []
    for gi, grp in enumerate(groups):
        slot_group.extend([gi] * len(grp))
    weights = np.stack([O[:, grp].sum(axis=1) for grp in groups], axis=1)[:, slot_group]
    rows, slots = linear_sum_assignment(-weights)
    labels_for = [[] for _ in groups]
    for r, sl in zip(rows, slots):
        labels_for[slot_group[sl]].append(r)
    V = np.empty((d, d), dtype=np.result_type(U, V_prev, complex))
    for grp, labs in zip(groups, labels_for):
        labs = sorted(labs)
        W = U[:, grp]
        V[:, labs] = W @ _polar_unitary(W.conj().T @ V_prev[:, labs])
    return V


def _grid(path, grid_points):
    """Grid with an even number of intervals on each segment; returns (s, segment slices)."""
    pieces, slices, start = [], [], 0
    for lo, hi in path.segments():
        n = max(2, 2 * int(np.ceil((grid_points - 1) * (hi - lo) / 2.0)))
        pts = np.linspace(lo, hi, n + 1)
        if pieces:
            pts = pts[1:]
            start -= 1
        pieces.append(pts)
        slices.append(slice(start, start + n + 1))
        start += n + 1
    return np.concatenate(pieces), slices


class SpectralTrack:
    """Labelled eigensystem of ``H(f(s))`` on a grid including all breakpoints."""

    def __init__(self, family, path, s, energies, vectors, slices, grid_points, ground_index=0):
        self.family = family
        self.path = path
        self.s = s
        self.energies = energies
        self.vectors = vectors
        self.slices = slices
        self.grid_points = grid_points
        self.ground_index = ground_index
        self._refined = None
        self._cache = {}
        for arr in (s, energies, vectors):
            arr.setflags(write=False)

    @property
    def dim(self):
        return self.energies.shape[1]

    def __len__(self):
        return len(self.s)

    def frame(self, k):
        return SpectralFrame(float(self.s[k]), self.energies[k], self.vectors[k], self.ground_index)

    @property
    def frames(self):
        return [self.frame(k) for k in range(len(self.s))]

    def gap(self, n, g=None):
        g = self.ground_index if g is None else g
        return self.energies[:, n] - self.energies[:, g]

    def nearest(self, s):
        return int(np.argmin(np.abs(self.s - s)))

    def refined(self):
        if self._refined is None:
            self._refined = track(self.family, self.path, 2 * (self.grid_points - 1) + 1)
        return self._refined

    def simpson(self, values):
        return float(sum(simpson(values[sl], x=self.s[sl]) for sl in self.slices))

    def to_csv(self, levels=None):
        g = self.ground_index
        levels = [n for n in range(self.dim) if n != g] if levels is None else list(levels)
        head = ["s"] + [f"E_{n}" for n in range(self.dim)] + [f"gamma_{g}_{n}" for n in levels]
        rows = [",".join(head)]
        for k, sk in enumerate(self.s):
            vals = [sk, *self.energies[k], *(self.energies[k, n] - self.energies[k, g] for n in levels)]
            rows.append(",".join(repr(float(v)) for v in vals))
        return "\n".join(rows) + "\n"


def track(family, path, grid_points=257, levels=None):
    """Follow all eigenlevels of ``family`` along ``path``.

    Parameters
    ----------
    grid_points : int
        Approximate number of grid points on [0, 1]; each segment between
        breakpoints gets an even number of intervals.
    levels : iterable of int, optional
        Labels whose gap to the ground level must stay open. Defaults to all.
    """
    if grid_points < 64:
        raise ValueError("grid_points must be >= 64")
    s, slices = _grid(path, grid_points)
    f = path(s)
    H = family.value_at(f)
    w_all, U_all = np.linalg.eigh(H)
    d = family.dim
    V = _initial_frame(H[0], family.deriv_f(f[0]))
    vectors = np.empty((len(s), d, d), dtype=complex)
    vectors[0] = V
    for k in range(1, len(s)):
        V = align_to(V, w_all[k], U_all[k])
        vectors[k] = V
    energies = np.einsum("kin,kij,kjn->kn", vectors.conj(), H, vectors).real
    g = 0
    levels = [n for n in range(d) if n != g] if levels is None else [n for n in levels if n != g]
    if levels:
        gaps = np.abs(energies[:, levels] - energies[:, [g]])
        if gaps.min() < GAP_TOL:
            k, j = np.unravel_index(np.argmin(gaps), gaps.shape)
            raise GapCollapse(f"gap between levels {g} and {levels[j]} closes near s={s[k]:.6g}")
    return SpectralTrack(family, path, s, energies, vectors, slices, grid_points, g)


def _refine_integral(tr, key, fn, tol):
    if key in tr._cache:
        return tr._cache[key]
    prev = fn(tr)
    cur_track = tr
    for _ in range(MAX_REFINEMENTS):
        cur_track = cur_track.refined()
        cur = fn(cur_track)
        if abs(cur - prev) < tol:
            tr._cache[key] = cur
            return cur
        prev = cur
    raise QuadratureError(f"integral {key} did not converge to {tol}")


def gap_integral(tr, n, g=None, tol=1e-8):
    """``int_0^1 (E_n - E_g) ds`` by Simpson's rule, refined until stable to ``tol``."""
    g = tr.ground_index if g is None else g
    if n == g:
        raise ValueError("n and g must differ")
    val = _refine_integral(tr, ("gap", n, g), lambda t: t.simpson(t.gap(n, g)), tol)
    if abs(val) < GAP_TOL:
        raise GapCollapse(f"gap integral between {g} and {n} vanishes")
    return val


def energy_integral(tr, n=None, tol=1e-8):
    """``int_0^1 E_n ds`` (ground level by default)."""
    n = tr.ground_index if n is None else n
    return _refine_integral(tr, ("energy", n), lambda t: t.simpson(t.energies[:, n]), tol)


def frame_at(tr, s):
    """Labelled eigenbasis at an arbitrary ``s``, aligned to the nearest track frame."""
    k = tr.nearest(s)
    if np.isclose(tr.s[k], s, rtol=0.0, atol=1e-15):
        return tr.energies[k], tr.vectors[k]
    H = tr.family.value_at(tr.path(s))
    w, U = np.linalg.eigh(H)
    V = align_to(tr.vectors[k], w, U)
    return np.einsum("in,ij,jn->n", V.conj(), H, V).real, V


def coupling(family, path, s, n, g=0, tr=None, side="right"):
    """``<n|dH/ds|g> / (E_n - E_g)`` at ``s``, which equals ``<dn/ds|g>``.

    With a track the matrix element is expressed in that track's gauge;
    without one only its magnitude is meaningful.
    """
    if tr is None:
        tr = track(family, path, 65)
    E, V = frame_at(tr, s)
    gap = E[n] - E[g]
    if abs(gap) < GAP_TOL:
        raise GapCollapse(f"levels {n} and {g} degenerate at s={s}")
    Hdot = family.deriv_f(path(s)) * float(path.derivative(s, 1, side))
    return complex(V[:, n].conj() @ Hdot @ V[:, g]) / gap
