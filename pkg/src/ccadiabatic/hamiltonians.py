"""Hamiltonian families H(f) evaluated along a schedule value f.

Every family is defined for all real ``f`` (schedules may overshoot [0, 1])
and can be evaluated on a scalar or on an array of schedule values, in
which case a stack of matrices with shape ``f.shape + (d, d)`` is returned.
"""

import math

import numpy as np

HERMITIAN_ATOL = 1e-12

_SIGMA_Z = np.diag([1.0, -1.0])
_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def _check_hermitian(M, name):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
    if np.max(np.abs(M - M.conj().T), initial=0.0) > HERMITIAN_ATOL:
        raise ValueError(f"{name} is not Hermitian")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    if np.iscomplexobj(M) and np.max(np.abs(M.imag), initial=0.0) == 0.0:
        M = M.real
    return np.array(M)


class HamiltonianFamily:
    """Base class: a smooth map ``f -> H(f)`` of dense Hermitian matrices."""

    kind = "abstract"
    dim = 0

    def value_at(self, f):
        raise NotImplementedError

    def deriv_f(self, f, order=1):
        """``d^order H / df^order`` at ``f`` (same broadcasting as value_at)."""
        raise NotImplementedError

    @property
    def is_real(self):
        return True

    def to_record(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class LinearInterp(HamiltonianFamily):
    """``H(f) = (1 - f) H0 + f H1``."""

    kind = "linear_interp"

    def __init__(self, H0, H1):
        H0 = _check_hermitian(H0, "H0")
        H1 = _check_hermitian(H1, "H1")
        if H0.shape != H1.shape:
            raise ValueError(f"H0 and H1 shapes differ: {H0.shape} vs {H1.shape}")
        dtype = np.result_type(H0, H1)
        self.H0 = H0.astype(dtype)
        self.H1 = H1.astype(dtype)
        self.H0.setflags(write=False)
        self.H1.setflags(write=False)
        self.dim = H0.shape[0]

    @property
    def is_real(self):
        return not np.iscomplexobj(self.H0)

    def value_at(self, f):
        f = np.asarray(f, dtype=float)
        fe = f[..., None, None]
        return (1.0 - fe) * self.H0 + fe * self.H1

    def deriv_f(self, f, order=1):
        f = np.asarray(f, dtype=float)
        if order == 0:
            return self.value_at(f)
        D = self.H1 - self.H0 if order == 1 else np.zeros_like(self.H0)
        return np.broadcast_to(D, f.shape + D.shape).copy()

    def to_record(self):
        return {"kind": self.kind, "H0": _matrix_record(self.H0), "H1": _matrix_record(self.H1)}


class Search(LinearInterp):
    """Adiabatic Grover search on an N-dimensional space.

    ``H(f) = (1 - f)(1 - |u><u|) + f (1 - |0><0|)`` with ``|u>`` the uniform
    superposition. N need not be a power of two.
    """

    kind = "search"

    def __init__(self, N):
        N = int(N)
        if N < 2:
            raise ValueError("Search needs N >= 2")
        u = np.full(N, 1.0 / math.sqrt(N))
        marked = np.zeros(N)
        marked[0] = 1.0
        eye = np.eye(N)
        super().__init__(eye - np.outer(u, u), eye - np.outer(marked, marked))
        self.N = N

    def gap(self, f):
        """Closed-form ground/first-excited gap ``sqrt(1 - 4 f (1-f)(1 - 1/N))``."""
        f = np.asarray(f, dtype=float)
        return np.sqrt(1.0 - 4.0 * f * (1.0 - f) * (1.0 - 1.0 / self.N))

    def to_record(self):
        return {"kind": self.kind, "N": self.N}

    def __repr__(self):
        return f"Search(N={self.N})"


class SinBridge(HamiltonianFamily):
    """Two-qubit family ``Z x 1 + 1 x Z + sin(pi f) Had x Had``.

    The schedule value replaces s everywhere, including inside the sine.
    """

    kind = "sin_bridge"
    dim = 4

    def __init__(self):
        eye = np.eye(2)
        self.static = np.kron(_SIGMA_Z, eye) + np.kron(eye, _SIGMA_Z)
        self.drive = np.kron(_HADAMARD, _HADAMARD)

    def value_at(self, f):
        f = np.asarray(f, dtype=float)
        return self.static + np.sin(np.pi * f)[..., None, None] * self.drive

    def deriv_f(self, f, order=1):
        f = np.asarray(f, dtype=float)
        if order == 0:
            return self.value_at(f)
        # d^k/df^k sin(pi f) = pi^k sin(pi f + k pi / 2)
        c = np.pi**order * np.sin(np.pi * f + order * np.pi / 2.0)
        return c[..., None, None] * self.drive

    def to_record(self):
        return {"kind": self.kind}

    def __repr__(self):
        return "SinBridge()"


class CustomTable(LinearInterp):
    """Linear interpolation between user-supplied matrices.

    The first derivative is taken by central differences (step 1e-6) rather
    than analytically, so user tables are exercised through the same
    numerical route a general family would be.
    """

    kind = "custom_table"
    fd_step = 1e-6

    def __init__(self, H0, H1, source=None):
        super().__init__(H0, H1)
        self.source = source

    def deriv_f(self, f, order=1):
        f = np.asarray(f, dtype=float)
        if order == 0:
            return self.value_at(f)
        if order == 1:
            h = self.fd_step
            return (self.value_at(f + h) - self.value_at(f - h)) / (2.0 * h)
        return super().deriv_f(f, order)

    @classmethod
    def from_files(cls, path0, path1):
        return cls(read_matrix(path0), read_matrix(path1), source=(str(path0), str(path1)))

    def to_record(self):
        rec = super().to_record()
        rec["kind"] = self.kind
        if self.source is not None:
            rec["source"] = list(self.source)
        return rec


def deriv_s(family, path, s, order):
    """``d^order/ds^order H(f(s))`` by Faa di Bruno's formula.

    Uses the family's f-derivatives and the path's s-derivatives, so the
    result is exact up to rounding for every built-in family.
    """
    s = np.asarray(s, dtype=float)
    if order == 0:
        return family.value_at(path(s))
    f = path(s)
    fders = [path.derivative(s, j) for j in range(1, order + 1)]
    out = np.zeros(s.shape + (family.dim, family.dim), dtype=complex if not family.is_real else float)
    for k in range(1, order + 1):
        b = _bell(order, k, fders)
        if np.any(b != 0.0):
            out = out + b[..., None, None] * family.deriv_f(f, k)
    return out


def _bell(n, k, x):
    """Partial Bell polynomial B_{n,k}(x_1, ..., x_{n-k+1}), x given 1-based as x[0..]."""
    table = {(0, 0): 1.0}

    def B(nn, kk):
        if (nn, kk) in table:
            return table[(nn, kk)]
        if kk == 0 or nn == 0:
            return 0.0 if (nn or kk) else 1.0
        total = 0.0
        for i in range(1, nn - kk + 2):
            total = total + math.comb(nn - 1, i - 1) * x[i - 1] * B(nn - i, kk - 1)
        table[(nn, kk)] = total
        return total

    return np.asarray(B(n, k), dtype=float)


def spectral_norm(H):
    """Operator norm of a Hermitian matrix (or stack) via its eigenvalues."""
    w = np.linalg.eigvalsh(H)
    return np.max(np.abs(w), axis=-1)


# plain-text complex matrix format: first line d, then d*d "re,im" tokens

def read_matrix(path):
    with open(path) as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError(f"{path}: empty matrix file")
    d = int(tokens[0])
    entries = tokens[1:]
    if len(entries) != d * d:
        raise ValueError(f"{path}: expected {d * d} entries for d={d}, found {len(entries)}")
    vals = []
    for tok in entries:
        re_, _, im_ = tok.partition(",")
        vals.append(complex(float(re_), float(im_ or 0.0)))
    return np.array(vals, dtype=complex).reshape(d, d)


def write_matrix(path, M):
    M = np.asarray(M, dtype=complex)
    d = M.shape[0]
    lines = [str(d)]
    for row in M:
        lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _matrix_record(M):
    M = np.asarray(M, dtype=complex)
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def family_from_record(rec):
    kind = rec["kind"]
    if kind == "search":
        return Search(rec["N"])
    if kind == "sin_bridge":
        return SinBridge()
    if kind in ("linear_interp", "custom_table"):
        if "source" in rec and "H0" not in rec:
            return CustomTable.from_files(*rec["source"])
        H0 = np.array(rec["H0"]["re"]) + 1j * np.array(rec["H0"]["im"])
        H1 = np.array(rec["H1"]["re"]) + 1j * np.array(rec["H1"]["im"])
        return (CustomTable if kind == "custom_table" else LinearInterp)(H0, H1)
    raise ValueError(f"unknown family kind {kind!r}")
