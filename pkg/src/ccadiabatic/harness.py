"""Experiment configuration and T sweeps producing error-versus-cost tables.

Configs are INI files read with :mod:`configparser`::

    [family]
    kind = search          ; search | sin_bridge | linear_interp | custom_table
    N = 5                  ; H0 = a.txt, H1 = b.txt for the file-based kinds

    [path]
    kind = lae             ; lae | linear | smoothstep | json
    N = 5                  ; file = path.json for kind = json

    [scheme]
    kind = partial         ; none | partial | complete | symmetric_all |
                           ; three_level | four_unitary | bc_hybrid
    delta = 0.2
    level = 1

    [sweep]
    T_min = 50
    T_max = 2000
    points = 12
    phase_samples = 4

    [integrator]
    tol = 1e-9

    [output]
    csv = sweep.csv
"""

import configparser
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hamiltonians as ham
from . import paths as pth
from .combiner import Branch, CombinationPlan, combine, cost, norm_integral, predict_combined
from .propagation import IntegratorOptions, evolve, ground_state
from .schemes import (SchemeSolution, four_unitary_scheme, solve_complete, solve_partial,
                      symmetric_all, three_level_times)
from .spectral import gap_integral, track

SCHEMES = ("none", "partial", "complete", "symmetric_all", "three_level", "four_unitary", "bc_hybrid")


@dataclass
class ExperimentConfig:
    family: dict
    path: dict
    scheme: dict = field(default_factory=lambda: {"kind": "none"})
    T_min: float = 50.0
    T_max: float = 2000.0
    points: int = 12
    phase_samples: int = 4
    levels: list = None
    integrator: dict = field(default_factory=dict)
    output: str = None
    workers: int = 1

    def __post_init__(self):
        if self.scheme.get("kind", "none") not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme.get('kind')!r}")
        if self.points < 4:
            raise ValueError("at least 4 T points are needed for slope fits")
        if not 0 < self.T_min < self.T_max:
            raise ValueError("need 0 < T_min < T_max")
        delta = float(self.scheme.get("delta", 0.2))
        if not 0 < delta <= 0.5:
            raise ValueError("delta must lie in (0, 0.5]")
        if self.phase_samples < 1:
            raise ValueError("phase_samples must be >= 1")

    @property
    def T_grid(self):
        return np.geomspace(self.T_min, self.T_max, self.points)


def _section(cp, name):
    return dict(cp[name]) if cp.has_section(name) else {}


def load_config(text_or_path):
    """Parse an INI config given as a file path or as the text itself."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if "\n" in str(text_or_path) or "[" in str(text_or_path):
        cp.read_string(str(text_or_path))
    else:
        with open(text_or_path) as fh:
            cp.read_file(fh)
    sweep = _section(cp, "sweep")
    out = _section(cp, "output")
    levels = sweep.get("levels")
    return ExperimentConfig(
        family=_section(cp, "family") or {"kind": "search", "n": "5"},
        path=_section(cp, "path") or {"kind": "linear"},
        scheme=_section(cp, "scheme") or {"kind": "none"},
        T_min=float(sweep.get("t_min", 50.0)),
        T_max=float(sweep.get("t_max", 2000.0)),
        points=int(sweep.get("points", 12)),
        phase_samples=int(sweep.get("phase_samples", 4)),
        levels=[int(x) for x in levels.split(",")] if levels else None,
        integrator=_section(cp, "integrator"),
        output=out.get("csv"),
        workers=int(sweep.get("workers", 1)),
    )


def build_family(spec):
    kind = spec.get("kind", "search").lower()
    if kind == "search":
        return ham.Search(int(spec.get("n", 5)))
    if kind == "sin_bridge":
        return ham.SinBridge()
    if kind in ("linear_interp", "custom_table"):
        H0, H1 = ham.read_matrix(spec["h0"]), ham.read_matrix(spec["h1"])
        if kind == "custom_table":
            return ham.CustomTable(H0, H1, source=(spec["h0"], spec["h1"]))
        return ham.LinearInterp(H0, H1)
    raise ValueError(f"unknown family kind {kind!r}")


def build_path(spec):
    kind = spec.get("kind", "linear").lower()
    if kind == "lae":
        return pth.lae_path(int(spec.get("n", 5)))
    if kind == "linear":
        return pth.linear()
    if kind == "smoothstep":
        return pth.smoothstep()
    if kind == "json":
        with open(spec["file"]) as fh:
            return pth.path_from_json(fh.read())
    raise ValueError(f"unknown path kind {kind!r}")


def integrator_options(spec):
    kw = {}
    if "r" in spec:
        kw["r"] = int(spec["r"])
    if "order" in spec:
        kw["order"] = int(spec["order"])
    if "tol" in spec:
        kw["tol"] = float(spec["tol"])
    if "max_doublings" in spec:
        kw["max_doublings"] = int(spec["max_doublings"])
    return IntegratorOptions(**kw)


class SchemeBuilder:
    """Builds the combination for a given base time, reusing tracks across times."""

    def __init__(self, family, f_A, scheme):
        self.family = family
        self.f_A = f_A
        self.kind = scheme.get("kind", "none").lower()
        self.delta = float(scheme.get("delta", 0.2))
        self.level = int(scheme.get("level", 1))
        self.m = int(scheme.get("m", 1)) if self.kind == "bc_hybrid" else 0
        self.n = scheme.get("n")
        self.tracks = None
        if self.kind == "none":
            self.tracks = [track(family, f_A)]
        elif self.kind == "partial":
            self.tracks = solve_partial(family, f_A, 100.0, self.level, delta=self.delta).tracks
        elif self.kind == "complete":
            self.tracks = solve_complete(family, f_A, 100.0, self.level, delta=self.delta).tracks
        elif self.kind == "bc_hybrid":
            self.tracks = solve_complete(family, f_A, 100.0, self.level, delta=self.delta, m=self.m).tracks
        elif self.kind == "symmetric_all":
            self.tracks = symmetric_all(family, f_A, self.delta, 100.0).tracks
        elif self.kind in ("three_level", "four_unitary"):
            f_B = pth.partial_antisym_dual(f_A, self.delta)
            self.tracks = [track(family, f_A), track(family, f_B)]
        self.G = gap_integral(self.tracks[0], self.level)

    def solution(self, T):
        fam, k = self.family, self.kind
        n = None if self.n is None else int(self.n)
        if k == "none":
            plan = CombinationPlan([Branch(self.f_A, float(T), 1.0, "A")], 0.0)
            return SchemeSolution(plan, [self.level], None, {}, self.tracks)
        if k == "partial":
            return solve_partial(fam, self.f_A, T, self.level, n or 0, tracks=self.tracks)
        if k in ("complete", "bc_hybrid"):
            return solve_complete(fam, self.f_A, T, self.level, n, m=self.m, tracks=self.tracks)
        if k == "symmetric_all":
            return symmetric_all(fam, self.f_A, self.delta, T, tracks=self.tracks)
        if k == "four_unitary":
            return four_unitary_scheme(fam, self.f_A, self.tracks[1].path, T, tracks=self.tracks)
        if k == "three_level":
            return self._three_level(T)
        raise ValueError(k)

    def _three_level(self, T):
        tr_A, tr_B = self.tracks
        G = np.array([[gap_integral(tr_A, 1), gap_integral(tr_B, 1)],
                      [gap_integral(tr_A, 2), gap_integral(tr_B, 2)]])
        # integer pair whose solution has T_A closest to the requested time
        best = None
        for i in range(65):
            for j in range(65):
                try:
                    TA, TB = three_level_times(G, i, j)
                except Exception:
                    continue
                if best is None or abs(TA - T) < abs(best[0] - T):
                    best = (TA, TB, (i, j))
        TA, TB, nm = best
        theta = math.atan(math.sqrt(TB / TA))
        plan = CombinationPlan.two_branch(tr_A.path, TA, tr_B.path, TB, theta)
        return SchemeSolution(plan, [1, 2], nm, {"G": G.tolist()}, self.tracks)


@dataclass
class SweepRow:
    T: float
    cost: float
    p_success: float
    diabatic_error_amplitude: float
    diabatic_error_probability: float
    predicted: dict
    branch_times: list
    failure: str = ""

    def as_list(self, levels, n_branches):
        times = list(self.branch_times) + [float("nan")] * (n_branches - len(self.branch_times))
        return ([self.T, self.cost, self.p_success, self.diabatic_error_amplitude,
                 self.diabatic_error_probability]
                + [abs(self.predicted.get(n, float("nan"))) for n in levels] + times + [self.failure])


def _evaluate(builder, T, K, levels, opts, start, norm_cache):
    """Phase-averaged diabatic error around base time T."""
    probs, base = [], None
    for j in range(K):
        Tj = T + j * 2.0 * math.pi / (K * builder.G)
        sol = builder.solution(Tj)
        results = [evolve(builder.family, b.path, b.T, start, opts, tr=tr)
                   for b, tr in zip(sol.plan.branches, sol.tracks)]
        out = combine(results, sol.plan, sol.tracks[0])
        probs.append(out.diabatic_error**2)
        if j == 0:
            base = (sol, out)
    sol, out = base
    ints = [norm_cache.setdefault(id(b.path), norm_integral(builder.family, b.path)) for b in sol.plan.branches]
    c = cost(sol.plan, builder.family, out.p_success, ints)
    ms = [builder.m] * len(sol.tracks)
    pred = {n: predict_combined(builder.family, sol.plan, sol.tracks, n, ms) for n in levels}
    prob = float(np.mean(probs))
    return SweepRow(float(T), c, out.p_success, math.sqrt(prob), prob, pred, [b.T for b in sol.plan.branches])


def run_sweep(config):
    """Run every T of the config; returns (rows, fits)."""
    family = build_family(config.family)
    f_A = build_path(config.path)
    builder = SchemeBuilder(family, f_A, config.scheme)
    opts = integrator_options(config.integrator)
    start = ground_state(family)
    levels = config.levels or [builder.level]
    norm_cache = {}

    def job(T):
        try:
            return _evaluate(builder, T, config.phase_samples, levels, opts, start, norm_cache)
        except Exception as exc:  # keep the rest of the sweep
            nan = float("nan")
            return SweepRow(float(T), nan, nan, nan, nan, {}, [], f"{type(exc).__name__}: {exc}")

    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        rows = list(pool.map(job, config.T_grid))
    fits = {"amplitude_slope": fit_slope(rows)}
    if config.output:
        with open(config.output, "w", newline="") as fh:
            fh.write(rows_to_csv(rows, levels))
    return rows, fits


def fit_slope(rows, decades=1.0, x="cost"):
    """Least-squares slope of log amplitude against log cost over the top ``decades`` of T."""
    good = [r for r in rows if not r.failure and r.diabatic_error_amplitude > 0]
    if len(good) < 2:
        return float("nan")
    T_top = max(r.T for r in good)
    sel = [r for r in good if r.T >= T_top / 10.0**decades]
    xs = np.log([getattr(r, x) for r in sel])
    ys = np.log([r.diabatic_error_amplitude for r in sel])
    return float(np.polyfit(xs, ys, 1)[0])


def rows_to_csv(rows, levels):
    n_branches = max((len(r.branch_times) for r in rows), default=1)
    head = ["T", "cost", "p_success", "diabatic_error_amplitude", "diabatic_error_probability"]
    head += [f"predicted_{n}" for n in levels] + [f"T_{j}" for j in range(n_branches)] + ["failure"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                    for v in r.as_list(levels, n_branches)])
    return buf.getvalue()
