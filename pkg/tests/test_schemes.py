import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccadiabatic.acceptance import three_level_family
from ccadiabatic.errors import DuplicateBranches, IdenticalPaths, NoPositiveTimes, SingularSystem, SpectrumNotSymmetric
from ccadiabatic.hamiltonians import LinearInterp, Search, SinBridge
from ccadiabatic.paths import (bc_dual, complete_antisym_dual, lae_path, linear, partial_antisym_dual, smoothstep,
                               time_reversed)
from ccadiabatic.schemes import (four_unitary_scheme, nearest_complete_index, solve_complete, solve_partial,
                                 symmetric_all, three_level_times)
from ccadiabatic.spectral import gap_integral, track


def angle_identity(sol, m=0):
    T_A, T_B = sol.times
    c2, s2 = math.cos(sol.theta) ** 2, math.sin(sol.theta) ** 2
    return c2 / T_A ** (m + 1) - s2 / T_B ** (m + 1)


@pytest.fixture(scope="module")
def search_lae():
    fam, fA = Search(5), lae_path(5)
    fB = partial_antisym_dual(fA, 0.2)
    return fam, fA, [track(fam, fA), track(fam, fB)]


def test_equal_gap_integrals_shift_by_half_period():
    fam, f = Search(5), linear()
    # the reverse of a linear path is the same path, so both gap integrals coincide
    sol = solve_partial(fam, f, 100.0, f_B=time_reversed(f))
    G = sol.diagnostics["G_A"]
    assert sol.diagnostics["G_B"] == pytest.approx(G, abs=1e-12)
    assert sol.times[1] == pytest.approx(100.0 + math.pi / G, rel=1e-12)


def test_angle_identity_example():
    theta = math.atan(math.sqrt(104 / 100))
    assert math.tan(theta) ** 2 == pytest.approx(1.04, rel=1e-14)
    assert abs(math.cos(theta) ** 2 / 100 - math.sin(theta) ** 2 / 104) < 1e-15


def test_partial_search_lae(search_lae):
    fam, fA, tracks = search_lae
    sol = solve_partial(fam, fA, 80.0, tracks=tracks)
    G_A, G_B = sol.diagnostics["G_A"], sol.diagnostics["G_B"]
    T_A, T_B = sol.times
    assert T_B == pytest.approx(83.038698565259, rel=1e-8)
    assert sol.theta == pytest.approx(0.7947176517937047, rel=1e-8)
    assert abs(T_B - T_A * G_A / G_B - math.pi / G_B) < 1e-10
    assert abs(angle_identity(sol)) < 1e-12
    assert abs(sol.diagnostics["predicted_combined"]) < 1e-3 * sol.diagnostics["predicted_single"]
    assert 0 < sol.theta < math.pi / 2


@pytest.mark.parametrize("n", [0, 1, 3])
@pytest.mark.parametrize("T_A", [50.0, 137.0, 400.0])
def test_partial_invariants(search_lae, n, T_A):
    fam, fA, tracks = search_lae
    sol = solve_partial(fam, fA, T_A, n=n, tracks=tracks)
    G_A, G_B = sol.diagnostics["G_A"], sol.diagnostics["G_B"]
    assert abs(sol.times[1] - T_A * G_A / G_B - (2 * n + 1) * math.pi / G_B) < 1e-10
    assert abs(angle_identity(sol)) < 1e-12
    assert abs(sol.plan.weights.sum() - 1) < 1e-12


def test_complete_search_lae():
    fam, fA = Search(5), lae_path(5)
    sol = solve_complete(fam, fA, 80.0)
    assert sol.branch_index == 0
    assert sol.times[1] == pytest.approx(78.83911870652403, rel=1e-8)
    assert sol.theta == pytest.approx(0.7817438632544387, rel=1e-8)
    assert abs(angle_identity(sol)) < 1e-12
    with pytest.raises(NoPositiveTimes):
        solve_complete(fam, fA, 80.0, n=-10, tracks=sol.tracks)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(1.0, 1e4))
def test_nearest_complete_index_minimises_offset(G_A, G_B, T_A):
    n = nearest_complete_index(G_A, G_B, T_A)
    T_B = (G_A * T_A + 2 * n * math.pi) / G_B
    assert T_B > 0
    if (G_A * T_A + 2 * (n - 1) * math.pi) > 0:
        assert abs(T_B - T_A) <= math.pi / G_B * (1 + 1e-9)


def test_complete_equal_integrals():
    n = nearest_complete_index(0.7, 0.7, 123.0)
    assert n == 0


def test_complete_refuses_identical_paths():
    f = lae_path(5)
    with pytest.raises(IdenticalPaths):
        solve_complete(Search(5), f, 80.0, f_B=lae_path(5))


def test_complete_weights_for_flat_paths():
    fam, fA = Search(5), smoothstep()
    sol = solve_complete(fam, fA, 200.0, m=1, f_B=bc_dual(fA, 1, 0.2))
    assert abs(angle_identity(sol, m=1)) < 1e-12


def test_symmetric_all_sin_bridge():
    fam = SinBridge()
    sol = symmetric_all(fam, linear(), 0.1, 50.0)
    assert sol.plan.theta == pytest.approx(math.pi / 4)
    assert sol.times[0] == sol.times[1] == 50.0
    for n, (GA, GB) in sol.diagnostics["gap_integrals"].items():
        assert GA == pytest.approx(GB, abs=1e-8)
    for n, (comb, single) in sol.predicted_amplitudes(fam).items():
        assert abs(comb) <= 0.05 * single + 1e-12


def test_symmetric_all_search():
    fam = Search(5)
    sol = symmetric_all(fam, lae_path(5), 0.2, 80.0, levels=[1])
    comb, single = sol.predicted_amplitudes(fam)[1]
    assert abs(comb) <= 0.05 * single


def test_symmetric_all_rejects_asymmetric_spectrum():
    fam = LinearInterp(np.diag([0.0, 1.0, 3.0]), np.array([[0.0, 0.5, 0], [0.5, 2.0, 0.1], [0, 0.1, 1.0]]))
    with pytest.raises(SpectrumNotSymmetric):
        symmetric_all(fam, linear(), 0.2, 50.0)


def test_three_level_identity():
    assert three_level_times(np.eye(2), 0, 0) == pytest.approx((math.pi, math.pi))
    assert three_level_times(np.eye(2)) == pytest.approx((math.pi, math.pi))


def test_three_level_singular():
    with pytest.raises(SingularSystem):
        three_level_times([[1.0, 1.0], [1.0, 1.0]])


def test_three_level_no_positive_times():
    with pytest.raises(NoPositiveTimes):
        three_level_times([[1.0, 0.0], [0.0, -1.0]], max_index=8)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.5, 2.0), min_size=4, max_size=4))
def test_three_level_residual(entries):
    G = np.array(entries).reshape(2, 2)
    if abs(np.linalg.det(G)) < 1e-3:
        return
    try:
        (T_A, T_B), (n, m) = three_level_times(G, full_output=True)
    except NoPositiveTimes:
        return
    rhs = np.array([(2 * n + 1) * math.pi, (2 * m + 1) * math.pi])
    assert T_A > 0 and T_B > 0
    assert np.allclose([T_A, T_B], np.linalg.solve(G, rhs), rtol=1e-10, atol=0)
    assert np.max(np.abs(G @ [T_A, T_B] - rhs)) < 1e-10 * np.max(rhs)


@pytest.fixture(scope="module")
def three_level():
    fam = three_level_family()
    fA = lae_path(5)
    fB = partial_antisym_dual(fA, 0.2)
    return fam, fA, fB, [track(fam, fA), track(fam, fB)]


def test_four_unitary(three_level):
    fam, fA, fB, tracks = three_level
    sol = four_unitary_scheme(fam, fA, fB, 60.0, tracks=tracks)
    w = sol.plan.weights
    assert np.all(w > 0) and abs(w.sum() - 1) < 1e-12
    for n, (comb, single) in sol.predicted_amplitudes(fam).items():
        assert abs(comb) < 0.05 * single
    # first pair alone cancels e1 through the two-level relation
    g1A, g1B = sol.diagnostics["gap_integrals"][1]
    T_A, T_B, T_C, T_D = sol.times
    assert T_B == pytest.approx((g1A * T_A + math.pi) / g1B, rel=1e-12)
    assert w[1] / w[0] == pytest.approx(T_B / T_A, rel=1e-12)
    assert w[3] / w[2] == pytest.approx(T_D / T_C, rel=1e-12)


def test_four_unitary_duplicate(three_level):
    fam, fA, fB, tracks = three_level
    with pytest.raises(DuplicateBranches):
        four_unitary_scheme(fam, fA, fB, 60.0, T_C=60.0, tracks=tracks)


def test_supplied_tracks_must_match_paths(search_lae):
    fam, fA, tracks = search_lae
    with pytest.raises(ValueError):
        solve_partial(fam, lae_path(5), 80.0, f_B=complete_antisym_dual(fA, 0.2), tracks=tracks)


def test_solution_record_is_plain():
    fam, fA = Search(5), lae_path(5)
    sol = solve_partial(fam, fA, 80.0)
    rec = json.loads(json.dumps(sol.to_record()))
    assert rec["branch_index"] == 0
    assert sum(b["weight"] for b in rec["plan"]["branches"]) == pytest.approx(1.0, abs=1e-12)
    assert gap_integral(sol.tracks[0], 1) == rec["diagnostics"]["G_A"]
