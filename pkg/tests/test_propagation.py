import numpy as np
import pytest
from scipy.linalg import expm

from ccadiabatic.errors import IntegratorError
from ccadiabatic.hamiltonians import LinearInterp, Search, SinBridge
from ccadiabatic.paths import lae_path, linear, partial_antisym_dual
from ccadiabatic.propagation import (IntegratorOptions, evolve, ground_overlap_error, ground_state, level_amplitudes,
                                     reference_evolve)
from ccadiabatic.spectral import SpectralTrack, gap_integral, track

Z = np.diag([1.0, -1.0])


def test_sigma_z_closed_form():
    fam = LinearInterp(Z, Z)
    res = evolve(fam, linear(), np.pi, np.array([1.0, 0.0]))
    assert np.allclose(res.final_state, [np.exp(-1j * np.pi), 0], atol=1e-12)
    # ground energy is -1, so the counter-rotation undoes the +1 phase twice over
    assert np.allclose(res.counter_rotated_state, [1.0, 0.0], atol=1e-12)
    assert res.dynamical_phase == pytest.approx(-np.pi)


def test_tiny_time_is_identity():
    start = ground_state(Search(5))
    res = evolve(Search(5), lae_path(5), 1e-12, start)
    assert np.linalg.norm(res.final_state - start) < 1e-10


def test_counter_rotation_definition():
    res = evolve(SinBridge(), lae_path(5), 7.0, ground_state(SinBridge()))
    assert np.array_equal(res.counter_rotated_state, np.exp(1j * res.dynamical_phase) * res.final_state)


def test_search_linear_against_reference():
    fam, path = Search(5), linear()
    start = ground_state(fam)
    res = evolve(fam, path, 50.0, start)
    ref = reference_evolve(fam, path, 50.0, start, 2**17)
    assert np.linalg.norm(res.final_state - ref) < 1e-8
    assert abs(np.linalg.norm(res.final_state) - 1) < 1e-10


def test_search_lae_regression():
    fam = Search(5)
    psi = reference_evolve(fam, lae_path(5), 100.0, ground_state(fam), 2**17)
    assert np.allclose(np.abs(psi), [0.99985938, 0.00838482, 0.00838482, 0.00838482, 0.00838482], atol=1e-8)
    res = evolve(fam, lae_path(5), 100.0, ground_state(fam))
    assert np.linalg.norm(res.final_state - psi) < 1e-8


def test_breakpoint_path_against_reference():
    fam, path = SinBridge(), partial_antisym_dual(lae_path(5), 0.2)
    start = ground_state(fam)
    res = evolve(fam, path, 30.0, start)
    ref = reference_evolve(fam, path, 30.0, start, 2**17)
    assert np.linalg.norm(res.final_state - ref) < 1e-7


def test_reference_single_step():
    H = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, -0.4]])
    psi = np.array([0.6, 0.8j])
    out = reference_evolve(LinearInterp(H, H), linear(), 2.5, psi, 1)
    assert np.allclose(out, expm(-2.5j * H) @ psi, atol=1e-14)


def test_reference_second_order():
    fam, path = Search(5), lae_path(5)
    start = ground_state(fam)
    a, b, c = (reference_evolve(fam, path, 20.0, start, r) for r in (256, 512, 1024))
    ratio = np.linalg.norm(a - b) / np.linalg.norm(b - c)
    assert 3.5 < ratio < 4.5


def test_stationary_state_has_no_error():
    H = np.diag([-1.0, 0.5, 2.0])
    fam = LinearInterp(H, H)
    tr = track(fam, linear(), 65)
    res = evolve(fam, linear(), 40.0, ground_state(fam), tr=tr)
    assert ground_overlap_error(res, tr) < 1e-10


def test_overlap_error_gauge_invariant():
    fam, path = Search(5), lae_path(5)
    tr = track(fam, path)
    res = evolve(fam, path, 60.0, ground_state(fam), tr=tr)
    V = tr.vectors * np.exp(1j * np.linspace(0, 5, tr.dim))
    tr2 = SpectralTrack(fam, path, tr.s.copy(), tr.energies.copy(), V, tr.slices, tr.grid_points)
    assert ground_overlap_error(res, tr2) == pytest.approx(ground_overlap_error(res, tr), abs=1e-12)
    amps = level_amplitudes(res, tr)
    assert np.sqrt(np.sum(np.abs(amps[1:]) ** 2)) == pytest.approx(ground_overlap_error(res, tr), abs=1e-12)


def test_non_convergence():
    with pytest.raises(IntegratorError):
        evolve(Search(5), lae_path(5), 500.0, ground_state(Search(5)),
               IntegratorOptions(r=16, tol=1e-15, max_doublings=1))


def test_options_validated():
    with pytest.raises(ValueError):
        IntegratorOptions(r=8)
    with pytest.raises(ValueError):
        IntegratorOptions(order=3)
    with pytest.raises(ValueError):
        evolve(Search(3), linear(), 1.0, np.array([1.0, 1.0, 0.0]))


def test_second_order_option_agrees():
    fam, path = SinBridge(), lae_path(5)
    start = ground_state(fam)
    a = evolve(fam, path, 25.0, start, IntegratorOptions(order=2)).final_state
    b = evolve(fam, path, 25.0, start).final_state
    assert np.linalg.norm(a - b) < 1e-8


def test_single_path_error_halves_with_time():
    # phase-averaged first-order amplitude on a fixed path falls like 1/T
    fam, path = Search(5), lae_path(5)
    tr = track(fam, path)
    start = ground_state(fam)
    G = gap_integral(tr, 1)

    def rms(T):
        errs = [ground_overlap_error(evolve(fam, path, T + j * np.pi / (2 * G), start, tr=tr), tr) for j in range(4)]
        return np.sqrt(np.mean(np.square(errs)))

    assert 0.4 <= rms(400.0) / rms(200.0) <= 0.6
