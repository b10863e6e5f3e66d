import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiralwg.lattice import LatticeSpec, build_ssh_chain, build_y_coupler, mirror_permutation
from chiralwg.presets import PSTD
from chiralwg.spectra import (
    anticrossing_gap_3level,
    anticrossing_gap_3level_exact,
    chirality_from_probs,
    eigendecompose,
    find_gap_states,
    four_site_gap,
    lzsm_probability,
    occupation,
    sweep_vq,
)

MHz = 1e6


def _edge(spec, target):
    s = eigendecompose(build_y_coupler(spec))
    k = int(np.argmin(np.abs(s.eigenvalues - target)))
    return s.eigenvalues[k], s.eigenvectors[:, k]


def test_pstd_contains_edge_eigenvalue():
    s = eigendecompose(build_y_coupler(PSTD))
    assert len(s) == 44
    assert np.min(np.abs(s.eigenvalues + 37.5 * MHz)) < 1e-6 * MHz


def test_dimer_spectrum():
    s = eigendecompose(build_ssh_chain(1, 2.0, 2.0))
    assert np.allclose(s.eigenvalues, [-2.0, 2.0])


def test_eigendecompose_accepts_matrix_and_rejects_asymmetric():
    assert len(eigendecompose(np.eye(3))) == 3
    with pytest.raises(ValueError):
        eigendecompose(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_tq_zero_spectrum_is_union():
    spec = PSTD.replace(tQ=0.0)
    H = build_y_coupler(spec).matrix()
    s = eigendecompose(H)
    chain = np.linalg.eigvalsh(H[:-1, :-1])
    assert np.allclose(s.eigenvalues, np.sort(np.append(chain, spec.VQ)), atol=1e-6)


@pytest.mark.parametrize("vq", [-37.5 * MHz, 37.5 * MHz])
def test_two_gap_states_at_edge_tuning(vq):
    spec = PSTD.replace(VQ=vq)
    rep = find_gap_states(eigendecompose(build_y_coupler(spec)), spec)
    assert len(rep.in_gap) == 2
    assert rep.gap_upper == pytest.approx(math.hypot(30 * MHz, 37.5 * MHz))


def test_closed_gap_reports_nothing():
    spec = LatticeSpec(p=4, V=0.0, t1=1.0, t2=1.0, tQ=0.3)
    rep = find_gap_states(eigendecompose(build_y_coupler(spec)), spec)
    assert rep.gap_upper == rep.gap_lower == 0.0
    assert rep.in_gap == ()


def test_pstd_vq_zero_gap_pair():
    # symmetric pair of gap states; their energy exceeds the small-cell
    # estimate tQ V/(sqrt2 t1) = 13.81 MHz because the arms are long
    spec = PSTD.replace(VQ=0.0)
    rep = find_gap_states(eigendecompose(build_y_coupler(spec)), spec)
    e = np.sort(rep.energies)
    assert e.size == 2
    assert e[0] == pytest.approx(-e[1], rel=1e-9)
    assert e[1] == pytest.approx(17.84 * MHz, rel=1e-3)


def test_occupation_of_edge_states():
    m = PSTD.center
    _, v = _edge(PSTD, -PSTD.V)
    P = occupation(v)
    assert P.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(P[m + 1:PSTD.n_chain] < 1e-20)
    spec_r = PSTD.replace(VQ=PSTD.V)
    _, vr = _edge(spec_r, PSTD.V)
    Pr = occupation(vr)
    perm = mirror_permutation(PSTD)
    assert np.allclose(P[perm], Pr, atol=1e-12)


def test_occupation_basis_vector_and_zero():
    e = np.zeros(5)
    e[3] = -1.0
    assert np.array_equal(occupation(e), np.eye(5)[3])
    with pytest.raises(ValueError):
        occupation(np.zeros(3))


def test_occupation_raw_floor_keeps_noise():
    _, v = _edge(PSTD, -PSTD.V)
    raw = occupation(v, floor=0.0)
    assert raw[PSTD.center + 1:PSTD.n_chain].sum() < 1e-18


def test_chirality_sentinels():
    _, v = _edge(PSTD, -PSTD.V)
    assert chirality_from_probs(occupation(v), PSTD.center, PSTD.qubit) == math.inf
    P = np.array([1.0, 2.0, 5.0, 2.0, 1.0])
    assert chirality_from_probs(P, 2) == pytest.approx(1.0)
    assert chirality_from_probs(np.zeros(4), 1) == math.inf


def test_chirality_excludes_center_and_qubit():
    P = np.array([3.0, 0.0, 100.0, 1.0, 50.0])
    assert chirality_from_probs(P, 2, qubit=4) == pytest.approx(3.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-6, 1.0), min_size=5, max_size=12), st.floats(1e-3, 1e3))
def test_chirality_scale_invariant(P, c):
    P = np.array(P)
    M = len(P) // 2
    assert chirality_from_probs(c * P, M) == pytest.approx(chirality_from_probs(P, M), rel=1e-12)


def test_sweep_anticrossing_at_zero():
    grid = np.linspace(-2 * PSTD.V, 2 * PSTD.V, 81)
    sw = sweep_vq(PSTD, grid)
    assert sw.eigenvalues.shape == (81, 44)
    # the two in-gap branches are closest at VQ = 0
    spread = [np.ptp(sw.gap_energies(i)) if sw.in_gap[i].sum() == 2 else np.inf
              for i in range(81)]
    assert int(np.argmin(spread)) == 40
    counts = sw.in_gap.sum(axis=1)
    window = np.abs(grid) <= 1.5 * PSTD.V
    assert np.all(counts[window] == 2)


def test_sweep_single_point():
    sw = sweep_vq(PSTD, [0.0])
    assert sw.eigenvalues.shape == (1, 44)


def test_four_site_gap_values():
    E0 = four_site_gap(37.5 * MHz, 120 * MHz, 62.5 * MHz)
    assert E0 == pytest.approx(13.81 * MHz, rel=1e-3)
    assert four_site_gap(1.0, 2.0, 0.0) == 0.0
    assert four_site_gap(3.0, 4.0, 5.0) * 7 == pytest.approx(four_site_gap(21.0, 28.0, 35.0))


def test_four_site_gap_against_exact_cell():
    spec = LatticeSpec(p=0, V=37.5 * MHz, t1=120 * MHz, t2=150 * MHz, tQ=62.5 * MHz, VQ=0.0)
    w = np.linalg.eigvalsh(build_y_coupler(spec).matrix())
    inner = np.sort(np.abs(w))[:2]
    exact = inner.mean()
    assert four_site_gap(spec.V, spec.t1, spec.tQ) == pytest.approx(exact, rel=0.10)


def test_four_site_asymptotes():
    # far from the qubit level the outer band states settle near +-sqrt2 t1
    spec = LatticeSpec(p=0, V=37.5 * MHz, t1=120 * MHz, t2=150 * MHz, tQ=62.5 * MHz)
    sw = sweep_vq(spec, [-1e3 * spec.t1, 1e3 * spec.t1])
    for i, row in enumerate(sw.eigenvalues):
        band = np.delete(row, np.argmax(np.abs(row - sw.vq[i]) < 10 * spec.t1))
        assert band.max() == pytest.approx(math.sqrt(2) * spec.t1, rel=0.05)
        assert band.min() == pytest.approx(-math.sqrt(2) * spec.t1, rel=0.05)


def test_three_level_gaps():
    assert anticrossing_gap_3level(10, 0, 1, 1) == pytest.approx(0.2)
    assert anticrossing_gap_3level(10, 0, 0, 0) == 0.0
    exact = anticrossing_gap_3level_exact(10, 0, 1, 1)
    w = np.linalg.eigvalsh(np.array([[0, -1, 0], [-1, 10, -1], [0, -1, 0]], float))
    assert exact == pytest.approx(w[1] - w[0], rel=1e-12)
    assert exact == pytest.approx(0.2, abs=0.2 * (2 / 10) ** 2)
    # coupler below the qubit: both forms carry the sign of VC - VS
    w = np.linalg.eigvalsh(np.array([[0, -1, 0], [-1, -10, -1], [0, -1, 0]], float))
    assert anticrossing_gap_3level_exact(-10, 0, 1, 1) == pytest.approx(-(w[2] - w[1]), rel=1e-12)
    assert anticrossing_gap_3level(-10, 0, 1, 1) == pytest.approx(-0.2)
    with pytest.raises(ValueError):
        anticrossing_gap_3level(1, 1, 1, 1)


def test_lzsm_limits():
    assert lzsm_probability(0.0, 1.0) == 1.0
    assert lzsm_probability(13.8e6, 1e30) == pytest.approx(1.0, abs=1e-12)
    assert lzsm_probability(1.0, 1.0) == pytest.approx(math.exp(-math.pi))
    with pytest.raises(ValueError):
        lzsm_probability(1.0, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e3, 1e8), st.floats(1e3, 1e8), st.floats(1e12, 1e18), st.floats(1.01, 10))
def test_lzsm_monotone(e_a, e_b, v, k):
    lo, hi = sorted((e_a, e_b))
    assert lzsm_probability(hi, v) <= lzsm_probability(lo, v)
    assert lzsm_probability(lo, k * v) >= lzsm_probability(lo, v)
