"""Eigen-analysis of closed site models and closed-form gap formulas."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lattice import LatticeSpec, SiteGraph, build_y_coupler

__all__ = [
    "Spectrum",
    "GapReport",
    "VQSweep",
    "eigendecompose",
    "find_gap_states",
    "occupation",
    "chirality_from_probs",
    "sweep_vq",
    "four_site_gap",
    "anticrossing_gap_3level",
    "anticrossing_gap_3level_exact",
    "lzsm_probability",
]

# denominators below this are treated as an exactly empty side
CHI_FLOOR = 1e-300


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues (Hz) and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __len__(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class GapReport:
    """Band edges and the eigenpairs lying strictly inside the gap."""

    gap_lower: float
    gap_upper: float
    in_gap: tuple  # of (eigenvalue, index)

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for e, _ in self.in_gap])

    @property
    def indices(self) -> list[int]:
        return [k for _, k in self.in_gap]


def eigendecompose(g) -> Spectrum:
    """Full spectrum of a real symmetric site model.

    Parameters
    ----------
    g : SiteGraph or ndarray
        Site model or its dense real symmetric matrix.

    Raises
    ------
    RuntimeError
        If the symmetric eigensolver fails to converge.
    """
    H = g.matrix() if isinstance(g, SiteGraph) else np.asarray(g, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("Hamiltonian must be square")
    if not np.allclose(H, H.T, rtol=0, atol=0):
        raise ValueError("Hamiltonian must be symmetric")
    try:
        w, v = scipy.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        scale = np.abs(H).max() if H.size else 0.0
        raise RuntimeError(
            f"eigh failed for {H.shape[0]}x{H.shape[0]} matrix "
            f"(max |H| = {scale:.3e}, finite = {np.all(np.isfinite(H))}): {exc}"
        ) from exc
    return Spectrum(w, v)


def find_gap_states(s: Spectrum, spec: LatticeSpec) -> GapReport:
    """Eigenpairs strictly inside the closed-form gap ``[-Delta, Delta]``.

    A margin of ``1e-9 * Delta`` keeps states sitting on a band edge out.
    """
    delta = spec.gap
    margin = 1e-9 * delta
    lo, hi = -delta, delta
    inside = [
        (float(e), k)
        for k, e in enumerate(s.eigenvalues)
        if lo + margin < e < hi - margin
    ]
    return GapReport(lo, hi, tuple(inside))


def occupation(v, floor: float | None = None) -> np.ndarray:
    """Site occupation probabilities ``|v_n|^2``, normalised to unit sum.

    Parameters
    ----------
    v : array_like
        State vector.
    floor : float, optional
        Amplitudes with ``|v_n| <= floor * max|v|`` are set to exactly zero.
        Defaults to ``16 * n * eps``, the rounding noise left by a dense
        eigensolver; pass ``0`` to keep raw values.
    """
    v = np.asarray(v)
    a = np.abs(v)
    amax = a.max() if a.size else 0.0
    if amax == 0:
        raise ValueError("occupation of a zero vector is undefined")
    if floor is None:
        floor = 16 * a.size * np.finfo(float).eps
    a = np.where(a <= floor * amax, 0.0, a)
    P = a * a
    return P / P.sum()


def chirality_from_probs(P, M: int, qubit: int | None = None) -> float:
    """Ratio of weight left of site ``M`` to weight right of it.

    The qubit site, when given, is excluded from both sums. Returns
    ``inf`` when the right-hand weight is below ``1e-300`` relative to the
    total (including an all-zero input).
    """
    P = np.asarray(P, dtype=float)
    mask = np.ones(P.size, dtype=bool)
    if qubit is not None:
        mask[qubit] = False
    idx = np.arange(P.size)
    total = P[mask].sum()
    if not total > 0:
        return math.inf
    left = P[mask & (idx < M)].sum() / total
    right = P[mask & (idx > M)].sum() / total
    if right < CHI_FLOOR:
        return math.inf
    return float(left / right)


@dataclass(frozen=True)
class VQSweep:
    """Spectra of a Y-coupler across a grid of qubit potentials."""

    vq: np.ndarray
    eigenvalues: np.ndarray  # (n_vq, n_sites)
    in_gap: np.ndarray  # bool, same shape
    spectra: tuple

    def gap_energies(self, i: int) -> np.ndarray:
        return self.eigenvalues[i][self.in_gap[i]]


def sweep_vq(spec: LatticeSpec, vq_grid) -> VQSweep:
    """Diagonalise the Y-coupler at each qubit potential in ``vq_grid``."""
    vq = np.atleast_1d(np.asarray(vq_grid, dtype=float))
    if not np.all(np.isfinite(vq)):
        raise ValueError("VQ grid must be finite")
    spectra, evals, flags = [], [], []
    for x in vq:
        sp = spec.replace(VQ=float(x))
        s = eigendecompose(build_y_coupler(sp))
        rep = find_gap_states(s, sp)
        mask = np.zeros(len(s), dtype=bool)
        mask[rep.indices] = True
        spectra.append(s)
        evals.append(s.eigenvalues)
        flags.append(mask)
    return VQSweep(vq, np.array(evals), np.array(flags), tuple(spectra))


def four_site_gap(V: float, t1: float, tQ: float) -> float:
    """Inner-state energy ``E0 = tQ V / (sqrt(2) t1)`` of the 4-site cell at VQ = 0.

    The anticrossing full width is ``2 * E0``.
    """
    if t1 == 0:
        raise ValueError("t1 must be non-zero")
    return tQ * V / (math.sqrt(2.0) * t1)


def anticrossing_gap_3level(VC: float, VS: float, tQ: float, tc: float) -> float:
    """Perturbative splitting ``(tc^2 + tQ^2) / (VC - VS)`` of the 3-level model.

    Signed: negative when the coupler level lies below the qubit level.
    """
    if VC == VS:
        raise ValueError("VC must differ from VS")
    return (tc * tc + tQ * tQ) / (VC - VS)


def anticrossing_gap_3level_exact(VC: float, VS: float, tQ: float, tc: float) -> float:
    """Exact splitting ``(VS - VC + Vt) / 2`` with ``Vt = sqrt((VC-VS)^2 + 4 tQ^2 + 4 tc^2)``.

    ``Vt`` takes the sign of ``VC - VS`` so the result is signed like
    :func:`anticrossing_gap_3level`.
    """
    if VC == VS:
        raise ValueError("VC must differ from VS")
    Vt = math.sqrt((VC - VS) ** 2 + 4 * tQ * tQ + 4 * tc * tc)
    sgn = 1.0 if VC > VS else -1.0
    return (VS - VC + sgn * Vt) / 2


def lzsm_probability(E0: float, v: float) -> float:
    """Diabatic passage probability through an anticrossing.

    Parameters
    ----------
    E0 : float
        Anticrossing gap as an ordinary frequency (Hz).
    v : float
        Sweep rate of the diabatic level difference in Hz/s.

    Returns
    -------
    float
        ``exp(-pi E0^2 / v)``, identical to ``exp(-2 pi^2 E0^2 / (d omega/dt))``
        with the angular sweep rate ``d omega/dt = 2 pi v``.
    """
    if not v > 0:
        raise ValueError("sweep rate must be positive")
    return math.exp(-math.pi * E0 * E0 / v)
