"""Green's-function transport through port-coupled site models.

Scattering amplitudes follow the Fisher-Lee form
``S_ab = delta_ab - 2i sqrt(Gamma_a Gamma_b) G_ab`` with the retarded
resolvent ``G = ((omega + i eta) I - H')^-1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lattice import EffectiveHamiltonian, LatticeSpec, PortSet, SiteGraph, attach_ports
from .spectra import chirality_from_probs

__all__ = [
    "ScatterResult",
    "default_eta",
    "greens_function",
    "s_matrix",
    "ldos",
    "chirality_from_ldos",
    "scatter",
    "frequency_sweep",
    "gamma_sweep",
    "edge_reflectance_closed_form",
    "w_f_approx",
]


def default_eta(spec: LatticeSpec) -> float:
    """Retarded regulariser ``1e-6 * max(t2, |V|)``."""
    return 1e-6 * max(spec.t2, abs(spec.V))


@dataclass(frozen=True)
class ScatterResult:
    """Transport quantities at one frequency.

    ``S`` is indexed in the order of ``ports``; ``ldos`` is per site (1/Hz).
    """

    omega: float
    S: np.ndarray
    ports: tuple
    ldos: np.ndarray
    chirality: float

    def s(self, a: int, b: int) -> complex:
        """Entry ``S_ab`` addressed by site indices."""
        return complex(self.S[self.ports.index(a), self.ports.index(b)])


def _matrix(h) -> np.ndarray:
    if isinstance(h, EffectiveHamiltonian):
        return h.matrix
    if isinstance(h, SiteGraph):
        return h.matrix().astype(complex)
    return np.asarray(h, dtype=complex)


def greens_function(h, omega: float, eta: float = 0.0, check: bool = True) -> np.ndarray:
    """Retarded Green's function by dense LU factorisation.

    Parameters
    ----------
    h : EffectiveHamiltonian, SiteGraph or ndarray
        System Hamiltonian (ports already folded in).
    omega : float or complex
        Probe frequency (Hz).
    eta : float
        Positive imaginary shift added to ``omega``.
    check : bool
        Verify the residual ``||A G - I||_max < 1e-10``.

    Raises
    ------
    np.linalg.LinAlgError
        If ``(omega + i eta) I - H'`` is singular.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    H = _matrix(h)
    n = H.shape[0]
    A = (omega + 1j * eta) * np.eye(n) - H
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
            if np.any(np.diag(lu) == 0):
                raise np.linalg.LinAlgError("exactly singular")
            G = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=complex), check_finite=False)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise np.linalg.LinAlgError(
                f"resolvent singular at omega={omega!r} Hz (eta={eta}); "
                "probe off the spectrum or use eta > 0"
            ) from exc
    if check:
        res = np.abs(A @ G - np.eye(n)).max()
        if not res < 1e-10:
            raise np.linalg.LinAlgError(
                f"resolvent residual {res:.2e} at omega={omega!r} Hz; increase eta"
            )
    return G


def s_matrix(G: np.ndarray, ports: PortSet) -> np.ndarray:
    """Fisher-Lee S-matrix restricted to the port sites."""
    if len(ports) == 0:
        raise ValueError("s_matrix needs at least one port")
    idx = list(ports.sites)
    sq = np.sqrt(ports.gamma_vector())
    return np.eye(len(idx)) - 2j * np.outer(sq, sq) * G[np.ix_(idx, idx)]


def ldos(G: np.ndarray) -> np.ndarray:
    """Local density of states ``-Im G_nn / pi`` (1/Hz)."""
    return -np.diagonal(G).imag / np.pi


def chirality_from_ldos(rho, M: int, qubit: int | None = None) -> float:
    """Chirality of an LDOS vector; site ``M`` and the qubit are excluded."""
    return chirality_from_probs(rho, M, qubit)


def scatter(heff: EffectiveHamiltonian, omega: float, eta: float = 0.0) -> ScatterResult:
    """All transport quantities at a single frequency."""
    G = greens_function(heff, omega, eta)
    rho = ldos(G)
    chi = chirality_from_ldos(rho, heff.center, heff.qubit) if heff.center is not None else math.nan
    S = s_matrix(G, heff.ports) if len(heff.ports) else np.zeros((0, 0), complex)
    return ScatterResult(float(omega), S, tuple(heff.ports.sites), rho, chi)


def frequency_sweep(heff: EffectiveHamiltonian, omega_grid, eta: float = 0.0) -> list[ScatterResult]:
    """``scatter`` at every point of ``omega_grid``."""
    grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    if not np.all(np.isfinite(grid)):
        raise ValueError("frequency grid must be finite")
    return [scatter(heff, w, eta) for w in grid]


def gamma_sweep(g: SiteGraph, sites, gammas, omega: float, eta: float = 0.0) -> list[ScatterResult]:
    """Equal broadening ``Gamma`` on every site in ``sites``, swept over ``gammas``."""
    out = []
    for gam in np.atleast_1d(np.asarray(gammas, dtype=float)):
        heff = attach_ports(g, PortSet(tuple(sites), (gam,) * len(sites)))
        out.append(scatter(heff, omega, eta))
    return out


def edge_reflectance_closed_form(V: float, gamma: float, w_f: float) -> tuple[complex, complex]:
    """Reflectances at the edge-state pole seen from the two chain ends.

    Parameters
    ----------
    V : float
        Signed frequency of the edge state (Hz), i.e. ``VQ = +V`` or ``-V``.
    gamma : float
        Port broadening (Hz).
    w_f : float
        Far-end chain weight.

    Returns
    -------
    S_facing, S_opposite : complex
        ``-1`` on the port the state faces and
        ``-(1 + i x) / (1 - i x)`` with ``x = 2V / (Gamma w_f)`` on the other.
        Without broadening the opposite port reflects ``+1``.
    """
    if gamma < 0 or w_f <= 0:
        raise ValueError("need gamma >= 0 and w_f > 0")
    if gamma == 0:
        return -1 + 0j, 1 + 0j
    x = 2 * V / (gamma * w_f)
    return -1 + 0j, complex(-(1 + 1j * x) / (1 - 1j * x))


def w_f_approx(t1: float, t2: float, p: int) -> float:
    """Edge-state far weight ``(t2^2 - t1^2) / (t2^2 (t2/t1)^(2p) - t1^2)``."""
    if t1 <= 0 or t2 <= 0:
        raise ValueError("couplings must be positive")
    if t1 == t2:
        raise ValueError("w_f approximation is degenerate for t1 == t2")
    if t2 < t1:
        raise ValueError("w_f approximation requires t2 > t1")
    return (t2 * t2 - t1 * t1) / (t2 * t2 * (t2 / t1) ** (2 * p) - t1 * t1)
