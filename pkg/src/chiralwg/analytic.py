"""Closed-form Green's functions of the Rice-Mele Y-coupler.

The finite chains are handled through the bulk parameters ``a``, ``Q`` and
``F0`` of the infinite two-site-cell chain, from which three finite-chain
weights ``w_f`` (far end), ``w_n`` (near end) and ``w_c`` (end to end)
follow. Everything is evaluated at the complex frequency ``z = omega + i eta``.

Both chains have ``2p + 1`` sites. The right chain runs ``M+1 .. N`` with
``+V`` on its end sites, the left chain ``1 .. M-1`` with ``-V``, so their
bare Green's functions have single poles at ``+V`` and ``-V``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeSpec, PortSet, attach_ports, build_y_coupler
from .transport import greens_function, s_matrix

__all__ = [
    "BulkParams",
    "ChainWeights",
    "ChainGF",
    "BareChainGF",
    "CentralDressing",
    "EdgeWeights",
    "ThreeSiteParams",
    "bulk_params",
    "chain_weights",
    "bare_chain_gf",
    "dressed_chain_gf",
    "central_gf",
    "analytic_s_params",
    "edge_limit_weights",
    "edge_wavefunction",
    "three_site_params",
    "boundary_chain_gf",
    "bulk_gf",
    "verify_equivalence",
]


@dataclass(frozen=True)
class BulkParams:
    a: complex
    F0: complex
    Q: complex


@dataclass(frozen=True)
class ChainWeights:
    w_f: complex
    w_n: complex
    w_c: complex
    w_tilde: complex

    @property
    def delta_w(self) -> complex:
        return self.w_f * self.w_n - self.w_c * self.w_c


@dataclass(frozen=True)
class ChainGF:
    """End-site Green's functions of one chain.

    ``far`` is the outer (port) site, ``near`` the site next to the center
    and ``cross`` the element between them.
    """

    far: complex
    near: complex
    cross: complex


@dataclass(frozen=True)
class BareChainGF:
    left: ChainGF
    right: ChainGF
    weights: ChainWeights


@dataclass(frozen=True)
class CentralDressing:
    """Self-energy of site M, determinant ``d`` and the (Q, M) block ``Gc``."""

    Sigma_M: complex
    d: complex
    Gc: np.ndarray
    left: ChainGF
    right: ChainGF


@dataclass(frozen=True)
class EdgeWeights:
    w_f: float
    w_n: float
    w_c: float
    norm: float
    xi: float


@dataclass(frozen=True)
class ThreeSiteParams:
    VQ_tilde: float
    gamma: float
    gamma_L: float
    gamma_R: float


def _z(omega, eta) -> complex:
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return complex(omega) + 1j * eta


def _check_couplings(t1, t2):
    if not (t1 > 0 and t2 > 0):
        raise ValueError("t1 and t2 must be positive")


def _bulk(z: complex, V, t1, t2) -> BulkParams:
    a = (z * z - V * V - t1 * t1 - t2 * t2) / (2 * t1 * t2)
    if a.imag == 0 and abs(a.real) == 1:
        raise ValueError("band edge a = +-1; evaluate with eta > 0")
    s = np.sqrt(a * a - 1 + 0j)
    q1, q2 = a + s, a - s
    if abs(abs(q1) - 1) < 1e-12 and abs(abs(q2) - 1) < 1e-12:
        # in band on the real axis: take the retarded limit
        probe = _bulk(z + 1j * 1e-9 * (t1 + t2), V, t1, t2).Q
        Q = q1 if abs(q1 - probe) < abs(q2 - probe) else q2
    else:
        Q = q1 if abs(q1) <= abs(q2) else q2
    return BulkParams(complex(a), complex(1 / (Q - a)), complex(Q))


def bulk_params(omega, V, t1, t2, eta: float = 0.0) -> BulkParams:
    """Bulk parameters ``a``, ``F0`` and the decaying root ``Q`` (``|Q| <= 1``).

    ``Q`` solves ``Q^2 - 2aQ + 1 = 0`` and ``F0 = 1 / (Q - a)``.
    """
    _check_couplings(t1, t2)
    return _bulk(_z(omega, eta), V, t1, t2)


def _weights(z, V, t1, t2, p) -> ChainWeights:
    b = _bulk(z, V, t1, t2)
    Q, F0 = b.Q, b.F0
    den = 1 - Q ** (2 * p + 2)
    if abs(den) < 1e-14:
        raise ValueError("resonant chain denominator 1 - Q^(2p+2) = 0; use eta > 0")
    pre = -F0 * (1 - Q * Q) / (2 * Q)
    q = Q ** (2 * p + 1)
    w_f = pre * (Q * t2 + t1 - q * (t2 + Q * t1)) / (den * t1)
    w_n = pre * (t2 + Q * t1 - q * (Q * t2 + t1)) / (den * t2)
    w_c = pre * Q ** p * (1 - Q * Q) / den
    w_t = pre * pre * Q * (1 - Q ** (2 * p)) / den
    return ChainWeights(complex(w_f), complex(w_n), complex(w_c), complex(w_t))


def chain_weights(omega, V, t1, t2, p: int, eta: float = 0.0) -> ChainWeights:
    """Finite-chain weights ``w_f``, ``w_n``, ``w_c`` (and ``w_tilde``).

    ``w_tilde`` enters ``w_f w_n - w_c^2 = w_tilde (z^2 - V^2) / (t1 t2)``.
    """
    _check_couplings(t1, t2)
    return _weights(_z(omega, eta), V, t1, t2, int(p))


def bare_chain_gf(omega, V, t1, t2, p: int, eta: float = 0.0) -> BareChainGF:
    """Bare end-site Green's functions of the left and right chains."""
    _check_couplings(t1, t2)
    z = _z(omega, eta)
    w = _weights(z, V, t1, t2, int(p))
    left = ChainGF(w.w_f / (z + V), w.w_n / (z + V), w.w_c / (z + V))
    right = ChainGF(w.w_f / (z - V), w.w_n / (z - V), w.w_c / (z - V))
    return BareChainGF(left, right, w)


def dressed_chain_gf(bare: ChainGF, gamma: float) -> ChainGF:
    """Dress a chain with a port of broadening ``gamma`` on its far site."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    den = 1 + 1j * gamma * bare.far
    if den == 0:
        raise ValueError("1 + i Gamma G_far vanishes")
    far = bare.far / den
    cross = bare.cross / den
    near = (bare.near + 1j * gamma * (bare.near * bare.far - bare.cross ** 2)) / den
    return ChainGF(far, near, cross)


def _dressed_from_weights(w: ChainWeights, z, pole, gamma, t1, t2) -> ChainGF:
    # pole-free form: the 1/(z - pole) factor of w_n cancels against delta_w
    den = z - pole + 1j * gamma * w.w_f
    if den == 0:
        raise ValueError("dressed chain denominator vanishes; use eta > 0")
    if gamma == 0:
        return ChainGF(w.w_f / den, w.w_n / den, w.w_c / den)
    near = (w.w_n + 1j * gamma * w.w_tilde * (z + pole) / (t1 * t2)) / den
    return ChainGF(w.w_f / den, near, w.w_c / den)


def central_gf(omega, spec: LatticeSpec, gamma1: float = 0.0, gammaN: float = 0.0,
               eta: float = 0.0) -> CentralDressing:
    """Green's function on the (qubit, center) pair dressed by both chains.

    Returns ``Sigma_M = tL^2 G^L_near + tR^2 G^R_near``,
    ``d = (z - VQ)(z - VM - Sigma_M) - tQ^2`` and
    ``Gc = [[z - VM - Sigma_M, -tQ], [-tQ, z - VQ]] / d`` over (Q, M).
    """
    _check_couplings(spec.t1, spec.t2)
    z = _z(omega, eta)
    w = _weights(z, spec.V, spec.t1, spec.t2, spec.p)
    GL = _dressed_from_weights(w, z, -spec.V, gamma1, spec.t1, spec.t2)
    GR = _dressed_from_weights(w, z, spec.V, gammaN, spec.t1, spec.t2)
    sigma = spec.tL ** 2 * GL.near + spec.tR ** 2 * GR.near
    d = (z - spec.VQ) * (z - spec.VM - sigma) - spec.tQ ** 2
    if d == 0:
        raise ValueError("d(omega) = 0 at a bound-state pole; use eta > 0")
    Gc = np.array([[z - spec.VM - sigma, -spec.tQ], [-spec.tQ, z - spec.VQ]], dtype=complex) / d
    return CentralDressing(complex(sigma), complex(d), Gc, GL, GR)


def analytic_s_params(omega, spec: LatticeSpec, gamma1: float, gammaN: float,
                      eta: float = 0.0) -> tuple[complex, complex, complex]:
    """Closed-form ``(S_N1, S_11, S_NN)`` with ports on the two outer sites."""
    if gamma1 < 0 or gammaN < 0:
        raise ValueError("broadenings must be >= 0")
    c = central_gf(omega, spec, gamma1, gammaN, eta)
    GMM = c.Gc[1, 1]
    tL, tR = spec.tL, spec.tR
    GL, GR = c.left, c.right
    S_N1 = -2j * math.sqrt(gamma1 * gammaN) * tR * tL * GR.cross * GL.cross * GMM
    S_11 = 1 - 2j * gamma1 * (GL.far + tL * tL * GL.cross ** 2 * GMM)
    S_NN = 1 - 2j * gammaN * (GR.far + tR * tR * GR.cross ** 2 * GMM)
    return complex(S_N1), complex(S_11), complex(S_NN)


# ---------------------------------------------------------------------------
# bulk and boundary Green's functions


def _sublattice(j: int) -> tuple[int, bool]:
    # position 2l-1 is the +V site of cell l, position 2l its -V partner
    l = (j + 1) // 2 if j % 2 else j // 2
    return l, (j % 2 == 1)


def bulk_gf(ja: int, jb: int, omega, V, t1, t2, eta: float = 0.0) -> complex:
    """Infinite-chain Green's function between positions ``ja`` and ``jb``.

    Odd positions carry ``+V`` and the bond ``(2l-1, 2l)`` is ``t1``; this
    matches the right arm with positions counted from the center.
    """
    _check_couplings(t1, t2)
    z = _z(omega, eta)
    b = _bulk(z, V, t1, t2)
    Q, pre = b.Q, b.F0 / (2 * t1 * t2)
    la, a_odd = _sublattice(ja)
    lb, b_odd = _sublattice(jb)
    if a_odd and b_odd:
        return complex(-(z + V) * pre * Q ** abs(la - lb))
    if not a_odd and not b_odd:
        return complex(-(z - V) * pre * Q ** abs(la - lb))
    l, lp = (la, lb) if a_odd else (lb, la)
    tail = t1 + t2 * Q if l <= lp else t1 + t2 / Q
    return complex(pre * Q ** abs(l - lp) * tail)


def boundary_chain_gf(ja: int, jb: int, omega, V, t1, t2, p: int, eta: float = 0.0,
                      side: str = "right") -> complex:
    """Finite-chain Green's function from two infinite impurities in the bulk chain.

    Positions are counted from the center (right: ``1 .. 2p+1``;
    left: ``-(2p+1) .. -1``). The cuts sit at ``0`` and ``+-(2p+2)``.
    """
    K = 2 * p + 2
    if side == "right":
        g = lambda a, b: bulk_gf(a, b, omega, V, t1, t2, eta)
        c0, cK = 0, K
    elif side == "left":
        # reflecting the left arm onto the right flips the sublattice sign
        g = lambda a, b: bulk_gf(-a, -b, omega, -V, t1, t2, eta)
        c0, cK = 0, -K
    else:
        raise ValueError("side must be 'left' or 'right'")
    num = (g(cK, cK) * g(ja, c0) * g(c0, jb) + g(c0, c0) * g(ja, cK) * g(cK, jb)
           - g(c0, cK) * g(ja, c0) * g(cK, jb) - g(cK, c0) * g(ja, cK) * g(c0, jb))
    den = g(c0, c0) * g(cK, cK) - g(c0, cK) * g(cK, c0)
    return g(ja, jb) - num / den


# ---------------------------------------------------------------------------
# edge-state limit and large-VM approximation


def edge_limit_weights(t1: float, t2: float, p: int) -> EdgeWeights:
    """Chain weights in the limit ``omega -> +-V``.

    With ``r = t1/t2 = exp(-1/xi)`` and ``norm = (1 - r^(2p+2)) / (1 - r^2)``:
    ``w_f = r^(2p)/norm``, ``w_n = 1/norm``, ``w_c = (-1)^p r^p / norm``.
    """
    if not 0 < t1 < t2:
        raise ValueError("edge limit requires 0 < t1 < t2")
    r = t1 / t2
    norm = (1 - r ** (2 * (p + 1))) / (1 - r * r)
    xi = -1 / math.log(r)
    return EdgeWeights(r ** (2 * p) / norm, 1 / norm, (-1) ** p * r ** p / norm, norm, xi)


def edge_wavefunction(t1: float, t2: float, p: int) -> np.ndarray:
    """Chain amplitudes of the edge state on sites ``M-1, M-3, ..., 1``.

    Element ``k`` is ``(-1)^k r^k / sqrt(norm)``; the state has no weight
    on the opposite sublattice. The right-moving state is the mirror image.
    """
    ew = edge_limit_weights(t1, t2, p)
    k = np.arange(p + 1)
    r = t1 / t2
    return (-1.0) ** k * r ** k / math.sqrt(ew.norm)


def three_site_params(omega, spec: LatticeSpec, gamma1: float, gammaN: float) -> ThreeSiteParams:
    """Effective qubit level for a strongly detuned central site.

    ``VQ_tilde = VQ - tQ^2/VM`` and
    ``gamma(w) = (tQ/VM)^2 [tL^2 GL/((w+V)^2+GL^2) + tR^2 GR/((w-V)^2+GR^2)]``
    with ``GL = gamma1 w_f`` and ``GR = gammaN w_f`` using the edge-limit
    ``w_f``. The end-point limits are ``(tQ/VM)^2 t_{L,R}^2 / G_{L,R}``.
    """
    if spec.VM == 0:
        raise ValueError("three-site reduction needs VM != 0")
    wf = edge_limit_weights(spec.t1, spec.t2, spec.p).w_f
    GL, GR = gamma1 * wf, gammaN * wf
    pre = (spec.tQ / spec.VM) ** 2
    w = float(omega)
    V = spec.V
    gam = pre * (spec.tL ** 2 * GL / ((w + V) ** 2 + GL ** 2)
                 + spec.tR ** 2 * GR / ((w - V) ** 2 + GR ** 2))
    gL = pre * spec.tL ** 2 / GL if GL > 0 else math.inf
    gR = pre * spec.tR ** 2 / GR if GR > 0 else math.inf
    return ThreeSiteParams(spec.VQ - spec.tQ ** 2 / spec.VM, gam, gL, gR)


# ---------------------------------------------------------------------------
# analytic versus dense-inversion suite


def _rel(x, y, atol) -> float:
    return abs(x - y) / (atol + abs(y)) if (atol + abs(y)) > 0 else abs(x - y)


def _chain_matrix(spec: LatticeSpec, side: str) -> np.ndarray:
    H = build_y_coupler(spec).matrix()
    m = spec.center
    sl = slice(0, m) if side == "left" else slice(m + 1, spec.n_chain)
    return H[sl, sl]


def verify_equivalence(spec: LatticeSpec, gamma1: float, gammaN: float, n_freq: int = 40,
                       eta: float | None = None, seed: int = 0) -> dict:
    """Compare every closed-form quantity with dense inversion.

    Frequencies are drawn uniformly inside the gap ``(-Delta, Delta)``.
    Returns the maximum relative deviation per quantity, using
    ``|x - y| / (atol + |y|)`` with ``atol = 1e-12 / t2`` for Green's
    functions and ``1e-12`` for S-parameters.
    """
    eta = 1e-6 * spec.t2 if eta is None else eta
    rng = np.random.default_rng(seed)
    delta = spec.gap
    omegas = rng.uniform(-delta, delta, n_freq)
    at_g = 1e-12 / spec.t2
    keys = ["bare_left", "bare_right", "dressed_left", "dressed_right", "central",
            "S_N1", "S_11", "S_NN"]
    dev = dict.fromkeys(keys, 0.0)
    HL, HR = _chain_matrix(spec, "left"), _chain_matrix(spec, "right")
    nL = HL.shape[0]
    g = build_y_coupler(spec)
    m, N, q = spec.center, spec.n_chain, spec.qubit
    ports = PortSet((0, N - 1), (gamma1, gammaN))
    heff = attach_ports(g, ports)

    def ends(G, far, near):
        return G[far, far], G[near, near], G[far, near]

    for w in omegas:
        z = w + 1j * eta
        bare = bare_chain_gf(w, spec.V, spec.t1, spec.t2, spec.p, eta)
        GLb = np.linalg.inv(z * np.eye(nL) - HL)
        GRb = np.linalg.inv(z * np.eye(nL) - HR)
        HLd, HRd = HL.astype(complex), HR.astype(complex)
        HLd[0, 0] -= 1j * gamma1
        HRd[-1, -1] -= 1j * gammaN
        GLd = np.linalg.inv(z * np.eye(nL) - HLd)
        GRd = np.linalg.inv(z * np.eye(nL) - HRd)
        c = central_gf(w, spec, gamma1, gammaN, eta)
        for key, an, G, far, near in (
            ("bare_left", bare.left, GLb, 0, nL - 1),
            ("bare_right", bare.right, GRb, nL - 1, 0),
            ("dressed_left", dressed_chain_gf(bare.left, gamma1), GLd, 0, nL - 1),
            ("dressed_right", dressed_chain_gf(bare.right, gammaN), GRd, nL - 1, 0),
            ("dressed_left", c.left, GLd, 0, nL - 1),
            ("dressed_right", c.right, GRd, nL - 1, 0),
        ):
            ref = ends(G, far, near)
            for x, y in zip((an.far, an.near, an.cross), ref):
                dev[key] = max(dev[key], _rel(x, y, at_g))
        Gfull = greens_function(heff, w, eta, check=False)
        blk = Gfull[np.ix_([q, m], [q, m])]
        for x, y in zip(c.Gc.ravel(), blk.ravel()):
            dev["central"] = max(dev["central"], _rel(x, y, at_g))
        S = s_matrix(Gfull, ports)
        a = analytic_s_params(w, spec, gamma1, gammaN, eta)
        for key, x, y in (("S_N1", a[0], S[1, 0]), ("S_11", a[1], S[0, 0]), ("S_NN", a[2], S[1, 1])):
            dev[key] = max(dev[key], _rel(x, y, 1e-12))
    return dev
