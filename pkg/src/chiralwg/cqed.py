"""Lumped-element LC realisation of site models and an AC nodal solver.

Every site becomes an LC resonator to ground at ``f0 + V_n``; every bond a
coupling capacitor. Ports are resistors ``R`` to ground, optionally through
a series coupling capacitor. Node ``k`` carries site index ``k - 1``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal

from .lattice import SiteGraph

__all__ = [
    "Element",
    "Port",
    "Netlist",
    "SynthesisReport",
    "Trace",
    "resonator_capacitance",
    "coupling_capacitance",
    "site_params_from_circuit",
    "synthesize_circuit",
    "port_self_energy",
    "ac_nodal_solve",
    "find_peaks",
    "resonance_sweep",
    "normal_modes",
    "export_netlist",
    "parse_netlist",
]

KINDS = ("C", "L", "R")


@dataclass(frozen=True)
class Element:
    kind: str
    name: str
    a: int
    b: int
    value: float

    @property
    def card(self) -> str:
        return f"{self.kind}{self.name}"


@dataclass(frozen=True)
class Port:
    """Measurement port at ``node``: resistance ``R`` to ground via capacitor ``c``.

    ``c = 0`` means a direct resistive connection.
    """

    node: int
    c: float
    R: float


@dataclass(frozen=True)
class Netlist:
    elements: tuple = ()
    ports: tuple = ()

    def __post_init__(self):
        names = set()
        for e in self.elements:
            if e.kind not in KINDS:
                raise ValueError(f"unknown element kind {e.kind!r}")
            if not (e.value > 0 and math.isfinite(e.value)):
                raise ValueError(f"{e.card}: value must be positive and finite")
            if e.a < 0 or e.b < 0 or e.a == e.b:
                raise ValueError(f"{e.card}: bad nodes ({e.a}, {e.b})")
            if e.card in names:
                raise ValueError(f"duplicate element name {e.card}")
            names.add(e.card)
        for p in self.ports:
            if p.c < 0 or not p.R > 0:
                raise ValueError("port needs c >= 0 and R > 0")
        nodes = self.nodes
        for p in self.ports:
            if p.node not in nodes:
                raise ValueError(f"port node {p.node} not in netlist")
        if self.elements:
            self._check_grounded()

    @property
    def nodes(self) -> list[int]:
        """Non-ground nodes in ascending order."""
        s = {n for e in self.elements for n in (e.a, e.b)}
        s.discard(0)
        return sorted(s)

    def _check_grounded(self):
        parent = {}

        def find(x):
            parent.setdefault(x, x)
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.elements:
            parent[find(e.a)] = find(e.b)
        root = find(0)
        loose = [n for n in self.nodes if find(n) != root]
        if loose:
            raise ValueError(f"nodes not connected to ground: {loose}")


@dataclass(frozen=True)
class SynthesisReport:
    """Component values and the site parameters they realise."""

    f0: float
    L0: float
    C_ground: np.ndarray
    C_total: np.ndarray
    L: np.ndarray
    bond_caps: dict
    V_target: np.ndarray
    t_target: dict
    V_achieved: np.ndarray
    t_achieved: dict
    max_rel_deviation: float
    large_ratio_bonds: tuple
    hopping_sign: int = -1
    port_shift_Hz: tuple = ()
    port_kappa_Hz: tuple = ()

    @property
    def max_coupling_cap(self) -> float:
        return max(self.bond_caps.values()) if self.bond_caps else 0.0

    @property
    def min_ground_cap(self) -> float:
        return float(self.C_ground.min())

    def port_gammas(self, convention: str = "half_kappa") -> tuple:
        """Fisher-Lee broadening of each port in Hz.

        ``half_kappa`` gives ``kappa / 2``, ``kappa`` the full width, and
        ``angular_half_kappa`` takes the angular decay rate
        ``c^2 R / (C^2 L) / 2`` in 1/s as a frequency in Hz (a factor
        ``2 pi`` larger than ``half_kappa``).
        """
        if convention == "half_kappa":
            return tuple(k / 2 for k in self.port_kappa_Hz)
        if convention == "kappa":
            return tuple(self.port_kappa_Hz)
        if convention == "angular_half_kappa":
            return tuple(math.pi * k for k in self.port_kappa_Hz)
        raise ValueError(f"unknown broadening convention {convention!r}")

    def to_dict(self) -> dict:
        key = lambda ij: f"{ij[0] + 1}-{ij[1] + 1}"
        return {
            "f0_Hz": self.f0,
            "L0_H": self.L0,
            "C_ground_F": self.C_ground.tolist(),
            "C_total_F": self.C_total.tolist(),
            "L_H": self.L.tolist(),
            "bond_caps_F": {key(k): v for k, v in sorted(self.bond_caps.items())},
            "V_target_Hz": self.V_target.tolist(),
            "V_achieved_Hz": self.V_achieved.tolist(),
            "t_target_Hz": {key(k): v for k, v in sorted(self.t_target.items())},
            "t_achieved_Hz": {key(k): v for k, v in sorted(self.t_achieved.items())},
            "max_rel_deviation": self.max_rel_deviation,
            "max_coupling_cap_F": self.max_coupling_cap,
            "min_ground_cap_F": self.min_ground_cap,
            "large_ratio_bonds": [key(k) for k in self.large_ratio_bonds],
            "hopping_sign": self.hopping_sign,
            "port_shift_Hz": list(self.port_shift_Hz),
            "port_kappa_Hz": list(self.port_kappa_Hz),
            "port_gamma_half_kappa_Hz": list(self.port_gammas("half_kappa")),
            "port_gamma_kappa_Hz": list(self.port_gammas("kappa")),
        }


# ---------------------------------------------------------------------------
# circuit <-> site parameters


def resonator_capacitance(f: float, L: float) -> float:
    """Total capacitance giving an LC resonance at ``f``."""
    return 1.0 / (L * (2 * math.pi * f) ** 2)


def coupling_capacitance(t: float, Ca: float, Cb: float, L: float) -> float:
    """Coupling capacitor realising a hopping of magnitude ``|t|`` (Hz).

    Inverts ``|t| = sqrt(Za Zb) C_ab / (2 Ca Cb) / (2 pi)`` with
    ``Z = sqrt(C / L)``.
    """
    Za, Zb = math.sqrt(Ca / L), math.sqrt(Cb / L)
    return 2 * (2 * math.pi * abs(t)) * Ca * Cb / math.sqrt(Za * Zb)


def _hopping(Cab: float, Ca: float, Cb: float, La: float, Lb: float) -> float:
    Za, Zb = math.sqrt(Ca / La), math.sqrt(Cb / Lb)
    return math.sqrt(Za * Zb) * Cab / (2 * Ca * Cb) / (2 * math.pi)


def site_params_from_circuit(netlist: Netlist, f0: float = 0.0):
    """Recover site energies and hopping magnitudes from a resonator array.

    Parameters
    ----------
    netlist : Netlist
        One L and one C to ground per site node, single capacitors between
        site nodes, ports as registered in ``netlist.ports``.
    f0 : float
        Reference frequency subtracted from each resonance.

    Returns
    -------
    V : ndarray
        ``f_n - f0`` per site (Hz), site ``n`` on node ``n + 1``.
    t : dict
        ``{(i, j): |t_ij|}`` in Hz. The physical hopping carries a negative
        sign, see ``SynthesisReport.hopping_sign``.
    """
    nodes = netlist.nodes
    if nodes != list(range(1, len(nodes) + 1)):
        raise ValueError("site nodes must be numbered 1..n")
    n = len(nodes)
    Cg = np.zeros(n)
    L = np.zeros(n)
    bonds = {}
    for e in netlist.elements:
        a, b = sorted((e.a, e.b))
        if e.kind == "R":
            raise ValueError("resistors belong in ports, not the resonator array")
        if a == 0:
            arr = Cg if e.kind == "C" else L
            if arr[b - 1] != 0:
                raise ValueError(f"node {b} has more than one {e.kind} to ground")
            arr[b - 1] = e.value
        elif e.kind == "C":
            if (a - 1, b - 1) in bonds:
                raise ValueError(f"parallel coupling capacitors between {a} and {b}")
            bonds[(a - 1, b - 1)] = e.value
        else:
            raise ValueError("inductive couplings are not a resonator-array topology")
    if np.any(Cg == 0) or np.any(L == 0):
        raise ValueError("every site needs one capacitor and one inductor to ground")
    CB = Cg.copy()
    for (i, j), c in bonds.items():
        CB[i] += c
        CB[j] += c
    for p in netlist.ports:
        CB[p.node - 1] += p.c
    f = 1 / (2 * np.pi * np.sqrt(L * CB))
    t = {ij: _hopping(c, CB[ij[0]], CB[ij[1]], L[ij[0]], L[ij[1]]) for ij, c in bonds.items()}
    return f - f0, t


def synthesize_circuit(g: SiteGraph, f0: float, L0: float, ports=()):
    """Resonator-array netlist realising ``g`` around ``f0``.

    Parameters
    ----------
    g : SiteGraph
        Site model (Hz).
    f0 : float
        Common offset frequency (Hz).
    L0 : float
        Inductance of every resonator (H).
    ports : sequence of (site, c, R)
        Optional ports; their coupling capacitance is counted in the site's
        total capacitance so the loaded resonance stays on target.

    Returns
    -------
    Netlist, SynthesisReport

    Raises
    ------
    ValueError
        If a ground capacitor would be non-positive.
    """
    if not (f0 > 0 and L0 > 0):
        raise ValueError("f0 and L0 must be positive")
    n = g.n_sites
    V = np.asarray(g.onsite, dtype=float)
    f = f0 + V
    if np.any(f <= 0):
        raise ValueError("f0 + V_n must be positive for every site")
    CB = 1 / (L0 * (2 * np.pi * f) ** 2)
    caps = {}
    t_target = {}
    for i, j, t in g.bonds:
        if t == 0:
            continue
        caps[(i, j)] = coupling_capacitance(t, CB[i], CB[j], L0)
        t_target[(i, j)] = abs(t)
    Cg = CB.copy()
    for (i, j), c in caps.items():
        Cg[i] -= c
        Cg[j] -= c
    port_objs = []
    for site, c, R in ports:
        Cg[site] -= c
        port_objs.append(Port(site + 1, float(c), float(R)))
    bad = np.flatnonzero(Cg <= 0)
    if bad.size:
        raise ValueError(
            f"non-positive ground capacitance at sites {(bad + 1).tolist()} "
            f"(min {Cg.min():.3e} F); couplings too large for f0={f0:.4g} Hz, L0={L0:.4g} H"
        )
    elements = []
    for k in range(n):
        elements.append(Element("C", str(k + 1), k + 1, 0, float(Cg[k])))
        elements.append(Element("L", str(k + 1), k + 1, 0, float(L0)))
    for (i, j), c in caps.items():
        elements.append(Element("C", f"{i + 1}_{j + 1}", i + 1, j + 1, float(c)))
    net = Netlist(tuple(_sorted(elements)), tuple(port_objs))

    V_ach, t_ach = site_params_from_circuit(net, f0)
    devs = [abs(V_ach[k] - V[k]) / max(abs(V[k]), 1.0) for k in range(n) if V[k] != 0]
    devs += [abs(V_ach[k] - V[k]) / f0 for k in range(n) if V[k] == 0]
    devs += [abs(t_ach[ij] - t_target[ij]) / t_target[ij] for ij in caps]
    large = tuple(ij for ij, c in caps.items() if c / min(CB[ij[0]], CB[ij[1]]) > 0.1)
    shifts, kappas = [], []
    for p in port_objs:
        s = p.node - 1
        df, kap = port_self_energy(p.c, Cg[s], L0, p.R)
        shifts.append(float(df))
        kappas.append(float(kap))
    rep = SynthesisReport(
        f0=float(f0), L0=float(L0), C_ground=Cg, C_total=CB, L=np.full(n, float(L0)),
        bond_caps=caps, V_target=V.copy(), t_target=t_target, V_achieved=V_ach,
        t_achieved=t_ach, max_rel_deviation=float(max(devs) if devs else 0.0),
        large_ratio_bonds=large, port_shift_Hz=tuple(shifts), port_kappa_Hz=tuple(kappas),
    )
    return net, rep


def port_self_energy(c: float, C: float, L: float, R: float) -> tuple[float, float]:
    """Frequency pull and energy decay rate of a resonator loaded by a port.

    Parameters
    ----------
    c : float
        Series coupling capacitor of the port (F).
    C, L : float
        Resonator capacitance and inductance (F, H).
    R : float
        Port resistance (Ohm).

    Returns
    -------
    shift, kappa : float
        ``f (1/sqrt(1 + c/C) - 1)`` and ``c^2 R / (C^2 L) / 2 pi``, both in Hz.
        ``kappa`` is the full width of the loaded resonance; the Fisher-Lee
        broadening is ``Gamma = kappa / 2``.
    """
    if c == 0:
        return 0.0, 0.0
    f = 1 / (2 * math.pi * math.sqrt(L * C))
    shift = f * (1 / math.sqrt(1 + c / C) - 1)
    kappa = c * c * R / (C * C * L) / (2 * math.pi)
    return shift, kappa


# ---------------------------------------------------------------------------
# AC analysis


@dataclass(frozen=True)
class Trace:
    f: np.ndarray
    S21: np.ndarray

    @property
    def db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20 * np.log10(np.abs(self.S21))


def _port_admittance(p: Port, w: np.ndarray) -> np.ndarray:
    if p.c == 0:
        return np.full(w.shape, 1 / p.R, dtype=complex)
    return 1 / (p.R + 1 / (1j * w * p.c))


def ac_nodal_solve(netlist: Netlist, f_grid, chunk: int = 4096) -> Trace:
    """Transmission from the first port to the second by nodal analysis.

    The source is an EMF ``Vs`` behind the first port's resistor and
    capacitor (a Norton current ``Vs * Y_port``); ``S21 = 2 V_R / Vs`` with
    ``V_R`` the voltage across the second port's resistor.
    """
    if len(netlist.ports) < 2:
        raise ValueError("AC solve needs a source and a load port")
    f = np.asarray(f_grid, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequencies must be positive")
    nodes = netlist.nodes
    pos = {nd: k for k, nd in enumerate(nodes)}
    n = len(nodes)
    Cm = np.zeros((n, n))
    Gm = np.zeros((n, n))
    Km = np.zeros((n, n))  # inverse inductance

    def stamp(M, a, b, y):
        ia, ib = pos.get(a), pos.get(b)
        if ia is not None:
            M[ia, ia] += y
        if ib is not None:
            M[ib, ib] += y
        if ia is not None and ib is not None:
            M[ia, ib] -= y
            M[ib, ia] -= y

    for e in netlist.elements:
        target = {"C": Cm, "L": Km, "R": Gm}[e.kind]
        stamp(target, e.a, e.b, e.value if e.kind == "C" else 1 / e.value)
    src, load = netlist.ports[0], netlist.ports[1]
    ks, kl = pos[src.node], pos[load.node]
    out = np.empty(f.size, dtype=complex)
    for lo in range(0, f.size, chunk):
        w = 2 * np.pi * f[lo:lo + chunk]
        Y = (1j * w[:, None, None] * Cm + Gm + Km / (1j * w[:, None, None])).astype(complex)
        ys = _port_admittance(src, w)
        for p in netlist.ports:
            Y[:, pos[p.node], pos[p.node]] += _port_admittance(p, w)
        rhs = np.zeros((w.size, n, 1), dtype=complex)
        rhs[:, ks, 0] = ys  # unit EMF
        try:
            v = np.linalg.solve(Y, rhs)[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("singular nodal admittance matrix") from exc
        yl = _port_admittance(load, w)
        out[lo:lo + chunk] = 2 * v[:, kl] * yl * load.R
    return Trace(f, out)


def find_peaks(trace, values=None, rel_prominence: float = 1e-3) -> np.ndarray:
    """Frequencies of strict local maxima of ``|S21|``.

    Parameters
    ----------
    trace : Trace or array_like
        A trace, or the frequency grid when ``values`` is given.
    values : array_like, optional
        Magnitudes or complex samples on the grid.
    rel_prominence : float
        Minimum prominence relative to the trace maximum.
    """
    if values is None:
        f, y = trace.f, np.abs(trace.S21)
    else:
        f, y = np.asarray(trace, dtype=float), np.abs(np.asarray(values))
    if y.size < 3 or not np.any(y > 0):
        return np.empty(0)
    idx, _ = scipy.signal.find_peaks(y, prominence=rel_prominence * y.max())
    return f[idx]


def resonance_sweep(netlist: Netlist, f_lo: float, f_hi: float, step: float = 1e4,
                    zoom_levels: int = 6, zoom_points: int = 21) -> Trace:
    """AC sweep on a uniform grid, refined around every local maximum.

    High-impedance probes give resonances far narrower than any practical
    uniform grid, so each coarse maximum is bracketed by its neighbours and
    zoomed in ``zoom_levels`` times with ``zoom_points`` samples per level.
    The returned trace holds the union of all samples in ascending order.
    """
    f = np.arange(f_lo, f_hi + step / 2, step)
    tr = ac_nodal_solve(netlist, f)
    y = np.abs(tr.S21)
    idx = scipy.signal.argrelmax(y)[0]
    fs, ss = [tr.f], [tr.S21]
    for i in idx:
        lo, hi = f[i - 1], f[i + 1]
        for _ in range(zoom_levels):
            grid = np.linspace(lo, hi, zoom_points)
            sub = ac_nodal_solve(netlist, grid)
            fs.append(sub.f)
            ss.append(sub.S21)
            k = int(np.argmax(np.abs(sub.S21)))
            h = grid[1] - grid[0]
            lo, hi = grid[k] - h, grid[k] + h
    fa, sa = np.concatenate(fs), np.concatenate(ss)
    fa, keep = np.unique(fa, return_index=True)
    return Trace(fa, sa[keep])


def normal_modes(netlist: Netlist) -> np.ndarray:
    """Exact resonance frequencies of the lossless array (ports removed).

    Solves ``K v = w^2 C v`` with the nodal capacitance matrix ``C`` (port
    coupling capacitors to ground included) and inverse inductances ``K``.
    """
    nodes = netlist.nodes
    pos = {nd: k for k, nd in enumerate(nodes)}
    n = len(nodes)
    C = np.zeros((n, n))
    K = np.zeros((n, n))
    for e in netlist.elements:
        M = C if e.kind == "C" else K if e.kind == "L" else None
        if M is None:
            continue
        y = e.value if e.kind == "C" else 1 / e.value
        ia, ib = pos.get(e.a), pos.get(e.b)
        for i in (ia, ib):
            if i is not None:
                M[i, i] += y
        if ia is not None and ib is not None:
            M[ia, ib] -= y
            M[ib, ia] -= y
    for p in netlist.ports:
        C[pos[p.node], pos[p.node]] += p.c
    w2 = scipy.linalg.eigh(K, C, eigvals_only=True)
    return np.sqrt(w2) / (2 * np.pi)


# ---------------------------------------------------------------------------
# netlist text


def _natural(name: str):
    return [int(s) if s.isdigit() else s for s in re.split(r"(\d+)", name)]


def _sorted(elements):
    return sorted(elements, key=lambda e: (KINDS.index(e.kind), _natural(e.name)))


def _fmt(x: float) -> str:
    return np.format_float_scientific(x, unique=True, trim="-")


def export_netlist(netlist: Netlist) -> str:
    """SPICE card text, one element per line, ordered by kind then name.

    Ports are written as ``*PORT <node> <c> <R>`` comment cards so that
    SPICE ignores them while ``parse_netlist`` restores them.
    """
    lines = [f"{e.card} {e.a} {e.b} {_fmt(e.value)}" for e in _sorted(netlist.elements)]
    lines += [f"*PORT {p.node} {_fmt(p.c)} {_fmt(p.R)}" for p in netlist.ports]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_netlist(text: str) -> Netlist:
    """Inverse of ``export_netlist``."""
    elements, ports = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        tok = line.split()
        if tok[0].upper() == "*PORT":
            ports.append(Port(int(tok[1]), float(tok[2]), float(tok[3])))
            continue
        if line.startswith("*") or line.startswith("."):
            continue
        if len(tok) != 4 or tok[0][0].upper() not in KINDS:
            raise ValueError(f"cannot parse netlist line: {raw!r}")
        elements.append(Element(tok[0][0].upper(), tok[0][1:], int(tok[1]), int(tok[2]), float(tok[3])))
    return Netlist(tuple(elements), tuple(ports))
