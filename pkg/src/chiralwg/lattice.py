"""Tight-binding site models for Rice-Mele Y-couplers and reduced cells.

All energies are ordinary frequencies in Hz. A bond of strength ``t``
between sites ``i`` and ``j`` enters the Hamiltonian as ``-t``.

Indices are 0-based throughout the library. For a Y-coupler with ``p``
strong pairs per chain the chain occupies indices ``0 .. N-1`` with
``N = 4p + 3``, the central site sits at ``2p + 1`` and the qubit at ``N``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "LatticeSpec",
    "SiteGraph",
    "PortSet",
    "EffectiveHamiltonian",
    "build_y_coupler",
    "build_ssh_chain",
    "build_four_site",
    "build_three_level",
    "attach_ports",
    "mirror_permutation",
    "mirrored_spec",
]


@dataclass(frozen=True)
class LatticeSpec:
    """Parameters of a Y-coupler made from two Rice-Mele chains.

    Parameters
    ----------
    p : int
        Number of strongly coupled pairs in each chain.
    V : float
        Sublattice potential amplitude (Hz).
    t1, t2 : float
        Weak and strong tunnel couplings (Hz).
    tQ : float
        Qubit to central-site coupling (Hz).
    VQ : float
        Qubit on-site potential (Hz).
    VM : float
        Central-site potential (Hz).
    tL, tR : float, optional
        Central site to left/right chain couplings. Default to ``t1``.
    """

    p: int
    V: float
    t1: float
    t2: float
    tQ: float
    VQ: float = 0.0
    VM: float = 0.0
    tL: float | None = None
    tR: float | None = None

    def __post_init__(self):
        if self.tL is None:
            object.__setattr__(self, "tL", self.t1)
        if self.tR is None:
            object.__setattr__(self, "tR", self.t1)
        if isinstance(self.p, bool) or int(self.p) != self.p or self.p < 0:
            raise ValueError(f"p must be a non-negative integer, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        for name in ("V", "t1", "t2", "tQ", "VQ", "VM", "tL", "tR"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val!r}")
            object.__setattr__(self, name, val)
        for name in ("t1", "t2", "tQ", "tL", "tR"):
            if getattr(self, name) < 0:
                raise ValueError(f"coupling {name} must be >= 0")

    # geometry ----------------------------------------------------------
    @property
    def n_chain(self) -> int:
        """Number of chain sites ``N = 4p + 3``."""
        return 4 * self.p + 3

    @property
    def n_sites(self) -> int:
        return self.n_chain + 1

    @property
    def center(self) -> int:
        """0-based index of the central site."""
        return 2 * self.p + 1

    @property
    def qubit(self) -> int:
        """0-based index of the qubit site."""
        return self.n_chain

    @property
    def gap(self) -> float:
        """Bulk band-gap half width ``sqrt((t2 - t1)^2 + V^2)``."""
        return math.hypot(self.t2 - self.t1, self.V)

    def replace(self, **changes) -> "LatticeSpec":
        return dataclasses.replace(self, **changes)

    # config I/O --------------------------------------------------------
    _KEYS = {
        "V_Hz": "V", "t1_Hz": "t1", "t2_Hz": "t2", "tQ_Hz": "tQ",
        "VQ_Hz": "VQ", "VM_Hz": "VM", "tL_Hz": "tL", "tR_Hz": "tR",
    }

    @classmethod
    def from_config(cls, obj: Mapping) -> "LatticeSpec":
        """Build from a JSON-style mapping with ``*_Hz`` keys."""
        if not isinstance(obj, Mapping):
            raise ValueError("lattice config must be an object")
        unknown = set(obj) - set(cls._KEYS) - {"p"}
        if unknown:
            raise ValueError(f"unknown lattice keys: {sorted(unknown)}")
        missing = [k for k in ("p", "V_Hz", "t1_Hz", "t2_Hz", "tQ_Hz") if k not in obj]
        if missing:
            raise ValueError(f"missing lattice keys: {missing}")
        kw = {cls._KEYS[k]: obj[k] for k in obj if k in cls._KEYS}
        for k, v in kw.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"lattice value for {k} must be a number")
        p = obj["p"]
        if isinstance(p, bool) or not isinstance(p, int):
            raise ValueError("p must be an integer")
        return cls(p=p, **kw)

    def to_config(self) -> dict:
        out = {"p": self.p}
        for key, attr in self._KEYS.items():
            out[key] = getattr(self, attr)
        return out


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SiteGraph:
    """Explicit on-site energies and bond list of a real tight-binding model.

    Parameters
    ----------
    onsite : array_like
        On-site energies (Hz).
    bonds : sequence of (i, j, t)
        Couplings with ``i < j``; each enters the matrix as ``-t``.
    center, qubit : int, optional
        Indices of the central site and qubit, when meaningful.
    """

    onsite: np.ndarray
    bonds: tuple = ()
    center: int | None = None
    qubit: int | None = None

    def __post_init__(self):
        onsite = _freeze(self.onsite)
        if onsite.ndim != 1 or not np.all(np.isfinite(onsite)):
            raise ValueError("onsite must be a finite 1-D vector")
        n = onsite.size
        seen = set()
        bonds = []
        for b in self.bonds:
            i, j, t = b
            i, j, t = int(i), int(j), float(t)
            if not (0 <= i < j < n):
                raise ValueError(f"bond ({i}, {j}) out of range or not ordered i<j")
            if (i, j) in seen:
                raise ValueError(f"duplicate bond ({i}, {j})")
            if not math.isfinite(t):
                raise ValueError("bond strength must be finite")
            seen.add((i, j))
            bonds.append((i, j, t))
        for idx in (self.center, self.qubit):
            if idx is not None and not 0 <= idx < n:
                raise ValueError("center/qubit index out of range")
        object.__setattr__(self, "onsite", onsite)
        object.__setattr__(self, "bonds", tuple(bonds))

    @property
    def n_sites(self) -> int:
        return self.onsite.size

    def matrix(self) -> np.ndarray:
        """Dense real symmetric Hamiltonian."""
        H = np.diag(np.asarray(self.onsite, dtype=float))
        for i, j, t in self.bonds:
            H[i, j] = H[j, i] = -t
        return H

    def bond(self, i: int, j: int) -> float:
        """Strength of the bond between ``i`` and ``j`` (0 if absent)."""
        i, j = min(i, j), max(i, j)
        for a, b, t in self.bonds:
            if a == i and b == j:
                return t
        return 0.0

    def with_values(self, onsite=None, bonds=None) -> "SiteGraph":
        return SiteGraph(
            self.onsite if onsite is None else onsite,
            self.bonds if bonds is None else bonds,
            self.center,
            self.qubit,
        )


@dataclass(frozen=True)
class PortSet:
    """Port sites and their broadenings ``Gamma`` (Hz)."""

    sites: tuple = ()
    gammas: tuple = ()

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        gammas = tuple(float(g) for g in self.gammas)
        if len(sites) != len(gammas):
            raise ValueError("sites and gammas must have equal length")
        if len(set(sites)) != len(sites):
            raise ValueError(f"duplicate port site in {sites}")
        if any(s < 0 for s in sites):
            raise ValueError("port sites must be non-negative")
        if any(not (g >= 0 and math.isfinite(g)) for g in gammas):
            raise ValueError("port broadening must be finite and >= 0")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "gammas", gammas)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence]) -> "PortSet":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(zip(self.sites, self.gammas))

    def gamma_vector(self) -> np.ndarray:
        return np.array(self.gammas, dtype=float)


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Non-Hermitian ``H' = H - i diag(Gamma)`` with its port registry."""

    matrix: np.ndarray
    ports: PortSet = field(default_factory=PortSet)
    center: int | None = None
    qubit: int | None = None

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0]


# ---------------------------------------------------------------------------
# builders


def build_y_coupler(spec: LatticeSpec) -> SiteGraph:
    """Y-coupler: two Rice-Mele chains joined at a central site with a qubit.

    Sites right of the center carry ``+V`` at odd distance and ``-V`` at
    even distance; the left chain mirrors this with opposite sign, so the
    outermost sites carry ``-V`` (left) and ``+V`` (right).
    """
    p, V = spec.p, spec.V
    N, m = spec.n_chain, spec.center
    onsite = np.zeros(N + 1)
    for n in range(N):
        d = n - m
        if d == 0:
            onsite[n] = spec.VM
        else:
            mag = V if abs(d) % 2 == 1 else -V
            onsite[n] = mag if d > 0 else -mag
    onsite[N] = spec.VQ

    bonds = [(m, N, spec.tQ), (m - 1, m, spec.tL), (m, m + 1, spec.tR)]
    for k in range(2 * p):
        t = spec.t1 if k % 2 == 0 else spec.t2
        bonds.append((m - 2 - k, m - 1 - k, t))
        bonds.append((m + 1 + k, m + 2 + k, t))
    bonds.sort()
    return SiteGraph(onsite, tuple(bonds), center=m, qubit=N)


def build_ssh_chain(n_cells: int, t1: float, t2: float, lonely_site: bool = False) -> SiteGraph:
    """SSH chain of ``n_cells`` strongly coupled (``t2``) pairs joined by ``t1``.

    With ``lonely_site`` an unpaired site is prepended at index 0 and
    attached to the first pair by ``t1``.
    """
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    off = 1 if lonely_site else 0
    n = 2 * n_cells + off
    bonds = []
    if lonely_site:
        bonds.append((0, 1, t1))
    for c in range(n_cells):
        a = off + 2 * c
        bonds.append((a, a + 1, t2))
        if c + 1 < n_cells:
            bonds.append((a + 1, a + 2, t1))
    return SiteGraph(np.zeros(n), tuple(bonds))


def build_four_site(VQ, VM, tQ, tL, tR, V) -> SiteGraph:
    """Four-site cell over the basis (Q, C, L, R)."""
    onsite = np.array([VQ, VM, -V, V], dtype=float)
    bonds = ((0, 1, tQ), (1, 2, tL), (1, 3, tR))
    return SiteGraph(onsite, bonds, center=1, qubit=0)


def build_three_level(VS, VC, tQ, tc) -> SiteGraph:
    """Three-level system over the basis (Q, C, S)."""
    onsite = np.array([VS, VC, VS], dtype=float)
    bonds = ((0, 1, tQ), (1, 2, tc))
    return SiteGraph(onsite, bonds, center=1, qubit=0)


def attach_ports(g: SiteGraph, ports: PortSet | None = None) -> EffectiveHamiltonian:
    """Add ``-i Gamma`` at each port site of ``g``."""
    ports = PortSet() if ports is None else ports
    H = g.matrix().astype(complex)
    for s, gam in ports:
        if s >= g.n_sites:
            raise ValueError(f"port site {s} out of range for {g.n_sites} sites")
        H[s, s] -= 1j * gam
    return EffectiveHamiltonian(H, ports, g.center, g.qubit)


# ---------------------------------------------------------------------------
# symmetry helpers


def mirror_permutation(spec: LatticeSpec) -> np.ndarray:
    """Index map ``n -> N-1-n`` on the chain with the qubit left in place."""
    N = spec.n_chain
    return np.concatenate([np.arange(N)[::-1], [N]])


def mirrored_spec(spec: LatticeSpec) -> LatticeSpec:
    """Spec whose Hamiltonian is the mirror image of ``spec``'s.

    Reversing the chain swaps the two arms, so ``tL`` and ``tR`` trade
    places and the sublattice pattern flips sign (``V -> -V``).
    """
    return spec.replace(V=-spec.V, tL=spec.tR, tR=spec.tL)
