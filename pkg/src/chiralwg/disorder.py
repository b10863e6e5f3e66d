"""Monte-Carlo robustness of edge-state chirality under fabrication spread."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeSpec, PortSet, SiteGraph, attach_ports, build_y_coupler
from .spectra import chirality_from_probs, occupation
from .transport import default_eta, greens_function, ldos

__all__ = [
    "DisorderConfig",
    "DisorderReport",
    "sample_disordered",
    "sample_chirality",
    "mc_chirality",
    "summarize",
    "thread_count",
]

DISTRIBUTIONS = ("gaussian", "uniform")


@dataclass(frozen=True)
class DisorderConfig:
    """Monte-Carlo settings.

    Parameters
    ----------
    sigma_rel : float
        Relative spread; standard deviation for ``gaussian``, half-width for
        ``uniform``.
    n_samples : int
    distribution : {"gaussian", "uniform"}
    seed : int
        Root seed; sample ``k`` uses the stream ``(seed, k)``.
    ports : PortSet, optional
        With ports chirality comes from the LDOS, without from the
        eigenvector occupation.
    vary_qubit : bool
        Also apply the spread to the qubit potential ``VQ``. Off by default
        (``VQ`` is the tuned element); switch on to model a qubit resonator
        fabricated with the same spread as the chain.
    """

    sigma_rel: float
    n_samples: int
    distribution: str = "gaussian"
    seed: int = 0
    ports: PortSet | None = None
    vary_qubit: bool = False

    def __post_init__(self):
        if not self.sigma_rel >= 0:
            raise ValueError("sigma_rel must be >= 0")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError("n_samples must be a positive integer")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class DisorderReport:
    samples: np.ndarray
    mean: float
    std: float
    median: float
    q05: float
    q95: float
    n_infinite: int
    n_samples: int
    seed: int

    def to_dict(self) -> dict:
        enc = lambda x: x if math.isfinite(x) else str(x)
        return {
            "mean": enc(self.mean),
            "std": enc(self.std),
            "median": enc(self.median),
            "q05": enc(self.q05),
            "q95": enc(self.q95),
            "n_infinite": self.n_infinite,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def _draw(rng: np.random.Generator, cfg: DisorderConfig, n: int) -> np.ndarray:
    if cfg.distribution == "gaussian":
        return cfg.sigma_rel * rng.standard_normal(n)
    return cfg.sigma_rel * rng.uniform(-1.0, 1.0, n)


def sample_disordered(spec: LatticeSpec, cfg: DisorderConfig, sample_index: int) -> SiteGraph:
    """One disordered Y-coupler.

    Every ``+-V`` on-site energy and every chain bond is scaled by an
    independent ``1 + delta``. The central site and the qubit coupling
    ``tQ`` stay exact; ``VQ`` is varied when ``cfg.vary_qubit`` is set.
    """
    g = build_y_coupler(spec)
    rng = np.random.default_rng([int(cfg.seed), int(sample_index)])
    n = g.n_sites
    d_site = _draw(rng, cfg, n)
    d_bond = _draw(rng, cfg, len(g.bonds))
    onsite = np.array(g.onsite)
    for k in range(n):
        if k == g.center or (k == g.qubit and not cfg.vary_qubit):
            continue
        onsite[k] *= 1 + d_site[k]
    bonds = []
    for (i, j, t), d in zip(g.bonds, d_bond):
        is_qubit_bond = g.qubit in (i, j)
        bonds.append((i, j, t if is_qubit_bond else t * (1 + d)))
    return g.with_values(onsite, tuple(bonds))


def sample_chirality(spec: LatticeSpec, cfg: DisorderConfig, sample_index: int) -> float:
    """Chirality of one disordered sample at its edge-state eigenvalue."""
    g = sample_disordered(spec, cfg, sample_index)
    w, v = np.linalg.eigh(g.matrix())
    k = int(np.argmin(np.abs(w - spec.VQ)))
    if cfg.ports is None or len(cfg.ports) == 0:
        return chirality_from_probs(occupation(v[:, k]), g.center, g.qubit)
    heff = attach_ports(g, cfg.ports)
    G = greens_function(heff, w[k], default_eta(spec), check=False)
    return chirality_from_probs(ldos(G), g.center, g.qubit)


def thread_count(default: int = 1) -> int:
    """Worker count from ``CHIRALWG_THREADS`` (at least 1)."""
    raw = os.environ.get("CHIRALWG_THREADS")
    if raw is None:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def _quantile(sorted_x: np.ndarray, q: float) -> float:
    # linear interpolation that tolerates +inf entries
    n = sorted_x.size
    pos = q * (n - 1)
    lo, hi = int(math.floor(pos)), int(math.ceil(pos))
    a, b = sorted_x[lo], sorted_x[hi]
    if lo == hi or a == b:
        return float(a)
    if math.isinf(b):
        return math.inf
    return float(a + (b - a) * (pos - lo))


def summarize(samples, seed: int = 0) -> DisorderReport:
    """Statistics of a chirality sample; infinite values count but skip mean/std."""
    x = np.asarray(samples, dtype=float)
    s = np.sort(x)
    finite = s[np.isfinite(s)]
    mean = float(finite.mean()) if finite.size else math.inf
    std = float(finite.std()) if finite.size else math.nan
    return DisorderReport(
        samples=x, mean=mean, std=std, median=_quantile(s, 0.5),
        q05=_quantile(s, 0.05), q95=_quantile(s, 0.95),
        n_infinite=int(np.count_nonzero(np.isinf(s))), n_samples=int(x.size), seed=int(seed),
    )


def mc_chirality(spec: LatticeSpec, cfg: DisorderConfig, threads: int | None = None) -> DisorderReport:
    """Chirality statistics over ``cfg.n_samples`` disordered samples.

    Samples are independent and indexed, so the report does not depend on
    ``threads`` (default: ``CHIRALWG_THREADS`` or 1).
    """
    threads = thread_count() if threads is None else max(1, int(threads))
    n = int(cfg.n_samples)
    out = np.empty(n)

    def work(lo, hi):
        for k in range(lo, hi):
            out[k] = sample_chirality(spec, cfg, k)

    if threads == 1:
        work(0, n)
    else:
        edges = np.linspace(0, n, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as ex:
            list(ex.map(work, edges[:-1], edges[1:]))
    return summarize(out, cfg.seed)
