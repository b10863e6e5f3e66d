"""``chiralwg`` command-line interface.

Usage::

    chiralwg <spectrum|sweep|transport|verify-analytic|circuit|disorder>
             [--config FILE] [--preset NAME] [--out PATH]

Energies are ordinary frequencies in Hz. Port broadenings ``gamma_Hz`` are
the values usually quoted as ``Gamma / 2 pi``. Sites in configs are
numbered from 1 (the chain runs 1..N, the qubit is N + 1).

The LZSM helper takes the sweep rate ``v`` in Hz/s;
``exp(-pi E0^2 / v)`` equals ``exp(-2 pi^2 E0^2 / (d omega / dt))``.

Exit codes: 0 success, 1 numerical or acceptance failure, 2 configuration
error. ``CHIRALWG_THREADS`` caps the worker count of Monte-Carlo runs.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import verify_equivalence
from .cqed import (
    export_netlist, find_peaks, normal_modes, resonance_sweep,
    synthesize_circuit,
)
from .disorder import DisorderConfig, mc_chirality
from .lattice import LatticeSpec, PortSet, attach_ports, build_y_coupler
from .presets import PRESETS, preset
from .spectra import eigendecompose, find_gap_states, sweep_vq
from .transport import frequency_sweep, gamma_sweep

COMMANDS = ("spectrum", "sweep", "transport", "verify-analytic", "circuit", "disorder")


class ConfigError(Exception):
    """Invalid or inconsistent run configuration (exit code 2)."""


class AcceptanceFailure(Exception):
    """A requested check did not pass (exit code 1)."""


# ---------------------------------------------------------------------------
# configuration


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | None, preset_name: str | None) -> dict:
    cfg = {}
    if preset_name is not None:
        try:
            cfg = preset(preset_name)
        except KeyError:
            raise ConfigError(f"unknown preset {preset_name!r}; choose from {sorted(PRESETS)}")
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}")
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}")
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _merge(cfg, user)
    if not cfg:
        raise ConfigError("provide --config and/or --preset")
    return cfg


def _spec(cfg: dict) -> LatticeSpec:
    if "lattice" not in cfg:
        raise ConfigError("config needs a 'lattice' object")
    try:
        return LatticeSpec.from_config(cfg["lattice"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"lattice: {exc}")


def _num(obj: dict, key: str, default=None, positive=False) -> float:
    v = obj.get(key, default)
    if v is None:
        raise ConfigError(f"missing '{key}'")
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"'{key}' must be a finite number")
    if positive and not v > 0:
        raise ConfigError(f"'{key}' must be positive")
    return float(v)


def _ports(cfg: dict, spec: LatticeSpec, gamma_override: float | None) -> PortSet:
    raw = cfg.get("ports") or []
    if not isinstance(raw, list):
        raise ConfigError("'ports' must be a list")
    sites, gammas = [], []
    for p in raw:
        if not isinstance(p, dict) or "site" not in p:
            raise ConfigError("each port needs 'site' and 'gamma_Hz'")
        site = p["site"]
        if isinstance(site, bool) or not isinstance(site, int) or not 1 <= site <= spec.n_sites:
            raise ConfigError(f"port site {site!r} outside 1..{spec.n_sites}")
        g = gamma_override if gamma_override is not None else _num(p, "gamma_Hz")
        sites.append(site - 1)
        gammas.append(g)
    try:
        return PortSet(tuple(sites), tuple(gammas))
    except ValueError as exc:
        raise ConfigError(f"ports: {exc}")


def _grid(cfg: dict, kind: str) -> np.ndarray:
    sw = cfg.get("sweep")
    if sw is None:
        return None
    if not isinstance(sw, dict):
        raise ConfigError("'sweep' must be an object")
    if sw.get("kind") != kind:
        raise ConfigError(f"sweep kind must be '{kind}' here, got {sw.get('kind')!r}")
    start, stop = _num(sw, "start"), _num(sw, "stop")
    pts = sw.get("points")
    if isinstance(pts, bool) or not isinstance(pts, int) or pts < 1:
        raise ConfigError("sweep 'points' must be an integer >= 1")
    if start > stop:
        raise ConfigError("sweep needs start <= stop")
    scale = sw.get("scale", "linear")
    if scale == "log":
        if start <= 0:
            raise ConfigError("log sweep needs start > 0")
        return np.geomspace(start, stop, pts)
    if scale != "linear":
        raise ConfigError("sweep 'scale' must be 'linear' or 'log'")
    return np.linspace(start, stop, pts)


def _out_path(args, cfg) -> str | None:
    if args.out:
        return args.out
    out = cfg.get("output")
    if isinstance(out, dict):
        if out.get("format", "csv") not in ("csv", "json"):
            raise ConfigError("output format must be 'csv' or 'json'")
        return out.get("path")
    return None


# ---------------------------------------------------------------------------
# writers


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(x) for x in r) + "\n")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _say(msg: str):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# commands


def _spectrum_rows(vq, evals, flags):
    for x, e_row, f_row in zip(vq, evals, flags):
        for k, (e, f) in enumerate(zip(e_row, f_row)):
            yield (x, k, e, bool(f))


SWEEP_HEADER = ("VQ_Hz", "eig_index", "E_Hz", "in_gap_flag")


def cmd_spectrum(args, cfg) -> int:
    spec = _spec(cfg)
    s = eigendecompose(build_y_coupler(spec))
    rep = find_gap_states(s, spec)
    flags = np.zeros(len(s), bool)
    flags[rep.indices] = True
    _emit(_csv(SWEEP_HEADER, _spectrum_rows([spec.VQ], [s.eigenvalues], [flags])), _out_path(args, cfg))
    _say(f"{len(s)} eigenvalues; gap [{rep.gap_lower:.6g}, {rep.gap_upper:.6g}] Hz; "
         f"{len(rep.in_gap)} in-gap: " + ", ".join(f"{e:.9g}" for e in rep.energies))
    return 0


def cmd_sweep(args, cfg) -> int:
    spec = _spec(cfg)
    grid = _grid(cfg, "vq")
    if grid is None:
        raise ConfigError("sweep command needs a 'sweep' object with kind 'vq'")
    sw = sweep_vq(spec, grid)
    _emit(_csv(SWEEP_HEADER, _spectrum_rows(sw.vq, sw.eigenvalues, sw.in_gap)), _out_path(args, cfg))
    counts = sw.in_gap.sum(axis=1)
    _say(f"{len(grid)} VQ points; in-gap states per point: min {counts.min()}, max {counts.max()}")
    return 0


def cmd_transport(args, cfg) -> int:
    spec = _spec(cfg)
    ports = _ports(cfg, spec, args.gamma_over_2pi)
    if len(ports) == 0:
        raise ConfigError("transport needs at least one port")
    eta = _num(cfg, "eta_Hz") if "eta_Hz" in cfg else 0.0
    if eta < 0:
        raise ConfigError("eta_Hz must be >= 0")
    g = build_y_coupler(spec)
    sw = cfg.get("sweep")
    kind = sw.get("kind") if isinstance(sw, dict) else None
    if kind == "gamma":
        grid = _grid(cfg, "gamma")
        omega = _num(cfg, "omega_Hz")
        results = gamma_sweep(g, ports.sites, grid, omega, eta)
        lead = [("gamma_Hz", grid)]
    elif kind in (None, "omega"):
        grid = _grid(cfg, "omega") if kind else np.array([_num(cfg, "omega_Hz")])
        results = frequency_sweep(attach_ports(g, ports), grid, eta)
        lead = []
    else:
        raise ConfigError("transport sweep kind must be 'omega' or 'gamma'")
    a, b = ports.sites[0], ports.sites[-1]
    header = [h for h, _ in lead] + ["omega_Hz", "Re_S11", "Im_S11", "Re_SNN", "Im_SNN",
                                     "Re_SN1", "Im_SN1", "chirality"]
    header += [f"ldos_{n + 1}" for n in range(g.n_sites)]
    rows = []
    for i, r in enumerate(results):
        s11, snn, sn1 = r.s(a, a), r.s(b, b), r.s(b, a)
        rows.append([v[i] for _, v in lead] + [r.omega, s11.real, s11.imag, snn.real, snn.imag,
                                               sn1.real, sn1.imag, r.chirality, *r.ldos])
    _emit(_csv(header, rows), _out_path(args, cfg))
    show = results if len(results) <= 10 else [results[0], results[-1]]
    for r in show:
        tag = f"omega={r.omega:.9g} Hz"
        _say(f"{tag}: S11={_c(r.s(a, a))} SNN={_c(r.s(b, b))} SN1={_c(r.s(b, a))} chi={r.chirality:.6g}")
    return 0


def _c(z: complex) -> str:
    return f"{z.real:+.9f}{z.imag:+.9f}j"


def cmd_verify_analytic(args, cfg) -> int:
    spec = _spec(cfg)
    ports = _ports(cfg, spec, args.gamma_over_2pi)
    if len(ports) >= 2:
        g1, gN = ports.gammas[0], ports.gammas[-1]
    else:
        g1 = gN = 250e6
    tol = _num(cfg, "tolerance", 1e-6, positive=True)
    n = int(_num(cfg, "n_freq", 40, positive=True))
    eta = _num(cfg, "eta_Hz", 1e-6 * spec.t2, positive=True)
    seed = int(_num(cfg, "seed", 0))
    try:
        dev = verify_equivalence(spec, g1, gN, n_freq=n, eta=eta, seed=seed)
    except ValueError as exc:
        raise ConfigError(str(exc))
    ok = True
    lines = []
    for k in sorted(dev):
        status = "ok" if dev[k] <= tol else "FAIL"
        ok &= dev[k] <= tol
        lines.append(f"{k:14s} max_rel_dev={dev[k]:.3e} {status}")
    lines.append(f"tolerance {tol:.1e}: {'PASS' if ok else 'FAIL'}")
    _emit("\n".join(lines) + "\n", _out_path(args, cfg))
    if not ok:
        raise AcceptanceFailure("analytic/numeric deviation above tolerance")
    return 0


def _circuit_ports(spec: LatticeSpec, c: dict):
    probe = c.get("probe", "high_impedance")
    ends = (0, spec.n_chain - 1)
    if probe == "high_impedance":
        R = _num(c, "R_ohm", 1e10, positive=True)
        return [(s, 0.0, R) for s in ends]
    if probe == "matched":
        R = _num(c, "R_ohm", 50.0, positive=True)
        cc = _num(c, "c_F", 20e-15, positive=True)
        return [(s, cc, R) for s in ends]
    raise ConfigError("circuit 'probe' must be 'high_impedance' or 'matched'")


def cmd_circuit(args, cfg) -> int:
    spec = _spec(cfg)
    c = cfg.get("circuit", {})
    if not isinstance(c, dict):
        raise ConfigError("'circuit' must be an object")
    f0 = _num(c, "f0_Hz", 7e9, positive=True)
    L0 = _num(c, "L0_H", 1e-9, positive=True)
    ports = _circuit_ports(spec, c)
    g = build_y_coupler(spec)
    try:
        net, rep = synthesize_circuit(g, f0, L0, ports)
    except ValueError as exc:
        _say(f"synthesis failed: {exc}")
        return 1
    out = _out_path(args, cfg)
    _emit(export_netlist(net), out)
    report = rep.to_dict()
    _say(f"max coupling cap {rep.max_coupling_cap:.4e} F; min resonator cap {rep.min_ground_cap:.4e} F; "
         f"forward deviation {rep.max_rel_deviation:.2e}")
    if c.get("verify", False):
        step = _num(c, "step_Hz", 1e4, positive=True)
        span = 2.5 * (spec.t1 + spec.t2)
        tr = resonance_sweep(net, f0 - span, f0 + span, step)
        peaks = find_peaks(tr)
        ideal = eigendecompose(g).eigenvalues + f0
        report["peaks_Hz"] = peaks.tolist()
        report["ideal_Hz"] = ideal.tolist()
        report["normal_modes_Hz"] = normal_modes(net).tolist()
        if peaks.size == ideal.size:
            dev = float(np.abs(peaks - ideal).max())
            report["max_peak_deviation_Hz"] = dev
            _say(f"{peaks.size} peaks; max |peak - ideal| = {dev:.6g} Hz")
        else:
            report["max_peak_deviation_Hz"] = None
            _say(f"{peaks.size} peaks found, {ideal.size} modes expected")
        if out is not None:
            rows = zip(tr.f, tr.S21.real, tr.S21.imag, tr.db)
            Path(out + ".trace.csv").write_text(_csv(("f_Hz", "Re_S21", "Im_S21", "abs_S21_dB"), rows))
    if out is not None:
        Path(out + ".report.json").write_text(_json(report))
    else:
        _say(_json(report))
    return 0


def _disorder_ports(spec: LatticeSpec, d: dict, cfg: dict, override) -> PortSet | None:
    cp = d.get("circuit_ports")
    if cp is not None:
        if not isinstance(cp, dict):
            raise ConfigError("'circuit_ports' must be an object")
        ends = (0, spec.n_chain - 1)
        c, R = _num(cp, "c_F", positive=True), _num(cp, "R_ohm", positive=True)
        _, rep = synthesize_circuit(build_y_coupler(spec), _num(cp, "f0_Hz", positive=True),
                                    _num(cp, "L0_H", positive=True), [(s, c, R) for s in ends])
        try:
            gam = rep.port_gammas(cp.get("convention", "half_kappa"))
        except ValueError as exc:
            raise ConfigError(str(exc))
        return PortSet(ends, gam)
    ps = _ports(cfg, spec, override)
    return ps if len(ps) else None


def cmd_disorder(args, cfg) -> int:
    spec = _spec(cfg)
    d = cfg.get("disorder")
    if not isinstance(d, dict):
        raise ConfigError("disorder command needs a 'disorder' object")
    ports = _disorder_ports(spec, d, cfg, args.gamma_over_2pi)
    try:
        dc = DisorderConfig(
            sigma_rel=_num(d, "sigma_rel"), n_samples=int(_num(d, "n_samples", positive=True)),
            distribution=d.get("distribution", "gaussian"), seed=int(_num(d, "seed", 0)),
            ports=ports, vary_qubit=bool(d.get("vary_qubit", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"disorder: {exc}")
    rep = mc_chirality(spec, dc)
    out = _out_path(args, cfg)
    _emit(_json(rep.to_dict()), out)
    if d.get("samples_path"):
        rows = ((k, x) for k, x in enumerate(rep.samples))
        Path(d["samples_path"]).write_text(_csv(("sample", "chirality"), rows))
    if ports is not None:
        _say("ports: " + ", ".join(f"site {s + 1} gamma {g:.6g} Hz" for s, g in ports))
    _say(f"mean {rep.mean:.6g} std {rep.std:.6g} median {rep.median:.6g} "
         f"q05 {rep.q05:.6g} q95 {rep.q95:.6g} infinite {rep.n_infinite}/{rep.n_samples}")
    return 0


HANDLERS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "transport": cmd_transport,
    "verify-analytic": cmd_verify_analytic,
    "circuit": cmd_circuit,
    "disorder": cmd_disorder,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chiralwg",
        description="Directional edge states in port-coupled Rice-Mele Y-couplers.",
        epilog="Frequencies in Hz; LZSM sweep rates in Hz/s (exp(-pi E0^2/v) = "
               "exp(-2 pi^2 E0^2/(d omega/dt))). Exit codes: 0 ok, 1 numerical/acceptance "
               "failure, 2 configuration error.",
    )
    ap.add_argument("--version", action="version", version=f"chiralwg {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--preset", help=f"built-in configuration ({', '.join(sorted(PRESETS))})")
    ap.add_argument("--out", help="output file (default: standard output)")
    ap.add_argument("--gamma-over-2pi", type=float, default=None, metavar="HZ",
                    help="override every port broadening (Hz, the Gamma/2pi value)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args.config, args.preset)
        return HANDLERS[args.command](args, cfg)
    except ConfigError as exc:
        _say(f"config error: {exc}")
        return 2
    except AcceptanceFailure as exc:
        _say(f"failure: {exc}")
        return 1
    except (np.linalg.LinAlgError, RuntimeError, ValueError, ArithmeticError) as exc:
        _say(f"numerical error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
