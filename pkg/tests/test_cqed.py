import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiralwg.cqed import (
    Element,
    Netlist,
    Port,
    ac_nodal_solve,
    coupling_capacitance,
    export_netlist,
    find_peaks,
    normal_modes,
    parse_netlist,
    port_self_energy,
    resonance_sweep,
    resonator_capacitance,
    site_params_from_circuit,
    synthesize_circuit,
)
from chiralwg.lattice import LatticeSpec, PortSet, SiteGraph, attach_ports, build_y_coupler
from chiralwg.presets import CQ1, CQ2, CQ_F0, CQ_L0
from chiralwg.spectra import eigendecompose
from chiralwg.transport import frequency_sweep

fF = 1e-15
MHz = 1e6


def _probe_ports(spec, c=0.0, R=1e10):
    return [(0, c, R), (spec.n_chain - 1, c, R)]


def _tank(C, L, ports):
    els = (Element("C", "1", 1, 0, C), Element("L", "1", 1, 0, L))
    return Netlist(els, tuple(ports))


def test_single_resonator_frequency():
    net = _tank(516.95 * fF, 1e-9, ())
    V, t = site_params_from_circuit(net)
    assert V[0] == pytest.approx(7e9, rel=1e-3)
    assert t == {}
    assert resonator_capacitance(7e9, 1e-9) == pytest.approx(516.95 * fF, rel=1e-4)


def test_coupling_is_linear_in_capacitance():
    caps = np.geomspace(0.5 * fF, 5 * fF, 8)
    ts = []
    for c in caps:
        els = (Element("C", "1", 1, 0, 500 * fF), Element("L", "1", 1, 0, 1e-9),
               Element("C", "2", 2, 0, 500 * fF), Element("L", "2", 2, 0, 1e-9),
               Element("C", "1_2", 1, 2, c))
        ts.append(site_params_from_circuit(Netlist(els))[1][(0, 1)])
    ts = np.array(ts)
    slope = np.dot(caps, ts) / np.dot(caps, caps)
    assert np.all(np.abs(ts - slope * caps) <= 0.01 * ts)


def test_coupling_capacitance_inverts_hopping():
    Ca, Cb, L = 500 * fF, 480 * fF, 1e-9
    c = coupling_capacitance(110 * MHz, Ca, Cb, L)
    els = (Element("C", "1", 1, 0, Ca - c), Element("L", "1", 1, 0, L),
           Element("C", "2", 2, 0, Cb - c), Element("L", "2", 2, 0, L),
           Element("C", "1_2", 1, 2, c))
    assert site_params_from_circuit(Netlist(els))[1][(0, 1)] == pytest.approx(110 * MHz, rel=1e-12)


@pytest.mark.parametrize("spec,cmax,cmin", [(CQ1, 22 * fF, 467 * fF), (CQ2, 9 * fF, 497 * fF)])
def test_synthesis_targets(spec, cmax, cmin):
    _, rep = synthesize_circuit(build_y_coupler(spec), CQ_F0, CQ_L0, _probe_ports(spec))
    assert rep.max_coupling_cap == pytest.approx(cmax, rel=0.15)
    assert rep.min_ground_cap == pytest.approx(cmin, rel=0.15)
    assert np.all(rep.C_ground > 0)
    assert rep.hopping_sign == -1


def test_uniform_resonators():
    g = SiteGraph(np.zeros(4), ((0, 1, 0.0), (1, 2, 0.0)))
    net, rep = synthesize_circuit(g, CQ_F0, CQ_L0)
    assert np.allclose(rep.C_ground, 516.95 * fF, rtol=1e-4)
    assert rep.bond_caps == {}


@pytest.mark.parametrize("spec", [CQ1, CQ2])
def test_round_trip_site_parameters(spec):
    g = build_y_coupler(spec)
    net, rep = synthesize_circuit(g, CQ_F0, CQ_L0, _probe_ports(spec))
    V, t = site_params_from_circuit(net, CQ_F0)
    assert np.allclose(V, g.onsite, atol=0.01 * max(spec.V, 1.0))
    for i, j, tij in g.bonds:
        assert t[(i, j)] == pytest.approx(tij, rel=0.01)
    assert rep.max_rel_deviation < 0.01


def test_negative_capacitance_rejected():
    with pytest.raises(ValueError, match="sites"):
        synthesize_circuit(build_y_coupler(CQ1), 3e8, CQ_L0)


def test_port_self_energy_limits():
    assert port_self_energy(0.0, 467 * fF, 1e-9, 50.0) == (0.0, 0.0)
    _, k1 = port_self_energy(10 * fF, 467 * fF, 1e-9, 50.0)
    _, k2 = port_self_energy(20 * fF, 467 * fF, 1e-9, 50.0)
    assert k2 == pytest.approx(4 * k1, rel=1e-12)


def test_port_linewidth_against_nodal_solver():
    # one resonator, a 20 fF / 50 Ohm port and a passive high-impedance probe
    C, L, c, R = 467 * fF, 1e-9, 20 * fF, 50.0
    net = _tank(C, L, (Port(1, c, R), Port(1, 0.0, 1e12)))
    shift, kappa = port_self_energy(c, C, L, R)
    f0 = 1 / (2 * math.pi * math.sqrt(L * C))
    f = np.linspace(f0 - 200 * MHz, f0 + 50 * MHz, 25001)
    p = np.abs(ac_nodal_solve(net, f).S21) ** 2
    above = f[p >= p.max() / 2]
    fwhm = above[-1] - above[0]
    # kappa is the energy decay rate, i.e. the full width of the power resonance
    assert kappa == pytest.approx(fwhm, rel=0.2)
    assert f[np.argmax(p)] - f0 == pytest.approx(shift, rel=0.2)


def test_tank_resonance_position():
    C, L = 400 * fF, 1.2e-9
    net = _tank(C, L, (Port(1, 0.0, 1e6), Port(1, 0.0, 1e6)))
    f0 = 1 / (2 * math.pi * math.sqrt(L * C))
    step = 1e5
    f = np.arange(f0 - 50 * MHz, f0 + 50 * MHz, step)
    pk = find_peaks(ac_nodal_solve(net, f))
    assert pk.size == 1 and abs(pk[0] - f0) <= step


def test_find_peaks_simple_cases():
    f = np.linspace(-10, 10, 2001)
    lor = 1 / ((f - 1.234) ** 2 + 0.1)
    pk = find_peaks(f, lor)
    assert pk.size == 1 and abs(pk[0] - 1.234) <= f[1] - f[0]
    assert find_peaks(f, np.ones_like(f)).size == 0
    assert find_peaks(f, np.zeros_like(f)).size == 0


def test_ideal_cq2_trace_has_all_modes():
    g = build_y_coupler(CQ2)
    N = CQ2.n_chain
    gam = 0.1 * MHz
    h = attach_ports(g, PortSet((0, N - 1), (gam, gam)))
    ev = eigendecompose(g).eigenvalues
    grid = np.arange(-2.5 * (CQ2.t1 + CQ2.t2), 2.5 * (CQ2.t1 + CQ2.t2), 2e4)
    t = [r.s(N - 1, 0) for r in frequency_sweep(h, grid)]
    pk = find_peaks(grid, t)
    assert pk.size == 4 * CQ2.p + 4
    assert np.allclose(pk, ev, atol=0.1 * MHz)


def test_matched_ports_track_fisher_lee():
    g = build_y_coupler(CQ1)
    N = CQ1.n_chain
    net, rep = synthesize_circuit(g, CQ_F0, CQ_L0, _probe_ports(CQ1, 20 * fF, 50.0))
    step = 1e5
    span = 2.5 * (CQ1.t1 + CQ1.t2)
    f = np.arange(CQ_F0 - span, CQ_F0 + span, step)
    pk = find_peaks(ac_nodal_solve(net, f))
    h = attach_ports(g, PortSet((0, N - 1), rep.port_gammas("half_kappa")))
    ideal = find_peaks(f, [r.s(N - 1, 0) for r in frequency_sweep(h, f - CQ_F0)])
    assert pk.size == ideal.size
    tol = 2 * max(max(rep.port_kappa_Hz), step)
    assert np.max(np.abs(pk - ideal)) < tol


def test_resonance_sweep_finds_normal_modes():
    net, _ = synthesize_circuit(build_y_coupler(CQ2), CQ_F0, CQ_L0, _probe_ports(CQ2))
    span = 2.5 * (CQ2.t1 + CQ2.t2)
    pk = find_peaks(resonance_sweep(net, CQ_F0 - span, CQ_F0 + span, step=2e4))
    modes = normal_modes(net)
    assert pk.size == modes.size == 20
    assert np.allclose(pk, modes, atol=1.0)


def test_convergence_with_weaker_couplings():
    devs = []
    for s in (1.0, 0.5, 0.25, 0.125):
        spec = CQ1.replace(V=s * CQ1.V, t1=s * CQ1.t1, t2=s * CQ1.t2, tQ=s * CQ1.tQ)
        g = build_y_coupler(spec)
        net, _ = synthesize_circuit(g, CQ_F0, CQ_L0, _probe_ports(spec))
        ideal = eigendecompose(g).eigenvalues + CQ_F0
        devs.append(np.abs(normal_modes(net) - ideal).max())
    assert all(b < a for a, b in zip(devs, devs[1:]))


def test_export_format():
    net = Netlist((Element("C", "1", 1, 0, 4.67e-13), Element("L", "1", 1, 0, 1e-9)))
    assert export_netlist(net).splitlines()[0] == "C1 1 0 4.67e-13"
    assert export_netlist(Netlist()) == ""


def test_export_round_trip_cq1():
    net, _ = synthesize_circuit(build_y_coupler(CQ1), CQ_F0, CQ_L0, _probe_ports(CQ1, 20 * fF, 50.0))
    text = export_netlist(net)
    back = parse_netlist(text)
    assert back == net
    assert export_netlist(back) == text


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(1e-16, 1e-9, allow_subnormal=False), min_size=1, max_size=6))
def test_export_round_trip_lossless(values):
    els = []
    for k, v in enumerate(values):
        els += [Element("C", str(k + 1), k + 1, 0, v), Element("L", str(k + 1), k + 1, 0, 1e-9)]
    net = Netlist(tuple(els), (Port(1, values[0], 50.0),))
    back = parse_netlist(export_netlist(net))
    # export writes a canonical element order; values survive bit for bit
    assert set(back.elements) == set(net.elements)
    assert back.ports == net.ports


def test_netlist_validation():
    with pytest.raises(ValueError):
        Netlist((Element("C", "1", 1, 0, -1.0),))
    with pytest.raises(ValueError):
        Netlist((Element("C", "1", 1, 2, 1.0),))  # floating nodes
    with pytest.raises(ValueError):
        Netlist((Element("C", "1", 1, 0, 1.0), Element("C", "1", 1, 0, 2.0)))
    with pytest.raises(ValueError):
        parse_netlist("X1 1 0 3")


def test_report_serialises():
    import json
    _, rep = synthesize_circuit(build_y_coupler(CQ1), CQ_F0, CQ_L0, _probe_ports(CQ1, 20 * fF, 50.0))
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["bond_caps_F"]["10-20"] == pytest.approx(rep.bond_caps[(9, 19)])
    half, full = rep.port_gammas("half_kappa"), rep.port_gammas("kappa")
    assert half[0] * 2 == pytest.approx(full[0])
    assert rep.port_gammas("angular_half_kappa")[0] == pytest.approx(math.pi * full[0])
    with pytest.raises(ValueError):
        rep.port_gammas("bogus")
