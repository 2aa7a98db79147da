import json
import math

import pytest
from hypothesis import given, strategies as st

from qfunctest.device import (DeviceModel, QubitParams, device_from_dict, dump_device,
                              load_device)
from qfunctest.topology import ChipTopology, ParseError, TopologyError


def test_falcon_pinned_values(falcon):
    topo, dev = falcon
    assert dev.num_qubits == 27
    assert dev.qubits[21].t1_us == 35.0
    assert [dev.qubits[q].t2_us for q in (20, 13, 1)] == [204.0, 180.0, 94.0]
    assert dev.zz_2pi_mhz[(19, 20)] == 0.155
    assert dev.omega_zz(20, 19) == pytest.approx(2 * math.pi * 0.155)
    assert dev.omega_zz(0, 26) == 0.0
    dev.check_against(topo)


def test_higher_transitions():
    q = QubitParams(omega01_ghz=5.068, alpha_ghz=-0.3351)
    assert q.omega12_ghz == pytest.approx(4.7329)
    assert q.omega02_ghz == pytest.approx(10.1360 - 0.3351)


def test_dump_load_round_trip(falcon):
    topo, dev = falcon
    topo2, dev2 = load_device(dump_device(topo, dev))
    assert topo2 == topo
    assert dev2.to_dict() == dev.to_dict()


def test_null_lifetime_means_infinite():
    doc = {"num_qubits": 1, "edges": [], "qubits": [{"t1_us": None, "t2_us": 50}]}
    _, dev = load_device(json.dumps(doc))
    assert math.isinf(dev.qubits[0].t1_us) and dev.qubits[0].t2_us == 50


@pytest.mark.parametrize("patch, field", [
    ({"qubits": [{"t1_us": -1}, {}]}, "qubits[0]"),
    ({"qubits": [{"t1_us": "x"}, {}]}, "qubits[0].t1_us"),
    ({"qubits": [{}]}, "qubits"),
    ({"couplings": [{"i": 0, "j": 1}]}, "couplings[0]"),
    ({"couplings": [{"i": 0, "j": 0, "omega_zz_2pi_mhz": 0.1}]}, "couplings[0]"),
    ({"gate_durations_ns": {"Y": 1}}, "gate_durations_ns"),
    ({"qubits": [{"readout": [0.1]}, {}]}, "qubits[0].readout"),
])
def test_bad_device_fields(patch, field):
    doc = {"num_qubits": 2, "edges": [[0, 1]], **patch}
    with pytest.raises(ParseError) as info:
        load_device(json.dumps(doc))
    assert info.value.field == field


def test_bad_json_reports_line():
    with pytest.raises(ParseError) as info:
        load_device('{\n"num_qubits": 2,\n oops}')
    assert info.value.line == 3


def test_knob_validation():
    with pytest.raises(ValueError):
        DeviceModel(qubits=(QubitParams(),), collision_p_leak=1.5)
    with pytest.raises(ValueError):
        DeviceModel(qubits=(QubitParams(),), heating_kappa=-1)
    with pytest.raises(ValueError):
        QubitParams(readout=(0.0, 2.0))


def test_check_against_mismatch():
    topo = ChipTopology.build(3, [(0, 1), (1, 2)])
    dev = DeviceModel.uniform(topo, zz_2pi_mhz=0.1)
    with pytest.raises(TopologyError):
        dev.check_against(ChipTopology.build(2, [(0, 1)]))
    with pytest.raises(TopologyError):
        DeviceModel(qubits=dev.qubits, zz_2pi_mhz={(0, 2): 0.1}).check_against(topo)


@given(st.floats(1, 500), st.floats(1, 500), st.floats(0, 2))
def test_uniform_device_round_trips(t1, t2, zz):
    topo = ChipTopology.build(3, [(0, 1), (1, 2)])
    dev = DeviceModel.uniform(topo, t1, t2, zz)
    _, again = load_device(dump_device(topo, dev))
    assert again.to_dict() == dev.to_dict()


def test_with_qubit_is_a_copy(falcon):
    _, dev = falcon
    d2 = dev.with_qubit(3, t1_us=1.0)
    assert d2.qubits[3].t1_us == 1.0 and dev.qubits[3].t1_us != 1.0


def test_device_from_dict_defaults():
    topo = ChipTopology.build(2, [(0, 1)])
    dev = device_from_dict({}, topo)
    assert dev.qubits == (QubitParams(), QubitParams())
    assert dev.gate_durations_ns["CX"] == 500.0 and dev.cluster_cap == 10
