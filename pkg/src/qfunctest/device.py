"""Device calibration model and the JSON device-file format.

A device file is one JSON object::

    {
      "name": "ehningen",
      "num_qubits": 27,
      "edges": [[0, 1], ...],
      "coords": [[x, y], ...],
      "qubits": [{"t1_us": 92.0, "t2_us": 204.0, "omega01_ghz": 5.01,
                  "alpha_ghz": -0.33, "readout": [p10, p01]}, ...],
      "couplings": [{"i": 19, "j": 20, "omega_zz_2pi_mhz": 0.155}, ...],
      "collision_p_leak": 0.0,
      "heating_kappa": 0.0,
      "cluster_cap": 10,
      "gate_durations_ns": {"X": 35, "H": 35, "CX": 500}
    }

``t1_us``/``t2_us`` may be ``null`` for a channel that is switched off
(infinite lifetime). ``readout`` holds p(1|0) and p(0|1). Only ``num_qubits``
and ``edges`` are required; missing calibration falls back to an ideal qubit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

from .topology import ChipTopology, Edge, ParseError, TopologyError, topology_from_dict

DEFAULT_GATE_DURATIONS_NS = {"X": 35.0, "H": 35.0, "CX": 500.0}
DEFAULT_CLUSTER_CAP = 10


@dataclass(frozen=True)
class QubitParams:
    t1_us: float = math.inf
    t2_us: float = math.inf
    omega01_ghz: float | None = None
    alpha_ghz: float | None = None
    readout: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.t1_us > 0 and self.t2_us > 0):
            raise ValueError(f"T1 and T2 must be positive (got {self.t1_us}, {self.t2_us})")
        p10, p01 = self.readout
        if not (0.0 <= p10 <= 1.0 and 0.0 <= p01 <= 1.0):
            raise ValueError(f"readout error probabilities out of [0, 1]: {self.readout}")

    @property
    def omega12_ghz(self) -> float:
        return self.omega01_ghz + self.alpha_ghz

    @property
    def omega02_ghz(self) -> float:
        return 2 * self.omega01_ghz + self.alpha_ghz


@dataclass(frozen=True)
class DeviceModel:
    """Per-qubit calibration, per-edge zz strength and phenomenological knobs.

    ``zz_2pi_mhz`` maps a normalized edge to Omega_zz / 2pi in MHz; the
    Hamiltonian works in rad/us, see :meth:`omega_zz`.
    """

    qubits: tuple[QubitParams, ...]
    zz_2pi_mhz: Mapping[Edge, float] = field(default_factory=dict)
    collision_p_leak: float = 0.0
    heating_kappa: float = 0.0
    cluster_cap: int = DEFAULT_CLUSTER_CAP
    gate_durations_ns: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_GATE_DURATIONS_NS))
    name: str = ""

    def __post_init__(self):
        if not 0.0 <= self.collision_p_leak <= 1.0:
            raise ValueError("collision_p_leak must be in [0, 1]")
        if self.heating_kappa < 0:
            raise ValueError("heating_kappa must be >= 0")
        for (i, j) in self.zz_2pi_mhz:
            if i >= j:
                raise ValueError(f"coupling key ({i}, {j}) must be a normalized edge")

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    def omega_zz(self, i: int, j: int) -> float:
        """Angular zz strength in rad/us (0 for uncoupled pairs)."""
        key = (i, j) if i < j else (j, i)
        return 2 * math.pi * self.zz_2pi_mhz.get(key, 0.0)

    def check_against(self, topo: ChipTopology) -> None:
        if self.num_qubits != topo.num_qubits:
            raise TopologyError(
                f"device has {self.num_qubits} qubit records, topology {topo.num_qubits}")
        for e in self.zz_2pi_mhz:
            if e not in topo.edges:
                raise TopologyError(f"zz coupling on {e} which is not a topology edge")

    def with_qubit(self, q: int, **changes) -> "DeviceModel":
        qs = list(self.qubits)
        qs[q] = replace(qs[q], **changes)
        return replace(self, qubits=tuple(qs))

    @classmethod
    def uniform(cls, topo: ChipTopology, t1_us: float = math.inf, t2_us: float = math.inf,
                zz_2pi_mhz: float = 0.0, **kwargs) -> "DeviceModel":
        q = QubitParams(t1_us=t1_us, t2_us=t2_us)
        zz = {e: zz_2pi_mhz for e in topo.sorted_edges()} if zz_2pi_mhz else {}
        return cls(qubits=(q,) * topo.num_qubits, zz_2pi_mhz=zz, **kwargs)

    def to_dict(self) -> dict:
        def t(v):
            return None if math.isinf(v) else v

        return {
            "name": self.name,
            "qubits": [
                {"t1_us": t(q.t1_us), "t2_us": t(q.t2_us), "omega01_ghz": q.omega01_ghz,
                 "alpha_ghz": q.alpha_ghz, "readout": list(q.readout)}
                for q in self.qubits
            ],
            "couplings": [{"i": i, "j": j, "omega_zz_2pi_mhz": v}
                          for (i, j), v in sorted(self.zz_2pi_mhz.items())],
            "collision_p_leak": self.collision_p_leak,
            "heating_kappa": self.heating_kappa,
            "cluster_cap": self.cluster_cap,
            "gate_durations_ns": dict(self.gate_durations_ns),
        }


def _num(value, fld, allow_none=False):
    if value is None and allow_none:
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError("must be a number", field=fld)
    return float(value)


def device_from_dict(doc: dict, topo: ChipTopology) -> DeviceModel:
    n = topo.num_qubits
    records = doc.get("qubits")
    if records is None:
        records = [{}] * n
    if not isinstance(records, list) or len(records) != n:
        raise ParseError(f"must list {n} qubit records", field="qubits")
    qubits = []
    for k, rec in enumerate(records):
        fld = f"qubits[{k}]"
        if not isinstance(rec, dict):
            raise ParseError("must be an object", field=fld)
        readout = rec.get("readout", [0.0, 0.0])
        if not (isinstance(readout, list) and len(readout) == 2):
            raise ParseError("must be [p10, p01]", field=f"{fld}.readout")
        try:
            qubits.append(QubitParams(
                t1_us=_num(rec.get("t1_us"), f"{fld}.t1_us", allow_none=True),
                t2_us=_num(rec.get("t2_us"), f"{fld}.t2_us", allow_none=True),
                omega01_ghz=(None if rec.get("omega01_ghz") is None
                             else _num(rec["omega01_ghz"], f"{fld}.omega01_ghz")),
                alpha_ghz=(None if rec.get("alpha_ghz") is None
                           else _num(rec["alpha_ghz"], f"{fld}.alpha_ghz")),
                readout=(_num(readout[0], f"{fld}.readout"), _num(readout[1], f"{fld}.readout")),
            ))
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), field=fld) from exc
    zz: dict[Edge, float] = {}
    for k, c in enumerate(doc.get("couplings", [])):
        fld = f"couplings[{k}]"
        try:
            i, j, v = int(c["i"]), int(c["j"]), _num(c["omega_zz_2pi_mhz"], fld)
        except (KeyError, TypeError) as exc:
            raise ParseError("needs i, j, omega_zz_2pi_mhz", field=fld) from exc
        e = (min(i, j), max(i, j))
        if e not in topo.edges:
            raise ParseError(f"coupling {e} is not a topology edge", field=fld)
        if e in zz:
            raise ParseError(f"duplicate coupling {e}", field=fld)
        if v < 0:
            raise ParseError("zz strength must be >= 0", field=fld)
        zz[e] = v
    durations = dict(DEFAULT_GATE_DURATIONS_NS)
    for kind, v in doc.get("gate_durations_ns", {}).items():
        if kind not in DEFAULT_GATE_DURATIONS_NS:
            raise ParseError(f"unknown gate kind {kind!r}", field="gate_durations_ns")
        durations[kind] = _num(v, f"gate_durations_ns.{kind}")
    try:
        return DeviceModel(
            qubits=tuple(qubits),
            zz_2pi_mhz=zz,
            collision_p_leak=_num(doc.get("collision_p_leak", 0.0), "collision_p_leak"),
            heating_kappa=_num(doc.get("heating_kappa", 0.0), "heating_kappa"),
            cluster_cap=int(doc.get("cluster_cap", DEFAULT_CLUSTER_CAP)),
            gate_durations_ns=durations,
            name=str(doc.get("name", "")),
        )
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc


def load_device(text: str) -> tuple[ChipTopology, DeviceModel]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("device document must be a JSON object")
    try:
        topo = topology_from_dict(doc)
    except TopologyError as exc:
        raise ParseError(str(exc), field="edges") from exc
    return topo, device_from_dict(doc, topo)


def dump_device(topo: ChipTopology, device: DeviceModel) -> str:
    doc = {"name": device.name, **topo.to_dict()}
    doc.update({k: v for k, v in device.to_dict().items() if k != "name"})
    # one list element per line keeps the files diffable
    parts = []
    for key, value in doc.items():
        if isinstance(value, list) and value and isinstance(value[0], (dict, list)):
            body = ",\n".join("  " + json.dumps(v) for v in value)
            parts.append(f' "{key}": [\n{body}\n ]')
        else:
            parts.append(f' "{key}": {json.dumps(value)}')
    return "{\n" + ",\n".join(parts) + "\n}"
