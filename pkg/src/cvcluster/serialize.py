"""Versioned JSON serialization of programs, targets, states and reports.

Documents are strict: unknown fields are rejected with their path, and a
version tag mismatch is an explicit incompatibility error.  Floats use
Python's shortest round-trip representation (lossless, 17 significant
digits where needed).
"""

import json

import numpy as np

from .errors import SchemaError, VersionError
from .ir import (
    ClusterGraph,
    FeedforwardRule,
    MeasurementProgram,
    Node,
    ScheduleEntry,
    SynthesisReport,
)
from .simulator import GaussianState
from .symplectic import SymplecticMap

PROGRAM_VERSION = "cluster-program/1"
TARGET_VERSION = "symplectic-target/1"
STATE_VERSION = "gaussian-state/1"
REPORT_VERSION = "synthesis-report/1"
RESULT_VERSION = "simulation-result/1"


def _check_keys(doc: dict, path: str, required: set, optional: set = frozenset()):
    if not isinstance(doc, dict):
        raise SchemaError(path, f"expected an object, got {type(doc).__name__}")
    allowed = required | optional
    for key in doc:
        if key not in allowed:
            raise SchemaError(f"{path}.{key}", "unknown field")
    for key in required:
        if key not in doc:
            raise SchemaError(f"{path}.{key}", "missing required field")


def _check_version(doc: dict, expected: str, path: str):
    version = doc.get("version")
    if version != expected:
        raise VersionError(
            f"{path}.version",
            f"incompatible format version {version!r}; this build reads {expected!r}",
        )


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _matrix(value, rows: int, cols: int, path: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != rows:
        raise SchemaError(path, f"expected {rows} rows")
    out = np.zeros((rows, cols))
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise SchemaError(f"{path}[{i}]", f"expected {cols} entries")
        for j, entry in enumerate(row):
            out[i, j] = _number(entry, f"{path}[{i}][{j}]")
    return out


def _vector(value, size: int, path: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != size:
        raise SchemaError(path, f"expected {size} entries")
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])


# --- symplectic maps -------------------------------------------------------

def map_to_dict(smap: SymplecticMap) -> dict:
    return {
        "n": smap.n,
        "matrix": smap.matrix.tolist(),
        "displacement": smap.displacement.tolist(),
    }


def map_from_dict(doc: dict, path: str) -> SymplecticMap:
    _check_keys(doc, path, {"n", "matrix"}, {"displacement"})
    n = _integer(doc["n"], f"{path}.n")
    if n < 1:
        raise SchemaError(f"{path}.n", "mode count must be >= 1")
    matrix = _matrix(doc["matrix"], 2 * n, 2 * n, f"{path}.matrix")
    displacement = None
    if "displacement" in doc:
        displacement = _vector(doc["displacement"], 2 * n, f"{path}.displacement")
    return SymplecticMap(n, matrix, displacement)


# --- programs --------------------------------------------------------------

def program_to_dict(program: MeasurementProgram) -> dict:
    nodes = []
    for node in program.graph.nodes:
        entry = {"id": node.id, "role": node.role}
        if node.coupling is not None:
            entry["coupling"] = node.coupling
        if node.port is not None:
            entry["port"] = node.port
        nodes.append(entry)
    return {
        "version": PROGRAM_VERSION,
        "graph": {
            "nodes": nodes,
            "edges": [[u, v] for u, v in program.graph.edges],
        },
        "schedule": [
            {"nodeId": s.node_id, "angle": s.angle} for s in program.schedule
        ],
        "feedforward": [
            {
                "sourceNodeId": f.source_id,
                "targetNodeId": f.target_id,
                "gainX": f.gain_x,
                "gainP": f.gain_p,
            }
            for f in program.feedforward
        ],
        "targetMap": map_to_dict(program.target),
    }


def program_from_dict(doc: dict) -> MeasurementProgram:
    _check_keys(doc, "program", {"version", "graph", "schedule", "feedforward", "targetMap"})
    _check_version(doc, PROGRAM_VERSION, "program")
    gdoc = doc["graph"]
    _check_keys(gdoc, "graph", {"nodes", "edges"})
    if not isinstance(gdoc["nodes"], list):
        raise SchemaError("graph.nodes", "expected a list")
    nodes = []
    for i, ndoc in enumerate(gdoc["nodes"]):
        path = f"graph.nodes[{i}]"
        _check_keys(ndoc, path, {"id", "role"}, {"coupling", "port"})
        role = ndoc["role"]
        if not isinstance(role, str):
            raise SchemaError(f"{path}.role", "expected a string")
        coupling = ndoc.get("coupling")
        if coupling is not None and not isinstance(coupling, str):
            raise SchemaError(f"{path}.coupling", "expected a string")
        port = ndoc.get("port")
        if port is not None:
            port = _integer(port, f"{path}.port")
        nodes.append(
            Node(
                id=_integer(ndoc["id"], f"{path}.id"),
                role=role,
                coupling=coupling,
                port=port,
            )
        )
    if not isinstance(gdoc["edges"], list):
        raise SchemaError("graph.edges", "expected a list")
    edges = []
    for i, edoc in enumerate(gdoc["edges"]):
        path = f"graph.edges[{i}]"
        if not isinstance(edoc, list) or len(edoc) != 2:
            raise SchemaError(path, "expected a pair of node ids")
        edges.append((_integer(edoc[0], f"{path}[0]"), _integer(edoc[1], f"{path}[1]")))
    if not isinstance(doc["schedule"], list):
        raise SchemaError("schedule", "expected a list")
    schedule = []
    for i, sdoc in enumerate(doc["schedule"]):
        path = f"schedule[{i}]"
        _check_keys(sdoc, path, {"nodeId", "angle"})
        schedule.append(
            ScheduleEntry(
                node_id=_integer(sdoc["nodeId"], f"{path}.nodeId"),
                angle=_number(sdoc["angle"], f"{path}.angle"),
            )
        )
    if not isinstance(doc["feedforward"], list):
        raise SchemaError("feedforward", "expected a list")
    feedforward = []
    for i, fdoc in enumerate(doc["feedforward"]):
        path = f"feedforward[{i}]"
        _check_keys(fdoc, path, {"sourceNodeId", "targetNodeId", "gainX", "gainP"})
        feedforward.append(
            FeedforwardRule(
                source_id=_integer(fdoc["sourceNodeId"], f"{path}.sourceNodeId"),
                target_id=_integer(fdoc["targetNodeId"], f"{path}.targetNodeId"),
                gain_x=_number(fdoc["gainX"], f"{path}.gainX"),
                gain_p=_number(fdoc["gainP"], f"{path}.gainP"),
            )
        )
    target = map_from_dict(doc["targetMap"], "targetMap")
    program = MeasurementProgram(
        graph=ClusterGraph(nodes=tuple(nodes), edges=tuple(edges)),
        schedule=tuple(schedule),
        feedforward=tuple(feedforward),
        target=target,
    )
    program.validate()
    return program


# --- targets, states, reports ---------------------------------------------

def target_to_dict(smap: SymplecticMap) -> dict:
    doc = {"version": TARGET_VERSION}
    doc.update(map_to_dict(smap))
    return doc


def target_from_dict(doc: dict) -> SymplecticMap:
    _check_keys(doc, "target", {"version", "n", "matrix"}, {"displacement"})
    _check_version(doc, TARGET_VERSION, "target")
    inner = {k: v for k, v in doc.items() if k != "version"}
    return map_from_dict(inner, "target")


def state_to_dict(state: GaussianState) -> dict:
    return {
        "version": STATE_VERSION,
        "n": state.n,
        "mean": state.mean.tolist(),
        "cov": state.cov.tolist(),
    }


def state_from_dict(doc: dict) -> GaussianState:
    _check_keys(doc, "state", {"version", "n", "mean", "cov"})
    _check_version(doc, STATE_VERSION, "state")
    n = _integer(doc["n"], "state.n")
    mean = _vector(doc["mean"], 2 * n, "state.mean")
    cov = _matrix(doc["cov"], 2 * n, 2 * n, "state.cov")
    return GaussianState(mean, cov)


def report_to_dict(report: SynthesisReport) -> dict:
    return {
        "version": REPORT_VERSION,
        "ancillaCount": report.ancilla_count,
        "noiseProxy": report.noise_proxy,
        "replayResidual": report.replay_residual,
        "effectiveMapError": report.effective_map_error,
        "excessTrace": report.excess_trace,
        "stepParams": [
            {
                "kind": rec.kind,
                "wires": list(rec.wires),
                "column": rec.column,
                "params": rec.params,
            }
            for rec in report.step_params
        ],
    }


# --- files ------------------------------------------------------------------

def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2)


def save(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(doc))
        handle.write("\n")


def load(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def save_program(program: MeasurementProgram, path: str) -> None:
    save(program_to_dict(program), path)


def load_program(path: str) -> MeasurementProgram:
    return program_from_dict(load(path))


def save_target(smap: SymplecticMap, path: str) -> None:
    save(target_to_dict(smap), path)


def load_target(path: str) -> SymplecticMap:
    return target_from_dict(load(path))


def save_state(state: GaussianState, path: str) -> None:
    save(state_to_dict(state), path)


def load_state(path: str) -> GaussianState:
    return state_from_dict(load(path))


def write_sweep_csv(rows: list, path) -> None:
    """Rows of (db, effective_map_error, excess_trace) with a header line."""
    lines = ["db,effective_map_error,excess_trace"]
    lines += [f"{db!r},{err!r},{tr!r}" for db, err, tr in rows]
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
