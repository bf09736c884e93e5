"""Intermediate representation of compiled measurement programs.

A program is a cluster graph (squeezed ancilla nodes linked by QND edges,
plus input/output ports), an ordered homodyne schedule, outcome-proportional
feedforward displacement rules, and the embedded compile target for
self-contained verification.
"""

from dataclasses import dataclass, field


from .errors import ProgramError
from .symplectic import SymplecticMap

ROLE_ANCILLA = "ancilla"
ROLE_INPUT = "input-port"
ROLE_OUTPUT = "output-port"
ROLES = (ROLE_ANCILLA, ROLE_INPUT, ROLE_OUTPUT)

COUPLING_QND = "qnd"
COUPLING_TELEPORT = "teleport"
COUPLINGS = (COUPLING_QND, COUPLING_TELEPORT)


@dataclass(frozen=True)
class Node:
    """A cluster node.

    ``coupling`` is set on input ports only (how the runtime input mode
    attaches: by QND gate per edge, or by a Bell measurement with the single
    edge partner).  ``port`` carries the wire index for input/output ports.
    """

    id: int
    role: str
    coupling: str = None
    port: int = None


@dataclass(frozen=True)
class ScheduleEntry:
    node_id: int
    angle: float  # homodyne angle theta; measured quadrature x sin + p cos


@dataclass(frozen=True)
class FeedforwardRule:
    source_id: int  # measured node whose outcome drives the displacement
    target_id: int  # surviving node receiving it
    gain_x: float
    gain_p: float


@dataclass(frozen=True)
class ClusterGraph:
    nodes: tuple
    edges: tuple  # unordered id pairs; unit-weight QND couplings

    def node_map(self) -> dict:
        return {node.id: node for node in self.nodes}

    def input_ports(self) -> list:
        ports = [n for n in self.nodes if n.role == ROLE_INPUT]
        return sorted(ports, key=lambda n: n.port)

    def output_ports(self) -> list:
        ports = [n for n in self.nodes if n.role == ROLE_OUTPUT]
        return sorted(ports, key=lambda n: n.port)

    def ancilla_nodes(self) -> list:
        """All squeezed-vacuum nodes: ancillas and output ports, graph order."""
        return [n for n in self.nodes if n.role != ROLE_INPUT]

    def neighbours(self, node_id: int) -> list:
        out = []
        for u, v in self.edges:
            if u == node_id:
                out.append(v)
            elif v == node_id:
                out.append(u)
        return out

    def validate(self) -> None:
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ProgramError("node ids are not unique")
        known = set(ids)
        for n in self.nodes:
            if n.role not in ROLES:
                raise ProgramError(f"node {n.id}: unknown role {n.role!r}")
            if n.role == ROLE_INPUT:
                if n.coupling not in COUPLINGS:
                    raise ProgramError(
                        f"input-port {n.id} lacks a coupling descriptor"
                    )
                if n.port is None:
                    raise ProgramError(f"input-port {n.id} lacks a port index")
                if n.coupling == COUPLING_TELEPORT and len(self.neighbours(n.id)) != 1:
                    raise ProgramError(
                        f"teleport port {n.id} must have exactly one Bell partner edge"
                    )
            elif n.role == ROLE_OUTPUT and n.port is None:
                raise ProgramError(f"output-port {n.id} lacks a port index")
        for u, v in self.edges:
            if u == v:
                raise ProgramError(f"self-loop on node {u}")
            if u not in known or v not in known:
                raise ProgramError(f"edge ({u}, {v}) references unknown node")
        for ports, tag in ((self.input_ports(), "input"), (self.output_ports(), "output")):
            indices = [p.port for p in ports]
            if indices != list(range(len(indices))):
                raise ProgramError(f"{tag} port indices must cover 0..k-1 uniquely")


@dataclass(frozen=True)
class MeasurementProgram:
    """Compiled homodyne program over a cluster graph."""

    graph: ClusterGraph
    schedule: tuple  # ScheduleEntry, measurement order
    feedforward: tuple  # FeedforwardRule
    target: SymplecticMap  # embedded compile target (ground truth)

    @property
    def n(self) -> int:
        return len(self.graph.input_ports())

    def validate(self) -> None:
        self.graph.validate()
        if len(self.graph.input_ports()) != len(self.graph.output_ports()):
            raise ProgramError("input and output port counts differ")
        if self.target.n != self.n:
            raise ProgramError(
                f"target acts on {self.target.n} modes but program has {self.n} ports"
            )
        measured = [s.node_id for s in self.schedule]
        if len(set(measured)) != len(measured):
            raise ProgramError("a node is scheduled more than once")
        node_map = self.graph.node_map()
        expected = {n.id for n in self.nodes_to_measure()}
        got = set(measured)
        if got != expected:
            missing = expected - got
            extra = got - expected
            raise ProgramError(
                f"schedule mismatch: missing nodes {sorted(missing)}, "
                f"unexpected nodes {sorted(extra)}"
            )
        scheduled = set(measured)
        surviving = {n.id for n in self.graph.output_ports()}
        for rule in self.feedforward:
            if rule.source_id not in scheduled:
                raise ProgramError(
                    f"feedforward source {rule.source_id} is not a scheduled node"
                )
            if rule.target_id not in surviving:
                raise ProgramError(
                    f"feedforward target {rule.target_id} is not a surviving node"
                )
            if rule.target_id not in node_map:
                raise ProgramError(f"feedforward target {rule.target_id} unknown")

    def nodes_to_measure(self) -> list:
        """Every node except output ports, i.e. the schedule's domain."""
        return [n for n in self.graph.nodes if n.role != ROLE_OUTPUT]


@dataclass(frozen=True)
class GateRecord:
    """One synthesized gate in a compiled program (for the report)."""

    kind: str  # "four-step" | "connection" | "pad"
    wires: tuple
    column: int
    params: dict


@dataclass
class SynthesisReport:
    """Per-compilation metadata: parameters, census, and residuals."""

    ancilla_count: int
    step_params: list = field(default_factory=list)
    noise_proxy: float = 0.0
    replay_residual: float = 0.0
    effective_map_error: float = None  # filled after simulation-based checks
    excess_trace: float = None

    def gate_census(self) -> dict:
        census = {}
        for rec in self.step_params:
            census[rec.kind] = census.get(rec.kind, 0) + 1
        return census
