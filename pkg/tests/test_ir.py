"""Structural validation of graphs and programs."""

import dataclasses

import pytest

from cvcluster import CONVENTION, ProgramError, compile, identity, random_symplectic
from cvcluster.ir import (
    COUPLING_QND,
    ClusterGraph,
    FeedforwardRule,
    MeasurementProgram,
    Node,
    ROLE_ANCILLA,
    ROLE_INPUT,
    ROLE_OUTPUT,
    ScheduleEntry,
)


def small_program() -> MeasurementProgram:
    nodes = (
        Node(0, ROLE_INPUT, coupling=COUPLING_QND, port=0),
        Node(1, ROLE_OUTPUT, port=0),
    )
    graph = ClusterGraph(nodes=nodes, edges=((0, 1),))
    return MeasurementProgram(
        graph=graph,
        schedule=(ScheduleEntry(0, 0.0),),
        feedforward=(),
        target=identity(1),
    )


def test_convention_constants():
    assert CONVENTION.hbar == 0.5
    assert CONVENTION.vacuum_quadrature_variance == 0.25
    assert CONVENTION.block_ordering == "x-then-p"


def test_valid_program_passes():
    small_program().validate()


def test_self_loop_rejected():
    nodes = (Node(0, ROLE_ANCILLA),)
    with pytest.raises(ProgramError, match="self-loop"):
        ClusterGraph(nodes=nodes, edges=((0, 0),)).validate()


def test_duplicate_ids_rejected():
    nodes = (Node(0, ROLE_ANCILLA), Node(0, ROLE_ANCILLA))
    with pytest.raises(ProgramError, match="unique"):
        ClusterGraph(nodes=nodes, edges=()).validate()


def test_input_port_requires_coupling():
    nodes = (Node(0, ROLE_INPUT, port=0), Node(1, ROLE_OUTPUT, port=0))
    with pytest.raises(ProgramError, match="coupling"):
        ClusterGraph(nodes=nodes, edges=((0, 1),)).validate()


def test_teleport_port_needs_exactly_one_partner():
    from cvcluster.ir import COUPLING_TELEPORT

    nodes = (
        Node(0, ROLE_INPUT, coupling=COUPLING_TELEPORT, port=0),
        Node(1, ROLE_ANCILLA),
        Node(2, ROLE_OUTPUT, port=0),
    )
    graph = ClusterGraph(nodes=nodes, edges=((0, 1), (0, 2), (1, 2)))
    with pytest.raises(ProgramError, match="Bell partner"):
        graph.validate()


def test_duplicate_schedule_entry_rejected():
    program = small_program()
    bad = dataclasses.replace(
        program, schedule=(ScheduleEntry(0, 0.0), ScheduleEntry(0, 0.1))
    )
    with pytest.raises(ProgramError, match="more than once"):
        bad.validate()


def test_unmeasured_node_rejected():
    program = small_program()
    bad = dataclasses.replace(program, schedule=())
    with pytest.raises(ProgramError, match="missing nodes"):
        bad.validate()


def test_output_port_must_not_be_scheduled():
    program = small_program()
    bad = dataclasses.replace(
        program, schedule=(ScheduleEntry(0, 0.0), ScheduleEntry(1, 0.0))
    )
    with pytest.raises(ProgramError, match="unexpected"):
        bad.validate()


def test_feedforward_source_must_be_scheduled():
    program = small_program()
    bad = dataclasses.replace(
        program,
        feedforward=(FeedforwardRule(source_id=1, target_id=1, gain_x=1.0, gain_p=0.0),),
    )
    with pytest.raises(ProgramError, match="source"):
        bad.validate()


def test_feedforward_target_must_survive():
    program = small_program()
    bad = dataclasses.replace(
        program,
        feedforward=(FeedforwardRule(source_id=0, target_id=0, gain_x=1.0, gain_p=0.0),),
    )
    with pytest.raises(ProgramError, match="surviving"):
        bad.validate()


def test_target_mode_count_must_match_ports():
    program = small_program()
    bad = dataclasses.replace(program, target=identity(2))
    with pytest.raises(ProgramError, match="ports"):
        bad.validate()


def test_gate_census_shape():
    _, report = compile(random_symplectic(2, 19))
    census = report.gate_census()
    assert set(census) <= {"four-step", "connection", "pad"}
    assert census["four-step"] >= 1
