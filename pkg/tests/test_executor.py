"""Exact linear replay: agreement with step products, gains, noise response."""

import dataclasses

import numpy as np
import pytest

from cvcluster import (
    DegenerateMeasurementError,
    ProgramError,
    compile,
    exact_replay,
    extract_effective_map,
    identity,
    predicted_excess,
    probe_feedforward,
    random_symplectic,
)
from cvcluster.ir import (
    COUPLING_QND,
    COUPLING_TELEPORT,
    ClusterGraph,
    MeasurementProgram,
    Node,
    ROLE_ANCILLA,
    ROLE_INPUT,
    ROLE_OUTPUT,
    ScheduleEntry,
)


def test_replay_matches_compile_targets():
    for seed, n in [(0, 1), (1, 2), (2, 3)]:
        target = random_symplectic(n, seed)
        program, report = compile(target)
        replay = exact_replay(program)
        assert np.max(np.abs(replay.matrix - target.matrix)) < 1e-9
        # every outcome appears, every ancilla noise is tracked
        assert replay.outcome_response.shape == (2 * n, len(program.schedule))
        assert replay.noise_response.shape == (
            2 * n,
            len(program.graph.ancilla_nodes()),
        )


def test_gains_cancel_outcome_response():
    program, _ = compile(random_symplectic(2, 12))
    replay = exact_replay(program)
    gains = {(r.source_id, r.target_id): (r.gain_x, r.gain_p) for r in program.feedforward}
    ports = {p.port: p.id for p in program.graph.output_ports()}
    n = program.n
    for k, src in enumerate(replay.measured_ids):
        for port in range(n):
            gx, gp = gains.get((src, ports[port]), (0.0, 0.0))
            assert replay.outcome_response[port, k] + gx == pytest.approx(0.0, abs=1e-12)
            assert replay.outcome_response[n + port, k] + gp == pytest.approx(0.0, abs=1e-12)


def test_predicted_excess_tracks_simulator():
    # channel excess from the noise response agrees with the Monte-Carlo
    # ensemble: unconditional cov = conditional cov + scatter of means
    program, _ = compile(identity(1))
    r = 1.0
    from cvcluster import PINNED_ZERO, run_program, sampled, vacuum

    base, _ = run_program(program, vacuum(1), r, PINNED_ZERO)
    means = []
    for shot in range(4000):
        out, _ = run_program(program, vacuum(1), r, sampled(shot))
        means.append(out.mean)
    ensemble = np.cov(np.array(means).T) + base.cov
    expected = np.eye(2) / 4 + predicted_excess(program, r)
    assert np.max(np.abs(ensemble - expected)) < 0.02


def test_degenerate_teleport_angles_detected():
    nodes = (
        Node(0, ROLE_INPUT, coupling=COUPLING_TELEPORT, port=0),
        Node(1, ROLE_ANCILLA),
        Node(2, ROLE_OUTPUT, port=0),
    )
    graph = ClusterGraph(nodes=nodes, edges=((0, 1), (1, 2)))
    # theta0 = pi/2, theta1 = 0 (stored angles pi/2 - theta): theta_minus
    # degenerate; the second Bell homodyne re-measures the input quadrature.
    program = MeasurementProgram(
        graph=graph,
        schedule=(ScheduleEntry(0, 0.0), ScheduleEntry(1, np.pi / 2)),
        feedforward=(),
        target=identity(1),
    )
    with pytest.raises(DegenerateMeasurementError):
        exact_replay(program)


def test_under_measured_program_rejected():
    # two unmeasured cluster nodes feeding one output: the antisqueezed
    # noise of the unmeasured neighbour survives to the output
    nodes = (
        Node(0, ROLE_INPUT, coupling=COUPLING_QND, port=0),
        Node(1, ROLE_ANCILLA),
        Node(2, ROLE_ANCILLA),
        Node(3, ROLE_OUTPUT, port=0),
    )
    graph = ClusterGraph(nodes=nodes, edges=((0, 1), (1, 2), (2, 3)))
    program = MeasurementProgram(
        graph=graph,
        schedule=(
            ScheduleEntry(0, 0.0),
            ScheduleEntry(1, np.pi / 2),  # x measurement resolves nothing new
            ScheduleEntry(2, 0.0),
        ),
        feedforward=(),
        target=identity(1),
    )
    with pytest.raises((ProgramError, DegenerateMeasurementError)):
        exact_replay(program)


def test_probe_feedforward_standalone():
    program, _ = compile(identity(1))
    stripped = dataclasses.replace(program, feedforward=())
    assert probe_feedforward(stripped) == program.feedforward


def test_effective_map_close_to_exact_replay_at_high_squeezing():
    program, _ = compile(random_symplectic(2, 77))
    replay = exact_replay(program)
    effective, _ = extract_effective_map(program, 15.0)
    assert np.max(np.abs(effective.matrix - replay.matrix)) < 1e-8
