"""Gaussian-state execution of measurement programs at finite squeezing.

States are (mean, covariance) pairs in x-then-p ordering with hbar = 1/2
(vacuum variance 1/4).  Cluster construction applies QND gates to p-squeezed
vacua; homodyne detection conditions the Gaussian state (Schur complement)
and removes the measured mode; feedforward displaces surviving modes in
proportion to recorded outcomes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConditioningError, ProgramError
from .executor import exact_replay, probe_feedforward
from .ir import (
    COUPLING_TELEPORT,
    ClusterGraph,
    MeasurementProgram,
    ROLE_INPUT,
)
from .symplectic import (
    SymplecticMap,
    VACUUM_QUADRATURE_VARIANCE,
    symplectic_form,
)

#: Physicality slack on the symplectic-eigenvalue bound >= 1/4.
PHYSICALITY_TOL = 1e-9
#: Default verification squeezing, ~130 dB: finite-squeezing error below 1e-10.
VERIFICATION_R = 15.0


def db_to_r(db: float) -> float:
    """Squeezing in dB to the squeezing parameter r (variance ratio e^{-2r})."""
    return db * np.log(10.0) / 20.0


def r_to_db(r: float) -> float:
    return 20.0 * r / np.log(10.0)


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of n qumodes (x-then-p ordering)."""

    mean: np.ndarray
    cov: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(
            self.cov, other.cov
        )

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size % 2 != 0:
            raise ValueError("mean must be a vector of even length")
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape does not match the mean")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n(self) -> int:
        return self.mean.size // 2


@dataclass(frozen=True)
class OutcomePolicy:
    """How homodyne outcomes are produced: pinned to zero, or sampled."""

    kind: str  # "pinned-zero" | "sampled"
    seed: int = None

    def __post_init__(self):
        if self.kind not in ("pinned-zero", "sampled"):
            raise ValueError(f"unknown outcome policy {self.kind!r}")


PINNED_ZERO = OutcomePolicy("pinned-zero")


def sampled(seed: int) -> OutcomePolicy:
    return OutcomePolicy("sampled", seed)


def vacuum(n: int) -> GaussianState:
    return GaussianState(np.zeros(2 * n), np.eye(2 * n) * VACUUM_QUADRATURE_VARIANCE)


def squeezed_vacuum(r: float) -> GaussianState:
    """One-mode squeezed vacuum, cov diag(e^{2r}, e^{-2r})/4; r > 0 squeezes p."""
    return GaussianState(
        np.zeros(2), np.diag([np.exp(2.0 * r), np.exp(-2.0 * r)]) / 4.0
    )


def coherent(n: int, mean) -> GaussianState:
    """Vacuum displaced to the given 2n mean vector."""
    mean = np.asarray(mean, dtype=float)
    return GaussianState(mean, np.eye(2 * n) * VACUUM_QUADRATURE_VARIANCE)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state of two registers (modes of a first)."""
    na, nb = a.n, b.n
    n = na + nb
    mean = np.zeros(2 * n)
    cov = np.zeros((2 * n, 2 * n))
    ia = list(range(na)) + [n + i for i in range(na)]
    ib = [na + i for i in range(nb)] + [n + na + i for i in range(nb)]
    mean[ia] = a.mean
    mean[ib] = b.mean
    cov[np.ix_(ia, ia)] = a.cov
    cov[np.ix_(ib, ib)] = b.cov
    return GaussianState(mean, cov)


def apply_map(state: GaussianState, smap: SymplecticMap, modes=None) -> GaussianState:
    """Apply a symplectic map (embedded on the given modes if supplied)."""
    if modes is not None:
        from .symplectic import embed

        smap = embed(smap, state.n, modes)
    if smap.n != state.n:
        raise ValueError(f"map acts on {smap.n} modes, state has {state.n}")
    mean = smap.matrix @ state.mean + smap.displacement
    cov = smap.matrix @ state.cov @ smap.matrix.T
    return GaussianState(mean, cov)


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Williamson eigenvalues of a covariance matrix (physical iff >= 1/4)."""
    n = cov.shape[0] // 2
    eig = np.linalg.eigvals(symplectic_form(n) @ cov)
    values = np.sort(np.abs(eig.imag))
    return values[n:]  # each eigenvalue appears as +-i nu


def validate_state(state: GaussianState, tol: float = PHYSICALITY_TOL) -> None:
    """Check covariance symmetry and the uncertainty bound."""
    asym = float(np.max(np.abs(state.cov - state.cov.T)))
    if asym > 1e-12:
        raise ValueError(f"covariance asymmetry {asym:.2e} exceeds 1e-12")
    nu = symplectic_eigenvalues(state.cov)
    if nu.size and float(nu.min()) < VACUUM_QUADRATURE_VARIANCE - tol:
        raise ValueError(
            f"state is unphysical: symplectic eigenvalue {nu.min():.6g} < 1/4"
        )


def build_cluster(graph: ClusterGraph, r: float) -> GaussianState:
    """Tensor p-squeezed vacua over the graph nodes and apply a QND gate
    per edge.  Every node must be a squeezed mode (no input ports); the
    state's mode order follows the graph's node order."""
    graph.validate()
    if any(node.role == ROLE_INPUT for node in graph.nodes):
        raise ValueError("build_cluster expects a graph without input ports")
    n = len(graph.nodes)
    if n < 1:
        raise ValueError("graph has no nodes")
    index = {node.id: i for i, node in enumerate(graph.nodes)}
    mean = np.zeros(2 * n)
    cov = np.zeros((2 * n, 2 * n))
    for i in range(n):
        cov[i, i] = np.exp(2.0 * r) / 4.0
        cov[n + i, n + i] = np.exp(-2.0 * r) / 4.0
    for u, v in graph.edges:
        _apply_qnd_inplace(mean, cov, n, index[u], index[v])
    return GaussianState(mean, cov)


def _apply_qnd_inplace(mean, cov, n, j, k):
    # p_j += x_k ; p_k += x_j  (x rows untouched, so order is immaterial)
    mean[n + j] += mean[k]
    mean[n + k] += mean[j]
    cov[n + j, :] += cov[k, :]
    cov[n + k, :] += cov[j, :]
    cov[:, n + j] += cov[:, k]
    cov[:, n + k] += cov[:, j]


def _apply_bell_inplace(mean, cov, n, a, b):
    # Balanced Bell splitter on modes (a, b): see teleport.bell_splitter_relations.
    idx = [a, b, n + a, n + b]
    t = np.array(
        [[1, 0, 0, -1], [0, 1, -1, 0], [0, 1, 1, 0], [1, 0, 0, 1]]
    ) / np.sqrt(2.0)
    mean[idx] = t @ mean[idx]
    cov[idx, :] = t @ cov[idx, :]
    cov[:, idx] = cov[:, idx] @ t.T


def _condition(state: GaussianState, mode: int, theta: float, outcome: float):
    """Condition on measuring x sin(theta) + p cos(theta) = outcome at the
    mode; returns the prior (mean, variance) and the reduced state."""
    n = state.n
    if not 0 <= mode < n:
        raise ValueError(f"mode {mode} out of range for n={n}")
    v = np.zeros(2 * n)
    v[mode] = np.sin(theta)
    v[n + mode] = np.cos(theta)
    mu_q = float(v @ state.mean)
    var_q = float(v @ state.cov @ v)
    if var_q <= 0.0:
        raise DegenerateConditioningError(
            f"measured quadrature on mode {mode} has non-positive variance {var_q:.3e}"
        )
    cv = state.cov @ v
    mean = state.mean + cv * ((outcome - mu_q) / var_q)
    cov = state.cov - np.outer(cv, cv) / var_q
    keep = [i for i in range(2 * n) if i not in (mode, n + mode)]
    return mu_q, var_q, GaussianState(mean[keep], cov[np.ix_(keep, keep)])


def homodyne_measure(
    state: GaussianState,
    mode: int,
    theta: float,
    policy: OutcomePolicy = PINNED_ZERO,
    rng: np.random.Generator = None,
):
    """Measure x sin(theta) + p cos(theta) on a mode.

    Returns (outcome, conditional state with the mode removed).  The
    conditional covariance does not depend on the outcome value.
    """
    if policy.kind == "sampled":
        if rng is None:
            rng = np.random.default_rng(policy.seed)
        n = state.n
        v = np.zeros(2 * n)
        v[mode] = np.sin(theta)
        v[n + mode] = np.cos(theta)
        mu_q = float(v @ state.mean)
        var_q = float(v @ state.cov @ v)
        if var_q <= 0.0:
            raise DegenerateConditioningError(
                f"measured quadrature on mode {mode} has non-positive variance"
            )
        outcome = float(rng.normal(mu_q, np.sqrt(var_q)))
    else:
        outcome = 0.0
    _, _, reduced = _condition(state, mode, theta, outcome)
    return outcome, reduced


def run_program(
    program: MeasurementProgram,
    input_state: GaussianState,
    r: float,
    policy: OutcomePolicy = PINNED_ZERO,
    validate: bool = False,
):
    """Execute a compiled program on an input state at ancilla squeezing r.

    Builds the ancilla cluster, couples the inputs (QND edges, or a Bell
    splitter for teleport ports), runs the homodyne schedule, applies the
    outcome-proportional feedforward displacements and the target's
    post-displacement, and returns (output state, outcome record).  The
    output modes follow the program's output-port order.
    """
    program.validate()
    graph = program.graph
    ports = graph.input_ports()
    n = len(ports)
    if input_state.n != n:
        raise ValueError(f"program has {n} ports but input has {input_state.n} modes")
    ancillas = graph.ancilla_nodes()
    total = n + len(ancillas)

    mean = np.zeros(2 * total)
    cov = np.zeros((2 * total, 2 * total))
    in_idx = list(range(n)) + [total + i for i in range(n)]
    cov[np.ix_(in_idx, in_idx)] = input_state.cov
    mean[in_idx] = input_state.mean
    mode_of = {}
    for port in ports:
        mode_of[port.id] = port.port
    for j, anc in enumerate(ancillas):
        mode = n + j
        mode_of[anc.id] = mode
        cov[mode, mode] = np.exp(2.0 * r) / 4.0
        cov[total + mode, total + mode] = np.exp(-2.0 * r) / 4.0

    node_map = graph.node_map()
    bell_pairs = []
    for u, v in graph.edges:
        nu, nv = node_map[u], node_map[v]
        teleport = None
        for a, b in ((nu, nv), (nv, nu)):
            if a.role == ROLE_INPUT and a.coupling == COUPLING_TELEPORT:
                teleport = (a.id, b.id)
                break
        if teleport is not None:
            bell_pairs.append(teleport)
        else:
            _apply_qnd_inplace(mean, cov, total, mode_of[u], mode_of[v])
    for port_id, partner_id in bell_pairs:
        _apply_bell_inplace(mean, cov, total, mode_of[port_id], mode_of[partner_id])

    state = GaussianState(mean, cov)
    rng = (
        np.random.default_rng(policy.seed) if policy.kind == "sampled" else None
    )
    outcomes = {}
    live = dict(mode_of)
    for entry in program.schedule:
        if entry.node_id not in live:
            raise ProgramError(f"schedule references removed node {entry.node_id}")
        mode = live.pop(entry.node_id)
        outcome, state = homodyne_measure(state, mode, entry.angle, policy, rng)
        outcomes[entry.node_id] = outcome
        for node_id, m in live.items():
            if m > mode:
                live[node_id] = m - 1
        if validate:
            validate_state(state)

    mean = state.mean.copy()
    cov = state.cov
    n_live = state.n
    for rule in program.feedforward:
        s = outcomes[rule.source_id]
        t = live[rule.target_id]
        mean[t] += rule.gain_x * s
        mean[n_live + t] += rule.gain_p * s

    out_ports = graph.output_ports()
    order = [live[p.id] for p in out_ports]
    sel = order + [n_live + m for m in order]
    out_mean = mean[sel] + program.target.displacement
    out_cov = cov[np.ix_(sel, sel)]
    return GaussianState(out_mean, out_cov), outcomes


def extract_effective_map(
    program: MeasurementProgram, r: float, policy: OutcomePolicy = PINNED_ZERO
):
    """Probe the program's effective transformation and excess noise.

    Runs the program on vacuum and on the 2n unit-displaced coherent inputs
    under the pinned-zero policy; output means are linear in input means, so
    the columns recover the effective matrix M.  Returns
    (SymplecticMap(n, M, base mean), excess covariance), with
    excess = cov_out(vacuum) - M (I/4) M^T, symmetrized.

    The returned map is only approximately symplectic at finite squeezing
    and converges to the compile target as r grows.
    """
    if policy.kind != "pinned-zero":
        raise ValueError("effective-map probing requires the pinned-zero policy")
    n = program.n
    base_state, _ = run_program(program, vacuum(n), r, policy)
    base_mean = base_state.mean
    columns = np.zeros((2 * n, 2 * n))
    for j in range(2 * n):
        e = np.zeros(2 * n)
        e[j] = 1.0
        out, _ = run_program(program, coherent(n, e), r, policy)
        columns[:, j] = out.mean - base_mean
    excess = base_state.cov - columns @ (np.eye(2 * n) / 4.0) @ columns.T
    excess = (excess + excess.T) / 2.0
    return SymplecticMap(n, columns, base_mean), excess


def derive_feedforward_gains(program: MeasurementProgram, r: float = None) -> tuple:
    """Feedforward gains probed from unit outcome impulses.

    The probe runs the program's exact linear algebra with one outcome set
    to 1 (all others 0) and zero input, and negates the resulting output
    shift.  Probing a linear system is exact, so the gains do not depend on
    the squeezing level; ``r`` is accepted for interface symmetry only.
    """
    del r
    return probe_feedforward(program)


def predicted_excess(program: MeasurementProgram, r: float) -> np.ndarray:
    """Exact excess covariance of the corrected outputs at squeezing r,
    from the linear replay's ancilla-noise response."""
    return exact_replay(program).excess_covariance(r)
