"""Time-ordered propagation of the protected model and its reference twins.

The integrator takes Hermitian-exponential steps (a fourth-order,
two-sample Magnus rule), so every propagator is unitary by construction;
accuracy is controlled by per-segment step doubling against a local
tolerance.  Steps never cross a pulse edge: the schedule supplies
breakpoints, and in the ideal-pulse limit w = 0 the pulses are applied as
exact unitary kicks between free segments rather than as narrow windows.

Three canonical runs share one code path: the coupled run under the full
Hamiltonian, the uncoupled twin with the system-bath term deleted but
identical timing and pulses, and the closed adiabatic run with no control
and no bath at all.  The interaction frame generated by the non-control
system Hamiltonian and the bath defines the residual propagator whose
Hermitian logarithm gives the error phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .pauli import to_dense
from .linalg import (
    dagger,
    expm_hermitian,
    logm_unitary,
    op_norm,
    partial_trace,
)
from .model import AdiabaticSpec, SystemBathSpec, dense_terms, schedule_eval
from .protocols import PulseSchedule, pulse_generator, slot_index
from .codes import DecouplingGroup

_GAUSS_LO = 0.5 - math.sqrt(3) / 6
_GAUSS_HI = 0.5 + math.sqrt(3) / 6

BATH_STATES = ("maximally-mixed", "ground")


class StepLimitError(RuntimeError):
    """The adaptive integrator hit its step cap before converging."""


class DegenerateGroundStateError(ValueError):
    """The ground level is degenerate within tolerance."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and guards for the adaptive propagator.

    ``tol`` is the total propagator error budget, distributed over segments
    proportionally to their length.  ``max_step`` caps the initial step of
    each segment; refinement proceeds by doubling from there.
    """

    tol: float = 1e-10
    max_step: float | None = None
    max_steps: int = 400_000
    hermitian_tol: float = 1e-8

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")


@dataclass
class RunArtifacts:
    """Outputs of one propagated run."""

    u_total: np.ndarray
    rho_final: np.ndarray
    rho_s_final: np.ndarray
    h_eff: np.ndarray
    phi: float
    psi_closed: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


@dataclass
class ClosedRun:
    """Closed-system adiabatic run: final state and its distance to the target."""

    psi_final: np.ndarray
    delta_ad: float


def propagate(
    h_of_t: Callable[[float], np.ndarray],
    total_time: float,
    cfg: IntegratorConfig | None = None,
    breakpoints: tuple[float, ...] = (),
    kicks: tuple[tuple[float, np.ndarray], ...] = (),
) -> np.ndarray:
    """Time-ordered propagator of a piecewise-smooth Hermitian generator.

    ``breakpoints`` mark discontinuities of ``h_of_t`` (pulse edges);
    integration steps are aligned so no step straddles one.  ``kicks`` are
    (time, unitary) pairs applied instantaneously once evolution reaches
    that time, in list order for coinciding times.
    """
    u, _ = propagate_with_stats(h_of_t, total_time, cfg, breakpoints, kicks)
    return u


def propagate_with_stats(
    h_of_t: Callable[[float], np.ndarray],
    total_time: float,
    cfg: IntegratorConfig | None = None,
    breakpoints: tuple[float, ...] = (),
    kicks: tuple[tuple[float, np.ndarray], ...] = (),
) -> tuple[np.ndarray, dict]:
    cfg = cfg or IntegratorConfig()
    if total_time < 0:
        raise ValueError(f"total time must be nonnegative, got {total_time}")
    dim = np.asarray(h_of_t(0.0)).shape[0]
    stats = {"steps": 0, "segments": 0}
    u = np.eye(dim, dtype=complex)
    if total_time == 0:
        return u, stats
    edges = {0.0, total_time}
    edges.update(b for b in breakpoints if 0.0 < b < total_time)
    kick_times = sorted({t for t, _ in kicks})
    edges.update(t for t in kick_times if 0.0 <= t <= total_time)
    ordered = sorted(edges)

    def apply_kicks(t: float):
        nonlocal u
        for kt, mat in kicks:
            if kt == t:
                u = mat @ u

    apply_kicks(0.0)
    hint = 1
    for a, b in zip(ordered[:-1], ordered[1:]):
        if b - a > 1e-15 * max(1.0, total_time):
            seg_tol = max(cfg.tol * (b - a) / total_time, 64 * np.finfo(float).eps)
            seg_u, hint = _segment_unitary(h_of_t, a, b, seg_tol, cfg, stats, hint)
            u = seg_u @ u
            stats["segments"] += 1
        apply_kicks(b)
    return u, stats


def _segment_unitary(h_of_t, a, b, tol, cfg, stats, hint=1) -> tuple[np.ndarray, int]:
    # Start from the previous segment's converged step count (halved) so
    # runs over many near-identical pulse slots skip the doubling ladder.
    steps = max(1, hint // 2)
    if cfg.max_step is not None and cfg.max_step > 0:
        steps = max(steps, math.ceil((b - a) / cfg.max_step))
    u_prev = _fixed_steps(h_of_t, a, b, steps, cfg, stats)
    while True:
        steps *= 2
        if stats["steps"] + steps > cfg.max_steps:
            raise StepLimitError(
                f"segment [{a:g}, {b:g}] needs more than {cfg.max_steps} total steps "
                f"to reach tolerance {tol:.2e}"
            )
        u = _fixed_steps(h_of_t, a, b, steps, cfg, stats)
        # Frobenius norm upper-bounds the operator norm, so this test is
        # conservative and avoids an SVD per refinement level.
        if float(np.linalg.norm(u - u_prev)) <= tol:
            return u, steps
        u_prev = u


def _fixed_steps(h_of_t, a, b, steps, cfg, stats) -> np.ndarray:
    dt = (b - a) / steps
    dim = None
    u = None
    for i in range(steps):
        step_u = _magnus4_step(h_of_t, a + i * dt, dt, cfg)
        if u is None:
            dim = step_u.shape[0]
            u = step_u
        else:
            u = step_u @ u
    stats["steps"] += steps
    return u if u is not None else np.eye(dim or 1, dtype=complex)


def _magnus4_step(h_of_t, t0, dt, cfg) -> np.ndarray:
    """One fourth-order step: two Gauss samples plus their commutator."""
    h1 = np.asarray(h_of_t(t0 + _GAUSS_LO * dt))
    h2 = np.asarray(h_of_t(t0 + _GAUSS_HI * dt))
    dev = max(
        float(np.max(np.abs(h1 - h1.conj().T))),
        float(np.max(np.abs(h2 - h2.conj().T))),
    )
    if dev > cfg.hermitian_tol:
        raise ValueError(
            f"non-Hermitian sample near t={t0:g} (deviation {dev:.3e})"
        )
    comm = h2 @ h1 - h1 @ h2
    exponent = (dt / 2) * (h1 + h2) - 1j * (math.sqrt(3) * dt * dt / 12) * comm
    return expm_hermitian(exponent, 1.0, tol=max(100 * dev, 1e-9))


def instantaneous_ground_state(
    spec: AdiabaticSpec, s: float, degeneracy_tol: float = 1e-12
) -> np.ndarray:
    """Ground state of H(s), inside the code space when the spec is encoded.

    The phase is fixed by making the largest-magnitude amplitude real and
    positive, so repeated calls are deterministic.
    """
    h = (1 - schedule_eval(spec.schedule.kind, s)[0]) * dense_terms(spec.h0_terms, spec.n) \
        + schedule_eval(spec.schedule.kind, s)[0] * dense_terms(spec.h1_terms, spec.n)
    basis = spec.code_basis
    if basis is not None:
        evals, vecs = np.linalg.eigh(basis.conj().T @ h @ basis)
        if len(evals) > 1 and evals[1] - evals[0] < degeneracy_tol:
            raise DegenerateGroundStateError(
                f"ground level degenerate at s={s} (splitting {evals[1] - evals[0]:.2e})"
            )
        psi = basis @ vecs[:, 0]
    else:
        evals, vecs = np.linalg.eigh(h)
        if evals[1] - evals[0] < degeneracy_tol:
            raise DegenerateGroundStateError(
                f"ground level degenerate at s={s} (splitting {evals[1] - evals[0]:.2e})"
            )
        psi = vecs[:, 0]
    idx = int(np.argmax(np.abs(psi)))
    psi = psi * np.exp(-1j * np.angle(psi[idx]))
    return psi


def run_closed_adiabatic(
    spec: AdiabaticSpec, r: float = 1.0, cfg: IntegratorConfig | None = None
) -> ClosedRun:
    """Closed-system interpolation over total time r * T.

    Starts in the (code-space) ground state of H(0); the returned distance
    is the trace distance between the final state and the instantaneous
    ground state at s = 1, which for pure states is sqrt(1 - overlap^2).
    """
    if r < 1:
        raise ValueError(f"time dilation must be >= 1, got {r}")
    total = r * spec.total_time
    h0 = dense_terms(spec.h0_terms, spec.n)
    h1 = dense_terms(spec.h1_terms, spec.n)
    kind = spec.schedule.kind

    def h(t: float) -> np.ndarray:
        f = schedule_eval(kind, min(max(t / total, 0.0), 1.0))[0]
        return (1 - f) * h0 + f * h1

    psi0 = instantaneous_ground_state(spec, 0.0)
    u = propagate(h, total, cfg)
    psi = u @ psi0
    target = instantaneous_ground_state(spec, 1.0)
    # For unit vectors the trace distance is sqrt(1 - |<target|psi>|^2),
    # i.e. the norm of the component of psi orthogonal to the target;
    # computing that component directly avoids cancellation near zero.
    residual = psi - target * np.vdot(target, psi)
    return ClosedRun(psi_final=psi, delta_ad=float(np.linalg.norm(residual)))


def protected_hamiltonian(
    spec: AdiabaticSpec,
    bath: SystemBathSpec,
    schedule: PulseSchedule,
    penalty: np.ndarray | None = None,
    penalty_during_pulse: bool = True,
    include_coupling: bool = True,
    include_control: bool = True,
) -> Callable[[float], np.ndarray]:
    """Joint H(t) on system (x) bath for one protected run variant."""
    n = spec.n
    total = schedule.total_time
    h0 = dense_terms(spec.h0_terms, n)
    h1 = dense_terms(spec.h1_terms, n)
    kind = spec.schedule.kind
    eye_b = np.eye(bath.bath_dim)
    h_b_lift = np.kron(np.eye(1 << n), bath.h_b)
    gens = None
    if include_control and schedule.w > 0:
        gens = [pulse_generator(p, schedule.w) for p in schedule.pulses]

    def h(t: float) -> np.ndarray:
        f = schedule_eval(kind, min(max(t / total, 0.0), 1.0))[0]
        h_sys = (1 - f) * h0 + f * h1
        slot, in_window = slot_index(schedule, min(t, total))
        if penalty is not None and (penalty_during_pulse or not in_window):
            h_sys = h_sys + penalty
        if gens is not None and in_window:
            h_sys = h_sys + gens[slot % schedule.order]
        out = np.kron(h_sys, eye_b) + h_b_lift
        if include_coupling:
            out = out + bath.h_sb
        return out

    return h


def schedule_breakpoints(schedule: PulseSchedule, until: float | None = None) -> tuple[float, ...]:
    """Slot and pulse-window edges within (0, until)."""
    total = schedule.total_time if until is None else until
    edges = []
    for k in range(schedule.total_pulses):
        start = k * schedule.slot_time
        window = start + schedule.tau
        end = start + schedule.slot_time
        for t in ((start, window) if schedule.w > 0 else (start,)):
            if 0.0 < t < total:
                edges.append(t)
        if end >= total:
            break
    return tuple(edges)


def schedule_kicks(schedule: PulseSchedule, bath_dim: int) -> tuple[tuple[float, np.ndarray], ...]:
    """Ideal-pulse kick unitaries at slot ends (w = 0 only)."""
    if schedule.w > 0:
        return ()
    eye_b = np.eye(bath_dim)
    mats = [np.kron(to_dense(p), eye_b) for p in schedule.pulses]
    return tuple(
        ((k + 1) * schedule.slot_time, mats[k % schedule.order])
        for k in range(schedule.total_pulses)
    )


def _frame_unitary(
    spec: AdiabaticSpec,
    bath: SystemBathSpec,
    schedule: PulseSchedule,
    penalty: np.ndarray | None,
    penalty_during_pulse: bool,
    cfg: IntegratorConfig,
    total_time: float,
) -> np.ndarray:
    """U_frame = U_sys (x) U_bath generated by the non-control Hamiltonian."""
    n = spec.n
    h0 = dense_terms(spec.h0_terms, n)
    h1 = dense_terms(spec.h1_terms, n)
    kind = spec.schedule.kind
    run_total = schedule.total_time

    def h_sys(t: float) -> np.ndarray:
        f = schedule_eval(kind, min(max(t / run_total, 0.0), 1.0))[0]
        h = (1 - f) * h0 + f * h1
        if penalty is not None:
            _, in_window = slot_index(schedule, min(t, run_total))
            if penalty_during_pulse or not in_window:
                h = h + penalty
        return h

    gated = penalty is not None and not penalty_during_pulse and schedule.w > 0
    bp = schedule_breakpoints(schedule, total_time) if gated else ()
    u_sys = propagate(h_sys, total_time, cfg, breakpoints=bp)
    u_b = expm_hermitian(bath.h_b, total_time)
    return np.kron(u_sys, u_b)


def interaction_frame(
    u_total: np.ndarray,
    spec: AdiabaticSpec,
    bath: SystemBathSpec,
    schedule: PulseSchedule,
    penalty: np.ndarray | None = None,
    penalty_during_pulse: bool = True,
    cfg: IntegratorConfig | None = None,
    total_time: float | None = None,
) -> np.ndarray:
    """U_tilde = (U_sys (x) U_bath)^dag U_total.

    The frame is generated by the adiabatic (plus penalty) and bath parts;
    the residual contains the control and whatever the coupling did.
    """
    cfg = cfg or IntegratorConfig()
    total = schedule.total_time if total_time is None else total_time
    u_frame = _frame_unitary(spec, bath, schedule, penalty, penalty_during_pulse, cfg, total)
    return dagger(u_frame) @ u_total


def effective_hamiltonian(
    u_interaction: np.ndarray, total_time: float, canon_tol: float = 1e-8
) -> tuple[np.ndarray, float]:
    """(H_eff, Phi) from the interaction-frame propagator.

    The global phase is first canonicalized by dividing out the phase of
    the trace (when the trace is not numerically zero), so the error phase
    Phi = T ||H_eff|| is gauge independent.
    """
    if total_time <= 0:
        raise ValueError(f"total time must be positive, got {total_time}")
    tr = complex(np.trace(u_interaction))
    u = u_interaction
    if abs(tr) > canon_tol:
        u = u * (tr.conjugate() / abs(tr))
    h_log = logm_unitary(u)
    return h_log / total_time, float(op_norm(h_log))


def magnus_first_order(group: DecouplingGroup, h_sb_interaction: np.ndarray) -> np.ndarray:
    """Leading Magnus term of an ideal decoupling cycle: the group average
    of the interaction with group elements lifted by identity on the bath."""
    dim = h_sb_interaction.shape[0]
    dim_s = 1 << group.n
    if dim % dim_s != 0:
        raise ValueError(f"joint dimension {dim} is not a multiple of 2^{group.n}")
    eye_b = np.eye(dim // dim_s)
    acc = np.zeros_like(h_sb_interaction, dtype=complex)
    for g in group.elements:
        lift = np.kron(to_dense(g), eye_b)
        acc += lift.conj().T @ h_sb_interaction @ lift
    return acc / group.order


def _bath_initial_state(bath: SystemBathSpec, kind: str) -> np.ndarray:
    if kind == "maximally-mixed":
        return np.eye(bath.bath_dim, dtype=complex) / bath.bath_dim
    if kind == "ground":
        _, vecs = np.linalg.eigh(bath.h_b)
        v = vecs[:, 0]
        return np.outer(v, v.conj())
    raise ValueError(f"unknown bath state {kind!r}; choose from {BATH_STATES}")


def run_protected(
    spec: AdiabaticSpec,
    bath: SystemBathSpec,
    schedule: PulseSchedule,
    penalty: np.ndarray | None = None,
    penalty_during_pulse: bool = True,
    bath_state: str = "maximally-mixed",
    cfg: IntegratorConfig | None = None,
) -> tuple[RunArtifacts, RunArtifacts]:
    """Coupled run and its uncoupled twin under identical timing and pulses.

    Both start from (ground state of H(0)) (x) (bath initial state); the
    twin differs only by deletion of the system-bath term.  Each artifact
    carries the interaction-frame effective Hamiltonian and error phase.
    """
    cfg = cfg or IntegratorConfig()
    n = spec.n
    if schedule.group.n != n:
        raise ValueError(f"schedule acts on {schedule.group.n} qubits, model on {n}")
    if bath.n != n:
        raise ValueError(f"bath spec is for {bath.n} system qubits, model has {n}")
    total = schedule.total_time
    if abs(spec.total_time - total) > 1e-9 * max(1.0, total):
        raise ValueError(
            f"model total time {spec.total_time} does not match schedule {total}"
        )
    if penalty is not None and penalty.shape != (1 << n, 1 << n):
        raise ValueError("penalty operator dimension mismatch")

    psi0 = instantaneous_ground_state(spec, 0.0)
    if spec.code_basis is not None:
        v = spec.code_basis
        if np.linalg.norm(v @ (v.conj().T @ psi0) - psi0) > 1e-10:
            raise ValueError("initial state fell outside the code space")
    rho_b0 = _bath_initial_state(bath, bath_state)
    rho0 = np.kron(np.outer(psi0, psi0.conj()), rho_b0)

    breakpoints = schedule_breakpoints(schedule)
    kicks = schedule_kicks(schedule, bath.bath_dim)
    u_frame = _frame_unitary(spec, bath, schedule, penalty, penalty_during_pulse, cfg, total)

    artifacts = []
    for include_coupling in (True, False):
        h = protected_hamiltonian(
            spec, bath, schedule, penalty, penalty_during_pulse,
            include_coupling=include_coupling,
        )
        u_total, stats = propagate_with_stats(h, total, cfg, breakpoints, kicks)
        rho_final = u_total @ rho0 @ u_total.conj().T
        rho_s = partial_trace(rho_final, (1 << n, bath.bath_dim), (0,))
        u_tilde = dagger(u_frame) @ u_total
        h_eff, phi = effective_hamiltonian(u_tilde, total)
        stats.update(total_time=total, coupled=include_coupling)
        artifacts.append(
            RunArtifacts(
                u_total=u_total,
                rho_final=rho_final,
                rho_s_final=rho_s,
                h_eff=h_eff,
                phi=phi,
                diagnostics=stats,
            )
        )
    return artifacts[0], artifacts[1]
