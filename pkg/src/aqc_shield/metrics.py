"""Distances, error phases, and every bound check.

All distances are trace distances D = (1/2)||rho1 - rho2||_1.  The four
run-level distances are:

* delta_S  -- reduced system state vs the ideal adiabatic system state,
* d_D      -- coupled vs uncoupled joint state (the decoupling distance),
* delta_ad -- closed-run final state vs instantaneous target,
* d_tot    -- coupled joint state vs the ideal adiabatic joint state.

Bound verdicts carry signed slack (bound minus measured value, plus the
numerical allowance); nonnegative slack means the bound held.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .engine import ClosedRun, RunArtifacts
from .linalg import partial_trace
from .protocols import ScalingRule

VERDICT_SLACK = 1e-9

CSV_COLUMNS = (
    "n", "J", "tau", "w", "K", "L", "T",
    "delta_ad", "d_D", "delta_S", "d_tot", "phi",
    "slack_eq3", "slack_eq5",
)

VERDICT_NAMES = ("monotonic", "triangle", "eq3", "eq5")


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of the difference of two states."""
    if a.shape != b.shape:
        raise ValueError(f"state dimensions differ: {a.shape} vs {b.shape}")
    evals = np.linalg.eigvalsh(a - b)
    return float(0.5 * np.sum(np.abs(evals)))


@dataclass(frozen=True)
class RunMeta:
    """Run identifiers carried into the serialized report."""

    n: int = 0
    j_coupling: float = 0.0
    tau: float = 0.0
    w: float = 0.0
    k_pulses: int = 0
    l_pulses: int = 0
    total_time: float = 0.0


@dataclass(frozen=True)
class PhiBudget:
    """Worst-case error-phase budget, per term.

    term1 = alpha (JT)^2 / (L/K): accumulated lowest-order Magnus residual;
    term2 = JTw/(tau+w): finite pulse width;
    term3 = JT ((exp(2 beta Tc) - 1)/(2 beta Tc) - 1): frame rotation over
    a cycle.  ``third_term_ok`` and ``magnus_convergent`` flag the bound's
    validity conditions (term3 <= JT and J Tc < pi).
    """

    term1: float
    term2: float
    term3: float
    total: float
    third_term_ok: bool
    magnus_convergent: bool


def phi_budget(
    j_coupling: float,
    total_time: float,
    w: float,
    tau: float,
    k_pulses: int,
    l_pulses: int,
    beta: float,
    alpha: float = 1.0,
) -> PhiBudget:
    """Evaluate the three-term worst-case budget for the error phase."""
    jt = j_coupling * total_time
    cycles = l_pulses / k_pulses
    t_c = k_pulses * (tau + w)
    term1 = alpha * jt * jt / cycles if cycles > 0 else math.inf
    term2 = jt * w / (tau + w) if (tau + w) > 0 else 0.0
    x = 2 * beta * t_c
    term3 = jt * (np.expm1(x) / x - 1.0) if x > 0 else 0.0
    return PhiBudget(
        term1=float(term1),
        term2=float(term2),
        term3=float(term3),
        total=float(term1 + term2 + term3),
        third_term_ok=bool(term3 <= jt + 1e-15),
        magnus_convergent=bool(j_coupling * t_c < math.pi),
    )


def dd_error_prediction(rule: ScalingRule, n: int) -> tuple[float, float, float, float]:
    """Predicted decoupling-distance scaling (three terms and their sum).

    (J/delta0)^2 n^-eps1 + n^-eps2 + (J/delta0) n^(1-eps1); vanishes as n
    grows whenever eps1 > 1 and eps2 > 0.
    """
    if n < 2:
        raise ValueError(f"problem size must be at least 2, got {n}")
    ratio = rule.j_coupling / rule.delta0
    t1 = ratio * ratio * n ** (-rule.epsilon1)
    t2 = n ** (-rule.epsilon2)
    t3 = ratio * n ** (1 - rule.epsilon1)
    return float(t1), float(t2), float(t3), float(t1 + t2 + t3)


@dataclass
class ErrorReport:
    """Distances, error phase, bound slacks, and optional budget breakdowns."""

    meta: RunMeta
    delta_s: float
    d_d: float
    delta_ad: float
    d_tot: float
    phi: float
    slacks: dict[str, float]
    budget6: PhiBudget | None = None
    pred8: tuple[float, float, float, float] | None = None

    @property
    def verdicts(self) -> dict[str, bool]:
        return {name: self.slacks[name] >= 0.0 for name in VERDICT_NAMES}

    @property
    def all_bounds_hold(self) -> bool:
        return all(self.verdicts.values())

    def csv_values(self) -> tuple[float, ...]:
        m = self.meta
        return (
            m.n, m.j_coupling, m.tau, m.w, m.k_pulses, m.l_pulses, m.total_time,
            self.delta_ad, self.d_d, self.delta_s, self.d_tot, self.phi,
            self.slacks["eq3"], self.slacks["eq5"],
        )

    def csv_row(self) -> str:
        return ",".join(format_number(v) for v in self.csv_values())

    def json_summary(self) -> str:
        data: dict = dict(zip(CSV_COLUMNS, self.csv_values()))
        for name, ok in self.verdicts.items():
            data[f"verdict_{name}"] = ok
        return json.dumps(data, sort_keys=True, indent=2)


def format_number(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def error_report(
    coupled: RunArtifacts,
    uncoupled: RunArtifacts,
    closed: ClosedRun,
    ideal_system: np.ndarray,
    meta: RunMeta | None = None,
    budget6: PhiBudget | None = None,
    pred8: tuple[float, float, float, float] | None = None,
) -> ErrorReport:
    """Assemble all distances and bound verdicts for one paired run.

    The ideal adiabatic joint state is the ideal system state tensored with
    the bath marginal of the uncoupled run; with complete pulse cycles and
    the non-interference condition this realizes the abstract ideal state
    without constructing the control factor explicitly.
    """
    if coupled.rho_final.shape != uncoupled.rho_final.shape:
        raise ValueError("coupled and uncoupled runs act on different joint spaces")
    t_c = coupled.diagnostics.get("total_time")
    t_u = uncoupled.diagnostics.get("total_time")
    if t_c is not None and t_u is not None and abs(t_c - t_u) > 1e-12 * max(1.0, abs(t_c)):
        raise ValueError(f"run timing mismatch: {t_c} vs {t_u}")
    dim_joint = coupled.rho_final.shape[0]
    dim_s = ideal_system.shape[0]
    if dim_joint % dim_s != 0:
        raise ValueError("ideal system dimension does not divide the joint dimension")
    dim_b = dim_joint // dim_s

    delta_s = trace_distance(coupled.rho_s_final, ideal_system)
    d_d = trace_distance(coupled.rho_final, uncoupled.rho_final)
    delta_ad = closed.delta_ad
    rho_b_final = partial_trace(uncoupled.rho_final, (dim_s, dim_b), (1,))
    rho_ad_joint = np.kron(ideal_system, rho_b_final)
    d_tot = trace_distance(coupled.rho_final, rho_ad_joint)
    phi = coupled.phi

    eq5_bound = min(1.0, math.expm1(phi) / 2)
    slacks = {
        "monotonic": d_tot + VERDICT_SLACK - delta_s,
        "triangle": d_d + delta_ad + VERDICT_SLACK - d_tot,
        "eq3": d_d + delta_ad + VERDICT_SLACK - delta_s,
        "eq5": eq5_bound + VERDICT_SLACK - d_d,
    }
    return ErrorReport(
        meta=meta or RunMeta(),
        delta_s=delta_s,
        d_d=d_d,
        delta_ad=delta_ad,
        d_tot=d_tot,
        phi=phi,
        slacks=slacks,
        budget6=budget6,
        pred8=pred8,
    )
