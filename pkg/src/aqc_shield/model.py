"""Hamiltonian construction: interpolation schedules, the 2-local universal
AQC family, the linear-decoherence system-bath model, and spectral gaps.

Conventions: s = t/T is dimensionless time, H(s) = (1-f(s)) H0 + f(s) H1,
and term lists are ``(coefficient, PauliString)`` pairs with real
coefficients.  All energies are expressed in units of the base scale
delta0 = 1 unless stated otherwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .pauli import PauliString, to_dense
from .linalg import op_norm, require_hermitian

SCHEDULE_KINDS = ("linear", "smooth-endpoint", "polynomial-smooth")

TermList = list[tuple[float, PauliString]]


@dataclass(frozen=True)
class Schedule:
    """Interpolation schedule f with f(0)=0, f(1)=1.

    The smooth kinds additionally have f'(0) = f'(1) = 0, which is the
    endpoint-flatness hypothesis the closed-system error estimates need.
    """

    kind: str = "smooth-endpoint"

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; choose from {SCHEDULE_KINDS}")

    def __call__(self, s: float) -> float:
        return schedule_eval(self.kind, s)[0]


def schedule_eval(kind: str, s: float) -> tuple[float, float, float]:
    """(f, f', f'') at s in [0, 1]."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s = {s} outside [0, 1]")
    if kind == "linear":
        return s, 1.0, 0.0
    if kind == "smooth-endpoint":
        two_pi = 2 * np.pi
        return (
            s - np.sin(two_pi * s) / two_pi,
            1.0 - np.cos(two_pi * s),
            two_pi * np.sin(two_pi * s),
        )
    if kind == "polynomial-smooth":
        return s * s * (3 - 2 * s), 6 * s * (1 - s), 6 - 12 * s
    raise ValueError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class AdiabaticSpec:
    """Interpolating system Hamiltonian plus run bookkeeping.

    ``code_basis``, when given, is a 2^n x 2^k isometry whose columns span
    the code space; ground states and spectra are then taken inside that
    subspace (encoded operation).
    """

    n: int
    h0_terms: TermList
    h1_terms: TermList
    schedule: Schedule = Schedule()
    total_time: float = 1.0
    delta0: float = 1.0
    code_basis: np.ndarray | None = None

    def __post_init__(self):
        for coeff, term in self.h0_terms + self.h1_terms:
            if term.n != self.n:
                raise ValueError(f"term {term} does not act on {self.n} qubits")
            if abs(complex(coeff).imag) > 0:
                raise ValueError(f"coefficient {coeff} must be real")


def dense_terms(terms: TermList, n: int) -> np.ndarray:
    """Dense sum of a coefficient/Pauli term list on n qubits."""
    dim = 1 << n
    h = np.zeros((dim, dim), dtype=complex)
    for coeff, term in terms:
        h += coeff * to_dense(term)
    return h


def h_ad(spec: AdiabaticSpec, s: float) -> np.ndarray:
    """Dense H(s) = (1 - f(s)) H0 + f(s) H1."""
    f = schedule_eval(spec.schedule.kind, s)[0]
    return (1 - f) * dense_terms(spec.h0_terms, spec.n) + f * dense_terms(spec.h1_terms, spec.n)


def universal_aqc_terms(
    h_coeffs: dict[tuple[int, str], float | Callable[[float], float]],
    j_coeffs: dict[tuple[int, int, str], float | Callable[[float], float]],
    n: int,
    s: float = 0.0,
) -> TermList:
    """Terms of the 2-local universal family sum h_i^a sigma_i^a + sum J_ij^a sigma_i^a sigma_j^a.

    Only a in {x, z} is allowed; transverse single-site fields and
    same-letter two-site couplings are exactly the interactions that stay
    2-local after encoding.  Coefficients may be numbers or callables of s.
    """
    terms: TermList = []
    for (i, alpha), coeff in h_coeffs.items():
        letter = _validate_alpha(alpha)
        value = coeff(s) if callable(coeff) else float(coeff)
        if value != 0.0:
            terms.append((value, PauliString.single(n, i, letter)))
    for (i, j, alpha), coeff in j_coeffs.items():
        letter = _validate_alpha(alpha)
        if i == j:
            raise ValueError(f"two-site coupling needs distinct sites, got ({i}, {j})")
        value = coeff(s) if callable(coeff) else float(coeff)
        if value != 0.0:
            pair = PauliString.single(n, i, letter) * PauliString.single(n, j, letter)
            terms.append((value, pair))
    return terms


def _validate_alpha(alpha: str) -> str:
    if alpha not in ("x", "z"):
        raise ValueError(f"only x and z couplings are 2-local encodable, got {alpha!r}")
    return alpha.upper()


@dataclass(frozen=True)
class SystemBathSpec:
    """Linear-decoherence coupling sum_j,a sigma_j^a (x) B_j^a plus a bath Hamiltonian.

    ``h_sb`` is the assembled dense coupling on the joint system (x) bath
    space, rescaled so its operator norm equals ``j_coupling``.
    """

    n: int
    n_b: int
    couplings: tuple[tuple[PauliString, np.ndarray], ...]
    h_b: np.ndarray
    h_sb: np.ndarray
    j_coupling: float
    beta_b: float
    seed: int

    @property
    def bath_dim(self) -> int:
        return 1 << self.n_b


def _random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (m + m.conj().T) / 2


def _random_two_local(rng: np.random.Generator, n_b: int) -> np.ndarray:
    """Random Hermitian built from 1- and 2-site Pauli terms with Gaussian weights."""
    dim = 1 << n_b
    h = np.zeros((dim, dim), dtype=complex)
    for site in range(n_b):
        for letter in "XYZ":
            h += rng.standard_normal() * to_dense(PauliString.single(n_b, site, letter))
    for a, b in itertools.combinations(range(n_b), 2):
        for la in "XYZ":
            for lb in "XYZ":
                pair = PauliString.single(n_b, a, la) * PauliString.single(n_b, b, lb)
                h += rng.standard_normal() * to_dense(pair)
    return h


def linear_decoherence(
    n: int, n_b: int, j_coupling: float, seed: int, beta_b: float = 1.0
) -> SystemBathSpec:
    """Seeded linear-decoherence model with 3n coupling terms.

    Every system qubit couples through each of sigma^x, sigma^y, sigma^z to
    its own random Hermitian bath factor; the assembled coupling is globally
    rescaled so its operator norm is exactly ``j_coupling``.  The bath
    Hamiltonian is a random 2-local Hermitian rescaled to ``beta_b``.
    ``j_coupling = 0`` yields identically zero coupling factors.
    """
    if n < 1 or n_b < 1:
        raise ValueError("need at least one system and one bath qubit")
    if j_coupling < 0:
        raise ValueError(f"coupling strength must be nonnegative, got {j_coupling}")
    if beta_b < 0:
        raise ValueError(f"bath norm must be nonnegative, got {beta_b}")
    rng = np.random.default_rng(seed)
    bath_dim = 1 << n_b
    factors = []
    for alpha in "xyz":
        for site in range(n):
            factors.append(
                (PauliString.single(n, site, alpha.upper()), _random_hermitian(rng, bath_dim))
            )
    h_b = _random_two_local(rng, n_b)
    norm_b = op_norm(h_b)
    if norm_b > 0:
        h_b = h_b * (beta_b / norm_b)
    joint_dim = (1 << n) * bath_dim
    h_sb = np.zeros((joint_dim, joint_dim), dtype=complex)
    for term, factor in factors:
        h_sb += np.kron(to_dense(term), factor)
    raw_norm = op_norm(h_sb)
    scale = j_coupling / raw_norm if raw_norm > 0 else 0.0
    couplings = tuple((term, factor * scale) for term, factor in factors)
    return SystemBathSpec(
        n=n,
        n_b=n_b,
        couplings=couplings,
        h_b=h_b,
        h_sb=h_sb * scale,
        j_coupling=j_coupling,
        beta_b=beta_b,
        seed=seed,
    )


@dataclass(frozen=True)
class SpectralReport:
    """Spectrum of H(s) on a grid, with the minimal gap above the ground level."""

    s_grid: np.ndarray
    energies: np.ndarray
    gap: float
    s_star: float
    degenerate: bool = False


def min_gap(spec: AdiabaticSpec, grid_points: int = 101, refine: bool = True) -> SpectralReport:
    """Minimal gap E1(s) - E0(s) over s in [0, 1].

    Dense Hermitian solves on a uniform grid, then an optional
    golden-section refinement of the gap around the coarse minimum.  When
    the ground level is degenerate (gap below 1e-12) somewhere, the report
    carries ``degenerate=True`` and the gap 0 at that point.
    """
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    basis = spec.code_basis
    s_grid = np.linspace(0.0, 1.0, grid_points)

    def levels(s: float) -> np.ndarray:
        h = h_ad(spec, s)
        if basis is not None:
            h = basis.conj().T @ h @ basis
        return np.linalg.eigvalsh(h)

    energies = np.array([levels(s) for s in s_grid])
    gaps = energies[:, 1] - energies[:, 0]
    idx = int(np.argmin(gaps))
    gap = float(gaps[idx])
    s_star = float(s_grid[idx])
    if gap < 1e-12:
        return SpectralReport(s_grid, energies, 0.0, s_star, degenerate=True)
    if refine:
        lo = s_grid[max(idx - 1, 0)]
        hi = s_grid[min(idx + 1, grid_points - 1)]
        s_star, gap = _golden_section(lambda s: float(levels(s)[1] - levels(s)[0]), lo, hi)
        if gap < 1e-12:
            return SpectralReport(s_grid, energies, 0.0, s_star, degenerate=True)
    return SpectralReport(s_grid, energies, gap, s_star)


def _golden_section(f: Callable[[float], float], a: float, b: float, xtol: float = 1e-8):
    """Standard golden-section minimization on [a, b]."""
    inv_phi = (np.sqrt(5) - 1) / 2
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > xtol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = f(x2)
    x = (a + b) / 2
    return float(x), float(f(x))


def beta_system_bath(spec: AdiabaticSpec, h_b: np.ndarray, penalty: np.ndarray | None = None,
                     samples: int = 21) -> float:
    """Exact norm of H(s) (+ penalty) (x) I + I (x) H_B, maximized over sampled s.

    Spectra of the two commuting summands add, so the norm is the largest
    |lambda_i + mu_j| over extreme eigenvalues.
    """
    mu = np.linalg.eigvalsh(h_b)
    mu_lo, mu_hi = float(mu[0]), float(mu[-1])
    best = 0.0
    for s in np.linspace(0.0, 1.0, samples):
        h = h_ad(spec, s)
        if penalty is not None:
            h = h + penalty
        require_hermitian(h, 1e-9, "system Hamiltonian")
        lam = np.linalg.eigvalsh(h)
        best = max(best, abs(float(lam[-1]) + mu_hi), abs(float(lam[0]) + mu_lo))
    return best


def universal_2local_preset(k: int) -> tuple[
    dict[tuple[int, str], float], dict[tuple[int, str], float],
    dict[tuple[int, int, str], float], dict[tuple[int, int, str], float],
]:
    """Fixed coefficients for the shipped `universal-2local` instance on k qubits.

    H0 is a uniform transverse field -sum_i X_i; H1 is a frustration-free
    Ising chain with site-dependent fields, chosen to have a unique ground
    state and an O(1) minimal gap at desk scale.
    """
    if k < 1:
        raise ValueError(f"preset needs at least one logical qubit, got {k}")
    h0_fields = {(i, "x"): -1.0 for i in range(k)}
    h1_fields = {(i, "z"): -(0.8 + 0.2 * (i % 3)) for i in range(k)}
    h0_pairs: dict[tuple[int, int, str], float] = {}
    h1_pairs = {(i, i + 1, "z"): -0.5 for i in range(k - 1)}
    return h0_fields, h1_fields, h0_pairs, h1_pairs
