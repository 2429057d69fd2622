"""Propagation of the excitation: unitary noise trajectories, the dephasing
Lindblad equation, and the incoherent-hopping rate equation.

All three solvers share the single-excitation convention of :mod:`.model`:
hopping J_ij off the diagonal, instantaneous diagonal 2*(b_i + w_i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CouplingMatrix, DisorderProfile, HamiltonianMatrix
from .noise import NoiseTrajectory

__all__ = [
    "StateVector",
    "DensityMatrix",
    "PopulationSeries",
    "RateMatrix",
    "LindbladResult",
    "propagate_trajectory",
    "lindblad_evolve",
    "classical_rates",
    "rate_equation_evolve",
]

_NORM_TOL = 1e-9
_POSITIVITY_TOL = 1e-8
#: resolved dynamics per characteristic period: step <= 1 / (50 * fastest rate)
_STEPS_PER_RATE = 50.0


@dataclass(frozen=True)
class StateVector:
    """Pure state in the site basis, unit norm within 1e-9."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("amplitudes must be a nonempty 1-d array")
        norm2 = float(np.vdot(a, a).real)
        if abs(norm2 - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm^2 = {norm2} deviates from 1")
        a = np.array(a, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def site_basis(cls, n_sites: int, site: int) -> "StateVector":
        """Excitation localized on the 1-based ``site``."""
        if not 1 <= site <= n_sites:
            raise ValueError(f"site {site} outside 1..{n_sites}")
        a = np.zeros(n_sites, dtype=complex)
        a[site - 1] = 1.0
        return cls(amplitudes=a)

    @property
    def n_sites(self) -> int:
        return self.amplitudes.shape[0]

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite state (tolerance 1e-8)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"density matrix must be square, got {v.shape}")
        if np.linalg.norm(v - v.conj().T) > _NORM_TOL * max(1.0, np.linalg.norm(v)):
            raise ValueError("density matrix must be hermitian")
        tr = float(np.trace(v).real)
        if abs(tr - 1.0) > _NORM_TOL:
            raise ValueError(f"trace = {tr} deviates from 1")
        if float(np.linalg.eigvalsh(v).min()) < -_POSITIVITY_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        v = np.array(v, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        a = state.amplitudes
        return cls(values=np.outer(a, a.conj()))

    @classmethod
    def site_basis(cls, n_sites: int, site: int) -> "DensityMatrix":
        return cls.from_state(StateVector.site_basis(n_sites, site))

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]

    def populations(self) -> np.ndarray:
        return np.diag(self.values).real.copy()


@dataclass(frozen=True)
class PopulationSeries:
    """Site populations on a time grid: ``populations[i, k]`` at ``times[k]``."""

    times: np.ndarray
    populations: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.populations, dtype=float)
        if t.ndim != 1 or p.ndim != 2 or p.shape[1] != t.shape[0]:
            raise ValueError(
                f"shape mismatch: times {t.shape}, populations {p.shape}")
        if t.size and (t[0] < 0 or np.any(np.diff(t) < 0)):
            raise ValueError("times must be nonnegative and nondecreasing")
        t = np.array(t, copy=True)
        p = np.array(p, copy=True)
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "populations", p)

    @property
    def n_sites(self) -> int:
        return self.populations.shape[0]

    def site(self, site: int) -> np.ndarray:
        """Time series for the 1-based ``site``."""
        if not 1 <= site <= self.n_sites:
            raise ValueError(f"site {site} outside 1..{self.n_sites}")
        return self.populations[site - 1]


@dataclass(frozen=True)
class RateMatrix:
    """Symmetric nonnegative hopping rates (rad/s), zero diagonal."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"rate matrix must be square, got {v.shape}")
        if np.linalg.norm(v - v.T) > 1e-12 * max(1.0, np.linalg.norm(v)):
            raise ValueError("rate matrix must be symmetric")
        if np.any(np.diag(v) != 0.0) or np.any(v < 0):
            raise ValueError("rates must be nonnegative with zero diagonal")
        v = np.array(v, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]


def _coupling_values(coupling) -> np.ndarray:
    """Accept a CouplingMatrix or any symmetric zero-diagonal array (the
    latter admits degenerate cases like J = 0 that the power-law type
    deliberately forbids)."""
    if isinstance(coupling, CouplingMatrix):
        return coupling.values
    v = np.asarray(coupling, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"coupling must be square, got {v.shape}")
    if not np.allclose(v, v.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(v).max())):
        raise ValueError("coupling must be symmetric")
    if np.any(np.diag(v) != 0.0):
        raise ValueError("coupling must have zero diagonal")
    return v


def _check_output_times(output_times, t_end: float) -> np.ndarray:
    times = np.asarray(output_times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("output_times must be a nonempty 1-d array")
    if np.any(np.diff(times) < 0):
        raise ValueError("output_times must be nondecreasing")
    if times[0] < 0 or times[-1] > t_end * (1 + 1e-9):
        raise ValueError(
            f"output_times must lie in [0, {t_end}], got "
            f"[{times[0]}, {times[-1]}]")
    return times


def propagate_trajectory(
    coupling,
    disorder: DisorderProfile | None,
    noise: NoiseTrajectory,
    psi0: StateVector,
    output_times,
) -> PopulationSeries:
    """Unitary evolution under one noise realization.

    Within each constant-noise segment the exact propagator
    ``exp(-i H_k tau)`` is applied through the eigendecomposition of the real
    symmetric segment Hamiltonian; there is no time-discretization error
    beyond the piecewise-constant noise itself.  Populations are recorded at
    ``output_times`` (which may fall inside segments).
    """
    jv = _coupling_values(coupling)
    n = jv.shape[0]
    if noise.n_sites != n:
        raise ValueError(f"noise has {noise.n_sites} sites, coupling has {n}")
    if psi0.n_sites != n:
        raise ValueError(f"state has {psi0.n_sites} sites, coupling has {n}")
    b = np.zeros(n) if disorder is None else disorder.b
    if b.shape[0] != n:
        raise ValueError(f"disorder has {b.shape[0]} sites, coupling has {n}")
    times = _check_output_times(output_times, noise.t_total)

    dt = noise.dt
    seg_of = np.minimum((times / dt).astype(int), noise.n_steps - 1)
    n_seg = int(seg_of[-1]) + 1

    h = np.empty((n_seg, n, n))
    h[:] = jv
    di = np.arange(n)
    h[:, di, di] = 2.0 * (b[None, :] + noise.values[:, :n_seg].T)
    evals, evecs = np.linalg.eigh(h)

    out = np.empty((n, times.shape[0]))
    psi = psi0.amplitudes.copy()
    pos = 0
    n_times = times.shape[0]
    for k in range(n_seg):
        c = evecs[k].T @ psi
        while pos < n_times and seg_of[pos] == k:
            tau = times[pos] - k * dt
            # segment boundaries hold the state exactly; skip the round trip
            amp = psi if tau == 0.0 else evecs[k] @ (np.exp(-1j * evals[k] * tau) * c)
            out[:, pos] = amp.real ** 2 + amp.imag ** 2
            pos += 1
        psi = evecs[k] @ (np.exp(-1j * evals[k] * dt) * c)

    norm_drift = float(np.max(np.abs(out.sum(axis=0) - 1.0)))
    if norm_drift > _NORM_TOL:
        raise RuntimeError(f"norm drifted by {norm_drift} during propagation")
    return PopulationSeries(times=times, populations=out)


@dataclass(frozen=True)
class LindbladResult:
    """Density matrices on the output grid plus their populations."""

    times: np.ndarray
    rho: np.ndarray

    def population_series(self) -> PopulationSeries:
        p = np.einsum("kii->ik", self.rho).real
        return PopulationSeries(times=self.times, populations=p)


def _site_rates(gammas, n: int) -> np.ndarray:
    g = np.asarray(gammas, dtype=float)
    if g.ndim == 0:
        g = np.full(n, float(g))
    if g.shape != (n,):
        raise ValueError(f"gammas must be scalar or shape ({n},), got {g.shape}")
    if np.any(g < 0):
        raise ValueError("dephasing rates must be >= 0")
    return g


def lindblad_evolve(
    h: HamiltonianMatrix | np.ndarray,
    gammas,
    rho0: DensityMatrix,
    output_times,
    max_step: float | None = None,
    validate: bool = True,
) -> LindbladResult:
    """Pure-dephasing master equation, fixed-step classic Runge-Kutta.

    d rho/dt = -i [H, rho] - D o rho, where the elementwise damping is
    D_jk = (gamma_j + gamma_k)/2 off the diagonal and zero on it: dephasing
    in the site basis erodes coherences and conserves every population's sum.
    The step is at most ``1 / (50 * max rate)`` with the max taken over
    couplings, diagonal energies and dephasing rates, so the fastest phase is
    always well resolved; ``max_step`` can force a smaller one.
    """
    if not isinstance(h, HamiltonianMatrix):
        h = HamiltonianMatrix(values=np.asarray(h))
    n = h.n_sites
    if rho0.n_sites != n:
        raise ValueError(f"rho0 has {rho0.n_sites} sites, H has {n}")
    g = _site_rates(gammas, n)
    times = np.asarray(output_times, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("output_times must be nonnegative and nondecreasing")

    hm = np.asarray(h.values, dtype=complex)
    damp = 0.5 * (g[:, None] + g[None, :])
    np.fill_diagonal(damp, 0.0)

    # Gershgorin bound on the spectral radius; tighter than max(J, 2b, gamma)
    gersh = float((np.abs(h.values).sum(axis=1)).max())
    scale = max(gersh, float(g.max()))
    step = 1.0 / (_STEPS_PER_RATE * scale) if scale > 0 else np.inf
    if max_step is not None:
        if not max_step > 0:
            raise ValueError(f"max_step must be positive, got {max_step}")
        step = min(step, max_step)

    def rhs(rho: np.ndarray) -> np.ndarray:
        return -1j * (hm @ rho - rho @ hm) - damp * rho

    def integrate(step: float) -> np.ndarray:
        rho = np.array(rho0.values, dtype=complex)
        out = np.empty((times.shape[0], n, n), dtype=complex)
        t_now = 0.0
        for idx, t_target in enumerate(times):
            span = t_target - t_now
            if span > 0:
                n_sub = max(1, int(np.ceil(span / step - 1e-12))) if np.isfinite(step) else 1
                hstep = span / n_sub
                for _ in range(n_sub):
                    k1 = rhs(rho)
                    k2 = rhs(rho + 0.5 * hstep * k1)
                    k3 = rhs(rho + 0.5 * hstep * k2)
                    k4 = rhs(rho + hstep * k3)
                    rho = rho + (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                t_now = t_target
            out[idx] = rho
        return out

    def check(out: np.ndarray) -> str | None:
        tr_drift = float(np.max(np.abs(np.einsum("kii->k", out).real - 1.0)))
        if tr_drift > _NORM_TOL:
            return f"trace drifted by {tr_drift}"
        min_eig = min(float(np.linalg.eigvalsh(out[k]).min())
                      for k in range(out.shape[0]))
        if min_eig < -_POSITIVITY_TOL:
            return f"positivity violated: min eigenvalue {min_eig}"
        return None

    failure = None
    for _ in range(3):  # refine on invariant failure before giving up
        out = integrate(step)
        failure = check(out) if validate else None
        if failure is None:
            return LindbladResult(times=times, rho=out)
        step /= 4.0
    raise RuntimeError(f"integration step refinement exhausted: {failure}")


def classical_rates(
    coupling,
    disorder: DisorderProfile | None,
    gammas,
) -> RateMatrix:
    """Incoherent hopping rates from dephasing-broadened resonances.

    Adiabatic elimination of the coherences (each damped at
    gbar = (gamma_l + gamma_i)/2) gives

        Gamma_li = 2 * gbar * J_li^2 / ((2 (b_i - b_l))^2 + gbar^2)

    where the factor 2 on the detuning reflects the diagonal convention
    H_ii = 2 b_i.  On resonance this is the familiar 2 J^2 / gbar hopping
    rate of strongly dephased two-site transfer.  All rates vanish as
    gamma -> 0, where the incoherent picture loses its meaning, so gamma = 0
    is rejected.
    """
    jv = _coupling_values(coupling)
    n = jv.shape[0]
    g = _site_rates(gammas, n)
    if np.any(g <= 0):
        raise ValueError("classical rates need strictly positive dephasing; "
                         "the gamma -> 0 limit has no incoherent description")
    b = np.zeros(n) if disorder is None else disorder.b
    if b.shape[0] != n:
        raise ValueError(f"disorder has {b.shape[0]} sites, coupling has {n}")
    gbar = 0.5 * (g[:, None] + g[None, :])
    detune = 2.0 * (b[:, None] - b[None, :])
    rates = 2.0 * gbar * jv ** 2 / (detune ** 2 + gbar ** 2)
    np.fill_diagonal(rates, 0.0)
    return RateMatrix(values=rates)


def rate_equation_evolve(rates: RateMatrix, p0, output_times) -> PopulationSeries:
    """Master equation dp_i/dt = Sum_l Gamma_li (p_l - p_i), solved exactly.

    The generator is symmetric, so the propagator is evaluated through one
    eigendecomposition; total probability is conserved to round-off and the
    uniform distribution is stationary.
    """
    n = rates.n_sites
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (n,):
        raise ValueError(f"p0 must have shape ({n},), got {p0.shape}")
    if np.any(p0 < -1e-12) or abs(p0.sum() - 1.0) > _NORM_TOL:
        raise ValueError("p0 must be a probability vector")
    times = np.asarray(output_times, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(times < 0):
        raise ValueError("output_times must be nonnegative")

    gen = rates.values.copy()
    gen[np.diag_indices(n)] = -rates.values.sum(axis=0)
    evals, evecs = np.linalg.eigh(gen)
    c = evecs.T @ p0
    # p(t) = Q exp(D t) Q^T p0, vectorized over the time grid
    p = evecs @ (np.exp(np.outer(evals, times)) * c[:, None])
    return PopulationSeries(times=times, populations=p)
