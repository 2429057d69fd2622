"""Network geometry, couplings, static disorder and spectral helpers.

Everything lives in the single-excitation subspace of an N-site spin chain:
basis state ``|i>`` means the excitation sits on site ``i``.  Couplings decay
as a power law of the site distance, ``J_ij = j_max / |i - j|**alpha``, and
on-site energies enter the Hamiltonian diagonal as ``2 * (b_i + w_i)`` (the
factor 2 comes from the Pauli-z splitting; the state-independent part only
contributes a global phase and is dropped).

Units: rates and angular frequencies in rad/s, times in seconds.  Site labels
in public interfaces are 1-based (site 1 .. site N); array indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NetworkSpec",
    "CouplingMatrix",
    "DisorderProfile",
    "HamiltonianMatrix",
    "EigenSystem",
    "build_coupling_matrix",
    "sample_disorder",
    "assemble_hamiltonian",
    "eigensystem",
    "difference_frequencies",
]

#: relative tolerance for hermiticity / symmetry checks on assembled operators
_HERMITICITY_RTOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    # copy before freezing so a caller's array is never locked behind its back
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class NetworkSpec:
    """Static description of the chain and the transport problem posed on it.

    Parameters
    ----------
    n_sites : int
        Number of sites N (>= 2).
    j_max : float
        Nearest-neighbour coupling in rad/s; also the unit used for all
        dimensionless rate ratios.
    alpha : float
        Power-law exponent of the coupling decay.
    source_site : int
        1-based site initially populated.
    target_sites : tuple[int, ...]
        1-based sites whose arrival probability is integrated into the
        transport efficiency.
    t_max : float
        Transport window in seconds; efficiencies integrate over [0, t_max].
    """

    n_sites: int
    j_max: float
    alpha: float
    source_site: int
    target_sites: tuple[int, ...]
    t_max: float

    def __post_init__(self) -> None:
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be >= 2, got {self.n_sites}")
        if not self.j_max > 0:
            raise ValueError(f"j_max must be positive, got {self.j_max}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        object.__setattr__(self, "target_sites", tuple(self.target_sites))
        for name, sites in (("source_site", (self.source_site,)),
                            ("target_sites", self.target_sites)):
            for s in sites:
                if not 1 <= s <= self.n_sites:
                    raise ValueError(
                        f"{name}: site {s} outside 1..{self.n_sites}")
        if not self.target_sites:
            raise ValueError("target_sites must not be empty")


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric hopping matrix with power-law distance decay."""

    values: np.ndarray
    j_max: float
    alpha: float

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"coupling matrix must be square, got {v.shape}")
        if not np.array_equal(v, v.T):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(v) != 0.0):
            raise ValueError("coupling matrix must have zero diagonal")
        off = v[~np.eye(v.shape[0], dtype=bool)]
        if v.shape[0] > 1 and not np.all(off > 0):
            raise ValueError("couplings must be positive off the diagonal")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class DisorderProfile:
    """One draw of static on-site energies, |b_i| <= b_max (rad/s)."""

    b: np.ndarray
    b_max: float
    seed: object = None

    def __post_init__(self) -> None:
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 1:
            raise ValueError("disorder profile must be a 1-d array")
        if self.b_max < 0:
            raise ValueError(f"b_max must be >= 0, got {self.b_max}")
        if np.any(np.abs(b) > self.b_max * (1 + 1e-12) + 0.0):
            raise ValueError("disorder values exceed the stated bound b_max")
        object.__setattr__(self, "b", _readonly(b))

    @property
    def n_sites(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Hermitian single-excitation Hamiltonian (rad/s)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"hamiltonian must be square, got {v.shape}")
        scale = np.linalg.norm(v)
        if np.linalg.norm(v - v.conj().T) > _HERMITICITY_RTOL * max(scale, 1.0):
            raise ValueError("hamiltonian is not hermitian within tolerance")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition of a Hamiltonian: ``values`` ascending (rad/s),
    ``vectors[:, k]`` the matching orthonormal eigenvector."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _readonly(self.values))
        object.__setattr__(self, "vectors", _readonly(self.vectors))

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]


def build_coupling_matrix(n_sites: int, j_max: float, alpha: float) -> CouplingMatrix:
    """Power-law couplings ``J_ij = j_max / |i - j|**alpha``, zero diagonal.

    The nearest-neighbour value equals ``j_max`` exactly and couplings decrease
    strictly with distance.
    """
    if n_sites < 2:
        raise ValueError(f"n_sites must be >= 2, got {n_sites}")
    if not j_max > 0 or not alpha > 0:
        raise ValueError("j_max and alpha must be positive")
    idx = np.arange(n_sites)
    dist = np.abs(idx[:, None] - idx[None, :]).astype(float)
    with np.errstate(divide="ignore"):
        values = j_max * dist ** (-alpha)
    np.fill_diagonal(values, 0.0)
    return CouplingMatrix(values=values, j_max=float(j_max), alpha=float(alpha))


def sample_disorder(n_sites: int, b_max: float, seed) -> DisorderProfile:
    """Draw iid on-site energies ``b_i ~ Uniform[-b_max, b_max]`` (rad/s).

    ``seed`` may be an int or a ``numpy.random.SeedSequence``; identical seeds
    give bit-identical draws.  ``b_max = 0`` yields the clean chain.
    """
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    if b_max < 0:
        raise ValueError(f"b_max must be >= 0, got {b_max}")
    rng = np.random.default_rng(seed)
    b = rng.uniform(-b_max, b_max, size=n_sites)
    return DisorderProfile(b=b, b_max=float(b_max), seed=seed)


def assemble_hamiltonian(
    coupling: CouplingMatrix,
    disorder: DisorderProfile | None = None,
    w: np.ndarray | None = None,
) -> HamiltonianMatrix:
    """Assemble ``<i|H|j> = J_ij`` (i != j), ``H_ii = 2 (b_i + w_i)``.

    ``w`` is an optional instantaneous noise vector in rad/s (one entry per
    site).  Either energy contribution may be omitted.
    """
    n = coupling.n_sites
    h = np.array(coupling.values, dtype=float, copy=True)
    diag = np.zeros(n)
    if disorder is not None:
        if disorder.n_sites != n:
            raise ValueError(
                f"disorder has {disorder.n_sites} sites, coupling has {n}")
        diag += disorder.b
    if w is not None:
        w = np.asarray(w, dtype=float)
        if w.shape != (n,):
            raise ValueError(f"noise vector must have shape ({n},), got {w.shape}")
        diag += w
    h[np.diag_indices(n)] = 2.0 * diag
    return HamiltonianMatrix(values=h)


def eigensystem(h: HamiltonianMatrix | np.ndarray) -> EigenSystem:
    """Eigenvalues (ascending) and orthonormal eigenvectors of ``h``.

    Accepts a ``HamiltonianMatrix`` or a raw hermitian array; raw input is
    checked for hermiticity before decomposition.
    """
    if not isinstance(h, HamiltonianMatrix):
        h = HamiltonianMatrix(values=np.asarray(h))
    vals, vecs = np.linalg.eigh(h.values)
    return EigenSystem(values=vals, vectors=vecs)


def difference_frequencies(eig: EigenSystem) -> np.ndarray:
    """All pairwise eigenenergy gaps ``|e_k - e_l|`` for k < l, ascending.

    Degenerate pairs are kept, so the result always has N(N-1)/2 entries.
    These are the frequencies at which diagonal noise can drive transitions
    between energy eigenstates.
    """
    e = np.asarray(eig.values)
    k, l = np.triu_indices(e.shape[0], k=1)
    return np.sort(np.abs(e[k] - e[l]))
