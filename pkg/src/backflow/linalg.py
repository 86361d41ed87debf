"""Dense complex linear algebra and quantum state primitives.

Conventions used throughout the package: operators are dense, row-major
complex128 numpy arrays; composite spaces put the system in the leftmost
tensor factor; |0> is the sigma_z eigenstate with eigenvalue +1.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

__all__ = [
    "Bipartition",
    "DensityMatrix",
    "PureState",
    "kron",
    "hermitian_eig",
    "trace_norm",
    "partial_trace",
    "von_neumann_entropy",
    "purity",
    "state_vector_from_density",
    "haar_random_state",
]

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
NORM_ATOL = 1e-12
PSD_FLOOR = -1e-10
ENTROPY_CUTOFF = 1e-14


def _matrix_of(a) -> np.ndarray:
    """Underlying complex matrix of `a` (plain array or DensityMatrix)."""
    return np.asarray(getattr(a, "matrix", a), dtype=np.complex128)


def _dims_tuple(dims) -> tuple[int, ...]:
    if isinstance(dims, Bipartition):
        return (dims.d_system, dims.d_environment)
    return tuple(int(d) for d in dims)


@dataclass(frozen=True)
class Bipartition:
    """System x environment split of a joint space (system leftmost)."""

    d_system: int
    d_environment: int

    def __post_init__(self) -> None:
        if self.d_system < 1 or self.d_environment < 1:
            raise ValueError(
                f"bipartition dimensions must be positive, got "
                f"({self.d_system}, {self.d_environment})"
            )

    @property
    def d_joint(self) -> int:
        return self.d_system * self.d_environment


@dataclass(frozen=True)
class DensityMatrix:
    """Unit-trace, Hermitian, positive semidefinite operator.

    `dims` records the tensor factorization of the underlying space,
    e.g. (2, 512) for one qubit against a nine-spin environment.
    `check_psd=False` skips the eigenvalue scan; it is reserved for
    matrices that are positive by construction (outer products).
    """

    matrix: np.ndarray
    dims: tuple[int, ...]
    check_psd: InitVar[bool] = True

    def __post_init__(self, check_psd: bool) -> None:
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.complex128))
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", _dims_tuple(self.dims))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        n = m.shape[0]
        if int(np.prod(self.dims)) != n:
            raise ValueError(f"dims {self.dims} do not factor dimension {n}")
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > HERMITIAN_ATOL:
            raise ValueError(f"density matrix not Hermitian, max asymmetry {asym:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace {tr:.17g} differs from 1")
        if check_psd:
            low = float(np.linalg.eigvalsh(m)[0])
            if low < PSD_FLOOR:
                raise ValueError(f"density matrix has negative eigenvalue {low:.3e}")

    @classmethod
    def from_state_vector(cls, amplitudes: np.ndarray, dims) -> "DensityMatrix":
        v = np.asarray(amplitudes, dtype=np.complex128).ravel()
        return cls(np.outer(v, v.conj()), _dims_tuple(dims), check_psd=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class PureState:
    """Normalized state vector over a declared tensor factorization."""

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(np.asarray(self.amplitudes, dtype=np.complex128).ravel())
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "dims", _dims_tuple(self.dims))
        if int(np.prod(self.dims)) != v.size:
            raise ValueError(f"dims {self.dims} do not factor dimension {v.size}")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {norm:.17g} differs from 1")

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix.from_state_vector(self.amplitudes, self.dims)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two matrices, left factor slowest."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("kron expects two matrices")
    return np.kron(a, b)


def hermitian_eig(h: np.ndarray, atol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues ascending and
    eigenvectors as orthonormal columns. Inputs whose max asymmetry
    exceeds `atol` are rejected.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    asym = float(np.max(np.abs(h - h.conj().T)))
    if asym > atol:
        raise ValueError(f"matrix not Hermitian, max asymmetry {asym:.3e}")
    w, v = np.linalg.eigh((h + h.conj().T) / 2.0)
    return w, v


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values of a square matrix."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"trace norm defined here for square matrices, got shape {a.shape}")
    return float(np.linalg.svd(a, compute_uv=False).sum())


def partial_trace(m, bipartition: Bipartition, keep: str = "system") -> np.ndarray:
    """Reduce a joint operator to one factor of `bipartition`.

    keep="system" traces out the environment, keep="environment" traces
    out the system. Accepts a plain array or a DensityMatrix.
    """
    x = _matrix_of(m)
    ds, de = bipartition.d_system, bipartition.d_environment
    if x.shape != (ds * de, ds * de):
        raise ValueError(f"operator shape {x.shape} does not match bipartition ({ds}, {de})")
    t = x.reshape(ds, de, ds, de)
    if keep == "system":
        return np.einsum("abcb->ac", t)
    if keep == "environment":
        return np.einsum("abad->bd", t)
    raise ValueError(f"keep must be 'system' or 'environment', got {keep!r}")


def von_neumann_entropy(rho) -> float:
    """Entropy -sum(p log2 p) of a density operator, in bits.

    Eigenvalues below 1e-14 are treated as exactly zero so that rounding
    noise from reductions of pure states cannot contribute.
    """
    w = np.linalg.eigvalsh(_matrix_of(rho))
    w = np.where(w < ENTROPY_CUTOFF, 0.0, w)
    logs = np.zeros_like(w)
    np.log2(w, out=logs, where=w > 0)
    return float(-(w * logs).sum())


def purity(rho) -> float:
    """Tr(rho^2) as a real number."""
    m = _matrix_of(rho)
    return float(np.real(np.einsum("ij,ji->", m, m)))


def state_vector_from_density(rho, atol: float = 1e-10) -> np.ndarray:
    """Recover the state vector of a rank-one density operator.

    The global phase is arbitrary. Raises ValueError when the operator
    is not pure within `atol` (max entrywise residual against the
    reconstructed projector).
    """
    m = _matrix_of(rho)
    diag = np.real(np.diag(m))
    j = int(np.argmax(diag))
    if diag[j] <= 0.0:
        raise ValueError("density operator has no positive diagonal entry")
    v = m[:, j] / np.sqrt(diag[j])
    resid = float(np.max(np.abs(m - np.outer(v, v.conj()))))
    if resid > atol:
        raise ValueError(f"density operator is not pure, projector residual {resid:.3e}")
    return v


def haar_random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed pure state vector of the given dimension."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)
