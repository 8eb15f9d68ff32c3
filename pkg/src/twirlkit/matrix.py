"""Dense complex matrices, Kraus operations and superoperators.

Superoperators act on column-stacked vectorized matrices, so that

    vec(A @ X @ B) == kron(B.T, A) @ vec(X)

For the 2x2 matrix [[a, b], [c, d]] this means vec(X) = (a, c, b, d).
Every superoperator in this package is a plain ``(d*d, d*d)`` complex
ndarray in that convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import (
    DimMismatch,
    DimensionTooLarge,
    MalformedInput,
    NotHermitian,
    NotPSD,
    NotTracePreserving,
    TraceNotOne,
)

MAX_DIM = 64

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-12
KRAUS_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def as_square(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a complex square ndarray, checking shape, cap and finiteness."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimMismatch(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise DimensionTooLarge(f"{name} dimension {a.shape[0]} exceeds cap {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated quantum state. Build it with :func:`validate_density`."""

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)


def validate_density(entries) -> DensityMatrix:
    """Check Hermiticity, positivity and unit trace.

    Raises NotHermitian, NotPSD or TraceNotOne naming the violated invariant.

    >>> validate_density([[0.5, 0.5], [0.5, 0.5]]).dim
    2
    """
    a = as_square(entries, "density matrix")
    herm_err = np.max(np.abs(a - a.conj().T))
    if herm_err > HERMITIAN_TOL:
        raise NotHermitian(f"matrix is not Hermitian (max deviation {herm_err:.3e})")
    min_eig = float(np.linalg.eigvalsh((a + a.conj().T) / 2).min())
    if min_eig < -PSD_TOL:
        raise NotPSD(f"matrix is not positive semidefinite (min eigenvalue {min_eig:.6g})",
                     min_eigenvalue=min_eig)
    tr = np.trace(a)
    if abs(tr - 1) > TRACE_TOL:
        raise TraceNotOne(f"trace is {tr.real:.15g}, expected 1", trace=complex(tr))
    return DensityMatrix(_frozen(a))


def purity(rho) -> float:
    """Tr(rho^2), computed as the sum of squared entry moduli."""
    a = np.asarray(rho, dtype=complex)
    return float(np.sum(np.abs(a) ** 2))


@dataclass(frozen=True, eq=False)
class KrausOperation:
    """A quantum operation given by Kraus operators ``K_i``.

    With ``trace_preserving`` set, ``sum K_i^dag K_i = I`` is enforced.
    """

    kraus: Tuple[np.ndarray, ...]
    trace_preserving: bool = True
    dim: int = field(init=False)

    def __post_init__(self):
        ks = [as_square(k, "Kraus operator") for k in self.kraus]
        if not ks:
            raise MalformedInput("at least one Kraus operator is required", field="kraus")
        d = ks[0].shape[0]
        if any(k.shape != (d, d) for k in ks):
            raise DimMismatch("Kraus operators have inconsistent shapes")
        object.__setattr__(self, "kraus", tuple(_frozen(k) for k in ks))
        object.__setattr__(self, "dim", d)
        if self.trace_preserving:
            gram = sum(k.conj().T @ k for k in ks)
            err = np.max(np.abs(gram - np.eye(d)))
            if err > KRAUS_TOL:
                raise NotTracePreserving(
                    f"sum of K^dag K deviates from identity by {err:.3e}")

    @classmethod
    def unitary(cls, u) -> "KrausOperation":
        return cls((np.asarray(u, dtype=complex),), trace_preserving=True)

    @classmethod
    def identity(cls, dim: int) -> "KrausOperation":
        return cls.unitary(np.eye(dim))


def apply_kraus(op: KrausOperation, m) -> np.ndarray:
    a = as_square(m)
    if a.shape[0] != op.dim:
        raise DimMismatch(f"operation has dim {op.dim}, matrix has dim {a.shape[0]}")
    return sum(k @ a @ k.conj().T for k in op.kraus)


def vec(m) -> np.ndarray:
    """Column-stack a matrix into a 1-D vector."""
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def superop_dim(s: np.ndarray) -> int:
    s = np.asarray(s)
    d = int(round(np.sqrt(s.shape[0])))
    if s.ndim != 2 or s.shape != (d * d, d * d):
        raise DimMismatch(f"not a superoperator shape: {s.shape}")
    return d


def kraus_to_superop(op: KrausOperation) -> np.ndarray:
    """Sum of ``conj(K) (x) K`` over the Kraus operators."""
    return sum(np.kron(k.conj(), k) for k in op.kraus)


def unitary_superop(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    return np.kron(u.conj(), u)


def apply_superop(s, m) -> np.ndarray:
    s = np.asarray(s)
    d = superop_dim(s)
    a = np.asarray(m, dtype=complex)
    if a.shape != (d, d):
        raise DimMismatch(f"superoperator acts on dim {d}, matrix has shape {a.shape}")
    return unvec(s @ vec(a), d)


def compose_superops(a, b) -> np.ndarray:
    """``a`` after ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimMismatch(f"cannot compose superoperators of shapes {a.shape} and {b.shape}")
    superop_dim(a)
    return a @ b


def identity_superop(dim: int) -> np.ndarray:
    return np.eye(dim * dim, dtype=complex)


def mask_superop(mask) -> np.ndarray:
    """Superoperator of the entrywise product ``X -> mask * X``."""
    return np.diag(vec(np.asarray(mask, dtype=complex)))


def diag_projector(dim: int) -> np.ndarray:
    """The map keeping only the diagonal of a matrix."""
    return mask_superop(np.eye(dim))


def offdiag_projector(dim: int) -> np.ndarray:
    """The map keeping only the off-diagonal entries of a matrix."""
    return mask_superop(1 - np.eye(dim))


def diag_split(m) -> Tuple[np.ndarray, np.ndarray]:
    """Split ``m`` into its diagonal part and its vanishing-diagonal remainder."""
    a = as_square(m)
    d = np.diag(np.diag(a))
    return d, a - d


def choi_matrix(s) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) S(|i><j|)``, input factor first.

    The identity channel maps to the unnormalized maximally entangled
    projector, with trace equal to the dimension.
    """
    s = np.asarray(s, dtype=complex)
    d = superop_dim(s)
    # rows of s index (b, a) for output entry [a, b]; columns index (j, i) for input |i><j|
    s4 = s.reshape(d, d, d, d)
    return s4.transpose(3, 1, 2, 0).reshape(d * d, d * d)


def choi_to_superop(choi) -> np.ndarray:
    c = np.asarray(choi, dtype=complex)
    d = superop_dim(c)
    return c.reshape(d, d, d, d).transpose(3, 1, 2, 0).reshape(d * d, d * d)


def choi_min_eigenvalue(choi) -> float:
    c = np.asarray(choi)
    return float(np.linalg.eigvalsh((c + c.conj().T) / 2).min())


def choi_trace_error(choi) -> float:
    """Max deviation of the output partial trace of the Choi matrix from identity."""
    c = np.asarray(choi)
    d = superop_dim(c)
    ptr = np.trace(c.reshape(d, d, d, d), axis1=1, axis2=3)
    return float(np.max(np.abs(ptr - np.eye(d))))


def is_cptp(s, tol: float = PSD_TOL) -> bool:
    c = choi_matrix(s)
    return choi_min_eigenvalue(c) >= -tol and choi_trace_error(c) <= tol


def superop_to_kraus(s, cutoff: float = 1e-10) -> KrausOperation:
    """Extract Kraus operators from a completely positive superoperator.

    Eigenvectors of the Choi matrix with eigenvalue above ``cutoff`` become
    Kraus operators. Raises NotPSD if the map is not completely positive.
    """
    c = choi_matrix(s)
    d = superop_dim(s)
    evals, evecs = np.linalg.eigh((c + c.conj().T) / 2)
    if evals.min() < -cutoff:
        raise NotPSD("map is not completely positive", min_eigenvalue=float(evals.min()))
    kraus = [np.sqrt(lam) * evecs[:, i].reshape(d, d).T
             for i, lam in enumerate(evals) if lam > cutoff]
    if not kraus:
        kraus = [np.zeros((d, d))]
    tp = choi_trace_error(c) <= KRAUS_TOL
    return KrausOperation(tuple(kraus), trace_preserving=tp)


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b`` (both Hermitian)."""
    diff = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def trace_norm(a) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)))


# Pauli matrices and single-qubit rotations, used throughout examples and tests.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def x_rotation(theta: float) -> np.ndarray:
    """exp(-i theta sigma_x / 2)."""
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * SIGMA_X


def z_rotation(theta: float) -> np.ndarray:
    """exp(-i theta sigma_z / 2)."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def qubit_state(p: float, b: complex) -> np.ndarray:
    return np.array([[p, b], [np.conj(b), 1 - p]], dtype=complex)


# JSON encoding: complex scalars are [re, im], matrices are row-major lists of rows.

def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(obj, field: str = "value") -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if (not isinstance(obj, (list, tuple)) or len(obj) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj)):
        raise MalformedInput("complex scalar must be a [re, im] pair", field=field)
    return complex(obj[0], obj[1])


def matrix_to_json(m) -> list:
    a = np.asarray(m, dtype=complex)
    return [[complex_to_json(z) for z in row] for row in a]


def matrix_from_json(obj, field: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise MalformedInput("matrix must be a non-empty list of rows", field=field)
    n = len(obj[0])
    if any(len(r) != n for r in obj):
        raise MalformedInput("matrix rows have unequal lengths", field=field)
    return np.array([[complex_from_json(z, f"{field}[{i}][{j}]") for j, z in enumerate(r)]
                     for i, r in enumerate(obj)], dtype=complex)


def kraus_to_json(op: KrausOperation) -> dict:
    return {"dim": op.dim, "kraus": [matrix_to_json(k) for k in op.kraus],
            "trace_preserving": op.trace_preserving}


def kraus_from_json(obj) -> KrausOperation:
    if not isinstance(obj, dict) or "kraus" not in obj:
        raise MalformedInput("Kraus operation must be an object with a 'kraus' list", field="kraus")
    if not isinstance(obj["kraus"], list):
        raise MalformedInput("must be a list of matrices", field="kraus")
    ks = [matrix_from_json(k, f"kraus[{i}]") for i, k in enumerate(obj["kraus"])]
    op = KrausOperation(tuple(ks), trace_preserving=bool(obj.get("trace_preserving", True)))
    if "dim" in obj and obj["dim"] != op.dim:
        raise MalformedInput(f"declared dim {obj['dim']} but operators are {op.dim}x{op.dim}",
                             field="dim")
    return op
