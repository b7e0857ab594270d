"""
Linear algebra of transversality moduli.

Maps between real inner-product spaces are dense matrices (target x source),
optionally carrying complex structures on source and target. Complex-linear maps
live here as their real matrices plus J. Every modulus comes from a full SVD.
"""
from dataclasses import dataclass

from common.imports import np, scipy_linalg, logging, math, Optional
from constants import ANALYTIC_TOL, ORTHONORMAL_TOL, COMPLEX_STRUCTURE_TOL
from exceptions import (
    EmptyDomainError, DimensionMismatchError, MissingComplexStructureError,
    ContractViolationError,
)


def standard_complex_structure(n):
    """Multiplication by i on C^n in real coordinates ordered (x_1..x_n, y_1..y_n)."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def _validated_structure(J, dim, side):
    if J is None:
        return None
    J = np.array(J, dtype=float)
    if J.shape != (dim, dim):
        raise DimensionMismatchError(f"{side} complex structure has shape {J.shape}, expected ({dim}, {dim})")
    if dim % 2:
        raise ValueError(f"{side} complex structure requires even dimension, got {dim}")
    if np.max(np.abs(J @ J + np.eye(dim)), initial=0.0) > COMPLEX_STRUCTURE_TOL:
        raise ValueError(f"{side} complex structure does not square to -I")
    J.setflags(write=False)
    return J


@dataclass(frozen=True)
class LinearMapR:
    """Real-linear map stored as a (target x source) matrix."""
    matrix: "np.ndarray"
    j_src: Optional["np.ndarray"] = None
    j_dst: Optional["np.ndarray"] = None

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise DimensionMismatchError(f"matrix must be 2-dimensional, got shape {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "j_src", _validated_structure(self.j_src, matrix.shape[1], "source"))
        object.__setattr__(self, "j_dst", _validated_structure(self.j_dst, matrix.shape[0], "target"))

    @property
    def source_dim(self):
        return self.matrix.shape[1]

    @property
    def target_dim(self):
        return self.matrix.shape[0]

    @property
    def is_complex(self):
        return self.j_src is not None and self.j_dst is not None

    def adjoint(self):
        return LinearMapR(self.matrix.T, j_src=self.j_dst, j_dst=self.j_src)

    def __add__(self, other):
        if self.matrix.shape != other.matrix.shape:
            raise DimensionMismatchError(f"cannot add maps of shapes {self.matrix.shape} and {other.matrix.shape}")
        return LinearMapR(self.matrix + other.matrix, j_src=self.j_src, j_dst=self.j_dst)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def scaled(self, factor):
        return LinearMapR(factor * self.matrix, j_src=self.j_src, j_dst=self.j_dst)

    def __call__(self, v):
        return self.matrix @ np.asarray(v, dtype=float)


@dataclass(frozen=True)
class Subspace:
    """Linear subspace given by an orthonormal column frame (ambient x dim)."""
    frame: "np.ndarray"

    def __post_init__(self):
        frame = np.array(self.frame, dtype=float)
        if frame.ndim != 2:
            raise DimensionMismatchError(f"frame must be 2-dimensional, got shape {frame.shape}")
        gram = frame.T @ frame
        if gram.size and np.max(np.abs(gram - np.eye(frame.shape[1]))) > ORTHONORMAL_TOL:
            raise ValueError("frame is not orthonormal")
        frame.setflags(write=False)
        object.__setattr__(self, "frame", frame)

    @classmethod
    def from_spanning(cls, vectors):
        """Orthonormalize spanning column vectors (rank-revealing)."""
        vectors = np.asarray(vectors, dtype=float)
        if vectors.shape[1] == 0:
            return cls(np.zeros((vectors.shape[0], 0)))
        return cls(scipy_linalg.orth(vectors))

    @classmethod
    def full(cls, ambient_dim):
        return cls(np.eye(ambient_dim))

    @property
    def ambient_dim(self):
        return self.frame.shape[0]

    @property
    def dim(self):
        return self.frame.shape[1]

    def complement(self):
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        return Subspace(scipy_linalg.null_space(self.frame.T))

    def complex_part(self, J):
        """Largest J-invariant subspace H ∩ J(H)."""
        J = np.asarray(J, dtype=float)
        normals = self.complement().frame
        if normals.shape[1] == 0:
            return self
        # v in J(H) <=> J^{-1} v in H, and J^{-1} = -J
        constraints = np.vstack([normals.T, -normals.T @ J])
        return Subspace(scipy_linalg.null_space(constraints))

    def contains(self, other, tol=ANALYTIC_TOL):
        residual = other.frame - self.frame @ (self.frame.T @ other.frame)
        return residual.size == 0 or float(np.max(np.abs(residual))) <= tol


@dataclass(frozen=True)
class WeightedModuleParams:
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"weights must be positive, got a={self.a}, b={self.b}")

    @classmethod
    def for_tensor_power(cls, k):
        """The scale-invariant weights (1, k^-1/2)."""
        return cls(1.0, 1.0 / math.sqrt(k))


def operator_norm(u):
    if u.matrix.size == 0:
        return 0.0
    return float(np.linalg.svd(u.matrix, compute_uv=False)[0])


def mi(u):
    """Module of injectivity: min of |u v| over unit v (smallest singular value)."""
    if u.source_dim == 0:
        raise EmptyDomainError()
    if u.target_dim < u.source_dim:
        return 0.0
    return float(np.linalg.svd(u.matrix, compute_uv=False)[-1])


def ms(u):
    """Module of surjectivity, MI of the adjoint. Zero iff u is not onto."""
    if u.target_dim == 0:
        raise EmptyDomainError()
    return mi(u.adjoint())


def ms_batch(matrices):
    """MS of a stack of (target x source) matrices, shape (..., t, s)."""
    matrices = np.asarray(matrices, dtype=float)
    t, s = matrices.shape[-2:]
    if t == 0:
        raise EmptyDomainError()
    if s < t:
        return np.zeros(matrices.shape[:-2])
    return np.linalg.svd(matrices, compute_uv=False)[..., -1]


def operator_norm_batch(matrices):
    matrices = np.asarray(matrices, dtype=float)
    if matrices.shape[-1] == 0 or matrices.shape[-2] == 0:
        return np.zeros(matrices.shape[:-2])
    return np.linalg.svd(matrices, compute_uv=False)[..., 0]


def complex_split_batch(matrices, j_src, j_dst):
    """C-linear and C-antilinear parts of a stack of (target x source) matrices."""
    matrices = np.asarray(matrices, dtype=float)
    twisted = j_dst @ matrices @ j_src
    return 0.5 * (matrices - twisted), 0.5 * (matrices + twisted)


def complex_split(u):
    """Split u into its C-linear and C-antilinear parts (u10, u01)."""
    if not u.is_complex:
        raise MissingComplexStructureError("complex_split needs complex structures on source and target")
    linear, antilinear = complex_split_batch(u.matrix, u.j_src, u.j_dst)
    return (LinearMapR(linear, j_src=u.j_src, j_dst=u.j_dst),
            LinearMapR(antilinear, j_src=u.j_src, j_dst=u.j_dst))


def restrict(u, s):
    if s.ambient_dim != u.source_dim:
        raise DimensionMismatchError(
            f"subspace lives in dimension {s.ambient_dim}, map source has dimension {u.source_dim}")
    return LinearMapR(u.matrix @ s.frame, j_dst=u.j_dst)


def weighted_mt(value_norm, derivative, w=WeightedModuleParams()):
    """max(a |s(x)|, b MS(∇s(x)))."""
    if value_norm < 0:
        raise ValueError(f"value norm must be nonnegative, got {value_norm}")
    return max(w.a * value_norm, w.b * ms(derivative))


def transversality_module(value_norm, derivative):
    return weighted_mt(value_norm, derivative, WeightedModuleParams())


def hyperplane_sandwich(u, H):
    """Return (MS(u_K), MS(u_H), |u^{0,1}|) for K = H ∩ J(H).

    Raises ContractViolationError unless MS(u_H) - 2|u^{0,1}| <= MS(u_K) <= MS(u_H).
    """
    if not u.is_complex:
        raise MissingComplexStructureError("hyperplane_sandwich needs complex structures on source and target")
    if H.ambient_dim != u.source_dim:
        raise DimensionMismatchError(f"H lives in dimension {H.ambient_dim}, map source has {u.source_dim}")
    if H.dim != u.source_dim - 1:
        raise ValueError(f"H must have codimension 1, got dimension {H.dim} in {u.source_dim}")

    K = H.complex_part(u.j_src)
    ms_k = ms(restrict(u, K))
    ms_h = ms(restrict(u, H))
    antinorm = operator_norm(complex_split(u)[1])

    if ms_h - 2.0 * antinorm > ms_k + ANALYTIC_TOL or ms_k > ms_h + ANALYTIC_TOL:
        raise ContractViolationError(
            f"hyperplane sandwich violated: msH={ms_h:.6e}, msK={ms_k:.6e}, antinorm={antinorm:.6e}")
    return ms_k, ms_h, antinorm


def chained_ms_bound(u1, u2):
    """Residual MS(u1)·MS(u2|ker u1) - MS(u1⊕u2)·(MS(u1) + MS(u2|ker u1) + |u2|).

    The inequality holds when the residual is <= 0. A trivial kernel gives
    MS(u2|ker u1) = 0. A zero-dimensional target on either map makes the
    statement vacuous and returns -inf.
    """
    if u1.source_dim != u2.source_dim:
        raise DimensionMismatchError(
            f"maps must share a source, got dimensions {u1.source_dim} and {u2.source_dim}")
    if u1.target_dim == 0 or u2.target_dim == 0:
        logging.debug("TRANSVERSALITY_CORE. chained_ms_bound with zero-dimensional target, returning -inf")
        return -math.inf

    kernel = Subspace(scipy_linalg.null_space(u1.matrix))
    ms_1 = ms(u1)
    ms_kernel = ms(restrict(u2, kernel))
    ms_sum = ms(LinearMapR(np.vstack([u1.matrix, u2.matrix])))
    return ms_1 * ms_kernel - ms_sum * (ms_1 + ms_kernel + operator_norm(u2))
