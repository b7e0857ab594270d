"""
Integral geometry of semialgebraic sets.

Haar sampling on linear and affine Grassmannians, component counting on affine
slices, and the Monte Carlo estimators built on them: Crofton volumes, Vitushkin
variations, additivity over disjoint balls and the small-ball lower-bound
statistic. The Grassmannian carries its probability measure, so an affine
integral is the ball-volume weight times the sample mean.
"""
from dataclasses import dataclass

from common.imports import np, ndimage, special, spatial, logging, math
from constants import (
    ORTHONORMAL_TOL, SLICE_GRID_RESOLUTION, ROOT_CLUSTER_FACTOR, ROOT_IMAG_TOL, REGION_TOL,
    CURVE_RESOLUTION, NEWTON_MAX_ITER, GRADIENT_FLOOR, ZERO_TOL, SEPARATED_PROBE_BUDGET,
    SEPARATED_MAX_ROUNDS, SEPARATED_EMPTY_ROUNDS, MAXIMALITY_REJECTION_RATE, SPACING_TOL,
)
from exceptions import (
    DegenerateSliceError, UnsupportedSliceError, SliceDisagreementError, OverlappingBallsError,
    PreconditionError, DimensionMismatchError,
)
from monte_carlo import MCEstimate, run_chunked, estimate_from_samples, uniform_ball, ratio_estimate
from polynomial_maps import MultiPoly
from model_geometry import SeparatedNet


# ----------------------------------------------------------------------------
# Grassmannians
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GrassmannSample:
    frame: "np.ndarray"

    def __post_init__(self):
        frame = np.asarray(self.frame, dtype=float)
        if frame.ndim != 2:
            raise DimensionMismatchError(f"frame must be 2-dimensional, got shape {frame.shape}")
        if np.max(np.abs(frame.T @ frame - np.eye(frame.shape[1])), initial=0.0) > ORTHONORMAL_TOL:
            raise ValueError("frame is not orthonormal")
        frame.setflags(write=False)
        object.__setattr__(self, "frame", frame)

    @property
    def n(self):
        return self.frame.shape[0]

    @property
    def k(self):
        return self.frame.shape[1]


@dataclass(frozen=True)
class AffineSubspace:
    direction: GrassmannSample
    offset: "np.ndarray"

    def __post_init__(self):
        offset = np.asarray(self.offset, dtype=float)
        if offset.shape != (self.direction.n,):
            raise DimensionMismatchError(f"offset of shape {offset.shape} in R^{self.direction.n}")
        if np.max(np.abs(self.direction.frame.T @ offset), initial=0.0) > ORTHONORMAL_TOL * max(1.0, np.linalg.norm(offset)):
            raise ValueError("offset is not orthogonal to the direction")
        offset.setflags(write=False)
        object.__setattr__(self, "offset", offset)

    @property
    def frame(self):
        return self.direction.frame

    @property
    def dim(self):
        return self.direction.k


def ball_volume(dim, radius=1.0):
    return math.pi ** (dim / 2) * radius ** dim / special.gamma(dim / 2 + 1)


def _haar_orthogonal(rng, count, n):
    """Stack of Haar-distributed orthogonal matrices (count, n, n)."""
    Q, R = np.linalg.qr(rng.standard_normal((count, n, n)))
    signs = np.sign(np.diagonal(R, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    return Q * signs[:, None, :]


def sample_linear_grassmannian(k, n, rng):
    if not 0 <= k <= n:
        raise ValueError(f"subspace dimension must lie in 0..{n}, got {k}")
    if k == 0:
        return GrassmannSample(np.zeros((n, 0)))
    return GrassmannSample(_haar_orthogonal(rng, 1, n)[0][:, :k])


def _sample_affine_batch(k, n, R, rng, count, center):
    """Frames (count, n, k), normals (count, n, n-k), offsets (count, n) and the ball-volume weight."""
    Q = _haar_orthogonal(rng, count, n)
    frames, normals = Q[:, :, :k], Q[:, :, k:]
    along = np.einsum("cnj,n->cj", normals, center)
    coords = along + R * uniform_ball(rng, count, n - k)
    offsets = np.einsum("cnj,cj->cn", normals, coords)
    return frames, normals, offsets, ball_volume(n - k, R)


def sample_affine_hitting_ball(k, n, R, rng, center=None):
    """Haar direction and uniform offset in the radius-R ball of F^⊥ around the projected center."""
    if not 0 <= k < n:
        raise ValueError(f"affine subspace dimension must lie in 0..{n - 1}, got {k}")
    if R <= 0:
        raise ValueError(f"ball radius must be positive, got {R}")
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    frames, _, offsets, weight = _sample_affine_batch(k, n, R, rng, 1, center)
    return AffineSubspace(GrassmannSample(frames[0]), offsets[0]), weight


# ----------------------------------------------------------------------------
# sets and regions
# ----------------------------------------------------------------------------

class ImplicitSet:
    """Zero set of polynomials.

    mode "zero": common zeros of all polynomials; mode "union": union of their
    zero sets, sliced through the product polynomial.
    """

    def __init__(self, polys, mode="zero"):
        polys = list(polys) if isinstance(polys, (list, tuple)) else [polys]
        if mode not in ("zero", "union"):
            raise ValueError(f"mode must be 'zero' or 'union', got {mode!r}")
        if not polys or all(p.is_zero for p in polys):
            raise ValueError("at least one nonzero polynomial is required")
        if len({p.n_vars for p in polys}) != 1:
            raise DimensionMismatchError("polynomials live in different dimensions")
        self.polys = polys
        self.mode = mode
        self.n = polys[0].n_vars
        self.degree = max(p.degree for p in polys)
        if self.degree < 1:
            raise ValueError("defining polynomials must have degree >= 1")
        if mode == "union" or len(polys) == 1:
            combined = polys[0]
            for p in polys[1:]:
                combined = combined * p
        else:
            combined = polys[0] * polys[0]
            for p in polys[1:]:
                combined = combined + p * p
        self.poly = combined
        self._scale = max(1.0, float(np.sum(np.abs(combined.coeffs))))

    @classmethod
    def sphere(cls, center, radius):
        center = np.asarray(center, dtype=float)
        n = center.shape[0]
        poly = MultiPoly.constant(n, -radius ** 2)
        for i in range(n):
            shifted = MultiPoly.variable(n, i) - center[i]
            poly = poly + shifted * shifted
        return cls([poly])

    def __repr__(self):
        return f"ImplicitSet(n={self.n}, degree={self.degree}, mode={self.mode!r}, polys={len(self.polys)})"

    @property
    def signed(self):
        """True when the combined polynomial changes sign across the set."""
        return self.mode == "union" or len(self.polys) == 1

    def dilate(self, factor):
        return ImplicitSet([p.dilate(factor) for p in self.polys], mode=self.mode)

    def field(self, X):
        return np.atleast_1d(self.poly(np.atleast_2d(X)))

    def contains(self, X, tol=REGION_TOL):
        return np.abs(self.field(X)) <= tol * self._scale

    def meets_range(self, vmin, vmax):
        """Whether a connected piece whose field values span [vmin, vmax] touches the set."""
        tol = REGION_TOL * self._scale
        return (np.asarray(vmin) <= tol) & (np.asarray(vmax) >= -tol)


@dataclass(frozen=True)
class BallComplement:
    """Closed region E minus the union of the open balls."""
    centers: "np.ndarray"
    radii: "np.ndarray"

    def __post_init__(self):
        object.__setattr__(self, "centers", np.atleast_2d(np.asarray(self.centers, dtype=float)))
        object.__setattr__(self, "radii", np.atleast_1d(np.asarray(self.radii, dtype=float)))

    @classmethod
    def of(cls, balls):
        return cls([c for c, _ in balls], [r for _, r in balls])

    def field(self, X):
        X = np.atleast_2d(X)
        distances = np.linalg.norm(X[:, None, :] - self.centers[None, :, :], axis=2)
        return np.min(distances - self.radii[None, :], axis=1)

    def meets_range(self, vmin, vmax):
        return np.asarray(vmax) >= -REGION_TOL


class ParametricCurve:
    """Closed or open curve t ∈ [0, 1] -> R^n, sampled as a polyline."""

    def __init__(self, func, n, closed=True, length=None, resolution=CURVE_RESOLUTION):
        t = np.linspace(0.0, 1.0, resolution + 1)
        if closed:
            t = t[:-1]
        points = np.atleast_2d(func(t))
        if points.shape != (t.size, n):
            raise DimensionMismatchError(f"curve samples have shape {points.shape}, expected ({t.size}, {n})")
        self.points = points
        self.n = n
        self.closed = closed
        self._length = length

    @classmethod
    def segment(cls, a, b):
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        return cls(lambda t: a[None, :] + t[:, None] * (b - a)[None, :], a.size, closed=False,
                   length=float(np.linalg.norm(b - a)), resolution=1)

    @classmethod
    def ellipse(cls, center, a, b, angle=0.0):
        center = np.asarray(center, dtype=float)
        rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
        major, minor = max(a, b), min(a, b)
        perimeter = 4.0 * major * special.ellipe(1.0 - (minor / major) ** 2)

        def trace(t):
            local = np.stack([a * np.cos(2 * np.pi * t), b * np.sin(2 * np.pi * t)], axis=1)
            return center[None, :] + local @ rot.T

        return cls(trace, 2, closed=True, length=perimeter)

    @property
    def length(self):
        if self._length is not None:
            return self._length
        pts = np.vstack([self.points, self.points[:1]]) if self.closed else self.points
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))

    def hyperplane_counts(self, normals, offsets):
        """Crossings of the polyline with the hyperplanes {x : <x - p, ν> = 0}."""
        heights = (self.points[None, :, :] - offsets[:, None, :]) @ normals[:, :, None]
        side = np.signbit(heights[:, :, 0])
        if self.closed:
            side = np.concatenate([side, side[:, :1]], axis=1)
        return np.sum(side[:, 1:] != side[:, :-1], axis=1).astype(float)


# ----------------------------------------------------------------------------
# slice component counting
# ----------------------------------------------------------------------------

def _slice_disk(frame, offset, center, radius):
    """Center (slice coordinates) and radius of B̄(center, radius) ∩ (offset + span frame)."""
    w = center - offset
    s0 = frame.T @ w
    perp = w - frame @ s0
    rho2 = radius ** 2 - float(perp @ perp)
    return s0, (math.sqrt(rho2) if rho2 >= 0 else None)


def _line_roots(coeffs, t0, rho, delta):
    """Clustered real roots in [t0 - rho, t0 + rho] of an ascending coefficient vector."""
    scale = np.max(np.abs(coeffs), initial=0.0)
    if scale == 0.0:
        raise DegenerateSliceError()
    significant = np.flatnonzero(np.abs(coeffs) > 1e-14 * scale)
    trimmed = coeffs[:significant[-1] + 1]
    if trimmed.size < 2:
        return np.zeros(0)
    roots = np.polynomial.polynomial.polyroots(trimmed)
    real = roots.real[np.abs(roots.imag) <= ROOT_IMAG_TOL * np.maximum(1.0, np.abs(roots.real))]
    real = np.sort(real[np.abs(real - t0) <= rho + delta])
    if real.size == 0:
        return real
    keep = np.concatenate([[True], np.diff(real) > delta])
    return real[keep]


def _count_on_lines(A, B, frames, offsets, center, radius):
    """(total, disjoint) per line, NaN where the slice is degenerate."""
    count = frames.shape[0]
    V = frames[:, :, 0]
    totals = np.full(count, np.nan)
    disjoint = np.full(count, np.nan)
    delta = ROOT_CLUSTER_FACTOR * radius
    primary = A.poly if A.signed else A.polys[0]
    coeffs = primary.restrict_to_lines(offsets, V)
    for i in range(count):
        s0, rho = _slice_disk(V[i:i + 1].T, offsets[i], center, radius)
        if rho is None:
            totals[i] = disjoint[i] = 0.0
            continue
        try:
            roots = _line_roots(coeffs[i], float(s0[0]), rho, delta)
        except DegenerateSliceError:
            continue
        points = offsets[i][None, :] + roots[:, None] * V[i][None, :]
        if not A.signed and points.shape[0]:
            points = points[A.contains(points)]
        totals[i] = points.shape[0]
        if B is None or points.shape[0] == 0:
            disjoint[i] = totals[i]
        else:
            values = B.field(points)
            disjoint[i] = float(np.sum(~B.meets_range(values, values)))
    return totals, disjoint


def _plane_counts(A, B, frame, offset, s0, rho, resolution):
    axes = [s0[i] + np.linspace(-rho, rho, resolution + 1) for i in range(2)]
    S = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    points = offset[None, :] + S.reshape(-1, 2) @ frame.T
    values = A.field(points).reshape(resolution + 1, resolution + 1)
    if np.max(np.abs(values)) == 0.0:
        raise DegenerateSliceError()

    corners = np.stack([values[:-1, :-1], values[1:, :-1], values[:-1, 1:], values[1:, 1:]], axis=-1)
    inside = np.linalg.norm(S - s0[None, None, :], axis=-1) <= rho
    cell_inside = inside[:-1, :-1] | inside[1:, :-1] | inside[:-1, 1:] | inside[1:, 1:]
    crossing = (corners.min(axis=-1) <= 0.0) & (corners.max(axis=-1) >= 0.0) & cell_inside
    labels, total = ndimage.label(crossing, structure=np.ones((3, 3), dtype=int))
    if B is None or total == 0:
        return total, total

    region = B.field(points).reshape(resolution + 1, resolution + 1)
    region_corners = np.stack([region[:-1, :-1], region[1:, :-1], region[:-1, 1:], region[1:, 1:]], axis=-1)
    index = np.arange(1, total + 1)
    vmin = np.asarray(ndimage.minimum(region_corners.min(axis=-1), labels, index))
    vmax = np.asarray(ndimage.maximum(region_corners.max(axis=-1), labels, index))
    return total, int(np.sum(~B.meets_range(vmin, vmax)))


def _count_on_plane(A, B, frame, offset, center, radius, resolution=SLICE_GRID_RESOLUTION):
    if not A.signed:
        raise UnsupportedSliceError("planar slices need a sign-changing defining polynomial")
    s0, rho = _slice_disk(frame, offset, center, radius)
    if rho is None:
        return 0, 0
    fine = _plane_counts(A, B, frame, offset, s0, rho, resolution)
    coarse = _plane_counts(A, B, frame, offset, s0, rho, resolution // 2)
    if fine == coarse:
        return fine
    finer = _plane_counts(A, B, frame, offset, s0, rho, 2 * resolution)
    if finer == fine:
        return finer
    raise SliceDisagreementError(f"component counts {coarse}, {fine}, {finer} at increasing resolution")


def slice_components(A, F, ball_radius, B=None, ball_center=None):
    """Components of A ∩ F ∩ B̄(center, ball_radius): (total, number disjoint from B)."""
    if F.direction.n != A.n:
        raise DimensionMismatchError(f"slice in R^{F.direction.n} for a set in R^{A.n}")
    center = np.zeros(A.n) if ball_center is None else np.asarray(ball_center, dtype=float)
    if F.dim == 1:
        totals, disjoint = _count_on_lines(A, B, F.frame[None, :, :], F.offset[None, :], center, ball_radius)
        if np.isnan(totals[0]):
            raise DegenerateSliceError()
        return int(totals[0]), int(disjoint[0])
    if F.dim == 2:
        return _count_on_plane(A, B, F.frame, F.offset, center, ball_radius)
    raise UnsupportedSliceError(f"slices of dimension {F.dim} are not supported")


def _slice_worker(A, B, k, center, radius):
    """Monte Carlo worker returning weighted disjoint-component counts (NaN = discarded)."""
    def worker(count, rng):
        frames, _, offsets, weight = _sample_affine_batch(k, A.n, radius, rng, count, center)
        if k == 1:
            _, disjoint = _count_on_lines(A, B, frames, offsets, center, radius)
        else:
            disjoint = np.full(count, np.nan)
            for i in range(count):
                try:
                    disjoint[i] = _count_on_plane(A, B, frames[i], offsets[i], center, radius)[1]
                except (DegenerateSliceError, SliceDisagreementError) as e:
                    logging.debug(f"INTEGRAL_GEOMETRY. slice discarded: {e}")
        return weight * disjoint
    return worker


# ----------------------------------------------------------------------------
# Crofton
# ----------------------------------------------------------------------------

def crofton_constant(d, n, N, seed, reference_frame=None):
    """Mean over Haar F ∈ Gr(d, n) of |det(frame_Fᵀ frame_F')|."""
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    if d == n:
        return MCEstimate(mean=1.0, stderr=0.0, n_samples=N, seed=seed)
    reference = np.eye(n)[:, :d] if reference_frame is None else np.asarray(reference_frame, dtype=float)

    def worker(count, rng):
        frames = _haar_orthogonal(rng, count, n)[:, :, :d]
        return np.abs(np.linalg.det(np.einsum("cnd,ne->cde", frames, reference)))

    return estimate_from_samples(run_chunked(worker, N, seed), seed)


def crofton_volume(X, d, n, N, seed, R, center=None):
    """Volume estimate ∫ Card(X ∩ F) dF / c_{d,n} over affine (n-d)-planes meeting B(center, R)."""
    if d not in (1, 2) or d >= n:
        raise ValueError(f"need d in (1, 2) and d < n, got d={d}, n={n}")
    if R <= 0:
        raise ValueError(f"ball radius must be positive, got {R}")
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    k = n - d
    raw_seed, constant_seed = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(2))

    if isinstance(X, ParametricCurve):
        if d != 1 or X.n != n:
            raise UnsupportedSliceError("parametric curves are counted against hyperplanes only")

        def worker(count, rng):
            _, normals, offsets, weight = _sample_affine_batch(k, n, R, rng, count, center)
            return weight * X.hyperplane_counts(normals[:, :, 0], offsets)
    else:
        if X.n != n:
            raise DimensionMismatchError(f"set in R^{X.n}, sampling in R^{n}")
        worker = _slice_worker(X, None, k, center, R)

    raw = estimate_from_samples(run_chunked(worker, N, raw_seed), raw_seed)
    constant = crofton_constant(d, n, N, constant_seed)
    volume, stderr = ratio_estimate(raw, constant)
    logging.debug(f"INTEGRAL_GEOMETRY. crofton d={d} n={n}: raw={raw.mean:.4f}±{raw.stderr:.4f}, "
                  f"c={constant.mean:.4f}, volume={volume:.4f}")
    return MCEstimate(mean=volume, stderr=stderr, n_samples=N, seed=seed, discarded=raw.discarded,
                      extras={"raw_integral": raw.mean, "raw_stderr": raw.stderr,
                              "crofton_constant": constant.mean, "discard_rate": raw.discard_rate})


def sphere_area(N, seed, radius=1.0):
    """Crofton estimate of the area of a sphere in R^3 through lines (exact value 4πr²)."""
    sphere = ImplicitSet.sphere(np.zeros(3), radius)
    return crofton_volume(sphere, 2, 3, N, seed, R=1.25 * radius)


# ----------------------------------------------------------------------------
# Vitushkin variations
# ----------------------------------------------------------------------------

def vitushkin_variation(A, B, d, n, R, N, seed, center=None):
    """V_d(A ∩ B̄(center, R), B) estimated over affine (n-d)-planes meeting the ball."""
    if A.n != n:
        raise DimensionMismatchError(f"set in R^{A.n}, variation in R^{n}")
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got {d}")
    if n - d > 2:
        raise UnsupportedSliceError(f"slices of dimension {n - d} are not supported")
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)

    if d == n:
        # volume of A minus B: the zero set of a nonzero polynomial is null
        def worker(count, rng):
            X = center[None, :] + R * uniform_ball(rng, count, n)
            hit = A.contains(X)
            if B is not None and np.any(hit):
                values = B.field(X[hit])
                hit[hit] = ~B.meets_range(values, values)
            return ball_volume(n, R) * hit.astype(float)

        return estimate_from_samples(run_chunked(worker, N, seed), seed)

    if d == 0:
        full = np.eye(n)
        if n == 1:
            _, disjoint = _count_on_lines(A, B, full[None, :, :], np.zeros((1, n)), center, R)
            if np.isnan(disjoint[0]):
                raise DegenerateSliceError()
            count = float(disjoint[0])
        else:
            count = float(_count_on_plane(A, B, full, np.zeros(n), center, R)[1])
        return MCEstimate(mean=count, stderr=0.0, n_samples=1, seed=seed)

    return estimate_from_samples(run_chunked(_slice_worker(A, B, n - d, center, R), N, seed), seed)


@dataclass(frozen=True)
class AdditivityResult:
    residual: float
    stderr: float
    lhs: float
    rhs: float
    within_tolerance: bool


def _check_disjoint_balls(balls):
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            (ci, ri), (cj, rj) = balls[i], balls[j]
            gap = float(np.linalg.norm(np.asarray(ci, dtype=float) - np.asarray(cj, dtype=float)))
            if gap < ri + rj - SPACING_TOL:
                raise OverlappingBallsError(f"balls {i} and {j} overlap (distance {gap:.6g} < {ri + rj:.6g})")


def additivity_residual(A, balls, d, N, seed, R=None):
    """|V_d(A, E ∖ ∪ int B_i) − Σ V_d(A ∩ B_i, S_i)| with both sides on common random planes."""
    if not balls:
        raise ValueError("at least one ball is required")
    _check_disjoint_balls(balls)
    n = A.n
    if n - d > 2 or d >= n:
        raise UnsupportedSliceError(f"slices of dimension {n - d} are not supported")
    balls = [(np.asarray(c, dtype=float), float(r)) for c, r in balls]
    outside = BallComplement.of(balls)
    spheres = [ImplicitSet.sphere(c, r) for c, r in balls]
    R = max(float(np.linalg.norm(c)) + r for c, r in balls) if R is None else R
    origin = np.zeros(n)

    def counts(frame, offset):
        """(lhs, rhs) counts on one slice; frame has n - d columns."""
        if frame.shape[1] == 1:
            lhs = _count_on_lines(A, outside, frame[None], offset[None], origin, R)[1][0]
            rhs = sum(_count_on_lines(A, S, frame[None], offset[None], c, r)[1][0]
                      for S, (c, r) in zip(spheres, balls))
            return lhs, rhs
        lhs = _count_on_plane(A, outside, frame, offset, origin, R)[1]
        rhs = sum(_count_on_plane(A, S, frame, offset, c, r)[1] for S, (c, r) in zip(spheres, balls))
        return float(lhs), float(rhs)

    if d == 0:
        lhs, rhs = counts(np.eye(n), np.zeros(n))
        residual = abs(lhs - rhs)
        return AdditivityResult(residual, 0.0, lhs, rhs, residual <= SPACING_TOL)

    def worker(count, rng):
        frames, _, offsets, weight = _sample_affine_batch(n - d, n, R, rng, count, origin)
        pairs = np.full((count, 2), np.nan)
        for i in range(count):
            try:
                pairs[i] = counts(frames[i], offsets[i])
            except (DegenerateSliceError, SliceDisagreementError) as e:
                logging.debug(f"INTEGRAL_GEOMETRY. additivity slice discarded: {e}")
        return (weight * pairs).ravel()

    pairs = run_chunked(worker, N, seed).reshape(-1, 2)
    kept = pairs[np.all(np.isfinite(pairs), axis=1)]
    if kept.shape[0] < 2:
        raise RuntimeError("too few usable slices for the additivity estimate")
    difference = kept[:, 0] - kept[:, 1]
    stderr = float(np.std(difference, ddof=1) / math.sqrt(difference.size))
    residual = abs(float(np.mean(difference)))
    lhs, rhs = float(np.mean(kept[:, 0])), float(np.mean(kept[:, 1]))
    logging.debug(f"INTEGRAL_GEOMETRY. additivity d={d}: lhs={lhs:.4f} rhs={rhs:.4f} residual={residual:.3e}±{stderr:.3e}")
    return AdditivityResult(residual, stderr, lhs, rhs, residual <= 3.0 * stderr + SPACING_TOL)


def lower_bound_statistic(A, center, radii, d_max, N, seed):
    """(r, Σ_{d ≤ d_max} V_d(A ∩ B_r, S_r) / r^{n-1}, stderr) for each radius."""
    center = np.asarray(center, dtype=float)
    if abs(float(A.field(center)[0])) > 1e-9:
        raise PreconditionError(f"center is not on the set (|p(center)| = {abs(float(A.field(center)[0])):.3e})")
    n = A.n
    if not 0 <= d_max <= n - 1:
        raise ValueError(f"d_max must lie in 0..{n - 1}, got {d_max}")
    rows = []
    for r in radii:
        if r <= 0:
            raise ValueError(f"radii must be positive, got {r}")
        S = ImplicitSet.sphere(center, r)
        estimates = [vitushkin_variation(A, S, d, n, r, N, seed, center=center) for d in range(d_max + 1)]
        scale = r ** (n - 1)
        stat = sum(e.mean for e in estimates) / scale
        stderr = math.sqrt(sum(e.stderr ** 2 for e in estimates)) / scale
        rows.append((float(r), stat, stderr))
    return rows


# ----------------------------------------------------------------------------
# separated subsets
# ----------------------------------------------------------------------------

def _project_onto(A, X):
    """Gradient-Newton projection onto {A.poly = 0}; returns (points, converged mask)."""
    Y = X.copy()
    ok = np.ones(X.shape[0], dtype=bool)
    tol = ZERO_TOL * A._scale
    for _ in range(NEWTON_MAX_ITER):
        values = A.field(Y)
        grads = A.poly.gradient(Y)
        norms2 = np.sum(grads ** 2, axis=1)
        ok &= norms2 >= GRADIENT_FLOOR ** 2
        moving = ok & (np.abs(values) > tol)
        if not np.any(moving):
            break
        Y[moving] -= (values[moving] / norms2[moving])[:, None] * grads[moving]
    ok &= np.abs(A.field(Y)) <= max(tol, 1e-10 * A._scale)
    return Y, ok


def maximal_separated_subset(A, eps, R, rng, center=None):
    """Greedy ε-separated subset of A ∩ B(center, R) from projected uniform probes.

    Rounds of probes continue until a round rejects at least 99.9% of its valid
    probes. When no probe ever lands on A the result is empty and flagged.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    center = np.zeros(A.n) if center is None else np.asarray(center, dtype=float)
    accepted = np.zeros((0, A.n))
    empty_rounds = 0
    certified = False
    rejection_rate = 0.0
    for round_index in range(SEPARATED_MAX_ROUNDS):
        probes = center[None, :] + R * uniform_ball(rng, SEPARATED_PROBE_BUDGET, A.n)
        projected, ok = _project_onto(A, probes)
        ok &= np.linalg.norm(projected - center[None, :], axis=1) <= R
        candidates = projected[ok]
        if candidates.shape[0] == 0:
            empty_rounds += 1
            if empty_rounds >= SEPARATED_EMPTY_ROUNDS and accepted.shape[0] == 0:
                logging.warning(f"INTEGRAL_GEOMETRY. no point of the set found in B(center, {R}); empty net")
                return SeparatedNet(np.zeros((0, A.n)), eps, flags={"empty": True, "maximality_certified": False})
            continue
        empty_rounds = 0

        if accepted.shape[0]:
            distance, _ = spatial.cKDTree(accepted).query(candidates)
            candidates = candidates[distance >= eps - SPACING_TOL]
        added = []
        for point in candidates:
            if not added or np.min(np.linalg.norm(np.asarray(added) - point[None, :], axis=1)) >= eps - SPACING_TOL:
                added.append(point)
        rejection_rate = 1.0 - len(added) / int(ok.sum())
        if added:
            accepted = np.vstack([accepted, np.asarray(added)])
        if rejection_rate >= MAXIMALITY_REJECTION_RATE:
            certified = True
            logging.debug(f"INTEGRAL_GEOMETRY. separated set of {len(accepted)} points after {round_index + 1} rounds")
            break
    if not certified:
        logging.warning(f"INTEGRAL_GEOMETRY. maximality not certified (last rejection rate {rejection_rate:.4f})")
    return SeparatedNet(accepted, eps, flags={"empty": False, "maximality_certified": certified,
                                              "rejection_rate": rejection_rate})


# ----------------------------------------------------------------------------
# growth in the degree
# ----------------------------------------------------------------------------

def random_plane_curve(degree, rng):
    """Gaussian combination of all monomials of total degree <= `degree` in two variables."""
    terms = [((i, j), rng.standard_normal()) for i in range(degree + 1) for j in range(degree + 1 - i)]
    return ImplicitSet([MultiPoly(2, terms)])


def degree_growth(degrees, n_curves, N, seed):
    """Mean V_1 of random plane curves in the unit disk per degree, with the log-log slope."""
    streams = np.random.SeedSequence(seed).spawn(len(degrees))
    means = []
    for degree, stream in zip(degrees, streams):
        rng = np.random.default_rng(stream)
        values = []
        for _ in range(n_curves):
            curve = random_plane_curve(degree, rng)
            values.append(vitushkin_variation(curve, None, 1, 2, 1.0, N, int(rng.integers(2 ** 31))).mean)
        means.append(float(np.mean(values)))
    positive = [(d, m) for d, m in zip(degrees, means) if m > 0]
    slope = float(np.polyfit(np.log([d for d, _ in positive]), np.log([m for _, m in positive]), 1)[0]) \
        if len(positive) >= 2 else 0.0
    return {"degrees": list(degrees), "means": means, "slope": slope}
