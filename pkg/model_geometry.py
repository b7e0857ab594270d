"""
Flat prequantum model: C^n with the standard symplectic form, the trivial line
bundle with metric weight exp(-k pi |z|^2), and finite sums of coherent states.

Points are real vectors ordered (x_1..x_n, y_1..y_n); batches have shape (m, 2n).
Values are returned in the unitary gauge, where the norm of a section is the
modulus of its value.
"""
from dataclasses import dataclass, field

from common.imports import np, pd, scipy_linalg, optimize, spatial, special, nx, logging, math, Optional
from constants import (
    LOG_UNDERFLOW, SPACING_TOL, NET_SIZE_GUARD, NET_GRID_SUBDIVISION, ENVELOPE_U_MAX, ENVELOPE_U_POINTS,
    ORTHONORMAL_TOL,
)
from exceptions import (
    DimensionMismatchError, NetTooLargeError, NetSpacingError, PreconditionError, ContractViolationError,
)
from transversality_core import (
    LinearMapR, Subspace, standard_complex_structure, complex_split_batch, operator_norm_batch,
)


def to_complex(X):
    """(m, 2n) real points -> (m, n) complex points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1] // 2
    return X[:, :n] + 1j * X[:, n:]


def to_real(Z):
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    return np.concatenate([Z.real, Z.imag], axis=1)


def complex_to_real_matrix(M):
    """Real matrices [[Re, -Im], [Im, Re]] of a stack of complex matrices."""
    M = np.asarray(M, dtype=complex)
    top = np.concatenate([M.real, -M.imag], axis=-1)
    bottom = np.concatenate([M.imag, M.real], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def dbar_norms(real_derivatives, n, rank):
    """Operator norm of the C-antilinear part of each real derivative, shape (m, 2 rank, 2n)."""
    real_derivatives = np.asarray(real_derivatives, dtype=float)
    if real_derivatives.shape[0] == 0:
        return np.zeros(0)
    _, antilinear = complex_split_batch(real_derivatives, standard_complex_structure(n),
                                        standard_complex_structure(rank))
    return operator_norm_batch(antilinear)


@dataclass(frozen=True)
class PrequantumModel:
    n: int
    k: int
    rank: int = 1

    def __post_init__(self):
        if self.n < 1 or self.k < 1 or self.rank < 1:
            raise ValueError(f"n, k and rank must be >= 1, got n={self.n}, k={self.k}, rank={self.rank}")

    @property
    def real_dim(self):
        return 2 * self.n

    @property
    def length_scale(self):
        """k^{-1/2}, the width of a coherent state."""
        return 1.0 / math.sqrt(self.k)


class CoherentSection:
    """Finite sum Σ α_t c_{x_t} of coherent states on the model.

    centers: complex (T, n); coeffs: complex (T, r). Immutable; `add_terms`
    returns a new section.
    """

    def __init__(self, model, centers=None, coeffs=None):
        self.model = model
        centers = np.zeros((0, model.n), dtype=complex) if centers is None else np.asarray(centers, dtype=complex)
        coeffs = np.zeros((0, model.rank), dtype=complex) if coeffs is None else np.asarray(coeffs, dtype=complex)
        centers = centers.reshape(-1, model.n)
        coeffs = coeffs.reshape(-1, model.rank)
        if centers.shape[0] != coeffs.shape[0]:
            raise DimensionMismatchError(f"{centers.shape[0]} centers but {coeffs.shape[0]} coefficient vectors")
        if not (np.all(np.isfinite(centers)) and np.all(np.isfinite(coeffs))):
            raise ValueError("centers and coefficients must be finite")
        centers.setflags(write=False)
        coeffs.setflags(write=False)
        self.centers = centers
        self.coeffs = coeffs

    @classmethod
    def single(cls, model, center=None, coeff=None):
        center = np.zeros(model.n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
        coeff = np.ones(model.rank, dtype=complex) if coeff is None else np.asarray(coeff, dtype=complex)
        return cls(model, center[None, :], coeff[None, :])

    @classmethod
    def from_config(cls, cfg):
        """Build from {k, rank, terms: [[center re.., center im..], [alpha re.., alpha im..]]}."""
        terms = cfg.get("terms", [])
        if not terms:
            raise ValueError("a section needs at least one term to infer the dimension; use n for empty sections")
        n = len(terms[0][0]) // 2
        model = PrequantumModel(n=n, k=int(cfg["k"]), rank=int(cfg.get("rank", 1)))
        centers = to_complex(np.array([t[0] for t in terms], dtype=float))
        coeffs = to_complex(np.array([t[1] for t in terms], dtype=float))
        return cls(model, centers, coeffs)

    def to_config(self):
        terms = [[to_real(c[None, :])[0].tolist(), to_real(a[None, :])[0].tolist()]
                 for c, a in zip(self.centers, self.coeffs)]
        return {"k": self.model.k, "rank": self.model.rank, "terms": terms}

    def __len__(self):
        return self.centers.shape[0]

    def add_terms(self, centers, coeffs):
        centers = np.asarray(centers, dtype=complex).reshape(-1, self.model.n)
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1, self.model.rank)
        return CoherentSection(self.model, np.concatenate([self.centers, centers]),
                               np.concatenate([self.coeffs, coeffs]))

    # ------------------------------------------------------------------
    # closed forms
    # ------------------------------------------------------------------
    def _kernels(self, X):
        """Per-term unitary-gauge factors E (m, T) and conj(x_t - z) (m, T, n)."""
        Z = to_complex(X)
        if Z.shape[1] != self.model.n:
            raise DimensionMismatchError(f"points in C^{Z.shape[1]} for a model on C^{self.model.n}")
        kpi = self.model.k * math.pi
        w = self.centers[None, :, :] - Z[:, None, :]
        log_mag = -0.5 * kpi * np.sum(np.abs(w) ** 2, axis=2)
        phase = kpi * np.imag(np.einsum("mj,tj->mt", Z, np.conj(self.centers)))
        E = np.where(log_mag < LOG_UNDERFLOW, 0.0, np.exp(np.maximum(log_mag, LOG_UNDERFLOW) + 1j * phase))
        return E, np.conj(w)

    def values(self, X):
        """Unitary-gauge values, complex (m, r)."""
        E, _ = self._kernels(X)
        return E @ self.coeffs

    def norms(self, X):
        return np.linalg.norm(self.values(X), axis=1)

    def derivative(self, X):
        """Coefficients D (m, r, n) of ∇s = Σ_j D_j dz_j; the (0,1) part is zero."""
        E, wbar = self._kernels(X)
        kpi = self.model.k * math.pi
        return kpi * np.einsum("mt,tr,mtj->mrj", E, self.coeffs, wbar)

    def real_derivative_batch(self, X):
        """Real matrices (m, 2r, 2n) of ∇s."""
        return complex_to_real_matrix(self.derivative(X))

    def real_derivative(self, x):
        matrix = self.real_derivative_batch(np.asarray(x, dtype=float)[None, :])[0]
        return LinearMapR(matrix, j_src=standard_complex_structure(self.model.n),
                          j_dst=standard_complex_structure(self.model.rank))

    def derivative_norm(self, X):
        """Operator norm of ∇s at each point."""
        D = self.derivative(X)
        if D.shape[0] == 0:
            return np.zeros(0)
        return np.linalg.svd(D, compute_uv=False)[:, 0]

    def hessian_norm(self, X):
        """Frobenius norm of the real tensor ∇²s.

        ∇^{1,0}∇^{1,0}s has coefficients (kπ)² Σ α w̄_j w̄_l E and the mixed part
        is -kπ δ_jl s; the other parts vanish.
        """
        E, wbar = self._kernels(X)
        kpi = self.model.k * math.pi
        H = kpi ** 2 * np.einsum("mt,tr,mtj,mtl->mrjl", E, self.coeffs, wbar, wbar)
        value = E @ self.coeffs
        mixed = self.model.n * kpi ** 2 * np.sum(np.abs(value) ** 2, axis=1)
        return 2.0 * np.sqrt(np.sum(np.abs(H) ** 2, axis=(1, 2, 3)) + mixed)

    def antilinear_norm(self, X):
        """Norm of ∂̄s at each point, from the real derivative."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return dbar_norms(self.real_derivative_batch(X), self.model.n, self.model.rank)

    def control_constants(self, X):
        """sup over the grid of ‖∇^m s‖ / k^{m/2} for m = 0, 1, 2, and their max K."""
        k = self.model.k
        norms = [float(np.max(self.norms(X), initial=0.0)),
                 float(np.max(self.derivative_norm(X), initial=0.0)) / math.sqrt(k),
                 float(np.max(self.hessian_norm(X), initial=0.0)) / k]
        return {"norms": norms, "dbar": float(np.max(self.antilinear_norm(X), initial=0.0)), "K": max(norms)}


def coherent_eval(s, z):
    """Value and norm of s at a single point z (real coordinates)."""
    value = s.values(np.asarray(z, dtype=float)[None, :])[0]
    return value, float(np.linalg.norm(value))


def coherent_covariant_derivative(s, z):
    return s.real_derivative(z)


# ----------------------------------------------------------------------------
# concentration estimates
# ----------------------------------------------------------------------------

def _inverse_norms(n, k, d):
    """‖∇^m c^{-k}‖ / k^{m/2}, m = 0, 1, 2, of the inverse coherent state at distance d."""
    u = math.sqrt(k) * d
    growth = np.exp(math.pi * u ** 2 / 2)
    return np.stack([growth,
                     math.pi * u * growth,
                     2.0 * np.sqrt(math.pi ** 4 * u ** 4 + n * math.pi ** 2) * growth])


def _fit_envelope(u, ratios, degree):
    """Polynomial with nonnegative coefficients of the given degree, above `ratios`
    on the grid, minimizing its integral over [0, max u]."""
    top = float(u.max())
    powers = np.arange(degree + 1)
    cost = top ** (powers + 1) / (powers + 1)
    A_ub = -(u[:, None] ** powers[None, :])
    result = optimize.linprog(cost, A_ub=A_ub, b_ub=-ratios, bounds=[(0, None)] * (degree + 1), method="highs")
    if not result.success:
        raise RuntimeError(f"envelope fit failed: {result.message}")
    coeffs = result.x
    # solver tolerance: lift the constant term by any remaining violation
    slack = np.max(ratios - (u[:, None] ** powers[None, :]) @ coeffs)
    if slack > 0:
        coeffs = coeffs.copy()
        coeffs[0] += slack
    return coeffs


def concentration_check(model, m_max, R, grid=None, ks=(16, 64, 256)):
    """Fit decay envelopes P_m with ‖∇^m c‖ ≤ k^{m/2} P_m(u) e^{-πu²/2}, u = k^{1/2} d,
    and inverse constants C_m with ‖∇^m c^{-k}‖ ≤ C_m k^{m/2} on u ≤ R.

    Envelopes are fitted per k and over all k together; the report flags whether
    the per-k integrals and constants agree within a factor 2.
    """
    if not 0 <= m_max <= 2:
        raise ValueError(f"m_max must lie in 0..2, got {m_max}")
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    u = np.linspace(0.0, ENVELOPE_U_MAX, ENVELOPE_U_POINTS) if grid is None else np.asarray(grid, dtype=float)
    direction = np.zeros(model.real_dim)
    direction[0] = 1.0

    ratios_by_k = {}
    inverse_by_k = {}
    dbar_max = 0.0
    for k in ks:
        probe_model = PrequantumModel(model.n, k, 1)
        c = CoherentSection.single(probe_model)
        d = u / math.sqrt(k)
        X = d[:, None] * direction[None, :]
        decay = np.exp(-math.pi * u ** 2 / 2)
        per_m = [c.norms(X), c.derivative_norm(X) / math.sqrt(k), c.hessian_norm(X) / k][:m_max + 1]
        dbar_max = max(dbar_max, float(np.max(c.antilinear_norm(X), initial=0.0)) / math.sqrt(k))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios_by_k[k] = [np.where(decay > 0, values / decay, 0.0) for values in per_m]
        inside = d[u <= R]
        inverse_by_k[k] = np.max(_inverse_norms(model.n, k, inside)[:m_max + 1], axis=1)

    envelopes, envelope_by_k, stable = {}, {}, True
    for m in range(m_max + 1):
        pooled = np.max(np.stack([ratios_by_k[k][m] for k in ks]), axis=0)
        envelopes[m] = _fit_envelope(u, pooled, m).tolist()
        integrals = []
        for k in ks:
            coeffs = _fit_envelope(u, ratios_by_k[k][m], m)
            envelope_by_k.setdefault(k, {})[m] = coeffs.tolist()
            integrals.append(np.polynomial.polynomial.polyval(u.max(), np.polynomial.polynomial.polyint(coeffs)))
        stable &= max(integrals) <= 2.0 * min(integrals)

    inverse = np.max(np.stack([inverse_by_k[k] for k in ks]), axis=0)
    inverse_stable = bool(np.all(np.max([inverse_by_k[k] for k in ks], axis=0)
                                 <= 2.0 * np.min([inverse_by_k[k] for k in ks], axis=0)))
    logging.debug(f"MODEL_GEOMETRY. envelopes {envelopes}, inverse constants {inverse.tolist()}")
    return {
        "envelopes": envelopes,
        "envelope_by_k": envelope_by_k,
        "stable": bool(stable),
        "inverse_constants": inverse.tolist(),
        "inverse_by_k": {k: v.tolist() for k, v in inverse_by_k.items()},
        "inverse_stable": inverse_stable,
        "dbar_max": dbar_max,
        "ks": list(ks),
    }


def sum_over_separated_set_bound(s, X):
    """Smallest C with ‖∇^m s‖ ≤ C k^{m/2} exp(-kπ d(x, F)²/3), m = 0, 1, 2, on the probes X.

    Requires the centers F to be k^{-1/2}-separated and every |α| ≤ 1.
    """
    k = s.model.k
    centers = to_real(s.centers)
    if len(s) == 0:
        raise ValueError("section has no terms")
    if len(s) > 1:
        closest = float(np.min(spatial.distance.pdist(centers)))
        if closest < s.model.length_scale - SPACING_TOL:
            raise NetSpacingError(f"centers at distance {closest:.6g} < k^-1/2 = {s.model.length_scale:.6g}")
    if np.max(np.linalg.norm(s.coeffs, axis=1)) > 1.0 + SPACING_TOL:
        raise ValueError("coefficient vectors must have norm <= 1")

    X = np.atleast_2d(np.asarray(X, dtype=float))
    distance, _ = spatial.cKDTree(centers).query(X)
    decay = np.exp(np.maximum(-k * math.pi * distance ** 2 / 3.0, LOG_UNDERFLOW))
    per_m = [s.norms(X), s.derivative_norm(X) / math.sqrt(k), s.hessian_norm(X) / k]
    constants = [float(np.max(values / decay)) for values in per_m]
    return {"constants": constants, "C": max(constants), "k": k, "n_terms": len(s)}


# ----------------------------------------------------------------------------
# exponential tails
# ----------------------------------------------------------------------------

def tail_majorant_coefficients(M1_coeffs, C_rate):
    """Coefficients (ascending) of M2 with M2(n) - e^{-C} M2(n+1) = M1(n)."""
    if C_rate <= 0:
        raise ValueError(f"C_rate must be positive, got {C_rate}")
    a = np.atleast_1d(np.asarray(M1_coeffs, dtype=float))
    degree = a.size - 1
    j = np.arange(degree + 1)
    shift = np.triu(special.comb(j[None, :], j[:, None]))
    system = np.eye(degree + 1) - math.exp(-C_rate) * shift
    return scipy_linalg.solve_triangular(system, a)


def tail_majorant(M1_coeffs, C_rate, N):
    """M2(N) such that Σ_{n≥N} M1(n) e^{-Cn} = M2(N) e^{-CN}."""
    coeffs = tail_majorant_coefficients(M1_coeffs, C_rate)
    return float(np.polynomial.polynomial.polyval(N, coeffs))


# ----------------------------------------------------------------------------
# submanifold windows and nets
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SubmanifoldY:
    """Linear subspace through `base`, clipped to the box [lows, highs] in frame coordinates."""
    frame: "np.ndarray"
    lows: "np.ndarray"
    highs: "np.ndarray"
    base: Optional["np.ndarray"] = None

    def __post_init__(self):
        frame = np.atleast_2d(np.asarray(self.frame, dtype=float))
        lows = np.atleast_1d(np.asarray(self.lows, dtype=float))
        highs = np.atleast_1d(np.asarray(self.highs, dtype=float))
        base = np.zeros(frame.shape[0]) if self.base is None else np.asarray(self.base, dtype=float)
        if frame.shape[0] % 2:
            raise DimensionMismatchError(f"ambient dimension must be even, got {frame.shape[0]}")
        if np.max(np.abs(frame.T @ frame - np.eye(frame.shape[1])), initial=0.0) > ORTHONORMAL_TOL:
            raise ValueError("frame is not orthonormal")
        if lows.shape != (frame.shape[1],) or highs.shape != lows.shape or base.shape != (frame.shape[0],):
            raise DimensionMismatchError("window bounds and base point must match the frame")
        if np.any(highs < lows):
            raise ValueError("window is empty")
        for name, value in (("frame", frame), ("lows", lows), ("highs", highs), ("base", base)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def coordinate(cls, n, dims, half_width):
        """The span of the first `dims` real coordinates of C^n over [-half_width, half_width]^dims."""
        return cls(np.eye(2 * n)[:, :dims], -half_width * np.ones(dims), half_width * np.ones(dims))

    @property
    def dim(self):
        return self.frame.shape[1]

    @property
    def ambient_dim(self):
        return self.frame.shape[0]

    @property
    def diameter(self):
        return float(np.linalg.norm(self.highs - self.lows))

    @property
    def subspace(self):
        return Subspace(self.frame)

    def embed(self, coords):
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        return self.base[None, :] + coords @ self.frame.T

    def grid(self, pitch):
        """Axis-aligned grid of the window with spacing at most `pitch`, endpoints included."""
        axes = [np.linspace(lo, hi, max(1, math.ceil((hi - lo) / pitch - 1e-9) + 1))
                for lo, hi in zip(self.lows, self.highs)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class SeparatedNet:
    """δ-separated points in window coordinates, optionally colored into D·δ-separated classes."""
    points: "np.ndarray"
    spacing: float
    coloring: Optional["np.ndarray"] = None
    D: Optional[float] = None
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        if self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if _has_pair_closer_than(points, self.spacing - SPACING_TOL):
            raise NetSpacingError(f"points closer than the spacing {self.spacing}")
        if self.coloring is not None:
            if self.D is None:
                raise ValueError("a coloring requires its separation factor D")
            coloring = np.asarray(self.coloring, dtype=int)
            if coloring.shape != (len(points),):
                raise DimensionMismatchError("one color per point is required")
            coloring.setflags(write=False)
            object.__setattr__(self, "coloring", coloring)
            for color in np.unique(coloring):
                if _has_pair_closer_than(points[coloring == color], self.D * self.spacing - SPACING_TOL):
                    raise NetSpacingError(f"color class {color} is not {self.D}-separated")

    def __len__(self):
        return self.points.shape[0]

    @property
    def n_colors(self):
        return 0 if self.coloring is None else int(self.coloring.max(initial=-1) + 1)

    def color_classes(self):
        if self.coloring is None:
            return [np.arange(len(self))]
        return [np.flatnonzero(self.coloring == color) for color in range(self.n_colors)]

    def to_frame(self):
        df = pd.DataFrame(self.points, columns=[f"t{i}" for i in range(self.points.shape[1])])
        if self.coloring is not None:
            df["color"] = self.coloring
        return df

    def dump_csv(self, path):
        self.to_frame().to_csv(path, index=False)


def _has_pair_closer_than(points, radius):
    if len(points) < 2 or radius <= 0:
        return False
    return any(
        np.linalg.norm(points[i] - points[j]) < radius
        for i, j in spatial.cKDTree(points).query_pairs(radius)
    )


def _greedy_separated(candidates, delta, accepted=()):
    """Extend `accepted` by the candidates, in order, that keep every pair at least delta apart."""
    accepted = [np.asarray(p, dtype=float) for p in accepted]
    dim = candidates.shape[1]
    offsets = np.array(np.meshgrid(*([[-1, 0, 1]] * dim), indexing="ij")).reshape(dim, -1).T
    buckets = {}
    for index, point in enumerate(accepted):
        buckets.setdefault(tuple(np.floor(point / delta).astype(int)), []).append(index)
    for point in candidates:
        cell = np.floor(point / delta).astype(int)
        near = any(
            np.linalg.norm(point - accepted[other]) < delta - SPACING_TOL
            for offset in offsets
            for other in buckets.get(tuple(cell + offset), ())
        )
        if not near:
            buckets.setdefault(tuple(cell), []).append(len(accepted))
            accepted.append(point)
    return accepted


def covering_grid(Y, delta):
    """Grid of pitch delta / (2 NET_GRID_SUBDIVISION), offset by half a pitch from the
    candidate grid, plus the corners of the window."""
    pitch = delta / (2 * NET_GRID_SUBDIVISION)
    axes = []
    for lo, hi in zip(Y.lows, Y.highs):
        axis = np.arange(lo + pitch / 2, hi, pitch)
        axes.append(axis if axis.size else np.array([(lo + hi) / 2]))
    mesh = np.meshgrid(*axes, indexing="ij")
    corners = np.array(np.meshgrid(*zip(Y.lows, Y.highs), indexing="ij")).reshape(Y.dim, -1).T
    return np.concatenate([np.stack([m.ravel() for m in mesh], axis=1), corners])


def verify_covering(net, Y):
    """Largest distance from a point of the covering grid to the net.

    Raises:
        ContractViolationError: some grid point is farther than the net spacing
    """
    points = covering_grid(Y, net.spacing)
    if len(net) == 0:
        raise ContractViolationError("empty net covers nothing", probe=points[0])
    covering, _ = spatial.cKDTree(net.points).query(points)
    worst = int(np.argmax(covering))
    if covering[worst] > net.spacing + SPACING_TOL:
        raise ContractViolationError(f"covering radius {covering[worst]:.6g} exceeds the spacing {net.spacing:.6g}",
                                     probe=points[worst])
    return float(covering[worst])


def discretize_window(Y, k):
    """Greedy maximal k^{-1/2}-separated subset of the window.

    Candidates are taken in raster order from a grid of pitch k^{-1/2}/4, then
    from the covering grid points still farther than k^{-1/2}; the covering radius
    is verified on the covering grid.
    """
    delta = 1.0 / math.sqrt(k)
    if Y.diameter * math.sqrt(k) > NET_SIZE_GUARD:
        raise NetTooLargeError()
    accepted = _greedy_separated(Y.grid(delta / NET_GRID_SUBDIVISION), delta)

    checkpoints = covering_grid(Y, delta)
    distance, _ = spatial.cKDTree(np.array(accepted)).query(checkpoints)
    uncovered = checkpoints[distance > delta]
    if len(uncovered):
        logging.debug(f"MODEL_GEOMETRY. {len(uncovered)} grid points beyond k^-1/2 of the candidate net, extending")
        accepted = _greedy_separated(uncovered, delta, accepted)

    net = SeparatedNet(np.array(accepted), delta)
    verify_covering(net, Y)
    logging.debug(f"MODEL_GEOMETRY. net of {len(net)} points (k={k}, window dim {Y.dim})")
    return net


def packing_bound_check(net, center, radius):
    """Count net points in B(center, radius) against (2 radius / δ + 1)^d."""
    center = np.asarray(center, dtype=float)
    count = int(np.sum(np.linalg.norm(net.points - center[None, :], axis=1) <= radius))
    bound = (2.0 * radius / net.spacing + 1.0) ** net.points.shape[1]
    return {"count": count, "bound": bound, "ok": count <= bound}


def _insertion_order(G, colors):
    return list(G.nodes)


def greedy_color(net, D):
    """Greedy coloring (insertion order) of the graph joining points closer than D·δ."""
    if D < 1:
        raise PreconditionError(f"D must be >= 1, got {D}")
    threshold = D * net.spacing - SPACING_TOL
    G = nx.Graph()
    G.add_nodes_from(range(len(net)))
    if len(net) > 1:
        tree = spatial.cKDTree(net.points)
        G.add_edges_from((i, j) for i, j in tree.query_pairs(threshold)
                         if np.linalg.norm(net.points[i] - net.points[j]) < threshold)
    colors = nx.greedy_color(G, strategy=_insertion_order)
    coloring = np.array([colors[i] for i in range(len(net))], dtype=int)
    max_degree = max((deg for _, deg in G.degree), default=0)
    if coloring.max(initial=-1) + 1 > max_degree + 1:
        raise ContractViolationError(f"{coloring.max() + 1} colors exceed max degree {max_degree} + 1")
    logging.debug(f"MODEL_GEOMETRY. D={D}: {coloring.max(initial=-1) + 1} colors, max degree {max_degree}")
    return SeparatedNet(net.points, net.spacing, coloring=coloring, D=float(D), flags=dict(net.flags))


def radial_profiles(n, u):
    """‖∇^m c‖ / k^{m/2} of a unit coherent state at scaled distance u, m = 0, 1, 2."""
    u = np.asarray(u, dtype=float)
    decay = np.exp(-math.pi * u ** 2 / 2)
    return np.stack([decay, math.pi * u * decay, 2.0 * np.sqrt(math.pi ** 4 * u ** 4 + n * math.pi ** 2) * decay])
