"""
Transversalization engine on the flat model.

A section is perturbed by sums of coherent states centered on a separated net of
the window Y. The net is colored into classes whose points are D·k^{-1/2} apart;
classes are processed one after another with precisions from the schedule, and
every stage is verified on the grid of pitch k^{-1/2}/4. All claims made by a
RunReport are relative to that grid.

In the flat model the almost-complex structure is the standard one, so the
straightening of coordinates around a net point is the identity.
"""
from dataclasses import dataclass, field, asdict

from common.imports import np, spatial, special, logging, math, json, Parallel, delayed
from constants import (
    ANALYTIC_TOL, SPACING_TOL, NET_GRID_SUBDIVISION, D_INITIAL, D_MAX_DOUBLINGS, DOMINATION_N0_MAX,
    LOCAL_RADIUS, BARYCENTER_THETAS, CROSSTALK_D_RANGE, CROSSTALK_D_STEP, GOOD_VALUE_BUDGET,
)
from exceptions import (
    ScheduleError, PreconditionError, ContractViolationError, FixpointError, NetSpacingError, ConfigError,
)
from model_geometry import (
    PrequantumModel, CoherentSection, SubmanifoldY, to_complex, to_real, complex_to_real_matrix,
    discretize_window, greedy_color, radial_profiles,
)
from monte_carlo import spawn_generators, resolve_n_jobs
from polynomial_maps import SampledMap, good_regular_value
from timing_logger import log as tlog
from transversality_core import (
    LinearMapR, Subspace, WeightedModuleParams, ms_batch, operator_norm, hyperplane_sandwich,
    standard_complex_structure,
)


# ----------------------------------------------------------------------------
# schedule
# ----------------------------------------------------------------------------

def _poly_value(P_coeffs, t):
    """P(t) for ascending coefficients."""
    return float(np.polynomial.polynomial.polyval(t, np.asarray(P_coeffs, dtype=float)))


@dataclass(frozen=True)
class Schedule:
    eps: float
    A: float
    C: float
    P: tuple
    D: float
    n_D: int
    eps_seq: tuple
    eta_seq: tuple

    def P_at(self, t):
        return _poly_value(self.P, t)

    def separation_margins(self):
        """η_i/ε_i - C e^{-πD²/4} per class; all must be nonnegative."""
        floor = self.C * math.exp(-math.pi * self.D ** 2 / 4)
        return [eta / eps - floor for eps, eta in zip(self.eps_seq, self.eta_seq)]

    def separation_ok(self):
        return all(m >= 0 for m in self.separation_margins())

    def to_dict(self):
        return asdict(self)


def build_schedule(eps, A, P_coeffs, C, D, n_D):
    """Precisions (ε_i, η_i), i = 1..n_D.

    ε₁ = ε/A, η₁ = ε₁/P(log 1/ε₁), ε_{i+1} = min(ε₁, η_i/2A),
    η_{i+1} = min(η_i/2, ε_{i+1}/P(log 1/ε_{i+1})).
    """
    if eps <= 0 or A <= 0 or C <= 0:
        raise ScheduleError(f"eps, A and C must be positive, got eps={eps}, A={A}, C={C}")
    if n_D < 1:
        raise ScheduleError(f"n_D must be >= 1, got {n_D}")
    if not eps / A < 1.0 / (2.0 * math.e):
        raise ScheduleError(f"eps/A = {eps / A:.4g} must be below 1/(2e); raise A above {2.0 * math.e * eps:.4g}")

    def eta_for(e):
        t = -math.log(e)
        p = _poly_value(P_coeffs, t)
        if not p > 0:
            raise ScheduleError(f"P must be positive on [0, inf), got P({t:.4g}) = {p:.4g}")
        return e / p

    eps_seq = [eps / A]
    eta_seq = [eta_for(eps_seq[0])]
    for _ in range(n_D - 1):
        next_eps = min(eps_seq[0], eta_seq[-1] / (2.0 * A))
        eps_seq.append(next_eps)
        eta_seq.append(min(eta_seq[-1] / 2.0, eta_for(next_eps)))

    if not all(0.0 < v < 1.0 for v in eps_seq + eta_seq):
        raise ScheduleError("schedule left (0, 1); the precisions underflowed")
    if any(b > a for a, b in zip(eps_seq, eps_seq[1:])):
        logging.warning("DONALDSON_PROCEDURE. eps sequence is not nonincreasing for this P and A")
    return Schedule(eps=float(eps), A=float(A), C=float(C), P=tuple(float(c) for c in P_coeffs), D=float(D),
                    n_D=int(n_D), eps_seq=tuple(eps_seq), eta_seq=tuple(eta_seq))


def _checked_sequence(u_seq):
    u = np.asarray(u_seq, dtype=float)
    if u.ndim != 1 or len(u) == 0:
        raise ScheduleError("sequence must be a nonempty 1-D list")
    if not np.all((u > 0) & (u < 1)):
        raise ScheduleError("sequence terms must lie in (0, 1)")
    return u


def schedule_hypothesis_exponent(u_seq):
    """Smallest p with u_n >= u_{n-1} / log(1/u_{n-1})^p for all n (inf if none)."""
    u = _checked_sequence(u_seq)
    p = 0.0
    for prev, cur in zip(u[:-1], u[1:]):
        log_drop = math.log(prev / cur)
        loglog = math.log(-math.log(prev))
        if log_drop <= 0:
            continue
        if loglog <= 0:
            return math.inf
        p = max(p, log_drop / loglog)
    return p


def _min_index_below(log_inv_u, q):
    """Smallest m >= 1 with m q log m >= log(1/u), i.e. (1/m)^{mq} <= u."""
    x = log_inv_u / q
    if x <= 0:
        return 1
    m = max(1, math.floor(x / float(np.real(special.lambertw(x)))) - 1)
    while m * math.log(m) < x * (1.0 - 1e-12):
        m += 1
    return m


def schedule_domination_check(u_seq, p, q):
    """Smallest n₀ with u_n >= (1/(n+n₀))^{(n+n₀)q} for every given n (1-based).

    The input must satisfy u_n >= u_{n-1} / log(1/u_{n-1})^p.
    """
    if not 0 < p < q:
        raise ScheduleError(f"need 0 < p < q, got p={p}, q={q}")
    u = _checked_sequence(u_seq)
    for n in range(1, len(u)):
        bound = u[n - 1] / (-math.log(u[n - 1])) ** p
        if u[n] < bound * (1.0 - 1e-12):
            raise ScheduleError(f"domination hypothesis fails at n={n + 1}: u_n={u[n]:.4g} < {bound:.4g}")

    n0 = 0
    for n, value in enumerate(u, start=1):
        n0 = max(n0, _min_index_below(-math.log(value), q) - n)
        if n0 > DOMINATION_N0_MAX:
            raise ScheduleError(f"no n0 <= {DOMINATION_N0_MAX} dominates the sequence")
    return n0


# ----------------------------------------------------------------------------
# calibration
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Calibration:
    """Pinned engine constants: separated-sum A, cross-talk C, schedule polynomial P."""
    A: float
    C: float
    P: tuple

    def __post_init__(self):
        if not (self.A > 0 and self.C > 0):
            raise ConfigError(f"calibration constants must be positive, got A={self.A}, C={self.C}")
        if len(self.P) == 0:
            raise ConfigError("calibration polynomial P needs at least one coefficient")

    @classmethod
    def from_config(cls, cfg):
        try:
            return cls(float(cfg["A"]), float(cfg["C"]), tuple(float(c) for c in cfg["P"]))
        except KeyError as exc:
            raise ConfigError(f"calibration section is missing {exc}") from None


def _lattice(dim, reach):
    """Integer lattice on a line or hexagonal lattice in the plane, unit spacing, within `reach`."""
    span = np.arange(-reach, reach + 1)
    if dim == 1:
        return span[:, None].astype(float)
    a, b = np.meshgrid(span, span, indexing="ij")
    points = a.ravel()[:, None] * np.array([1.0, 0.0]) + b.ravel()[:, None] * np.array([0.5, math.sqrt(3) / 2])
    return points[np.linalg.norm(points, axis=1) <= reach]


def lattice_sum_constant(n, dim_y, reach=8, probes=21):
    """max over m <= 2 of the sup over a cell of Σ_λ ‖∇^m c_λ‖ / k^{m/2} (unit spacing)."""
    if dim_y not in (1, 2):
        raise ValueError(f"lattice sums are tabulated for windows of dimension 1 or 2, got {dim_y}")
    lattice = _lattice(dim_y, reach)
    if dim_y == 1:
        cell = np.linspace(0.0, 0.5, probes)[:, None]
    else:
        a, b = np.meshgrid(np.linspace(0, 1, probes), np.linspace(0, math.sqrt(3) / 2, probes), indexing="ij")
        cell = np.stack([a.ravel(), b.ravel()], axis=1)
    u = spatial.distance.cdist(cell, lattice)
    return float(np.max(np.sum(radial_profiles(n, u), axis=2)))


def crosstalk_constant(d_range=CROSSTALK_D_RANGE, d_step=CROSSTALK_D_STEP, u_points=101):
    """sup over D of max_{u in [0,1]} max(g₀, g₁)(D - u) / e^{-πD²/4} for a unit bump at distance D."""
    Ds = np.arange(d_range[0], d_range[1] + 0.5 * d_step, d_step)
    u = np.linspace(0.0, 1.0, u_points)
    dist = Ds[:, None] - u[None, :]
    profiles = radial_profiles(1, dist)[:2]
    crosstalk = np.max(np.max(profiles, axis=0), axis=1)
    return float(np.max(crosstalk / np.exp(-math.pi * Ds ** 2 / 4)))


def _random_controlled_section(model, rng, n_terms, amplitude):
    centers = to_complex(rng.uniform(-1.5, 1.5, size=(n_terms, model.real_dim)) / math.sqrt(model.k))
    coeffs = amplitude * (rng.standard_normal((n_terms, model.rank)) + 1j * rng.standard_normal((n_terms, model.rank)))
    coeffs /= np.maximum(1.0, np.abs(coeffs) / amplitude)
    return CoherentSection(model, centers, coeffs)


def calibrate_constants(n, dim_y, k, eps_grid, budget=GOOD_VALUE_BUDGET, seed=0, n_sections=4):
    """Measure A, C and fit P_local(t) = c₀(1+t)^{c₁} from local steps.

    The schedule polynomial is P_sched = 2 c₀ (1+t)^{ceil(c₁)}, expanded into
    ascending coefficients, so that the local step target 2η is met.
    """
    if not eps_grid:
        raise ValueError("eps grid must not be empty")
    if any(not 0 < e < 1 for e in eps_grid):
        raise ValueError("eps grid values must lie in (0, 1)")
    A = lattice_sum_constant(n, dim_y)
    C = crosstalk_constant()

    model = PrequantumModel(n=n, k=k)
    Y = SubmanifoldY.coordinate(n, dim_y, 2.0 / math.sqrt(k))
    rngs = spawn_generators(seed, len(eps_grid) * n_sections)
    ratios = []
    for i, eps in enumerate(eps_grid):
        worst = 0.0
        for j in range(n_sections):
            rng = rngs[i * n_sections + j]
            s = _random_controlled_section(model, rng, n_terms=3, amplitude=0.02)
            _, achieved = local_step(s, np.zeros(dim_y), LOCAL_RADIUS, eps, Y, budget, rng)
            worst = max(worst, eps / max(achieved, 1e-300))
        ratios.append(worst)

    t = -np.log(np.asarray(eps_grid, dtype=float))
    log_ratio = np.log(ratios)
    if len(eps_grid) > 1:
        c1, _ = np.polyfit(np.log1p(t), log_ratio, 1)
        c1 = max(0.0, float(c1))
    else:
        c1 = 0.0
    c0 = float(np.exp(np.max(log_ratio - c1 * np.log1p(t))))
    degree = math.ceil(c1 - 1e-12)
    P = [2.0 * c0 * float(special.comb(degree, j)) for j in range(degree + 1)]
    logging.info(f"DONALDSON_PROCEDURE. calibrated A={A:.4g}, C={C:.4g}, P_local={c0:.4g}(1+t)^{c1:.3g}")
    return {"A": A, "C": C, "P_local": [c0, c1], "P": P, "ratios": [float(r) for r in ratios],
            "eps_grid": [float(e) for e in eps_grid], "n": n, "dim_y": dim_y, "k": k, "seed": seed}


def _net_sum_constant(n, k, grid, net_points):
    """Measured analogue of A for an actual net: sup over the grid of Σ_z ‖∇^m c_z‖/k^{m/2}."""
    delta = 1.0 / math.sqrt(k)
    pairs = spatial.cKDTree(grid).sparse_distance_matrix(spatial.cKDTree(net_points), 8.0 * delta,
                                                         output_type="coo_matrix")
    profiles = radial_profiles(n, pairs.data / delta)
    sums = np.stack([np.bincount(pairs.row, weights=p, minlength=len(grid)) for p in profiles])
    return float(np.max(sums))


# ----------------------------------------------------------------------------
# local and scattered steps
# ----------------------------------------------------------------------------

def weighted_module_along(s, Y, X):
    """max(‖s‖, k^{-1/2} MS(∇s|_Y)) at each point of X."""
    derivative = s.real_derivative_batch(X) @ Y.frame
    return np.maximum(s.norms(X), ms_batch(derivative) / math.sqrt(s.model.k))


def _local_grid(Y, y0, radius, delta, grid):
    grid = Y.grid(delta / NET_GRID_SUBDIVISION) if grid is None else grid
    return grid[np.linalg.norm(grid - y0[None, :], axis=1) <= radius + SPACING_TOL]


def _quotient_oracle(s, c, Y, y0):
    """Batch oracle of f = s / c along Y in coordinates relative to y0."""

    def batch(T):
        X = Y.embed(y0[None, :] + np.atleast_2d(T))
        c_val = c.values(X)[:, 0]
        c_der = c.derivative(X)[:, 0, :]
        f = s.values(X) / c_val[:, None]
        Df = s.derivative(X) / c_val[:, None, None] - f[:, :, None] * (c_der / c_val[:, None])[:, None, :]
        return to_real(f), complex_to_real_matrix(Df) @ Y.frame

    def single(t):
        values, jacobians = batch(np.asarray(t, dtype=float)[None, :])
        return values[0], jacobians[0]

    return single, batch


def local_step(s, y0, R, eps, Y, budget=GOOD_VALUE_BUDGET, rng=None, target=None, grid=None):
    """One coherent bump at y0 raising the weighted module of s along Y near y0.

    Returns (α, achieved) where α is the complex coefficient vector of c_{y0}
    and achieved is the grid minimum of the weighted module of s + α c_{y0} on
    Y ∩ B(y0, R k^{-1/2}). When `target` is met already α = 0.
    """
    if not 0 < eps <= 1:
        raise PreconditionError(f"eps must lie in (0, 1], got {eps}")
    model = s.model
    y0 = np.asarray(y0, dtype=float)
    radius = R / math.sqrt(model.k)
    local = _local_grid(Y, y0, radius, 1.0 / math.sqrt(model.k), grid)
    X = Y.embed(local)

    control = s.control_constants(X)
    if control["K"] > 1.0 + ANALYTIC_TOL:
        raise PreconditionError(f"section is not (1,2)-controlled near {y0}: K={control['K']:.4g}")

    current = weighted_module_along(s, Y, X)
    if target is not None and np.min(current) >= target:
        return np.zeros(model.rank, dtype=complex), float(np.min(current))

    center = to_complex(Y.embed(y0))[0]
    c = CoherentSection.single(PrequantumModel(model.n, model.k, 1), center=center)
    single, batch = _quotient_oracle(s, c, Y, y0)
    sup_bound = float(np.max(np.linalg.norm(batch(local - y0)[0], axis=1), initial=0.0))
    f = SampledMap(single, n_in=Y.dim, radius=radius, sup_bound=sup_bound, batch_oracle=batch)

    y, _ = good_regular_value(f, eps, local - y0, WeightedModuleParams.for_tensor_power(model.k),
                              budget=budget, rng=rng)
    alpha = -to_complex(y[None, :])[0]
    achieved = float(np.min(weighted_module_along(s.add_terms(center, alpha), Y, X)))
    return alpha, achieved


def scattered_step(s, F_class, D, eps_i, eta_i, Y, C, P_coeffs, budget=GOOD_VALUE_BUDGET, seed=0,
                   n_jobs=None, grid=None, R=LOCAL_RADIUS):
    """Local steps at every point of a D·k^{-1/2}-separated class, summed into t.

    Each step aims at 2η_i; the sum is verified to reach η_i on the points of
    the grid within k^{-1/2} of the class.
    """
    model = s.model
    delta = 1.0 / math.sqrt(model.k)
    F_class = np.asarray(F_class, dtype=float).reshape(-1, Y.dim)
    if len(F_class) == 0:
        return CoherentSection(model)

    if len(F_class) > 1 and np.min(spatial.distance.pdist(F_class)) < D * delta - SPACING_TOL:
        raise NetSpacingError(f"class is not {D}-separated at scale k^-1/2")
    p_value = _poly_value(P_coeffs, -math.log(eps_i))
    if eta_i > eps_i / p_value * (1.0 + 1e-12) + 1e-15:
        raise PreconditionError(f"eta_i={eta_i:.4g} exceeds eps_i/P(log 1/eps_i)={eps_i / p_value:.4g}")
    floor = C * math.exp(-math.pi * D ** 2 / 4)
    if eta_i / eps_i < floor:
        raise PreconditionError(f"eta_i/eps_i={eta_i / eps_i:.4g} is below C exp(-pi D^2/4)={floor:.4g}")

    grid = Y.grid(delta / NET_GRID_SUBDIVISION) if grid is None else grid
    rngs = spawn_generators(seed, len(F_class))
    steps = Parallel(n_jobs=resolve_n_jobs(n_jobs), prefer="threads")(
        delayed(local_step)(s, y0, R, eps_i, Y, budget, rng, 2.0 * eta_i, grid)
        for y0, rng in zip(F_class, rngs)
    )
    alphas = np.array([alpha for alpha, _ in steps])
    achieved = np.array([a for _, a in steps])
    short = int(np.sum(achieved < 2.0 * eta_i))
    if short:
        logging.warning(f"DONALDSON_PROCEDURE. {short} of {len(F_class)} local steps below the 2*eta target")

    t = CoherentSection(model, to_complex(Y.embed(F_class)), alphas)
    near, _ = spatial.cKDTree(F_class).query(grid)
    region = grid[near <= delta + SPACING_TOL]
    moduli = weighted_module_along(s.add_terms(t.centers, t.coeffs), Y, Y.embed(region))
    worst = int(np.argmin(moduli))
    if moduli[worst] < eta_i:
        raise ContractViolationError(
            f"weighted module {moduli[worst]:.4g} below eta_i={eta_i:.4g} near the class",
            probe=Y.embed(region[worst])[0])
    return t


# ----------------------------------------------------------------------------
# globalization
# ----------------------------------------------------------------------------

@dataclass
class RunReport:
    status: str
    D: float
    n_D: int
    schedule: Schedule
    calibration: Calibration
    measured_A: float
    stage_minima: list
    final_min: float
    final_eta: float
    t: CoherentSection
    grid_pitch: float
    n_probes: int
    seed: int
    checks: dict = field(default_factory=dict)
    stage_seconds: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "status": self.status, "D": self.D, "n_D": self.n_D,
            "schedule": self.schedule.to_dict(), "calibration": asdict(self.calibration),
            "measured_A": self.measured_A, "stage_minima": self.stage_minima,
            "final_min": self.final_min, "final_eta": self.final_eta,
            "perturbation": self.t.to_config(), "grid_pitch": self.grid_pitch,
            "n_probes": self.n_probes, "seed": self.seed, "checks": self.checks,
            "stage_seconds": self.stage_seconds,
            "note": "all bounds verified on the grid of the given pitch",
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)


def _perturbation_bound(u, X):
    """max(‖u‖, k^{-1/2}‖∇u‖) pointwise."""
    return np.maximum(u.norms(X), u.derivative_norm(X) / math.sqrt(u.model.k))


def _choose_separation(net, eps, A, calibration):
    D = D_INITIAL
    for _ in range(D_MAX_DOUBLINGS):
        colored = greedy_color(net, D)
        schedule = build_schedule(eps, A, calibration.P, calibration.C, D, colored.n_colors)
        if schedule.separation_ok():
            return colored, schedule
        logging.debug(f"DONALDSON_PROCEDURE. D={D} with {colored.n_colors} classes fails the eta/eps floor")
        D *= 2.0
    raise FixpointError(f"no separation factor found in {D_MAX_DOUBLINGS} doublings from D={D_INITIAL}")


def globalize(s, Y, eps, calibration, R=LOCAL_RADIUS, budget=GOOD_VALUE_BUDGET, seed=0, n_jobs=None):
    """Perturb s by t so that s + t has weighted module >= η_{n_D} along the window Y."""
    model = s.model
    k = model.k
    delta = 1.0 / math.sqrt(k)
    pitch = delta / NET_GRID_SUBDIVISION
    grid = Y.grid(pitch)
    X = Y.embed(grid)

    K = s.control_constants(X)["K"]
    if K + eps > 1.0 + ANALYTIC_TOL:
        raise PreconditionError(f"K + eps = {K + eps:.4g} exceeds 1")

    net = discretize_window(Y, k)
    measured_A = _net_sum_constant(model.n, k, grid, net.points)
    A = max(calibration.A, measured_A)
    if measured_A > calibration.A:
        logging.warning(f"DONALDSON_PROCEDURE. net sum {measured_A:.4g} exceeds calibrated A={calibration.A:.4g}")
    colored, schedule = _choose_separation(net, eps, A, calibration)
    logging.info(f"DONALDSON_PROCEDURE. {len(net)} net points, D={colored.D}, {colored.n_colors} classes")

    within = spatial.cKDTree(colored.points).query(grid)[0] <= delta + SPACING_TOL
    covered = np.zeros(len(grid), dtype=bool)
    term_classes = []

    t = CoherentSection(model)
    stage_minima, stage_seconds = [], {}
    chain_slack = math.inf
    for i, idx in enumerate(colored.color_classes()):
        eps_i, eta_i = schedule.eps_seq[i], schedule.eta_seq[i]
        current = s.add_terms(t.centers, t.coeffs)
        label = f"globalize.stage_{i + 1}"
        with tlog(label, sink=stage_seconds):
            u = scattered_step(current, colored.points[idx], colored.D, eps_i, eta_i, Y, calibration.C,
                               calibration.P, budget=budget, seed=[seed, i], n_jobs=n_jobs, grid=grid)

        # grid points within k^-1/2 of classes 1..i
        dists, _ = spatial.cKDTree(colored.points[idx]).query(grid)
        covered |= dists <= delta + SPACING_TOL
        probes = X[covered]

        before = weighted_module_along(current, Y, probes)
        after = weighted_module_along(current.add_terms(u.centers, u.coeffs), Y, probes)
        slack = after - (before - _perturbation_bound(u, probes))
        chain_slack = min(chain_slack, float(np.min(slack)))
        if np.min(slack) < -ANALYTIC_TOL * max(1.0, float(np.max(before))):
            worst = int(np.argmin(slack))
            raise ContractViolationError(f"perturbation Lipschitz bound fails at stage {i + 1}",
                                         probe=probes[worst], stage=i + 1)

        t = CoherentSection(model, np.concatenate([t.centers, u.centers]), np.concatenate([t.coeffs, u.coeffs]))
        term_classes.extend([i] * len(u))
        stage_min = float(np.min(after))
        stage_minima.append(stage_min)
        if stage_min < eta_i:
            worst = int(np.argmin(after))
            raise ContractViolationError(f"stage {i + 1} minimum {stage_min:.4g} below eta={eta_i:.4g}",
                                         probe=probes[worst], stage=i + 1)
        logging.debug(f"DONALDSON_PROCEDURE. stage {i + 1}/{colored.n_colors}: min={stage_min:.4g}, eta={eta_i:.4g}")

    final = weighted_module_along(s.add_terms(t.centers, t.coeffs), Y, X)
    final_min = float(np.min(final))
    final_eta = schedule.eta_seq[-1]
    if final_min < final_eta:
        raise ContractViolationError(f"final minimum {final_min:.4g} below eta={final_eta:.4g}",
                                     probe=X[int(np.argmin(final))], stage=colored.n_colors)

    bounds = np.array([schedule.eps_seq[c] for c in term_classes])
    largest = np.linalg.norm(t.coeffs, axis=1) / bounds
    if np.any(largest > 1.0 + 1e-9):
        raise ContractViolationError(f"a coefficient exceeds its class precision by a factor {largest.max():.4g}")
    t_control = t.control_constants(X)["K"]
    if t_control > eps * (1.0 + 1e-9):
        raise ContractViolationError(f"perturbation control {t_control:.4g} exceeds eps={eps}")

    checks = {"coefficients_ok": True, "t_control": t_control, "chain_min_slack": chain_slack,
              "covered_fraction": float(np.mean(within))}
    logging.info(f"DONALDSON_PROCEDURE. globalize succeeded: min={final_min:.4g} >= eta={final_eta:.4g}")
    return RunReport(status="success", D=colored.D, n_D=colored.n_colors, schedule=schedule, calibration=calibration,
                     measured_A=measured_A, stage_minima=stage_minima, final_min=final_min, final_eta=final_eta,
                     t=t, grid_pitch=pitch, n_probes=len(grid), seed=seed, checks=checks,
                     stage_seconds=stage_seconds)


# ----------------------------------------------------------------------------
# consequence checks
# ----------------------------------------------------------------------------

def random_antilinear(rng, r, n, norm):
    """A real (2r x 2n) map anticommuting with the standard structures, of operator norm `norm`."""
    J_src, J_dst = standard_complex_structure(n), standard_complex_structure(r)
    M = rng.standard_normal((2 * r, 2 * n))
    anti = 0.5 * (M + J_dst @ M @ J_src)
    return LinearMapR(anti * norm / operator_norm(LinearMapR(anti)), j_src=J_src, j_dst=J_dst)


def levi_equality_check(s, Y, probes, antilinear_noise=None):
    """Compare MS of ∇s on a real hyperplane and on its maximal complex subspace.

    Without noise the two agree within 1e-9; with antilinear noise only the
    sandwich MS_H - 2|noise| <= MS_Levi <= MS_H is asserted.
    """
    n = s.model.n
    if n < 2:
        raise PreconditionError(f"the hyperplane check needs n >= 2, got n={n}")
    if Y.dim != Y.ambient_dim - 1:
        raise ValueError(f"Y must have codimension 1, got dimension {Y.dim} in {Y.ambient_dim}")
    H = Subspace(Y.frame)
    gaps, slacks = [], []
    for x in Y.embed(probes):
        u = s.real_derivative(x)
        if antilinear_noise is not None:
            u = u + antilinear_noise
        ms_k, ms_h, antinorm = hyperplane_sandwich(u, H)
        gaps.append(abs(ms_k - ms_h))
        slacks.append(ms_h - ms_k - 2.0 * antinorm)
        if antilinear_noise is None and abs(ms_k - ms_h) >= ANALYTIC_TOL:
            raise ContractViolationError(f"Levi and hyperplane moduli differ by {abs(ms_k - ms_h):.3e}", probe=x)
    return {"n_probes": len(gaps), "max_gap": float(max(gaps, default=0.0)),
            "max_sandwich_slack": float(max(slacks, default=-math.inf)), "ok": True}


def equator_degree(k, samples=2048):
    """Winding numbers of E_k, F_k along the equator |z₀| = |z₁| and their common norm."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    theta = np.linspace(0.0, 2.0 * math.pi, samples + 1)
    z0 = np.exp(1j * theta) / math.sqrt(2)
    z1 = np.full_like(z0, 1.0 / math.sqrt(2))
    half = k // 2
    E = 2 ** (k / 2) * z0 ** half * z1 ** (k - half)
    F = 2 ** (k / 2) * z0 ** (half + 1) * z1 ** (k - half - 1)

    def winding(values):
        return int(round((np.unwrap(np.angle(values))[-1] - np.angle(values[0])) / (2.0 * math.pi)))

    deg_E, deg_F = winding(E), winding(F)
    deviation = max(np.max(np.abs(np.abs(E) - 1.0)), np.max(np.abs(np.abs(F) - 1.0)))
    if abs(deg_E - deg_F) != 1 or deviation > ANALYTIC_TOL:
        raise ContractViolationError(f"equator degrees {deg_E}, {deg_F} with norm deviation {deviation:.3e}")
    return deg_E, deg_F, float(np.mean(np.abs(E)))


def barycenter_module_bound(s0, t0, eta, Y, probes=None):
    """Weighted module of s₀ + θ t₀ along Y for θ in {0, 0.1, ..., 1}; must stay >= η/2."""
    k = s0.model.k
    probes = Y.grid(1.0 / (NET_GRID_SUBDIVISION * math.sqrt(k))) if probes is None else np.atleast_2d(probes)
    X = Y.embed(probes)
    base = weighted_module_along(s0, Y, X)
    if np.min(base) < eta:
        raise PreconditionError(f"s0 has weighted module {np.min(base):.4g} below eta={eta}")
    size = float(np.max(_perturbation_bound(t0, X)))
    if size > eta / 2.0 * (1.0 + 1e-12):
        raise PreconditionError(f"t0 has size {size:.4g} above eta/2={eta / 2.0:.4g}")

    thetas = np.linspace(0.0, 1.0, BARYCENTER_THETAS)
    minima = []
    for theta in thetas:
        sigma = s0.add_terms(t0.centers, theta * t0.coeffs)
        moduli = weighted_module_along(sigma, Y, X)
        minima.append(float(np.min(moduli)))
        if minima[-1] < eta / 2.0 - ANALYTIC_TOL:
            raise ContractViolationError(f"module {minima[-1]:.4g} below eta/2 at theta={theta:.1f}",
                                         probe=X[int(np.argmin(moduli))])
    return {"thetas": thetas.tolist(), "minima": minima, "bound": eta / 2.0, "ok": True}
