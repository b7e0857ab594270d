"""
Experiment registry.

Each experiment takes a parameter table and a seed and returns an
ExperimentResult: CSV rows (one per reported estimate, labelled by a "row" key
inside the row params), a JSON-ready report and the contract verdict. A run is a
pure function of (params, seed); the worker count only changes wall-clock time.
"""
from dataclasses import dataclass, field

from common.imports import np, spatial, logging, math, Dict, List, Optional, Any, Callable
from constants import LOCAL_RADIUS, GOOD_VALUE_BUDGET
from exceptions import (
    ConfigError, ContractViolationError, FixpointError, SliceDisagreementError, NoGoodValueError,
    NoFarPointError, ScheduleError,
)
from timing_logger import log as tlog
from monte_carlo import spawn_generators, uniform_ball
from transversality_core import WeightedModuleParams, ms_batch
from polynomial_maps import (
    MultiPoly, PolyMap, good_regular_value, critical_image_radius, neighborhood_volume_fraction, far_point,
)
from integral_geometry import (
    ImplicitSet, ParametricCurve, crofton_volume, vitushkin_variation, additivity_residual,
    lower_bound_statistic, maximal_separated_subset, degree_growth,
)
from model_geometry import (
    PrequantumModel, CoherentSection, SubmanifoldY, to_complex, concentration_check,
    sum_over_separated_set_bound, discretize_window, packing_bound_check,
)
from donaldson_procedure import (
    Calibration, build_schedule, schedule_hypothesis_exponent, schedule_domination_check, calibrate_constants,
    globalize, levi_equality_check, random_antilinear, equator_degree, barycenter_module_bound,
)

# Failures of a verification step; a run raising one of these violated its contract
CONTRACT_ERRORS = (ContractViolationError, FixpointError, SliceDisagreementError, NoGoodValueError, NoFarPointError)

# Crofton constants with a closed form: lines in the plane, lines in space against surfaces
KNOWN_CROFTON_CONSTANTS = {(1, 2): 2.0 / math.pi, (2, 3): 0.5}


@dataclass
class ExperimentResult:
    rows: List[Dict[str, Any]] = field(default_factory=list)
    report: Dict[str, Any] = field(default_factory=dict)
    contract_ok: bool = True
    violation: Optional[str] = None

    def violate(self, message):
        """Record a failed contract check, keeping the first message."""
        logging.warning(f"EXPERIMENTS. contract violated: {message}")
        if self.contract_ok:
            self.violation = message
        self.contract_ok = False


@dataclass(frozen=True)
class Experiment:
    name: str
    func: Callable
    description: str
    uses_calibration: bool = False


EXPERIMENTS: Dict[str, Experiment] = {}


def register(name, description, uses_calibration=False):
    def decorator(func):
        EXPERIMENTS[name] = Experiment(name, func, description, uses_calibration)
        return func
    return decorator


def list_experiments():
    return sorted(EXPERIMENTS)


# ----------------------------------------------------------------------------
# parameters and rows
# ----------------------------------------------------------------------------

def _param(params, key, default, cast=float):
    value = params.get(key, default)
    if value is None:
        return None
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} must be {cast.__name__}, got {value!r}") from None


def _float_list(params, key, default):
    value = params.get(key, default)
    if not isinstance(value, (list, tuple)):
        value = [value]
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} must be a list of numbers, got {value!r}") from None


def _row(params, label, estimate, stderr=0.0, n_samples=1):
    return {"params": {**params, "row": label}, "estimate": float(estimate), "stderr": float(stderr),
            "n_samples": int(n_samples)}


# ----------------------------------------------------------------------------
# shapes
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Shape:
    build: Callable
    n: int
    R: float
    center: tuple
    anchor: Optional[tuple] = None      # a point on the set
    volume: Optional[float] = None      # length or area when known in closed form
    components: Optional[int] = None


def _circle_pair():
    r2 = MultiPoly.from_terms(2, [((2, 0), 1.0), ((0, 2), 1.0)])
    return ImplicitSet([(r2 - 1.0) * (r2 - 4.0)])


def _quartic():
    return ImplicitSet([MultiPoly.from_terms(2, [((4, 0), 1.0), ((0, 4), 1.0), ((0, 0), -1.0)])])


SHAPES = {
    "circle": Shape(lambda: ImplicitSet.sphere([0.0, 0.0], 1.0), 2, 1.25, (0.0, 0.0), (1.0, 0.0),
                    2.0 * math.pi, 1),
    "circle_pair": Shape(_circle_pair, 2, 2.5, (0.0, 0.0), (1.0, 0.0), 6.0 * math.pi, 2),
    "quartic": Shape(_quartic, 2, 1.5, (0.0, 0.0), (1.0, 0.0), None, 1),
    "ellipse": Shape(lambda: ParametricCurve.ellipse([0.0, 0.0], 1.0, 0.5), 2, 1.25, (0.0, 0.0)),
    "segment": Shape(lambda: ParametricCurve.segment([0.0, 0.0], [1.0, 1.0]), 2, 1.0, (0.5, 0.5),
                     None, math.sqrt(2.0)),
    "sphere": Shape(lambda: ImplicitSet.sphere([0.0, 0.0, 0.0], 1.0), 3, 1.25, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0),
                    4.0 * math.pi, 1),
}


def _shape(params, implicit_only=False):
    name = params.get("shape", "circle")
    if name not in SHAPES:
        raise ConfigError(f"unknown shape {name!r}; available: {', '.join(sorted(SHAPES))}")
    shape = SHAPES[name]
    X = shape.build()
    if implicit_only and not isinstance(X, ImplicitSet):
        raise ConfigError(f"shape {name!r} is parametric; this experiment needs an implicit shape")
    return shape, X


def _shape_volume(shape, X):
    if shape.volume is not None:
        return shape.volume
    return X.length if isinstance(X, ParametricCurve) else None


# ----------------------------------------------------------------------------
# integral geometry
# ----------------------------------------------------------------------------

@register("crofton", "Crofton volume of a shape through random affine slices")
def run_crofton(params, seed):
    shape, X = _shape(params)
    N = _param(params, "n_samples", 100_000, int)
    R = _param(params, "R", shape.R)
    d = shape.n - 1
    estimate = crofton_volume(X, d, shape.n, N, seed, R, center=shape.center)
    target = _shape_volume(shape, X)

    result = ExperimentResult(report={"estimate": estimate.to_dict(), "target": target, "d": d, "n": shape.n})
    result.rows = [
        _row(params, "volume", estimate.mean, estimate.stderr, N),
        _row(params, "raw_integral", estimate.extras["raw_integral"], estimate.extras["raw_stderr"], N),
        _row(params, "crofton_constant", estimate.extras["crofton_constant"], 0.0, N),
    ]
    if target is not None and not estimate.within(target):
        result.violate(f"crofton volume {estimate.mean:.6g} ± {estimate.stderr:.2g} misses {target:.6g}")
    return result


def _variation(params, seed):
    shape, A = _shape(params, implicit_only=True)
    d = _param(params, "d", 0, int)
    N = _param(params, "n_samples", 20_000, int)
    R = _param(params, "R", shape.R)
    estimate = vitushkin_variation(A, None, d, shape.n, R, N, seed, center=shape.center)
    result = ExperimentResult(rows=[_row(params, f"V{d}", estimate.mean, estimate.stderr, N)],
                              report={"estimate": estimate.to_dict(), "d": d})
    if d == 0 and shape.components is not None and estimate.mean != shape.components:
        result.violate(f"V0 = {estimate.mean} but the shape has {shape.components} components")
    constant = KNOWN_CROFTON_CONSTANTS.get((d, shape.n))
    if constant is not None and shape.volume is not None:
        expected = constant * shape.volume
        result.report["expected"] = expected
        if not estimate.within(expected):
            result.violate(f"V{d} = {estimate.mean:.6g} ± {estimate.stderr:.2g} misses {expected:.6g}")
    return result


def _additivity(params, seed):
    shape, A = _shape(params, implicit_only=True)
    d = _param(params, "d", 1, int)
    N = _param(params, "n_samples", 4_000, int)
    balls = params.get("balls", [[[1.0, 0.0], 0.5], [[-1.0, 0.0], 0.5]])
    try:
        balls = [(np.asarray(c, dtype=float), float(r)) for c, r in balls]
    except (TypeError, ValueError):
        raise ConfigError("balls must be a list of [center, radius] pairs") from None
    outcome = additivity_residual(A, balls, d, N, seed, R=_param(params, "R", None))
    result = ExperimentResult(rows=[_row(params, "residual", outcome.residual, outcome.stderr, N)],
                              report={"lhs": outcome.lhs, "rhs": outcome.rhs, "residual": outcome.residual,
                                      "stderr": outcome.stderr})
    if not outcome.within_tolerance:
        result.violate(f"additivity residual {outcome.residual:.4g} exceeds 3 sigma = {3 * outcome.stderr:.4g}")
    return result


def _lower_bound(params, seed):
    shape, A = _shape(params, implicit_only=True)
    center = params.get("center", list(shape.anchor) if shape.anchor else None)
    if center is None:
        raise ConfigError("lower bound needs a center point on the set")
    radii = _float_list(params, "radii", [0.1, 0.2, 0.4])
    d_max = _param(params, "d_max", shape.n - 1, int)
    N = _param(params, "n_samples", 2_000, int)
    stats = lower_bound_statistic(A, center, radii, d_max, N, seed)
    result = ExperimentResult(rows=[_row(params, f"r={r:g}", stat, err, N) for r, stat, err in stats],
                              report={"radii": radii, "statistics": [s for _, s, _ in stats]})
    for r, stat, _ in stats:
        if not stat > 0:
            result.violate(f"lower-bound statistic vanishes at r={r:g}")
    return result


def _degree_growth(params, seed):
    degrees = [int(d) for d in params.get("degrees", [1, 2, 4])]
    n_curves = _param(params, "n_curves", 5, int)
    N = _param(params, "n_samples", 1_000, int)
    growth = degree_growth(degrees, n_curves, N, seed)
    result = ExperimentResult(rows=[_row(params, f"degree={d}", m, 0.0, N * n_curves)
                                    for d, m in zip(growth["degrees"], growth["means"])],
                              report=growth)
    max_slope = _param(params, "max_slope", 2.0)
    if growth["slope"] > max_slope:
        result.violate(f"V1 grows like degree^{growth['slope']:.3g}, above degree^{max_slope:g}")
    return result


VITUSHKIN_MODES = {"variation": _variation, "additivity": _additivity, "lower_bound": _lower_bound,
                   "degree_growth": _degree_growth}


@register("vitushkin", "Vitushkin variations: V_d, additivity over balls, small-ball lower bound, degree growth")
def run_vitushkin(params, seed):
    mode = params.get("mode", "variation")
    if mode not in VITUSHKIN_MODES:
        raise ConfigError(f"unknown vitushkin mode {mode!r}; available: {', '.join(VITUSHKIN_MODES)}")
    return VITUSHKIN_MODES[mode](params, seed)


def _spread(values):
    positive = [v for v in values if v > 0]
    return max(positive) / min(positive) if positive else math.inf


def _separated_scaling(params, seed):
    shape, A = _shape(params, implicit_only=True)
    eps_list = _float_list(params, "eps", [0.1, 0.05, 0.02])
    R = _param(params, "R", shape.R)
    max_spread = _param(params, "max_spread", 4.0)
    rngs = spawn_generators(seed, len(eps_list))
    scaled, rows, certified = [], [], True
    for eps, rng in zip(eps_list, rngs):
        net = maximal_separated_subset(A, eps, R, rng, center=shape.center)
        value = len(net) * eps ** (shape.n - 1)
        certified &= bool(net.flags.get("maximality_certified", False))
        scaled.append(value)
        rows.append(_row(params, f"eps={eps:g}", value, 0.0, len(net)))
    spread = _spread(scaled)
    result = ExperimentResult(rows=rows, report={"eps": eps_list, "scaled_cardinality": scaled, "spread": spread,
                                                 "maximality_certified": certified})
    if not certified:
        logging.warning("EXPERIMENTS. maximality of a separated subset was not certified")
    if any(v == 0 for v in scaled):
        result.violate("a separated subset came back empty")
    elif spread > max_spread:
        result.violate(f"card * eps^(n-1) spreads by {spread:.3g} > {max_spread:g}")
    return result


def _conic(params):
    terms = params.get("conic", [[[2, 0], 1.0], [[0, 2], 2.0], [[0, 0], -0.5]])
    try:
        return MultiPoly.from_config(2, terms)
    except (TypeError, ValueError, IndexError):
        raise ConfigError("conic must be a list of [exponents, coefficient] entries") from None


def _neighborhood_scaling(params, seed):
    h = _conic(params)
    eps_list = _float_list(params, "eps", [0.1, 0.05, 0.02])
    N = _param(params, "n_samples", 20_000, int)
    max_spread = _param(params, "max_spread", 2.0)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(len(eps_list) + 1)]
    ratios, rows = [], []
    for eps, eps_seed in zip(eps_list, seeds):
        estimate = neighborhood_volume_fraction(h, eps, N, eps_seed)
        ratios.append(estimate.mean / eps)
        rows.append(_row(params, f"eps={eps:g}", estimate.mean / eps, estimate.stderr / eps, N))
    point, distance = far_point(h, min(eps_list), _param(params, "far_budget", 256, int),
                                np.random.default_rng(seeds[-1]))
    rows.append(_row(params, "far_distance", distance))
    spread = _spread(ratios)
    result = ExperimentResult(rows=rows, report={"eps": eps_list, "fraction_over_eps": ratios, "spread": spread,
                                                 "far_point": point.tolist(), "far_distance": distance})
    if any(r == 0 for r in ratios):
        result.violate("an eps-neighborhood came back with zero volume")
    elif spread > max_spread:
        result.violate(f"neighborhood fraction / eps spreads by {spread:.3g} > {max_spread:g}")
    return result


def _net_packing(params, seed):
    n = _param(params, "n", 2, int)
    dims = _param(params, "dims", 2, int)
    k = _param(params, "k", 64, int)
    Y = SubmanifoldY.coordinate(n, dims, _param(params, "half_width", 0.5))
    net = discretize_window(Y, k)
    radii = _float_list(params, "radii", [0.1, 0.25, 0.6])
    checks = [packing_bound_check(net, np.zeros(dims), r) for r in radii]
    result = ExperimentResult(rows=[_row(params, f"r={r:g}", c["count"] / c["bound"], 0.0, len(net))
                                    for r, c in zip(radii, checks)],
                              report={"net_size": len(net), "radii": radii, "checks": checks})
    for r, c in zip(radii, checks):
        if not c["ok"]:
            result.violate(f"{c['count']} net points in a ball of radius {r:g}, bound {c['bound']:.4g}")
    return result


PACKING_MODES = {"separated": _separated_scaling, "neighborhood": _neighborhood_scaling, "net": _net_packing}


@register("packing", "Separated-subset cardinalities, eps-neighborhood volumes and net packing bounds")
def run_packing(params, seed):
    mode = params.get("mode", "separated")
    if mode not in PACKING_MODES:
        raise ConfigError(f"unknown packing mode {mode!r}; available: {', '.join(PACKING_MODES)}")
    return PACKING_MODES[mode](params, seed)


# ----------------------------------------------------------------------------
# polynomial maps
# ----------------------------------------------------------------------------

def complex_squaring():
    """z -> z² as a map R² -> R²."""
    return PolyMap([MultiPoly.from_terms(2, [((2, 0), 1.0), ((0, 2), -1.0)]),
                    MultiPoly.from_terms(2, [((1, 1), 2.0)])])


def _disk_grid(radius, points):
    """points x points square grid over [-radius, radius]^2, restricted to the closed disk."""
    axis = np.linspace(-radius, radius, points)
    a, b = np.meshgrid(axis, axis, indexing="ij")
    grid = np.stack([a.ravel(), b.ravel()], axis=1)
    return grid[np.linalg.norm(grid, axis=1) <= radius * (1.0 + 1e-12)]


@register("goodvalue", "Good regular value of complex squaring against brute force, with the thinness check")
def run_goodvalue(params, seed):
    f = complex_squaring()
    eps = _param(params, "eps", 0.1)
    budget = _param(params, "budget", GOOD_VALUE_BUDGET, int)
    n_brute = _param(params, "brute_candidates", 100, int)
    weights = WeightedModuleParams(_param(params, "a", 1.0), _param(params, "b", 1.0))
    grid = _disk_grid(_param(params, "radius", 1.0), _param(params, "grid_points", 41, int))
    search_rng, brute_rng = spawn_generators(seed, 2)

    y, achieved = good_regular_value(f, eps, grid, weights, budget=budget, rng=search_rng)

    values, jacobians = f.evaluate_batch(grid)
    moduli = weights.b * ms_batch(jacobians)
    candidates = eps * uniform_ball(brute_rng, n_brute, values.shape[1])
    scores = np.min(np.maximum(weights.a * spatial.distance.cdist(candidates, values), moduli[None, :]), axis=1)
    brute = float(np.max(scores))

    thin = critical_image_radius(f, eps, grid)
    result = ExperimentResult(
        rows=[_row(params, "module", achieved, 0.0, budget), _row(params, "brute_force", brute, 0.0, n_brute),
              _row(params, "critical_radius_over_eps", thin["radius_over_eps"], 0.0, len(grid))],
        report={"y": y.tolist(), "module": achieved, "brute_force": brute, "thinness": thin},
    )
    if achieved < 0.9 * brute:
        result.violate(f"good value module {achieved:.4g} is below 90% of brute force {brute:.4g}")
    if thin["radius_over_eps"] > 1.0:
        result.violate(f"critical values spread to {thin['radius']:.4g} > eps={eps:g}")
    return result


# ----------------------------------------------------------------------------
# flat model
# ----------------------------------------------------------------------------

def _line_net_section(n, k, rng, n_points):
    """Unit-modulus random phases on an n_points net along the first real axis."""
    model = PrequantumModel(n=n, k=k)
    Y = SubmanifoldY.coordinate(n, 1, (n_points - 1) / 2.0 / math.sqrt(k))
    net = discretize_window(Y, k)
    coeffs = np.exp(2j * np.pi * rng.uniform(size=(len(net), 1))) * rng.uniform(0.5, 1.0, size=(len(net), 1))
    s = CoherentSection(model, to_complex(Y.embed(net.points)), coeffs)
    return s, Y.embed(Y.grid(0.25 / math.sqrt(k)))


@register("concentration", "Coherent-state decay envelopes, inverse estimates and separated sums across k")
def run_concentration(params, seed):
    n = _param(params, "n", 1, int)
    m_max = _param(params, "m_max", 2, int)
    R = _param(params, "R", 2.0)
    ks = tuple(int(k) for k in params.get("ks", [16, 64, 256]))
    n_points = _param(params, "net_points", 100, int)
    report = concentration_check(PrequantumModel(n=n, k=ks[0]), m_max, R, ks=ks)

    rngs = spawn_generators(seed, len(ks))
    sums = {}
    for k, rng in zip(ks, rngs):
        s, X = _line_net_section(n, k, rng, n_points)
        sums[k] = sum_over_separated_set_bound(s, X)["C"]
    report["separated_sum_constants"] = sums

    rows = [_row(params, f"inverse_m={m}", c) for m, c in enumerate(report["inverse_constants"])]
    rows += [_row(params, f"separated_C_k={k}", c, 0.0, n_points) for k, c in sums.items()]
    result = ExperimentResult(rows=rows, report=report)
    if not report["stable"]:
        result.violate("decay envelopes differ by more than a factor 2 across k")
    if not report["inverse_stable"]:
        result.violate("inverse constants differ by more than a factor 2 across k")
    if max(sums.values()) > 2.0 * min(sums.values()):
        result.violate(f"separated-sum constants {sorted(sums.values())} differ by more than a factor 2")
    return result


# ----------------------------------------------------------------------------
# transversalization engine
# ----------------------------------------------------------------------------

def _calibration(params):
    if "calibration" not in params:
        raise ConfigError("missing calibration section (A, C, P)")
    return Calibration.from_config(params["calibration"])


@register("schedule", "Precision schedule and the domination check on its sequence", uses_calibration=True)
def run_schedule(params, seed):
    calibration = _calibration(params)
    P = params.get("P", list(calibration.P))
    schedule = build_schedule(_param(params, "eps", 0.5), _param(params, "A", calibration.A), P,
                              _param(params, "C", calibration.C), _param(params, "D", 4.0),
                              _param(params, "n_D", 8, int))
    sequence = params.get("sequence", "eps")
    if sequence not in ("eps", "eta"):
        raise ConfigError(f"sequence must be 'eps' or 'eta', got {sequence!r}")
    u = schedule.eps_seq if sequence == "eps" else schedule.eta_seq

    rows = [_row(params, f"eta_{i + 1}", eta) for i, eta in enumerate(schedule.eta_seq)]
    report = {"schedule": schedule.to_dict(), "separation_margins": schedule.separation_margins()}
    result = ExperimentResult(rows=rows, report=report)
    if not schedule.separation_ok():
        result.violate("eta_i / eps_i falls below the cross-talk floor C exp(-pi D^2 / 4)")

    p = schedule_hypothesis_exponent(u)
    if not math.isfinite(p):
        result.violate("no exponent p satisfies the domination hypothesis on this sequence")
        return result
    p = p if p > 0 else 1.0
    q = p + _param(params, "q_margin", 1.0)
    try:
        n0 = schedule_domination_check(u, p, q)
    except ScheduleError as exc:
        result.violate(str(exc))
        return result
    report.update({"p": p, "q": q, "n0": n0})
    rows.append(_row(params, "n0", n0))
    return result


@register("globalize", "Transversalize a section along a window of the flat model", uses_calibration=True)
def run_globalize(params, seed):
    n = _param(params, "n", 1, int)
    k = _param(params, "k", 256, int)
    if "section" in params:
        s = CoherentSection.from_config(params["section"])
        if s.model.n != n or s.model.k != k:
            raise ConfigError(f"section is on (n={s.model.n}, k={s.model.k}), experiment on (n={n}, k={k})")
    else:
        s = CoherentSection(PrequantumModel(n=n, k=k, rank=_param(params, "rank", 1, int)))
    Y = SubmanifoldY.coordinate(n, _param(params, "dims", 1, int), _param(params, "half_width", 1.0))
    report = globalize(s, Y, _param(params, "eps", 0.5), _calibration(params), R=_param(params, "R", LOCAL_RADIUS),
                       budget=_param(params, "budget", 64, int), seed=seed)
    rows = [_row(params, "final_min", report.final_min, 0.0, report.n_probes),
            _row(params, "final_eta", report.final_eta), _row(params, "n_D", report.n_D)]
    return ExperimentResult(rows=rows, report=report.to_dict())


@register("calibrate", "Measure A and C and fit the local-step polynomial")
def run_calibrate(params, seed):
    eps_grid = _float_list(params, "eps_grid", [0.2, 0.1, 0.05])
    report = calibrate_constants(_param(params, "n", 1, int), _param(params, "dim_y", 1, int),
                                 _param(params, "k", 64, int), eps_grid,
                                 budget=_param(params, "budget", 64, int), seed=seed,
                                 n_sections=_param(params, "n_sections", 4, int))
    rows = [_row(params, "A", report["A"]), _row(params, "C", report["C"]),
            _row(params, "P_local_c0", report["P_local"][0]), _row(params, "P_local_c1", report["P_local"][1])]
    return ExperimentResult(rows=rows, report=report)


# ----------------------------------------------------------------------------
# consequences
# ----------------------------------------------------------------------------

@register("levi", "Module on a real hyperplane against its maximal complex subspace")
def run_levi(params, seed):
    k = _param(params, "k", 16, int)
    n_terms = _param(params, "n_terms", 5, int)
    half_width = _param(params, "half_width", 0.2)
    noise = _param(params, "antilinear_noise", 0.0)
    rng = np.random.default_rng(seed)
    model = PrequantumModel(n=2, k=k)
    s = CoherentSection(model, to_complex(rng.uniform(-0.3, 0.3, (n_terms, 4))),
                        rng.standard_normal((n_terms, 1)) + 1j * rng.standard_normal((n_terms, 1)))
    frame = np.linalg.qr(rng.standard_normal((4, 4)))[0][:, :3]
    Y = SubmanifoldY(frame, -half_width * np.ones(3), half_width * np.ones(3))
    probes = rng.uniform(-half_width, half_width, (_param(params, "n_probes", 50, int), 3))
    perturbation = random_antilinear(rng, 1, 2, noise) if noise > 0 else None
    report = levi_equality_check(s, Y, probes, perturbation)
    result = ExperimentResult(rows=[_row(params, "max_gap", report["max_gap"], 0.0, report["n_probes"]),
                                    _row(params, "max_sandwich_slack", report["max_sandwich_slack"], 0.0,
                                         report["n_probes"])],
                              report=report)
    if perturbation is not None and report["max_sandwich_slack"] > 1e-9:
        result.violate(f"sandwich bound fails by {report['max_sandwich_slack']:.3e}")
    return result


@register("equator", "Degrees of the two sections over the equator of the sphere")
def run_equator(params, seed):
    ks = params.get("k", 5)
    ks = [int(k) for k in ks] if isinstance(ks, (list, tuple)) else [int(ks)]
    samples = _param(params, "samples", 2048, int)
    degrees = []
    for k in ks:
        deg_E, deg_F, norm = equator_degree(k, samples)
        degrees.append({"k": k, "deg_E": deg_E, "deg_F": deg_F, "degree_gap": abs(deg_E - deg_F), "norm": norm})
    report = dict(degrees[0]) if len(degrees) == 1 else {"degrees": degrees}
    return ExperimentResult(rows=[_row(params, f"k={d['k']}", d["degree_gap"]) for d in degrees], report=report)


@register("barycenter", "Module along the segment from s0 to s0 + t0")
def run_barycenter(params, seed):
    k = _param(params, "k", 64, int)
    model = PrequantumModel(n=1, k=k)
    Y = SubmanifoldY.coordinate(1, 1, _param(params, "half_width", 0.125))
    s0 = CoherentSection.single(model)
    t0 = CoherentSection.single(model, center=[_param(params, "t0_center", 0.05)],
                                coeff=[_param(params, "t0_coeff", -0.09)])
    report = barycenter_module_bound(s0, t0, _param(params, "eta", 0.2), Y)
    rows = [_row(params, f"theta={theta:.1f}", m) for theta, m in zip(report["thetas"], report["minima"])]
    return ExperimentResult(rows=rows, report=report)


# ----------------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------------

def run_experiment(name, params, seed):
    """
    Run a registered experiment.

    Args:
        name: Registered experiment name
        params: Parameter table (JSON-compatible)
        seed: Integer seed; the only source of randomness

    Returns:
        ExperimentResult; verification failures come back as a violated contract

    Raises:
        ConfigError: Unknown experiment or missing seed
    """
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; registered: {', '.join(list_experiments())}")
    if seed is None:
        raise ConfigError(f"experiment {name!r} needs a seed")
    logging.debug(f"EXPERIMENTS. running {name} with seed={seed}, params={params}")
    try:
        with tlog(f"experiment.{name}"):
            return EXPERIMENTS[name].func(dict(params), int(seed))
    except CONTRACT_ERRORS as exc:
        report = {"violation": str(exc), "error": type(exc).__name__}
        probe = getattr(exc, "probe", None)
        if probe is not None:
            report["probe"] = np.asarray(probe).tolist()
        if getattr(exc, "stage", None) is not None:
            report["stage"] = exc.stage
        result = ExperimentResult(report=report)
        result.violate(f"{type(exc).__name__}: {exc}")
        return result
