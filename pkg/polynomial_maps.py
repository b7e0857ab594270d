"""
Multivariate polynomials and the good-regular-value machinery.

MultiPoly is a sparse real polynomial with exact differentiation. PolyMap and
SampledMap share the `evaluate_batch(X) -> (values, jacobians)` interface so the
criticality and search routines accept either. All "infimum over the ball"
claims made here are minima over a declared grid.
"""
import itertools

from common.imports import np, special, spatial, logging, math, sys
from constants import (
    NEIGHBORHOOD_MAX_ITER, GRADIENT_FLOOR, ZERO_TOL, REFINEMENT_PASSES, GOOD_VALUE_BUDGET,
    RELATION_SINGULAR_RATIO, RELATION_RESIDUAL,
)
from exceptions import DimensionMismatchError, NoRelationError, NoFarPointError, NoGoodValueError
from transversality_core import LinearMapR, ms, ms_batch
from monte_carlo import run_chunked, estimate_from_samples, uniform_ball


class MultiPoly:
    """Sparse polynomial in `n_vars` real variables.

    Terms are stored as an exponent array (T x n) and a coefficient vector (T,);
    exponents are unique and coefficients nonzero.
    """

    def __init__(self, n_vars, terms=None):
        if n_vars < 0:
            raise ValueError(f"number of variables must be nonnegative, got {n_vars}")
        merged = {}
        for exps, coeff in (terms.items() if isinstance(terms, dict) else (terms or [])):
            exps = tuple(int(e) for e in exps)
            if len(exps) != n_vars:
                raise DimensionMismatchError(f"exponent {exps} does not have {n_vars} entries")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            merged[exps] = merged.get(exps, 0.0) + float(coeff)
        merged = {e: c for e, c in merged.items() if c != 0.0}

        self.n_vars = n_vars
        keys = sorted(merged)
        self.exps = np.array(keys, dtype=int).reshape(len(keys), n_vars)
        self.coeffs = np.array([merged[e] for e in keys], dtype=float)
        self.degree = int(self.exps.sum(axis=1).max()) if len(keys) else 0
        self._partials = {}
        self._taylor_plan = None

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------
    @classmethod
    def from_terms(cls, n_vars, terms):
        return cls(n_vars, list(terms))

    @classmethod
    def constant(cls, n_vars, value):
        return cls(n_vars, [((0,) * n_vars, value)])

    @classmethod
    def variable(cls, n_vars, index):
        exps = [0] * n_vars
        exps[index] = 1
        return cls(n_vars, [(tuple(exps), 1.0)])

    @classmethod
    def from_config(cls, n_vars, entries):
        """Build from a list of [exponents, coefficient] pairs."""
        return cls(n_vars, [(tuple(exps), coeff) for exps, coeff in entries])

    def to_config(self):
        return [[list(map(int, e)), float(c)] for e, c in zip(self.exps, self.coeffs)]

    @property
    def terms(self):
        return {tuple(map(int, e)): float(c) for e, c in zip(self.exps, self.coeffs)}

    @property
    def is_zero(self):
        return self.coeffs.size == 0

    def __repr__(self):
        return f"MultiPoly(n_vars={self.n_vars}, degree={self.degree}, terms={len(self.coeffs)})"

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            if other.n_vars != self.n_vars:
                raise DimensionMismatchError(f"variable counts differ: {self.n_vars} vs {other.n_vars}")
            return other
        return MultiPoly.constant(self.n_vars, float(other))

    def __add__(self, other):
        other = self._coerce(other)
        return MultiPoly(self.n_vars, list(self.terms.items()) + list(other.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.n_vars, [(e, -c) for e, c in self.terms.items()])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        products = [
            (tuple(a + b for a, b in zip(ea, eb)), ca * cb)
            for ea, ca in self.terms.items() for eb, cb in other.terms.items()
        ]
        return MultiPoly(self.n_vars, products)

    __rmul__ = __mul__

    def __pow__(self, power):
        if int(power) != power or power < 0:
            raise ValueError(f"only nonnegative integer powers are supported, got {power}")
        result = MultiPoly.constant(self.n_vars, 1.0)
        for _ in range(int(power)):
            result = result * self
        return result

    def dilate(self, factor):
        """The polynomial x -> h(x / factor), whose zero set is factor times that of h."""
        return MultiPoly(self.n_vars, [(e, c * factor ** (-sum(e))) for e, c in self.terms.items()])

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_vars:
            raise DimensionMismatchError(f"points have {X.shape[1]} coordinates, polynomial has {self.n_vars} variables")
        if self.is_zero:
            out = np.zeros(X.shape[0])
        else:
            monomials = np.prod(X[:, None, :] ** self.exps[None, :, :], axis=2)
            out = monomials @ self.coeffs
        return float(out[0]) if single else out

    def partial(self, index):
        if index not in self._partials:
            terms = []
            for e, c in self.terms.items():
                if e[index] > 0:
                    lowered = list(e)
                    lowered[index] -= 1
                    terms.append((tuple(lowered), c * e[index]))
            self._partials[index] = MultiPoly(self.n_vars, terms)
        return self._partials[index]

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = np.atleast_2d(X)
        grad = np.stack([np.atleast_1d(self.partial(i)(X2)) for i in range(self.n_vars)], axis=-1)
        return grad[0] if single else grad

    def lipschitz_bound(self, radius):
        """Upper bound of |∇h| on B(0, radius) from coefficient sums."""
        total_degree = self.exps.sum(axis=1)
        active = total_degree >= 1
        return float(np.sum(np.abs(self.coeffs[active]) * total_degree[active]
                            * radius ** (total_degree[active] - 1)))

    def restrict_to_lines(self, P, V):
        """Coefficients (ascending in t) of t -> h(p + t v) for a batch of lines.

        P and V have shape (B, n); returns shape (B, degree + 1).
        """
        P = np.atleast_2d(np.asarray(P, dtype=float))
        V = np.atleast_2d(np.asarray(V, dtype=float))
        batch = P.shape[0]
        out = np.zeros((batch, self.degree + 1))
        max_exp = self.exps.max(axis=0) if len(self.coeffs) else np.zeros(self.n_vars, dtype=int)
        powers = []
        for i in range(self.n_vars):
            factor = np.stack([P[:, i], V[:, i]], axis=1)
            table = [np.ones((batch, 1))]
            for _ in range(int(max_exp[i])):
                table.append(_batched_polymul(table[-1], factor))
            powers.append(table)
        for e, c in zip(self.exps, self.coeffs):
            poly = np.ones((batch, 1))
            for i, power in enumerate(e):
                if power:
                    poly = _batched_polymul(poly, powers[i][power])
            out[:, :poly.shape[1]] += c * poly
        return out

    def restrict_to_line(self, p, v):
        return self.restrict_to_lines(np.asarray(p)[None, :], np.asarray(v)[None, :])[0]

    def taylor_coefficients(self, X):
        """Coefficients a_β(x) of h(x + d) = Σ a_β(x) d^β at each row of X.

        Returns (betas, coefficients) with betas of shape (B, n) and
        coefficients of shape (m, B).
        """
        if self._taylor_plan is None:
            betas = {}
            rows, weights, remainders = [], [], []
            for e, c in zip(self.exps, self.coeffs):
                for beta in itertools.product(*(range(int(ei) + 1) for ei in e)):
                    column = betas.setdefault(beta, len(betas))
                    rows.append(column)
                    weights.append(c * np.prod(special.comb(e, beta, exact=False)))
                    remainders.append(np.asarray(e) - np.asarray(beta))
            beta_array = np.array(sorted(betas, key=betas.get), dtype=int).reshape(len(betas), self.n_vars)
            gather = np.zeros((len(rows), len(betas)))
            gather[np.arange(len(rows)), rows] = 1.0
            self._taylor_plan = (beta_array, np.array(weights), np.array(remainders, dtype=int), gather)
        beta_array, weights, remainders, gather = self._taylor_plan
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if len(weights) == 0:
            return beta_array, np.zeros((X.shape[0], 0))
        values = weights[None, :] * np.prod(X[:, None, :] ** remainders[None, :, :], axis=2)
        return beta_array, values @ gather

    def certified_zero_free_radius(self, X):
        """Radius ρ(x) such that h has no zero in the open ball B(x, ρ(x)).

        Bounds |h(x+d) - h(x)| by |∇h(x)||d| + Σ_{|β|≥2} |a_β(x)| |d|^{|β|}
        and solves for the radius where the bound reaches |h(x)|.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        betas, coeffs = self.taylor_coefficients(X)
        orders = betas.sum(axis=1)
        value = np.abs(coeffs[:, orders == 0].sum(axis=1)) if np.any(orders == 0) else np.zeros(X.shape[0])
        top = max(self.degree, 1)
        by_order = np.zeros((X.shape[0], top + 1))
        by_order[:, 1] = np.linalg.norm(coeffs[:, orders == 1], axis=1)
        for j in range(2, self.degree + 1):
            by_order[:, j] = np.abs(coeffs[:, orders == j]).sum(axis=1)

        radius = np.zeros(X.shape[0])
        active = value > 0.0
        growth = by_order[:, 1:]
        no_growth = active & ~np.any(growth > 0.0, axis=1)
        radius[no_growth] = np.inf
        solve = active & ~no_growth
        if np.any(solve):
            b = by_order[solve]
            target = value[solve]
            with np.errstate(divide="ignore"):
                candidates = np.where(b[:, 1:] > 0.0,
                                      (target[:, None] / np.where(b[:, 1:] > 0.0, b[:, 1:], 1.0))
                                      ** (1.0 / np.arange(1, top + 1))[None, :],
                                      np.inf)
            lo = np.zeros(target.shape)
            hi = candidates.min(axis=1)
            exponents = np.arange(top + 1)
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                bound = (b[:, 1:] * mid[:, None] ** exponents[None, 1:]).sum(axis=1)
                below = bound < target
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
            radius[solve] = lo
        return radius


def _batched_polymul(a, b):
    """Row-wise product of ascending coefficient arrays a (B, la), b (B, lb)."""
    la, lb = a.shape[1], b.shape[1]
    out = np.zeros((a.shape[0], la + lb - 1))
    for j in range(lb):
        out[:, j:j + la] += a * b[:, j:j + 1]
    return out


class PolyMap:
    """Polynomial map with components sharing variables (X-variables first, then T-parameters)."""

    def __init__(self, components, n_x=None):
        components = list(components)
        if not components:
            raise ValueError("a polynomial map needs at least one component")
        n_vars = components[0].n_vars
        if any(c.n_vars != n_vars for c in components):
            raise DimensionMismatchError("all components must share the variable count")
        if n_x is not None and not 0 <= n_x <= n_vars:
            raise ValueError(f"n_x={n_x} out of range for {n_vars} variables")
        self.components = components
        self.n_vars = n_vars
        self.n_x = n_vars if n_x is None else n_x

    @property
    def n_out(self):
        return len(self.components)

    @property
    def n_params(self):
        return self.n_vars - self.n_x

    @classmethod
    def from_config(cls, n_vars, components, n_x=None):
        return cls([MultiPoly.from_config(n_vars, c) for c in components], n_x=n_x)

    def to_config(self):
        return [c.to_config() for c in self.components]

    def _check(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_vars:
            raise DimensionMismatchError(f"points have {X.shape[1]} coordinates, map has {self.n_vars} variables")
        return X

    def evaluate_batch(self, X):
        X = self._check(X)
        values = np.stack([np.atleast_1d(c(X)) for c in self.components], axis=1)
        jacobians = np.stack([c.gradient(X) for c in self.components], axis=1)
        return values, jacobians

    def jacobian_x(self, X):
        return self.evaluate_batch(X)[1][..., :self.n_x]


class SampledMap:
    """Map given by an oracle point -> (value vector, Jacobian matrix).

    The oracle's Jacobian is checked against central differences at three
    probe points inside the domain ball on construction.
    """

    def __init__(self, oracle, n_in, radius, sup_bound, batch_oracle=None, probe_seed=0):
        if radius <= 0:
            raise ValueError(f"domain radius must be positive, got {radius}")
        self.oracle = oracle
        self.batch_oracle = batch_oracle
        self.n_in = n_in
        self.radius = float(radius)
        self.sup_bound = float(sup_bound)
        self._self_test(np.random.default_rng(probe_seed))

    def _self_test(self, rng):
        step = 1e-5 * max(1.0, self.radius)
        for x in 0.5 * self.radius * uniform_ball(rng, 3, self.n_in):
            value, jac = self.oracle(x)
            jac = np.atleast_2d(np.asarray(jac, dtype=float))
            self.n_out = np.atleast_1d(value).shape[0]
            fd = np.empty_like(jac)
            for i in range(self.n_in):
                e = np.zeros(self.n_in)
                e[i] = step
                fd[:, i] = (np.atleast_1d(self.oracle(x + e)[0]) - np.atleast_1d(self.oracle(x - e)[0])) / (2 * step)
            if np.max(np.abs(fd - jac)) > 1e-4 * (1.0 + np.max(np.abs(jac))):
                raise ValueError(f"oracle Jacobian disagrees with finite differences at {x}")

    def evaluate_batch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_in:
            raise DimensionMismatchError(f"points have {X.shape[1]} coordinates, map has {self.n_in} inputs")
        if self.batch_oracle is not None:
            values, jacobians = self.batch_oracle(X)
            return np.asarray(values, dtype=float), np.asarray(jacobians, dtype=float)
        pairs = [self.oracle(x) for x in X]
        values = np.array([np.atleast_1d(v) for v, _ in pairs], dtype=float)
        jacobians = np.array([np.atleast_2d(j) for _, j in pairs], dtype=float)
        return values, jacobians


def eval_jacobian(F, x):
    """Exact value and Jacobian of a polynomial map at one point."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != F.n_vars:
        raise DimensionMismatchError(f"point of shape {x.shape} for a map in {F.n_vars} variables")
    values, jacobians = F.evaluate_batch(x[None, :])
    return values[0], LinearMapR(jacobians[0])


def eps_critical_test(F, x, eps):
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    _, jacobian = eval_jacobian(F, x)
    return ms(jacobian) <= eps


def constrained_criticality(f, G, x, T, eps):
    """Gram determinants (D1, D2, g = D2 - eps^2 D1) for f restricted to {G = 0}."""
    point = np.concatenate([np.atleast_1d(np.asarray(x, dtype=float)), np.atleast_1d(np.asarray(T, dtype=float))])
    if point.shape[0] != G.n_vars or f.n_vars != G.n_vars:
        raise DimensionMismatchError("f, G and (x, T) must share the variable count")
    jac_g = G.jacobian_x(point)[0]
    if jac_g.shape[0] > G.n_x:
        raise ValueError(f"{jac_g.shape[0]} constraints exceed {G.n_x} variables")
    grad_f = f.gradient(point)[:G.n_x]
    stacked = np.vstack([grad_f[None, :], jac_g])
    d1 = float(np.linalg.det(jac_g @ jac_g.T))
    d2 = float(np.linalg.det(stacked @ stacked.T))
    return d1, d2, d2 - eps ** 2 * d1


def _monomial_exponents(n_vars, degree_bound):
    return [e for e in itertools.product(range(degree_bound + 1), repeat=n_vars) if sum(e) <= degree_bound]


def algebraic_relation(maps, degree_bound, rng, sample_factor=2):
    """Numerical polynomial relation h(f_0, ..., f_m) = 0 of total degree <= degree_bound.

    The relation is the smallest right singular vector of the (column-scaled)
    evaluation matrix of all monomials in the maps, validated on a fresh sample.
    """
    maps = list(maps)
    n_vars = maps[0].n_vars
    if len(maps) <= n_vars:
        raise ValueError(f"need more polynomials ({len(maps)}) than variables ({n_vars})")
    exponents = np.array(_monomial_exponents(len(maps), degree_bound), dtype=int)
    n_samples = max(sample_factor * len(exponents), len(exponents) + 10)

    def evaluation_matrix(count):
        X = rng.uniform(-1.0, 1.0, size=(count, n_vars))
        U = np.stack([np.atleast_1d(p(X)) for p in maps], axis=1)
        return np.prod(U[:, None, :] ** exponents[None, :, :], axis=2)

    E = evaluation_matrix(n_samples)
    scale = np.linalg.norm(E, axis=0)
    scale[scale == 0.0] = 1.0
    _, sigma, vt = np.linalg.svd(E / scale, full_matrices=False)
    logging.debug(f"POLYNOMIAL_MAPS. relation search: {len(exponents)} monomials, "
                  f"sigma_min/sigma_max={sigma[-1] / sigma[0]:.3e}")
    if len(sigma) < len(exponents):
        raise NoRelationError("too few samples for the monomial count")
    if sigma[-1] > RELATION_SINGULAR_RATIO * sigma[0]:
        raise NoRelationError()

    coeffs = vt[-1] / scale
    coeffs /= np.max(np.abs(coeffs))
    coeffs[np.abs(coeffs) < 1e-9] = 0.0

    residual = np.max(np.abs(evaluation_matrix(n_samples) @ coeffs))
    if residual > RELATION_RESIDUAL * np.linalg.norm(coeffs):
        raise NoRelationError(f"relation failed validation (residual {residual:.3e})")
    return MultiPoly(len(maps), [(tuple(e), c) for e, c in zip(exponents, coeffs)])


def _certified_distance(h, X, lipschitz, cap=np.inf):
    """Sound lower bound of dist(x, {h = 0}) combining the global and local certificates."""
    values = np.abs(np.atleast_1d(h(X)))
    global_bound = np.minimum(values / lipschitz, cap) if lipschitz > 0 else np.full(values.shape, cap)
    return np.maximum(global_bound, h.certified_zero_free_radius(X))


def _newton_near(h, X, eps, max_iter):
    """True where a zero of h within eps of x is found by gradient projection."""
    scale = max(1.0, float(np.sum(np.abs(h.coeffs))))
    Y = X.copy()
    near = np.zeros(X.shape[0], dtype=bool)
    active = np.ones(X.shape[0], dtype=bool)
    for _ in range(max_iter + 1):
        values = np.atleast_1d(h(Y[active]))
        hit = np.abs(values) <= ZERO_TOL * scale
        idx = np.flatnonzero(active)
        near[idx[hit]] = np.linalg.norm(Y[idx[hit]] - X[idx[hit]], axis=1) <= eps
        active[idx[hit]] = False
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        values = values[~hit]
        grads = h.gradient(Y[idx])
        norms2 = np.sum(grads ** 2, axis=1)
        stalled = norms2 < GRADIENT_FLOOR ** 2
        active[idx[stalled]] = False
        moving = idx[~stalled]
        Y[moving] -= (values[~stalled] / norms2[~stalled])[:, None] * grads[~stalled]
    return near


def neighborhood_volume_fraction(h, eps, n_samples, seed, n_jobs=None, chunk_size=None):
    """Monte Carlo fraction of the unit ball within distance eps of {h = 0}.

    Each sample is "near" when gradient projection reaches a zero within eps,
    "far" when a distance certificate exceeds eps, otherwise undecided. The
    estimate counts near points over all samples; undecided points are reported
    in extras["undecided"].
    """
    if h.is_zero:
        raise ValueError("h must be a nonzero polynomial")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    lipschitz = h.lipschitz_bound(2.0)

    def worker(count, rng):
        X = uniform_ball(rng, count, h.n_vars)
        near = _newton_near(h, X, eps, NEIGHBORHOOD_MAX_ITER)
        far = ~near & (_certified_distance(h, X, lipschitz) > eps)
        codes = np.full(count, -1.0)
        codes[near] = 1.0
        codes[far] = 0.0
        return codes

    codes = run_chunked(worker, n_samples, seed, chunk_size=chunk_size, n_jobs=n_jobs)
    undecided = int(np.sum(codes < 0))
    if undecided:
        logging.warning(f"POLYNOMIAL_MAPS. {undecided}/{n_samples} points undecided at eps={eps}")
    return estimate_from_samples((codes == 1.0).astype(float), seed,
                                 extras={"undecided": undecided, "eps": eps})


def far_point(h, eps, budget, rng, retries=3):
    """A point of norm <= eps with a positive certified distance to {h = 0}."""
    if h.is_zero:
        raise ValueError("h must be a nonzero polynomial")
    lipschitz = h.lipschitz_bound(2.0 * eps)
    for attempt in range(retries):
        X = eps * uniform_ball(rng, budget, h.n_vars)
        certified = _certified_distance(h, X, lipschitz, cap=eps)
        best = int(np.argmax(certified))
        if certified[best] > 0.0:
            return X[best], float(certified[best])
        logging.debug(f"POLYNOMIAL_MAPS. far_point attempt {attempt + 1}: all candidates on the zero set")
    raise NoFarPointError(f"no candidate off the zero set after {retries} x {budget} samples")


def _grid_moduli(f, domain_grid, subspace):
    values, jacobians = f.evaluate_batch(domain_grid)
    if subspace is not None:
        jacobians = jacobians @ subspace.frame
    return values, ms_batch(jacobians)


def good_regular_value(f, eps, domain_grid, weights, budget=GOOD_VALUE_BUDGET, rng=None,
                       subspace=None, passes=REFINEMENT_PASSES):
    """Search y with |y| <= eps maximizing min over the grid of max(a|f - y|, b MS(Df|_A)).

    Candidates are uniform in the eps-ball; every candidate is refined
    coordinate-wise with a halving step, then the best is kept (lowest index on
    ties), so the result is nondecreasing in the budget.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    rng = rng if rng is not None else np.random.default_rng(0)
    grid = np.atleast_2d(np.asarray(domain_grid, dtype=float))
    values, moduli = _grid_moduli(f, grid, subspace)
    weighted_ms = weights.b * moduli

    def objective(Y):
        distances = spatial.distance.cdist(Y, values)
        return np.min(np.maximum(weights.a * distances, weighted_ms[None, :]), axis=1)

    n_out = values.shape[1]
    Y = eps * uniform_ball(rng, budget, n_out)
    scores = objective(Y)
    step = eps / 4.0
    for _ in range(passes):
        for j in range(n_out):
            for sign in (1.0, -1.0):
                trial = Y.copy()
                trial[:, j] += sign * step
                inside = np.linalg.norm(trial, axis=1) <= eps
                trial_scores = np.where(inside, objective(trial), -np.inf)
                better = trial_scores > scores
                Y[better] = trial[better]
                scores[better] = trial_scores[better]
        step /= 2.0

    best = int(np.argmax(scores))
    if scores[best] <= 0.0:
        raise NoGoodValueError()
    logging.debug(f"POLYNOMIAL_MAPS. good value |y|={np.linalg.norm(Y[best]):.3e}, module={scores[best]:.3e}")
    return Y[best], float(scores[best])


def taylor_order(eps, C, D_rate):
    """Smallest integer n >= (2 / D_rate) log(1/eps)."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if C <= 0 or D_rate <= 0:
        raise ValueError("C and D_rate must be positive")
    exact = (2.0 / D_rate) * -math.log(eps)
    nearest = round(exact)
    # an order that is an integer up to rounding in the logarithm is not bumped
    if math.isclose(exact, nearest, rel_tol=4 * sys.float_info.epsilon):
        return max(0, nearest)
    return max(0, math.ceil(exact))


def critical_image_radius(f, eps, domain_grid, anchor=None):
    """Spread of the images of eps-critical grid points around an anchor value.

    Returns a dict with the critical point count, the largest distance from
    the anchor (default: the origin) and that distance divided by eps.
    """
    grid = np.atleast_2d(np.asarray(domain_grid, dtype=float))
    values, moduli = _grid_moduli(f, grid, None)
    critical = moduli <= eps
    anchor = np.zeros(values.shape[1]) if anchor is None else np.asarray(anchor, dtype=float)
    radius = float(np.max(np.linalg.norm(values[critical] - anchor, axis=1))) if np.any(critical) else 0.0
    return {"critical_points": int(critical.sum()), "radius": radius, "radius_over_eps": radius / eps}
