"""
Seeded, chunked Monte Carlo plumbing shared by every estimator.

Work is cut into chunks of a fixed size; chunk i draws from the i-th child of
SeedSequence(seed). Chunks may run on any number of joblib workers and are
concatenated in chunk order, so the reduction (and therefore every estimate)
only depends on the seed.
"""
from dataclasses import dataclass, field, asdict

from common.imports import np, os, logging, math, Parallel, delayed, Optional
from constants import MC_CHUNK_SIZE, ENV_THREADS, DEFAULT_N_JOBS


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error."""
    mean: float
    stderr: float
    n_samples: int
    seed: Optional[int]
    discarded: int = 0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError(f"standard error must be nonnegative, got {self.stderr}")
        if self.n_samples < 1:
            raise ValueError(f"sample count must be >= 1, got {self.n_samples}")

    @property
    def discard_rate(self):
        return self.discarded / self.n_samples

    def within(self, target, n_sigma=3.0, floor=0.0):
        """True when |mean - target| <= n_sigma * stderr + floor."""
        return abs(self.mean - target) <= n_sigma * self.stderr + floor

    def to_dict(self):
        return asdict(self)


def resolve_n_jobs(n_jobs=None):
    """Worker count: explicit value, else the TRANSLAB_THREADS environment variable, else 1."""
    if n_jobs is not None:
        return int(n_jobs)
    raw = os.environ.get(ENV_THREADS)
    if raw is None:
        return DEFAULT_N_JOBS
    try:
        return max(1, int(raw))
    except ValueError:
        logging.warning(f"MONTE_CARLO. Ignoring non-integer {ENV_THREADS}={raw!r}")
        return DEFAULT_N_JOBS


def spawn_generators(seed, count):
    """Independent generators for `count` streams derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def uniform_ball(rng, count, dim):
    """Uniform points in the unit ball of R^dim.

    Uses the first `dim` coordinates of a uniform point on S^(dim+1), which
    keeps every sample a function of its own row of Gaussians.
    """
    g = rng.standard_normal((count, dim + 2))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[:, :dim]


def run_chunked(worker, n_samples, seed, chunk_size=None, n_jobs=None):
    """Run worker(count, rng) -> array over fixed chunks and concatenate in order."""
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if seed is None:
        raise ValueError("a seed is required for reproducible sampling")
    chunk_size = chunk_size or MC_CHUNK_SIZE
    n_chunks = math.ceil(n_samples / chunk_size)
    counts = [min(chunk_size, n_samples - i * chunk_size) for i in range(n_chunks)]
    generators = spawn_generators(seed, n_chunks)
    n_jobs = resolve_n_jobs(n_jobs)

    if n_jobs == 1 or n_chunks == 1:
        parts = [worker(count, gen) for count, gen in zip(counts, generators)]
    else:
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(worker)(count, gen) for count, gen in zip(counts, generators))
    return np.concatenate([np.asarray(p, dtype=float) for p in parts])


def estimate_from_samples(values, seed, extras=None):
    """MCEstimate from per-sample values; NaN entries count as discarded samples."""
    values = np.asarray(values, dtype=float)
    kept = values[np.isfinite(values)]
    discarded = int(values.size - kept.size)
    if kept.size == 0:
        raise RuntimeError(f"all {values.size} samples were discarded")
    stderr = float(np.std(kept, ddof=1) / math.sqrt(kept.size)) if kept.size > 1 else 0.0
    if discarded:
        logging.warning(f"MONTE_CARLO. {discarded}/{values.size} samples discarded")
    return MCEstimate(mean=float(np.mean(kept)), stderr=stderr, n_samples=int(values.size),
                      seed=seed, discarded=discarded, extras=dict(extras or {}))


def ratio_estimate(numerator, denominator):
    """Delta-method mean and standard error of numerator / denominator."""
    if denominator.mean == 0:
        raise ZeroDivisionError("denominator estimate is zero")
    ratio = numerator.mean / denominator.mean
    if numerator.mean == 0:
        return 0.0, numerator.stderr / abs(denominator.mean)
    relative = math.hypot(numerator.stderr / numerator.mean, denominator.stderr / denominator.mean)
    return ratio, abs(ratio) * relative
