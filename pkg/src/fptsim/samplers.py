"""Exact rejection samplers for the first-passage time of a unit diffusion.

Each sampler proposes a candidate time T from a Brownian-type law and accepts
it when a Poisson point process on [0, T] x [0, kappa] puts no point below
the intensity field gamma(L - R_t) evaluated along a pinned bridge functional.
Acceptance happens with probability exp(-int_0^T gamma(L - R_t) dt), which is
exactly the Girsanov weight tying the diffusion's hitting time to the
Brownian one, so accepted proposals carry the target law without any
discretization error.

Two mechanizations of the same point process are provided: time-ordered
scanning (``a1``) and height-ordered scanning with a lazily refined bridge
skeleton (``a2``).  On top of those sit the variance reducers and extensions:

* ``a1-shift`` / ``a2-shift``: subtract a positive floor gamma0 from the
  field and compensate with an inverse-Gaussian proposal;
* space splitting: chain k independent sub-level passages;
* ``a3``: conditional sampling of tau given tau <= t0, lifting a field that
  may dip below zero;
* rho-truncation: run any variant against a drift frozen below -rho.

Cost accounting follows the elementary random variates: ``N_i`` counts the
scalar draws consumed by iteration i's thinning scan (a 3-d Gaussian counts
as three, each exponential and uniform as one), the proposals are counted
once each through the iteration count, and the headline cost figure is
``N_sigma = I + sum_i N_i``.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

from .bridge import BridgeSkeleton, bisect_insert
from .drift import DriftModel, BoundCertificate, gamma_fn, truncate_drift
from .errors import BudgetError, ConfigError, ModelError
from .rng import (_brownian_fpt_value, _inverse_gaussian_value,
                  _truncated_brownian_fpt_value)

VARIANTS = ("a1", "a2", "a1-shift", "a2-shift", "a3")

# tolerated floating noise before a field value counts as a certificate breach
_FIELD_NEG_TOL = 1e-12
_FIELD_POS_TOL = 1e-9


@dataclass(frozen=True)
class RunStats:
    """Cost counters of one accepted draw: I, (N_1..N_I), N_sigma = I + sum N_i.

    N_i is the number of elementary random variates iteration i's thinning
    scan consumed; the I term accounts for the proposals, one per iteration.
    """

    iterations: int
    points_per_iteration: tuple
    total_points: int = 0

    def __post_init__(self):
        if self.iterations < 1 or len(self.points_per_iteration) != self.iterations:
            raise ValueError("iteration count and per-iteration point list disagree")
        object.__setattr__(self, "total_points",
                           self.iterations + sum(self.points_per_iteration))


@dataclass(frozen=True)
class FptDraw:
    value: float
    stats: RunStats

    def __post_init__(self):
        if not self.value > 0.0:
            raise ValueError(f"sampled time must be positive, got {self.value}")


@dataclass(frozen=True)
class SamplerConfig:
    """Everything one draw needs: problem geometry, model, bounds, variant knobs."""

    x: float
    L: float
    model: DriftModel
    cert: BoundCertificate
    variant: str = "a1"
    split_k: int = 1
    t0: Optional[float] = None
    rho: Optional[float] = None
    max_iterations: int = 10**8

    @property
    def gap(self):
        return self.L - self.x


def validate_config(config):
    if not config.L > config.x:
        raise ConfigError(f"level L={config.L} must exceed the start x={config.x}")
    if config.variant not in VARIANTS:
        raise ConfigError(f"unknown variant {config.variant!r}; choose from {VARIANTS}")
    if config.split_k < 1:
        raise ConfigError(f"split_k must be >= 1, got {config.split_k}")
    if config.max_iterations < 1:
        raise ConfigError("max_iterations must be >= 1")
    shifted = config.variant.endswith("-shift")
    if shifted and not config.cert.gamma0 > 0.0:
        raise ConfigError("shift variants need a certificate with gamma0 > 0")
    if config.variant == "a3":
        if config.t0 is None or not config.t0 > 0.0:
            raise ConfigError("variant a3 needs a horizon t0 > 0")
        if not math.isfinite(config.cert.m):
            raise ConfigError("variant a3 needs a finite negativity bound m")
        if config.split_k != 1:
            raise ConfigError("space splitting does not apply to the conditional sampler")
        if config.rho is not None:
            raise ConfigError("rho truncation does not combine with the conditional sampler")
    else:
        if config.t0 is not None:
            raise ConfigError("t0 only applies to variant a3")
        if config.cert.m != 0.0:
            raise ConfigError("negative gamma (m > 0) is only allowed with variant a3")
    if config.rho is not None and not config.rho > 0.0:
        raise ConfigError(f"rho must be positive, got {config.rho}")


# ---------------------------------------------------------------------------
# thinning engines
# ---------------------------------------------------------------------------


def _field_breach(value, ceiling):
    raise ModelError(
        f"thinning field {value:.6g} escapes [0, {ceiling:.6g}]; "
        "the bound certificate does not hold along the sampled path")


def _thin_time_ordered(stream, T, gap, level, gamma, ceiling, shift, lift):
    """Scan Poisson points by increasing time; returns (accepted, variates_consumed).

    Each tested point costs five scalars (the 3-d bridge Gaussian, the next
    exponential time increment, the uniform height); the initial exponential
    costs one more.  A zero ceiling means an empty thinning domain: accept
    outright without consuming randomness.
    """
    if ceiling <= 0.0:
        return True, 0
    mean = 1.0 / ceiling
    t_prev = 0.0
    bx = by = bz = 0.0
    t = stream.exponential(mean)
    n = 1
    while t <= T:
        n += 5
        g1, g2, g3 = stream.normal3()
        v = stream.uniform()
        a = (T - t) / (T - t_prev)
        s = math.sqrt((T - t) * (t - t_prev) / (T - t_prev))
        bx = a * bx + s * g1
        by = a * by + s * g2
        bz = a * bz + s * g3
        rx = t * gap / T + bx
        r = math.sqrt(rx * rx + by * by + bz * bz)
        f = gamma(level - r) - shift + lift
        if f < -_FIELD_NEG_TOL or f > ceiling + _FIELD_POS_TOL:
            _field_breach(f, ceiling)
        if ceiling * v <= f:
            return False, n
        t_prev = t
        t += stream.exponential(mean)
    return True, n


def _thin_height_ordered(stream, T, gap, level, gamma, ceiling, shift, lift):
    """Scan Poisson points by increasing height, refining a bridge skeleton.

    Structured like the time-ordered scan: the first exponential height is
    drawn up front (one scalar), then each tested point costs a five-scalar
    bundle (uniform position, 3-d bridge Gaussian, next height increment).
    """
    if ceiling <= 0.0:
        return True, 0
    skel = BridgeSkeleton(T, gap)
    mean = 1.0 / T
    height = stream.exponential(mean)
    n = 1
    while height <= ceiling:
        n += 5
        u = stream.uniform(T)
        value = bisect_insert(skel, u, stream) if u > 0.0 else skel.values[0]
        e_next = stream.exponential(mean)
        rx = u * gap / T + value[0]
        r = math.sqrt(rx * rx + value[1] * value[1] + value[2] * value[2])
        f = gamma(level - r) - shift + lift
        if f < -_FIELD_NEG_TOL or f > ceiling + _FIELD_POS_TOL:
            _field_breach(f, ceiling)
        if height <= f:
            return False, n
        height += e_next
    return True, n


# ---------------------------------------------------------------------------
# rejection loops
# ---------------------------------------------------------------------------


def _rejection_loop(config, stream, propose, thin):
    points = []
    for i in range(1, config.max_iterations + 1):
        T = propose(stream)
        accepted, n = thin(stream, T)
        points.append(n)
        if accepted:
            return FptDraw(T, RunStats(i, tuple(points)))
    raise BudgetError(
        f"no acceptance within {config.max_iterations} iterations",
        stats=RunStats(config.max_iterations, tuple(points)))


def sample_a1(config, stream):
    """Time-ordered exact sampler; needs 0 <= gamma <= kappa on (-inf, L]."""
    validate_config(config)
    if config.variant != "a1":
        raise ConfigError(f"sample_a1 called with variant {config.variant!r}")
    return _run_plain(config, stream, _thin_time_ordered)


def sample_a2(config, stream):
    """Height-ordered exact sampler; same contract and output law as sample_a1."""
    validate_config(config)
    if config.variant != "a2":
        raise ConfigError(f"sample_a2 called with variant {config.variant!r}")
    return _run_plain(config, stream, _thin_height_ordered)


def _run_plain(config, stream, engine):
    gap = config.gap
    level = config.L
    gamma = gamma_fn(config.model)
    kappa = config.cert.kappa

    def thin(stream, T):
        return engine(stream, T, gap, level, gamma, kappa, 0.0, 0.0)

    return _rejection_loop(config, stream,
                           lambda s: _brownian_fpt_value(s, gap), thin)


def sample_shift(config, stream):
    """Shifted sampler: thins gamma - gamma0 under an inverse-Gaussian proposal.

    Needs gamma0 <= gamma <= kappa with gamma0 > 0; the output law is still
    exactly the hitting-time law, but the expected iteration count drops by
    the factor exp(-(L-x) sqrt(2 gamma0)).
    """
    validate_config(config)
    if not config.variant.endswith("-shift"):
        raise ConfigError(f"sample_shift called with variant {config.variant!r}")
    engine = _thin_time_ordered if config.variant == "a1-shift" else _thin_height_ordered
    gap = config.gap
    level = config.L
    gamma = gamma_fn(config.model)
    gamma0 = config.cert.gamma0
    ceiling = config.cert.kappa - gamma0
    mu = gap / math.sqrt(2.0 * gamma0)
    lam = gap * gap

    def thin(stream, T):
        return engine(stream, T, gap, level, gamma, ceiling, gamma0, 0.0)

    return _rejection_loop(config, stream,
                           lambda s: _inverse_gaussian_value(s, mu, lam), thin)


def sample_a3(config, stream):
    """Conditional sampler: accepted T is distributed as tau_L given tau_L <= t0.

    Tolerates gamma >= -m by lifting the field with m*t0/T, which is
    non-negative for every admissible proposal T <= t0.
    """
    validate_config(config)
    if config.variant != "a3":
        raise ConfigError(f"sample_a3 called with variant {config.variant!r}")
    gap = config.gap
    level = config.L
    gamma = gamma_fn(config.model)
    kappa = config.cert.kappa
    m = config.cert.m
    t0 = config.t0

    def thin(stream, T):
        lift = m * t0 / T
        return _thin_time_ordered(stream, T, gap, level, gamma,
                                  kappa + lift, 0.0, lift)

    draw = _rejection_loop(config, stream,
                           lambda s: _truncated_brownian_fpt_value(s, gap, t0), thin)
    if draw.value > t0:
        raise ModelError("conditional draw escaped its support (0, t0]")
    return draw


def optimal_split_count(gap, kappa):
    """Slice count floor(gap*sqrt(2*kappa)) + 1 that tames the iteration growth."""
    if not (gap > 0.0 and kappa > 0.0):
        raise ConfigError("optimal_split_count needs gap > 0 and kappa > 0")
    return int(math.floor(gap * math.sqrt(2.0 * kappa))) + 1


def sample_split(config, stream):
    """Sum of split_k independent sub-level passages x -> x+gap/k -> ... -> L.

    Slice i consumes the dedicated substream (stream, i); stats aggregate
    uniformly across slices (iterations add up, point lists concatenate).
    With split_k == 1 this is the base sampler on the caller's stream.
    """
    validate_config(config)
    k = config.split_k
    base = replace(config, split_k=1)
    if k == 1:
        return _sample_validated(base, stream)
    total = 0.0
    iterations = 0
    points = []
    gap = config.gap
    for i in range(1, k + 1):
        lo = config.x + (i - 1) * gap / k
        hi = config.x + i * gap / k if i < k else config.L
        slice_config = replace(base, x=lo, L=hi)
        draw = _sample_validated(slice_config, stream.substream(i))
        total += draw.value
        iterations += draw.stats.iterations
        points.extend(draw.stats.points_per_iteration)
    return FptDraw(total, RunStats(iterations, tuple(points)))


def sample_rho(config, stream):
    """Run the configured variant against the drift frozen below -rho.

    The output approximates tau_L; its Kolmogorov distance from the true law
    is bounded by 2 (p(L)-p(x)) / (p(L)-p(-rho)) (see the stats harness).
    The certificate must hold for the truncated model.
    """
    validate_config(config)
    if config.rho is None:
        raise ConfigError("sample_rho needs a truncation depth rho")
    return _sample_validated(config, stream)


_PLAIN = {
    "a1": sample_a1,
    "a2": sample_a2,
    "a1-shift": sample_shift,
    "a2-shift": sample_shift,
    "a3": sample_a3,
}


def _sample_validated(config, stream):
    if config.rho is not None:
        inner = replace(config, model=truncate_drift(config.model, config.rho), rho=None)
        return _sample_validated(inner, stream)
    if config.split_k > 1:
        return sample_split(config, stream)
    return _PLAIN[config.variant](config, stream)


def sample(config, stream):
    """Draw one first-passage time according to the configured variant."""
    validate_config(config)
    return _sample_validated(config, stream)


def sample_batch(config, n, stream, start=0):
    """n independent draws; draw i consumes substream (stream, start + i).

    The offset lets workers produce disjoint blocks of one deterministic
    sequence: the draws depend only on (stream address, index), never on the
    partitioning.
    """
    validate_config(config)
    if config.rho is not None:
        config = replace(config, model=truncate_drift(config.model, config.rho), rho=None)
    return [_sample_validated(config, stream.substream(start + i)) for i in range(n)]


def poisson_time_points(stream, horizon, kappa):
    """Arrival times of a rate-kappa Poisson stream on [0, horizon], time order.

    This is the time-marginal of the rectangle point process both thinning
    engines consume; the increment overshooting the horizon is drawn (its
    count is the caller's business) but not returned.
    """
    if not kappa > 0.0:
        raise ConfigError("poisson_time_points needs kappa > 0")
    mean = 1.0 / kappa
    times = []
    t = stream.exponential(mean)
    while t <= horizon:
        times.append(t)
        t += stream.exponential(mean)
    return times
