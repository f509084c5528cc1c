"""Reproducible randomness and the distribution-specific draws the samplers consume.

All randomness flows through :class:`RandomStream`, a thin wrapper around a
counter-based Philox bit generator.  A stream is addressed by a ``(seed,
stream_id)`` pair (plus an optional substream path): equal addresses replay
bitwise-identical draw sequences, distinct addresses give statistically
independent sequences.  Replicas, split slices and helper processes therefore
never share mutable generator state; they derive their own substreams.

Scalar draws are served from internal buffers refilled in blocks, which keeps
the per-draw cost low enough for the samplers' inner loops while preserving
determinism (the refill pattern depends only on the call sequence).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import FptsimError, NumericError

_MASK64 = (1 << 64) - 1
_BUFLEN = 1024

# attempts cap for the truncated-proposal rejection loop; unreachable in practice
_TRUNC_ATTEMPT_CAP = 10**6


def _splitmix64(x):
    """One SplitMix64 step; used to derive well-mixed Philox keys."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _derive_key(seed, stream_id, path):
    """Mix (seed, stream_id, *path) into a 2-word Philox key."""
    s = _splitmix64(seed & _MASK64)
    for w in (stream_id, *path):
        s = _splitmix64(s ^ ((w & _MASK64) * 0xD1B54A32D192ED03 & _MASK64))
    return [_splitmix64(s), _splitmix64(s ^ 0xA5A5A5A5A5A5A5A5)]


@dataclass
class ProposalDraw:
    """A candidate first-passage time and the law it was drawn from.

    ``params`` records the gap L - x plus the variant-specific parameter
    (gamma0 for the inverse-Gaussian proposal, t0 for the truncated one).
    """

    value: float
    law_tag: str
    params: tuple

    def __post_init__(self):
        if not self.value > 0.0:
            raise FptsimError(f"proposal draw must be positive, got {self.value}")


class RandomStream:
    """Single-owner stream of reproducible random scalars.

    Never share an instance across concurrent workers; allocate one
    substream per worker/replicate instead via :meth:`substream`.
    """

    __slots__ = ("seed", "stream_id", "_path", "_gen",
                 "_nbuf", "_ni", "_ebuf", "_ei", "_ubuf", "_ui")

    def __init__(self, seed, stream_id=0, _path=()):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._path = tuple(int(p) for p in _path)
        key = _derive_key(self.seed, self.stream_id, self._path)
        self._gen = np.random.Generator(np.random.Philox(key=key))
        self._nbuf = []
        self._ni = 0
        self._ebuf = []
        self._ei = 0
        self._ubuf = []
        self._ui = 0

    def substream(self, *path):
        """Derive an independent stream addressed by (seed, stream_id, *path)."""
        return RandomStream(self.seed, self.stream_id, self._path + path)

    # -- raw scalar draws ----------------------------------------------------

    def normal(self):
        """One standard Gaussian."""
        i = self._ni
        if i >= len(self._nbuf):
            self._nbuf = self._gen.standard_normal(_BUFLEN).tolist()
            i = 0
        self._ni = i + 1
        return self._nbuf[i]

    def normal3(self):
        """Three independent standard Gaussians."""
        return self.normal(), self.normal(), self.normal()

    def exponential(self, mean):
        """Exponential with the given MEAN (i.e. rate 1/mean)."""
        if not mean > 0.0:
            raise FptsimError(f"exponential mean must be positive, got {mean}")
        i = self._ei
        if i >= len(self._ebuf):
            self._ebuf = self._gen.standard_exponential(_BUFLEN).tolist()
            i = 0
        self._ei = i + 1
        return mean * self._ebuf[i]

    def uniform(self, hi=1.0):
        """Uniform on [0, hi)."""
        if not hi > 0.0:
            raise FptsimError(f"uniform bound must be positive, got {hi}")
        i = self._ui
        if i >= len(self._ubuf):
            self._ubuf = self._gen.random(_BUFLEN).tolist()
            i = 0
        self._ui = i + 1
        return hi * self._ubuf[i]

    # -- vectorized draws (used by the Euler-Maruyama oracle) -----------------

    def normals(self, n):
        return self._gen.standard_normal(n)

    def uniforms(self, n):
        return self._gen.random(n)


# -- proposal laws ------------------------------------------------------------


def _brownian_fpt_value(stream, gap):
    """gap^2 / G^2 with G standard Gaussian; redraws on the fp-zero event."""
    g2 = stream.normal() ** 2
    while g2 == 0.0:
        g2 = stream.normal() ** 2
    return (gap * gap) / g2


def draw_brownian_fpt(stream, gap):
    """First-passage time of standard Brownian motion through a level gap > 0 away."""
    if not gap > 0.0:
        raise FptsimError(f"gap must be positive, got {gap}")
    return ProposalDraw(_brownian_fpt_value(stream, gap), "brownian-fpt", (gap,))


def _inverse_gaussian_value(stream, mu, lam):
    # Michael-Schucany-Haas many-to-one transform: keep the smaller root with
    # probability mu/(mu+X), else return the conjugate root mu^2/X.
    n = stream.normal()
    n2 = n * n
    x = mu + (mu * mu * n2) / (2.0 * lam) \
        - (mu / (2.0 * lam)) * math.sqrt(4.0 * mu * lam * n2 + mu * mu * n2 * n2)
    u = stream.uniform()
    if u <= mu / (mu + x):
        return x
    return (mu * mu) / x


def draw_inverse_gaussian(stream, mu, lam):
    """Inverse-Gaussian IG(mu, lam) variate via the Michael-Schucany-Haas generator."""
    if not (mu > 0.0 and lam > 0.0):
        raise FptsimError(f"IG parameters must be positive, got mu={mu}, lambda={lam}")
    return ProposalDraw(_inverse_gaussian_value(stream, mu, lam), "inverse-gaussian", (mu, lam))


def _truncated_brownian_fpt_value(stream, gap, t0):
    """gap^2/G^2 conditioned on being <= t0, i.e. G^2 conditioned on G^2 >= a."""
    a = (gap * gap) / t0
    if a <= 1.0:
        # conditioning is mild: plain redraw of G^2 has acceptance >= P(chi2_1 >= 1)
        for _ in range(_TRUNC_ATTEMPT_CAP):
            g = stream.normal()
            z = g * g
            if z >= a and z > 0.0:
                return (gap * gap) / z
    else:
        # shifted-exponential envelope on [a, inf): the chi2_1 tail decays like
        # exp(-z/2), so rate 1/2 shifted to a dominates with ratio sqrt(a/z)
        for _ in range(_TRUNC_ATTEMPT_CAP):
            z = a + stream.exponential(2.0)
            if stream.uniform() <= math.sqrt(a / z):
                return (gap * gap) / z
    raise NumericError("truncated-proposal rejection loop exceeded its attempts cap")


def draw_truncated_brownian_fpt(stream, gap, t0):
    """Brownian first-passage time conditioned on occurring before t0."""
    if not (gap > 0.0 and t0 > 0.0):
        raise FptsimError(f"gap and t0 must be positive, got gap={gap}, t0={t0}")
    value = _truncated_brownian_fpt_value(stream, gap, t0)
    # the squared-Gaussian rejection is exact; the bound can only be grazed by rounding
    value = min(value, t0)
    return ProposalDraw(value, "truncated-brownian-fpt", (gap, t0))
