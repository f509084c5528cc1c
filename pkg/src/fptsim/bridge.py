"""Pinned 3-dimensional Brownian-bridge skeletons and the Bessel-norm functional.

Both thinning mechanizations evaluate the same path functional
``R_t = ||(t/T) (L-x) e1 + beta_t||`` where ``beta`` is a 3-d Brownian bridge
pinned to zero at both ends of [0, T].  The time-ordered sampler advances a
:class:`SequentialBridgeState` forward; the height-ordered sampler refines a
:class:`BridgeSkeleton` by conditional bisection at arbitrary interior times.
Either refinement order realizes the same bridge law, which the test suite
checks empirically.

A skeleton lives for a single rejection iteration and is discarded when the
iteration restarts with a fresh proposal.
"""

import bisect
import math

from .errors import FptsimError

# two query times closer than this are treated as the same knot
_TIME_EPS = 1e-15


class SequentialBridgeState:
    """Forward-only bridge state: current time, current value, terminal pin at T."""

    __slots__ = ("horizon", "current_time", "bx", "by", "bz")

    def __init__(self, horizon):
        if not horizon > 0.0:
            raise FptsimError(f"bridge horizon must be positive, got {horizon}")
        self.horizon = horizon
        self.current_time = 0.0
        self.bx = 0.0
        self.by = 0.0
        self.bz = 0.0

    @property
    def current_value(self):
        return (self.bx, self.by, self.bz)


def sequential_advance(state, new_time, stream):
    """Advance the bridge to new_time conditionally on its state and the pin at T.

    Uses the forward conditional update
    ``beta <- ((T-t1)/(T-t0)) beta + sqrt((T-t1)(t1-t0)/(T-t0)) G``;
    mutates the state and returns the new 3-vector value.
    """
    t0 = state.current_time
    T = state.horizon
    if not t0 < new_time <= T:
        raise ValueError(
            f"bridge times must advance: current {t0}, requested {new_time}, horizon {T}")
    a = (T - new_time) / (T - t0)
    s = math.sqrt((T - new_time) * (new_time - t0) / (T - t0))
    g1, g2, g3 = stream.normal3()
    state.bx = a * state.bx + s * g1
    state.by = a * state.by + s * g2
    state.bz = a * state.bz + s * g3
    state.current_time = new_time
    return (state.bx, state.by, state.bz)


class BridgeSkeleton:
    """Lazily refined set of pinned bridge evaluations on [0, T].

    Knots are kept sorted and unique in time; the endpoints (0, 0) and (T, 0)
    are always present.  Inserting at an existing time returns the stored
    value without consuming randomness.
    """

    __slots__ = ("horizon", "drift_gap", "times", "values")

    def __init__(self, horizon, drift_gap):
        if not horizon > 0.0:
            raise FptsimError(f"bridge horizon must be positive, got {horizon}")
        if not drift_gap > 0.0:
            raise FptsimError(f"drift gap must be positive, got {drift_gap}")
        self.horizon = horizon
        self.drift_gap = drift_gap
        self.times = [0.0, horizon]
        self.values = [(0.0, 0.0, 0.0), (0.0, 0.0, 0.0)]

    def __len__(self):
        return len(self.times)

    def bessel_norm_at(self, t, value):
        return bessel_norm(self.drift_gap, self.horizon, t, value)

    def dump_rows(self):
        """Rows (t, bx, by, bz, R_t) for the debug CSV dump."""
        return [(t, v[0], v[1], v[2], self.bessel_norm_at(t, v))
                for t, v in zip(self.times, self.values)]


def bisect_insert(skel, u, stream):
    """Draw the bridge value at interior time u by conditional bisection.

    Locates the neighbouring knots, draws the value from the conditional
    (linear interpolation plus independent Gaussian of the bridged variance),
    inserts the new knot and returns the value.  A time matching an existing
    knot within 1e-15 returns the stored value unchanged.
    """
    T = skel.horizon
    if not 0.0 < u < T:
        raise ValueError(f"insertion time must lie strictly inside (0, {T}), got {u}")
    i = bisect.bisect_left(skel.times, u)
    for j in (i - 1, i):
        if 0 <= j < len(skel.times) and abs(skel.times[j] - u) <= _TIME_EPS:
            return skel.values[j]
    t0 = skel.times[i - 1]
    t1 = skel.times[i]
    v0 = skel.values[i - 1]
    v1 = skel.values[i]
    w = (u - t0) / (t1 - t0)
    s = math.sqrt((t1 - u) * (u - t0) / (t1 - t0))
    g1, g2, g3 = stream.normal3()
    value = (v0[0] + (v1[0] - v0[0]) * w + s * g1,
             v0[1] + (v1[1] - v0[1]) * w + s * g2,
             v0[2] + (v1[2] - v0[2]) * w + s * g3)
    skel.times.insert(i, u)
    skel.values.insert(i, value)
    return value


def bessel_norm(drift_gap, horizon, t, beta_t):
    """||(t/T) gap e1 + beta_t||, the Bessel-bridge functional the thinning tests use."""
    if not 0.0 <= t <= horizon:
        raise ValueError(f"time {t} outside [0, {horizon}]")
    rx = (t / horizon) * drift_gap + beta_t[0]
    return math.sqrt(rx * rx + beta_t[1] * beta_t[1] + beta_t[2] * beta_t[2])


def dump_skeleton_csv(skel, path):
    """Write the skeleton knots as CSV rows (t, bx, by, bz, R_t)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("t,beta_x,beta_y,beta_z,R_t\n")
        for row in skel.dump_rows():
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
