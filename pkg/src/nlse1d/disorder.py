"""Space-time perturbation of the nonlinearity coefficient.

The perturbed coefficient is g(x, t) = background * (1 + sigma(x, t)) where
sigma is one of three flavours:

- chaotic: one logistic-map iterate per affected node, mapped to [-eps, +eps]
  via sigma = eps * (2 c - 1); the chain state is carried across refreshes so
  the whole run consumes a single orbit.
- random: i.i.d. uniform draws on [-eps, +eps] from a seeded PCG64 stream.
- quasiperiodic: the static profile alpha * (cos(5 x)/2 + cos(sqrt(5) x)/2).

Chaotic and random profiles are frozen in time for a refresh interval tau and
replaced by freshly generated ones on a fixed schedule; the quasiperiodic
profile never changes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolationError
from .field import Grid1D

KINDS = ("none", "chaotic", "random", "quasiperiodic")

# Fallback restart iterate for a collapsed logistic chain when no reseed value
# was supplied (1/golden ratio: irrational, safely inside (0, 1)).
_FALLBACK_ITERATE = 0.6180339887498949


@dataclass(frozen=True)
class PerturbationSpec:
    """Parameters of the sigma generator.

    seed is either a non-negative integer (used to seed the generator streams)
    or, for the chaotic kind, a float in (0, 1) used directly as the initial
    logistic iterate. alpha is the quasiperiodic amplitude and defaults to
    epsilon so "matched strength" comparisons need a single knob. region
    restricts the perturbed nodes to [x_lo, x_hi]; None means the full grid.
    """

    kind: str = "none"
    epsilon: float = 0.1
    tau: float = 2.0
    logistic_mu: float = 4.0
    seed: int | float = 0
    alpha: float | None = None
    region: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(
                f"unknown perturbation kind {self.kind!r}; expected one of {KINDS}"
            )
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ConfigurationError(f"perturbation epsilon must be >= 0, got {self.epsilon}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ConfigurationError(f"refresh interval tau must be > 0, got {self.tau}")
        if self.kind == "chaotic" and not 0 < self.logistic_mu <= 4:
            raise ConfigurationError(f"logistic mu must be in (0, 4], got {self.logistic_mu}")
        if self.alpha is not None and not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ConfigurationError(f"quasiperiodic alpha must be >= 0, got {self.alpha}")
        if isinstance(self.seed, float) and not float(self.seed).is_integer():
            if not 0 < self.seed < 1:
                raise ConfigurationError(
                    f"a fractional seed is treated as the initial logistic iterate "
                    f"and must lie in (0, 1), got {self.seed}"
                )
            if self.kind == "random":
                raise ConfigurationError("the random kind needs an integer seed")
        else:
            if int(self.seed) < 0:
                raise ConfigurationError(f"integer seed must be >= 0, got {self.seed}")
            object.__setattr__(self, "seed", int(self.seed))
        if self.region is not None:
            lo, hi = self.region
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigurationError(f"region must be a finite (x_lo, x_hi) pair, got {self.region}")
            object.__setattr__(self, "region", (float(lo), float(hi)))

    @property
    def quasiperiodic_alpha(self) -> float:
        return self.epsilon if self.alpha is None else self.alpha


def logistic_next(c: float, mu: float) -> float:
    """One logistic-map iterate mu * c * (1 - c); maps [0, 1] into itself."""
    if not 0.0 <= c <= 1.0:
        raise ContractViolationError(f"logistic iterate must be in [0, 1], got {c}")
    if not 0.0 < mu <= 4.0:
        raise ContractViolationError(f"logistic mu must be in (0, 4], got {mu}")
    return mu * c * (1.0 - c)


def _uniform_open(rng: np.random.Generator) -> float:
    c = rng.random()
    while not 0.0 < c < 1.0:
        c = rng.random()
    return c


def _seed_key(seed) -> int:
    if isinstance(seed, float) and not float(seed).is_integer():
        return int(np.float64(seed).view(np.uint64))
    return int(seed)


def initial_iterate(seed) -> float:
    """Starting point of the logistic chain: a fractional seed is used directly,
    an integer seed deterministically derives one in (0, 1)."""
    if isinstance(seed, float) and not float(seed).is_integer():
        if not 0 < seed < 1:
            raise ConfigurationError(f"initial iterate must be in (0, 1), got {seed}")
        return float(seed)
    return _uniform_open(np.random.default_rng(int(seed)))


def reseed_iterate(seed, segment_index: int) -> float:
    """Deterministic restart iterate for a collapsed chain, keyed by seed and segment."""
    return _uniform_open(np.random.default_rng([_seed_key(seed), int(segment_index) + 1]))


def _affected_indices(grid: Grid1D, region) -> np.ndarray | None:
    if region is None:
        return None
    lo, hi = region
    return np.nonzero((grid.nodes >= lo) & (grid.nodes <= hi))[0]


def chaotic_profile(grid, c, epsilon, mu=4.0, *, reseed_c=None, affected=None):
    """One logistic iterate per affected node, ascending node order.

    Returns (sigma, new_state). sigma_i = epsilon * (2 c_i - 1) with c_i the
    fresh iterate for node i. If an iterate lands exactly on the absorbing
    fixed point 0, that node keeps the collapsed value, a warning is emitted,
    and the chain restarts from reseed_c for the following nodes.
    """
    if not 0.0 < c < 1.0:
        raise ContractViolationError(f"chain state must be in (0, 1), got {c}")
    if not 0.0 < mu <= 4.0:
        raise ContractViolationError(f"logistic mu must be in (0, 4], got {mu}")
    if reseed_c is None:
        reseed_c = _FALLBACK_ITERATE
    indices = range(grid.n) if affected is None else affected
    sigma = np.zeros(grid.n)
    eps = float(epsilon)
    for i in indices:
        c = mu * c * (1.0 - c)
        sigma[i] = eps * (2.0 * c - 1.0)
        if c == 0.0:
            warnings.warn(
                "logistic chain hit the absorbing fixed point; restarting from reseed value",
                RuntimeWarning,
                stacklevel=2,
            )
            c = reseed_c
    return sigma, c


def random_profile(grid, rng, epsilon, *, affected=None):
    """Independent uniform draws on [-epsilon, +epsilon], one per affected node.

    Returns (sigma, rng); the generator state advances by exactly one draw per
    affected node in ascending order.
    """
    sigma = np.zeros(grid.n)
    if affected is None:
        sigma[:] = rng.uniform(-epsilon, epsilon, size=grid.n)
    else:
        sigma[affected] = rng.uniform(-epsilon, epsilon, size=len(affected))
    return sigma, rng


def quasiperiodic_profile(grid, alpha, *, affected=None):
    """Static two-cosine profile alpha * (cos(5 x)/2 + cos(sqrt(5) x)/2)."""
    x = grid.nodes
    sigma = alpha * (np.cos(5.0 * x) / 2.0 + np.cos(math.sqrt(5.0) * x) / 2.0)
    if affected is not None:
        keep = np.zeros(grid.n, dtype=bool)
        keep[affected] = True
        sigma = np.where(keep, sigma, 0.0)
    return sigma


@dataclass(eq=False)
class SigmaSchedule:
    """Realised sigma profiles: one row per refresh segment, one column per node.

    Segment k covers t in [k*tau, (k+1)*tau) (right-continuous at boundaries);
    the quasiperiodic and noise-free kinds produce a single segment spanning
    the whole run, with tau set to t_final.
    """

    spec: PerturbationSpec
    grid: Grid1D
    t_final: float
    tau: float
    t_starts: np.ndarray
    segments: np.ndarray

    @property
    def n_segments(self) -> int:
        return self.segments.shape[0]

    def segment_index(self, t: float) -> int:
        if not 0.0 <= t <= self.t_final:
            raise ContractViolationError(f"t={t} outside simulated range [0, {self.t_final}]")
        return min(int(t // self.tau), self.n_segments - 1)

    def profile_at(self, t: float) -> np.ndarray:
        return self.segments[self.segment_index(t)]

    def sigma_at(self, node_index: int, t: float) -> float:
        return float(self.segments[self.segment_index(t), node_index])

    def steps_per_segment(self, dt: float) -> int:
        """Steps covered by one segment; dt must align with tau to 1e-9."""
        ratio = self.tau / dt
        m = round(ratio)
        if m < 1 or abs(ratio - m) > 1e-9:
            raise ConfigurationError(
                f"refresh interval tau={self.tau} is not an integer multiple of dt={dt}"
            )
        return m


def sigma_at(schedule: SigmaSchedule, node_index: int, t: float) -> float:
    """Value of sigma at one node and time (piecewise constant in t)."""
    return schedule.sigma_at(node_index, t)


def nonlinearity(background, sigma):
    """Perturbed coefficient background * (1 + sigma); accepts scalars or arrays."""
    return background * (1.0 + sigma)


def build_schedule(spec: PerturbationSpec, grid: Grid1D, t_final: float) -> SigmaSchedule:
    """Generate every refresh segment for a run of duration t_final.

    Chaotic and random generator state is threaded through the segments, so
    the concatenated per-segment streams reproduce a single chain/stream.
    """
    if not (math.isfinite(t_final) and t_final > 0):
        raise ConfigurationError(f"t_final must be > 0, got {t_final}")
    affected = _affected_indices(grid, spec.region)

    if spec.kind == "none":
        segments = np.zeros((1, grid.n))
        tau_eff = float(t_final)
    elif spec.kind == "quasiperiodic":
        segments = quasiperiodic_profile(grid, spec.quasiperiodic_alpha, affected=affected)[None, :]
        tau_eff = float(t_final)
    else:
        tau_eff = float(spec.tau)
        # ceil with a fuzz so t_final/tau that is an integer up to roundoff
        # does not gain a spurious extra segment
        n_seg = max(1, math.ceil(t_final / tau_eff - 1e-9))
        profiles = np.empty((n_seg, grid.n))
        if spec.kind == "chaotic":
            c = initial_iterate(spec.seed)
            for k in range(n_seg):
                profiles[k], c = chaotic_profile(
                    grid,
                    c,
                    spec.epsilon,
                    spec.logistic_mu,
                    reseed_c=reseed_iterate(spec.seed, k),
                    affected=affected,
                )
        else:
            rng = np.random.default_rng(int(spec.seed))
            for k in range(n_seg):
                profiles[k], rng = random_profile(grid, rng, spec.epsilon, affected=affected)
        segments = profiles

    t_starts = np.arange(segments.shape[0]) * tau_eff
    return SigmaSchedule(
        spec=spec,
        grid=grid,
        t_final=float(t_final),
        tau=tau_eff,
        t_starts=t_starts,
        segments=segments,
    )
