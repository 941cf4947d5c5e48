"""Quasi-static Gaussian exchange noise.

Every shot draws one relative offset ``z ~ N(0, 1)`` per exchange bond and
scales each segment's exchange as ``J -> J (1 + sigma_rel z)``, so
``sigma_J = sigma_rel * J`` and the draw is shared by all segments of the
shot.  Shot ``i`` uses its own PCG64 stream seeded with ``(seed, i)``,
which keeps results independent of evaluation order.
"""

import math
from dataclasses import dataclass

import numpy as np

from .evolution import MAX_STEPS, PropagationConfig, propagate_lab, step_count
from .metrics import gate_fidelity
from .models import DqdParams
from .scheduling import segment_unitary

DEFAULT_SAMPLES = 10_000


class NoiseError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseSpec:
    sigma_rel: float = 0.01
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    correlated: bool = False  # True: one draw shared by all bonds

    def __post_init__(self):
        if not self.sigma_rel >= 0:
            raise NoiseError(f"sigma_rel must be >= 0, got {self.sigma_rel}")
        if self.samples < 1:
            raise NoiseError(f"samples must be >= 1, got {self.samples}")
        if not 0 <= self.seed < 2**64:
            raise NoiseError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McResult:
    mean_infidelity: float
    stderr: float
    samples_used: int


def sample_rng(seed, index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def gaussian_sample(mu, sigma, rng_state):
    """One normal draw by the Box-Muller transform on ``rng_state`` uniforms."""
    if sigma < 0:
        raise NoiseError(f"sigma must be >= 0, got {sigma}")
    u1, u2 = rng_state.random(2)
    # 1 - u1 lies in (0, 1], so the log is finite
    z = math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2 * math.pi * u2)
    return mu + sigma * z


def _bond_count(p):
    return 1 if isinstance(p, DqdParams) else p.n - 1


def _perturb(p, scale):
    """Multiply every exchange value of ``p`` by the per-bond factors."""
    if isinstance(p, DqdParams):
        return p.with_(j=p.j * scale[0])
    return p.with_(jlist=tuple(jv * s for jv, s in zip(p.jlist, scale)))


def _scales(noise, nbonds, index):
    rng = sample_rng(noise.seed, index)
    if noise.correlated:
        z = gaussian_sample(0.0, 1.0, rng)
        return [1 + noise.sigma_rel * z] * nbonds
    return [1 + noise.sigma_rel * gaussian_sample(0.0, 1.0, rng) for _ in range(nbonds)]


def _perturbed_unitary(schedule, scale, evaluator, cfg):
    params = [_perturb(p, scale) for p in schedule.segment_params()]
    u = None
    t0 = 0.0
    for seg, p in zip(schedule.segments, params):
        if evaluator == "analytic":
            us = segment_unitary(p, seg.duration, t0)
        else:
            us = propagate_lab(p, seg.duration, cfg, t_start=t0)
        u = us if u is None else us @ u
        t0 += seg.duration
    return u


def mc_infidelity(schedule, target, noise, evaluator="analytic", cfg=None):
    """Mean 1 - F over quasi-static exchange draws."""
    if evaluator not in ("analytic", "lab-oracle"):
        raise NoiseError(f"unknown evaluator {evaluator!r}")
    cfg = cfg or PropagationConfig(method="magnus2", max_phase=0.2)
    if evaluator == "lab-oracle":
        per_shot = sum(step_count(p, s.duration, cfg)
                       for p, s in zip(schedule.segment_params(), schedule.segments))
        total = per_shot * noise.samples
        if total > MAX_STEPS:
            raise NoiseError(
                f"lab-oracle Monte Carlo needs {total:.3g} steps (> {MAX_STEPS:.0e}); "
                "reduce samples or use the analytic evaluator")
    nbonds = _bond_count(schedule.base)
    if noise.sigma_rel == 0:
        u = _perturbed_unitary(schedule, [1.0] * nbonds, evaluator, cfg)
        return McResult(1 - gate_fidelity(u, target), 0.0, noise.samples)
    vals = np.empty(noise.samples)
    for i in range(noise.samples):
        u = _perturbed_unitary(schedule, _scales(noise, nbonds, i), evaluator, cfg)
        vals[i] = 1 - gate_fidelity(u, target)
    vals = np.clip(vals, 0.0, 1.0)
    stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return McResult(float(vals.mean()), stderr, len(vals))


def infidelity_floor_estimate(sigma, tau):
    """1 - exp(-sigma^2 tau^2 / 2)."""
    return -math.expm1(-0.5 * (sigma * tau) ** 2)
