"""Samplers producing grid paths from a process specification.

Randomness is fully determined by an :class:`RngStream`; replications of an
experiment use one stream per replication index so results never depend on
scheduling.  Jumps are binned into grid cells (Poisson counts per cell),
which is exact in law at grid resolution -- the constructions downstream
only ever read grid values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CompoundPoissonSpec,
    Direction,
    ExponentialJumps,
    ExponentialRate,
    FiniteSupportJumps,
    FixedHorizon,
    GaussianJumps,
    GridPath,
    LevySpec,
    as_direction,
)
from .conditioned import cholesky

ETA_VAR_TOL = 1e-12


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream keyed by (seed, stream_id).

    Identical keys reproduce identical draws regardless of thread schedule.
    ``child(*keys)`` derives further independent generators (used for
    permutations, reference samples, ...) without consuming this stream.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,)))

    def child(self, *keys: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *keys)))

    def substream(self, *keys: int) -> "RngStream":
        """A stream addressed below this one (stream_id is folded into keys)."""
        mixed = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *keys))
        return RngStream(seed=int(mixed.generate_state(1, np.uint64)[0]), stream_id=0)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


class Case(enum.Enum):
    """Local behaviour of the projected process at its extremes."""

    UP_DOWN = "UpDown"
    UP = "Up"
    DOWN = "Down"
    UNSUPPORTED = "Unsupported"


def _sample_jumps(law, total: int, gen: np.random.Generator) -> np.ndarray:
    if isinstance(law, FiniteSupportJumps):
        idx = gen.choice(law.atoms.shape[0], size=total, p=law.probs)
        return law.atoms[idx]
    if isinstance(law, GaussianJumps):
        g = cholesky(law.cov)
        return law.mean + gen.standard_normal((total, law.d)) @ g.T
    if isinstance(law, ExponentialJumps):
        mags = gen.exponential(scale=1.0 / law.rate, size=total)
        return mags[:, None] * law.direction
    raise TypeError(f"unknown jump law {type(law).__name__}")


def sample_path(spec: LevySpec, horizon: float, step: float, rng) -> GridPath:
    """Simulate one grid path of ``spec`` on {0, step, ..., ceil(horizon/step)*step}.

    Each cell receives drift*step, a Gaussian increment with covariance
    sigma*step, and a Poisson(rate*step) number of jumps.  Exponential
    killing is truncated at the simulation horizon (pick horizon >> 1/q);
    the drawn values beyond the kill index are retained in storage but
    flagged dead.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if horizon < step:
        raise ValueError("horizon must be at least one step")
    gen = as_generator(rng)
    n = math.ceil(horizon / step)
    d = spec.d

    if np.any(spec.sigma):
        g = cholesky(spec.sigma)
        increments = spec.drift * step + math.sqrt(step) * gen.standard_normal((n, d)) @ g.T
    else:
        increments = np.tile(spec.drift * step, (n, 1))

    kill_index = None
    if isinstance(spec.kill, FixedHorizon):
        kill_index = min(math.ceil(spec.kill.t / step), n)
    elif isinstance(spec.kill, ExponentialRate):
        e = gen.exponential(scale=1.0 / spec.kill.q)
        kill_index = min(math.ceil(e / step), n)

    if spec.jumps is not None:
        counts = gen.poisson(lam=spec.jumps.rate * step, size=n)
        total = int(counts.sum())
        if total:
            jumps = _sample_jumps(spec.jumps.law, total, gen)
            cells = np.repeat(np.arange(n), counts)
            np.add.at(increments, cells, jumps)

    values = np.empty((n + 1, d))
    values[0] = 0.0
    np.cumsum(increments, axis=0, out=values[1:])
    return GridPath(step=step, values=values, kill_index=kill_index)


def _jump_projection_signs(jumps: CompoundPoissonSpec, eta: Direction):
    """Return (all_nonneg, all_nonpos, has_positive_mass, has_negative_mass)
    for the projections <J, eta> of the jump law."""
    law = jumps.law
    e = eta.eta
    if isinstance(law, FiniteSupportJumps):
        proj = law.atoms @ e
        live = law.probs > 0
        proj = proj[live]
        return bool(np.all(proj >= 0)), bool(np.all(proj <= 0)), bool(np.any(proj > 0)), bool(np.any(proj < 0))
    if isinstance(law, GaussianJumps):
        var = float(e @ law.cov @ e)
        mean = float(law.mean @ e)
        if var > ETA_VAR_TOL:
            return False, False, True, True
        return mean >= 0, mean <= 0, mean > 0, mean < 0
    if isinstance(law, ExponentialJumps):
        c = float(law.direction @ e)
        return c >= 0, c <= 0, c > 0, c < 0
    raise TypeError(f"unknown jump law {type(law).__name__}")


def classify_case(spec: LevySpec, eta) -> Case:
    """Classify the local behaviour of the projected process at the origin.

    Only the families the samplers generate are covered: a Brownian part in
    the direction of eta gives the two-sided regular case; otherwise a
    bounded-variation process with strictly signed drift and one-sided jumps
    is irregular in the drift direction.  Everything else is Unsupported.
    """
    eta = as_direction(eta)
    e = eta.eta
    eta_var = float(e @ spec.sigma @ e)
    if eta_var > ETA_VAR_TOL:
        return Case.UP_DOWN
    drift_proj = float(spec.drift @ e)
    if spec.jumps is None:
        return Case.UNSUPPORTED
    nonneg, nonpos, _, _ = _jump_projection_signs(spec.jumps, eta)
    if drift_proj < 0 and nonneg:
        return Case.DOWN
    if drift_proj > 0 and nonpos:
        return Case.UP
    return Case.UNSUPPORTED
