"""Domain types shared by every module.

A path lives on a uniform time grid, stored as absolute positions.  Killing
is represented by an index into the grid (the last live sample), never by a
sentinel value, so arithmetic never touches dead samples.  All types are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import os

import numpy as np

PSD_TOL = 1e-10


def _frozen_array(x, dtype=np.float64, ndim=None):
    a = np.array(x, dtype=dtype)
    if ndim is not None and a.ndim != ndim:
        raise ValueError(f"expected {ndim}-dimensional array, got shape {a.shape}")
    a.setflags(write=False)
    return a


def symmetrize(sigma):
    """Average a matrix with its transpose (covariance ingestion rule)."""
    s = np.asarray(sigma, dtype=np.float64)
    return 0.5 * (s + s.T)


@dataclass(frozen=True)
class Direction:
    """A nonzero vector defining the open half-space {x : <x, eta> > 0}."""

    eta: np.ndarray

    def __post_init__(self):
        eta = _frozen_array(self.eta, ndim=1)
        if not np.linalg.norm(eta) > 0.0:
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "eta", eta)

    @property
    def d(self) -> int:
        return self.eta.shape[0]

    def unit(self) -> np.ndarray:
        return self.eta / np.linalg.norm(self.eta)


def as_direction(eta) -> Direction:
    return eta if isinstance(eta, Direction) else Direction(np.atleast_1d(eta))


@dataclass(frozen=True)
class GridPath:
    """A d-dimensional path sampled on a uniform grid of spacing ``step``.

    ``values`` has one row per grid index, row 0 being the start.  If
    ``kill_index = k`` is set, indices beyond k are semantically dead and
    must not be read; the lifetime is ``k * step``.  By convention the path
    equals its start for negative times.
    """

    step: float
    values: np.ndarray
    kill_index: int | None = None

    def __post_init__(self):
        if not self.step > 0.0:
            raise ValueError("step must be positive")
        v = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        v = _frozen_array(v, ndim=2)
        if v.shape[0] < 1:
            raise ValueError("values must be nonempty")
        object.__setattr__(self, "values", v)
        if self.kill_index is not None:
            k = int(self.kill_index)
            if not 0 <= k <= self.n_steps:
                raise ValueError(f"kill_index {k} outside [0, {self.n_steps}]")
            object.__setattr__(self, "kill_index", k)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def n_steps(self) -> int:
        return self.values.shape[0] - 1

    @property
    def start(self) -> np.ndarray:
        return self.values[0]

    @property
    def live_steps(self) -> int:
        """Number of grid steps before the path is sent to the dead state."""
        return self.n_steps if self.kill_index is None else self.kill_index

    @property
    def lifetime(self) -> float:
        return self.live_steps * self.step

    def live_values(self) -> np.ndarray:
        return self.values[: self.live_steps + 1]

    def increments(self) -> np.ndarray:
        """Per-step increments over the live part of the grid."""
        return np.diff(self.live_values(), axis=0)

    def times(self) -> np.ndarray:
        return self.step * np.arange(self.live_steps + 1)


@dataclass(frozen=True)
class SplitPair:
    """A path seen from an extremal point.

    ``pre`` runs backwards from the extremum to the start, ``post`` forward
    from the extremum to the end; both are re-based so the extremum sits at
    the origin.  Lifetimes of the two parts add up to the input lifetime.
    """

    pre: GridPath
    post: GridPath
    tau_index: int
    extremum_point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "extremum_point", _frozen_array(self.extremum_point, ndim=1))


@dataclass(frozen=True)
class ConstructionTrace:
    """Everything produced by the occupation-time construction of a path.

    ``a_plus[i]``/``a_minus[i]`` count the steps among the first i whose
    projected right endpoint is positive / nonpositive; ``alpha_plus`` and
    ``alpha_minus`` are their first-passage inverses.  ``up`` and ``down``
    are the time-changed indicator-filtered sums, ``y_plus``/``y_minus`` the
    same sums on the original clock.
    """

    a_plus: np.ndarray
    a_minus: np.ndarray
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    y_plus: GridPath
    y_minus: GridPath
    up: GridPath
    down: GridPath

    def __post_init__(self):
        for name in ("a_plus", "a_minus", "alpha_plus", "alpha_minus"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), dtype=np.int64, ndim=1))


class FiniteSupportJumps:
    """Jump law putting probability ``probs[i]`` on ``atoms[i]``."""

    def __init__(self, atoms, probs):
        self.atoms = _frozen_array(np.atleast_2d(atoms), ndim=2)
        self.probs = _frozen_array(probs, ndim=1)
        if self.atoms.shape[0] != self.probs.shape[0]:
            raise ValueError("atoms and probs must have equal length")
        if np.any(self.probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(self.probs.sum()) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")

    @property
    def d(self):
        return self.atoms.shape[1]


class GaussianJumps:
    """Multivariate normal jump law."""

    def __init__(self, mean, cov):
        self.mean = _frozen_array(mean, ndim=1)
        cov = symmetrize(cov)
        if np.min(np.linalg.eigvalsh(cov)) < -PSD_TOL:
            raise ValueError("jump covariance must be positive semidefinite")
        self.cov = _frozen_array(cov, ndim=2)

    @property
    def d(self):
        return self.mean.shape[0]


class ExponentialJumps:
    """Exponential magnitude along a fixed direction: J = E * direction."""

    def __init__(self, rate, direction):
        if not rate > 0:
            raise ValueError("exponential jump rate must be positive")
        self.rate = float(rate)
        self.direction = _frozen_array(np.atleast_1d(direction), ndim=1)

    @property
    def d(self):
        return self.direction.shape[0]


@dataclass(frozen=True)
class CompoundPoissonSpec:
    rate: float
    law: object  # FiniteSupportJumps | GaussianJumps | ExponentialJumps

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("jump rate must be positive")


@dataclass(frozen=True)
class FixedHorizon:
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("kill horizon must be positive")


@dataclass(frozen=True)
class ExponentialRate:
    q: float

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("kill rate must be positive")


@dataclass(frozen=True)
class LevySpec:
    """Parametric description of a d-dimensional Levy process.

    ``drift`` is per unit time, ``sigma`` the covariance of the Brownian
    part per unit time (symmetrized on ingestion), ``jumps`` an optional
    compound-Poisson component and ``kill`` an optional killing rule.
    """

    drift: np.ndarray
    sigma: np.ndarray
    jumps: CompoundPoissonSpec | None = None
    kill: object = None  # None | FixedHorizon | ExponentialRate

    def __post_init__(self):
        drift = _frozen_array(np.atleast_1d(self.drift), ndim=1)
        object.__setattr__(self, "drift", drift)
        sigma = symmetrize(np.atleast_2d(self.sigma))
        if sigma.shape != (drift.shape[0], drift.shape[0]):
            raise ValueError("sigma shape does not match drift dimension")
        if np.min(np.linalg.eigvalsh(sigma)) < -PSD_TOL:
            raise ValueError("sigma must be positive semidefinite")
        object.__setattr__(self, "sigma", _frozen_array(sigma, ndim=2))
        if self.jumps is not None and self.jumps.law.d != drift.shape[0]:
            raise ValueError("jump law dimension does not match drift")
        if self.kill is not None and not isinstance(self.kill, (FixedHorizon, ExponentialRate)):
            raise ValueError("kill must be None, FixedHorizon or ExponentialRate")

    @property
    def d(self) -> int:
        return self.drift.shape[0]


def in_open_halfspace(x, eta) -> bool:
    """Whether ``x`` lies strictly inside the half-space of ``eta``."""
    eta = as_direction(eta)
    return float(np.dot(np.asarray(x, dtype=np.float64), eta.eta)) > 0.0


def project(path: GridPath, eta) -> np.ndarray:
    """Projected path <X_i, eta> over the live grid indices."""
    eta = as_direction(eta)
    return path.live_values() @ eta.eta


def write_path_csv(f, path: GridPath) -> None:
    """Write a path as ``t,x1,...,xd,alive`` rows (one per grid index)."""
    close = False
    if isinstance(f, (str, bytes, os.PathLike)):
        f = open(f, "w", newline="")
        close = True
    try:
        w = csv.writer(f)
        w.writerow(["t"] + [f"x{j + 1}" for j in range(path.d)] + ["alive"])
        k = path.live_steps
        for i in range(path.n_steps + 1):
            row = [f"{i * path.step:.17g}"]
            row += [f"{x:.17g}" for x in path.values[i]]
            row.append("1" if i <= k else "0")
            w.writerow(row)
    finally:
        if close:
            f.close()


def read_path_csv(f) -> GridPath:
    """Inverse of :func:`write_path_csv`; the step is inferred from column t."""
    close = False
    if isinstance(f, (str, bytes, os.PathLike)):
        f = open(f, newline="")
        close = True
    try:
        rows = list(csv.reader(f))
    finally:
        if close:
            f.close()
    header, body = rows[0], rows[1:]
    if header[0] != "t" or header[-1] != "alive":
        raise ValueError("bad path CSV header")
    d = len(header) - 2
    values = np.array([[float(x) for x in r[1 : 1 + d]] for r in body])
    alive = np.array([r[-1] == "1" for r in body])
    if len(body) > 1:
        step = float(body[1][0]) - float(body[0][0])
    else:
        step = 1.0
    kill = None if alive.all() else int(np.flatnonzero(alive)[-1])
    return GridPath(step=step, values=values, kill_index=kill)


def path_to_csv_string(path: GridPath) -> str:
    buf = io.StringIO()
    write_path_csv(buf, path)
    return buf.getvalue()
