"""Pathwise constructions: splitting at directional extremes and the
occupation-time-changed pair of signed processes.

All scans stop at the kill index of the input; ties in the extremum
location resolve to the last attaining index.  The indicator deciding
whether a step is routed to the up- or down-process is evaluated at the
step's right endpoint, which is the convention under which the discrete
splitting identity is exact.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .core import ConstructionTrace, Direction, GridPath, SplitPair, as_direction


def argmin_last(z) -> int:
    """Largest index attaining the minimum of a nonempty sequence."""
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise ValueError("empty sequence")
    return kernels.argmin_last(z)


def _split_at(path: GridPath, tau: int, center: np.ndarray) -> SplitPair:
    v = path.live_values()
    k = v.shape[0] - 1
    post_vals = v[tau:] - center
    pre_vals = v[tau::-1] - center
    killed = path.kill_index is not None
    pre = GridPath(step=path.step, values=pre_vals, kill_index=tau if killed else None)
    post = GridPath(step=path.step, values=post_vals, kill_index=k - tau if killed else None)
    return SplitPair(pre=pre, post=post, tau_index=tau, extremum_point=center.copy())


def split_at_directional_infimum(path: GridPath, eta) -> SplitPair:
    """Split a path at the last minimum of its projection onto eta.

    The post part is the path forward from the minimum, the pre part the
    path backward from it, both re-based to start at 0.
    """
    eta = as_direction(eta)
    v = path.live_values()
    z = v @ eta.eta
    tau = kernels.argmin_last(z)
    return _split_at(path, tau, v[tau])


def split_at_max_norm(path: GridPath) -> tuple[Direction, SplitPair]:
    """Split a path at the last point of maximal Euclidean norm.

    Returns the inward direction -M (from the extremal point M toward the
    origin) together with the split; every post value then has nonnegative
    projection onto that direction.
    """
    v = path.live_values()
    tau, max_ss = kernels.argmax_norm_last(v)
    if max_ss <= 0.0:
        raise ValueError("path never leaves the origin; the split direction -M would be zero")
    m = v[tau]
    return Direction(-m), _split_at(path, tau, m)


def discrete_conditioned_pair(path: GridPath, eta) -> ConstructionTrace:
    """Route each grid step to the up- or down-process by the sign of the
    projected right endpoint, and time-change by the occupation counts.

    The up-process accumulates, in order, the increments of steps whose
    projected endpoint is strictly positive; the down-process takes the
    rest.  Occupation counts, their first-passage inverses and the
    unchanged-clock filtered sums are returned alongside.
    """
    eta = as_direction(eta)
    v = path.live_values()
    z = v[1:] @ eta.eta
    inc = np.diff(v, axis=0)
    a_plus, a_minus, alpha_plus, alpha_minus, up, down, y_plus, y_minus = kernels.conditioned_pair_scan(inc, z)
    killed = path.kill_index is not None
    step = path.step

    def _as_path(vals):
        return GridPath(step=step, values=vals, kill_index=vals.shape[0] - 1 if killed else None)

    return ConstructionTrace(
        a_plus=a_plus,
        a_minus=a_minus,
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        y_plus=_as_path(y_plus),
        y_minus=_as_path(y_minus),
        up=_as_path(up),
        down=_as_path(down),
    )
