"""End-to-end verification experiments.

Each experiment is a deterministic function of its parameters and a master
stream: replication i draws from the child generator (lane, i), so reruns
and different worker counts give identical reports.  Reports carry the full
parameter echo, the recorded sample clouds, statistics and p-values, and
can be serialized to JSON with the clouds as CSV side files.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.stats import gamma as gamma_dist

from .conditioned import conditioned_bm_path
from .construct import discrete_conditioned_pair, split_at_directional_infimum, split_at_max_norm
from .core import (
    ExponentialJumps,
    FiniteSupportJumps,
    GaussianJumps,
    GridPath,
    LevySpec,
    as_direction,
)
from .sim import Case, RngStream, classify_case, sample_path
from .stats import chi2_test, chi2_two_sample, energy_permutation_test, kde2d, ks_test, write_kde_csv

ENUMERATION_GUARD = 10**7
SEED_SCHEME = "child(lane, replication); lanes: 1=paths, 2/3=references, 4/5=permutations"


@dataclass
class ExperimentReport:
    """Parameters, seeds, recorded samples and statistics of one experiment."""

    name: str
    parameters: dict
    master_seed: int
    seed_scheme: str = SEED_SCHEME
    statistics: dict = field(default_factory=dict)
    p_values: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self, include_samples: bool = True, include_wall_time: bool = True) -> dict:
        out = {
            "name": self.name,
            "parameters": self.parameters,
            "master_seed": self.master_seed,
            "seed_scheme": self.seed_scheme,
            "statistics": self.statistics,
            "p_values": self.p_values,
            "counts": self.counts,
        }
        if include_wall_time:
            out["wall_time"] = self.wall_time
        if include_samples:
            out["samples"] = {k: np.asarray(v).tolist() for k, v in self.samples.items()}
        return out

    def write_json(self, path, include_samples: bool = True) -> None:
        # wall time is kept on the object but left out of emitted files so
        # identical (argv, seed) reruns stay byte-identical
        payload = self.to_dict(include_samples, include_wall_time=False)
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))

    def write_samples_csv(self, outdir) -> list:
        """Emit every sample cloud as ``<experiment>_<seed>_<label>.csv``."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        written = []
        for label, arr in self.samples.items():
            arr = np.atleast_2d(np.asarray(arr, dtype=np.float64))
            if arr.shape[0] == 1 and arr.size > arr.shape[1]:
                arr = arr.T
            dest = outdir / f"{self.name}_{self.master_seed}_{label}.csv"
            header = ",".join(f"x{j + 1}" for j in range(arr.shape[1]))
            with open(dest, "w") as f:
                f.write(header + "\n")
                for row in arr:
                    f.write(",".join(f"{x:.17g}" for x in row) + "\n")
            written.append(dest)
        return written


def _map_indexed(fn, n: int, threads: int) -> list:
    """Apply ``fn`` to 0..n-1, aggregating in index order regardless of the
    worker count."""
    if threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def _read_index(n: int, step: float) -> int:
    """Smallest grid index at or past time 1/n (float-noise tolerant)."""
    return int(math.ceil((1.0 / n) / step - 1e-9))


def _path_key(values: np.ndarray) -> tuple:
    return tuple(tuple(row) for row in np.atleast_2d(values))


def check_representation_enumeration(increments, n: int, eta=None, name: str = "enum") -> ExperimentReport:
    """Exhaustively verify the splitting identity on all increment sequences.

    Over every length-n sequence from the weighted increment set, the
    weighted multiset of (down, up) pairs from the occupation-time
    construction must equal the weighted multiset of (negated pre, post)
    pairs from the split at the directional infimum -- exactly, with no
    tolerance.  Weights are accumulated as exact rationals; use increments
    with exactly representable coordinates (integers, dyadics) so the float
    path arithmetic is itself exact.
    """
    t0 = time.perf_counter()
    vecs = [np.atleast_1d(np.asarray(v, dtype=np.float64)) for v, _ in increments]
    weights = [Fraction(w) for _, w in increments]
    if any(w <= 0 for w in weights):
        raise ValueError("increment weights must be positive")
    d = vecs[0].shape[0]
    eta = as_direction(np.ones(d) if eta is None else eta)
    k = len(vecs)
    if k**n > ENUMERATION_GUARD:
        raise ValueError(f"{k}^{n} sequences exceed the enumeration guard")

    constructed: dict = {}
    split: dict = {}
    for choice in itertools.product(range(k), repeat=n):
        w = math.prod((weights[c] for c in choice), start=Fraction(1))
        values = np.vstack([np.zeros(d)] + [vecs[c] for c in choice]).cumsum(axis=0)
        path = GridPath(step=1.0, values=values)
        trace = discrete_conditioned_pair(path, eta)
        key_c = (_path_key(trace.down.values), _path_key(trace.up.values))
        constructed[key_c] = constructed.get(key_c, Fraction(0)) + w
        pair = split_at_directional_infimum(path, eta)
        key_s = (_path_key(-pair.pre.values), _path_key(pair.post.values))
        split[key_s] = split.get(key_s, Fraction(0)) + w

    verdict = constructed == split
    report = ExperimentReport(
        name=name,
        parameters={
            "increments": [v.tolist() for v in vecs],
            "weights": [float(w) for w in weights],
            "n": n,
            "eta": eta.eta.tolist(),
        },
        master_seed=0,
    )
    report.statistics = {
        "sequences": k**n,
        "distinct_pairs_construction": len(constructed),
        "distinct_pairs_split": len(split),
        "verdict": "PASS" if verdict else "FAIL",
    }
    report.counts = {"total": k**n}
    report.wall_time = time.perf_counter() - t0
    return report


def discrete_arcsine_probs(n: int) -> np.ndarray:
    """P(k) = C(2k, k) C(2n-2k, n-k) / 4^n for k = 0..n (the law of the
    positive-step count of a symmetric atomless random walk)."""
    probs = [Fraction(math.comb(2 * k, k) * math.comb(2 * (n - k), n - k), 4**n) for k in range(n + 1)]
    return np.array([float(p) for p in probs])


def check_sparre_andersen(n_steps: int, n_mc: int, rng: RngStream, name: str = "sparre") -> ExperimentReport:
    """Compare the positive-step count of a Gaussian walk with the argmax
    index of an independent walk, and both with the discrete arcsine law.

    The two empirical laws come from independent replication sets so the
    homogeneity chi-square applies cleanly.
    """
    t0 = time.perf_counter()
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    n = n_steps
    gen_a = rng.child(1)
    steps = gen_a.standard_normal((n_mc, n))
    walks = np.cumsum(steps, axis=1)
    occ = (walks > 0).sum(axis=1)
    counts_occ = np.bincount(occ, minlength=n + 1)

    gen_b = rng.child(2)
    steps_b = gen_b.standard_normal((n_mc, n))
    walks_b = np.concatenate([np.zeros((n_mc, 1)), np.cumsum(steps_b, axis=1)], axis=1)
    argmax = walks_b.argmax(axis=1)
    counts_arg = np.bincount(argmax, minlength=n + 1)

    arcsine = discrete_arcsine_probs(n)
    res_two = chi2_two_sample(counts_occ, counts_arg)
    res_occ = chi2_test(counts_occ, arcsine)
    res_arg = chi2_test(counts_arg, arcsine)

    report = ExperimentReport(
        name=name,
        parameters={"n_steps": n, "n_mc": n_mc},
        master_seed=rng.seed,
    )
    report.samples = {"occupation_counts": counts_occ, "argmax_counts": counts_arg}
    report.statistics = {
        "chi2_two_sample": res_two.statistic,
        "chi2_occupation_vs_arcsine": res_occ.statistic,
        "chi2_argmax_vs_arcsine": res_arg.statistic,
        "arcsine_probs": arcsine.tolist(),
    }
    report.p_values = {
        "two_sample": res_two.p_value,
        "occupation_vs_arcsine": res_occ.p_value,
        "argmax_vs_arcsine": res_arg.p_value,
    }
    report.counts = {"total": 2 * n_mc}
    report.wall_time = time.perf_counter() - t0
    return report


def experiment_zoom_infimum(
    spec: LevySpec,
    eta,
    n: int,
    step: float,
    n_rep: int,
    rng: RngStream,
    n_perm: int = 1999,
    self_test: bool = False,
    threads: int = 1,
    name: str = "zoom",
) -> ExperimentReport:
    """Zoom in on the directional infimum of a unit-horizon path.

    Each replication splits a fresh path at the last infimum of its
    projection and records sqrt(n) times the post/pre value at time 1/n
    (sides whose lifetime is shorter are skipped and counted).  Reference
    clouds are matched draws of the conditioned Brownian motion for the
    Brownian part of the spec, or -- in self-test mode -- an independent
    batch of the same construction, which calibrates the test under the
    null.  Both sides get an energy permutation test.
    """
    t0 = time.perf_counter()
    eta = as_direction(eta)
    eta_var = float(eta.eta @ spec.sigma @ eta.eta)
    if eta_var <= 0:
        raise ValueError("spec has no Brownian part in the direction eta")
    if step > 1.0 / (10 * n):
        raise ValueError("step must be at most 1/(10 n)")
    m = _read_index(n, step)
    root_n = math.sqrt(n)

    def record(lane, i):
        path = sample_path(spec, 1.0, step, rng.child(lane, i))
        pair = split_at_directional_infimum(path, eta)
        k = path.live_steps
        tau = pair.tau_index
        fwd = root_n * pair.post.values[m] if k - tau >= m else None
        bwd = root_n * pair.pre.values[m] if tau >= m else None
        return fwd, bwd

    rec = _map_indexed(lambda i: record(1, i), n_rep, threads)
    fwd_cloud = np.array([r[0] for r in rec if r[0] is not None])
    bwd_cloud = np.array([r[1] for r in rec if r[1] is not None])
    skip_fwd = n_rep - fwd_cloud.shape[0]
    skip_bwd = n_rep - bwd_cloud.shape[0]

    report = ExperimentReport(
        name=name,
        parameters={
            "n": n,
            "step": step,
            "n_rep": n_rep,
            "n_perm": n_perm,
            "self_test": self_test,
            "eta": eta.eta.tolist(),
            "sigma": spec.sigma.tolist(),
            "has_jumps": spec.jumps is not None,
        },
        master_seed=rng.seed,
    )
    report.counts = {"total": n_rep, "skipped_post": skip_fwd, "skipped_pre": skip_bwd}
    if n_rep == 0:
        report.wall_time = time.perf_counter() - t0
        return report

    if self_test:
        rec_ref = _map_indexed(lambda i: record(2, i), n_rep, threads)
        ref_fwd = np.array([r[0] for r in rec_ref if r[0] is not None])
        ref_bwd = np.array([r[1] for r in rec_ref if r[1] is not None])
        k_f = min(len(fwd_cloud), len(ref_fwd))
        k_b = min(len(bwd_cloud), len(ref_bwd))
        fwd_cloud, ref_fwd = fwd_cloud[:k_f], ref_fwd[:k_f]
        bwd_cloud, ref_bwd = bwd_cloud[:k_b], ref_bwd[:k_b]
    else:

        def draw_ref(lane, count):
            return np.array(
                [conditioned_bm_path(spec.sigma, eta, 1.0, 1.0, rng.child(lane, j)).values[-1] for j in range(count)]
            )

        ref_fwd = draw_ref(2, fwd_cloud.shape[0])
        ref_bwd = draw_ref(3, bwd_cloud.shape[0])

    # the pre-side limit is the negated down-process, whose law coincides
    # with the conditioned draw itself, so both references are used as is
    report.samples = {
        "post_cloud": fwd_cloud,
        "pre_cloud": bwd_cloud,
        "post_reference": ref_fwd,
        "pre_reference": ref_bwd,
    }
    if len(fwd_cloud) and len(ref_fwd):
        res_f = energy_permutation_test(fwd_cloud, ref_fwd, n_perm, rng.child(4))
        report.statistics["energy_post"] = res_f.statistic
        report.p_values["post"] = res_f.p_value
    if len(bwd_cloud) and len(ref_bwd):
        res_b = energy_permutation_test(bwd_cloud, ref_bwd, n_perm, rng.child(5))
        report.statistics["energy_pre"] = res_b.statistic
        report.p_values["pre"] = res_b.p_value
    report.wall_time = time.perf_counter() - t0
    return report


def size_biased_projection_reference(jumps, eta):
    """Reference for the first up-step law: the jump law projected onto eta
    and reweighted linearly (density proportional to the projected height,
    restricted to positive heights).

    Returns ("cdf", callable) for the exponential law and
    ("discrete", atoms, probs) for finite support.
    """
    eta = as_direction(eta)
    law = jumps.law
    if isinstance(law, ExponentialJumps):
        c = float(law.direction @ eta.eta)
        if c <= 0:
            raise ValueError("exponential jumps do not project positively on eta")
        return "cdf", gamma_dist(a=2, scale=c / law.rate).cdf
    if isinstance(law, FiniteSupportJumps):
        proj = law.atoms @ eta.eta
        keep = proj > 0
        w = proj[keep] * law.probs[keep]
        if w.sum() <= 0:
            raise ValueError("jump law has no positive mass in the direction eta")
        return "discrete", proj[keep], w / w.sum()
    if isinstance(law, GaussianJumps):
        var = float(eta.eta @ law.cov @ eta.eta)
        mean = float(law.mean @ eta.eta)
        if var > 1e-12 or mean <= 0:
            raise ValueError("gaussian jumps must be degenerate and positive along eta")
        return "discrete", np.array([mean]), np.array([1.0])
    raise TypeError(f"unknown jump law {type(law).__name__}")


def experiment_initial_jump_law(
    spec: LevySpec,
    eta,
    horizon: float,
    step: float,
    n_rep: int,
    rng: RngStream,
    threads: int = 1,
    name: str = "initial_jump",
) -> ExperimentReport:
    """Record the first step of the up-process for a spec whose projection
    creeps downward (no Brownian part, negative drift, upward jumps).

    The recorded value is a grid proxy (bias of order step) for the initial
    value of the conditioned process, which for these specs is a jump into
    the half-space.  Its projection is compared against the linearly
    size-biased projected jump law; replications whose path never enters
    the half-space within the horizon are skipped and counted.
    """
    t0 = time.perf_counter()
    eta = as_direction(eta)
    case = classify_case(spec, eta)
    if case is not Case.DOWN:
        raise ValueError(f"spec classifies as {case.value}, need Down")
    kind_ref = size_biased_projection_reference(spec.jumps, eta)

    def record(i):
        path = sample_path(spec, horizon, step, rng.child(1, i))
        trace = discrete_conditioned_pair(path, eta)
        if trace.up.n_steps >= 1:
            return trace.up.values[1]
        return None

    rec = _map_indexed(record, n_rep, threads)
    cloud = np.array([r for r in rec if r is not None])
    skipped = n_rep - cloud.shape[0]

    report = ExperimentReport(
        name=name,
        parameters={
            "horizon": horizon,
            "step": step,
            "n_rep": n_rep,
            "eta": eta.eta.tolist(),
            "drift": spec.drift.tolist(),
            "jump_rate": spec.jumps.rate,
        },
        master_seed=rng.seed,
    )
    report.counts = {"total": n_rep, "recorded": int(cloud.shape[0]), "skipped": skipped}
    if cloud.shape[0] == 0:
        report.wall_time = time.perf_counter() - t0
        return report

    proj = cloud @ eta.eta
    report.samples = {"first_up_step": cloud, "projections": proj}
    if kind_ref[0] == "cdf":
        res = ks_test(proj, kind_ref[1])
        report.statistics["ks"] = res.statistic
        report.p_values["size_biased"] = res.p_value
    else:
        _, atoms, probs = kind_ref
        nearest = np.abs(proj[:, None] - atoms[None, :]).argmin(axis=1)
        counts = np.bincount(nearest, minlength=atoms.shape[0])
        report.samples["atom_counts"] = counts
        report.statistics["atom_probs"] = probs.tolist()
        if atoms.shape[0] >= 2:
            res = chi2_test(counts, probs)
            report.statistics["chi2"] = res.statistic
            report.p_values["size_biased"] = res.p_value
    report.wall_time = time.perf_counter() - t0
    return report


def experiment_max_norm(
    sigma1: float,
    sigma2: float,
    rho: float,
    n: int,
    step: float,
    n_rep: int,
    rng: RngStream,
    n_perm: int = 999,
    kde_points: int = 61,
    threads: int = 1,
    name: str = "maxnorm",
) -> ExperimentReport:
    """Zoom in at the point of maximal distance from the origin for a
    correlated planar Brownian motion on the unit horizon.

    Each retained replication records sqrt(n) times the post value at time
    1/n after the last norm maximum, plus a matched conditioned-Brownian
    draw reusing the replication's own inward direction.  The energy
    statistic between the two clouds is reported without a pass/fail gate;
    retained counts and KDE grids for both clouds are included.
    """
    t0 = time.perf_counter()
    sigma = np.array(
        [[sigma1**2, rho * sigma1 * sigma2], [rho * sigma1 * sigma2, sigma2**2]]
    )
    spec = LevySpec(drift=np.zeros(2), sigma=sigma)
    m = _read_index(n, step)
    root_n = math.sqrt(n)

    def record(i):
        path = sample_path(spec, 1.0, step, rng.child(1, i))
        eta, pair = split_at_max_norm(path)
        if pair.post.n_steps < m:
            return None
        obs = root_n * pair.post.values[m]
        ref = conditioned_bm_path(sigma, eta, 1.0, 1.0, rng.child(2, i)).values[-1]
        return obs, ref

    rec = _map_indexed(record, n_rep, threads)
    kept = [r for r in rec if r is not None]
    cloud = np.array([r[0] for r in kept]) if kept else np.empty((0, 2))
    ref_cloud = np.array([r[1] for r in kept]) if kept else np.empty((0, 2))

    report = ExperimentReport(
        name=name,
        parameters={
            "sigma1": sigma1,
            "sigma2": sigma2,
            "rho": rho,
            "n": n,
            "step": step,
            "n_rep": n_rep,
            "n_perm": n_perm,
            "kde_points": kde_points,
        },
        master_seed=rng.seed,
    )
    retained = len(kept)
    report.counts = {"total": n_rep, "retained": retained, "skipped": n_rep - retained}
    if retained:
        report.statistics["retained_fraction"] = retained / n_rep
        report.statistics["negative_product_fraction"] = float(np.mean(cloud[:, 0] * cloud[:, 1] < 0))
        report.samples = {"prelimit_cloud": cloud, "limit_cloud": ref_cloud}
        if retained >= 10:
            res = energy_permutation_test(cloud, ref_cloud, n_perm, rng.child(4))
            report.statistics["energy"] = res.statistic
            report.p_values["energy"] = res.p_value
            pooled = np.vstack([cloud, ref_cloud])
            lo, hi = pooled.min(axis=0), pooled.max(axis=0)
            pad = 0.05 * (hi - lo)
            gx = np.linspace(lo[0] - pad[0], hi[0] + pad[0], kde_points)
            gy = np.linspace(lo[1] - pad[1], hi[1] + pad[1], kde_points)
            report.samples["kde_grid_x"] = gx
            report.samples["kde_grid_y"] = gy
            report.samples["kde_prelimit"] = kde2d(cloud, gx, gy)
            report.samples["kde_limit"] = kde2d(ref_cloud, gx, gy)
    report.wall_time = time.perf_counter() - t0
    return report


def write_max_norm_kde_csv(report: ExperimentReport, outdir) -> list:
    """Write the KDE grids of a max-norm report as x,y,density CSV files."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    gx = np.asarray(report.samples["kde_grid_x"])
    gy = np.asarray(report.samples["kde_grid_y"])
    for label in ("kde_prelimit", "kde_limit"):
        dest = outdir / f"{report.name}_{report.master_seed}_{label}.csv"
        write_kde_csv(dest, gx, gy, np.asarray(report.samples[label]))
        written.append(dest)
    return written
