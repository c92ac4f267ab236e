"""Replicated prediction experiments over the named systems.

A run draws ``replicates`` independent datasets per noise level, builds
the requested predictors on each, and scores them by mean squared
prediction error against the noiseless truth on a fresh Monte Carlo
sample.  Per-replicate randomness comes from streams keyed by
(noise index, replicate, phase), so results are bit-identical no matter
how replicates are scheduled, and adding replicates never changes the
ones already run.

Predictor names:

* ``NoBiasCorr`` -- computer model at the L2-calibrated parameter, no
  discrepancy correction.
* ``NP``        -- nonparametric ridge fit of the response alone.
* ``LSCal``     -- computer model at the least squares parameter plus a
  GCV-tuned discrepancy fit.
* ``OptCal``    -- computer model at the prediction-weighted parameter
  plus its discrepancy fit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calibrate import (
    DEFAULT_STARTS,
    calibrate_l2,
    calibrate_ls,
    calibrate_optpred,
)
from .kernels import KernelSpec
from .regression import Dataset, fit_ridge, predict_discrepancy, select_lambda_gcv
from .rng import RngStream, uniform
from .systems import NoTruthAvailable, generate_dataset, get_system

__all__ = [
    "METHOD_NAMES",
    "DEFAULT_SEED",
    "ExperimentConfig",
    "PmseReport",
    "default_psi_grid",
    "cv5_select_psi",
    "pmse",
    "build_predictors",
    "run_experiment",
    "parse_config",
]

METHOD_NAMES = ("NoBiasCorr", "NP", "LSCal", "OptCal")
DEFAULT_SEED = 20240101

# kernel length scales tried by cross-validation (unit-cube designs);
# scaled by sqrt(d) so the grid tracks typical pairwise distances
_PSI_GRID_1D = (0.05, 0.1, 0.2, 0.3, 0.5, 1.0)

# stream phases within one replicate
_PHASE_DATA = 0
_PHASE_PSI = 1
_PHASE_LS = 2
_PHASE_L2 = 3
_PHASE_OPTPRED = 4
_PHASE_TEST = 5


def default_psi_grid(d):
    return tuple(p * math.sqrt(d) for p in _PSI_GRID_1D)


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one experiment run."""

    system: str
    n: int
    sigma2: tuple
    replicates: int
    mc_test_points: int = 100_000
    methods: tuple = METHOD_NAMES
    psi: object = "cv5"  # "cv5" or a fixed positive length scale
    lambda_grid: Optional[tuple] = None  # None means the default grid
    starts: int = DEFAULT_STARTS
    seed: int = DEFAULT_SEED
    out: Optional[str] = None

    def __post_init__(self):
        get_system(self.system)
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if len(self.sigma2) < 1 or any(s < 0 for s in self.sigma2):
            raise ValueError("sigma2 must be a nonempty list of nonnegative values")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.mc_test_points < 1000:
            raise ValueError("mc_test_points must be >= 1000")
        bad = [m for m in self.methods if m not in METHOD_NAMES]
        if bad or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHOD_NAMES}")
        if self.psi != "cv5" and not (isinstance(self.psi, float) and self.psi > 0):
            raise ValueError("psi must be 'cv5' or a positive number")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")


def _stream(seed, sigma_idx, replicate, phase):
    # (noise index, replicate, phase) packed into one 64-bit stream id;
    # independent of replicate count, so extending a run keeps old draws
    return RngStream(seed, (sigma_idx << 44) | (replicate << 4) | phase)


def cv5_select_psi(data, family, psi_grid, eta_at_x, stream):
    """Pick a kernel length scale by five-fold cross-validation.

    Folds come from one seeded shuffle of the design.  For every grid
    value, each fold is predicted by a GCV-tuned ridge fit of the
    remaining folds; the scale with the smallest summed squared error
    wins, ties going to the larger (smoother) scale.
    """
    psi_grid = sorted(float(p) for p in psi_grid)
    if not psi_grid:
        raise ValueError("psi grid is empty")
    if data.n < 5:
        raise ValueError("five-fold cross-validation needs at least 5 points")
    if eta_at_x is None:
        resid = data.y
    else:
        resid = data.y - np.asarray(eta_at_x, dtype=float).reshape(-1)

    perm = stream.generator.permutation(data.n)
    folds = np.array_split(perm, 5)

    best_psi = None
    best_err = np.inf
    for psi in psi_grid:
        spec = KernelSpec("matern32", psi, data.d)
        err = 0.0
        for fold in folds:
            mask = np.ones(data.n, dtype=bool)
            mask[fold] = False
            train = Dataset(x=data.x[mask], y=resid[mask])
            lam = select_lambda_gcv(train, None, spec)
            fit = fit_ridge(train, None, spec, lam)
            pred = predict_discrepancy(fit, data.x[fold])
            err += float(np.sum((resid[fold] - pred) ** 2))
        if err <= best_err:  # ascending grid: ties keep the larger scale
            best_err = err
            best_psi = psi
    return best_psi


def pmse(predictor, system, mc_test_points, stream, chunk=32768):
    """Mean squared prediction error against the noiseless truth.

    Draws ``mc_test_points`` uniform inputs from ``stream`` and averages
    (predictor - truth)^2 over them.  Evaluation is chunked to bound
    memory; the average itself is taken over the full array at once.
    """
    if system.zeta is None:
        raise NoTruthAvailable(f"system {system.id!r} has no truth to score against")
    if mc_test_points < 1:
        raise ValueError("mc_test_points must be >= 1")
    x = uniform(stream, system.d, size=mc_test_points)
    sq = np.empty(mc_test_points)
    for lo in range(0, mc_test_points, chunk):
        hi = min(lo + chunk, mc_test_points)
        diff = np.asarray(predictor(x[lo:hi]), dtype=float) - system.zeta(x[lo:hi])
        sq[lo:hi] = diff * diff
    return float(np.mean(sq))


def _model_predictor(model, theta):
    return lambda x: model.eval(x, theta)


def _corrected_predictor(model, theta, fit):
    return lambda x: model.eval(x, theta) + predict_discrepancy(fit, x)


def build_predictors(data, system, kernel, config, streams, optpred_mode="one_step"):
    """Build the requested predictors on one dataset.

    ``streams`` maps phase names ("ls", "l2", "optpred") to independent
    streams, so each method's randomness is unaffected by which other
    methods run alongside it.

    Returns
    -------
    (predictors, info)
        ``predictors`` maps method name to a callable over (m, d) input
        arrays; ``info`` holds fitted parameters, smoothing levels, and
        the prediction-weighted objective trace when OptCal ran.
    """
    model = system.model
    lambda_grid = None if config.lambda_grid is None else np.asarray(config.lambda_grid)
    predictors = {}
    info = {"psi": kernel.psi}

    if "NP" in config.methods:
        lam = select_lambda_gcv(data, None, kernel, grid=lambda_grid)
        np_fit = fit_ridge(data, None, kernel, lam)
        predictors["NP"] = lambda x: predict_discrepancy(np_fit, x)
        info["np_lambda"] = lam

    if "NoBiasCorr" in config.methods:
        res = calibrate_l2(
            data,
            model,
            kernel,
            starts=config.starts,
            stream=streams["l2"],
            lambda_grid=lambda_grid,
        )
        predictors["NoBiasCorr"] = _model_predictor(model, res.theta_hat)
        info["theta_l2"] = res.theta_hat

    if "LSCal" in config.methods:
        res = calibrate_ls(data, model, starts=config.starts, stream=streams["ls"])
        eta0 = model.eval(data.x, res.theta_hat)
        lam = select_lambda_gcv(data, eta0, kernel, grid=lambda_grid)
        fit = fit_ridge(data, eta0, kernel, lam)
        predictors["LSCal"] = _corrected_predictor(model, res.theta_hat, fit)
        info["theta_ls"] = res.theta_hat
        info["ls_lambda"] = lam

    if "OptCal" in config.methods:
        res = calibrate_optpred(
            data,
            model,
            kernel,
            mode=optpred_mode,
            starts=config.starts,
            stream=streams["optpred"],
            lambda_grid=lambda_grid,
        )
        predictors["OptCal"] = _corrected_predictor(
            model, res.theta_hat, res.discrepancy
        )
        info["theta_opt"] = res.theta_hat
        info["opt_lambda"] = res.lambda_used
        info["opt_trace"] = list(res.objective_trace)

    return predictors, info


def _run_replicate(config, sigma_idx, replicate, optpred_mode):
    system = get_system(config.system)
    sigma2 = config.sigma2[sigma_idx]
    seed = config.seed

    data = generate_dataset(
        system,
        config.n,
        math.sqrt(sigma2),
        _stream(seed, sigma_idx, replicate, _PHASE_DATA),
    )
    if config.psi == "cv5":
        psi = cv5_select_psi(
            data,
            "matern32",
            default_psi_grid(system.d),
            None,
            _stream(seed, sigma_idx, replicate, _PHASE_PSI),
        )
    else:
        psi = float(config.psi)
    kernel = KernelSpec("matern32", psi, system.d)

    streams = {
        "ls": _stream(seed, sigma_idx, replicate, _PHASE_LS),
        "l2": _stream(seed, sigma_idx, replicate, _PHASE_L2),
        "optpred": _stream(seed, sigma_idx, replicate, _PHASE_OPTPRED),
    }
    predictors, info = build_predictors(
        data, system, kernel, config, streams, optpred_mode=optpred_mode
    )

    scores = {}
    for method in config.methods:
        scores[method] = pmse(
            predictors[method],
            system,
            config.mc_test_points,
            _stream(seed, sigma_idx, replicate, _PHASE_TEST),
        )
    return scores, info


def _replicate_task(args):
    config, sigma_idx, replicate, optpred_mode = args
    try:
        return _run_replicate(config, sigma_idx, replicate, optpred_mode)
    except Exception as err:
        raise RuntimeError(
            f"replicate {replicate} at sigma2={config.sigma2[sigma_idx]} failed: {err}"
        ) from err


@dataclass
class PmseReport:
    """Aggregated scores of one experiment, plus per-replicate detail."""

    config: ExperimentConfig
    per_replicate: dict  # (method, sigma2) -> ndarray of replicate PMSEs
    traces: dict = field(default_factory=dict)  # (sigma2, replicate) -> list

    def mean(self, method, sigma2):
        return float(np.mean(self.per_replicate[(method, sigma2)]))

    def se(self, method, sigma2):
        vals = self.per_replicate[(method, sigma2)]
        return float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0

    def to_csv(self):
        """Report as CSV text, rows sorted by (method, sigma2)."""
        fmt = "%.17g"
        lines = ["method,sigma2,mean_pmse,se_pmse,replicates"]
        for method in sorted(set(k[0] for k in self.per_replicate)):
            for sigma2 in sorted(set(k[1] for k in self.per_replicate if k[0] == method)):
                lines.append(
                    ",".join(
                        [
                            method,
                            fmt % sigma2,
                            fmt % self.mean(method, sigma2),
                            fmt % self.se(method, sigma2),
                            str(self.per_replicate[(method, sigma2)].size),
                        ]
                    )
                )
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def run_experiment(config, threads=1, optpred_mode="one_step", collect_traces=False):
    """Run every (noise level, replicate) cell and aggregate the scores.

    ``threads`` counts worker processes (0 means one per CPU); results
    are keyed by replicate index, so the output is identical for any
    worker count.  Any replicate failure aborts the run with the
    replicate index in the message.
    """
    tasks = [
        (config, si, r, optpred_mode)
        for si in range(len(config.sigma2))
        for r in range(config.replicates)
    ]
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads == 1:
        outcomes = [_replicate_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_replicate_task, tasks, chunksize=1))

    per_replicate = {
        (m, s2): np.empty(config.replicates)
        for m in config.methods
        for s2 in config.sigma2
    }
    traces = {}
    for (_, si, r, _), (scores, info) in zip(tasks, outcomes):
        s2 = config.sigma2[si]
        for method, value in scores.items():
            per_replicate[(method, s2)][r] = value
        if collect_traces and "opt_trace" in info:
            traces[(s2, r)] = info["opt_trace"]

    report = PmseReport(config=config, per_replicate=per_replicate, traces=traces)
    if config.out:
        report.write(config.out)
    return report


_LIST_KEYS = {"sigma2", "methods", "lambda_grid"}
_INT_KEYS = {"n", "replicates", "mc_test_points", "starts", "seed"}


def parse_config(path):
    """Read an ExperimentConfig from a flat key=value file.

    Lines are ``key=value``; ``#`` starts a comment; list values are
    comma-separated.  ``lambda_grid=default`` (or omitting the key)
    selects the built-in grid.
    """
    raw = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            key = key.strip()
            value = value.strip()
            if key in raw:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value

    known = {
        "system", "n", "sigma2", "replicates", "mc_test_points",
        "methods", "psi", "lambda_grid", "starts", "seed", "out",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
    for req in ("system", "n", "sigma2", "replicates"):
        if req not in raw:
            raise ValueError(f"{path}: missing required key {req!r}")

    kwargs = {"system": raw["system"]}
    for key in _INT_KEYS & set(raw):
        kwargs[key] = int(raw[key])
    kwargs["sigma2"] = tuple(float(v) for v in raw["sigma2"].split(","))
    if "methods" in raw:
        kwargs["methods"] = tuple(m.strip() for m in raw["methods"].split(","))
    if "psi" in raw:
        kwargs["psi"] = "cv5" if raw["psi"] == "cv5" else float(raw["psi"])
    if "lambda_grid" in raw and raw["lambda_grid"] != "default":
        kwargs["lambda_grid"] = tuple(float(v) for v in raw["lambda_grid"].split(","))
    if "out" in raw:
        kwargs["out"] = raw["out"]
    return ExperimentConfig(**kwargs)
