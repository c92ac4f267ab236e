"""Named physical systems and computer models used by the experiments.

Each system bundles a ground-truth response (when one exists), a
computer model with its parameter box, and the input dimension.  The
trajectory system ``ex3`` is a drag-corrected fall whose computer model
is the frictionless quadratic; the ``ion`` system is a four-state
channel-gating model whose output is a matrix-exponential entry, and it
has no closed-form truth: data for it comes from a CSV file.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import csv
import math

import numpy as np

from .calibrate import ComputerModel
from .linalg import matrix_exponential
from .regression import Dataset
from .rng import normal, uniform

__all__ = [
    "NoTruthAvailable",
    "NamedSystem",
    "ex1_zeta",
    "ex1_eta",
    "ex2_zeta",
    "ex2_eta",
    "ex3_zeta",
    "ex3_eta",
    "ion_eta",
    "get_system",
    "system_names",
    "generate_dataset",
    "load_dataset_csv",
]


class NoTruthAvailable(Exception):
    """The system has no ground-truth response to sample from."""


@dataclass(frozen=True)
class NamedSystem:
    """A benchmark system: optional truth, computer model, input dimension."""

    id: str
    zeta: Optional[Callable]  # maps (m, d) points to m values
    model: ComputerModel
    d: int
    reference_theta: dict


def ex1_zeta(x):
    """Damped-growth oscillation exp(pi x / 5) sin(2 pi x)."""
    x = np.asarray(x, dtype=float)
    return np.exp(np.pi * x / 5.0) * np.sin(2.0 * np.pi * x)


def ex1_eta(x, theta):
    """Truth minus a one-parameter oscillatory distortion."""
    x = np.asarray(x, dtype=float)
    amp = np.sqrt(theta * theta - theta + 1.0)
    wave = np.sin(2.0 * np.pi * theta * x) + np.cos(2.0 * np.pi * theta * x)
    return ex1_zeta(x) - amp * wave


def ex2_zeta(x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return (
        (2.0 / 3.0) * np.exp(x1 + 0.2)
        - x2 * np.sin(0.4)
        + 0.4
        + np.exp(-x1) * (x1 + 0.5) * (x2 * x2 + x2 + 1.0)
    )


def ex2_eta(x1, x2, t1, t2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return (2.0 / 3.0) * np.exp(x1 + t1) - x2 * np.sin(t2) + t2


_EX3_C = 50.0 / 49.0
_EX3_SHIFT = math.atanh(math.sqrt(0.02))


def ex3_zeta(x):
    """Height of a falling body with quadratic drag, started at 8."""
    x = np.asarray(x, dtype=float)
    th = np.tanh(_EX3_SHIFT + np.sqrt(2.0) * x)
    return 8.0 + 2.5 * np.log(_EX3_C - _EX3_C * th * th)

def ex3_eta(x, v0, g):
    """Frictionless trajectory 8 + v0 x - g x^2 / 2."""
    x = np.asarray(x, dtype=float)
    return 8.0 + v0 * x - 0.5 * g * x * x


def _ion_generator(theta):
    t1, t2, t3 = theta
    return np.array(
        [
            [-t2 - t3, t1, 0.0, 0.0],
            [t2, -t1 - t2, t1, 0.0],
            [0.0, t2, -t1 - t2, t1],
            [0.0, 0.0, t2, -t1],
        ]
    )


def ion_eta(x, theta):
    """Channel-gating model: first-row, last-column entry of exp(e^x A(theta)).

    ``x`` is log time; ``theta`` holds the three positive transition rates.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    a = _ion_generator(theta)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape[0])
    for i, xi in enumerate(xs):
        out[i] = matrix_exponential(math.exp(xi) * a)[0, 3]
    return out if np.ndim(x) else float(out[0])


def _make_systems():
    ex1_model = ComputerModel(
        eta=lambda x, th: ex1_eta(x[:, 0], th[0]),
        theta_box=[[-1.0, 1.0]],
    )
    ex2_model = ComputerModel(
        eta=lambda x, th: ex2_eta(x[:, 0], x[:, 1], th[0], th[1]),
        theta_box=[[0.0, 1.0], [0.0, 1.0]],
    )
    ex3_model = ComputerModel(
        eta=lambda x, th: ex3_eta(x[:, 0], th[0], th[1]),
        theta_box=[[0.0, 5.0], [0.0, 20.0]],
    )
    ion_model = ComputerModel(
        eta=lambda x, th: ion_eta(x[:, 0], th),
        theta_box=[[0.01, 10.0]] * 3,
    )
    return {
        "ex1": NamedSystem(
            id="ex1",
            zeta=lambda x: ex1_zeta(x[:, 0]),
            model=ex1_model,
            d=1,
            # profile minimizers of the discrepancy norm over theta
            reference_theta={
                "l2_argmin": -0.1780,
                "rkhs_argmin": 0.3740,
                "rkhs_local_argmin": -0.1230,
            },
        ),
        "ex2": NamedSystem(
            id="ex2",
            zeta=lambda x: ex2_zeta(x[:, 0], x[:, 1]),
            model=ex2_model,
            d=2,
            reference_theta={},
        ),
        "ex3": NamedSystem(
            id="ex3",
            zeta=lambda x: ex3_zeta(x[:, 0]),
            model=ex3_model,
            d=1,
            reference_theta={},
        ),
        "ion": NamedSystem(id="ion", zeta=None, model=ion_model, d=1, reference_theta={}),
    }


_SYSTEMS = _make_systems()


def system_names():
    return tuple(sorted(_SYSTEMS))


def get_system(name):
    try:
        return _SYSTEMS[name]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; choose from {system_names()}") from None


def generate_dataset(system, n, sigma, stream):
    """Sample n noisy observations of the system truth at uniform inputs.

    Raises
    ------
    NoTruthAvailable
        For systems without a ground-truth response (``ion``).
    """
    if system.zeta is None:
        raise NoTruthAvailable(f"system {system.id!r} has no sampling truth")
    if n < 1:
        raise ValueError("n must be >= 1")
    x = uniform(stream, system.d, size=n)
    y = system.zeta(x) + normal(stream, sigma, size=n)
    return Dataset(x=x, y=y)


def load_dataset_csv(path):
    """Read a dataset from CSV with header ``x1,...,xd,y``.

    A single input column may also be named plain ``x``.  Coordinates
    must lie in [0, 1] (rescale inputs before writing the file).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if header[-1] != "y":
            raise ValueError(f"{path}: last column must be 'y', got {header[-1]!r}")
        d = len(header) - 1
        if d < 1:
            raise ValueError(f"{path}: no input columns")
        expected = ["x"] if d == 1 else None
        for j, name in enumerate(header[:-1]):
            if name != f"x{j + 1}" and not (expected and name in expected):
                raise ValueError(
                    f"{path}: input column {j} must be named 'x{j + 1}', got {name!r}"
                )
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    if arr.shape[1] != d + 1:
        raise ValueError(f"{path}: inconsistent column count")
    return Dataset(x=arr[:, :d], y=arr[:, d])
