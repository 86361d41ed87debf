"""Non-Markovianity measure: accumulated trace-distance backflow.

The measure of a run is the sum of all strict increases of the system
trace distance over the sampled grid, which telescopes to the integral
of the positive part of sigma. Maximizing over a family of input pairs
gives the reported value; for the chain every antipodal equatorial pair
is equivalent by symmetry, so the canonical |+>/|-> pair is the default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .evolution import TimeGrid, TrajectoryRecord, run_trajectory
from .linalg import DensityMatrix, haar_random_state, state_vector_from_density
from .model import ChainParams, Model, build_chain_model, equatorial_pair

__all__ = [
    "PlusMinusPair",
    "EquatorialScan",
    "RandomPairs",
    "PairFamily",
    "MeasureReport",
    "increasing_intervals",
    "interval_contributions",
    "blp_integral",
    "blp_measure",
    "down_up_crossings",
]

# increases below this are treated as grid noise, not backflow
INCREASE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class PlusMinusPair:
    """The canonical |+>/|-> input pair (wire name: paper)."""

    label: str = "paper"


@dataclass(frozen=True)
class EquatorialScan:
    """n_phi equally spaced antipodal equatorial pairs, phi in [0, pi)."""

    n_phi: int = 12

    def __post_init__(self) -> None:
        if self.n_phi < 1:
            raise ValueError(f"n_phi must be positive, got {self.n_phi}")


@dataclass(frozen=True)
class RandomPairs:
    """Seeded Haar-random pure system-state pairs."""

    n: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")


PairFamily = Union[PlusMinusPair, EquatorialScan, RandomPairs]


@dataclass(frozen=True)
class MeasureReport:
    """Measure of the best input pair plus the per-pair breakdown."""

    n_measure: float
    intervals: tuple[tuple[float, float, float], ...]
    best_pair: str
    per_pair_values: tuple[tuple[str, float], ...]
    best_record: TrajectoryRecord | None = field(default=None, repr=False, compare=False)


def _rising_runs(d_values: np.ndarray) -> list[tuple[int, int]]:
    """Maximal index runs [i, j] over which every step strictly increases."""
    d = np.asarray(d_values, dtype=np.float64)
    rising = np.diff(d) > INCREASE_THRESHOLD
    runs = []
    start = None
    for i, up in enumerate(rising):
        if up and start is None:
            start = i
        elif not up and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(rising)))
    return runs


def increasing_intervals(d_values: np.ndarray, times: np.ndarray) -> list[tuple[float, float]]:
    """Time intervals over which the distance series strictly increases."""
    times = np.asarray(times, dtype=np.float64)
    return [(float(times[i]), float(times[j])) for i, j in _rising_runs(d_values)]


def interval_contributions(
    d_values: np.ndarray, times: np.ndarray
) -> list[tuple[float, float, float]]:
    """increasing_intervals plus each interval's distance gain."""
    d = np.asarray(d_values, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    return [
        (float(times[i]), float(times[j]), float(d[j] - d[i]))
        for i, j in _rising_runs(d_values)
    ]


def down_up_crossings(sigma: np.ndarray, times: np.ndarray) -> list[float]:
    """Times where sigma crosses zero from below, linearly interpolated."""
    s = np.asarray(sigma, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    out = []
    for i in range(s.size - 1):
        if s[i] <= 0.0 < s[i + 1]:
            frac = -s[i] / (s[i + 1] - s[i])
            out.append(float(t[i] + frac * (t[i + 1] - t[i])))
    return out


def blp_integral(d_values: np.ndarray) -> float:
    """Sum of strict increases of the distance series.

    Telescoping makes this the discrete integral of the positive part of
    the derivative; refining the grid changes it only through genuinely
    new resolved oscillations.
    """
    d = np.asarray(d_values, dtype=np.float64)
    steps = np.diff(d)
    return float(steps[steps > INCREASE_THRESHOLD].sum())


def _chain_pair_candidates(family: PairFamily, n_total: int):
    d_env = 2 ** (n_total - 1)
    env = np.zeros(d_env, dtype=np.complex128)
    env[0] = 1.0
    if isinstance(family, PlusMinusPair):
        yield "paper", equatorial_pair(0.0, n_total)
    elif isinstance(family, EquatorialScan):
        for k in range(family.n_phi):
            phi = np.pi * k / family.n_phi
            yield f"equatorial:phi={phi:.12g}", equatorial_pair(phi, n_total)
    elif isinstance(family, RandomPairs):
        rng = np.random.default_rng(family.seed)
        for k in range(family.n):
            pair = tuple(
                DensityMatrix.from_state_vector(np.kron(haar_random_state(2, rng), env), (2, d_env))
                for _ in range(2)
            )
            yield f"random:{k}", pair
    else:
        raise TypeError(f"unknown pair family {family!r}")


def _generic_pair_candidates(family: PairFamily, model: Model):
    ds, de = model.bipartition.d_system, model.bipartition.d_environment
    # keep the model's own environment preparation for every candidate pair
    v = state_vector_from_density(model.initial_pair[0])
    u, s, vh = np.linalg.svd(v.reshape(ds, de))
    env = vh[0, :].conj()
    if isinstance(family, RandomPairs):
        rng = np.random.default_rng(family.seed)
        for k in range(family.n):
            pair = tuple(
                DensityMatrix.from_state_vector(np.kron(haar_random_state(ds, rng), env), (ds, de))
                for _ in range(2)
            )
            yield f"random:{k}", pair
        return
    if ds != 2:
        raise ValueError("equatorial input pairs need a qubit system")
    phis = [0.0] if isinstance(family, PlusMinusPair) else [
        np.pi * k / family.n_phi for k in range(family.n_phi)
    ]
    labels = ["paper"] if isinstance(family, PlusMinusPair) else [
        f"equatorial:phi={p:.12g}" for p in phis
    ]
    for label, phi in zip(labels, phis):
        out = []
        for sign in (+1.0, -1.0):
            sys_state = np.array([1.0, sign * np.exp(1j * phi)], dtype=np.complex128) / np.sqrt(2.0)
            out.append(DensityMatrix.from_state_vector(np.kron(sys_state, env), (ds, de)))
        yield label, (out[0], out[1])


def blp_measure(
    model_or_params: Model | ChainParams,
    grid: TimeGrid,
    pair_family: PairFamily = PlusMinusPair(),
    path: str = "auto",
) -> MeasureReport:
    """Maximize accumulated backflow over a family of input pairs.

    Accepts either chain parameters (the chain is built once and the
    initial pair swapped per candidate) or a prebuilt model, in which
    case candidate pairs reuse the model's environment preparation.
    """
    if isinstance(model_or_params, ChainParams):
        base = build_chain_model(model_or_params)
        candidates = _chain_pair_candidates(pair_family, model_or_params.n_total)
    else:
        base = model_or_params
        candidates = _generic_pair_candidates(pair_family, base)

    best = None
    per_pair = []
    for label, pair in candidates:
        model = dataclasses.replace(base, initial_pair=pair)
        record = run_trajectory(model, grid, path=path)
        value = blp_integral(record.d_system)
        per_pair.append((label, value))
        if best is None or value > best[1]:
            best = (label, value, record)
    label, value, record = best
    return MeasureReport(
        n_measure=value,
        intervals=tuple(interval_contributions(record.d_system, record.times)),
        best_pair=label,
        per_pair_values=tuple(per_pair),
        best_record=record,
    )
