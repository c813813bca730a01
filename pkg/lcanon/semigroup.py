"""
Evolution e^{tL} and checks that a generator produces a CP (or CPTP)
semigroup on a time grid.
"""
import dataclasses
import logging
import math
import typing
from multiprocessing import Pool

import numpy as np
import scipy.linalg

from . import choi, superop
from .config import Config
from .exceptions import NumericalFailure, ValidationError
from .gksl import Generator
from .superop import SuperOperator

logger = logging.getLogger(__name__)


def evolve(L: Generator, t: float) -> SuperOperator:
    """e^{tL} by Pade scaling and squaring."""
    t = float(t)
    if not (math.isfinite(t) and t >= 0):
        raise ValidationError(f"evolution time must be a non-negative finite number, got {t}")
    with np.errstate(over='ignore', invalid='ignore'):
        matrix = scipy.linalg.expm(t * L.matrix)
    if not np.all(np.isfinite(matrix)):
        raise NumericalFailure(f"matrix exponential overflowed at t={t}")
    return SuperOperator(L.dim, L.dim, matrix)


@dataclasses.dataclass(frozen=True)
class EvolutionReport:
    t_grid: typing.Tuple[float, ...]
    min_choi_eigenvalues: typing.Tuple[float, ...]
    trace_deviation: typing.Tuple[float, ...]
    semigroup_residuals: typing.Tuple[typing.Tuple[float, float, float], ...]

    def __post_init__(self):
        n = len(self.t_grid)
        if len(self.min_choi_eigenvalues) != n or len(self.trace_deviation) != n:
            raise ValidationError("report columns are not aligned with the time grid")
        values = list(self.min_choi_eigenvalues) + list(self.trace_deviation)
        values += [r for _, _, r in self.semigroup_residuals]
        if not all(math.isfinite(v) for v in values):
            raise NumericalFailure("evolution report contains non-finite values")

    def passed(self, psd_tol: float = 1e-9, trace_tol: typing.Optional[float] = None,
               semigroup_tol: float = 1e-9) -> bool:
        """CP at every grid point, and trace preservation when ``trace_tol`` is given."""
        if min(self.min_choi_eigenvalues, default=0.0) < -psd_tol:
            return False
        if trace_tol is not None and max(self.trace_deviation, default=0.0) > trace_tol:
            return False
        return all(r <= semigroup_tol for _, _, r in self.semigroup_residuals)

    def rows(self) -> typing.List[typing.Tuple[float, float, float]]:
        return list(zip(self.t_grid, self.min_choi_eigenvalues, self.trace_deviation))


def _grid_point(args) -> typing.Tuple[np.ndarray, float, float]:
    L, t = args
    propagator = evolve(L, t)
    min_eig = choi.unweighted_choi(propagator).min_eigenvalue()
    unit = superop.dual(propagator)(np.eye(L.dim))
    deviation = float(scipy.linalg.svdvals(unit - np.eye(L.dim))[0])
    return propagator.matrix, min_eig, deviation


def _check_grid(t_grid) -> typing.Tuple[float, ...]:
    grid = tuple(float(t) for t in t_grid)
    if not grid:
        raise ValidationError("time grid is empty")
    if any(not math.isfinite(t) or t < 0 for t in grid):
        raise ValidationError(f"time grid must be non-negative and finite: {grid}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError(f"time grid must be strictly ascending: {grid}")
    return grid


def check_semigroup(L: Generator, t_grid, config: typing.Optional[Config] = None,
                    processes: typing.Optional[int] = None) -> EvolutionReport:
    """
    Evaluate e^{tL} on the grid: Choi positivity, trace deviation
    ||e^{tL}*(1) - 1||_inf and the law e^{(s+t)L} = e^{sL} e^{tL} for every
    pair s <= t of grid points whose sum is also on the grid.

    Grid points are independent; with ``processes`` > 1 they are evaluated in
    a process pool.
    """
    config = config or Config()
    grid = _check_grid(t_grid)
    tasks = [(L, t) for t in grid]
    if processes is None or processes <= 1:
        results = [_grid_point(task) for task in tasks]
    else:
        with Pool(processes=processes) as pool:
            results = pool.map(_grid_point, tasks)

    propagators = [r[0] for r in results]
    position = {t: k for k, t in enumerate(grid)}
    residuals = []
    for i, s in enumerate(grid):
        for j in range(i, len(grid)):
            t = grid[j]
            k = _find(position, s + t, config.tol_eq)
            if k is None:
                continue
            product = propagators[i] @ propagators[j]
            scale = max(1.0, float(np.max(np.abs(propagators[k]))))
            residuals.append((s, t, float(np.max(np.abs(propagators[k] - product))) / scale))

    report = EvolutionReport(grid, tuple(r[1] for r in results), tuple(r[2] for r in results),
                             tuple(residuals))
    logger.debug('check_semigroup: %d grid points, %d law checks', len(grid), len(residuals))
    return report


def _find(position: typing.Dict[float, int], t: float, tol: float) -> typing.Optional[int]:
    for s, k in position.items():
        if abs(s - t) <= tol * max(1.0, abs(t)):
            return k
    return None


def generator_defect(L: Generator, h: float) -> float:
    """||(e^{hL} - id)/h - L||, entrywise maximum; of order h."""
    if not h > 0:
        raise ValidationError(f"step must be positive, got {h}")
    difference = (evolve(L, h).matrix - np.eye(L.dim ** 2)) / h
    return float(np.max(np.abs(difference - L.matrix)))
