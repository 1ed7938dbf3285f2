"""Masked-entry metrics and the mask -> solve -> score experiment loop."""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, EmptyEvaluationError, LrtcError, ParameterError
from .patterns import MissingSpec, Pattern, generate_mask
from .solver import SolverConfig, decayed_theta, missing_rate, solve
from .tensor_core import MaskTensor, Tensor3


@dataclass(frozen=True)
class Score:
    mae: float
    rmse: float
    masked_count: int


@dataclass(frozen=True)
class ImputationReport:
    mae: float
    rmse: float
    masked_count: int
    realized_missing_rate: float
    iterations: int
    converged: bool
    wall_time: float
    theta: float
    truncation_ranks: Tuple[int, int, int]
    per_mode_spn: Tuple[float, float, float]
    config_echo: Dict[str, object] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)


def score(truth, imputed, eval_mask) -> Score:
    """MAE and RMSE over entries where ``eval_mask`` is 1."""
    truth = np.asarray(truth, dtype=np.float64)
    imputed = np.asarray(imputed, dtype=np.float64)
    sel = np.asarray(eval_mask).astype(bool)
    if not truth.shape == imputed.shape == sel.shape:
        raise DimensionError(
            f"dimension mismatch: {truth.shape}, {imputed.shape}, {sel.shape}"
        )
    n = int(np.count_nonzero(sel))
    if n == 0:
        raise EmptyEvaluationError("no entry selected for scoring")
    err = truth[sel] - imputed[sel]
    return Score(
        mae=float(np.mean(np.abs(err))),
        rmse=float(np.sqrt(np.mean(err * err))),
        masked_count=n,
    )


def split_masks(native_mask: MaskTensor, generated: MaskTensor) -> Tuple[MaskTensor, MaskTensor]:
    """Solver observation mask and scoring mask.

    Scoring covers entries that exist in the source data but were
    removed by ``generated``; the two masks partition ``native_mask``.
    """
    return native_mask & generated, native_mask & generated.complement()


def run_experiment(
    data,
    native_mask: MaskTensor,
    spec: MissingSpec,
    cfg: SolverConfig,
    theta0: Optional[float] = None,
    beta: float = 0.0,
) -> ImputationReport:
    """Mask ``data``, complete it and score the artificially removed entries.

    The solver runs with ``theta = theta0 * exp(-beta * psi)`` where ``psi``
    is the missing rate of the mask it sees. ``theta0`` defaults to
    ``cfg.theta``.
    """
    data = data if isinstance(data, Tensor3) else Tensor3(data)
    if tuple(native_mask.dims) != tuple(data.dims):
        raise DimensionError(f"native mask dims {native_mask.dims} != data dims {data.dims}")
    theta0 = cfg.theta if theta0 is None else theta0

    observed, scored = split_masks(native_mask, generate_mask(data.dims, spec))
    if scored.count() == 0:
        raise EmptyEvaluationError(
            f"{spec.pattern.value} at rate {spec.rate} removes no natively observed entry"
        )
    psi = missing_rate(observed)
    run_cfg = replace(cfg, theta=decayed_theta(theta0, beta, psi))

    start = time.perf_counter()
    result = solve(data, observed, run_cfg)
    elapsed = time.perf_counter() - start

    s = score(data, result.X_hat, scored)
    echo = {f"solver.{k}": v for k, v in asdict(run_cfg).items()}
    echo.update(
        {
            "missing.pattern": spec.pattern.value,
            "missing.rate": spec.rate,
            "missing.seed": spec.seed,
            "theta0": theta0,
            "beta": beta,
        }
    )
    return ImputationReport(
        mae=s.mae,
        rmse=s.rmse,
        masked_count=s.masked_count,
        realized_missing_rate=psi,
        iterations=result.iterations,
        converged=result.converged,
        wall_time=elapsed,
        theta=run_cfg.theta,
        truncation_ranks=result.truncation_ranks,
        per_mode_spn=result.per_mode_spn,
        config_echo=echo,
    )


def compare_baselines(
    data,
    native_mask: MaskTensor,
    spec: MissingSpec,
    cfg: SolverConfig,
    theta0: float,
    beta: float,
) -> Dict[str, ImputationReport]:
    """LRTC-TSpN next to its ``p = 1`` special cases on the same mask."""
    return {
        "LRTC-TSpN": run_experiment(data, native_mask, spec, cfg, theta0, beta),
        "LRTC-TNN": run_experiment(data, native_mask, spec, replace(cfg, p=1.0), theta0, beta),
        "HaLRTC": run_experiment(data, native_mask, spec, replace(cfg, p=1.0), 0.0, 0.0),
    }


@dataclass(frozen=True)
class SweepGrid:
    p_values: Sequence[float]
    theta0_values: Sequence[float]
    beta_values: Sequence[float]
    rates: Sequence[float]
    patterns: Sequence[Pattern]
    repetitions: int = 1
    base_seed: int = 0

    def __post_init__(self):
        for name in ("p_values", "theta0_values", "beta_values", "rates", "patterns"):
            values = tuple(getattr(self, name))
            if not values:
                raise ParameterError(f"sweep grid field {name} is empty")
            object.__setattr__(self, name, values)
        object.__setattr__(self, "patterns", tuple(Pattern.parse(p) for p in self.patterns))
        if any(not 0.0 < p <= 1.0 for p in self.p_values):
            raise ParameterError("p values must lie in (0, 1]")
        if any(not 0.0 <= t <= 1.0 for t in self.theta0_values):
            raise ParameterError("theta0 values must lie in [0, 1]")
        if any(b < 0 for b in self.beta_values):
            raise ParameterError("beta values must be nonnegative")
        if any(not 0.0 < r < 1.0 for r in self.rates):
            raise ParameterError("rates must lie in (0, 1)")
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise ParameterError("repetitions must be a positive integer")

    def cells(self):
        """``(pattern, rate, p, theta0, beta, repetition)`` in emission order."""
        return itertools.product(
            self.patterns,
            self.rates,
            self.p_values,
            self.theta0_values,
            self.beta_values,
            range(self.repetitions),
        )


@dataclass(frozen=True)
class SweepRow:
    index: int
    pattern: Pattern
    rate: float
    p: float
    theta0: float
    beta: float
    repetition: int
    seed: int
    report: Optional[ImputationReport] = None
    error: Optional[str] = None


def _run_cell(args) -> SweepRow:
    index, (pattern, rate, p, theta0, beta, rep), seed, data, native, cfg = args
    row = dict(index=index, pattern=pattern, rate=rate, p=p, theta0=theta0, beta=beta,
               repetition=rep, seed=seed)
    try:
        report = run_experiment(
            data, native, MissingSpec(pattern, rate, seed), replace(cfg, p=p), theta0, beta
        )
    except LrtcError as exc:
        return SweepRow(**row, error=f"{type(exc).__name__}: {exc}")
    return SweepRow(**row, report=report)


def run_sweep(
    data,
    native_mask: MaskTensor,
    grid: SweepGrid,
    cfg: Optional[SolverConfig] = None,
    workers: int = 1,
) -> List[SweepRow]:
    """One row per grid cell, seeded ``grid.base_seed + row index``.

    A failing cell keeps its row with ``error`` set. Rows come back in
    grid order whatever ``workers`` is.
    """
    data = data if isinstance(data, Tensor3) else Tensor3(data)
    cfg = cfg or SolverConfig()
    jobs = [
        (i, cell, grid.base_seed + i, data, native_mask, cfg)
        for i, cell in enumerate(grid.cells())
    ]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_cell(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, jobs))
