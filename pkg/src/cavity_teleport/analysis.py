"""Success probabilities, Monte Carlo estimates and timing-error sweeps."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cavity_ops import CANONICAL, BellKind, DispersiveParams
from .protocol import (
    MAXIMAL_FORMS,
    ChannelSpec,
    InputState,
    ProtocolError,
    ProtocolRunRecord,
    branch_weights,
    teleport_ghz_n,
    teleport_maximal,
    teleport_nonmaximal,
)
from .statevec import ZeroProbabilityBranch, concurrence_2q

PROTOCOLS = ("maximal", "nonmaximal", "ghz")
MAX_EXHAUSTIVE_SITES = 25


@dataclass(frozen=True)
class ProtocolParams:
    """Everything a protocol run needs besides randomness.

    ``channels`` is ignored by ``"maximal"``, holds two :class:`ChannelSpec`
    for ``"nonmaximal"``, and for ``"ghz"`` is either a list of ``n`` specs or
    one of the designators ``"maximal"`` / ``"maximal-ge"``.
    """

    input: InputState
    channels: tuple[ChannelSpec, ...] | str = ()
    n: int = 2
    dispersive: DispersiveParams = CANONICAL
    filter_offset: float = 0.0

    def __post_init__(self):
        if not isinstance(self.channels, str):
            object.__setattr__(self, "channels", tuple(self.channels))


def run_protocol(protocol_id: str, params: ProtocolParams, rng=None, *, outcomes=None,
                 photon=None) -> ProtocolRunRecord:
    p = params
    if protocol_id == "maximal":
        return teleport_maximal(p.input, rng, outcomes=outcomes, dispersive=p.dispersive)
    if protocol_id == "nonmaximal":
        if isinstance(p.channels, str) or len(p.channels) != 2:
            raise ProtocolError("nonmaximal scheme needs two ChannelSpec channels")
        return teleport_nonmaximal(p.input, *p.channels, rng, outcomes=outcomes, photon=photon,
                                   dispersive=p.dispersive, filter_offset=p.filter_offset)
    if protocol_id == "ghz":
        return teleport_ghz_n(p.input, p.n, p.channels or "maximal", rng, outcomes=outcomes,
                              photon=photon, dispersive=p.dispersive,
                              filter_offset=p.filter_offset)
    raise ProtocolError(f"unknown protocol {protocol_id!r}; choose from {PROTOCOLS}")


def _arity(protocol_id: str, params: ProtocolParams) -> tuple[int, bool, int]:
    """(pairs, filtered, register sites) for a protocol."""
    if protocol_id == "maximal":
        return 2, False, 6
    if protocol_id == "nonmaximal":
        return 2, True, 7
    if protocol_id == "ghz":
        filtered = not (isinstance(params.channels, str) or not params.channels)
        return params.n, filtered, 3 * params.n + filtered
    raise ProtocolError(f"unknown protocol {protocol_id!r}; choose from {PROTOCOLS}")


@dataclass(frozen=True)
class SuccessBreakdown:
    p_a: float
    p_b: float
    p_c: float
    p_d: float

    @property
    def total(self) -> float:
        return self.p_a + self.p_b + self.p_c + self.p_d


def analytic_success_prob(ch1: ChannelSpec, ch2: ChannelSpec) -> SuccessBreakdown:
    """Closed-form success probability of the filtered two-pair scheme.

    Each residual class is filtered down to its smaller channel product, so
    ``p_a = p_d = min(|a1 a2|, |b1 b2|)**2`` and
    ``p_b = p_c = min(|a1 b2|, |b1 a2|)**2`` (alpha ``a``, beta ``b``).
    """
    a1, b1, a2, b2 = abs(ch1.alpha), abs(ch1.beta), abs(ch2.alpha), abs(ch2.beta)
    pa = min(a1 * a2, b1 * b2) ** 2
    pb = min(a1 * b2, b1 * a2) ** 2
    return SuccessBreakdown(pa, pb, pb, pa)


def analytic_success_prob_n(channels: Sequence[ChannelSpec]) -> float:
    """n-pair generalization: one term per Phi/Psi pattern of the outcomes."""
    total = 0.0
    for pattern in itertools.product((BellKind.PhiPlus, BellKind.PsiPlus), repeat=len(channels)):
        w_a, w_b, _ = branch_weights(pattern, channels)
        total += min(w_a, w_b) ** 2
    return total


@dataclass
class ExhaustiveResult:
    success_probability: float
    total_probability: float
    branches: list[ProtocolRunRecord] = field(repr=False)

    @property
    def mean_conditional_fidelity(self) -> float:
        p = self.success_probability
        if p == 0:
            return float("nan")
        return sum(b.branch_probability * b.fidelity for b in self.branches if b.success) / p


def enumerate_branches(protocol_id: str, params: ProtocolParams) -> ExhaustiveResult:
    """Every measurement branch with nonzero probability, without sampling."""
    pairs, filtered, sites = _arity(protocol_id, params)
    if sites > MAX_EXHAUSTIVE_SITES:
        raise ProtocolError(f"register of {sites} sites exceeds {MAX_EXHAUSTIVE_SITES}")
    branches = []
    photons = (0, 1) if filtered else (None,)
    for outcomes in itertools.product(BellKind, repeat=pairs):
        for photon in photons:
            try:
                rec = run_protocol(protocol_id, params, outcomes=outcomes, photon=photon)
            except ZeroProbabilityBranch:
                continue
            branches.append(rec)
    success = math.fsum(b.branch_probability for b in branches if b.success)
    total = math.fsum(b.branch_probability for b in branches)
    return ExhaustiveResult(success, total, branches)


def exhaustive_success_prob(protocol_id: str, params: ProtocolParams) -> float:
    return enumerate_branches(protocol_id, params).success_probability


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, derived from the master seed by counter."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


@dataclass(frozen=True)
class MonteCarloResult:
    trials: int
    successes: int
    success_rate: float
    mean_conditional_fidelity: float
    min_conditional_fidelity: float
    ci95: tuple[float, float]
    seed: int


def _trial_block(args):
    protocol_id, params, seed, start, stop = args
    fids = []
    for i in range(start, stop):
        rec = run_protocol(protocol_id, params, trial_rng(seed, i))
        if rec.success:
            fids.append(rec.fidelity)
    return fids


def monte_carlo(protocol_id: str, params: ProtocolParams, trials: int, seed: int = 0,
                workers: int = 1) -> MonteCarloResult:
    """Seeded protocol repetitions.

    Trial ``i`` always uses :func:`trial_rng` ``(seed, i)``, and blocks are
    merged in trial order, so results do not depend on ``workers``. The 95%
    interval is the normal approximation.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _arity(protocol_id, params)
    nblocks = max(1, min(trials, workers * 4))
    edges = np.linspace(0, trials, nblocks + 1).astype(int)
    jobs = [(protocol_id, params, seed, int(lo), int(hi)) for lo, hi in zip(edges, edges[1:])]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_trial_block, jobs))
    else:
        parts = [_trial_block(j) for j in jobs]
    fids = [f for p in parts for f in p]
    successes = len(fids)
    rate = successes / trials
    half = 1.959963984540054 * math.sqrt(rate * (1 - rate) / trials)
    return MonteCarloResult(
        trials=trials, successes=successes, success_rate=rate,
        mean_conditional_fidelity=math.fsum(fids) / len(fids) if fids else float("nan"),
        min_conditional_fidelity=min(fids, default=float("nan")),
        ci95=(max(0.0, rate - half), min(1.0, rate + half)), seed=seed)


@dataclass(frozen=True)
class SweepPoint:
    offset: float
    mean_fidelity: float
    success_rate: float


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    points: tuple[SweepPoint, ...]
    trials: int | None
    seed: int


def _perturbed(params: ProtocolParams, parameter: str, offset: float) -> ProtocolParams:
    if parameter == "theta":
        d = params.dispersive
        return ProtocolParams(params.input, params.channels, params.n,
                              DispersiveParams(d.theta + offset, d.phi), params.filter_offset)
    if parameter == "epsilon_t":
        return ProtocolParams(params.input, params.channels, params.n, params.dispersive,
                              params.filter_offset + offset)
    raise ValueError(f"parameter must be 'theta' or 'epsilon_t', got {parameter!r}")


def timing_sensitivity(protocol_id: str, params: ProtocolParams, error_grid: Sequence[float],
                       trials: int | None = None, seed: int = 0,
                       parameter: str = "theta") -> SweepResult:
    """Fidelity and success rate with one interaction time offset.

    ``parameter="theta"`` shifts every dispersive Bell-discrimination pass,
    ``"epsilon_t"`` shifts the resonant filter. With ``trials=None`` each
    point is computed exactly by branch enumeration (probability-weighted
    mean fidelity over successful branches); otherwise by Monte Carlo.
    """
    points = []
    for off in error_grid:
        p = _perturbed(params, parameter, float(off))
        if trials is None:
            ex = enumerate_branches(protocol_id, p)
            points.append(SweepPoint(float(off), ex.mean_conditional_fidelity,
                                     ex.success_probability))
        else:
            mc = monte_carlo(protocol_id, p, trials, seed)
            points.append(SweepPoint(float(off), mc.mean_conditional_fidelity, mc.success_rate))
    return SweepResult(parameter, tuple(points), trials, seed)


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``log y = k log x + c``; returns ``(k, c)``."""
    k, c = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(k), float(c)


def swapped_pair_concurrence(record: ProtocolRunRecord) -> float:
    """Concurrence of the two receiver atoms after a successful run."""
    if not record.success:
        raise ProtocolError("concurrence is only defined for successful runs")
    return concurrence_2q(record.final_state)


__all__ = [
    "MAXIMAL_FORMS", "PROTOCOLS", "ProtocolParams", "SuccessBreakdown", "ExhaustiveResult",
    "MonteCarloResult", "SweepPoint", "SweepResult", "analytic_success_prob",
    "analytic_success_prob_n", "enumerate_branches", "exhaustive_success_prob", "fit_power_law",
    "monte_carlo", "run_protocol", "swapped_pair_concurrence", "timing_sensitivity", "trial_rng",
]
