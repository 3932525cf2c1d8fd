"""Continuous-time Monte Carlo of channel-resolved jump trajectories.

The sampler is plain Gillespie: exponential waiting time at the current
state's total escape rate, then a channel drawn proportionally to its rate.
Record totals are accumulated per channel (each jump of channel e adds its
fixed increment), so a trajectory's totals equal jump_counts . D exactly.

Reproducibility contract: trajectory k uses numpy's PCG64 generator seeded
with SeedSequence((master_seed, k)).  Trajectories are mutually independent
and aggregated in trajectory order, so results are identical bit for bit no
matter how the work would be scheduled; the PCG64 output stream is pinned as
part of the contract.
"""

from __future__ import annotations

import math
import warnings
from bisect import bisect_right
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import NumericalError, ValidationError
from .fcs import CumulantReport
from .linalg import stationary_state
from .network import ChannelNetwork, build_generator

__all__ = ["SimConfig", "TrajectoryStats", "simulate", "empirical_cumulants"]

_BLOCK = 4096  # random numbers drawn per refill; fixed, part of the stream contract


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters.

    Exactly one of ``t_max`` (observation window per trajectory) or
    ``max_jumps`` (jump budget) must be set.  ``initial`` is a state index, a
    probability vector to sample from, or None for the stationary state.
    ``burn_in`` simulated time is discarded before accumulation starts.
    """

    n_trajectories: int
    seed: int
    t_max: float | None = None
    max_jumps: int | None = None
    initial: int | Sequence[float] | None = None
    burn_in: float = 0.0

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValidationError("n_trajectories must be >= 1")
        if (self.t_max is None) == (self.max_jumps is None):
            raise ValidationError("set exactly one of t_max and max_jumps")
        if self.t_max is not None and not self.t_max > 0:
            raise ValidationError("t_max must be > 0")
        if self.max_jumps is not None and self.max_jumps < 1:
            raise ValidationError("max_jumps must be >= 1")
        if self.burn_in < 0:
            raise ValidationError("burn_in must be >= 0")


@dataclass(frozen=True)
class TrajectoryStats:
    """Accumulated outcome of one trajectory.

    ``totals`` are the record sums over the accumulation window, ``elapsed``
    its duration (the full window even if the walker got stuck in an
    absorbing state, in which case ``absorbed`` is set), and ``occupation``
    the time spent per state.
    """

    totals: dict[str, float]
    jump_counts: np.ndarray
    elapsed: float
    n_jumps: int
    absorbed: bool
    occupation: np.ndarray

    def rates(self) -> dict[str, float]:
        """Record totals per unit time (nan if no time elapsed)."""
        if self.elapsed <= 0.0:
            return {k: math.nan for k in self.totals}
        return {k: v / self.elapsed for k, v in self.totals.items()}


class _Stream:
    """Blocked draws from one trajectory's generator, in a fixed order."""

    def __init__(self, gen: np.random.Generator):
        self.gen = gen
        self._exp: list[float] = []
        self._uni: list[float] = []
        self._i = _BLOCK

    def refill(self) -> None:
        self._exp = self.gen.exponential(size=_BLOCK).tolist()
        self._uni = self.gen.random(size=_BLOCK).tolist()
        self._i = 0

    def next_pair(self) -> tuple[float, float]:
        if self._i >= _BLOCK:
            self.refill()
        i = self._i
        self._i = i + 1
        return self._exp[i], self._uni[i]


def _state_tables(net: ChannelNetwork):
    """Per-state channel ids and cumulative rate thresholds."""
    by_state: list[list[int]] = [[] for _ in net.states]
    for e, ch in enumerate(net.channels):
        by_state[ch.from_state].append(e)
    cums, escapes = [], []
    for s in range(net.n_states):
        acc, cl = 0.0, []
        for e in by_state[s]:
            acc += net.channels[e].rate
            cl.append(acc)
        cums.append(cl)
        escapes.append(acc)
    return by_state, cums, escapes


def _initial_sampler(net: ChannelNetwork, cfg: SimConfig):
    if isinstance(cfg.initial, (int, np.integer)):
        idx = int(cfg.initial)
        if not (0 <= idx < net.n_states):
            raise ValidationError(f"initial state {idx} out of range")
        return idx, None
    if cfg.initial is None:
        try:
            p = stationary_state(build_generator(net)).p
        except NumericalError:
            raise ValidationError(
                "network is not ergodic; pass an explicit initial state or distribution"
            ) from None
    else:
        p = np.asarray(cfg.initial, dtype=float)
        if p.shape != (net.n_states,) or p.min() < 0 or abs(p.sum() - 1.0) > 1e-9:
            raise ValidationError("initial must be a probability vector over the states")
    return None, np.cumsum(p).tolist()


def _strongly_connected(net: ChannelNetwork) -> bool:
    """Is every state reachable from every other along positive-rate channels?"""
    fwd: list[list[int]] = [[] for _ in net.states]
    bwd: list[list[int]] = [[] for _ in net.states]
    for ch in net.channels:
        if ch.rate > 0:
            fwd[ch.from_state].append(ch.to_state)
            bwd[ch.to_state].append(ch.from_state)

    def reaches_all(adj):
        seen = {0}
        stack = [0]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == net.n_states

    return reaches_all(fwd) and reaches_all(bwd)


def simulate(net: ChannelNetwork, cfg: SimConfig, dump: IO[str] | None = None) -> list[TrajectoryStats]:
    """Run independent trajectories and collect per-trajectory statistics.

    A state without outgoing rate ends the trajectory early (flagged
    absorbed); in the fixed-window mode the remaining time still counts as
    occupation of that state.  ``dump`` receives one "time,channel,state"
    line per jump, prefixed by a "# trajectory k" line per trajectory.
    """
    for ch in net.channels:
        if not math.isfinite(ch.rate):
            raise ValidationError("all rates must be finite")
    if not _strongly_connected(net):
        warnings.warn("simulating a non-ergodic network", stacklevel=2)
    fixed_initial, init_cum = _initial_sampler(net, cfg)
    by_state, cums, escapes = _state_tables(net)
    to_state = [ch.to_state for ch in net.channels]
    n_channels = net.n_channels
    time_mode = cfg.t_max is not None
    horizon = cfg.t_max if time_mode else math.inf
    jump_budget = cfg.max_jumps if cfg.max_jumps is not None else None

    results: list[TrajectoryStats] = []
    for k in range(cfg.n_trajectories):
        gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence((cfg.seed, k))))
        stream = _Stream(gen)
        if fixed_initial is not None:
            s = fixed_initial
        else:
            u = gen.random()
            s = bisect_right(init_cum, u)
            if s >= net.n_states:
                s = net.n_states - 1
        # burn-in: same dynamics, nothing recorded
        t = 0.0
        absorbed = False
        while t < cfg.burn_in:
            esc = escapes[s]
            if esc <= 0.0:
                absorbed = True
                break
            x, u = stream.next_pair()
            dt = x / esc
            if t + dt > cfg.burn_in:
                break
            t += dt
            cl = cums[s]
            j = bisect_right(cl, u * esc)
            if j >= len(cl):
                j = len(cl) - 1
            s = to_state[by_state[s][j]]

        if dump is not None:
            dump.write(f"# trajectory {k}\n")
        counts = [0] * n_channels
        occupation = [0.0] * net.n_states
        t = 0.0
        n_jumps = 0
        while True:
            esc = escapes[s]
            if esc <= 0.0:
                absorbed = True
                if time_mode:
                    occupation[s] += horizon - t
                    t = horizon
                break
            x, u = stream.next_pair()
            dt = x / esc
            if time_mode and t + dt > horizon:
                occupation[s] += horizon - t
                t = horizon
                break
            t += dt
            occupation[s] += dt
            cl = cums[s]
            j = bisect_right(cl, u * esc)
            if j >= len(cl):
                j = len(cl) - 1
            e = by_state[s][j]
            counts[e] += 1
            n_jumps += 1
            s = to_state[e]
            if dump is not None:
                dump.write(f"{t!r},{e},{s}\n")
            if jump_budget is not None and n_jumps >= jump_budget:
                break

        count_arr = np.array(counts, dtype=float)
        totals = {
            rec: math.fsum(
                counts[e] * net.channels[e].increment(rec)
                for e in range(n_channels)
                if counts[e]
            )
            for rec in net.records
        }
        occ = np.array(occupation)
        count_arr.flags.writeable = False
        occ.flags.writeable = False
        results.append(
            TrajectoryStats(
                totals=totals,
                jump_counts=count_arr,
                elapsed=t,
                n_jumps=n_jumps,
                absorbed=absorbed,
                occupation=occ,
            )
        )
    return results


def empirical_cumulants(stats: Sequence[TrajectoryStats]) -> CumulantReport:
    """Estimate means and zero-frequency noise from trajectory totals.

    Means pool totals over pooled time; the noise matrix is the
    across-trajectory covariance of equal-window totals divided by the
    window.  Standard errors come from 10 contiguous trajectory batches
    (2 when there are fewer than 20 trajectories).
    """
    if len(stats) < 2:
        raise ValidationError("need at least 2 trajectories to estimate cumulants")
    records = tuple(stats[0].totals.keys())
    T = stats[0].elapsed
    if any(abs(st.elapsed - T) > 1e-12 * max(1.0, T) for st in stats):
        raise ValidationError("noise estimation requires equal observation windows")
    X = np.array([[st.totals[rec] for rec in records] for st in stats])
    n = len(stats)
    total_time = math.fsum(st.elapsed for st in stats)
    means = {rec: math.fsum(X[:, i]) / total_time for i, rec in enumerate(records)}
    noise = np.cov(X, rowvar=False, ddof=1).reshape(len(records), len(records)) / T

    per_rate = X / T
    mean_errors = {
        rec: float(np.std(per_rate[:, i], ddof=1) / math.sqrt(n))
        for i, rec in enumerate(records)
    }
    n_batches = 10 if n >= 20 else 2
    edges = np.linspace(0, n, n_batches + 1, dtype=int)
    batch_S = []
    for b in range(n_batches):
        chunk = X[edges[b]:edges[b + 1]]
        if len(chunk) >= 2:
            batch_S.append(np.cov(chunk, rowvar=False, ddof=1).reshape(len(records), len(records)) / T)
    noise_errors = (
        np.std(np.array(batch_S), axis=0, ddof=1) / math.sqrt(len(batch_S))
        if len(batch_S) >= 2
        else np.full((len(records), len(records)), np.nan)
    )
    return CumulantReport(
        records=records,
        means=means,
        noise=noise,
        method="monte_carlo",
        mean_errors=mean_errors,
        noise_errors=noise_errors,
    )
