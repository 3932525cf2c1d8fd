"""Full counting statistics of record currents.

The tilted generator multiplies every channel rate by exp(sum of counting
fields times that channel's record increments) while keeping the untilted
escape rates on the diagonal, so the zero-field matrix is the plain state
generator.  Long-time cumulants come from its dominant eigenvalue; the mean
and zero-frequency noise also have closed forms in terms of the stationary
state and the Drazin inverse, which is what ``mean_currents`` and
``noise_matrix`` evaluate.  ``cumulants_fd`` is the finite-difference
cross-check on the dominant eigenvalue.

Sign convention: a counting field chi on record mu weights a channel by
exp(chi * d) where d is the channel's increment for mu.  For the dot
networks built by :mod:`chanjump.dot`, whose entering channels carry heat
increment -(eps - mu_r), this reproduces the usual heat-counting weights
exp(-chi (eps - mu_r)) for electrons entering the dot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import NumericalError, ValidationError
from .linalg import drazin_inverse, stationary_state
from .network import ChannelNetwork, build_generator

__all__ = [
    "CumulantReport",
    "tilted_generator",
    "tilt_derivatives",
    "mean_currents",
    "noise_matrix",
    "scgf",
    "analytic_cumulants",
    "cumulants_fd",
    "tilted_null_variation",
]

_MAX_EXPONENT = 700.0  # exp overflow threshold for doubles


@dataclass(frozen=True)
class CumulantReport:
    """First two record cumulants with provenance.

    ``noise`` is the symmetric zero-frequency noise matrix in the order given
    by ``records``.  ``method`` is one of "analytic", "finite_difference",
    "monte_carlo"; the error fields are populated for Monte Carlo only.
    """

    records: tuple[str, ...]
    means: dict[str, float]
    noise: np.ndarray
    method: str
    mean_errors: dict[str, float] | None = None
    noise_errors: np.ndarray | None = None


def _check_fields(net: ChannelNetwork, chi: Mapping[str, float]) -> None:
    declared = set(net.records)
    for key in chi:
        if key not in declared:
            raise ValidationError(f"unknown record name {key!r} in counting field")


def _channel_exponent(ch, chi: Mapping[str, float]) -> float:
    return math.fsum(chi_val * ch.increment(rec) for rec, chi_val in chi.items())


def tilted_generator(net: ChannelNetwork, chi: Mapping[str, float]) -> np.ndarray:
    """Generator with counting-field weights on the off-diagonal entries.

    Off-diagonal (n, m) sums rate * exp(chi . d) over channels m -> n; the
    diagonal keeps the untilted escape rates, so chi = 0 returns exactly the
    state generator.
    """
    _check_fields(net, chi)
    n = net.n_states
    base = build_generator(net).matrix
    M = np.array(base)
    off: dict[tuple[int, int], list[float]] = {}
    for ch in net.channels:
        x = _channel_exponent(ch, chi)
        if x > _MAX_EXPONENT:
            raise NumericalError(
                f"counting-field exponent {x:g} overflows; use smaller fields"
            )
        off.setdefault((ch.to_state, ch.from_state), []).append(ch.rate * math.exp(x))
    for (i, j), terms in off.items():
        M[i, j] = math.fsum(terms)
    return M


def tilt_derivatives(net: ChannelNetwork, mu: str, nu: str) -> tuple[np.ndarray, np.ndarray]:
    """First and mixed second field derivatives of the tilted generator at 0.

    Returns (L_mu, L_munu) with off-diagonal entries sum(w d_mu) and
    sum(w d_mu d_nu); diagonals are zero since escape rates are untilted.
    """
    for rec in (mu, nu):
        if rec not in net.records:
            raise ValidationError(f"unknown record name {rec!r}")
    n = net.n_states
    L1 = np.zeros((n, n))
    L2 = np.zeros((n, n))
    for ch in net.channels:
        dmu = ch.increment(mu)
        dnu = ch.increment(nu)
        L1[ch.to_state, ch.from_state] += ch.rate * dmu
        L2[ch.to_state, ch.from_state] += ch.rate * dmu * dnu
    return L1, L2


def _first_derivative(net: ChannelNetwork, mu: str) -> np.ndarray:
    n = net.n_states
    L1 = np.zeros((n, n))
    for ch in net.channels:
        L1[ch.to_state, ch.from_state] += ch.rate * ch.increment(mu)
    return L1


def mean_currents(net: ChannelNetwork) -> dict[str, float]:
    """Stationary mean rate of every declared record."""
    p = stationary_state(build_generator(net)).p
    one = np.ones(net.n_states)
    return {rec: float(one @ _first_derivative(net, rec) @ p) for rec in net.records}


def noise_matrix(net: ChannelNetwork) -> np.ndarray:
    """Zero-frequency record-noise matrix at stationarity.

    S_munu = 1.L_munu.p - 1.(L_mu R L_nu + L_nu R L_mu).p with R the Drazin
    inverse; symmetric and positive semidefinite.
    """
    L = build_generator(net)
    ss = stationary_state(L)
    R = drazin_inverse(L, ss)
    p = ss.p
    one = np.ones(net.n_states)
    q = len(net.records)
    firsts = [_first_derivative(net, rec) for rec in net.records]
    S = np.zeros((q, q))
    for i in range(q):
        for j in range(i, q):
            _, Lij = tilt_derivatives(net, net.records[i], net.records[j])
            val = one @ Lij @ p - one @ (firsts[i] @ R @ firsts[j] + firsts[j] @ R @ firsts[i]) @ p
            S[i, j] = val
            S[j, i] = val
    return S


def scgf(net: ChannelNetwork, chi: Mapping[str, float]) -> float:
    """Dominant eigenvalue of the tilted generator (scaled CGF).

    Real and simple for irreducible networks; zero at chi = 0.
    """
    M = tilted_generator(net, chi)
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed on tilted generator: {exc}") from exc
    k = int(np.argmax(ev.real))
    lam = ev[k]
    scale = max(1.0, float(np.abs(M).max()))
    if abs(lam.imag) > 1e-9 * scale:
        raise NumericalError(
            f"dominant eigenvalue has imaginary part {lam.imag:g}; network may be reducible"
        )
    return float(lam.real)


def analytic_cumulants(net: ChannelNetwork) -> CumulantReport:
    return CumulantReport(
        records=net.records,
        means=mean_currents(net),
        noise=noise_matrix(net),
        method="analytic",
    )


def cumulants_fd(net: ChannelNetwork, h: float = 1e-4) -> CumulantReport:
    """Means and noise from central differences of the dominant eigenvalue.

    First derivatives use the two-point stencil, the noise diagonal the
    three-point stencil, and mixed entries the four-point stencil.
    """
    stationary_state(build_generator(net))  # fail early on non-ergodic input
    recs = net.records
    q = len(recs)

    def lam(fields: dict[str, float]) -> float:
        return scgf(net, fields)

    means = {}
    for rec in recs:
        means[rec] = (lam({rec: h}) - lam({rec: -h})) / (2 * h)
    S = np.zeros((q, q))
    for i, ri in enumerate(recs):
        S[i, i] = (lam({ri: h}) - 2 * lam({}) + lam({ri: -h})) / h**2
        for j in range(i + 1, q):
            rj = recs[j]
            val = (
                lam({ri: h, rj: h})
                - lam({ri: h, rj: -h})
                - lam({ri: -h, rj: h})
                + lam({ri: -h, rj: -h})
            ) / (4 * h**2)
            S[i, j] = val
            S[j, i] = val
    return CumulantReport(records=recs, means=means, noise=S, method="finite_difference")


def tilted_null_variation(
    net: ChannelNetwork, c, chi: Mapping[str, float]
) -> np.ndarray:
    """First-order change of the tilted generator under a rate perturbation c.

    Off-diagonal entry (n, m) gets sum over channels m -> n of c_e exp(chi .
    d_e); the diagonal gets the (untilted) escape-rate change, which vanishes
    exactly when c preserves per-transition totals, i.e. for every c in
    ker P.
    """
    _check_fields(net, chi)
    cv = np.asarray(c, dtype=float)
    if cv.shape != (net.n_channels,):
        raise ValidationError(
            f"perturbation has length {cv.size}, expected {net.n_channels} channels"
        )
    n = net.n_states
    M = np.zeros((n, n))
    for e, ch in enumerate(net.channels):
        x = _channel_exponent(ch, chi)
        if x > _MAX_EXPONENT:
            raise NumericalError(
                f"counting-field exponent {x:g} overflows; use smaller fields"
            )
        M[ch.to_state, ch.from_state] += cv[e] * math.exp(x)
        M[ch.from_state, ch.from_state] -= cv[e]
    return M
