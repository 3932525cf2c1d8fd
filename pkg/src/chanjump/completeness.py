"""Record completeness of state dynamics.

The state generator only fixes per-transition total rates, so any channel
redistribution in ker P (the generator-invisible space) leaves it unchanged.
A set of records is complete when its increment matrix D annihilates that
kernel; otherwise some record direction is lost, and ``completeness_test``
returns how many (the rank of D restricted to ker P) together with the worst
witness direction.  ``remaining_kernel`` and ``predictability_test`` answer
the follow-up question: given some measured records, which further records
are already pinned down?

``quotient_form`` builds the effective quadratic fluctuation cost of the
transition totals, obtained by minimizing a diagonal channel-current cost
over all redistributions producing the same totals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import DEFAULT_TOL, KernelBasis, kernel_basis, stationary_state
from .network import ChannelNetwork, RecordMap, build_generator, build_projection

__all__ = [
    "CompletenessVerdict",
    "QuotientForm",
    "generator_preserving_basis",
    "completeness_test",
    "remaining_kernel",
    "predictability_test",
    "quotient_form",
    "first_order_record_change",
    "velocity_only_kernel_dim",
]


@dataclass(frozen=True)
class CompletenessVerdict:
    """Outcome of a kernel test.

    ``witness`` is a unit channel-space vector with P c = 0 and D c != 0,
    present exactly when the verdict is incomplete; ``witness_image`` is its
    record image D c.  ``lost_rank`` counts the independent record directions
    not reconstructible from state dynamics.
    """

    complete: bool
    witness: np.ndarray | None
    lost_rank: int
    witness_image: np.ndarray | None = None


@dataclass(frozen=True)
class QuotientForm:
    """Quadratic cost of transition-total fluctuations.

    Q is the pseudoinverse of P R_inv P^T for a positive-diagonal channel
    covariance R_inv; cost(u) = u^T Q u / 2.
    """

    Q: np.ndarray
    R_inv_source: str

    def cost(self, u) -> float:
        uv = np.asarray(u, dtype=float)
        return 0.5 * float(uv @ self.Q @ uv)


def _record_matrix(D, n_channels: int, what: str) -> np.ndarray:
    A = D.D if isinstance(D, RecordMap) else np.asarray(D, dtype=float)
    A = A.reshape(0, n_channels) if A.size == 0 else np.atleast_2d(A)
    if A.shape[1] != n_channels:
        raise ValidationError(
            f"{what} has {A.shape[1]} columns, expected {n_channels} channels"
        )
    return A


def generator_preserving_basis(net: ChannelNetwork, tol: float = DEFAULT_TOL) -> KernelBasis:
    """Orthonormal basis of ker P, the generator-invisible channel space.

    Its dimension is exactly E - E0: one independent redistribution per
    excess channel on a transition.
    """
    proj = build_projection(net)
    return kernel_basis(proj.P, tol)


def _fix_sign(c: np.ndarray) -> np.ndarray:
    for x in c:
        if abs(x) > 1e-12:
            return c if x > 0 else -c
    return c


def _kernel_verdict(D: np.ndarray, K: KernelBasis, scale_tol: float) -> CompletenessVerdict:
    """Verdict for D restricted to the kernel spanned by K's columns.

    The threshold is relative to the largest singular value of D itself, so
    an exactly annihilated kernel compares against the record scale rather
    than against roundoff noise.
    """
    if K.dim == 0 or D.shape[0] == 0:
        return CompletenessVerdict(complete=True, witness=None, lost_rank=0)
    smax_D = float(np.linalg.svd(D, compute_uv=False)[0]) if D.size else 0.0
    if smax_D == 0.0:
        return CompletenessVerdict(complete=True, witness=None, lost_rank=0)
    M = D @ K.vectors
    U, s, Vh = np.linalg.svd(M)
    thresh = scale_tol * smax_D
    lost = int(np.sum(s > thresh))
    if lost == 0:
        return CompletenessVerdict(complete=True, witness=None, lost_rank=0)
    c = _fix_sign(K.vectors @ Vh[0])
    c.flags.writeable = False
    image = D @ c
    image.flags.writeable = False
    return CompletenessVerdict(complete=False, witness=c, lost_rank=lost, witness_image=image)


def completeness_test(net: ChannelNetwork, D, tol: float = DEFAULT_TOL) -> CompletenessVerdict:
    """Are the records of D determined by the state generator alone?

    Complete iff D c = 0 for every c in ker P, equivalently iff every row of
    D lies in the row space of P.  When incomplete, the witness is the kernel
    direction with the largest record image (sign fixed so its first nonzero
    component is positive).
    """
    Dm = _record_matrix(D, net.n_channels, "record map")
    K = generator_preserving_basis(net, tol)
    return _kernel_verdict(Dm, K, tol)


def remaining_kernel(net: ChannelNetwork, D_meas, tol: float = DEFAULT_TOL) -> KernelBasis:
    """Generator-invisible directions not resolved by the measured records.

    The kernel of the stacked matrix [P; D_meas]; empty measured rows give
    back the full generator-preserving basis.
    """
    Dm = _record_matrix(D_meas, net.n_channels, "measured record map")
    proj = build_projection(net)
    stacked = np.vstack([proj.P, Dm])
    return kernel_basis(stacked, tol)


def predictability_test(
    net: ChannelNetwork, D_meas, D_tar, tol: float = DEFAULT_TOL
) -> CompletenessVerdict:
    """Is the target record fixed once the generator and D_meas are known?"""
    Dt = _record_matrix(D_tar, net.n_channels, "target record map")
    K = remaining_kernel(net, D_meas, tol)
    return _kernel_verdict(Dt, K, tol)


def quotient_form(net: ChannelNetwork, R_inv=None) -> QuotientForm:
    """Effective quadratic cost of transition-current fluctuations.

    R_inv is the diagonal channel-current covariance; by default the
    stationary channel traffic rate_e * p_from(e), the independent-Poisson
    choice.  Supplying R_inv (a positive diagonal, as a vector or a diagonal
    matrix) overrides it.
    """
    e = net.n_channels
    if R_inv is None:
        p = stationary_state(build_generator(net)).p
        diag = np.array([ch.rate * p[ch.from_state] for ch in net.channels])
        source = "stationary_traffic"
        if not np.all(diag > 0):
            raise ValidationError(
                "stationary traffic is not strictly positive; supply R_inv explicitly"
            )
    else:
        A = np.asarray(R_inv, dtype=float)
        if A.ndim == 2:
            if A.shape != (e, e) or np.any(A != np.diag(np.diag(A))):
                raise ValidationError("R_inv must be diagonal of size E x E")
            diag = np.diag(A).copy()
        elif A.ndim == 1 and A.size == e:
            diag = A.copy()
        else:
            raise ValidationError(f"R_inv must be a length-{e} diagonal")
        source = "user_supplied"
        if not np.all(diag > 0):
            raise ValidationError("R_inv diagonal must be strictly positive")
    P = build_projection(net).P
    G = (P * diag) @ P.T
    Q = np.linalg.pinv(G, rcond=DEFAULT_TOL)
    Q = 0.5 * (Q + Q.T)
    Q.flags.writeable = False
    return QuotientForm(Q=Q, R_inv_source=source)


def first_order_record_change(net: ChannelNetwork, c, p, mu: str) -> float:
    """Record-rate change, to first order, under the rate perturbation c.

    Evaluates sum_e d_e c_e p_from(e); zero for every p exactly when the
    record is insensitive to the redistribution c.
    """
    if mu not in net.records:
        raise ValidationError(f"unknown record name {mu!r}")
    cv = np.asarray(c, dtype=float)
    if cv.shape != (net.n_channels,):
        raise ValidationError(
            f"perturbation has length {cv.size}, expected {net.n_channels} channels"
        )
    pv = np.asarray(p, dtype=float)
    if pv.shape != (net.n_states,):
        raise ValidationError("probability vector has wrong length")
    return float(
        np.sum([ch.increment(mu) * cv[e] * pv[ch.from_state] for e, ch in enumerate(net.channels)])
    )


def velocity_only_kernel_dim(net: ChannelNetwork, tol: float = DEFAULT_TOL) -> int:
    """Dimension of ker(BP): hidden directions under velocity-only observation.

    Informational count only.  Knowing just an instantaneous state velocity
    (instead of the full generator) additionally hides closed loops through
    the transition network; this reports the combined dimension.
    """
    proj = build_projection(net)
    K = kernel_basis(proj.B @ proj.P, tol)
    return K.dim
