"""How an operation applied before a twirl looks to the receiver.

Given a twirl ``T`` and its partial inverse ``Tinv``, an operation ``O``
has a receiver-side counterpart ``O'`` with ``O' T == T O`` whenever

    T O == T O (Tinv T),

and then ``O' = T O Tinv``. All comparisons happen on superoperators
(Frobenius norm, relative to ``||T O||``), which covers every input state
at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matrix as mx
from .errors import DimMismatch, InvalidState, TwirlkitError
from .groups import U1Rep, rep_unitaries, rep_unitary, uniform_u1
from .twirl import (
    DEFAULT_THRESHOLD,
    TwirlChannel,
    apply_twirl,
    build_twirl,
    coherence_projector,
    partial_inverse,
)

DEFAULT_TOL = 1e-10
BRS_QUADRATURE = 256


@dataclass(frozen=True, eq=False)
class RepresentabilityReport:
    representable: bool
    residual: float
    tolerance: float
    lifted: Optional[np.ndarray]
    commutation_residual: float

    def to_json(self) -> dict:
        return {"representable": self.representable, "residual": self.residual,
                "tolerance": self.tolerance,
                "commutation_residual": self.commutation_residual,
                "lifted": None if self.lifted is None else mx.matrix_to_json(self.lifted)}


@dataclass(frozen=True, eq=False)
class StateReport:
    """Per-state comparison of ``T O [rho]`` with ``O' T [rho]``.

    ``residual`` is the trace norm of the difference.
    """

    representable: bool
    residual: float
    tolerance: float
    direct: np.ndarray
    lifted: np.ndarray

    def to_json(self) -> dict:
        return {"representable": self.representable, "residual": self.residual,
                "tolerance": self.tolerance, "direct": mx.matrix_to_json(self.direct),
                "via_lift": mx.matrix_to_json(self.lifted)}


@dataclass(frozen=True, eq=False)
class CounterexampleReport:
    p: float
    b: complex
    theta: float
    sigma_prime: mx.DensityMatrix
    sigma_dprime: mx.DensityMatrix
    trace_distance: float
    closed_form_prime: np.ndarray
    closed_form_dprime: np.ndarray

    @property
    def prescription_fails(self) -> bool:
        return self.trace_distance > 1e-12

    def to_json(self) -> dict:
        return {
            "p": self.p, "b": mx.complex_to_json(self.b), "theta": self.theta,
            "sigma_prime": mx.matrix_to_json(self.sigma_prime.entries),
            "sigma_dprime": mx.matrix_to_json(self.sigma_dprime.entries),
            "trace_distance": self.trace_distance,
            "closed_form": {
                "sigma_prime": mx.matrix_to_json(self.closed_form_prime),
                "sigma_dprime": mx.matrix_to_json(self.closed_form_dprime),
                "trace_distance": abs(self.b.imag * np.sin(self.theta)),
            },
            "prescription_fails": self.prescription_fails,
        }


@dataclass(frozen=True, eq=False)
class IdentificationReport:
    identified: bool
    residual: float
    both_representable: bool


def _check_dims(op: mx.KrausOperation, twirl: TwirlChannel):
    if op.dim != twirl.dim:
        raise DimMismatch(f"operation has dim {op.dim}, twirl has dim {twirl.dim}")


def _relative(diff, ref) -> float:
    scale = float(np.linalg.norm(ref))
    d = float(np.linalg.norm(diff))
    return d / scale if scale > 0 else d


def twirled_operation(op: mx.KrausOperation, twirl: TwirlChannel,
                      threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Superoperator ``T O Tinv``; it only commutes with the twirl for representable ops."""
    _check_dims(op, twirl)
    inv = partial_inverse(twirl, threshold)
    return twirl.superop() @ mx.kraus_to_superop(op) @ inv.superop()


def check_representable(op: mx.KrausOperation, twirl: TwirlChannel,
                        threshold: float = DEFAULT_THRESHOLD,
                        tol: float = DEFAULT_TOL) -> RepresentabilityReport:
    _check_dims(op, twirl)
    t = twirl.superop()
    to = t @ mx.kraus_to_superop(op)
    proj = coherence_projector(twirl, threshold)
    residual = _relative(to - to @ proj, to)
    lift = twirled_operation(op, twirl, threshold)
    commutation = _relative(lift @ t - to, to)
    ok = residual <= tol
    return RepresentabilityReport(ok, residual, tol, lift if ok else None, commutation)


def check_representable_for_state(op: mx.KrausOperation, twirl: TwirlChannel, rho,
                                  threshold: float = DEFAULT_THRESHOLD,
                                  tol: float = DEFAULT_TOL) -> StateReport:
    """Does ``O' T [rho] == T O [rho]`` hold for this particular state?"""
    _check_dims(op, twirl)
    r = np.asarray(rho, dtype=complex)
    direct = apply_twirl(twirl, mx.apply_kraus(op, r))
    lift = twirled_operation(op, twirl, threshold)
    via_lift = mx.apply_superop(lift, apply_twirl(twirl, r))
    residual = mx.trace_norm(direct - via_lift)
    return StateReport(residual <= tol, residual, tol, direct, via_lift)


def brs_prescription(op: mx.KrausOperation, rep, n_quad: int = BRS_QUADRATURE) -> np.ndarray:
    """Group average ``int dg U_g O U_g^-1`` as a superoperator.

    U(1) uses an ``n_quad``-point uniform rule, exact while twice the largest
    charge difference stays below ``n_quad``. Finite groups are summed exactly.
    """
    if op.dim != rep.dim:
        raise DimMismatch(f"operation has dim {op.dim}, rep has dim {rep.dim}")
    s_op = mx.kraus_to_superop(op)
    if isinstance(rep, U1Rep):
        us = rep_unitaries(rep, 2 * np.pi * np.arange(n_quad) / n_quad)
        inv = us.conj().transpose(0, 2, 1)
    else:
        us = rep.unitaries
        inv = us[rep.group.inverse]
    fwd = np.einsum("gab,gcd->gacbd", us.conj(), us).reshape(len(us), op.dim ** 2, op.dim ** 2)
    bwd = np.einsum("gab,gcd->gacbd", inv.conj(), inv).reshape(len(us), op.dim ** 2, op.dim ** 2)
    return np.mean(fwd @ s_op @ bwd, axis=0)


def operations_identified(op1: mx.KrausOperation, op2: mx.KrausOperation,
                          twirl: TwirlChannel, threshold: float = DEFAULT_THRESHOLD,
                          tol: float = DEFAULT_TOL) -> IdentificationReport:
    """Whether the receiver sees the same lifted operation for ``op1`` and ``op2``."""
    lift1 = twirled_operation(op1, twirl, threshold)
    lift2 = twirled_operation(op2, twirl, threshold)
    residual = _relative(lift1 - lift2, lift1)
    both = (check_representable(op1, twirl, threshold, tol).representable
            and check_representable(op2, twirl, threshold, tol).representable)
    return IdentificationReport(residual <= tol, residual, both)


def counterexample_report(p: float, b: complex, theta: float) -> CounterexampleReport:
    """Qubit x-rotation under a total z-twirl, both ways around the square.

    ``sigma_prime`` twirls after the rotation; ``sigma_dprime`` applies the
    group-averaged rotation to the twirled input.
    """
    try:
        rho = mx.validate_density(mx.qubit_state(p, b))
    except TwirlkitError as exc:
        raise InvalidState(f"(p={p}, b={b}) is not a qubit state: {exc}") from exc
    twirl = build_twirl(uniform_u1(), U1Rep(np.array([0, 1])))
    op = mx.KrausOperation.unitary(mx.x_rotation(theta))
    sigma_prime = apply_twirl(twirl, mx.apply_kraus(op, rho))
    brs = brs_prescription(op, twirl.rep)
    sigma_dprime = mx.apply_superop(brs, apply_twirl(twirl, rho))
    # cleanup of quadrature roundoff before validation
    sigma_prime = (sigma_prime + sigma_prime.conj().T) / 2
    sigma_dprime = (sigma_dprime + sigma_dprime.conj().T) / 2
    c, s, ib = np.cos(theta), np.sin(theta), complex(b).imag
    closed_prime = 0.5 * np.diag([1 + (2 * p - 1) * c - 2 * ib * s,
                                  1 - (2 * p - 1) * c + 2 * ib * s]).astype(complex)
    closed_dprime = 0.5 * np.diag([1 + (2 * p - 1) * c, 1 - (2 * p - 1) * c]).astype(complex)
    return CounterexampleReport(
        float(p), complex(b), float(theta),
        mx.validate_density(sigma_prime), mx.validate_density(sigma_dprime),
        mx.trace_distance(sigma_prime, sigma_dprime), closed_prime, closed_dprime)


def delta_conjugation(op: mx.KrausOperation, rep, g) -> np.ndarray:
    """``U_g O U_g^-1`` as a superoperator, the lift for a perfectly known channel."""
    u = rep_unitary(rep, g)
    return mx.unitary_superop(u) @ mx.kraus_to_superop(op) @ mx.unitary_superop(u.conj().T)
