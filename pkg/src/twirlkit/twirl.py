"""Twirling channels: construction, application, composition and partial inversion.

For a U(1) representation with charges ``lam`` the twirl acts entrywise,

    T_w[X][m, n] = w_{lam_m - lam_n} * X[m, n],

so it is stored as the Hadamard mask ``M[m, n] = w_{lam_m - lam_n}``.  Finite
groups whose unitaries are all diagonal get the same treatment. Any other
finite representation is stored as the superoperator
``sum_g w(g) conj(U_g) (x) U_g``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matrix as mx
from .errors import DimMismatch, MalformedInput, NotCPTP, RepMismatch, UnsupportedTwirl
from .groups import (
    Density,
    Rep,
    U1Rep,
    check_variants,
    convolve,
    density_to_json,
    is_uniform,
    rep_to_json,
)

DEFAULT_THRESHOLD = 1e-9
IDEMPOTENCE_TOL = 1e-10
CPTP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TwirlChannel:
    """An immutable twirl. Exactly one of ``mask`` / ``superop_matrix`` is primary;
    ``superop()`` is always available."""

    rep: Rep
    density: Density
    mask: Optional[np.ndarray]
    superop_matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def form(self) -> str:
        return "abelian_mask" if self.mask is not None else "superop"

    def superop(self) -> np.ndarray:
        return self.superop_matrix

    def __call__(self, m) -> np.ndarray:
        return apply_twirl(self, m)


@dataclass(frozen=True, eq=False)
class PartialInverse:
    """Partial inversion of a twirl: reciprocal mask entries where ``|w| >= threshold``.

    Not positive in general, so it is only ever used as an intermediate map.
    """

    base: TwirlChannel
    threshold: float
    mask: Optional[np.ndarray]
    superop_matrix: np.ndarray

    def superop(self) -> np.ndarray:
        return self.superop_matrix

    def __call__(self, m) -> np.ndarray:
        a = np.asarray(m, dtype=complex)
        if self.mask is not None:
            return self.mask * a
        return mx.apply_superop(self.superop_matrix, a)


def _readonly(a):
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def abelian_mask(density: Density, rep: Rep) -> np.ndarray:
    if isinstance(rep, U1Rep):
        diffs = rep.charge_differences()
        k = max(density.max_k, rep.max_difference())
        coeffs = density.padded(k)
        return coeffs[diffs + k]
    # diagonal finite rep: M[m, n] = sum_g w(g) u_g[m] conj(u_g[n])
    phases = np.diagonal(rep.unitaries, axis1=1, axis2=2)
    return np.einsum("g,gm,gn->mn", density.probs, phases, phases.conj())


def build_twirl(density: Density, rep: Rep) -> TwirlChannel:
    """Twirl ``X -> int dg w(g) U_g X U_g^dag`` for a density and a representation.

    The result is checked to be completely positive and trace preserving.
    """
    check_variants(density, rep)
    if isinstance(rep, U1Rep) or rep.is_diagonal():
        mask = abelian_mask(density, rep)
        s = mx.mask_superop(mask)
        mask = _readonly(mask)
    else:
        us = rep.unitaries
        s = np.einsum("g,gab,gcd->acbd", density.probs, us.conj(), us).reshape(
            rep.dim ** 2, rep.dim ** 2)
        mask = None
    choi = mx.choi_matrix(s)
    min_eig = mx.choi_min_eigenvalue(choi)
    tp_err = mx.choi_trace_error(choi)
    if min_eig < -CPTP_TOL or tp_err > CPTP_TOL:
        raise NotCPTP(f"twirl is not CPTP (Choi min eigenvalue {min_eig:.3e}, "
                      f"trace error {tp_err:.3e}); the density is invalid")
    return TwirlChannel(rep, density, mask, _readonly(s))


def apply_twirl(twirl: TwirlChannel, m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.shape != (twirl.dim, twirl.dim):
        raise DimMismatch(f"twirl acts on dim {twirl.dim}, matrix has shape {a.shape}")
    if twirl.mask is not None:
        return twirl.mask * a
    return mx.apply_superop(twirl.superop_matrix, a)


def same_rep(a: Rep, b: Rep) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, U1Rep):
        return np.array_equal(a.charges, b.charges)
    return (np.array_equal(a.group.cayley, b.group.cayley)
            and np.array_equal(a.unitaries, b.unitaries))


def compose_twirls(outer: TwirlChannel, inner: TwirlChannel) -> TwirlChannel:
    """``outer`` after ``inner``, built from the convolved density."""
    if not same_rep(outer.rep, inner.rep):
        raise RepMismatch("twirls act through different representations")
    return build_twirl(convolve(outer.density, inner.density), outer.rep)


def is_idempotent(twirl: TwirlChannel, tol: float = IDEMPOTENCE_TOL) -> bool:
    s = twirl.superop_matrix
    return float(np.linalg.norm(s @ s - s)) <= tol


def partial_inverse(twirl: TwirlChannel, threshold: float = DEFAULT_THRESHOLD) -> PartialInverse:
    """Invert the twirl on the entries it attenuates by at least ``threshold``.

    Entries with ``|M[m, n]| < threshold`` are considered lost and mapped to 0.
    For idempotent twirls without a mask (uniform density on a non-diagonal
    finite rep) the inverse is the twirl itself.
    """
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    if twirl.mask is not None:
        m = twirl.mask
        keep = np.abs(m) >= threshold
        inv = np.zeros_like(m)
        inv[keep] = 1 / m[keep]
        return PartialInverse(twirl, threshold, _readonly(inv), _readonly(mx.mask_superop(inv)))
    if is_uniform(twirl.density) or is_idempotent(twirl):
        return PartialInverse(twirl, threshold, None, twirl.superop_matrix)
    raise UnsupportedTwirl("partial inversion is only defined for abelian (mask) twirls "
                           "and idempotent twirls")


def coherence_projector(twirl: TwirlChannel, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Superoperator of the partial inverse after the twirl.

    It keeps the recoverable entries and annihilates the rest.
    """
    inv = partial_inverse(twirl, threshold)
    if inv.mask is not None:
        return mx.mask_superop(inv.mask * twirl.mask)
    return inv.superop_matrix @ twirl.superop_matrix


def twirled_purity_prediction(rho, twirl: TwirlChannel) -> float:
    """``sum |r_mn|^2 |M_mn|^2``, the purity after a mask twirl."""
    if twirl.mask is None:
        raise UnsupportedTwirl("purity prediction needs a mask twirl; "
                               "use purity(apply_twirl(...)) instead")
    r = np.asarray(rho, dtype=complex)
    if r.shape != twirl.mask.shape:
        raise DimMismatch(f"state shape {r.shape} does not match twirl dim {twirl.dim}")
    return float(np.sum(np.abs(r) ** 2 * np.abs(twirl.mask) ** 2))


def _digest(obj) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def channel_to_json(twirl: TwirlChannel) -> dict:
    if twirl.mask is not None:
        out = {"form": "abelian_mask", "mask": mx.matrix_to_json(twirl.mask)}
    else:
        out = {"form": "superop", "matrix": mx.matrix_to_json(twirl.superop_matrix)}
    out["provenance"] = {"density_sha256": _digest(density_to_json(twirl.density)),
                         "rep_sha256": _digest(rep_to_json(twirl.rep))}
    return out


def channel_superop_from_json(obj) -> np.ndarray:
    """Superoperator of an exported channel (the density itself is not stored)."""
    if not isinstance(obj, dict) or "form" not in obj:
        raise MalformedInput("channel must be an object with a 'form'", field="form")
    if obj["form"] == "abelian_mask":
        return mx.mask_superop(mx.matrix_from_json(obj.get("mask"), "mask"))
    if obj["form"] == "superop":
        s = mx.matrix_from_json(obj.get("matrix"), "matrix")
        mx.superop_dim(s)
        return s
    raise MalformedInput(f"unknown channel form {obj['form']!r}", field="form")

