"""Probability densities over groups, their convolution, sampling, and unitary reps.

Two group families are supported:

* U(1), with densities stored as band-limited Fourier coefficients
  ``w_k = int w(phi) exp(i k phi) dphi / 2pi`` for ``k = -K..K`` (normalized
  Haar measure, so the uniform density is ``w == 1`` and ``w_0 == 1``), and
  representations given by integer charges.
* finite groups given by a Cayley table, with densities given as
  probability vectors and representations given as explicit unitaries.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (
    DimensionTooLarge,
    IndexOutOfRange,
    InvalidGroup,
    InvalidRep,
    MalformedInput,
    NotConjSymmetric,
    NotNormalized,
    NotPositive,
    VariantMismatch,
)
from .matrix import MAX_DIM, complex_from_json, complex_to_json, matrix_from_json, matrix_to_json

COEFF_TOL = 1e-12
POSITIVITY_TOL = 1e-10
PROB_TOL = 1e-12
REP_TOL = 1e-10

SAMPLING_GRID = 4096


# --------------------------------------------------------------------------- U(1)

@dataclass(frozen=True, eq=False)
class U1Density:
    """Band-limited density on U(1), ``coeffs[K + k] == w_k``.

    Construction validates normalization, conjugate symmetry and positivity
    (the Toeplitz matrix of the coefficients must be PSD).
    """

    coeffs: np.ndarray
    max_k: int = field(init=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size % 2 != 1:
            raise MalformedInput(f"need an odd number of coefficients (2K+1), got {c.size}",
                                 field="coeffs")
        if not np.all(np.isfinite(c)):
            raise MalformedInput("coefficients must be finite", field="coeffs")
        k = c.size // 2
        if abs(c[k] - 1) > COEFF_TOL:
            raise NotNormalized(f"w_0 = {c[k]} but must equal 1")
        asym = np.max(np.abs(c - c[::-1].conj()))
        if asym > COEFF_TOL:
            raise NotConjSymmetric(f"w_-k != conj(w_k) (max deviation {asym:.3e})")
        if np.max(np.abs(c)) > 1 + COEFF_TOL:
            raise NotPositive(f"coefficient modulus {np.max(np.abs(c)):.6g} exceeds 1")
        min_eig = toeplitz_min_eigenvalue(c)
        if min_eig < -POSITIVITY_TOL:
            raise NotPositive(f"Toeplitz moment matrix has eigenvalue {min_eig:.6g}",
                              min_eigenvalue=min_eig)
        c[k] = 1.0
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "max_k", k)

    def coeff(self, k: int) -> complex:
        """``w_k``; zero beyond the stored band."""
        if abs(k) > self.max_k:
            return 0j
        return complex(self.coeffs[self.max_k + k])

    def padded(self, max_k: int) -> np.ndarray:
        """Coefficient array for ``-max_k..max_k``, zero-padded (never truncated)."""
        if max_k < self.max_k:
            raise ValueError("padding cannot truncate the band")
        pad = max_k - self.max_k
        return np.pad(self.coeffs, pad)

    def evaluate(self, phi) -> np.ndarray:
        """The trigonometric polynomial ``sum_k w_k exp(-i k phi)`` (real)."""
        ks = np.arange(-self.max_k, self.max_k + 1)
        phi = np.asarray(phi, dtype=float)
        return np.real(np.exp(-1j * np.multiply.outer(phi, ks)) @ self.coeffs)


def toeplitz_min_eigenvalue(coeffs) -> float:
    c = np.asarray(coeffs, dtype=complex)
    k = c.size // 2
    t = scipy.linalg.toeplitz(c[k:])
    return float(np.linalg.eigvalsh(t).min())


def validate_u1_density(coeffs) -> U1Density:
    return U1Density(np.asarray(coeffs, dtype=complex))


def uniform_u1() -> U1Density:
    return U1Density(np.ones(1))


def delta_density_u1(phi0: float, max_k: int) -> U1Density:
    """Point mass at ``phi0`` truncated to ``|k| <= max_k``.

    Coefficients beyond the band read as zero, so ``max_k`` must reach the
    largest charge difference of the representation it is used with.
    """
    ks = np.arange(-max_k, max_k + 1)
    return U1Density(np.exp(1j * ks * phi0))


def fejer_density(amplitudes) -> U1Density:
    """Density ``|sum_j a_j exp(i j phi)|^2``, normalized; always valid."""
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    a = a / np.linalg.norm(a)
    n = a.size
    # w_k = sum_j a_j conj(a_{j+k})
    pos = np.array([np.vdot(a[k:], a[:n - k]) for k in range(n)])
    coeffs = np.concatenate([pos[:0:-1].conj(), pos])
    coeffs[n - 1] = 1.0
    return U1Density(coeffs)


# ----------------------------------------------------------------- finite groups

@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Finite group from its Cayley table, ``cayley[g, h]`` is the index of ``g h``."""

    cayley: np.ndarray
    order: int = field(init=False)
    identity_index: int = field(init=False)
    inverse: np.ndarray = field(init=False)

    def __post_init__(self):
        t = np.asarray(self.cayley)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 1:
            raise InvalidGroup(f"Cayley table must be square, got shape {t.shape}")
        if not np.issubdtype(t.dtype, np.integer):
            if not np.all(t == np.round(t)):
                raise InvalidGroup("Cayley table entries must be integers")
            t = t.astype(int)
        n = t.shape[0]
        rng = np.arange(n)
        if np.any(np.sort(t, axis=0) != rng[:, None]) or np.any(np.sort(t, axis=1) != rng):
            raise InvalidGroup("Cayley table is not a Latin square")
        ids = [e for e in range(n) if np.array_equal(t[e], rng) and np.array_equal(t[:, e], rng)]
        if not ids:
            raise InvalidGroup("no identity element")
        e = ids[0]
        inv = np.argmax(t == e, axis=1)
        if np.any(t[inv, rng] != e):
            raise InvalidGroup("left and right inverses disagree")
        # (gh)k == g(hk) for all triples
        if np.any(t[t, :] != t[:, t]):
            raise InvalidGroup("Cayley table is not associative")
        t = t.copy()
        t.flags.writeable = False
        inv.flags.writeable = False
        object.__setattr__(self, "cayley", t)
        object.__setattr__(self, "order", n)
        object.__setattr__(self, "identity_index", e)
        object.__setattr__(self, "inverse", inv)

    def mul(self, g: int, h: int) -> int:
        return int(self.cayley[g, h])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.cayley, self.cayley.T))

    @classmethod
    def from_unitaries(cls, unitaries, tol: float = REP_TOL) -> "FiniteGroup":
        """Recover the Cayley table of a faithful matrix group by matching products."""
        us = [np.asarray(u, dtype=complex) for u in unitaries]
        n = len(us)
        table = np.empty((n, n), dtype=int)
        for g, h in itertools.product(range(n), repeat=2):
            prod = us[g] @ us[h]
            hits = [k for k in range(n) if np.max(np.abs(prod - us[k])) <= tol]
            if len(hits) != 1:
                raise InvalidRep("unitaries are not closed under multiplication or not distinct")
            table[g, h] = hits[0]
        return cls(table)


def cyclic_group(n: int) -> FiniteGroup:
    r = np.arange(n)
    return FiniteGroup((r[:, None] + r[None, :]) % n)


def symmetric_group(n: int) -> FiniteGroup:
    """S_n with elements listed as permutation tuples in lexicographic order.

    Composition is ``(g h)(i) = g(h(i))``.
    """
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = np.array([[index[tuple(g[h[i]] for i in range(n))] for h in perms] for g in perms])
    return FiniteGroup(table)


@dataclass(frozen=True, eq=False)
class FiniteGroupDensity:
    group: FiniteGroup
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size != self.group.order:
            raise MalformedInput(f"expected {self.group.order} probabilities, got {p.size}",
                                 field="probs")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise NotPositive("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1) > PROB_TOL:
            raise NotNormalized(f"probabilities sum to {p.sum():.15g}")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)


def uniform_finite(group: FiniteGroup) -> FiniteGroupDensity:
    return FiniteGroupDensity(group, np.full(group.order, 1.0 / group.order))


def delta_density_finite(group: FiniteGroup, g: int) -> FiniteGroupDensity:
    if not 0 <= g < group.order:
        raise IndexOutOfRange(f"group element {g} out of range 0..{group.order - 1}")
    p = np.zeros(group.order)
    p[g] = 1.0
    return FiniteGroupDensity(group, p)


Density = Union[U1Density, FiniteGroupDensity]


def is_uniform(density: Density) -> bool:
    if isinstance(density, U1Density):
        return bool(np.all(np.abs(np.delete(density.coeffs, density.max_k)) <= COEFF_TOL))
    return bool(np.allclose(density.probs, 1.0 / density.group.order, rtol=0, atol=PROB_TOL))


def convolve(w1: Density, w2: Density) -> Density:
    """Group convolution ``v(g) = int dh w1(h) w2(h^-1 g)``.

    Twirling with ``w1`` after twirling with ``w2`` equals twirling with the
    result. On U(1) this is the coefficientwise product.
    """
    if isinstance(w1, U1Density) and isinstance(w2, U1Density):
        k = max(w1.max_k, w2.max_k)
        return U1Density(w1.padded(k) * w2.padded(k))
    if isinstance(w1, FiniteGroupDensity) and isinstance(w2, FiniteGroupDensity):
        if not np.array_equal(w1.group.cayley, w2.group.cayley):
            raise VariantMismatch("densities live on different finite groups")
        grp = w1.group
        # row h of cayley[inverse] lists h^-1 g over g
        shifted = w2.probs[grp.cayley[grp.inverse]]
        v = w1.probs @ shifted
        return FiniteGroupDensity(grp, v / v.sum())
    raise VariantMismatch("cannot convolve a U(1) density with a finite-group density")


# ----------------------------------------------------------------- representations

@dataclass(frozen=True, eq=False)
class U1Rep:
    """``phi -> diag(exp(i phi charges))``."""

    charges: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.charges)
        if c.ndim != 1 or c.size < 1:
            raise InvalidRep("charges must be a non-empty 1-D array")
        if not np.all(np.isfinite(c.astype(float))) or np.any(c != np.round(c)):
            raise InvalidRep("charges must be finite integers")
        if c.size > MAX_DIM:
            raise DimensionTooLarge(f"rep dimension {c.size} exceeds cap {MAX_DIM}")
        c = c.astype(np.int64)
        c.flags.writeable = False
        object.__setattr__(self, "charges", c)

    @property
    def dim(self) -> int:
        return self.charges.size

    def charge_differences(self) -> np.ndarray:
        return self.charges[:, None] - self.charges[None, :]

    def max_difference(self) -> int:
        return int(self.charges.max() - self.charges.min())


@dataclass(frozen=True, eq=False)
class FiniteRep:
    """Explicit unitaries ``unitaries[g]``; checked to be a homomorphism."""

    group: FiniteGroup
    unitaries: np.ndarray

    def __post_init__(self):
        us = np.array(self.unitaries, dtype=complex)
        if us.ndim != 3 or us.shape[1] != us.shape[2]:
            raise InvalidRep(f"unitaries must have shape (order, d, d), got {us.shape}")
        if us.shape[0] != self.group.order:
            raise InvalidRep(f"need {self.group.order} unitaries, got {us.shape[0]}")
        d = us.shape[1]
        if d > MAX_DIM:
            raise DimensionTooLarge(f"rep dimension {d} exceeds cap {MAX_DIM}")
        eye = np.eye(d)
        unit_err = np.max(np.abs(us @ us.conj().transpose(0, 2, 1) - eye))
        if unit_err > REP_TOL:
            raise InvalidRep(f"matrices are not unitary (deviation {unit_err:.3e})")
        if np.max(np.abs(us[self.group.identity_index] - eye)) > REP_TOL:
            raise InvalidRep("identity element is not represented by the identity matrix")
        prods = np.einsum("gab,hbc->ghac", us, us)
        hom_err = np.max(np.abs(prods - us[self.group.cayley]))
        if hom_err > REP_TOL:
            raise InvalidRep(f"U_g U_h != U_gh (deviation {hom_err:.3e})")
        us.flags.writeable = False
        object.__setattr__(self, "unitaries", us)

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    def is_diagonal(self) -> bool:
        off = self.unitaries * (1 - np.eye(self.dim))
        return bool(np.max(np.abs(off), initial=0.0) == 0.0)


Rep = Union[U1Rep, FiniteRep]


def rep_unitary(rep: Rep, g) -> np.ndarray:
    """Unitary for group element ``g`` (an angle for U(1), an index otherwise)."""
    if isinstance(rep, U1Rep):
        return np.diag(np.exp(1j * float(g) * rep.charges))
    g = int(g)
    if not 0 <= g < rep.group.order:
        raise IndexOutOfRange(f"group element {g} out of range 0..{rep.group.order - 1}")
    return rep.unitaries[g].copy()


def rep_unitaries(rep: Rep, elements) -> np.ndarray:
    """Stack of unitaries for an array of group elements."""
    if isinstance(rep, U1Rep):
        phases = np.exp(1j * np.multiply.outer(np.asarray(elements, dtype=float), rep.charges))
        out = np.zeros(phases.shape + (rep.dim,), dtype=complex)
        idx = np.arange(rep.dim)
        out[..., idx, idx] = phases
        return out
    return rep.unitaries[np.asarray(elements, dtype=int)]


def cyclic_phase_rep(n: int, charges) -> FiniteRep:
    """Z_n acting as ``g -> diag(exp(2 pi i g charges / n))``."""
    charges = np.asarray(charges)
    us = [np.diag(np.exp(2j * np.pi * g * charges / n)) for g in range(n)]
    return FiniteRep(cyclic_group(n), np.array(us))


def permutation_rep(n: int) -> FiniteRep:
    """S_n permuting the basis vectors of C^n, matching :func:`symmetric_group`."""
    perms = list(itertools.permutations(range(n)))
    us = np.zeros((len(perms), n, n), dtype=complex)
    for k, p in enumerate(perms):
        us[k, list(p), list(range(n))] = 1.0
    return FiniteRep(symmetric_group(n), us)


def check_variants(density: Density, rep: Rep) -> None:
    if isinstance(rep, U1Rep) != isinstance(density, U1Density):
        raise VariantMismatch("density and representation belong to different group families")
    if isinstance(rep, FiniteRep) and not np.array_equal(rep.group.cayley,
                                                         density.group.cayley):
        raise VariantMismatch("density and representation use different Cayley tables")


# ------------------------------------------------------------------------ sampling

def counter_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniforms in [0, 1) where draw ``i`` depends only on ``(seed, i)``.

    Each index owns one Philox counter block, so any chunking of the index
    range reproduces the same values.
    """
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    bg = np.random.Philox(key=seed)
    if start:
        bg.advance(start)
    raw = bg.random_raw(4 * count)[::4]
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def u1_grid_weights(density: U1Density, n_grid: int = SAMPLING_GRID) -> np.ndarray:
    """Nonnegative weights on ``phi_j = 2 pi j / n_grid`` reproducing the coefficients.

    When the band-limited polynomial is itself nonnegative its grid values are
    used; discrete quadrature on the grid is exact for all stored moments.
    Otherwise (point masses, for instance) the coefficients are realized by
    the Caratheodory-Pisarenko measure: a uniform floor plus finitely many
    atoms, each atom snapped to the nearest grid point.
    """
    phi = 2 * np.pi * np.arange(n_grid) / n_grid
    vals = density.evaluate(phi)
    if vals.min() >= -1e-9:
        w = np.clip(vals, 0, None)
        return w / w.sum()
    angles, masses, floor = _pisarenko(density.coeffs)
    w = np.full(n_grid, floor / n_grid)
    bins = np.round(np.mod(angles, 2 * np.pi) / (2 * np.pi) * n_grid).astype(int) % n_grid
    np.add.at(w, bins, masses)
    return w / w.sum()


def _pisarenko(coeffs):
    c = np.asarray(coeffs, dtype=complex)
    k = c.size // 2
    t = scipy.linalg.toeplitz(c[k:])
    evals, evecs = np.linalg.eigh(t)
    floor = max(float(evals[0]), 0.0)
    v = evecs[:, 0]
    # atoms sit at the unit-circle roots of sum_j conj(v_j) z^j
    roots = np.roots(v.conj()[::-1])
    angles = np.angle(roots)
    moments = c[k:].copy()
    moments[0] -= floor
    ks = np.arange(k + 1)
    vander = np.exp(1j * np.outer(ks, angles))
    a = np.vstack([vander.real, vander.imag])
    rhs = np.concatenate([moments.real, moments.imag])
    masses, _ = scipy.optimize.nnls(a, rhs)
    return angles, masses, floor


def sample_group(density: Density, n: int, seed: int, start: int = 0) -> np.ndarray:
    """Draw samples ``start .. start+n-1`` of the counter-based stream.

    U(1): angles on the 4096-point grid via inverse CDF. Finite: indices.
    """
    if n < 1:
        raise ValueError("n must be positive")
    u = counter_uniforms(seed, start, n)
    if isinstance(density, U1Density):
        weights = u1_grid_weights(density)
        idx = _inverse_cdf(weights, u)
        return 2 * np.pi * idx / weights.size
    return _inverse_cdf(density.probs, u)


def _inverse_cdf(weights, u) -> np.ndarray:
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(weights) - 1)


# ---------------------------------------------------------------------------- JSON

def density_to_json(density: Density) -> dict:
    if isinstance(density, U1Density):
        return {"type": "u1_fourier", "max_k": density.max_k,
                "coeffs": [complex_to_json(z) for z in density.coeffs]}
    return {"type": "finite", "cayley": density.group.cayley.tolist(),
            "probs": density.probs.tolist()}


def density_from_json(obj) -> Density:
    if not isinstance(obj, dict) or "type" not in obj:
        raise MalformedInput("density must be an object with a 'type'", field="type")
    kind = obj["type"]
    if kind == "u1_fourier":
        if "coeffs" not in obj or not isinstance(obj["coeffs"], list):
            raise MalformedInput("missing coefficient list", field="coeffs")
        coeffs = [complex_from_json(z, f"coeffs[{i}]") for i, z in enumerate(obj["coeffs"])]
        dens = U1Density(np.array(coeffs, dtype=complex))
        if "max_k" in obj and obj["max_k"] != dens.max_k:
            raise MalformedInput(f"max_k={obj['max_k']} but {len(coeffs)} coefficients given",
                                 field="max_k")
        return dens
    if kind == "finite":
        for key in ("cayley", "probs"):
            if key not in obj:
                raise MalformedInput("missing", field=key)
        try:
            table = np.array(obj["cayley"], dtype=int)
            probs = np.array(obj["probs"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise MalformedInput(str(exc), field="cayley/probs") from exc
        return FiniteGroupDensity(FiniteGroup(table), probs)
    raise MalformedInput(f"unknown density type {kind!r}", field="type")


def rep_to_json(rep: Rep) -> dict:
    if isinstance(rep, U1Rep):
        return {"type": "u1_charges", "charges": rep.charges.tolist()}
    return {"type": "finite_rep", "unitaries": [matrix_to_json(u) for u in rep.unitaries]}


def rep_from_json(obj, group: FiniteGroup | None = None) -> Rep:
    """Load a rep. Finite reps use ``group`` if given, else the group is
    recovered from the unitaries themselves (which must then be distinct)."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise MalformedInput("rep must be an object with a 'type'", field="type")
    kind = obj["type"]
    if kind == "u1_charges":
        if "charges" not in obj:
            raise MalformedInput("missing", field="charges")
        return U1Rep(np.asarray(obj["charges"]))
    if kind == "finite_rep":
        if "unitaries" not in obj or not isinstance(obj["unitaries"], list):
            raise MalformedInput("missing unitary list", field="unitaries")
        us = np.array([matrix_from_json(u, f"unitaries[{i}]")
                       for i, u in enumerate(obj["unitaries"])])
        if group is None:
            group = FiniteGroup.from_unitaries(us)
        return FiniteRep(group, us)
    raise MalformedInput(f"unknown rep type {kind!r}", field="type")
