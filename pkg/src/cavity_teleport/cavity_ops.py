"""Cavity-QED primitives: dispersive two-atom gate, Bell basis, JC filter.

Two atoms in a large-detuned cavity under strong classical driving evolve
with ``exp(-i phi (X1 + X2)) exp(-i theta (1 + X1 X2))`` where
``theta = lambda t`` (``lambda = eps**2 / 2 delta``) and ``phi = Omega t``.
The uniform phase ``exp(-i theta)`` is dropped, so at ``phi = pi`` the gate is
``cos(theta) I - i sin(theta) X (x) X``. At ``theta = pi/4`` it maps each
Bell state of the i-phase convention onto a product state, which is how a
joint Bell measurement becomes two independent atomic detections.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .statevec import (
    INTERNAL_TOL,
    MeasurementRecord,
    QState,
    StateError,
    apply_unitary,
    measure,
    outcome_probabilities,
)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
XX = np.kron(X, X)
_S2 = 1.0 / math.sqrt(2.0)


class TruncationError(StateError):
    """The atom-mode pair has weight on |e,1>, outside the one-photon truncation."""


@dataclass(frozen=True)
class DispersiveParams:
    theta: float = math.pi / 4
    phi: float = math.pi

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("theta and phi must be finite")


CANONICAL = DispersiveParams()


@dataclass(frozen=True)
class JCParams:
    """Resonant atom-cavity coupling area ``eps * t``.

    Filtering uses angles in ``[0, pi/2]``; other finite values are accepted so
    that timing offsets can be swept past the ends of that range.
    """

    epsilon_t: float

    def __post_init__(self):
        if not math.isfinite(self.epsilon_t):
            raise ValueError("epsilon_t must be finite")

    @classmethod
    def from_cos(cls, c: float) -> "JCParams":
        if not 0.0 <= c <= 1.0 + 1e-12:
            raise ValueError(f"cos(eps t) must lie in [0, 1], got {c!r}")
        return cls(math.acos(min(1.0, c)))


class BellKind(enum.Enum):
    PhiPlus = "PhiPlus"
    PhiMinus = "PhiMinus"
    PsiPlus = "PsiPlus"
    PsiMinus = "PsiMinus"

    def __str__(self):
        return self.value


# detection bits (site_a, site_b) after the canonical gate, and the phase the
# collapsed product state carries relative to the input Bell state
BELL_OUTCOMES = {
    (1, 1): (BellKind.PhiPlus, 1 + 0j),
    (0, 0): (BellKind.PhiMinus, -1j),
    (0, 1): (BellKind.PsiPlus, 1 + 0j),
    (1, 0): (BellKind.PsiMinus, -1j),
}
BELL_BITS = {kind: bits for bits, (kind, _) in BELL_OUTCOMES.items()}


@lru_cache(maxsize=256)
def _dispersive(theta: float, phi: float) -> np.ndarray:
    u = math.cos(theta) * np.eye(4, dtype=complex) - 1j * math.sin(theta) * XX
    # exp(-i phi X) per atom; at phi = pi both factors are -I and cancel
    if phi not in (0.0, math.pi):
        r = math.cos(phi) * I2 - 1j * math.sin(phi) * X
        u = np.kron(r, r) @ u
    u.setflags(write=False)
    return u


def dispersive_two_atom_unitary(p: DispersiveParams = CANONICAL) -> np.ndarray:
    """4x4 gate on an atom pair in the ``gg, ge, eg, ee`` basis."""
    return _dispersive(float(p.theta), float(p.phi))


_BELL = {
    BellKind.PhiPlus: np.array([1j, 0, 0, 1]) * _S2,
    BellKind.PhiMinus: np.array([-1j, 0, 0, 1]) * _S2,
    BellKind.PsiPlus: np.array([0, 1, 1j, 0]) * _S2,
    BellKind.PsiMinus: np.array([0, 1, -1j, 0]) * _S2,
}


def bell_state(kind: BellKind) -> np.ndarray:
    """``Phi+- = (|ee> +- i|gg>)/sqrt2``, ``Psi+- = (|ge> +- i|eg>)/sqrt2``."""
    return _BELL[BellKind(kind)].astype(complex)


class BellResult(NamedTuple):
    kind: BellKind
    phase: complex
    record: MeasurementRecord


def bell_discriminate(state: QState, site_a: int, site_b: int, rng=None,
                      params: DispersiveParams = CANONICAL,
                      outcome: tuple[int, int] | None = None) -> BellResult:
    """Bell-state discrimination of a pair by one cavity pass and two detections.

    The returned ``phase`` relates the collapsed product state to the Bell
    component of the input. A non-canonical ``params`` models a mistimed
    interaction; outcomes are still labelled by the canonical table.
    """
    if site_a == site_b:
        raise StateError("Bell discrimination needs two distinct sites")
    evolved = apply_unitary(state, (site_a, site_b), dispersive_two_atom_unitary(params),
                            check=False)
    rec = measure(evolved, (site_a, site_b), rng, outcome)
    kind, phase = BELL_OUTCOMES[rec.outcome]
    return BellResult(kind, phase, rec)


@lru_cache(maxsize=4096)
def _jc(epsilon_t: float) -> np.ndarray:
    c, s = math.cos(epsilon_t), math.sin(epsilon_t)
    # basis g0, g1, e0, e1 with the atom as the high bit
    u = np.array([
        [1, 0, 0, 0],
        [0, c, -1j * s, 0],
        [0, -1j * s, c, 0],
        [0, 0, 0, 1],
    ], dtype=complex)
    u.setflags(write=False)
    return u


def jc_filter_unitary(p: JCParams) -> np.ndarray:
    """Single-excitation Jaynes-Cummings rotation on (atom, mode).

    The ``|e,1>`` column is left as identity; that sector lies outside the
    one-photon truncation and callers must keep it empty.
    """
    return _jc(float(p.epsilon_t))


def check_truncation(state: QState, atom_site: int, mode_site: int) -> None:
    p_e1 = outcome_probabilities(state, (atom_site, mode_site))[3]
    if math.sqrt(p_e1) > INTERNAL_TOL:
        raise TruncationError(f"|e,1> amplitude {math.sqrt(p_e1):.3e} on sites "
                              f"({atom_site}, {mode_site})")


def apply_jc_filter(state: QState, atom_site: int, mode_site: int, p: JCParams,
                    validate: bool = True) -> QState:
    if validate:
        check_truncation(state, atom_site, mode_site)
    return apply_unitary(state, (atom_site, mode_site), jc_filter_unitary(p), check=False)
