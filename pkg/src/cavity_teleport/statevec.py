"""Dense state vectors over registers of two-level sites.

Basis convention: a register of ``n`` sites has ``2**n`` amplitudes and site 0
is the most significant bit of the basis index. Locally ``|g>`` (atom ground
state) and ``|0>_C`` (photon vacuum) are index 0, ``|e>`` and ``|1>_C`` are
index 1. So for two sites the amplitude order is ``gg, ge, eg, ee``.

States are immutable; every operation returns a new :class:`QState`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels

INPUT_TOL = 1e-10
INTERNAL_TOL = 1e-12
# projected components with a smaller norm are treated as impossible outcomes
ZERO_BRANCH_NORM = 1e-14

G = np.array([1.0, 0.0], dtype=complex)
E = np.array([0.0, 1.0], dtype=complex)


class StateError(ValueError):
    """Invalid register, site, or operator."""


class ZeroProbabilityBranch(StateError):
    """A forced measurement outcome has (numerically) zero probability."""


@dataclass(frozen=True, eq=False)
class QState:
    """Normalized amplitude vector; ``labels`` optionally name the sites."""

    amplitudes: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        dim = amps.shape[0]
        n = dim.bit_length() - 1
        if dim < 2 or (1 << n) != dim:
            raise StateError(f"amplitude count {dim} is not a power of two >= 2")
        norm = math.sqrt(float(np.vdot(amps, amps).real))
        if abs(norm - 1.0) > INPUT_TOL:
            raise StateError(f"state is not normalized (norm={norm!r})")
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != n or len(set(labels)) != n:
                raise StateError("labels must be unique and one per site")
            object.__setattr__(self, "labels", labels)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_sites(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    def site(self, label: str) -> int:
        """Index of the site called ``label``."""
        if self.labels is None:
            raise StateError("state has no site labels")
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise StateError(f"no site labelled {label!r}") from None

    def __repr__(self):
        return f"QState(num_sites={self.num_sites}, labels={self.labels})"


def _trusted(amps: np.ndarray, labels) -> QState:
    # kernel outputs of unitary/normalized maps; skips re-validation
    st = object.__new__(QState)
    amps.setflags(write=False)
    object.__setattr__(st, "amplitudes", amps)
    object.__setattr__(st, "labels", labels)
    return st


def _normalized(amps, labels=None) -> QState:
    amps = np.asarray(amps, dtype=np.complex128)
    return QState(amps / np.linalg.norm(amps), labels)


@dataclass(frozen=True)
class MeasurementRecord:
    sites: tuple[int, ...]
    outcome: tuple[int, ...]
    probability: float
    post_state: QState = field(repr=False)


def init_product(local_states: Sequence, labels: Sequence[str] | None = None) -> QState:
    """Tensor product of single-site states, first entry on site 0."""
    if len(local_states) == 0:
        raise StateError("need at least one local state")
    amps = np.ones(1, dtype=complex)
    for k, v in enumerate(local_states):
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape != (2,):
            raise StateError(f"local state {k} is not 2-dimensional")
        if abs(np.linalg.norm(v) - 1.0) > INPUT_TOL:
            raise StateError(f"local state {k} is not normalized")
        amps = np.kron(amps, v)
    return _normalized(amps, labels)


def basis_state(bits: Sequence[int], labels: Sequence[str] | None = None) -> QState:
    return init_product([E if b else G for b in bits], labels)


def tensor(s1: QState, s2: QState) -> QState:
    labels = None
    if s1.labels is not None and s2.labels is not None:
        labels = s1.labels + s2.labels
    return _trusted(np.multiply.outer(s1.amplitudes, s2.amplitudes).reshape(-1), labels)


def _check_sites(state: QState, sites) -> tuple[int, ...]:
    sites = tuple(map(int, sites))
    n = state.num_sites
    if len(set(sites)) != len(sites):
        raise StateError(f"duplicate sites in {sites}")
    if sites and (min(sites) < 0 or max(sites) >= n):
        raise StateError(f"site out of range in {sites} for {n}-site register")
    return sites


def is_unitary(u, tol: float = INPUT_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), rtol=0.0, atol=tol)


def apply_unitary(state: QState, sites: Sequence[int], u, check: bool = True) -> QState:
    """Apply a 1- or 2-site unitary; ``sites`` order matches the matrix bit order."""
    sites = _check_sites(state, sites)
    u = np.ascontiguousarray(u, dtype=np.complex128)
    k = len(sites)
    if k not in (1, 2) or u.shape != (2**k, 2**k):
        raise StateError(f"need a {2**k}x{2**k} matrix for {k} site(s), got {u.shape}")
    if check and not is_unitary(u):
        raise StateError("matrix is not unitary")
    n = state.num_sites
    if k == 1:
        out = kernels.apply_1q(state.amplitudes, n, sites[0], u)
    else:
        out = kernels.apply_2q(state.amplitudes, n, sites[0], sites[1], u)
    return _trusted(out, state.labels)


def _bits(index: int, k: int) -> tuple[int, ...]:
    return tuple((index >> (k - 1 - j)) & 1 for j in range(k))


def _index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        if b not in (0, 1):
            raise StateError(f"outcome bits must be 0 or 1, got {b!r}")
        idx = (idx << 1) | int(b)
    return idx


def outcome_probabilities(state: QState, sites: Sequence[int]) -> np.ndarray:
    """Joint Born distribution over ``sites``; entry ``i`` has first site as MSB."""
    sites = _check_sites(state, sites)
    return kernels.marginal(state.amplitudes, state.num_sites, list(sites))


def _collapse(state: QState, sites, index: int) -> tuple[float, QState]:
    vec, norm2 = kernels.project(state.amplitudes, state.num_sites, list(sites), index)
    norm = math.sqrt(norm2)
    if norm < ZERO_BRANCH_NORM:
        raise ZeroProbabilityBranch(f"outcome {_bits(index, len(sites))} on sites {sites}")
    return float(norm2), _trusted(vec / norm, state.labels)


def measure(state: QState, sites: Sequence[int], rng=None, outcome: Sequence[int] | None = None
            ) -> MeasurementRecord:
    """Projective measurement of ``sites`` in the computational basis.

    With ``outcome`` given the branch is selected instead of sampled (raising
    :class:`ZeroProbabilityBranch` if it cannot occur); otherwise ``rng``, a
    numpy ``Generator``, draws among the outcomes of nonzero probability.
    """
    sites = _check_sites(state, sites)
    if not sites:
        raise StateError("no sites to measure")
    k = len(sites)
    if outcome is None:
        if rng is None:
            raise StateError("either rng or outcome is required")
        probs = outcome_probabilities(state, sites).tolist()
        weights = [0.0 if math.sqrt(p) < ZERO_BRANCH_NORM else p for p in probs]
        cut = rng.random() * math.fsum(weights)
        index, acc = 0, 0.0
        for index, w in enumerate(weights):
            acc += w
            if w > 0.0 and cut < acc:
                break
        while weights[index] == 0.0:  # float round-off at the top edge
            index -= 1
    else:
        if len(outcome) != k:
            raise StateError("outcome length does not match sites")
        index = _index(outcome)
    prob, post = _collapse(state, sites, index)
    return MeasurementRecord(sites, _bits(index, k), prob, post)


def project(state: QState, site: int, local_outcome: int) -> tuple[float, QState | None]:
    """Probability of ``local_outcome`` on ``site`` and the renormalized branch.

    An impossible branch comes back as ``(0.0, None)``.
    """
    (site,) = _check_sites(state, [site])
    if local_outcome not in (0, 1):
        raise StateError("local_outcome must be 0 or 1")
    try:
        return _collapse(state, (site,), local_outcome)
    except ZeroProbabilityBranch:
        return 0.0, None


def fidelity_up_to_phase(s1: QState, s2: QState) -> float:
    """|<s1|s2>|^2, insensitive to global phase."""
    if s1.num_sites != s2.num_sites:
        raise StateError("dimension mismatch")
    ov = np.vdot(s1.amplitudes, s2.amplitudes)
    return float(min(1.0, ov.real * ov.real + ov.imag * ov.imag))


def extract_sites(state: QState, keep: Sequence[int]) -> QState:
    """Restrict to ``keep`` when every other site is in a definite basis state.

    This is how measured (collapsed) sites are dropped from a register.
    """
    keep = _check_sites(state, keep)
    n = state.num_sites
    rest = [s for s in range(n) if s not in keep]
    if not rest:
        order = list(keep)
        t = np.moveaxis(state.amplitudes.reshape((2,) * n), order, list(range(n)))
        labels = tuple(state.labels[s] for s in keep) if state.labels else None
        return QState(t.reshape(-1), labels)
    t = np.moveaxis(state.amplitudes.reshape((2,) * n), list(keep) + rest, list(range(n)))
    t = t.reshape(2 ** len(keep), 2 ** len(rest))
    weight = np.sum(np.abs(t) ** 2, axis=0)
    j = int(np.argmax(weight))
    if weight[j] < 1.0 - 1e-9:
        raise StateError("remaining sites are not in a definite basis state")
    labels = tuple(state.labels[s] for s in keep) if state.labels else None
    return _normalized(t[:, j], labels)


def discard_sites(state: QState, sites: Sequence[int], bits: Sequence[int]) -> QState:
    """Drop ``sites`` known to be in basis state ``bits`` (e.g. just measured)."""
    sites = _check_sites(state, sites)
    if len(sites) >= state.num_sites:
        raise StateError("cannot discard every site")
    vec = kernels.select(state.amplitudes, state.num_sites, list(sites), _index(bits))
    norm = math.sqrt(float(np.vdot(vec, vec).real))
    if abs(norm - 1.0) > 1e-9:
        raise StateError("discarded sites are not in the stated basis state")
    labels = None
    if state.labels is not None:
        labels = tuple(x for i, x in enumerate(state.labels) if i not in sites)
    return _trusted(vec / norm, labels)


def concurrence_2q(x) -> float:
    """Wootters concurrence of a 2-site pure state or a 4x4 density matrix."""
    if isinstance(x, QState):
        if x.num_sites != 2:
            raise StateError("concurrence needs exactly two sites")
        x = x.amplitudes
    x = np.asarray(x, dtype=complex)
    if x.shape == (4,):
        if abs(np.linalg.norm(x) - 1.0) > INPUT_TOL:
            raise StateError("pure state is not normalized")
        return float(min(1.0, 2.0 * abs(x[0] * x[3] - x[1] * x[2])))
    if x.shape != (4, 4):
        raise StateError(f"expected 4-vector or 4x4 matrix, got shape {x.shape}")
    rho = x
    if not np.allclose(rho, rho.conj().T, atol=INPUT_TOL):
        raise StateError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > INPUT_TOL:
        raise StateError("density matrix trace is not 1")
    if np.linalg.eigvalsh(rho).min() < -INPUT_TOL:
        raise StateError("density matrix is not positive semidefinite")
    yy = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)
    rho_tilde = yy @ rho.conj() @ yy
    ev = np.linalg.eigvals(rho @ rho_tilde)
    lam = np.sort(np.sqrt(np.clip(ev.real, 0.0, None)))[::-1]
    return float(np.clip(lam[0] - lam[1] - lam[2] - lam[3], 0.0, 1.0))
