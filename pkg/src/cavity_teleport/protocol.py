"""Teleportation of GHZ-class atomic states by entanglement swapping.

Three schemes share one engine:

* ``teleport_maximal``: ``a|ee> + b|gg>`` on atoms 1, 2 through two maximal
  channels (3, 4) and (5, 6). Pairs (1, 3) and (2, 5) are Bell-discriminated
  in the dispersive cavity; atoms 4 and 6 receive the state deterministically.
* ``teleport_nonmaximal``: the same with channels ``alpha|ge> - i beta|eg>``.
  The receiver equalizes the two branch amplitudes by passing one atom through
  a resonant cavity and keeps the run only if no photon is detected.
* ``teleport_ghz_n``: ``a|e...e> + b|g...g>`` on atoms 1..n through channels
  (n+j, 2n+j); pairs (j, n+j) are discriminated one by one.

Sites are labelled by atom number (``"1"``..) and ``"C"`` for the resonant
cavity mode. Measured atoms are dropped from the register after detection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .cavity_ops import (
    BELL_BITS,
    CANONICAL,
    BellKind,
    DispersiveParams,
    JCParams,
    X,
    apply_jc_filter,
    bell_discriminate,
    dispersive_two_atom_unitary,
)
from .statevec import (
    G,
    INPUT_TOL,
    QState,
    apply_unitary,
    discard_sites,
    fidelity_up_to_phase,
    init_product,
    measure,
    tensor,
)

_S2 = 1.0 / math.sqrt(2.0)
MAX_GHZ_N = 8


class ProtocolError(ValueError):
    pass


def _check_norm(name: str, x: complex, y: complex) -> None:
    total = abs(x) ** 2 + abs(y) ** 2
    if not math.isfinite(total) or abs(total - 1.0) > INPUT_TOL:
        raise ProtocolError(f"{name}: |.|^2 sum is {total!r}, expected 1")


@dataclass(frozen=True)
class InputState:
    """Unknown coefficients of ``a|e...e> + b|g...g>``."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        _check_norm("input (a, b)", self.a, self.b)


@dataclass(frozen=True)
class ChannelSpec:
    """Channel ``alpha|ge> - i beta|eg>`` on (sender atom, receiver atom)."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        _check_norm("channel (alpha, beta)", self.alpha, self.beta)

    def vector(self) -> np.ndarray:
        return np.array([0, self.alpha, -1j * self.beta, 0], dtype=complex)

    def frame(self) -> tuple[complex, complex]:
        """Receiver-side phases (on |g>, |e>) that make alpha and beta real positive.

        The receiver's atom carries ``beta`` when it is in |g> and ``alpha``
        in |e>, so a diagonal gate on that atom alone removes both phases.
        """
        def unphase(z):
            return 1.0 + 0j if z == 0 else abs(z) / z
        return unphase(self.beta), unphase(self.alpha)


MAXIMAL_CHANNEL = ChannelSpec(_S2, _S2)
# the n-partite form (|ee> + |gg>)/sqrt2
GHZ_FORM_CHANNEL = np.array([_S2, 0, 0, _S2], dtype=complex)
MAXIMAL_FORMS = ("maximal", "maximal-ge")


@dataclass(frozen=True)
class CorrectionOp:
    """Receiver unitary: ``ops[j]`` acts on the j-th receiver atom.

    Tags read as matrix products, so ``"XZ"`` is ``X @ Z`` (Z first). ``phase``
    is the global phase left over after correcting, for bookkeeping only.
    """

    ops: tuple[str, ...]
    phase: complex = 1 + 0j

    def to_dict(self):
        return {"ops": list(self.ops), "phase": _cdict(self.phase)}


@dataclass
class ProtocolRunRecord:
    scheme: str
    bell_outcomes: list[BellKind]
    bell_bits: list[tuple[int, int]]
    correction: CorrectionOp | None
    success: bool
    final_state: QState
    fidelity: float
    branch_probability: float
    filter_params: JCParams | None = None
    filter_target: str | None = None
    filter_pre_flip: bool = False
    photon_detected: bool | None = None
    frame: list[tuple[complex, complex]] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "bell_outcomes": [k.value for k in self.bell_outcomes],
            "bell_bits": [list(b) for b in self.bell_bits],
            "filter": None if self.filter_params is None else {
                "target": self.filter_target,
                "epsilon_t": self.filter_params.epsilon_t,
                "pre_flip": self.filter_pre_flip,
            },
            "photon_detected": self.photon_detected,
            "correction": None if self.correction is None else self.correction.to_dict(),
            "success": self.success,
            "fidelity": self.fidelity,
            "branch_probability": self.branch_probability,
            "final_state": {
                "labels": list(self.final_state.labels or ()),
                "amplitudes": [_cdict(z) for z in self.final_state.amplitudes],
            },
        }


def _cdict(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


@dataclass(frozen=True)
class _Layout:
    inputs: tuple[str, ...]
    senders: tuple[str, ...]
    receivers: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.inputs)


PAIR_LAYOUT = _Layout(("1", "2"), ("3", "5"), ("4", "6"))


def ghz_layout(n: int) -> _Layout:
    return _Layout(
        tuple(str(j) for j in range(1, n + 1)),
        tuple(str(n + j) for j in range(1, n + 1)),
        tuple(str(2 * n + j) for j in range(1, n + 1)),
    )


def ghz_vector(a: complex, b: complex, n: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[-1] = a
    v[0] = b
    return v


def target_state(inp: InputState, labels: Sequence[str]) -> QState:
    return QState(ghz_vector(inp.a, inp.b, len(labels)), tuple(labels))


@lru_cache(maxsize=512)
def _initial(layout: _Layout, a: complex, b: complex,
             channels: tuple[tuple[complex, ...], ...]) -> QState:
    amps = ghz_vector(a, b, layout.n)
    order = list(layout.inputs)
    for (s, r), vec in zip(zip(layout.senders, layout.receivers), channels):
        amps = np.kron(amps, np.asarray(vec, dtype=complex))
        order += [s, r]
    sorted_labels = sorted(order, key=int)
    n = len(order)
    t = amps.reshape((2,) * n)
    t = np.moveaxis(t, [order.index(x) for x in sorted_labels], list(range(n)))
    return QState(np.ascontiguousarray(t).reshape(-1), tuple(sorted_labels))


def build_initial_state(layout: _Layout, inp: InputState, channel_vectors) -> QState:
    key = tuple(tuple(complex(z) for z in v) for v in channel_vectors)
    return _initial(layout, inp.a, inp.b, key)


def build_initial_state_maximal(inp: InputState) -> QState:
    """Six atoms: ``(a|ee>+b|gg>)_12 (x) (|ge>-i|eg>)_34/sqrt2 (x) (|ge>-i|eg>)_56/sqrt2``."""
    v = MAXIMAL_CHANNEL.vector()
    return build_initial_state(PAIR_LAYOUT, inp, (v, v))


def prepare_epr_via_cavity(initial: QState | Sequence[int]) -> QState:
    """Entangle two atoms with one canonical dispersive-cavity pass.

    ``initial`` is a 2-site state or a pair of basis bits; non-basis inputs
    simply evolve linearly.
    """
    if not isinstance(initial, QState):
        bits = tuple(initial)
        initial = init_product([np.array([0, 1.0]) if b else G for b in bits])
    if initial.num_sites != 2:
        raise ProtocolError("EPR preparation acts on exactly two atoms")
    return apply_unitary(initial, (0, 1), dispersive_two_atom_unitary(CANONICAL), check=False)


_PHI_KINDS = (BellKind.PhiPlus, BellKind.PhiMinus)


def branch_weights(kinds: Sequence[BellKind], channels: Sequence[ChannelSpec]):
    """Channel amplitude magnitudes multiplying ``a`` and ``b`` in a branch.

    Returns ``(w_a, w_b, bits_a)`` where ``bits_a`` are the receivers' basis
    bits in the ``a`` term (the ``b`` term has the complementary bits). A Phi
    outcome means the sender half matched the input atom, leaving the receiver
    in |g> with ``beta`` for the ``a`` term and in |e> with ``alpha`` for ``b``.
    """
    w_a = w_b = 1.0
    bits_a = []
    for kind, ch in zip(kinds, channels):
        if kind in _PHI_KINDS:
            w_a *= abs(ch.beta)
            w_b *= abs(ch.alpha)
            bits_a.append(0)
        else:
            w_a *= abs(ch.alpha)
            w_b *= abs(ch.beta)
            bits_a.append(1)
    return w_a, w_b, tuple(bits_a)


def _as_bits(o) -> tuple[int, int]:
    if isinstance(o, (BellKind, str)):
        return BELL_BITS[BellKind(o)]
    return tuple(int(x) for x in o)


def _apply_tags(state: QState, sites: Sequence[int], ops: Sequence[str]) -> QState:
    from .corrections import tag_matrix

    for s, tag in zip(sites, ops):
        if tag != "I":
            state = apply_unitary(state, (s,), tag_matrix(tag), check=False)
    return state


def _run(scheme: str, layout: _Layout, inp: InputState, channel_vectors, *,
         channels: Sequence[ChannelSpec] | None, filtered: bool, table: str,
         rng=None, outcomes=None, photon: int | None = None,
         dispersive: DispersiveParams = CANONICAL, filter_offset: float = 0.0,
         correct: bool = True) -> ProtocolRunRecord:
    from .corrections import correction_for

    n = layout.n
    if outcomes is not None and len(outcomes) != n:
        raise ProtocolError(f"expected {n} forced Bell outcomes, got {len(outcomes)}")
    state = build_initial_state(layout, inp, channel_vectors)
    prob = 1.0
    kinds, bits = [], []
    for j in range(n):
        sa, sb = state.site(layout.inputs[j]), state.site(layout.senders[j])
        forced = None if outcomes is None else _as_bits(outcomes[j])
        res = bell_discriminate(state, sa, sb, rng, dispersive, forced)
        prob *= res.record.probability
        kinds.append(res.kind)
        bits.append(res.record.outcome)
        state = discard_sites(res.record.post_state, (sa, sb), res.record.outcome)

    rx = [state.site(r) for r in layout.receivers]
    frame = None
    if channels is not None:
        frame = [ch.frame() for ch in channels]
        for s, (pg, pe) in zip(rx, frame):
            if pg != 1 or pe != 1:
                state = apply_unitary(state, (s,), np.diag([pg, pe]), check=False)

    record = dict(scheme=scheme, bell_outcomes=kinds, bell_bits=bits, frame=frame)
    target = target_state(inp, layout.receivers)

    if filtered:
        w_a, w_b, bits_a = branch_weights(kinds, channels)
        big_bits = bits_a if w_a >= w_b else tuple(1 - x for x in bits_a)
        big, small = max(w_a, w_b), min(w_a, w_b)
        if big == 0.0:
            # unreachable in practice: such a branch has zero probability
            return ProtocolRunRecord(correction=None, success=False, final_state=state,
                                     fidelity=fidelity_up_to_phase(state, target),
                                     branch_probability=prob, **record)
        excited = [j for j, x in enumerate(big_bits) if x == 1]
        t = excited[-1] if excited else n - 1
        pre_flip = not excited
        jc = JCParams(math.acos(min(1.0, small / big)) + filter_offset)
        if pre_flip:
            state = apply_unitary(state, (rx[t],), X, check=False)
        state = tensor(state, QState(G, ("C",)))
        mode = state.num_sites - 1
        state = apply_jc_filter(state, rx[t], mode, jc)
        rec = measure(state, (mode,), rng, None if photon is None else (int(photon),))
        prob *= rec.probability
        detected = bool(rec.outcome[0])
        state = discard_sites(rec.post_state, (mode,), rec.outcome)
        record.update(filter_params=jc, filter_target=layout.receivers[t],
                      filter_pre_flip=pre_flip, photon_detected=detected)
        if detected:
            return ProtocolRunRecord(correction=None, success=False, final_state=state,
                                     fidelity=fidelity_up_to_phase(state, target),
                                     branch_probability=prob, **record)
        if pre_flip:
            state = apply_unitary(state, (rx[t],), X, check=False)

    corr = None
    if correct:
        corr = correction_for(table, kinds)
        state = _apply_tags(state, rx, corr.ops)
    return ProtocolRunRecord(correction=corr, success=True, final_state=state,
                             fidelity=fidelity_up_to_phase(state, target),
                             branch_probability=prob, **record)


def teleport_maximal(inp: InputState, rng=None, *, outcomes=None,
                     dispersive: DispersiveParams = CANONICAL,
                     correct: bool = True) -> ProtocolRunRecord:
    """Deterministic scheme with two ``(|ge> - i|eg>)/sqrt2`` channels."""
    v = MAXIMAL_CHANNEL.vector()
    return _run("maximal", PAIR_LAYOUT, inp, (v, v), channels=None, filtered=False,
                table="maximal", rng=rng, outcomes=outcomes, dispersive=dispersive,
                correct=correct)


def teleport_nonmaximal(inp: InputState, ch1: ChannelSpec, ch2: ChannelSpec, rng=None, *,
                        outcomes=None, photon: int | None = None,
                        dispersive: DispersiveParams = CANONICAL, filter_offset: float = 0.0,
                        correct: bool = True) -> ProtocolRunRecord:
    """Probabilistic scheme; ``success`` is False when the filter emits a photon."""
    return _run("nonmaximal", PAIR_LAYOUT, inp, (ch1.vector(), ch2.vector()),
                channels=(ch1, ch2), filtered=True, table="nonmaximal", rng=rng,
                outcomes=outcomes, photon=photon, dispersive=dispersive,
                filter_offset=filter_offset, correct=correct)


def _ghz_channels(n: int, channels):
    if isinstance(channels, str):
        if channels == "maximal":
            return [GHZ_FORM_CHANNEL] * n, None, False, "ghz:maximal"
        if channels == "maximal-ge":
            return [MAXIMAL_CHANNEL.vector()] * n, None, False, "ghz:maximal-ge"
        raise ProtocolError(f"unknown channel designator {channels!r}; use one of {MAXIMAL_FORMS}")
    channels = list(channels)
    if len(channels) != n:
        raise ProtocolError(f"need {n} channels, got {len(channels)}")
    return [c.vector() for c in channels], channels, True, "ghz:maximal-ge"


def teleport_ghz_n(inp: InputState, n: int, channels="maximal", rng=None, *,
                   outcomes=None, photon: int | None = None,
                   dispersive: DispersiveParams = CANONICAL, filter_offset: float = 0.0,
                   correct: bool = True, _allow_n1: bool = False) -> ProtocolRunRecord:
    """N-partite scheme.

    ``channels`` is ``"maximal"`` for ``(|ee>+|gg>)/sqrt2`` pairs,
    ``"maximal-ge"`` for ``(|ge>-i|eg>)/sqrt2`` pairs, or a list of ``n``
    :class:`ChannelSpec` (filtered, post-selected on no photon).
    """
    if not isinstance(n, int) or n > MAX_GHZ_N or n < (1 if _allow_n1 else 2):
        raise ProtocolError(f"n must be an integer in [2, {MAX_GHZ_N}], got {n!r}")
    vecs, specs, filtered, table = _ghz_channels(n, channels)
    return _run("ghz", ghz_layout(n), inp, vecs, channels=specs, filtered=filtered,
                table=table, rng=rng, outcomes=outcomes, photon=photon,
                dispersive=dispersive, filter_offset=filter_offset, correct=correct)
