import itertools

import pytest

from cavity_teleport.cavity_ops import BELL_BITS, BellKind
from cavity_teleport.corrections import (
    CLIFFORD_TAGS,
    PAULI_TAGS,
    correction_for,
    derive_tables,
    load_tables,
    tables_to_json,
    tag_matrix,
)
from cavity_teleport.protocol import ProtocolError
import numpy as np


def test_frozen_tables_match_fresh_derivation():
    derived = tables_to_json(derive_tables())
    frozen = tables_to_json(load_tables())
    assert derived == frozen


@pytest.mark.parametrize("scheme", ["maximal", "nonmaximal"])
def test_two_pair_tables_are_complete_and_pauli(scheme):
    table = load_tables()[scheme]
    assert len(table) == 16
    for op in table.values():
        assert len(op.ops) == 2 and set(op.ops) <= set(PAULI_TAGS)
        assert abs(abs(op.phase) - 1) < 1e-12


def test_ghz_pair_tables():
    for form in ("maximal", "maximal-ge"):
        t = load_tables()[f"ghz:{form}"]
        assert set(t) == {k.value for k in BellKind}
        assert all(set(op.ops) <= set(CLIFFORD_TAGS) for op in t.values())


def test_tag_products_read_left_to_right():
    np.testing.assert_array_equal(tag_matrix("XZ"), tag_matrix("X") @ tag_matrix("Z"))
    np.testing.assert_array_equal(tag_matrix("I"), np.eye(2))


def test_ghz_corrections_compose_per_pair():
    pair = load_tables()["ghz:maximal"]
    kinds = [BellKind.PhiPlus, BellKind.PsiMinus, BellKind.PhiMinus]
    op = correction_for("ghz", kinds)
    assert op.ops == tuple(t for k in kinds for t in pair[k.value].ops)
    assert correction_for("ghz:maximal", kinds) == op


def test_lookup_accepts_bits_and_rejects_garbage():
    k = (BellKind.PsiPlus, BellKind.PhiMinus)
    assert correction_for("maximal", [BELL_BITS[x] for x in k]) == correction_for("maximal", k)
    with pytest.raises(ProtocolError):
        correction_for("maximal", [BellKind.PhiPlus])
    with pytest.raises(ProtocolError):
        correction_for("bogus", k)
    with pytest.raises(ProtocolError):
        correction_for("ghz", k, form="bogus")
    with pytest.raises(ProtocolError):
        correction_for("maximal", [(2, 0), (0, 0)])


def test_every_table_entry_has_a_key_per_outcome_pair():
    keys = {",".join(k.value for k in ks) for ks in itertools.product(BellKind, repeat=2)}
    assert set(load_tables()["maximal"]) == keys
