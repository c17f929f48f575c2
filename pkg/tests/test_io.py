import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triagg import io
from triagg.composite import CompositeAlgorithm
from triagg.core import compose
from triagg.errors import FormatError
from triagg.sparse import SparseMatrix
from triagg.strassen import strassen
from triagg.verify import certify, verify_exact

from conftest import new25


def roundtrip(obj, **kw):
    text = io.dumps(io.document_of(obj, **kw))
    back = io.parse(text)
    return text, back


def test_strassen_roundtrip_bit_identical():
    S, _ = certify(strassen(), "exact")
    text, back = roundtrip(S)
    assert back.same_as(S) and back.verified == S.verified
    assert io.dumps(io.document_of(back)) == text


def test_factored_roundtrip_keeps_tags_and_cells():
    alg = new25(6)
    text, back = roundtrip(alg)
    assert back.factored and back.same_as(alg)
    assert back.tags == alg.tags
    assert [c.cell for c in back.cells] == [c.cell for c in alg.cells]
    assert io.dumps(io.document_of(back)) == text
    assert "U" not in json.loads(text)


def test_expanded_export():
    alg = new25(6)
    _, back = roundtrip(alg, expand=True)
    assert not back.factored
    assert back.U == alg.U and back.V == alg.V and back.W == alg.W


def test_composite_roundtrip(replacement48):
    comp = CompositeAlgorithm(new25(4), replacement48, pairs=[(0, 1), (2, 0)])
    text, back = roundtrip(comp)
    assert isinstance(back, CompositeAlgorithm)
    assert back.t == comp.t and back.pairs == comp.pairs
    assert io.dumps(io.document_of(back)) == text


def test_composite_rank_mismatch(replacement48):
    doc = io.document_of(CompositeAlgorithm(new25(4), replacement48))
    doc["t"] += 1
    with pytest.raises(FormatError):
        io.parse(json.dumps(doc))


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(0, 2), st.integers(0, 3), st.fractions(max_denominator=50).filter(bool)),
        max_size=8,
        unique_by=lambda e: e[:2],
    )
)
def test_random_matrix_roundtrip(entries):
    M = SparseMatrix.from_entries((3, 4), entries)
    back = io.matrix_from_entries((3, 4), io.matrix_entries(M))
    assert back == M


def doc_with(**changes):
    doc = io.to_document(strassen())
    doc.update(changes)
    return json.dumps(doc)


@pytest.mark.parametrize(
    "bad",
    [
        {"U": [[0, 0, "1"], [0, 0, "1"]]},
        {"U": [[9, 0, "1"]]},
        {"U": [[0, 7, "1"]]},
        {"U": [[0, 0, "1+2j"]]},
        {"U": [[0, 0, 1.5]]},
        {"U": [[0, 0, "x"]]},
        {"field": "complex"},
        {"m": 0},
        {"t": -1},
        {"tags": [None]},
        {"format": "something-else"},
    ],
)
def test_malformed_documents(bad):
    with pytest.raises(FormatError):
        io.parse(doc_with(**bad))


def test_missing_and_invalid_json(tmp_path):
    with pytest.raises(FormatError):
        io.load(tmp_path / "nope.json")
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        io.load(p)
    doc = io.to_document(strassen())
    del doc["W"]
    with pytest.raises(FormatError):
        io.parse(json.dumps(doc))


def test_save_and_load(tmp_path):
    alg = compose(strassen(), strassen())
    io.save(alg, tmp_path / "a.json")
    assert io.load(tmp_path / "a.json").same_as(alg)


def test_bundled_replacement_loads():
    rep = io.load_bundled_replacement()
    assert rep.t == 48 and rep.verified["mode"] == "exact"


def test_supplemental_importer(tmp_path):
    S = strassen()
    lines = []
    for key, X in zip("UVW", (S.U, S.V, S.W)):
        lines.append(f"{key}:")
        for row in X.to_dense():
            lines.append(" ".join(str(v) for v in row))
    (tmp_path / "s.txt").write_text("# Strassen\n" + "\n".join(lines) + "\n")
    alg = io.load_supplemental(tmp_path / "s.txt", (2, 2, 2))
    assert alg.same_as(S) and verify_exact(alg)

    # transposed listing, comma separated
    lines = []
    for key, X in zip("UVW", (S.U, S.V, S.W)):
        lines.append(key)
        for col in zip(*X.to_dense()):
            lines.append(", ".join(str(v) for v in col))
    (tmp_path / "t.txt").write_text("\n".join(lines))
    assert io.load_supplemental(tmp_path / "t.txt", (2, 2, 2)).same_as(S)


@pytest.mark.parametrize(
    "text",
    ["1 0 0 1\n", "U\n1 0 0 1\nV\n1 0 0 1\n", "U\n1 0\n1 0 0\nV\n1\nW\n1\n", "U\n1 2 3\nV\n1 2 3\nW\n1 2 3\n"],
)
def test_supplemental_rejects(tmp_path, text):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(FormatError):
        io.load_supplemental(p, (2, 2, 2))


def test_rational_text_form():
    M = SparseMatrix.from_entries((1, 2), [(0, 0, Fraction(-3, 4)), (0, 1, 5)])
    assert io.matrix_entries(M) == [[0, 0, "-3/4"], [0, 1, "5"]]
