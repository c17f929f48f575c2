"""JSON file format for algorithms.

An algorithm document is a single JSON object::

    {"format": "triagg-algorithm", "version": 1, "name": ...,
     "m": 2, "n": 2, "p": 2, "t": 7, "field": "rational",
     "U": [[row, col, "num/den"], ...], "V": [...], "W": [...],
     "tags": [...], "verified": {...}}

Coefficients are canonical rational strings (the denominator is omitted
when it is 1).  Entries are written in row-major order so that equal
algorithms give byte-identical files.  Factored algorithms store their
working matrices as ``U_phi``, ``V_phi``, ``W_phi`` together with ``s0`` and
either a shared ``phi`` or the three transforms ``phi_A``, ``phi_B``,
``phi_C``; the effective ``U``, ``V``, ``W`` are then left out unless
requested.  Trace cells, when present, are kept so that a loaded base
algorithm can be composed and substituted again.

Composite (two-level, substituted) algorithms have their own small
document that references a base and an optional replacement.
"""

from __future__ import annotations

import json
from pathlib import Path

from .core import (
    UNTAGGED,
    Aggregation,
    BilinearAlgorithm,
    Cancellation,
    Composed,
    CorrectionDiag,
    Replacement,
    TraceCell,
    Untagged,
)
from .errors import FormatError
from .sparse import SparseMatrix, format_rational, parse_rational

FORMAT = "triagg-algorithm"
COMPOSITE_FORMAT = "triagg-composite"
VERSION = 1


# ---------------------------------------------------------------------------
# Matrices and tags
# ---------------------------------------------------------------------------


def matrix_entries(M: SparseMatrix) -> list:
    return [[int(r), int(c), format_rational(v)] for r, c, v in M.entries()]


def matrix_from_entries(shape, entries, what: str = "matrix") -> SparseMatrix:
    if not isinstance(entries, list):
        raise FormatError(f"{what}: expected a list of [row, col, value] triples")
    parsed = []
    for e in entries:
        if not (isinstance(e, list) and len(e) == 3):
            raise FormatError(f"{what}: malformed entry {e!r}")
        r, c, v = e
        if not (isinstance(r, int) and isinstance(c, int)) or isinstance(r, bool) or isinstance(c, bool):
            raise FormatError(f"{what}: indices must be integers, got {e!r}")
        if isinstance(v, int) and not isinstance(v, bool):
            v = str(v)
        if not isinstance(v, str):
            raise FormatError(f"{what}: coefficient must be a rational string, got {v!r}")
        parsed.append((r, c, parse_rational(v)))
    try:
        return SparseMatrix.from_entries(shape, parsed, accumulate=False)
    except FormatError as exc:
        raise FormatError(f"{what}: {exc}") from None


def _matrix_doc(M: SparseMatrix) -> dict:
    return {"shape": [M.nrows, M.ncols], "entries": matrix_entries(M)}


def _matrix_from_doc(doc, what: str) -> SparseMatrix:
    if not isinstance(doc, dict) or "shape" not in doc or "entries" not in doc:
        raise FormatError(f"{what}: expected an object with shape and entries")
    shape = doc["shape"]
    if not (isinstance(shape, list) and len(shape) == 2 and all(isinstance(x, int) and x >= 0 for x in shape)):
        raise FormatError(f"{what}: bad shape {shape!r}")
    return matrix_from_entries(shape, doc["entries"], what)


def tag_to_json(tag):
    if isinstance(tag, Untagged):
        return None
    if isinstance(tag, Aggregation):
        return ["agg", tag.table, list(tag.triple), tag.barred]
    if isinstance(tag, CorrectionDiag):
        return ["diag", tag.i, tag.slot]
    if isinstance(tag, Cancellation):
        return ["cancel", list(tag.cell), tag.slot]
    if isinstance(tag, Replacement):
        return ["repl", [list(c) for c in tag.cells], tag.slot]
    if isinstance(tag, Composed):
        return ["comp", tag_to_json(tag.left), tag_to_json(tag.right)]
    if isinstance(tag, tuple):
        return ["cell", list(tag)]
    raise FormatError(f"cannot serialize tag {tag!r}")


def tag_from_json(obj):
    if obj is None:
        return UNTAGGED
    try:
        kind = obj[0]
        if kind == "agg":
            return Aggregation(int(obj[1]), tuple(int(x) for x in obj[2]), bool(obj[3]))
        if kind == "diag":
            return CorrectionDiag(int(obj[1]), int(obj[2]))
        if kind == "cancel":
            return Cancellation(tuple(int(x) for x in obj[1]), int(obj[2]))
        if kind == "repl":
            return Replacement(tuple(tuple(int(x) for x in c) for c in obj[1]), int(obj[2]))
        if kind == "comp":
            return Composed(tag_from_json(obj[1]), tag_from_json(obj[2]))
        if kind == "cell":
            return tuple(int(x) for x in obj[1])
    except (TypeError, IndexError, ValueError):
        pass
    raise FormatError(f"unrecognized tag {obj!r}")


# ---------------------------------------------------------------------------
# Algorithm documents
# ---------------------------------------------------------------------------


def _cell_doc(c: TraceCell) -> dict:
    return {
        "cell": list(c.cell),
        "offset": c.offset,
        "E_A": _matrix_doc(c.E_A),
        "E_B": _matrix_doc(c.E_B),
        "E_C": _matrix_doc(c.E_C),
        "local": to_document(c.local),
    }


def _cell_from_doc(doc) -> TraceCell:
    try:
        return TraceCell(
            tuple(int(x) for x in doc["cell"]),
            _matrix_from_doc(doc["E_A"], "E_A"),
            _matrix_from_doc(doc["E_B"], "E_B"),
            _matrix_from_doc(doc["E_C"], "E_C"),
            from_document(doc["local"]),
            int(doc["offset"]),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed trace cell: {exc}") from None


def to_document(alg: BilinearAlgorithm, expand: bool = False, cells: bool = True) -> dict:
    """JSON-ready dict for ``alg``.

    With ``expand`` a factored algorithm is written through its effective
    matrices instead of the factored layout.
    """
    m, n, p = alg.dims
    doc = {"format": FORMAT, "version": VERSION}
    if alg.name is not None:
        doc["name"] = alg.name
    doc.update({"m": m, "n": n, "p": p, "t": alg.t, "field": "rational"})
    if alg.factored and not expand:
        Up, Vp, Wp = alg.working
        tA, tB, tC = alg.transforms
        doc["s0"] = tA.nrows
        doc["U_phi"], doc["V_phi"], doc["W_phi"] = (matrix_entries(X) for X in (Up, Vp, Wp))
        if tA == tB and tB == tC and tA.nrows == tB.nrows == tC.nrows:
            doc["phi"] = _matrix_doc(tA)
        else:
            doc["phi_A"], doc["phi_B"], doc["phi_C"] = (_matrix_doc(T) for T in (tA, tB, tC))
    else:
        doc["U"], doc["V"], doc["W"] = (matrix_entries(X) for X in (alg.U, alg.V, alg.W))
    if any(not isinstance(tg, Untagged) for tg in alg.tags):
        doc["tags"] = [tag_to_json(tg) for tg in alg.tags]
    if alg.verified is not None:
        doc["verified"] = alg.verified
    if cells and alg.cells is not None:
        doc["cells"] = [_cell_doc(c) for c in alg.cells]
    return doc


def _require_int(doc: dict, key: str, minimum: int = 0) -> int:
    val = doc.get(key)
    if not isinstance(val, int) or isinstance(val, bool) or val < minimum:
        raise FormatError(f"field {key!r} must be an integer >= {minimum}")
    return val


def from_document(doc: dict) -> BilinearAlgorithm:
    """Parse an algorithm document, rejecting anything malformed."""
    if not isinstance(doc, dict):
        raise FormatError("algorithm document must be a JSON object")
    if doc.get("format", FORMAT) != FORMAT:
        raise FormatError(f"not an algorithm document (format {doc.get('format')!r})")
    fld = doc.get("field", "rational")
    if fld != "rational":
        raise FormatError(f"unsupported coefficient field {fld!r}; only rational is accepted")
    m, n, p = (_require_int(doc, k, 1) for k in "mnp")
    t = _require_int(doc, "t")
    sizes = (m * n, n * p, p * m)
    transforms = None
    if "U_phi" in doc:
        s0 = _require_int(doc, "s0", 1)
        if "phi" in doc:
            phi = _matrix_from_doc(doc["phi"], "phi")
            transforms = (phi, phi, phi)
        else:
            transforms = tuple(_matrix_from_doc(doc.get(k), k) for k in ("phi_A", "phi_B", "phi_C"))
        for T, size in zip(transforms, sizes):
            if T.ncols != size or ("phi" in doc and T.nrows != s0):
                raise FormatError(f"transform shape {T.shape} does not match the dimensions")
        mats = tuple(
            matrix_from_entries((t, T.nrows), doc[k], k)
            for k, T in zip(("U_phi", "V_phi", "W_phi"), transforms)
        )
    else:
        missing = [k for k in "UVW" if k not in doc]
        if missing:
            raise FormatError(f"missing field(s) {missing}")
        mats = tuple(matrix_from_entries((t, size), doc[k], k) for k, size in zip("UVW", sizes))
    tags = None
    if "tags" in doc:
        raw = doc["tags"]
        if not isinstance(raw, list) or len(raw) != t:
            raise FormatError("tags must be a list with one entry per row")
        tags = [tag_from_json(x) for x in raw]
    verified = doc.get("verified")
    if verified is not None and not isinstance(verified, dict):
        raise FormatError("verified metadata must be an object")
    alg = BilinearAlgorithm((m, n, p), *mats, tags, transforms, verified, doc.get("name"))
    if "cells" in doc:
        if not isinstance(doc["cells"], list):
            raise FormatError("cells must be a list")
        alg.cells = [_cell_from_doc(c) for c in doc["cells"]]
    return alg


# ---------------------------------------------------------------------------
# Composite documents
# ---------------------------------------------------------------------------


def composite_to_document(comp) -> dict:
    m, n, p = comp.dims
    doc = {
        "format": COMPOSITE_FORMAT,
        "version": VERSION,
        "name": comp.name,
        "m": m,
        "n": n,
        "p": p,
        "t": comp.t,
        "field": "rational",
        "blocks": comp.blocks,
        "substituted_blocks": comp.substituted_blocks,
        "base": to_document(comp.base),
    }
    if comp.replacement is not None:
        doc["replacement"] = to_document(comp.replacement)
    if comp.pairs is not None:
        doc["pairs"] = [list(x) for x in comp.pairs]
    if comp.verified is not None:
        doc["verified"] = comp.verified
    return doc


def composite_from_document(doc: dict):
    from .composite import CompositeAlgorithm

    if doc.get("format") != COMPOSITE_FORMAT:
        raise FormatError("not a composite document")
    base = from_document(doc.get("base"))
    if base.cells is None:
        raise FormatError("composite base carries no trace cells")
    rep = from_document(doc["replacement"]) if "replacement" in doc else None
    comp = CompositeAlgorithm(base, rep, verify=rep is not None and rep.verified is None, pairs=doc.get("pairs"))
    if comp.t != doc.get("t"):
        raise FormatError(f"declared rank {doc.get('t')} differs from the computed rank {comp.t}")
    if doc.get("verified") is not None:
        comp.verified = doc["verified"]
    return comp


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=False) + "\n"


def document_of(obj, expand: bool = False) -> dict:
    if isinstance(obj, BilinearAlgorithm):
        return to_document(obj, expand=expand)
    if hasattr(obj, "replacement") and hasattr(obj, "base"):
        return composite_to_document(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def save(obj, path, expand: bool = False) -> None:
    Path(path).write_text(dumps(document_of(obj, expand)))


def parse(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    if isinstance(doc, dict) and doc.get("format") == COMPOSITE_FORMAT:
        return composite_from_document(doc)
    return from_document(doc)


def load(path):
    """Read an algorithm (or composite) file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None
    return parse(text)


# ---------------------------------------------------------------------------
# Plain-text import
# ---------------------------------------------------------------------------


def load_supplemental(path, dims) -> BilinearAlgorithm:
    """Best-effort reader for plain-text coefficient listings.

    The file holds three dense matrices introduced by lines ``U``, ``V``
    and ``W`` (an optional trailing colon is allowed); every other
    non-empty line is one row of space or comma separated rationals.
    Lines starting with ``#`` are ignored.  The matrices may be given
    with rows as multiplications (t x size) or transposed (size x t).
    """
    m, n, p = dims
    sizes = {"U": m * n, "V": n * p, "W": p * m}
    blocks: dict = {}
    current = None
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head = line.rstrip(":").strip()
        if head in sizes:
            current = head
            blocks[current] = []
            continue
        if current is None:
            raise FormatError("coefficients before the first U/V/W header")
        blocks[current].append([parse_rational(x) for x in line.replace(",", " ").split()])
    if set(blocks) != set(sizes):
        raise FormatError("expected U, V and W sections")
    mats = []
    for key in "UVW":
        rows = blocks[key]
        width = {len(r) for r in rows}
        if len(width) != 1:
            raise FormatError(f"{key}: ragged rows")
        (w,) = width
        if w != sizes[key]:
            if len(rows) == sizes[key]:
                rows = [list(col) for col in zip(*rows)]
            else:
                raise FormatError(f"{key}: {len(rows)}x{w} does not fit size {sizes[key]}")
        mats.append(SparseMatrix.from_dense(rows))
    if len({X.nrows for X in mats}) != 1:
        raise FormatError("U, V and W have different numbers of rows")
    return BilinearAlgorithm(dims, *mats, name=Path(path).stem)


BUNDLED_REPLACEMENT = Path(__file__).resolve().parent / "data" / "mm444_r48.json"


def load_bundled_replacement() -> BilinearAlgorithm:
    """The shipped rational <4,4,4;48> (coefficients in Z[1/2])."""
    return load(BUNDLED_REPLACEMENT)
