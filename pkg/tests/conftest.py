import contextlib
import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from triagg import gen_new25, gen_pan, io, strassen  # noqa: E402

DATA = Path(__file__).resolve().parent / "data"


@functools.lru_cache(maxsize=None)
def new25(n0: int, path: str = "literal"):
    return gen_new25(n0, path=path)


@functools.lru_cache(maxsize=None)
def pan(n0: int):
    return gen_pan(n0)


@pytest.fixture(scope="session")
def strassen_alg():
    return strassen()


@pytest.fixture(scope="session")
def replacement48():
    return io.load(DATA / "mm444_r48.json")


# acceptance criteria: criterion id -> (description, list of part outcomes)
CRITERIA: dict = {}


def _status(ok) -> str:
    return "BLOCKED" if ok is None else ("PASS" if ok else "FAIL")


def record(cid: str, description: str, ok, detail: str = "") -> None:
    """``ok`` is True, False, or None for a part that cannot be attained."""
    desc, parts = CRITERIA.setdefault(cid, (description, []))
    parts.append((ok, detail))
    print(f"{cid} {_status(ok)}: {description} {detail}".rstrip())


@contextlib.contextmanager
def criterion(cid: str, description: str, detail: str = ""):
    """Record one part of an acceptance criterion; any exception marks it failed."""
    try:
        yield
    except BaseException:
        record(cid, description, False, detail)
        raise
    record(cid, description, True, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(CRITERIA, key=lambda c: int(c[2:])):
        desc, parts = CRITERIA[cid]
        failed = [d for p, d in parts if p is False]
        blocked = [d for p, d in parts if p is None]
        passed = [d for p, d in parts if p]
        line = f"{cid} {'FAIL' if failed else 'PASS'}: {desc} ({len(passed)} parts passed)"
        if failed:
            line += f"; failed: {', '.join(failed)}"
        if blocked:
            line += f"; blocked: {', '.join(blocked)}"
        terminalreporter.write_line(line)
