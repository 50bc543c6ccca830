import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return _write


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(capsys):
    """Record a PASS/FAIL line for an acceptance criterion; use as a context manager."""
    class _Criterion:
        def __init__(self, number, title):
            self.line = f"criterion {number:2d} {title}"

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            msg = f"[{status}] {self.line}"
            if exc is not None:
                msg += f" :: {str(exc).splitlines()[0] if str(exc) else exc_type.__name__}"
            ACCEPTANCE_LINES.append(msg)
            with capsys.disabled():
                print("\n" + msg)
            return False

    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
