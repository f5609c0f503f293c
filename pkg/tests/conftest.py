import numpy as np
import pytest

from solitonlab import jets


@pytest.fixture(params=["python", "cython"])
def backend(request):
    if request.param == "cython" and jets._ck is None:
        pytest.skip("compiled kernel not built")
    before = jets.KERNEL_BACKEND
    jets.set_backend(request.param)
    yield request.param
    jets.set_backend(before)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = {}


@pytest.fixture
def record():
    """``record(n, part, ok, detail)`` logs one acceptance result for the summary."""

    def _record(n, part, ok, detail=""):
        ACCEPTANCE.setdefault(n, []).append((part, bool(ok), detail))
        print(f"criterion {n} [{part}]: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}: {'ok' if good else 'FAIL'} {d}".rstrip() for name, good, d in parts)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({detail})")
