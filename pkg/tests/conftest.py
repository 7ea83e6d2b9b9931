import os

import pytest

from rlnc_reliability.harness import preset, run_sweep

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}
N_CRITERIA = 12


@pytest.fixture(scope="session")
def table2_rows():
    """Bounds and 10^5-trial simulations on every point of the evaluation grid."""
    workers = int(os.environ.get("RLNC_TEST_WORKERS", os.cpu_count() or 1))
    rows = []
    for cfg in preset("paper"):
        if cfg.name in ("nonsystematic", "systematic"):
            rows.extend(run_sweep(cfg, workers=workers))
    return rows


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        if n in ACCEPTANCE_RESULTS:
            ok, detail = ACCEPTANCE_RESULTS[n]
            tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            tr.write_line(f"criterion {n:2d}: NOT RUN")
