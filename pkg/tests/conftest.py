import os
from collections import OrderedDict

import pytest

# criterion id -> list of (check, ok, detail)
_RESULTS: "OrderedDict[int, list]" = OrderedDict()

CRITERIA = {
    1: "closed-form identities",
    2: "quadrature vs closed form",
    3: "ratio supremum",
    4: "oracle equivalence",
    5: "CQ simulation vs M/M/k",
    6: "JSQ convergence in k",
    7: "I1F equals JSQ",
    8: "dominance ordering",
    9: "state-space collapse and idle timescale",
    10: "SDE stationarity",
    11: "PS insensitivity",
    12: "CLI determinism",
}


class _Recorder:
    def __call__(self, criterion: int, check: str, ok: bool, detail: str = "") -> bool:
        _RESULTS.setdefault(criterion, []).append((check, bool(ok), detail))
        return bool(ok)


@pytest.fixture(scope="session")
def record():
    """Log a sub-check of an acceptance criterion; the summary prints one line per criterion."""
    return _Recorder()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_RESULTS):
        checks = _RESULTS[cid]
        ok = all(c[1] for c in checks)
        failed = [f"{name}: {detail}" for name, good, detail in checks if not good]
        shown = "; ".join(failed) if failed else "; ".join(f"{n}: {d}" for n, _, d in checks if d)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {cid:2d} ({CRITERIA.get(cid, '?')}) {shown}")
    missing = [c for c in CRITERIA if c not in _RESULTS]
    if missing:
        tr.write_line(f"not run: {', '.join(str(c) for c in missing)}")


def pytest_collection_modifyitems(config, items):
    # NDS_FAST=1 skips the long simulation checks
    if os.environ.get("NDS_FAST") != "1":
        return
    skip = pytest.mark.skip(reason="NDS_FAST=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
