from collections import OrderedDict

import pytest

# criterion id -> [description, all parts passed, detail lines]
_CRITERIA: "OrderedDict[int, list]" = OrderedDict()


class CriterionRecorder:
    def __init__(self, cid: int, title: str):
        self.cid = cid
        entry = _CRITERIA.setdefault(cid, [title, True, []])
        self._entry = entry

    def check(self, ok: bool, detail: str) -> bool:
        ok = bool(ok)
        self._entry[1] &= ok
        self._entry[2].append(("ok  " if ok else "BAD ") + detail)
        return ok


@pytest.fixture
def criterion():
    return CriterionRecorder


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, (title, ok, details) in sorted(_CRITERIA.items()):
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {cid:2d}: {title}")
        for d in details:
            tr.write_line(f"        {d}")
