import os
import sys
from contextlib import contextmanager

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_VERDICTS = {}


class _Recorder:
    @contextmanager
    def criterion(self, number, title):
        """Run the block as acceptance criterion ``number``; an AssertionError marks it FAIL."""
        try:
            yield
        except BaseException as e:
            _VERDICTS[number] = ("FAIL", title, str(e).splitlines()[0] if str(e) else type(e).__name__)
            raise
        else:
            _VERDICTS.setdefault(number, ("PASS", title, ""))


@pytest.fixture(scope="session")
def acceptance():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        verdict, title, detail = _VERDICTS[number]
        line = f"criterion {number:>2}: {verdict}  {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
