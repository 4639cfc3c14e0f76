import os
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
DATA = Path(os.environ.get("BALLPARK_DATA", ROOT / "data"))


def require_data(*parts):
    path = DATA.joinpath(*parts)
    if not path.exists():
        pytest.fail(f"missing {path}; run `python3 scripts/prepare_data.py` "
                    "to fetch the evaluation corpora")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_log.LINES,
                           key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
