import re
import sys
from pathlib import Path

import pytest

# make the oracle module importable as ``oracles``
sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).parent.parent
CONFIG_DIR = ROOT / "configs"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def committed_runs(tmp_path_factory):
    """``simulate`` on every committed config once: name -> (exit code, output dir)."""
    from mch.cli import main

    out = {}
    for path in sorted(CONFIG_DIR.glob("*.ini")):
        d = tmp_path_factory.mktemp(path.stem)
        out[path.stem] = (main(["simulate", "--config", str(path), "--out", str(d)]), d)
    return out


# acceptance verdict lines, filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = re.match(r"test_(\d\d)_", item.name)
    if item.module.__name__ == "test_acceptance" and m and rep.failed:
        n = int(m.group(1))
        # a crash before the verdict still yields a line
        ACCEPTANCE.setdefault(n, f"FAIL  criterion {n:2d}  {item.name}: {call.excinfo.typename if call.excinfo else 'error'}")
