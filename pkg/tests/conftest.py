import os
from pathlib import Path

# generated datasets are cached between runs unless the caller points elsewhere
os.environ.setdefault("CUSPCOEFFS_DATA", str(Path(__file__).resolve().parent.parent / ".pytest_cache" / "cuspcoeffs-data"))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
