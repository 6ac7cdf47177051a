import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[int, tuple[str, str]] = {}
_details: dict[int, list[str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed
    if report.when == "call" or failed:
        prev = _criteria.get(number, (title, "PASS"))[1]
        status = "FAIL" if failed or prev == "FAIL" else "PASS"
        _criteria[number] = (title, status)
    if report.when == "call":
        tag = "ok" if report.passed else "FAILED"
        for key, value in report.user_properties:
            if key == "detail":
                _details.setdefault(number, []).append(f"{value} [{tag}]")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
        for line in _details.get(number, []):
            terminalreporter.write_line(f"         {line}")


def write_survey(path, n=240, seed=0, with_zero_krill=True):
    """Whale presence driven by sea temperature and depth; krill is noise."""
    rng = np.random.default_rng(seed)
    sst = rng.uniform(0, 8, n)
    depth = rng.uniform(-3000, -100, n)
    krill = rng.lognormal(0, 2, n)
    if with_zero_krill:
        krill[rng.random(n) < 0.2] = 0.0
    logit = 2.0 * (sst < 3) + 1.5 * (depth < -1500) - 1.5
    whale = (rng.random(n) < 1 / (1 + np.exp(-logit))).astype(int) * rng.integers(1, 4, n)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("whale,krill,sst,depth\n")
        for row in zip(whale, krill, sst, depth):
            fh.write(",".join(repr(float(v)) if i else str(v) for i, v in enumerate(row)) + "\n")
    return path


SURVEY_CONFIG = {
    "response": "whale",
    "predictors": ["krill", "sst", "depth"],
    "extra_responses": ["krill"],
    "iterations": 20,
    "seed": 5,
    "grid_size": 30,
    "columns": {
        "whale": {"kind": "binary"},
        "krill": {"kind": "continuous", "log_transform": True, "range": [-6, 8]},
        "sst": {"kind": "continuous", "range": [-3, 8]},
        "depth": {"kind": "continuous", "range": [-3000, -100]},
    },
}


@pytest.fixture
def survey(tmp_path):
    data = write_survey(tmp_path / "survey.csv")
    config = tmp_path / "config.json"
    config.write_text(json.dumps(SURVEY_CONFIG))
    return data, config
