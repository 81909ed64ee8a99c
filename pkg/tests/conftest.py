from __future__ import annotations

from pathlib import Path

import pytest

from falldetect.cli import main

_ACCEPTANCE: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        if rep.when == "call":
            _ACCEPTANCE.append(("PASS" if rep.passed else "FAIL", doc))
        elif rep.when == "setup" and rep.skipped:
            _ACCEPTANCE.append(("SKIP", doc))
        elif rep.when == "setup" and rep.failed:
            _ACCEPTANCE.append(("FAIL", doc))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, doc in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {doc}")


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory) -> Path:
    """100 Fall + 100 ADL synthetic recordings in SisFall format."""
    root = tmp_path_factory.mktemp("synth") / "corpus"
    assert main(["synth", "--count", "100", "--seed", "7", "--out", str(root)]) == 0
    return root


@pytest.fixture(scope="session")
def synth_cache(synth_corpus, tmp_path_factory) -> Path:
    cache = tmp_path_factory.mktemp("cache") / "features.csv"
    assert main(["extract", "--root", str(synth_corpus), "--cache", str(cache), "--workers", "2"]) == 0
    return cache
