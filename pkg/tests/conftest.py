import os
from collections import defaultdict
from importlib import resources
from pathlib import Path

import pytest

from fotag.dolce import load_alignments
from fotag.propagation import propagate
from fotag.tagging import load_stopwords
from fotag.verbs import build_verb_alignment, load_overrides
from fotag.wordnet import parse_wordnet

DATA = Path(__file__).parent / "data"
MINIWN = DATA / "miniwn"
REAL_WORDNET = Path(os.environ.get("FOTAG_WORDNET", "/root/data/wordnet-3.0"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")
    config._criteria = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        detail = ""
        if rep.skipped and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2]
        item.config._criteria[marker.args[0]].append((item.name, rep.outcome, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    criteria = config._criteria
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(criteria):
        results = criteria[n]
        outcomes = {o for _, o, _ in results}
        if "failed" in outcomes:
            status = "FAIL"
        elif outcomes == {"skipped"}:
            status = "SKIP"
        else:
            status = "PASS"
        passed = sum(o == "passed" for _, o, _ in results)
        line = f"criterion {n}: {status} ({passed}/{len(results)} checks passed)"
        skipped = [f"{name}: {d}" for name, o, d in results if o == "skipped"]
        if skipped:
            line += "; skipped " + "; ".join(skipped)
        failed = [name for name, o, _ in results if o == "failed"]
        if failed:
            line += "; failed " + ", ".join(failed)
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mini():
    return parse_wordnet(MINIWN)


@pytest.fixture(scope="session")
def stopwords():
    return load_stopwords()


@pytest.fixture(scope="session")
def mini_nouns(mini):
    store, _ = propagate(mini, load_alignments(DATA / "mini_seeds.tsv"))
    return store


@pytest.fixture(scope="session")
def mini_store(mini, mini_nouns):
    """Noun and verb alignment of the mini WordNet with the curator file applied."""
    verbs, _, _ = build_verb_alignment(mini, mini_nouns, load_overrides(DATA / "mini_overrides.tsv"))
    return mini_nouns.merged(verbs)


@pytest.fixture(scope="session")
def real():
    if not (REAL_WORDNET / "data.verb").exists():
        pytest.skip(f"WordNet 3.0 not found at {REAL_WORDNET} (set FOTAG_WORDNET)")
    return parse_wordnet(REAL_WORDNET)


@pytest.fixture(scope="session")
def real_nouns(real):
    seeds = load_alignments(resources.files("fotag.data") / "wn30_demo_noun_seeds.tsv")
    store, _ = propagate(real, seeds)
    return store
