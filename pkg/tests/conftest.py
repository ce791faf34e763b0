import pytest

from tkgrules import build_store
from tkgrules.synthetic import random_quadruples

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(text): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        _CRITERIA.append((status, marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for status, text in _CRITERIA:
        terminalreporter.write_line(f"{status}  {text}")


def make_store(facts):
    """Store from ``(s, r, o, t)`` tuples with arbitrary printable fields."""
    return build_store([tuple(str(x) for x in f) for f in facts])


def random_store(seed, n_entities=20, n_relations=3, n_facts=120, n_times=10):
    return build_store(random_quadruples(n_entities, n_relations, n_facts, n_times, seed))


def base_facts(store):
    """Encoded base facts straight from the store's edge arrays."""
    R = store.num_base_relations
    return [e for e in store.edges() if e.relation < R]
