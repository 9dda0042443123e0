import numpy as np
import pytest

from harkit.dataset import FeatureDataset
from harkit.synthetic import make_windows

_CRITERIA = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _CRITERIA.append((marker.args[0], marker.args[1], item.name, status))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    grouped = {}
    for n, text, name, status in _CRITERIA:
        grouped.setdefault((n, text), []).append(status)
    terminalreporter.section("acceptance criteria")
    for (n, text), statuses in sorted(grouped.items()):
        if "FAIL" in statuses:
            status = "FAIL"
        elif all(s == "SKIP" for s in statuses):
            status = "SKIP"
        else:
            status = "PASS"
        detail = f"{statuses.count('PASS')}/{len(statuses)} checks passed"
        terminalreporter.write_line(f"criterion {n} [{status}] {text} ({detail})")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian_clusters(n_per_class, n_features=6, separation=10.0, seed=0,
                      classes=("staying", "jump_left", "jump_right", "fake_move")):
    """Unit-variance clusters whose centres sit ``separation`` sigma apart."""
    r = np.random.default_rng(seed)
    X, y = [], []
    for i, c in enumerate(classes):
        centre = np.zeros(n_features)
        centre[i % n_features] = separation * (1 + i // n_features)
        X.append(centre + r.standard_normal((n_per_class, n_features)))
        y += [c] * n_per_class
    names = tuple(f"f{j}" for j in range(n_features))
    return FeatureDataset(np.vstack(X), y, names)


@pytest.fixture(scope="session")
def synthetic_windows():
    return make_windows({"staying": 30, "jump_left": 30, "jump_right": 30, "fake_move": 30},
                        seed=7, noise=0.3)
