import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def tiny_config(**overrides):
    from hufae.model import DrSaeConfig, FusionAeConfig, HufConfig, TrainConfig

    base = dict(
        dr_sae=DrSaeConfig(channels=(2, 4)),
        lff=FusionAeConfig(channels=(8, 8, 8, 8)),
        gff=FusionAeConfig(channels=(8, 8, 8, 4)),
        dr_train=TrainConfig(max_epochs=20, lr=3e-3, max_windows=32),
        lff_train=TrainConfig(max_epochs=4, min_epochs=2),
        gff_train=TrainConfig(max_epochs=4, min_epochs=2),
        share_axis_weights=True,
    )
    base.update(overrides)
    return HufConfig(**base)


@pytest.fixture(scope="session")
def tiny_corpus():
    from hufae.data import generate_synthetic

    batch, truth = generate_synthetic(n_units=2, classes=3, windows_per_class=12,
                                      window_size=128, n_subjects=4)
    return batch, truth


@pytest.fixture(scope="session")
def tiny_fitted(tiny_corpus):
    from hufae.model import ClassifierConfig, HufClassifier

    batch, _ = tiny_corpus
    clf = HufClassifier(config=tiny_config(), classifier=ClassifierConfig(hidden=(16,), epochs=10),
                        random_state=3)
    return clf.fit(batch.windows, batch.labels)


# acceptance criteria: tests tagged ``@pytest.mark.criterion(name)`` roll up
# into one PASS/FAIL line per criterion at the end of the session
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion checked by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    status, details = _CRITERIA.get(mark.args[0], ("PASS", []))
    if rep.failed:
        status = "FAIL"
    elif rep.skipped and status == "PASS":
        status = "SKIP"
    details = details + [str(v) for k, v in item.user_properties if k == "detail"]
    _CRITERIA[mark.args[0]] = (status, details)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, details) in _CRITERIA.items():
        terminalreporter.write_line(f"{status}  {name}" + (f"  ({'; '.join(details)})"
                                                           if details else ""))
