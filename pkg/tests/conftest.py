import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()

from vpdebug.harness import datasets
from vpdebug.inject.pipeline import run_injection, train_infill_model
from vpdebug.inject.sampling import MaskBestConfig


@pytest.fixture(scope="session")
def store():
    return datasets.default_store()


@pytest.fixture(scope="session")
def pool():
    return datasets.load_pool(datasets.pool_correct_path())


@pytest.fixture(scope="session")
def natural_pool():
    return datasets.load_pool(datasets.pool_incorrect_path())


@pytest.fixture(scope="session")
def infill(pool):
    """(vocab, model) trained on the bundled correct pool."""
    return train_infill_model([p.program for p in pool])


@pytest.fixture(scope="session")
def injected(pool, store, infill):
    """Mask-best injection over the bundled pool, default settings."""
    vocab, model = infill
    return run_injection(pool, store, model, vocab, MaskBestConfig(seed=0), "mask-best")


@pytest.fixture(scope="session")
def fig_scene(store):
    return store.get(datasets.GOLDEN_SCENE_ID)


@pytest.fixture(scope="session")
def fig_program():
    return datasets.golden_program_path().read_text(encoding="utf-8")


@pytest.fixture
def verdict(request):
    """Record an acceptance verdict line; all lines are repeated in the run summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def emit(line: str):
        print(line)
        lines.append(line)

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion ")[1].split(" ")[0])):
            terminalreporter.write_line(line)
