import numpy as np
import pytest

from revsynth.permutation import Permutation

ACCEPTANCE_LINES = []


def example_f(x):
    if x == 0:
        return 0
    if x == 254:
        return 1
    if x == 255:
        return 2
    return x + 2


@pytest.fixture
def example_perm():
    return Permutation.from_images(8, [example_f(x) for x in range(256)])


def random_support_perm(n, k, rng):
    """Permutation fixing 0 whose support is exactly ``k`` random nonzero points."""
    pts = rng.choice(np.arange(1, 1 << n), size=k, replace=False)
    while True:
        order = rng.permutation(k)
        if not np.any(order == np.arange(k)):
            break
    img = np.arange(1 << n)
    img[pts] = pts[order]
    return Permutation.from_images(n, img)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
