import numpy as np
import pytest

from latlab import corpus
from latlab.domain import validate_spec

ACCEPTANCE = {}


def record(number, passed, detail=""):
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def ball():
    return corpus.load("ball_d3")


@pytest.fixture(scope="session")
def ss4():
    return corpus.load("ss4_d3")


@pytest.fixture(scope="session")
def ss8():
    return corpus.load("ss8_d3")


@pytest.fixture(scope="session")
def kn():
    return corpus.load("kn_d3")


@pytest.fixture(scope="session")
def mixed5():
    return corpus.load("mixed_d5")


# specs beyond the bundled corpus, used to widen oracle coverage
EXTRA = [
    {"d": 4, "blocks": [[2, 2, 2, 2]], "ms": [1], "name": "ball_d4"},
    {"d": 4, "blocks": [[2, 4], [6, 2]], "ms": [2, 3], "name": "two_block_d4"},
    {"d": 3, "blocks": [[2], [8, 2]], "ms": [3, 1], "name": "lopsided_d3"},
    {"d": 5, "blocks": [[4, 4, 4, 4, 4]], "ms": [1], "name": "ss4_d5"},
]


def extra_specs(max_dim=None):
    specs = [validate_spec(raw) for raw in EXTRA]
    return [s for s in specs if max_dim is None or s.d <= max_dim]


def F_oracle(raw_blocks, ms, x):
    """Defining function written out directly from the block formula (test oracle)."""
    x = np.asarray(x, float)
    total = 0.0
    col = 0
    for blk, m in zip(raw_blocks, ms):
        inner = 0.0
        for w in blk:
            inner = inner + np.abs(x[..., col]) ** w
            col += 1
        total = total + inner**m
    return total - 1.0


def qmc_volume(spec, log2_points=24, seed=0, chunk=2**20):
    """Scrambled Sobol estimate of vol(D) by membership in [-1, 1]^d (test oracle)."""
    from scipy.stats import qmc

    blocks = [list(b) for b in spec.blocks]
    sampler = qmc.Sobol(spec.d, scramble=True, seed=seed)
    inside = 0
    total = 2**log2_points
    for _ in range(total // chunk):
        x = 2 * sampler.random(chunk) - 1
        inside += int(np.count_nonzero(F_oracle(blocks, spec.ms, x) <= 0))
    return 2.0**spec.d * inside / total
