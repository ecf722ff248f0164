import itertools

import numpy as np
import pytest

from prodlearn import ProductDistribution, SpaceSpec


def random_product(rng: np.random.Generator, sizes, zero_prob=0.2) -> ProductDistribution:
    margs = []
    for k in sizes:
        w = rng.random(k)
        w[rng.random(k) < zero_prob] = 0.0
        if w.sum() == 0:
            w[rng.integers(k)] = 1.0
        margs.append(w / w.sum())
    return ProductDistribution(tuple(margs))


def all_points(sizes):
    return list(itertools.product(*(range(k) for k in sizes)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def space_5x4():
    return SpaceSpec.uniform(5, 4)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], outcome.upper()[:4], props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for crit, status, detail in sorted(lines, key=lambda t: int(t[0].split()[0])):
            terminalreporter.write_line(f"{'PASS' if status == 'PASS' else 'FAIL'}  [{crit}] {detail}")
