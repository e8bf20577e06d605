import json
import random
import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reducedcech.cochain import (
    Cochain, CoefficientModule, cech_d, random_cochain,
)
from reducedcech.complex import fixture
from reducedcech.reduced import EulerTwist, cech_cohomology

CRITERIA = {}


def record(number, passed, detail=""):
    CRITERIA[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        passed, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'} {detail}".rstrip())


def fixture_facets(name):
    text = resources.files("reducedcech").joinpath("data", f"{name}.json").read_text()
    return [tuple(f) for f in json.loads(text)["facets"]]


def generator_euler(K, n, multiple=1, component=0):
    """multiple times the first H^2 generator placed in one component (zero when H^2 = 0)."""
    coeff = CoefficientModule("Z", "vector", n)
    gens = cech_cohomology(K, 2, "Z").generators()
    vals = {}
    if gens:
        for t, v in gens[0].values.items():
            comps = [0] * n
            comps[component] = multiple * v[0]
            vals[t] = tuple(comps)
    return Cochain(K, 2, coeff, vals, normalized=True)


def mixed_euler(K, n, rng):
    """Generator class in component 0 plus a random coboundary in every component."""
    F = generator_euler(K, n)
    b = random_cochain(K, 1, CoefficientModule("Z", "vector", n), rng, nnz=3, normalized=True)
    return F + cech_d(b)


def twist(name, n, rng=None, kind="mixed"):
    K = fixture(name)
    if kind == "generator":
        F = generator_euler(K, n)
    elif kind == "zero":
        F = Cochain(K, 2, CoefficientModule("Z", "vector", n), {}, normalized=True)
    else:
        F = mixed_euler(K, n, rng or random.Random(0))
    return EulerTwist(F)


@pytest.fixture
def rng():
    return random.Random(20240611)

