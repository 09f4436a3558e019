import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import pytest

from plhsolve import parser

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def load_fixture(name, kind):
    with open(fixture_path(name), "r", encoding="utf-8") as fh:
        return parser.parse(fh.read(), kind)


@pytest.fixture(scope="session")
def minmax_language():
    return load_fixture("minmax.lang", "language")


@pytest.fixture(scope="session")
def tariff_language():
    return load_fixture("tariff.lang", "language")


@pytest.fixture(scope="session")
def order_relations():
    return load_fixture("order.rels", "relation-set")


@pytest.fixture(scope="session")
def unbounded_instance():
    return load_fixture("minmax-unbounded.inst", "instance")


@pytest.fixture(scope="session")
def zero_instance():
    return load_fixture("minmax-zero.inst", "instance")
