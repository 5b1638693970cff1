from importlib import resources

import pytest

from hornchase.chase import load_theory
from hornchase.tptp import parse_facts, parse_tptp


def read_data(name: str) -> str:
    return resources.files("hornchase").joinpath(f"data/{name}").read_text()


@pytest.fixture
def data():
    return read_data


@pytest.fixture
def theory():
    return lambda name: load_theory(parse_tptp(read_data(name)))


@pytest.fixture
def facts():
    return lambda name: parse_facts(read_data(name))
