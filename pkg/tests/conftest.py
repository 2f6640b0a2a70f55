import json

import pytest

from hydramaps import shortened_collatz


@pytest.fixture(scope="session")
def t3():
    return shortened_collatz(3)


@pytest.fixture(scope="session")
def t5():
    return shortened_collatz(5)


@pytest.fixture(scope="session")
def t3_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("maps") / "t3.json"
    path.write_text(json.dumps({
        "p": 2,
        "branches": [{"r": "1/2", "c": "0"}, {"r": "3/2", "c": "1/2"}],
    }))
    return str(path)


@pytest.fixture(scope="session")
def t5_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("maps") / "t5.json"
    path.write_text(json.dumps({
        "p": 2,
        "branches": [{"r": "1/2", "c": "0"}, {"r": "5/2", "c": "1/2"}],
    }))
    return str(path)
