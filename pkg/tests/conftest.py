"""Shared, expensive fixtures: models on the default grid are built once per session."""

import pytest
from hypothesis import settings

from rnw.limits import limit_scan
from rnw.massive import build_massive, build_moses_tuan
from rnw.verify import verify_model

settings.register_profile("rnw", deadline=None, max_examples=40)
settings.load_profile("rnw")


@pytest.fixture(scope="session")
def massive146():
    return build_massive(146)


@pytest.fixture(scope="session")
def mt40():
    return build_moses_tuan(40)


@pytest.fixture(scope="session")
def massive_report(massive146):
    return verify_model(massive146)


@pytest.fixture(scope="session")
def mt_report(mt40):
    return verify_model(mt40)


@pytest.fixture(scope="session")
def limit_table():
    return limit_scan(1.0, [160.0, 320.0, 640.0, 1280.0])
