from __future__ import annotations

import pytest

from helpers import drive_replay


@pytest.fixture(scope="session")
def maxima_session():
    return drive_replay("maxima_session")


@pytest.fixture(scope="session")
def mupad_session():
    return drive_replay("mupad_session")


@pytest.fixture(scope="session")
def reduce_session():
    return drive_replay("reduce_session")


@pytest.fixture(scope="session")
def all_corpus_sessions(maxima_session, mupad_session, reduce_session):
    return {
        "maxima_session": maxima_session,
        "mupad_session": mupad_session,
        "reduce_session": reduce_session,
    }
