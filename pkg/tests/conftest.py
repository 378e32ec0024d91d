from __future__ import annotations

import json
from pathlib import Path

import pytest

from guifusion import parse_app_model, rip, universe_by_id
from guifusion.flow import train_ngram_segments

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_source(name: str) -> str:
    return (FIXTURES / f"{name}.json").read_text(encoding="utf-8")


def fixture_doc(name: str) -> dict:
    return json.loads(fixture_source(name))


@pytest.fixture(scope="session")
def noteapp_v1():
    return parse_app_model(fixture_source("noteapp-v1"))


@pytest.fixture(scope="session")
def noteapp_v2():
    return parse_app_model(fixture_source("noteapp-v2"))


@pytest.fixture(scope="session")
def noteapp_v2_broken():
    return parse_app_model(fixture_source("noteapp-v2-broken"))


@pytest.fixture(scope="session")
def galleryapp_v1():
    return parse_app_model(fixture_source("galleryapp-v1"))


@pytest.fixture(scope="session")
def noteapp_rip(noteapp_v1):
    return rip(noteapp_v1)


@pytest.fixture(scope="session")
def noteapp_efg(noteapp_rip):
    return noteapp_rip.efg


@pytest.fixture(scope="session")
def noteapp_universe(noteapp_v1):
    return universe_by_id(noteapp_v1)


@pytest.fixture(scope="session")
def noteapp_ngram(noteapp_rip):
    return train_ngram_segments(noteapp_rip.trace, vocabulary=noteapp_rip.efg.tokens())


@pytest.fixture(scope="session")
def gallery_rip(galleryapp_v1):
    return rip(galleryapp_v1)
