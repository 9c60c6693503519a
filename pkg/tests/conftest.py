# tests/conftest.py
import os
import shutil
import sqlite3

import pytest

from src.domain.entities.llm import BackendKind, StageTag
from src.domain.entities.run_config import RunConfig
from src.domain.entities.test_case import TestCase
from src.infrastructure.persistence.spider_repository import SpiderDatasetRepository

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")
DB_ID = "concert_singer"

SINGERS = [
    (1, "Joe Sharp", "Netherlands", 52),
    (2, "Timbaland", "United States", 32),
    (3, "Justin Brown", "France", 29),
    (4, "Rose White", "France", 41),
]
CONCERTS = [
    (1, "Auditions", "2014"),
    (2, "Super bootcamp", "2014"),
    (3, "Home Visits", "2015"),
]
SINGER_IN_CONCERT = [(1, 2), (1, 3), (2, 3), (3, 1), (3, 4)]


def build_database(path: str) -> None:
    connection = sqlite3.connect(path)
    connection.executescript(
        """
        CREATE TABLE singer (singer_id INTEGER PRIMARY KEY, name TEXT, country TEXT, age INTEGER);
        CREATE TABLE concert (concert_id INTEGER PRIMARY KEY, concert_name TEXT, year TEXT);
        CREATE TABLE singer_in_concert (
            concert_id INTEGER REFERENCES concert (concert_id),
            singer_id INTEGER REFERENCES singer (singer_id)
        );
        """
    )
    connection.executemany("INSERT INTO singer VALUES (?, ?, ?, ?)", SINGERS)
    connection.executemany("INSERT INTO concert VALUES (?, ?, ?)", CONCERTS)
    connection.executemany("INSERT INTO singer_in_concert VALUES (?, ?)", SINGER_IN_CONCERT)
    connection.commit()
    connection.close()


@pytest.fixture(scope="session")
def spider_dir(tmp_path_factory):
    """Spider-layout copy of the fixture dataset with a real SQLite database."""
    root = tmp_path_factory.mktemp("spider")
    for name in ("tables.json", "dev.json", "scripted_responses.json"):
        shutil.copy(os.path.join(FIXTURE_DIR, name), root / name)
    db_dir = root / "database" / DB_ID
    db_dir.mkdir(parents=True)
    build_database(str(db_dir / f"{DB_ID}.sqlite"))
    return root


@pytest.fixture(scope="session")
def repository(spider_dir):
    return SpiderDatasetRepository(
        str(spider_dir / "tables.json"), str(spider_dir / "dev.json"), str(spider_dir / "database")
    )


@pytest.fixture(scope="session")
def schema(repository):
    return repository.load_schemas()[0]


@pytest.fixture(scope="session")
def cases(repository, schema):
    return repository.load_testcases([schema])


@pytest.fixture
def case():
    return TestCase(id=0, db_id=DB_ID, question="How many singers do we have?", gold_sql="SELECT count(*) FROM singer")


@pytest.fixture
def scripted_config(repository, spider_dir):
    """Run configuration answering every model call from the scripted fixture."""
    tables, questions, db_dir = repository.paths()
    config = RunConfig(
        tables_file=tables,
        questions_file=questions,
        db_dir=db_dir,
        n_examples=3,
        parallelism=2,
        scripted_responses=str(spider_dir / "scripted_responses.json"),
    )
    for tag in (StageTag.GENERATION, StageTag.SCORING, StageTag.INFERENCE):
        config = config.with_stage(tag, backend=BackendKind.MOCK_SCRIPTED, model="scripted")
    return config.validate()
