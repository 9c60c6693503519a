# src/infrastructure/persistence/spider_repository.py
import json
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

import kagglehub

from ...domain.entities.schema import COLUMN_TYPES, ColumnDef, ColumnRef, ForeignKey, SchemaDb, TableDef
from ...domain.entities.test_case import TestCase
from ...domain.errors import DatasetError, ReferentialError, SchemaIntegrityError
from ...domain.interfaces.dataset_repository import DatasetRepository

logger = logging.getLogger(__name__)

REQUIRED_SCHEMA_FIELDS = (
    "db_id",
    "table_names_original",
    "column_names_original",
    "column_types",
)


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as e:
        raise DatasetError(
            f"{path}: malformed JSON at line {e.lineno} column {e.colno} (char {e.pos}): {e.msg}"
        ) from e
    except OSError as e:
        raise DatasetError(f"Could not read {path}: {e}") from e


def _normalize_type(db_id: str, column: str, column_type: str) -> str:
    normalized = str(column_type).lower()
    if normalized in COLUMN_TYPES:
        return normalized
    logger.warning(f"{db_id}: unknown type '{column_type}' for column '{column}', using 'others'")
    return "others"


def _flatten_keys(keys: List[Any]) -> List[int]:
    # newer Spider releases group composite primary keys in nested lists
    flat = []
    for key in keys:
        if isinstance(key, list):
            flat.extend(key)
        else:
            flat.append(key)
    return flat


def _parse_schema(entry: Dict[str, Any], db_dir: str) -> SchemaDb:
    missing = [name for name in REQUIRED_SCHEMA_FIELDS if name not in entry]
    if missing:
        raise DatasetError(f"Schema entry {entry.get('db_id', '?')} lacks fields: {', '.join(missing)}")

    db_id = entry["db_id"]
    table_names = entry["table_names_original"]
    columns_raw = entry["column_names_original"]
    column_types = entry["column_types"]
    if len(columns_raw) != len(column_types):
        raise SchemaIntegrityError(db_id, "column_names_original and column_types differ in length")

    # Spider numbers columns globally; map each to (table index, position in table)
    table_columns: List[List[ColumnDef]] = [[] for _ in table_names]
    global_to_ref: Dict[int, ColumnRef] = {}
    for global_idx, ((table_idx, column_name), column_type) in enumerate(zip(columns_raw, column_types)):
        if table_idx < 0:
            continue  # the "*" pseudo column
        if table_idx >= len(table_names):
            raise SchemaIntegrityError(db_id, f"column '{column_name}' points at missing table {table_idx}")
        global_to_ref[global_idx] = (table_idx, len(table_columns[table_idx]))
        table_columns[table_idx].append(
            ColumnDef(name=column_name, type=_normalize_type(db_id, column_name, column_type))
        )

    foreign_keys = []
    for child, parent in entry.get("foreign_keys", []):
        if child not in global_to_ref or parent not in global_to_ref:
            raise SchemaIntegrityError(db_id, f"dangling foreign key {child} -> {parent}")
        foreign_keys.append(ForeignKey(child=global_to_ref[child], parent=global_to_ref[parent]))

    primary_keys = []
    for key in _flatten_keys(entry.get("primary_keys", [])):
        if key not in global_to_ref:
            raise SchemaIntegrityError(db_id, f"primary key {key} names no column")
        primary_keys.append(global_to_ref[key])

    sqlite_path: Optional[str] = os.path.join(db_dir, db_id, f"{db_id}.sqlite")
    if not os.path.exists(sqlite_path):
        logger.warning(f"Database file not found for {db_id}: {sqlite_path}")
        sqlite_path = None

    return SchemaDb(
        db_id=db_id,
        tables=tuple(TableDef(name=name, columns=tuple(cols)) for name, cols in zip(table_names, table_columns)),
        foreign_keys=tuple(foreign_keys),
        primary_keys=tuple(primary_keys),
        sqlite_path=sqlite_path,
    )


def load_schemas(tables_file: str, db_dir: str) -> List[SchemaDb]:
    """
    Load every schema of a Spider-format tables.json.

    Args:
        tables_file: Path to tables.json
        db_dir: Directory holding <db_id>/<db_id>.sqlite

    Returns:
        One SchemaDb per entry, in file order

    Raises:
        DatasetError: If the file is not valid JSON
        SchemaIntegrityError: If a key references a missing column
    """
    data = _read_json(tables_file)
    if not isinstance(data, list):
        raise DatasetError(f"{tables_file}: expected a JSON array of schemas")
    return [_parse_schema(entry, db_dir) for entry in data]


def load_testcases(questions_file: str, schemas: List[SchemaDb]) -> List[TestCase]:
    """
    Load Spider-format questions (fields db_id, question, query).

    Raises:
        ReferentialError: If any question names a database missing from `schemas`
    """
    data = _read_json(questions_file)
    if not isinstance(data, list):
        raise DatasetError(f"{questions_file}: expected a JSON array of questions")

    known = {schema.db_id for schema in schemas}
    offenders = [entry.get("db_id", "<missing>") for entry in data if entry.get("db_id") not in known]
    if offenders:
        raise ReferentialError(offenders)

    return [
        TestCase(id=idx, db_id=entry["db_id"], question=entry.get("question", ""), gold_sql=entry.get("query", ""))
        for idx, entry in enumerate(data)
    ]


def read_normalized_schemas(path: str) -> List[SchemaDb]:
    return [SchemaDb.from_dict(entry) for entry in _read_json(path)]


def _find_file(root: str, name: str) -> Optional[str]:
    for current, _dirs, files in os.walk(root):
        if name in files:
            return os.path.join(current, name)
    return None


class SpiderDatasetRepository(DatasetRepository):
    """Implementation of DatasetRepository for Spider-format JSON files."""

    def __init__(self, tables_file: str, questions_file: str, db_dir: str):
        self.tables_file = tables_file
        self.questions_file = questions_file
        self.db_dir = db_dir

    @classmethod
    def from_kaggle(cls, dataset: str, split: str = "dev") -> "SpiderDatasetRepository":
        """Download a Spider copy from Kaggle and locate its files."""
        base_path = kagglehub.dataset_download(dataset)
        logger.info(f"Dataset path: {base_path}")

        tables_file = _find_file(base_path, "tables.json")
        questions_file = _find_file(base_path, f"{split}.json")
        if not tables_file or not questions_file:
            raise DatasetError(f"Kaggle dataset {dataset} has no tables.json / {split}.json")

        db_dir = os.path.join(os.path.dirname(tables_file), "database")
        if not os.path.isdir(db_dir):
            logger.warning(f"Database directory not found: {db_dir}")
        return cls(tables_file, questions_file, db_dir)

    def paths(self) -> Tuple[str, str, str]:
        return self.tables_file, self.questions_file, self.db_dir

    def load_schemas(self) -> List[SchemaDb]:
        return load_schemas(self.tables_file, self.db_dir)

    def load_testcases(self, schemas: List[SchemaDb]) -> List[TestCase]:
        return load_testcases(self.questions_file, schemas)
