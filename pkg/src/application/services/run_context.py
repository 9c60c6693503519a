# src/application/services/run_context.py
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Sequence, TypeVar

from tqdm import tqdm

from ...domain.entities.run_config import RunConfig
from ...domain.entities.schema import SchemaDb
from ...domain.entities.test_case import TestCase
from ...infrastructure.persistence.run_directory import CONFIG_FILE, SCHEMAS_FILE, RunDirectory
from ...infrastructure.persistence.spider_repository import load_testcases, read_normalized_schemas

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class StageResult:
    stage: str
    cases: int
    failed: int = 0
    skipped: bool = False


@dataclass
class RunContext:
    """A run directory together with the configuration and data it was ingested with."""
    run_dir: RunDirectory
    config: RunConfig
    schemas: Dict[str, SchemaDb]
    cases: List[TestCase]

    @classmethod
    def load(cls, root: str) -> "RunContext":
        """
        Reopen an ingested run directory.

        Raises:
            StageOrderError: If config.json or schemas.norm.json is missing
        """
        run_dir = RunDirectory(root)
        config = RunConfig.from_dict(run_dir.read_json(CONFIG_FILE)).validate()
        schemas = read_normalized_schemas(run_dir.require(SCHEMAS_FILE))
        cases = load_testcases(config.questions_file, schemas)
        if config.limit is not None:
            cases = cases[: config.limit]
        return cls(run_dir=run_dir, config=config, schemas={s.db_id: s for s in schemas}, cases=cases)

    def save_config(self) -> None:
        self.run_dir.write_json(CONFIG_FILE, self.config.to_dict())


def error_record(test_case_id: int, error: Exception, **extra: Any) -> Dict[str, Any]:
    return {"test_case_id": test_case_id, "error": str(error), "error_type": type(error).__name__, **extra}


def is_error(record: Dict[str, Any]) -> bool:
    return "error_type" in record


def group_by_case(records: Sequence[Dict[str, Any]]) -> Dict[int, List[Dict[str, Any]]]:
    grouped: Dict[int, List[Dict[str, Any]]] = {}
    for record in records:
        grouped.setdefault(record["test_case_id"], []).append(record)
    return grouped


def map_cases(
    fn: Callable[[T], R], items: Sequence[T], parallelism: int, desc: str, progress: bool = True
) -> List[R]:
    """Apply fn to every item with bounded parallelism, keeping input order."""
    with ThreadPoolExecutor(max_workers=parallelism) as executor:
        return list(tqdm(executor.map(fn, items), total=len(items), desc=desc, disable=not progress))

