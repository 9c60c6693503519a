# src/infrastructure/persistence/run_directory.py
import json
import logging
import os
import tempfile
from typing import Any, Dict, Iterable, List

from ...domain.errors import DatasetError, StageOrderError

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.json"
SCHEMAS_FILE = "schemas.norm.json"
LINKING_FILE = "01_linking.jsonl"
EXAMPLES_FILE = "02_examples.jsonl"
SCORES_FILE = "03_scores.jsonl"
PREDICTIONS_FILE = "04_predictions.jsonl"
PRED_SQL_FILE = "pred.sql"
EVAL_FILE = "05_eval.json"
REPORT_FILE = "report.txt"
ANALYSIS_DIR = "analysis"


def _dumps(record: Any) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


class RunDirectory:
    """All artifacts of one pipeline run, written atomically one file at a time."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.root, name)

    def exists(self, name: str) -> bool:
        return os.path.exists(self.path(name))

    def require(self, name: str) -> str:
        """Path of an artifact a stage depends on; StageOrderError when it is missing."""
        if not self.exists(name):
            raise StageOrderError(name)
        return self.path(name)

    def subdirectory(self, name: str) -> str:
        path = self.path(name)
        os.makedirs(path, exist_ok=True)
        return path

    def write_text(self, name: str, text: str) -> str:
        target = self.path(name)
        os.makedirs(os.path.dirname(target), exist_ok=True)
        handle = tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", newline="\n", dir=os.path.dirname(target), prefix=".tmp-", delete=False
        )
        try:
            with handle:
                handle.write(text)
            os.replace(handle.name, target)
        except BaseException:
            if os.path.exists(handle.name):
                os.remove(handle.name)
            raise
        logger.debug(f"Wrote {target}")
        return target

    def read_text(self, name: str) -> str:
        with open(self.require(name), encoding="utf-8") as handle:
            return handle.read()

    def write_json(self, name: str, data: Any) -> str:
        return self.write_text(name, json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")

    def read_json(self, name: str) -> Any:
        text = self.read_text(name)
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise DatasetError(f"{self.path(name)}: malformed JSON at line {e.lineno} column {e.colno}") from e

    def write_jsonl(self, name: str, records: Iterable[Dict[str, Any]]) -> str:
        return self.write_text(name, "".join(_dumps(record) + "\n" for record in records))

    def read_jsonl(self, name: str) -> List[Dict[str, Any]]:
        records = []
        for number, line in enumerate(self.read_text(name).splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise DatasetError(f"{self.path(name)}: malformed JSON on line {number}: {e.msg}") from e
        return records
