# src/application/services/pipeline_service.py
import logging
from dataclasses import replace
from typing import Any, Dict, List, Optional, Tuple

from ...domain.entities.example import GeneratedExample
from ...domain.entities.llm import StageTag
from ...domain.entities.prediction import STATUS_FAILED, STATUS_UPSTREAM_FAILED, Prediction
from ...domain.entities.run_config import RunConfig
from ...domain.entities.scoring import ScoredExample
from ...domain.entities.test_case import TestCase
from ...domain.errors import ConfigurationError, GenerationFailedError, SafeSqlError
from ...domain.interfaces.dataset_repository import DatasetRepository
from ...infrastructure.llm.factory import StageClients, build_clients
from ...infrastructure.persistence.run_directory import (
    CONFIG_FILE,
    EXAMPLES_FILE,
    LINKING_FILE,
    PRED_SQL_FILE,
    PREDICTIONS_FILE,
    SCHEMAS_FILE,
    SCORES_FILE,
    RunDirectory,
)
from ..generation.example_generator import generate_examples
from ..generation.schema_linker import link_schema, skipped_linking
from ..inference.sql_inferencer import infer_sql
from ..scoring.judge import score_example
from ..scoring.relevance import select_examples
from .evaluation_service import EvaluationService
from .run_context import RunContext, StageResult, error_record, group_by_case, is_error, map_cases

logger = logging.getLogger(__name__)

Record = Dict[str, Any]


def upstream_record(test_case_id: int) -> Record:
    return {
        "test_case_id": test_case_id,
        "error": "previous stage failed for this case",
        "error_type": "UpstreamFailure",
        "upstream": True,
    }


def count_failures(records: List[Record]) -> int:
    return sum(1 for r in records if is_error(r) and not r.get("upstream"))


class PipelineService:
    """Runs link/generate, score and infer over a run directory.

    Each stage reads the previous stage's artifact and writes its own once
    every case is done. A stage whose artifact exists is skipped unless
    forced.
    """

    def __init__(self, context: RunContext, clients: Optional[StageClients] = None, progress: bool = True):
        self.context = context
        self._clients = clients
        self.progress = progress

    @classmethod
    def ingest(
        cls,
        root: str,
        config: RunConfig,
        repository: DatasetRepository,
        clients: Optional[StageClients] = None,
        progress: bool = True,
        force: bool = False,
    ) -> "PipelineService":
        """
        Validate the configuration and dataset, and start a run directory.

        Re-ingesting into a directory keeps its stage artifacts, so the stored
        configuration may only be replaced when `force` is set.

        Raises:
            ConfigurationError: If the configuration is invalid, or differs from
                the one the directory was ingested with and `force` is not set
            DatasetError: If the dataset files are malformed or inconsistent
        """
        config.validate()
        schemas = repository.load_schemas()
        cases = repository.load_testcases(schemas)
        if config.limit is not None:
            cases = cases[: config.limit]

        run_dir = RunDirectory(root)
        if run_dir.exists(CONFIG_FILE) and not force:
            stored = RunConfig.from_dict(run_dir.read_json(CONFIG_FILE))
            if stored != config:
                raise ConfigurationError(
                    f"{root} was ingested with a different configuration; use --force to replace it"
                )
        context = RunContext(run_dir=run_dir, config=config, schemas={s.db_id: s for s in schemas}, cases=cases)
        context.save_config()
        run_dir.write_json(SCHEMAS_FILE, [schema.to_dict() for schema in schemas])
        logger.info(f"Ingested {len(schemas)} schemas and {len(cases)} test cases into {root}")
        return cls(context, clients=clients, progress=progress)

    @property
    def config(self) -> RunConfig:
        return self.context.config

    @property
    def run_dir(self) -> RunDirectory:
        return self.context.run_dir

    @property
    def clients(self) -> StageClients:
        if self._clients is None:
            self._clients = build_clients(self.config, self.run_dir.root)
        return self._clients

    def _skip(self, artifact: str, force: bool) -> bool:
        if self.run_dir.exists(artifact) and not force:
            logger.info(f"{artifact} already exists, skipping stage")
            return True
        return False

    def generate(self, force: bool = False) -> StageResult:
        """Schema linking and example generation for every case."""
        cases = self.context.cases
        if self._skip(EXAMPLES_FILE, force):
            return StageResult("generate", len(cases), skipped=True)

        config = self.config
        stage = config.stage(StageTag.GENERATION)
        client = self.clients[StageTag.GENERATION]

        def task(case: TestCase) -> Tuple[Record, List[Record]]:
            db = self.context.schemas[case.db_id]
            try:
                if config.ablations.no_schema_linking:
                    linking = skipped_linking(case)
                else:
                    linking = link_schema(case, db, client, stage)
            except ConfigurationError:
                raise
            except SafeSqlError as e:
                logger.warning(f"Case {case.id}: schema linking failed: {e}")
                return error_record(case.id, e), [upstream_record(case.id)]

            try:
                examples = generate_examples(case, db, linking, client, stage, config.n_examples)
            except ConfigurationError:
                raise
            except GenerationFailedError as e:
                logger.warning(f"Case {case.id}: {e}")
                return linking.to_dict(), [error_record(case.id, e, raw_text=e.raw_text)]
            except SafeSqlError as e:
                logger.warning(f"Case {case.id}: example generation failed: {e}")
                return linking.to_dict(), [error_record(case.id, e)]
            return linking.to_dict(), [example.to_dict() for example in examples]

        results = map_cases(task, cases, config.parallelism, "generate", self.progress)
        linkings = [linking for linking, _ in results]
        examples = [record for _, records in results for record in records]
        self.run_dir.write_jsonl(LINKING_FILE, linkings)
        self.run_dir.write_jsonl(EXAMPLES_FILE, examples)
        return StageResult("generate", len(cases), failed=count_failures(linkings) + count_failures(examples))

    def _select(self, scored: List[ScoredExample]) -> List[ScoredExample]:
        if self.config.ablations.no_filtering:
            return [replace(item, selected=True) for item in scored]
        return select_examples(scored, self.config.theta, self.config.fallback_k)

    def score(self, force: bool = False) -> StageResult:
        """Judge every parsed example, combine its relevance and apply the threshold."""
        cases = self.context.cases
        if self._skip(SCORES_FILE, force):
            return StageResult("score", len(cases), skipped=True)
        self.run_dir.require(EXAMPLES_FILE)

        config = self.config
        stage = config.stage(StageTag.SCORING)
        client = self.clients[StageTag.SCORING]
        examples_by_case = group_by_case(self.run_dir.read_jsonl(EXAMPLES_FILE))

        def task(case: TestCase) -> List[Record]:
            records = examples_by_case.get(case.id, [])
            if not records or is_error(records[0]):
                return [upstream_record(case.id)]
            usable = [e for e in (GeneratedExample.from_dict(r) for r in records) if e.parse_ok]
            try:
                scored = [score_example(case.question, e, client, stage, config.weights) for e in usable]
            except ConfigurationError:
                raise
            except SafeSqlError as e:
                logger.warning(f"Case {case.id}: scoring failed: {e}")
                return [error_record(case.id, e)]
            return [item.to_dict() for item in self._select(scored)]

        results = map_cases(task, cases, config.parallelism, "score", self.progress)
        records = [record for case_records in results for record in case_records]
        self.run_dir.write_jsonl(SCORES_FILE, records)
        return StageResult("score", len(cases), failed=count_failures(records))

    def infer(self, force: bool = False) -> StageResult:
        """Final inference from the selected examples; also writes pred.sql."""
        cases = self.context.cases
        if self._skip(PREDICTIONS_FILE, force):
            return StageResult("infer", len(cases), skipped=True)
        self.run_dir.require(SCORES_FILE)

        config = self.config
        stage = config.stage(StageTag.INFERENCE)
        client = self.clients[StageTag.INFERENCE]
        scored_by_case = group_by_case(self.run_dir.read_jsonl(SCORES_FILE))
        include_reasoning = not config.ablations.no_reasoning

        def task(case: TestCase) -> Record:
            records = scored_by_case.get(case.id, [])
            if not records or is_error(records[0]):
                return Prediction(test_case_id=case.id, sql="", status=STATUS_UPSTREAM_FAILED).to_dict()
            scored = [ScoredExample.from_dict(r) for r in records]
            selected = [] if config.ablations.no_examples else [item for item in scored if item.selected]
            db = self.context.schemas[case.db_id]
            try:
                return infer_sql(case, db, selected, client, stage, include_reasoning).to_dict()
            except ConfigurationError:
                raise
            except SafeSqlError as e:
                logger.warning(f"Case {case.id}: inference failed: {e}")
                failed = Prediction(test_case_id=case.id, sql="", n_examples_used=len(selected), status=STATUS_FAILED)
                return {**failed.to_dict(), **error_record(case.id, e)}

        predictions = map_cases(task, cases, config.parallelism, "infer", self.progress)
        self.run_dir.write_jsonl(PREDICTIONS_FILE, predictions)
        self.run_dir.write_text(PRED_SQL_FILE, "".join(p["sql"] + "\n" for p in predictions))
        return StageResult("infer", len(cases), failed=count_failures(predictions))


def run_pipeline(
    root: str,
    config: RunConfig,
    repository: DatasetRepository,
    clients: Optional[StageClients] = None,
    force: bool = False,
    progress: bool = True,
) -> List[StageResult]:
    """
    Ingest, then run every stage through evaluation in one run directory.

    Stages whose artifacts already exist are reused unless `force` is set.
    """
    service = PipelineService.ingest(root, config, repository, clients=clients, progress=progress, force=force)
    results = [service.generate(force), service.score(force), service.infer(force)]
    EvaluationService(service.context, progress=progress).evaluate(force=force)
    results.append(StageResult("evaluate", len(service.context.cases)))
    return results
