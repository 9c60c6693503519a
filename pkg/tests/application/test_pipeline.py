# tests/application/test_pipeline.py
import json
import os
from dataclasses import replace

import pytest

from src.application.services.evaluation_service import EvaluationService
from src.application.services.pipeline_service import PipelineService, run_pipeline
from src.application.services.run_context import RunContext
from src.domain.entities.llm import BackendKind, StageTag
from src.domain.entities.run_config import AblationFlags
from src.domain.errors import ConfigurationError, DatasetError, StageOrderError
from src.infrastructure.llm.factory import CACHE_FILE, build_clients
from src.infrastructure.persistence.run_directory import (
    EVAL_FILE,
    EXAMPLES_FILE,
    PRED_SQL_FILE,
    PREDICTIONS_FILE,
    SCORES_FILE,
)

EXPECTED_PRED_SQL = [
    "SELECT count(*) FROM singer",
    "SELECT name FROM singer WHERE country = 'France'",
    "SELECT concert_name FROM concert",
    "SELECT avg(age) FROM singer WHERE country = 'France'",
    "SELECT name FROM singer ORDER BY age",
]


def _artifacts(root):
    """Every file of a run directory except the response cache, as bytes."""
    files = {}
    for directory, _, names in os.walk(root):
        for name in names:
            path = os.path.join(directory, name)
            relative = os.path.relpath(path, root)
            if relative != CACHE_FILE:
                with open(path, "rb") as handle:
                    files[relative] = handle.read()
    return files


def _summary(root):
    with open(os.path.join(root, EVAL_FILE), encoding="utf-8") as handle:
        return json.load(handle)["summary"]


def _total_calls(clients):
    return sum(client.backend_calls for client in clients.values())


def _inference_prompts(clients):
    return [r.prompt for r in clients[StageTag.INFERENCE].backend.call_history if r.stage_tag == StageTag.INFERENCE]


class TestEndToEnd:
    def test_scripted_run(self, tmp_path, scripted_config, repository):
        root = str(tmp_path / "run")
        results = run_pipeline(root, scripted_config, repository, progress=False)

        assert [r.stage for r in results] == ["generate", "score", "infer", "evaluate"]
        assert not any(r.failed for r in results)
        summary = _summary(root)
        assert summary["grid"]["all"]["ex"] == pytest.approx(60.0)
        assert summary["grid"]["easy"]["ex"] == pytest.approx(75.0)
        assert summary["grid"]["medium"]["ex"] == pytest.approx(0.0)
        assert summary["grid"]["all"]["em"] == pytest.approx(60.0)
        assert summary["fallback_rate"] == pytest.approx(0.0)
        with open(os.path.join(root, PRED_SQL_FILE), encoding="utf-8") as handle:
            assert handle.read().splitlines() == EXPECTED_PRED_SQL

    def test_only_the_relevant_example_is_selected(self, tmp_path, scripted_config, repository):
        root = str(tmp_path / "run")
        run_pipeline(root, scripted_config, repository, progress=False)
        context = RunContext.load(root)
        scores = context.run_dir.read_jsonl(SCORES_FILE)
        assert len(scores) == 15
        selected = [r for r in scores if r["selected"]]
        assert len(selected) == 5
        assert all(r["rel"] == 8 for r in selected)
        assert len(context.run_dir.read_jsonl(EXAMPLES_FILE)) == 15

    def test_runs_are_byte_identical(self, tmp_path, scripted_config, repository):
        first, second = str(tmp_path / "a"), str(tmp_path / "b")
        run_pipeline(first, scripted_config, repository, progress=False)
        run_pipeline(second, scripted_config, repository, progress=False)
        assert _artifacts(first) == _artifacts(second)

    def test_rerun_is_served_without_backend_calls(self, tmp_path, scripted_config, repository):
        root = str(tmp_path / "run")
        clients = build_clients(scripted_config, root)
        run_pipeline(root, scripted_config, repository, clients=clients, progress=False)
        assert _total_calls(clients) > 0
        before = _artifacts(root)

        unchanged = build_clients(scripted_config, root)
        results = run_pipeline(root, scripted_config, repository, clients=unchanged, progress=False)
        assert all(r.skipped for r in results[:3])
        assert _total_calls(unchanged) == 0

        forced = build_clients(scripted_config, root)
        run_pipeline(root, scripted_config, repository, clients=forced, force=True, progress=False)
        assert _total_calls(forced) == 0
        assert _artifacts(root) == before

    def test_replay_run(self, tmp_path, scripted_config, repository):
        recorded = str(tmp_path / "recorded")
        run_pipeline(recorded, scripted_config, repository, progress=False)

        config = replace(scripted_config, cache_path=os.path.join(recorded, CACHE_FILE))
        for tag in (StageTag.GENERATION, StageTag.SCORING, StageTag.INFERENCE):
            config = config.with_stage(tag, backend=BackendKind.REPLAY_CACHE)
        replayed = str(tmp_path / "replayed")
        run_pipeline(replayed, config.validate(), repository, progress=False)
        assert _summary(replayed) == _summary(recorded)


class TestAblations:
    def _run(self, tmp_path, scripted_config, repository, **flags):
        root = str(tmp_path / "run")
        config = replace(scripted_config, ablations=AblationFlags(**flags))
        clients = build_clients(config, root)
        run_pipeline(root, config, repository, clients=clients, progress=False)
        return clients

    def test_full_configuration_prompt(self, tmp_path, scripted_config, repository):
        prompts = _inference_prompts(self._run(tmp_path, scripted_config, repository))
        assert len(prompts) == 5
        assert all("Example 1:" in p and "Example 2:" not in p for p in prompts)
        assert all(any(line.startswith("Reasoning:") for line in p.splitlines()) for p in prompts)

    def test_no_examples(self, tmp_path, scripted_config, repository):
        prompts = _inference_prompts(self._run(tmp_path, scripted_config, repository, no_examples=True))
        assert all("(no examples)" in p for p in prompts)

    def test_no_reasoning(self, tmp_path, scripted_config, repository):
        prompts = _inference_prompts(self._run(tmp_path, scripted_config, repository, no_reasoning=True))
        assert all("SQL: SELECT count(*) FROM concert" in p for p in prompts)
        assert not any(line.startswith("Reasoning:") for p in prompts for line in p.splitlines())

    def test_no_filtering(self, tmp_path, scripted_config, repository):
        prompts = _inference_prompts(self._run(tmp_path, scripted_config, repository, no_filtering=True))
        assert all("Example 3:" in p and "Example 4:" not in p for p in prompts)

    def test_no_schema_linking(self, tmp_path, scripted_config, repository):
        clients = self._run(tmp_path, scripted_config, repository, no_schema_linking=True)
        history = clients[StageTag.GENERATION].backend.call_history
        generation = [r.prompt for r in history if r.stage_tag == StageTag.GENERATION]
        assert len(generation) == 5
        assert all("## Schema linking: \n## Tables:" in p for p in generation)
        assert not any("identify the schema elements" in p for p in generation)


class TestStages:
    def test_score_before_generate(self, tmp_path, scripted_config, repository):
        service = PipelineService.ingest(str(tmp_path / "run"), scripted_config, repository, progress=False)
        with pytest.raises(StageOrderError):
            service.score()

    def test_limit(self, tmp_path, scripted_config, repository):
        root = str(tmp_path / "run")
        run_pipeline(root, replace(scripted_config, limit=2), repository, progress=False)
        assert len(RunContext.load(root).run_dir.read_jsonl(PREDICTIONS_FILE)) == 2
        assert _summary(root)["grid"]["all"]["ex"] == pytest.approx(100.0)

    def test_external_pred_file(self, tmp_path, scripted_config, repository, cases):
        root = str(tmp_path / "run")
        service = PipelineService.ingest(root, scripted_config, repository, progress=False)
        pred_file = tmp_path / "pred.sql"
        pred_file.write_text("".join(f"{case.gold_sql}\t{case.db_id}\n" for case in cases), encoding="utf-8")

        report = EvaluationService(service.context, progress=False).evaluate(str(pred_file))
        assert report.overall_ex() == pytest.approx(100.0)
        assert report.grid["all"]["em"] == pytest.approx(100.0)

    def test_pred_file_line_count_must_match(self, tmp_path, scripted_config, repository):
        service = PipelineService.ingest(str(tmp_path / "run"), scripted_config, repository, progress=False)
        pred_file = tmp_path / "pred.sql"
        pred_file.write_text("SELECT 1\n", encoding="utf-8")
        with pytest.raises(DatasetError):
            EvaluationService(service.context, progress=False).evaluate(str(pred_file))

    def test_reingest_with_another_config(self, tmp_path, scripted_config, repository):
        root = str(tmp_path / "run")
        run_pipeline(root, scripted_config, repository, progress=False)
        PipelineService.ingest(root, scripted_config, repository, progress=False)

        changed = replace(scripted_config, theta=5.0)
        with pytest.raises(ConfigurationError):
            PipelineService.ingest(root, changed, repository, progress=False)
        with pytest.raises(ConfigurationError):
            run_pipeline(root, changed, repository, progress=False)
        assert RunContext.load(root).config.theta == scripted_config.theta

        run_pipeline(root, changed, repository, force=True, progress=False)
        assert RunContext.load(root).config.theta == 5.0
