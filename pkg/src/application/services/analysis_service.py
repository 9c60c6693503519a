# src/application/services/analysis_service.py
import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from ...domain.entities.llm import StageTag
from ...domain.entities.run_config import AblationFlags
from ...domain.entities.scoring import ScoredExample, WeightConfig
from ...domain.errors import ConfigurationError, UndefinedCorrelationError
from ...domain.interfaces.dataset_repository import DatasetRepository
from ...infrastructure.llm.factory import StageClients, build_clients
from ...infrastructure.llm.vectors import cosine
from ...infrastructure.persistence.run_directory import ANALYSIS_DIR, EVAL_FILE, SCORES_FILE
from ..analysis.census import DEFAULT_THRESHOLDS, score_census
from ..analysis.similarity import correlation, minmax_normalize, similarity_ex_bins
from ..analysis.sweeps import DEFAULT_WEIGHT_GRID, SweepContext, ablation_table, threshold_sweep, weight_grid
from ..evaluation.report import EvalReport
from .evaluation_service import EvaluationService
from .pipeline_service import run_pipeline
from .run_context import RunContext, group_by_case, is_error

logger = logging.getLogger(__name__)

SWEEP_THRESHOLDS = tuple(range(11))
ABLATION_FLAGS = tuple(f.name for f in fields(AblationFlags))

ExampleKey = Tuple[int, int]


@dataclass(frozen=True)
class AnalysisResult:
    files: Dict[str, str]
    pearson_r: Optional[float]


class AnalysisService:
    """Offline analyses over a finished run: census, similarity bins, sweeps and ablations.

    Re-inference goes through the run's clients, so under the replay
    backend every analysis is served from the recorded cache.
    """

    def __init__(
        self,
        context: RunContext,
        repository: Optional[DatasetRepository] = None,
        clients: Optional[StageClients] = None,
        progress: bool = True,
    ):
        self.context = context
        self.repository = repository
        self._clients = clients
        self.progress = progress
        self._files: Dict[str, str] = {}

    @property
    def clients(self) -> StageClients:
        if self._clients is None:
            self._clients = build_clients(self.context.config, self.context.run_dir.root)
        return self._clients

    def scored_by_case(self) -> Dict[int, List[ScoredExample]]:
        records = [r for r in self.context.run_dir.read_jsonl(SCORES_FILE) if not is_error(r)]
        return {cid: [ScoredExample.from_dict(r) for r in rs] for cid, rs in group_by_case(records).items()}

    def cosines(self, scored_by_case: Dict[int, List[ScoredExample]]) -> Dict[ExampleKey, float]:
        """Cosine between each generated question and its test question."""
        stage = self.context.config.stage(StageTag.EMBEDDING)
        client = self.clients[StageTag.EMBEDDING]
        questions = {case.id: case.question for case in self.context.cases}
        result = {}
        for cid in sorted(scored_by_case):
            test_vector = client.embed(questions[cid], stage.model)
            for item in scored_by_case[cid]:
                result[(cid, item.example.ordinal)] = cosine(test_vector, client.embed(item.example.question, stage.model))
        return result

    def sweep_context(self, scored_by_case: Dict[int, List[ScoredExample]]) -> SweepContext:
        config = self.context.config
        return SweepContext(
            cases=self.context.cases,
            schemas=self.context.schemas,
            scored=scored_by_case,
            client=self.clients[StageTag.INFERENCE],
            stage=config.stage(StageTag.INFERENCE),
            fallback_k=config.fallback_k,
            include_reasoning=not config.ablations.no_reasoning,
            include_examples=not config.ablations.no_examples,
            filtering=not config.ablations.no_filtering,
            timeout_ms=config.timeout_ms,
            rules=config.difficulty_rules,
            parallelism=config.parallelism,
        )

    def _write_csv(self, name: str, frame: pd.DataFrame) -> None:
        self._files[name] = self.context.run_dir.write_text(f"{ANALYSIS_DIR}/{name}", frame.to_csv(index=False))

    def _write_dat(self, name: str, frame: pd.DataFrame) -> None:
        header = "# " + " ".join(str(c) for c in frame.columns) + "\n"
        body = frame.to_csv(sep=" ", index=False, header=False, na_rep="nan")
        self._files[name] = self.context.run_dir.write_text(f"{ANALYSIS_DIR}/{name}", header + body)

    def ablation_grid(self, flags: Sequence[str] = ABLATION_FLAGS) -> pd.DataFrame:
        """
        Rerun the pipeline once per ablation flag under analysis/ablation_<flag>/.

        Raises:
            ConfigurationError: If no dataset repository was given
        """
        if self.repository is None:
            raise ConfigurationError("Ablation runs need the dataset repository")
        run_dir = self.context.run_dir
        reports = {"full": EvalReport.from_dict(run_dir.read_json(EVAL_FILE)["summary"])}
        for flag in flags:
            sub_root = os.path.join(run_dir.root, ANALYSIS_DIR, f"ablation_{flag}")
            sub_config = replace(self.context.config, ablations=AblationFlags(**{flag: True}))
            logger.info(f"Ablation run {flag} in {sub_root}")
            run_pipeline(sub_root, sub_config, self.repository, clients=self.clients, progress=self.progress)
            sub_context = RunContext.load(sub_root)
            reports[flag] = EvalReport.from_dict(sub_context.run_dir.read_json(EVAL_FILE)["summary"])
        return ablation_table(reports)

    def analyze(
        self,
        census_thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
        sweep_thresholds: Sequence[float] = SWEEP_THRESHOLDS,
        weights: Sequence[WeightConfig] = DEFAULT_WEIGHT_GRID,
        ablations: bool = False,
    ) -> AnalysisResult:
        """
        Write every analysis table under analysis/ and a combined report.md.

        Raises:
            StageOrderError: If the run has not been scored and evaluated yet
        """
        run_dir = self.context.run_dir
        run_dir.require(SCORES_FILE)
        run_dir.require(EVAL_FILE)
        run_dir.subdirectory(ANALYSIS_DIR)
        self._files = {}

        scored_by_case = self.scored_by_case()
        all_scored = [item for cid in sorted(scored_by_case) for item in scored_by_case[cid]]
        cosines = self.cosines(scored_by_case)

        def cosine_of(item: ScoredExample) -> float:
            return cosines[(item.example.test_case_id, item.example.ordinal)]

        census = score_census(all_scored, cosine_of, census_thresholds).to_frame()
        self._write_csv("census.csv", census)

        ex_by_case = {o.test_case_id: o.ex for o in EvaluationService(self.context).outcomes() if not o.gold_invalid}
        paired = [item for item in all_scored if item.example.test_case_id in ex_by_case]
        normalized = minmax_normalize([cosine_of(item) for item in paired])
        bins = similarity_ex_bins(
            [(float(value), ex_by_case[item.example.test_case_id]) for value, item in zip(normalized, paired)]
        ).to_frame()
        self._write_csv("similarity_bins.csv", bins)
        self._write_dat("similarity_bins.dat", bins)

        ctx = self.sweep_context(scored_by_case)
        sweep = threshold_sweep(ctx, sweep_thresholds)
        self._write_csv("threshold_sweep.csv", sweep)
        self._write_dat("threshold_sweep.dat", sweep)

        points = score_census(all_scored, cosine_of, sweep_thresholds).to_frame()[["threshold", "mean_cosine"]]
        points = points.assign(ex=sweep["all"].values).dropna()
        try:
            pearson_r: Optional[float] = correlation(points["mean_cosine"].tolist(), points["ex"].tolist())
        except (UndefinedCorrelationError, ValueError) as e:
            logger.warning(f"Similarity/EX correlation not reported: {e}")
            pearson_r = None
        points = points.assign(pearson_r=pearson_r)
        self._write_csv("correlation.csv", points)
        self._write_dat("correlation.dat", points)

        grid = weight_grid(ctx, self.context.config.theta, weights)
        self._write_csv("weight_grid.csv", grid)

        sections = [
            ("Score census", census),
            ("Similarity bins", bins),
            ("Threshold sweep (EX %)", sweep),
            ("Similarity vs EX", points),
            ("Weight grid (EX %)", grid),
        ]
        if ablations:
            table = self.ablation_grid()
            self._write_csv("ablations.csv", table)
            sections.append(("Ablations (EX %)", table))

        lines = ["# Analysis report", ""]
        for title, frame in sections:
            lines += [f"## {title}", "", "```", frame.to_string(index=False), "```", ""]
        lines.append(f"Pearson r, mean cosine vs EX over thresholds: {pearson_r if pearson_r is not None else 'undefined'}")
        self._files["report.md"] = run_dir.write_text(f"{ANALYSIS_DIR}/report.md", "\n".join(lines) + "\n")
        return AnalysisResult(files=dict(self._files), pearson_r=pearson_r)
