# src/presentation/cli/main.py
import functools
import logging
import sys
from typing import List, Optional, Sequence

import click

from ...application.evaluation.report import EvalReport
from ...application.services.analysis_service import SWEEP_THRESHOLDS, AnalysisService
from ...application.analysis.census import DEFAULT_THRESHOLDS
from ...application.services.evaluation_service import EvaluationService
from ...application.services.pipeline_service import PipelineService, run_pipeline
from ...application.services.run_context import RunContext, StageResult
from ...domain.entities.llm import BackendKind, StageTag
from ...domain.entities.run_config import AblationFlags, RunConfig
from ...domain.entities.scoring import WeightConfig
from ...domain.errors import ConfigurationError, SafeSqlError
from ...infrastructure.config.settings import Settings, load_settings
from ...infrastructure.persistence.run_directory import ANALYSIS_DIR, REPORT_FILE
from ...infrastructure.persistence.spider_repository import SpiderDatasetRepository

EXIT_PARTIAL = 1
EXIT_CONFIG = 2
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
BACKENDS = [kind.value for kind in BackendKind]


@click.group()
@click.option("--verbose", is_flag=True, help="Debug logging")
@click.option("--quiet", is_flag=True, help="Warnings only, no progress bars")
@click.pass_context
def cli(ctx, verbose, quiet):
    """SAFE-SQL - self-augmented in-context examples for Text-to-SQL."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)
    ctx.ensure_object(dict)
    ctx.obj["progress"] = not quiet


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigurationError as e:
            click.echo(f"Error: {str(e)}", err=True)
            sys.exit(EXIT_CONFIG)
        except SafeSqlError as e:
            click.echo(f"Error: {str(e)}", err=True)
            sys.exit(EXIT_PARTIAL)
    return wrapper


def _print_stage(result: StageResult):
    title = click.style(f"{result.stage.title()}:", fg="blue", bold=True)
    if result.skipped:
        click.echo(f"{title} skipped, artifact already present")
        return
    ok = result.cases - result.failed
    status = click.style(f"{ok}/{result.cases} cases ok", fg="green" if not result.failed else "yellow")
    click.echo(f"{title} {status}")


def _print_report(report: EvalReport):
    click.echo(f"\n{click.style('Evaluation', fg='green', bold=True)}")
    click.echo("=" * 50)
    click.echo(report.to_text())


def _exit_on_failures(results: Sequence[StageResult]):
    if any(result.failed for result in results):
        click.echo(click.style("Some cases failed; see the warnings above and the stage artifacts.", fg="yellow"), err=True)
        sys.exit(EXIT_PARTIAL)


def _parse_floats(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigurationError(f"Expected a comma-separated list of numbers, got {text!r}") from e


def _config_options(fn):
    options = [
        click.option("--tables", "tables_file", type=click.Path(exists=True, dir_okay=False), help="Spider tables.json"),
        click.option("--questions", "questions_file", type=click.Path(exists=True, dir_okay=False), help="Spider questions file, e.g. dev.json"),
        click.option("--db-dir", type=click.Path(exists=True, file_okay=False), help="Directory of <db_id>/<db_id>.sqlite"),
        click.option("--kaggle-dataset", help="Download Spider from this Kaggle dataset instead of local paths"),
        click.option("--split", default="dev", show_default=True, help="Questions file name inside the Kaggle dataset"),
        click.option("--backend", type=click.Choice(BACKENDS), help="Backend of the generation, scoring and inference stages"),
        click.option("--model", help="Model of the generation, scoring and inference stages"),
        click.option("--generation-model", help="Override the generation model"),
        click.option("--scoring-model", help="Override the scoring model"),
        click.option("--inference-model", help="Override the inference model"),
        click.option("--embedding-backend", type=click.Choice(BACKENDS), help="Backend of the embedding stage"),
        click.option("--embedding-model", help="Embedding model"),
        click.option("--n-examples", type=int, default=10, show_default=True),
        click.option("--theta", type=float, default=8.0, show_default=True, help="Relevance threshold"),
        click.option("--alpha", type=float, help="Semantic weight"),
        click.option("--beta", type=float, help="Structural weight"),
        click.option("--gamma", type=float, help="Reasoning weight"),
        click.option("--no-reasoning", is_flag=True),
        click.option("--no-filtering", is_flag=True),
        click.option("--no-schema-linking", is_flag=True),
        click.option("--no-examples", is_flag=True),
        click.option("--parallelism", type=int, default=4, show_default=True),
        click.option("--limit", type=int, help="Only the first LIMIT test cases"),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--fallback-k", type=int, default=3, show_default=True),
        click.option("--timeout-ms", type=int, default=30000, show_default=True),
        click.option("--requests-per-minute", type=int, help="Client-side rate limit, 0 for none"),
        click.option("--max-attempts", type=int, default=5, show_default=True),
        click.option("--base-url", help="OpenAI-compatible endpoint"),
        click.option("--api-key-env", help="Environment variable holding the API key"),
        click.option("--cache-path", type=click.Path(dir_okay=False), help="Response cache, default <run_dir>/cache.jsonl"),
        click.option("--scripted-responses", type=click.Path(exists=True, dir_okay=False), help="Rules file of the mock_scripted backend"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _dataset(settings: Settings, options: dict) -> SpiderDatasetRepository:
    slug = options.pop("kaggle_dataset") or None
    split = options.pop("split")
    tables, questions, db_dir = options.pop("tables_file"), options.pop("questions_file"), options.pop("db_dir")
    if tables and questions and db_dir:
        return SpiderDatasetRepository(tables, questions, db_dir)
    slug = slug or settings.kaggle_dataset
    if slug:
        return SpiderDatasetRepository.from_kaggle(slug, split)
    raise ConfigurationError("Give --tables, --questions and --db-dir, or a Kaggle dataset")


def _build_config(repository: SpiderDatasetRepository, settings: Settings, options: dict) -> RunConfig:
    tables, questions, db_dir = repository.paths()
    weights = WeightConfig()
    given = [options[name] for name in ("alpha", "beta", "gamma")]
    if any(value is not None for value in given):
        if any(value is None for value in given):
            raise ConfigurationError("Give all of --alpha, --beta and --gamma")
        weights = WeightConfig(*given)

    rpm = options["requests_per_minute"]
    config = RunConfig(
        tables_file=tables,
        questions_file=questions,
        db_dir=db_dir,
        n_examples=options["n_examples"],
        theta=options["theta"],
        weights=weights,
        ablations=AblationFlags(
            no_reasoning=options["no_reasoning"],
            no_filtering=options["no_filtering"],
            no_schema_linking=options["no_schema_linking"],
            no_examples=options["no_examples"],
        ),
        parallelism=options["parallelism"],
        limit=options["limit"],
        seed=options["seed"],
        fallback_k=options["fallback_k"],
        timeout_ms=options["timeout_ms"],
        requests_per_minute=rpm if rpm is not None else settings.requests_per_minute,
        max_attempts=options["max_attempts"],
        base_url=options["base_url"] or settings.base_url,
        api_key_env=options["api_key_env"] or settings.api_key_env,
        cache_path=options["cache_path"],
        scripted_responses=options["scripted_responses"],
    )

    per_stage = {
        StageTag.GENERATION: options["generation_model"],
        StageTag.SCORING: options["scoring_model"],
        StageTag.INFERENCE: options["inference_model"],
    }
    for tag, stage_model in per_stage.items():
        changes = {}
        if options["backend"]:
            changes["backend"] = BackendKind(options["backend"])
        if stage_model or options["model"]:
            changes["model"] = stage_model or options["model"]
        if changes:
            config = config.with_stage(tag, **changes)
    embedding = {}
    if options["embedding_backend"]:
        embedding["backend"] = BackendKind(options["embedding_backend"])
    if options["embedding_model"]:
        embedding["model"] = options["embedding_model"]
    if embedding:
        config = config.with_stage(StageTag.EMBEDDING, **embedding)
    return config.validate()


@cli.command()
@click.argument("run_dir", type=click.Path(file_okay=False))
@_config_options
@click.option("--force", is_flag=True, help="Replace a stored configuration that differs")
@_handle_errors
def ingest(run_dir, force, **options):
    """Validate the dataset and configuration and start RUN_DIR."""
    settings = load_settings()
    repository = _dataset(settings, options)
    config = _build_config(repository, settings, options)
    service = PipelineService.ingest(run_dir, config, repository, force=force)

    click.echo(f"\n{click.style(f'Run directory: {run_dir}', fg='green', bold=True)}")
    click.echo("=" * 50)
    click.echo(f"Databases: {len(service.context.schemas)}")
    click.echo(f"Test cases: {len(service.context.cases)}")


def _stage_command(name: str, help_text: str):
    def command(run_dir, force):
        context = RunContext.load(run_dir)
        progress = click.get_current_context().obj.get("progress", True)
        result = getattr(PipelineService(context, progress=progress), name)(force)
        _print_stage(result)
        _exit_on_failures([result])

    command.__name__ = name
    command.__doc__ = help_text
    return cli.command(name=name)(
        click.argument("run_dir", type=click.Path(exists=True, file_okay=False))(
            click.option("--force", is_flag=True, help="Redo the stage even if its artifact exists")(
                _handle_errors(command)
            )
        )
    )


generate = _stage_command("generate", "Link the schema and generate examples for every case.")
score = _stage_command("score", "Judge, combine and filter the generated examples.")


@cli.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--force", is_flag=True, help="Redo the stage even if its artifact exists")
@click.option("--inference-model", help="Run inference with another model than the one ingested")
@click.pass_context
@_handle_errors
def infer(ctx, run_dir, force, inference_model):
    """Predict SQL for every case from its selected examples."""
    context = RunContext.load(run_dir)
    if inference_model:
        context.config = context.config.with_stage(StageTag.INFERENCE, model=inference_model)
        context.save_config()
    result = PipelineService(context, progress=ctx.obj.get("progress", True)).infer(force)
    _print_stage(result)
    _exit_on_failures([result])


@cli.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--pred-file", type=click.Path(exists=True, dir_okay=False), help="Grade this pred.sql instead of the run's predictions")
@click.option("--force", is_flag=True, help="Recompute even if 05_eval.json exists")
@click.pass_context
@_handle_errors
def evaluate(ctx, run_dir, pred_file, force):
    """Compute execution accuracy and exact match."""
    context = RunContext.load(run_dir)
    report = EvaluationService(context, progress=ctx.obj.get("progress", True)).evaluate(pred_file, force)
    _print_report(report)


@cli.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--census-thresholds", default=",".join(str(t) for t in DEFAULT_THRESHOLDS), show_default=True)
@click.option("--sweep-thresholds", default=",".join(str(t) for t in SWEEP_THRESHOLDS), show_default=True)
@click.option("--ablations", is_flag=True, help="Also rerun the pipeline once per ablation flag")
@click.pass_context
@_handle_errors
def analyze(ctx, run_dir, census_thresholds, sweep_thresholds, ablations):
    """Score census, similarity bins, threshold sweep, weight grid and ablations."""
    context = RunContext.load(run_dir)
    config = context.config
    repository = SpiderDatasetRepository(config.tables_file, config.questions_file, config.db_dir)
    service = AnalysisService(context, repository=repository, progress=ctx.obj.get("progress", True))
    result = service.analyze(
        census_thresholds=_parse_floats(census_thresholds),
        sweep_thresholds=_parse_floats(sweep_thresholds),
        ablations=ablations,
    )

    click.echo(f"\n{click.style('Analysis', fg='green', bold=True)}")
    click.echo("=" * 50)
    for name, path in sorted(result.files.items()):
        click.echo(f"{name}: {path}")
    if result.pearson_r is not None:
        click.echo(f"\n{click.style('Similarity/EX correlation:', fg='blue', bold=True)} {result.pearson_r:.3f}")


@cli.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@_handle_errors
def report(run_dir):
    """Print the evaluation report and, when present, the analysis report."""
    context = RunContext.load(run_dir)
    click.echo(f"\n{click.style('Evaluation', fg='green', bold=True)}")
    click.echo("=" * 50)
    click.echo(context.run_dir.read_text(REPORT_FILE))
    analysis_report = f"{ANALYSIS_DIR}/report.md"
    if context.run_dir.exists(analysis_report):
        click.echo(f"\n{click.style('Analysis', fg='green', bold=True)}")
        click.echo("=" * 50)
        click.echo(context.run_dir.read_text(analysis_report))


@cli.command()
@click.argument("run_dir", type=click.Path(file_okay=False))
@_config_options
@click.option("--force", is_flag=True, help="Redo every stage even if its artifact exists")
@click.pass_context
@_handle_errors
def run(ctx, run_dir, force, **options):
    """Ingest and run every stage through evaluation."""
    settings = load_settings()
    repository = _dataset(settings, options)
    config = _build_config(repository, settings, options)
    results = run_pipeline(run_dir, config, repository, force=force, progress=ctx.obj.get("progress", True))
    for result in results:
        _print_stage(result)
    _print_report(EvaluationService(RunContext.load(run_dir)).evaluate())
    _exit_on_failures(results)


if __name__ == '__main__':
    cli()
