# src/domain/entities/run_config.py
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, Optional

from ..errors import ConfigurationError
from .evaluation import DifficultyRules
from .llm import BackendKind, StageTag
from .scoring import WeightConfig


@dataclass(frozen=True)
class StageModelConfig:
    backend: BackendKind = BackendKind.HTTP_API
    model: str = "gpt-4o"
    temperature: float = 0.0
    max_tokens: int = 1024

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["backend"] = self.backend.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StageModelConfig":
        return cls(
            backend=BackendKind(data["backend"]),
            model=data["model"],
            temperature=data["temperature"],
            max_tokens=data["max_tokens"],
        )


def _default_stages() -> Dict[str, StageModelConfig]:
    return {
        StageTag.GENERATION.value: StageModelConfig(temperature=1.0, max_tokens=4096),
        StageTag.SCORING.value: StageModelConfig(temperature=0.0, max_tokens=256),
        StageTag.INFERENCE.value: StageModelConfig(temperature=0.0, max_tokens=512),
        StageTag.EMBEDDING.value: StageModelConfig(backend=BackendKind.MOCK_HASH, model="hash-64"),
    }


@dataclass(frozen=True)
class AblationFlags:
    no_reasoning: bool = False
    no_filtering: bool = False
    no_schema_linking: bool = False
    no_examples: bool = False

    @property
    def active(self) -> Optional[str]:
        for name, value in asdict(self).items():
            if value:
                return name
        return None


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run depends on, persisted as config.json."""
    tables_file: str
    questions_file: str
    db_dir: str
    stages: Dict[str, StageModelConfig] = field(default_factory=_default_stages)
    n_examples: int = 10
    theta: float = 8.0
    weights: WeightConfig = field(default_factory=WeightConfig)
    ablations: AblationFlags = field(default_factory=AblationFlags)
    parallelism: int = 4
    limit: Optional[int] = None
    seed: int = 0
    fallback_k: int = 3
    timeout_ms: int = 30000
    requests_per_minute: int = 0
    max_attempts: int = 5
    base_url: Optional[str] = None
    api_key_env: str = "OPENAI_API_KEY"
    cache_path: Optional[str] = None
    scripted_responses: Optional[str] = None
    difficulty_rules: DifficultyRules = field(default_factory=DifficultyRules)

    def validate(self) -> "RunConfig":
        if not 0 <= self.theta <= 10:
            raise ConfigurationError(f"theta must be within [0, 10], got {self.theta}")
        if self.parallelism < 1:
            raise ConfigurationError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.n_examples < 1:
            raise ConfigurationError(f"n_examples must be >= 1, got {self.n_examples}")
        if self.fallback_k < 1:
            raise ConfigurationError(f"fallback_k must be >= 1, got {self.fallback_k}")
        if self.limit is not None and self.limit < 1:
            raise ConfigurationError(f"limit must be >= 1, got {self.limit}")
        if self.timeout_ms < 1:
            raise ConfigurationError(f"timeout_ms must be >= 1, got {self.timeout_ms}")
        missing = [tag.value for tag in StageTag if tag.value not in self.stages]
        if missing:
            raise ConfigurationError(f"Missing stage model configuration: {', '.join(missing)}")
        uses_scripted = any(s.backend == BackendKind.MOCK_SCRIPTED for s in self.stages.values())
        if uses_scripted and not self.scripted_responses:
            raise ConfigurationError("mock_scripted backend requires scripted_responses")
        return self

    def stage(self, tag: StageTag) -> StageModelConfig:
        return self.stages[tag.value]

    def with_stage(self, tag: StageTag, **changes) -> "RunConfig":
        stages = dict(self.stages)
        stages[tag.value] = replace(stages[tag.value], **changes)
        return replace(self, stages=stages)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tables_file": self.tables_file,
            "questions_file": self.questions_file,
            "db_dir": self.db_dir,
            "stages": {name: stage.to_dict() for name, stage in sorted(self.stages.items())},
            "n_examples": self.n_examples,
            "theta": self.theta,
            "weights": self.weights.to_dict(),
            "ablations": asdict(self.ablations),
            "parallelism": self.parallelism,
            "limit": self.limit,
            "seed": self.seed,
            "fallback_k": self.fallback_k,
            "timeout_ms": self.timeout_ms,
            "requests_per_minute": self.requests_per_minute,
            "max_attempts": self.max_attempts,
            "base_url": self.base_url,
            "api_key_env": self.api_key_env,
            "cache_path": self.cache_path,
            "scripted_responses": self.scripted_responses,
            "difficulty_rules": asdict(self.difficulty_rules),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        stages = _default_stages()
        for name, stage in data.get("stages", {}).items():
            stages[name] = StageModelConfig.from_dict(stage)
        return cls(
            tables_file=data["tables_file"],
            questions_file=data["questions_file"],
            db_dir=data["db_dir"],
            stages=stages,
            n_examples=data.get("n_examples", 10),
            theta=data.get("theta", 8.0),
            weights=WeightConfig.from_dict(data["weights"]) if "weights" in data else WeightConfig(),
            ablations=AblationFlags(**data.get("ablations", {})),
            parallelism=data.get("parallelism", 4),
            limit=data.get("limit"),
            seed=data.get("seed", 0),
            fallback_k=data.get("fallback_k", 3),
            timeout_ms=data.get("timeout_ms", 30000),
            requests_per_minute=data.get("requests_per_minute", 0),
            max_attempts=data.get("max_attempts", 5),
            base_url=data.get("base_url"),
            api_key_env=data.get("api_key_env", "OPENAI_API_KEY"),
            cache_path=data.get("cache_path"),
            scripted_responses=data.get("scripted_responses"),
            difficulty_rules=DifficultyRules(**data.get("difficulty_rules", {})),
        )
