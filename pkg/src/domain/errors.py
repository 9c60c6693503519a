# src/domain/errors.py
from typing import Iterable, Optional


class SafeSqlError(Exception):
    """Base class for every error raised by the pipeline."""


class DatasetError(SafeSqlError):
    pass


class SchemaIntegrityError(DatasetError):
    def __init__(self, db_id: str, message: str):
        super().__init__(f"Schema {db_id}: {message}")
        self.db_id = db_id


class ReferentialError(DatasetError):
    def __init__(self, offenders: Iterable[str]):
        self.offenders = sorted(set(offenders))
        super().__init__(f"Unknown db_id referenced: {', '.join(self.offenders)}")


class ConfigurationError(SafeSqlError, ValueError):
    pass


class TransportError(SafeSqlError):
    pass


class CacheMissError(SafeSqlError):
    def __init__(self, key: str):
        super().__init__(f"No recorded response for cache key {key}")
        self.key = key


class DegenerateVectorError(SafeSqlError, ValueError):
    pass


class TemplateError(SafeSqlError):
    def __init__(self, slot: str, message: Optional[str] = None):
        super().__init__(message or f"Missing value for prompt slot '{slot}'")
        self.slot = slot


class GenerationFailedError(SafeSqlError):
    def __init__(self, message: str, raw_text: str):
        super().__init__(message)
        self.raw_text = raw_text


class ExtractionFailedError(SafeSqlError):
    def __init__(self, raw_text: str):
        super().__init__("Model reply contains no SQL statement")
        self.raw_text = raw_text


class SqlParseError(SafeSqlError):
    pass


class ExecutionError(SafeSqlError):
    pass


class QueryTimeoutError(ExecutionError):
    pass


class WriteRejectedError(ExecutionError):
    pass


class DatabaseMissingError(ExecutionError):
    pass


class GoldInvalidError(SafeSqlError):
    pass


class ClassificationError(SafeSqlError):
    pass


class UndefinedCorrelationError(SafeSqlError, ValueError):
    pass


class StageOrderError(SafeSqlError):
    def __init__(self, missing: str):
        super().__init__(f"Required artifact not found: {missing}. Run the previous stage first.")
        self.missing = missing
