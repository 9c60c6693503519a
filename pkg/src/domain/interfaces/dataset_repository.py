# src/domain/interfaces/dataset_repository.py
from abc import ABC, abstractmethod
from typing import List
from ..entities.schema import SchemaDb
from ..entities.test_case import TestCase


class DatasetRepository(ABC):
    """Source of benchmark schemas and questions."""

    @abstractmethod
    def load_schemas(self) -> List[SchemaDb]:
        pass

    @abstractmethod
    def load_testcases(self, schemas: List[SchemaDb]) -> List[TestCase]:
        pass
