# src/domain/entities/schema.py
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ..errors import SchemaIntegrityError

COLUMN_TYPES = ("text", "number", "time", "boolean", "others")

# (table index, column index within that table)
ColumnRef = Tuple[int, int]


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: str = "text"


@dataclass(frozen=True)
class TableDef:
    """One table of a Spider database with its typed columns."""
    name: str
    columns: Tuple[ColumnDef, ...] = ()

    def __post_init__(self):
        seen = set()
        for column in self.columns:
            key = column.name.lower()
            if key in seen:
                raise SchemaIntegrityError(self.name, f"duplicate column '{column.name}' in table '{self.name}'")
            seen.add(key)


@dataclass(frozen=True)
class ForeignKey:
    child: ColumnRef
    parent: ColumnRef


@dataclass(frozen=True)
class SchemaDb:
    """In-memory model of one database schema.

    Column references are positional, so the schema can be rendered and
    serialized without depending on name case.
    """
    db_id: str
    tables: Tuple[TableDef, ...] = ()
    foreign_keys: Tuple[ForeignKey, ...] = ()
    primary_keys: Tuple[ColumnRef, ...] = ()
    sqlite_path: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        names = set()
        for table in self.tables:
            key = table.name.lower()
            if key in names:
                raise SchemaIntegrityError(self.db_id, f"duplicate table '{table.name}'")
            names.add(key)

        for ref in self.primary_keys:
            self._check_ref(ref, "primary key")
        for fk in self.foreign_keys:
            self._check_ref(fk.child, "foreign key child")
            self._check_ref(fk.parent, "foreign key parent")

    def _check_ref(self, ref: ColumnRef, role: str) -> None:
        table_idx, column_idx = ref
        if not 0 <= table_idx < len(self.tables):
            raise SchemaIntegrityError(self.db_id, f"{role} references missing table index {table_idx}")
        if not 0 <= column_idx < len(self.tables[table_idx].columns):
            raise SchemaIntegrityError(
                self.db_id,
                f"{role} references missing column {column_idx} of table '{self.tables[table_idx].name}'",
            )

    @property
    def has_database(self) -> bool:
        return self.sqlite_path is not None

    def column_name(self, ref: ColumnRef) -> Tuple[str, str]:
        table = self.tables[ref[0]]
        return table.name, table.columns[ref[1]].name

    def table_names(self) -> List[str]:
        return [table.name for table in self.tables]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "db_id": self.db_id,
            "tables": [
                {"name": t.name, "columns": [[c.name, c.type] for c in t.columns]}
                for t in self.tables
            ],
            "foreign_keys": [[list(fk.child), list(fk.parent)] for fk in self.foreign_keys],
            "primary_keys": [list(ref) for ref in self.primary_keys],
            "sqlite_path": self.sqlite_path,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SchemaDb":
        return cls(
            db_id=data["db_id"],
            tables=tuple(
                TableDef(name=t["name"], columns=tuple(ColumnDef(name=c[0], type=c[1]) for c in t["columns"]))
                for t in data["tables"]
            ),
            foreign_keys=tuple(
                ForeignKey(child=(fk[0][0], fk[0][1]), parent=(fk[1][0], fk[1][1]))
                for fk in data["foreign_keys"]
            ),
            primary_keys=tuple((ref[0], ref[1]) for ref in data["primary_keys"]),
            sqlite_path=data.get("sqlite_path"),
        )
