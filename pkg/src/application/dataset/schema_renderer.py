# src/application/dataset/schema_renderer.py
from ...domain.entities.schema import SchemaDb

NO_FOREIGN_KEYS = "(none)"


def render_tables(db: SchemaDb) -> str:
    """One line per table: `table(col1:type, col2:type, ...)`."""
    lines = []
    for table in db.tables:
        columns = ", ".join(f"{column.name}:{column.type}" for column in table.columns)
        lines.append(f"{table.name}({columns})\n")
    return "".join(lines)


def render_foreign_keys(db: SchemaDb) -> str:
    """One line per foreign key: `child_table.col -> parent_table.col`."""
    lines = []
    for fk in db.foreign_keys:
        child_table, child_column = db.column_name(fk.child)
        parent_table, parent_column = db.column_name(fk.parent)
        lines.append(f"{child_table}.{child_column} -> {parent_table}.{parent_column}\n")
    return "".join(lines)


def render_schema(db: SchemaDb) -> str:
    return render_tables(db) + render_foreign_keys(db)


def tables_slot(db: SchemaDb) -> str:
    return render_tables(db).rstrip("\n")


def foreign_keys_slot(db: SchemaDb) -> str:
    return render_foreign_keys(db).rstrip("\n") or NO_FOREIGN_KEYS
