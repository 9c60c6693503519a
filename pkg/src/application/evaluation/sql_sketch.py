# src/application/evaluation/sql_sketch.py
"""Structural sketch of a SELECT statement used for exact match and difficulty.

Canonicalization lowercases identifiers, resolves table and column aliases,
orders the operands of equalities and sorts every set-valued clause, so two
queries that differ only in those respects share a sketch.
"""
import re
from dataclasses import dataclass, field, replace
from typing import Iterator, List, Optional, Tuple

import sqlglot
from sqlglot import exp
from sqlglot.errors import SqlglotError

from ...domain.errors import SqlParseError

DIALECT = "sqlite"
SET_OPERATIONS = (exp.Union, exp.Intersect, exp.Except)
QUERY_TYPES = (exp.Select, exp.Subquery) + SET_OPERATIONS
COMPARISONS = (exp.EQ, exp.NEQ, exp.GT, exp.GTE, exp.LT, exp.LTE, exp.Like)
PLAIN_IDENTIFIER = re.compile(r"[a-z_][a-z0-9_]*")


@dataclass(frozen=True)
class SqlSketch:
    select: Tuple[str, ...] = ()
    distinct: bool = False
    sources: Tuple[str, ...] = ()
    join_kinds: Tuple[str, ...] = ()
    join_conditions: Tuple[str, ...] = ()
    where: Tuple[str, ...] = ()
    group_by: Tuple[str, ...] = ()
    having: Tuple[str, ...] = ()
    order_by: Tuple[Tuple[str, str], ...] = ()
    limit: Optional[str] = None
    set_operation: Optional[str] = None
    set_operand: Optional["SqlSketch"] = None
    ctes: Tuple[str, ...] = ()
    nesting_depth: int = 0
    # feature counts for difficulty; derived from the fields above
    join_count: int = field(default=0, compare=False)
    aggregate_count: int = field(default=0, compare=False)
    nested_count: int = field(default=0, compare=False)
    set_op_count: int = field(default=0, compare=False)
    canonical_sql: str = field(default="", compare=False)

    @property
    def has_order_by(self) -> bool:
        return bool(self.order_by)


def parse_sql(sql: str) -> exp.Expression:
    """Parse exactly one query statement with the SQLite grammar."""
    if not sql or not sql.strip():
        raise SqlParseError("Empty SQL")
    try:
        statements = [s for s in sqlglot.parse(sql, read=DIALECT) if s is not None]
    except SqlglotError as e:
        raise SqlParseError(f"Could not parse SQL: {e}") from e
    if len(statements) != 1:
        raise SqlParseError(f"Expected one statement, found {len(statements)}")
    statement = statements[0]
    if not isinstance(statement, QUERY_TYPES):
        raise SqlParseError(f"Not a query: {statement.key}")
    return statement


def _walk_scope(select: exp.Expression) -> Iterator[exp.Expression]:
    """Nodes of one SELECT, not descending into nested queries."""
    stack = list(select.iter_expressions())
    while stack:
        node = stack.pop()
        if isinstance(node, (exp.Select,) + SET_OPERATIONS):
            continue
        yield node
        stack.extend(node.iter_expressions())


def _sources(select: exp.Select) -> List[exp.Expression]:
    sources = []
    clause = select.args.get("from") or select.args.get("from_")
    if clause is not None:
        if clause.this is not None:
            sources.append(clause.this)
        sources.extend(clause.expressions)
    for join in select.args.get("joins") or []:
        sources.append(join.this)
    return sources


def _is_quoted_bare_column(node: exp.Expression) -> bool:
    return isinstance(node, exp.Column) and not node.table and bool(node.this.args.get("quoted"))


def _quoted_values_to_literals(tree: exp.Expression) -> None:
    # SQLite reads "x" as a string when no column is called x; Spider relies on that
    for node in list(tree.find_all(*COMPARISONS)):
        right = node.expression
        if _is_quoted_bare_column(right):
            right.replace(exp.Literal.string(right.name))
    for node in list(tree.find_all(exp.In)):
        for value in list(node.expressions):
            if _is_quoted_bare_column(value):
                value.replace(exp.Literal.string(value.name))


def _lowercase_identifiers(tree: exp.Expression) -> None:
    for ident in tree.find_all(exp.Identifier):
        name = ident.name.lower()
        ident.set("this", name)
        ident.set("quoted", not PLAIN_IDENTIFIER.fullmatch(name))


def _resolve_aliases(select: exp.Select) -> None:
    sources = _sources(select)
    alias_map = {}
    table_names = []
    for position, source in enumerate(sources):
        alias = source.alias.lower() if source.alias else ""
        if isinstance(source, exp.Table):
            name = source.name.lower()
            table_names.append(name)
            if alias:
                alias_map[alias] = name
            source.set("alias", None)
        elif alias:
            # derived tables get positional names so alias spelling never matters
            alias_map[alias] = f"derived{position}"
            source.set("alias", exp.TableAlias(this=exp.to_identifier(alias_map[alias])))

    single_table = len(sources) == 1 and isinstance(sources[0], exp.Table)
    for column in [n for n in _walk_scope(select) if isinstance(n, exp.Column)]:
        qualifier = column.table.lower() if column.table else ""
        if single_table and (not qualifier or qualifier in alias_map or qualifier in table_names):
            column.set("table", None)
        elif qualifier in alias_map:
            column.set("table", exp.to_identifier(alias_map[qualifier]))

    # output aliases never count; references to them take the aliased expression
    aliased = {}
    items = []
    for item in select.expressions:
        if isinstance(item, exp.Alias):
            aliased[item.alias.lower()] = item.this
            items.append(item.this)
        else:
            items.append(item)
    select.set("expressions", items)
    for key in ("order", "having"):
        clause = select.args.get(key)
        if clause is None or not aliased:
            continue
        for column in [n for n in clause.find_all(exp.Column) if not n.table and n.name in aliased]:
            column.replace(aliased[column.name].copy())


def _order_equalities(tree: exp.Expression) -> None:
    for node in reversed(list(tree.find_all(exp.EQ, exp.NEQ))):
        left, right = node.this, node.expression
        if left is not None and right is not None and left.sql(dialect=DIALECT) > right.sql(dialect=DIALECT):
            node.set("this", right)
            node.set("expression", left)


def conjuncts(condition: Optional[exp.Expression]) -> List[exp.Expression]:
    if condition is None:
        return []
    if isinstance(condition, exp.Paren) and isinstance(condition.this, exp.And):
        return conjuncts(condition.this)
    if isinstance(condition, exp.And):
        return conjuncts(condition.this) + conjuncts(condition.expression)
    return [condition]


def _sorted_conjunction(condition: exp.Expression) -> exp.Expression:
    parts = sorted(conjuncts(condition), key=lambda c: c.sql(dialect=DIALECT))
    result = parts[0]
    for part in parts[1:]:
        result = exp.And(this=result, expression=part)
    return result


def _sort_clauses(select: exp.Select) -> None:
    for key in ("where", "having"):
        clause = select.args.get(key)
        if clause is not None and clause.this is not None:
            clause.set("this", _sorted_conjunction(clause.this))
    for join in select.args.get("joins") or []:
        on = join.args.get("on")
        if on is not None:
            join.set("on", _sorted_conjunction(on))
    select.set("expressions", sorted(select.expressions, key=lambda e: e.sql(dialect=DIALECT)))
    group = select.args.get("group")
    if group is not None:
        group.set("expressions", sorted(group.expressions, key=lambda e: e.sql(dialect=DIALECT)))


def canonicalize(tree: exp.Expression) -> exp.Expression:
    """Rewrite a parsed query in place into its canonical form and return it."""
    _quoted_values_to_literals(tree)
    _lowercase_identifiers(tree)
    # deepest queries first, so a parent sees canonical subqueries
    selects = list(reversed(list(tree.find_all(exp.Select))))
    for select in selects:
        _resolve_aliases(select)
    _order_equalities(tree)
    for select in selects:
        _sort_clauses(select)
    return tree


def _sql(node: exp.Expression) -> str:
    return node.sql(dialect=DIALECT)


def _sorted_strings(nodes) -> Tuple[str, ...]:
    return tuple(sorted(_sql(node) for node in nodes))


def _order_items(node: exp.Expression) -> Tuple[Tuple[str, str], ...]:
    order = node.args.get("order")
    if order is None:
        return ()
    return tuple((_sql(item.this), "DESC" if item.args.get("desc") else "ASC") for item in order.expressions)


def _limit(node: exp.Expression) -> Optional[str]:
    limit = node.args.get("limit")
    return _sql(limit) if limit is not None else None


def _set_operation_name(node: exp.Expression) -> str:
    if isinstance(node, exp.Intersect):
        name = "INTERSECT"
    elif isinstance(node, exp.Except):
        name = "EXCEPT"
    else:
        name = "UNION"
    if node.args.get("distinct") is False:
        name += " ALL"
    return name


def _append_set_operation(sketch: SqlSketch, name: str, operand: SqlSketch) -> SqlSketch:
    if sketch.set_operation is None:
        return replace(sketch, set_operation=name, set_operand=operand)
    return replace(sketch, set_operand=_append_set_operation(sketch.set_operand, name, operand))


def _build(node: exp.Expression) -> SqlSketch:
    if isinstance(node, exp.Subquery):
        return _build(node.this)
    if isinstance(node, SET_OPERATIONS):
        sketch = _append_set_operation(_build(node.this), _set_operation_name(node), _build(node.expression))
        order, limit = _order_items(node), _limit(node)
        return replace(sketch, order_by=order or sketch.order_by, limit=limit or sketch.limit)
    if not isinstance(node, exp.Select):
        raise SqlParseError(f"Unsupported query node: {node.key}")

    joins = node.args.get("joins") or []
    join_kinds = []
    join_conditions = []
    for join in joins:
        kind = " ".join(part for part in (join.text("side"), join.text("kind")) if part and part.upper() != "INNER")
        if kind:
            join_kinds.append(kind.upper())
        join_conditions.extend(conjuncts(join.args.get("on")))

    with_clause = node.args.get("with")
    ctes = ()
    if with_clause is not None:
        ctes = tuple(sorted(f"{cte.alias}={_sql(cte.this)}" for cte in with_clause.expressions))

    where = node.args.get("where")
    having = node.args.get("having")
    group = node.args.get("group")
    return SqlSketch(
        select=_sorted_strings(node.expressions),
        distinct=node.args.get("distinct") is not None,
        sources=_sorted_strings(_sources(node)),
        join_kinds=tuple(sorted(join_kinds)),
        join_conditions=_sorted_strings(join_conditions),
        where=_sorted_strings(conjuncts(where.this if where is not None else None)),
        group_by=_sorted_strings(group.expressions if group is not None else []),
        having=_sorted_strings(conjuncts(having.this if having is not None else None)),
        order_by=_order_items(node),
        limit=_limit(node),
        ctes=ctes,
    )


def _nesting_depth(tree: exp.Expression) -> int:
    deepest = 0
    for select in tree.find_all(exp.Select):
        depth = 0
        parent = select.parent
        while parent is not None:
            if isinstance(parent, exp.Select):
                depth += 1
            parent = parent.parent
        deepest = max(deepest, depth)
    return deepest


def sketch_query(sql: str) -> SqlSketch:
    """
    Parse and canonicalize `sql` into a SqlSketch.

    Raises:
        SqlParseError: If the text is not a single parseable query
    """
    tree = canonicalize(parse_sql(sql))
    sketch = _build(tree)
    set_ops = len(list(tree.find_all(*SET_OPERATIONS)))
    selects = len(list(tree.find_all(exp.Select)))
    return replace(
        sketch,
        nesting_depth=_nesting_depth(tree),
        join_count=len(list(tree.find_all(exp.Join))),
        aggregate_count=len(list(tree.find_all(exp.AggFunc))),
        nested_count=max(0, selects - 1 - set_ops),
        set_op_count=set_ops,
        canonical_sql=_sql(tree),
    )
