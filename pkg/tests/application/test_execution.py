# tests/application/test_execution.py
import random
from dataclasses import replace

import pytest

from src.application.evaluation.executor import execute, reject_writes
from src.application.evaluation.matching import compare_execution, execution_match, rows_equal, values_equal
from src.domain.errors import DatabaseMissingError, GoldInvalidError, QueryTimeoutError, WriteRejectedError

EQUIVALENT = [
    ("SELECT name FROM singer WHERE 30 < age", "SELECT name FROM singer WHERE age > 30"),
    ("SELECT count(singer_id) FROM singer", "SELECT count(*) FROM singer"),
    ("SELECT name FROM singer WHERE country IN ('France')", "SELECT name FROM singer WHERE country = 'France'"),
    ("SELECT country FROM singer GROUP BY country", "SELECT DISTINCT country FROM singer"),
    ("SELECT age FROM singer ORDER BY age DESC LIMIT 1", "SELECT max(age) FROM singer"),
    (
        "SELECT concert_name FROM concert WHERE concert_id IN (SELECT concert_id FROM singer_in_concert WHERE singer_id = 3)",
        "SELECT T2.concert_name FROM singer_in_concert AS T1 JOIN concert AS T2 "
        "ON T1.concert_id = T2.concert_id WHERE T1.singer_id = 3",
    ),
    ("SELECT sum(age) / 2.0 FROM singer WHERE country = 'France'", "SELECT avg(age) FROM singer WHERE country = 'France'"),
    ("SELECT name FROM singer WHERE age >= 30 AND age <= 45", "SELECT name FROM singer WHERE age BETWEEN 30 AND 45"),
    (
        "SELECT country, count(*) FROM singer GROUP BY country ORDER BY count(*) DESC",
        "SELECT country, count(*) FROM singer GROUP BY country",
    ),
    ("SELECT name FROM singer ORDER BY age ASC", "SELECT name FROM singer ORDER BY age"),
    ("SELECT concert_name FROM concert WHERE year LIKE '2014'", "SELECT concert_name FROM concert WHERE year = '2014'"),
]

DIFFERENT = [
    ("SELECT name FROM singer WHERE age > 40", "SELECT name FROM singer WHERE age > 30"),
    ("SELECT count(*) FROM singer WHERE country = 'Netherlands'", "SELECT count(*) FROM singer WHERE country = 'France'"),
    ("SELECT name FROM singer ORDER BY age ASC", "SELECT name FROM singer ORDER BY age DESC"),
    ("SELECT min(age) FROM singer", "SELECT max(age) FROM singer"),
    ("SELECT name, age FROM singer", "SELECT name FROM singer"),
    ("SELECT country FROM singer", "SELECT DISTINCT country FROM singer"),
    ("SELECT concert_name FROM concert WHERE year = '2015'", "SELECT concert_name FROM concert WHERE year = '2014'"),
    ("SELECT avg(age) FROM singer WHERE age < 50", "SELECT avg(age) FROM singer"),
    (
        "SELECT name FROM singer WHERE singer_id IN (SELECT singer_id FROM singer_in_concert WHERE concert_id = 3)",
        "SELECT name FROM singer WHERE singer_id IN (SELECT singer_id FROM singer_in_concert WHERE concert_id = 1)",
    ),
]


@pytest.mark.parametrize("pred, gold", EQUIVALENT)
def test_equivalent_queries_match(pred, gold, schema):
    assert execution_match(pred, gold, schema)


@pytest.mark.parametrize("pred, gold", DIFFERENT)
def test_different_results_do_not_match(pred, gold, schema):
    assert not execution_match(pred, gold, schema)


class TestRowComparison:
    def test_unordered_comparison_ignores_permutations(self):
        rng = random.Random(3)
        rows = [(i % 4, f"name {i}", i * 0.5) for i in range(12)]
        for _ in range(100):
            shuffled = rows[:]
            rng.shuffle(shuffled)
            assert rows_equal(shuffled, rows, ordered=False)
            assert rows_equal(shuffled, rows, ordered=True) == (shuffled == rows)

    def test_duplicates_count(self):
        assert not rows_equal([(1,), (1,), (2,)], [(1,), (2,), (2,)], ordered=False)

    def test_mixed_types_sort(self):
        assert rows_equal([(None,), ("a",), (1,)], [(1,), (None,), ("a",)], ordered=False)

    def test_float_tolerance(self):
        assert values_equal(1.0, 1.0000001)
        assert values_equal(35, 35.0)
        assert not values_equal(1.0, 1.00001)
        assert not values_equal("35", 35)

    def test_near_equal_floats_sort_together(self):
        left = [(1.0000001, "b"), (1.0, "a")]
        right = [(1.0, "b"), (1.0000002, "a")]
        assert rows_equal(left, right, ordered=False)
        assert not rows_equal(left, [(1.0, "b"), (1.0000002, "c")], ordered=False)


class TestExecutor:
    def test_rows_in_execution_order(self, schema):
        table = execute("SELECT name, age FROM singer ORDER BY age", schema)
        assert table.columns == 2
        assert table.ordered_rows[0] == ("Justin Brown", 29)
        assert len(table.rows) == 4

    @pytest.mark.parametrize(
        "sql",
        [
            "DELETE FROM singer",
            "drop table singer",
            "INSERT INTO singer VALUES (9, 'x', 'y', 1)",
            "UPDATE singer SET age = 0",
            "PRAGMA writable_schema = 1",
        ],
    )
    def test_writes_rejected(self, sql):
        with pytest.raises(WriteRejectedError):
            reject_writes(sql)

    def test_write_prediction_is_a_miss_and_leaves_data_alone(self, schema):
        ex, diagnostics = compare_execution("DELETE FROM singer", "SELECT count(*) FROM singer", schema)
        assert not ex
        assert diagnostics.startswith("WriteRejectedError")
        assert execute("SELECT count(*) FROM singer", schema).ordered_rows == ((4,),)

    def test_prediction_error_is_a_miss(self, schema):
        ex, diagnostics = compare_execution("SELECT nope FROM singer", "SELECT name FROM singer", schema)
        assert not ex
        assert diagnostics.startswith("ExecutionError")

    def test_timeout(self, schema):
        runaway = "WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c) SELECT count(*) FROM c"
        with pytest.raises(QueryTimeoutError):
            execute(runaway, schema, timeout_ms=50)

    def test_missing_database(self, schema):
        with pytest.raises(DatabaseMissingError):
            execution_match("SELECT 1", "SELECT 1", replace(schema, sqlite_path=None))

    def test_invalid_gold(self, schema):
        with pytest.raises(GoldInvalidError):
            execution_match("SELECT name FROM singer", "SELECT name FROM nowhere", schema)
