# tests/application/test_generation.py
import pytest

from src.application.generation.block_parser import parse_example_blocks
from src.application.generation.example_generator import generate_examples
from src.application.generation.schema_linker import find_referenced_tables, link_schema, skipped_linking
from src.domain.entities.example import SchemaLinking
from src.domain.entities.llm import StageTag
from src.domain.entities.run_config import StageModelConfig
from src.domain.errors import GenerationFailedError
from src.infrastructure.llm.client import LLMClient
from src.infrastructure.llm.mock_backends import ScriptedBackend

STAGE = StageModelConfig(model="scripted", temperature=1.0)

PLAIN_REPLY = """Similar Question 1: How many concerts are there?
SQL query 1: SELECT count(*) FROM concert
Reasoning Path 1: Count all rows of the concert table.

Similar Question 2: List the names of singers older than 40.
SQL query 2: SELECT name FROM singer WHERE age > 40
Reasoning Path 2: Filter singer on age and project the name column.
"""

MARKDOWN_REPLY = """## Example 1
**Similar Question:** How many singers are from France?
**SQL query:**
```sql
SELECT count(*)
FROM singer
WHERE country = 'France';
```
**Reasoning Path:** Filter singer on country, then
count the remaining rows.

---

2. Similar Question: Which concert was held in 2015?
2. SQL query: SELECT concert_name FROM concert WHERE year = '2015'
2. Reasoning Path: Filter concert on year.
"""


class TestBlockParser:
    def test_plain_blocks(self):
        assert parse_example_blocks(PLAIN_REPLY) == [
            ("How many concerts are there?", "SELECT count(*) FROM concert", "Count all rows of the concert table."),
            (
                "List the names of singers older than 40.",
                "SELECT name FROM singer WHERE age > 40",
                "Filter singer on age and project the name column.",
            ),
        ]

    def test_markdown_fences_and_numbering(self):
        triplets = parse_example_blocks(MARKDOWN_REPLY)
        assert len(triplets) == 2
        question, sql, reasoning = triplets[0]
        assert question == "How many singers are from France?"
        assert sql == "SELECT count(*)\nFROM singer\nWHERE country = 'France'"
        assert reasoning == "Filter singer on country, then count the remaining rows."
        assert triplets[1][1] == "SELECT concert_name FROM concert WHERE year = '2015'"

    def test_out_of_order_block_is_skipped(self):
        reply = (
            "SQL query: SELECT 1\nSimilar Question: q1\nReasoning Path: r1\n"
            "Similar Question: q2\nSQL query: SELECT 2\nReasoning Path: r2\n"
        )
        assert parse_example_blocks(reply) == [("q2", "SELECT 2", "r2")]

    def test_empty_field_drops_the_triplet(self):
        reply = "Similar Question: q1\nSQL query:\nReasoning Path: r1\n"
        assert parse_example_blocks(reply) == []

    def test_no_headers(self):
        assert parse_example_blocks("I cannot help with that.") == []
        assert parse_example_blocks("") == []


class TestSchemaLinker:
    def test_referenced_tables_in_mention_order(self, schema):
        summary = "concert.concert_name joined through singer_in_concert to SINGER.name"
        assert find_referenced_tables(summary, schema) == ["concert", "singer_in_concert", "singer"]

    def test_table_inside_another_name_is_not_a_mention(self, schema):
        assert find_referenced_tables("singer_in_concert.singer_id", schema) == ["singer_in_concert"]

    def test_link_schema(self, case, schema):
        backend = ScriptedBackend(default="  Tables: singer\nColumns: singer.singer_id  ")
        linking = link_schema(case, schema, LLMClient(backend), STAGE)
        assert linking.linked_elements == "Tables: singer\nColumns: singer.singer_id"
        assert linking.referenced_tables == ("singer",)
        request = backend.call_history[0]
        assert request.temperature == 0.0
        assert request.stage_tag == StageTag.GENERATION

    def test_empty_reply_marks_failure(self, case, schema):
        linking = link_schema(case, schema, LLMClient(ScriptedBackend(default="   ")), STAGE)
        assert linking.linking_failed
        assert linking.linked_elements == ""

    def test_skipped(self, case):
        linking = skipped_linking(case)
        assert linking.skipped and linking.linked_elements == ""


class TestExampleGenerator:
    def test_pads_with_stubs(self, case, schema):
        backend = ScriptedBackend(default=PLAIN_REPLY)
        examples = generate_examples(case, schema, SchemaLinking(case.id), LLMClient(backend), STAGE, n=4)
        assert [e.ordinal for e in examples] == [0, 1, 2, 3]
        assert [e.parse_ok for e in examples] == [True, True, False, False]
        assert examples[3].raw_text == PLAIN_REPLY
        assert backend.calls == 1
        assert backend.call_history[0].temperature == 1.0

    def test_truncates_to_n(self, case, schema):
        examples = generate_examples(
            case, schema, SchemaLinking(case.id), LLMClient(ScriptedBackend(default=PLAIN_REPLY)), STAGE, n=1
        )
        assert len(examples) == 1
        assert examples[0].question == "How many concerts are there?"

    def test_unparseable_sql_is_discarded(self, case, schema):
        reply = (
            "Similar Question: q1\nSQL query: SELEC name FORM singer WHERE\nReasoning Path: r1\n"
            "Similar Question: q2\nSQL query: SELECT name FROM singer\nReasoning Path: r2\n"
        )
        examples = generate_examples(
            case, schema, SchemaLinking(case.id), LLMClient(ScriptedBackend(default=reply)), STAGE, n=2
        )
        assert examples[0].question == "q2"
        assert not examples[1].parse_ok

    def test_no_usable_triplet(self, case, schema):
        client = LLMClient(ScriptedBackend(default="Sorry, no examples."))
        with pytest.raises(GenerationFailedError) as error:
            generate_examples(case, schema, SchemaLinking(case.id), client, STAGE)
        assert error.value.raw_text == "Sorry, no examples."

    def test_linking_summary_reaches_the_prompt(self, case, schema):
        backend = ScriptedBackend(default=PLAIN_REPLY)
        linking = SchemaLinking(case.id, linked_elements="singer.singer_id")
        generate_examples(case, schema, linking, LLMClient(backend), STAGE, n=2)
        assert "## Schema linking: singer.singer_id\n" in backend.call_history[0].prompt

    def test_n_must_be_positive(self, case, schema):
        with pytest.raises(ValueError):
            generate_examples(case, schema, SchemaLinking(case.id), LLMClient(ScriptedBackend(default="")), STAGE, n=0)
