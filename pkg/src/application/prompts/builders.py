# src/application/prompts/builders.py
from typing import Sequence, Tuple

from .template import PromptStage, load_template

NO_EXAMPLES = "(no examples)"

# (question, sql, reasoning path)
ExampleTriplet = Tuple[str, str, str]


def build_linking_prompt(tables: str, fks: str, question: str) -> str:
    template = load_template(PromptStage.SCHEMA_LINKING)
    return template.fill({"tables": tables, "foreign_keys": fks, "question": question})


def build_generation_prompt(schema_linking: str, tables: str, fks: str, question: str) -> str:
    """Example-generation prompt; schema_linking may be empty under the schema-linking ablation."""
    template = load_template(PromptStage.EXAMPLE_GENERATION)
    return template.fill(
        {"schema_linking": schema_linking, "tables": tables, "foreign_keys": fks, "question": question},
        optional=("schema_linking",),
    )


def build_filtering_prompt(test_question: str, similar_question: str, reasoning_path: str) -> str:
    template = load_template(PromptStage.EXAMPLE_FILTERING)
    return template.fill(
        {
            "test_question": test_question,
            "similar_question": similar_question,
            "reasoning_path": reasoning_path,
        }
    )


def format_examples(examples: Sequence[ExampleTriplet], include_reasoning: bool = True) -> str:
    """Numbered example blocks in the given order; the caller sorts by relevance."""
    blocks = []
    for number, (question, sql, reasoning) in enumerate(examples, start=1):
        lines = [f"Example {number}:", f"Question: {question}", f"SQL: {sql}"]
        if include_reasoning:
            lines.append(f"Reasoning: {reasoning}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def build_inference_prompt(tables: str, fks: str, question: str, filtered_examples: str) -> str:
    template = load_template(PromptStage.FINAL_INFERENCE)
    return template.fill(
        {
            "tables": tables,
            "foreign_keys": fks,
            "question": question,
            "filtered_examples": filtered_examples if filtered_examples.strip() else NO_EXAMPLES,
        }
    )
