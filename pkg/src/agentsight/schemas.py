"""Schemas for structured LLM outputs.

Every gateway response is validated against a JSON schema plus an optional
semantic check that uses the action's context (e.g., the DSL must parse, a
direction must name an existing taxonomy row). Semantic failures are schema
errors: they trigger the same retry path.
"""

from __future__ import annotations

from typing import Any, Callable, Mapping

import jsonschema

from .errors import SchemaValidationError

_FRACTION = {"type": "number", "minimum": 0, "maximum": 1}
_OPT_TEXT = {"type": ["string", "null"]}

JSON_SCHEMAS: dict[str, dict] = {
    "direction_list": {
        "type": "object",
        "required": ["directions"],
        "properties": {
            "directions": {
                "type": "array",
                "maxItems": 5,
                "items": {
                    "type": "object",
                    "required": ["entity", "scope", "name", "temporality", "rationale"],
                    "properties": {
                        "entity": {"enum": ["User", "UGC"]},
                        "scope": {"enum": ["Single", "Group"]},
                        "name": {"type": "string"},
                        "temporality": {"enum": ["Static", "Dynamic"]},
                        "rationale": {"type": "string"},
                    },
                },
            },
        },
    },
    "query_chain": {
        "type": "object",
        "required": ["dsl", "rationale"],
        "properties": {
            "dsl": {"type": "string", "minLength": 1},
            "rationale": {"type": "string"},
            "refine": {"type": "boolean"},
        },
    },
    "method_choice": {
        "type": "object",
        "required": ["method_id", "rationale"],
        "properties": {
            "method_id": {"type": "string"},
            "rationale": {"type": "string"},
            "more_methods": {"type": "array", "items": {"type": "string"}},
        },
    },
    "rubric_score": {
        "type": "object",
        "required": ["score"],
        "properties": {"score": _FRACTION, "rationale": {"type": "string"}},
    },
    "viz_rubric": {
        "type": "object",
        "required": ["quality", "alignment"],
        "properties": {"quality": _FRACTION, "alignment": _FRACTION,
                       "rationale": {"type": "string"}},
    },
    "report_items": {
        "type": "object",
        "required": ["items"],
        "properties": {
            "items": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["narrative", "view_refs"],
                    "properties": {
                        "who": _OPT_TEXT, "what": _OPT_TEXT, "when": _OPT_TEXT,
                        "where": _OPT_TEXT, "why": _OPT_TEXT,
                        "narrative": {"type": "string", "minLength": 1},
                        "view_refs": {"type": "array", "minItems": 1,
                                      "items": {"type": "string"}},
                    },
                },
            },
        },
    },
    "interpretation": {
        "type": "object",
        "required": ["reasons", "evaluation", "next"],
        "properties": {
            "reasons": {"type": "string"},
            "evaluation": {"type": "string"},
            "next": {"type": "string"},
        },
    },
}


def _check_directions(response: Mapping, context: Mapping) -> None:
    valid = {tuple(k) for k in context.get("valid_keys", ())}
    na_dynamic = {tuple(k) for k in context.get("na_dynamic_keys", ())}
    seen = set()
    for i, d in enumerate(response["directions"]):
        key = (d["entity"], d["scope"], d["name"])
        if key not in valid:
            raise SchemaValidationError(
                f"directions[{i}] names unknown insight type {key}", field=f"directions[{i}].name")
        if d["temporality"] == "Dynamic" and key in na_dynamic:
            raise SchemaValidationError(
                f"directions[{i}] asks for a dynamic variant marked N/A",
                field=f"directions[{i}].temporality")
        full = key + (d["temporality"],)
        if full in seen:
            raise SchemaValidationError(
                f"directions[{i}] duplicates an earlier direction", field=f"directions[{i}]")
        seen.add(full)


def _check_query_chain(response: Mapping, context: Mapping) -> None:
    from .query.parser import parse_query  # local import: avoids a module cycle

    try:
        parse_query(response["dsl"])
    except Exception as exc:
        raise SchemaValidationError(f"dsl does not parse: {exc}", field="dsl") from None


def _check_method_choice(response: Mapping, context: Mapping) -> None:
    allowed = context.get("allowed_methods")
    if allowed is None:
        return
    if response["method_id"] not in allowed:
        raise SchemaValidationError(
            f"method {response['method_id']!r} not in {sorted(allowed)}", field="method_id")
    for i, extra in enumerate(response.get("more_methods", [])):
        if extra not in allowed:
            raise SchemaValidationError(
                f"method {extra!r} not in {sorted(allowed)}", field=f"more_methods[{i}]")


def _check_report_items(response: Mapping, context: Mapping) -> None:
    viz_ids = set(context.get("viz_ids", ()))
    for i, item in enumerate(response["items"]):
        for ref in item["view_refs"]:
            if viz_ids and ref not in viz_ids:
                raise SchemaValidationError(
                    f"items[{i}] references unknown view {ref!r}",
                    field=f"items[{i}].view_refs")


SEMANTIC_CHECKS: dict[str, Callable[[Mapping, Mapping], None]] = {
    "direction_list": _check_directions,
    "query_chain": _check_query_chain,
    "method_choice": _check_method_choice,
    "report_items": _check_report_items,
}


def validate_response(schema_id: str, response: Any, context: Mapping) -> None:
    """Raise SchemaValidationError naming the offending field."""
    if schema_id not in JSON_SCHEMAS:
        raise SchemaValidationError(f"unknown schema {schema_id!r}")
    if not isinstance(response, Mapping):
        raise SchemaValidationError("response is not an object")
    validator = jsonschema.Draft202012Validator(JSON_SCHEMAS[schema_id])
    errors = sorted(validator.iter_errors(response), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path)
        if err.validator == "required":
            missing = err.message.split("'")[1]
            field = f"{path}.{missing}" if path else missing
            raise SchemaValidationError(f"missing required field {field!r}", field=field)
        raise SchemaValidationError(f"{path or '<root>'}: {err.message}", field=path or None)
    check = SEMANTIC_CHECKS.get(schema_id)
    if check is not None:
        check(response, context)
