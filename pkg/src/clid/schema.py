"""JSON Schemas (draft 2020-12) of the documents the CLI writes."""

_num = {"type": "number"}
_opt_num = {"type": ["number", "null"]}

METRICS = {
    "type": "object",
    "required": ["cl", "codelength", "n_clusters", "id", "id_mle", "entropy", "clid_raw", "R", "R_c", "delta_R"],
    "properties": {
        "cl": {"type": "number", "minimum": 0, "maximum": 1},
        "codelength": {"type": "number", "minimum": 0},
        "n_clusters": {"type": "integer", "minimum": 1},
        "id": {"type": "number", "exclusiveMinimum": 0},
        "id_n_used": {"type": "integer"},
        "id_n_duplicates": {"type": "integer"},
        "id_mle": _num,
        "entropy": _num,
        "clid_raw": _num,
        "R": {"type": "number", "minimum": 0},
        "R_c": {"type": "number", "minimum": 0},
        "delta_R": _num,
        "l_align": {"type": "number", "minimum": 0},
        "l_unif": {"type": "number", "maximum": 0},
        "l_unif_pairs": {"type": "integer"},
        "contrastive": _num,
        "pretext_acc": {"type": "number", "minimum": 0, "maximum": 1},
    },
    "additionalProperties": False,
}

PROVENANCE = {
    "type": "object",
    "required": ["tool", "tool_version", "metric", "clusters", "neighbors", "chunk_size", "seed", "discard_fraction"],
}

ERROR = {
    "type": "object",
    "required": ["type", "message"],
    "properties": {"type": {"type": "string"}, "message": {"type": "string"}},
}

SCORE_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "input", "n_rows", "n_cols", "provenance", "metrics"],
    "properties": {
        "command": {"const": "score"},
        "input": {"type": "string"},
        "n_rows": {"type": "integer", "minimum": 1},
        "n_cols": {"type": "integer", "minimum": 1},
        "provenance": PROVENANCE,
        "metrics": METRICS,
    },
    "additionalProperties": False,
}

_model = {
    "type": "object",
    "required": ["name", "accuracy"],
    "properties": {"name": {"type": "string"}, "accuracy": _opt_num, "metrics": METRICS, "error": ERROR},
    "oneOf": [{"required": ["metrics"]}, {"required": ["error"]}],
}

_corr = {
    "type": "object",
    "required": ["pearson", "kendall"],
    "properties": {
        "pearson": {"type": ["number", "null"], "minimum": -1, "maximum": 1},
        "kendall": {"type": ["number", "null"], "minimum": -1, "maximum": 1},
        "note": {"type": "string"},
    },
}

_wclid = {
    "type": ["object", "null"],
    "properties": {
        "w": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
        "rss": _num,
        "n_models": {"type": "integer"},
        "loo": {"type": "boolean"},
    },
}

RANK_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "manifest", "provenance", "models", "predictors", "wclid", "n_models"],
    "properties": {
        "command": {"const": "rank"},
        "manifest": {"type": "string"},
        "provenance": PROVENANCE,
        "models": {"type": "array", "items": _model},
        "n_models": {"type": "integer"},
        "predictors": {
            "type": "array",
            "items": {"allOf": [_corr, {"required": ["predictor"], "properties": {"predictor": {"type": "string"}}}]},
        },
        "wclid": _wclid,
        "sweep": {
            "type": "object",
            "required": ["neighbors", "clusters", "cells"],
            "properties": {
                "cells": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["neighbors", "clusters", "predictors"],
                        "properties": {"predictors": {"type": "object", "additionalProperties": _corr}},
                    },
                }
            },
        },
    },
    "additionalProperties": False,
}

_tau_map = {"type": "object", "additionalProperties": {"type": ["number", "null"], "minimum": -1, "maximum": 1}}

TRANSFER_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "source", "targets", "provenance", "models", "tasks", "average", "wclid"],
    "properties": {
        "command": {"const": "transfer"},
        "source": {"type": "string"},
        "targets": {"type": "array", "items": {"type": "string"}},
        "provenance": PROVENANCE,
        "models": {"type": "array", "items": _model},
        "tasks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["task", "predictor_only", "joint"],
                "properties": {
                    "task": {"type": "string"},
                    "predictor_only": _tau_map,
                    "joint": _tau_map,
                    "source_accuracy": _opt_num,
                },
            },
        },
        "average": {"type": "object"},
        "wclid": _wclid,
    },
    "additionalProperties": False,
}

SYNTH_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "spec", "out", "n_rows", "n_cols"],
    "properties": {
        "command": {"const": "synth"},
        "spec": {"type": "object"},
        "out": {"type": "string"},
        "labels_out": {"type": ["string", "null"]},
        "n_rows": {"type": "integer"},
        "n_cols": {"type": "integer"},
        "ground_truth_id": {"type": ["integer", "null"]},
    },
    "additionalProperties": False,
}

ERROR_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["error"],
    "properties": {"error": {**ERROR, "properties": {**ERROR["properties"], "module": {"type": "string"}}}},
}

SCHEMAS = {
    "score": SCORE_REPORT,
    "rank": RANK_REPORT,
    "transfer": TRANSFER_REPORT,
    "synth": SYNTH_REPORT,
    "error": ERROR_REPORT,
}
