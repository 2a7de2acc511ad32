"""Published JSON Schemas for the report formats emitted on stdout."""

SCHEMA_VERSION = 1

_FIELD = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["exact_rational", "prime_field", "complex_float"]},
        "prime": {"type": "integer", "exclusiveMinimum": 1},
    },
    "required": ["kind"],
}

DIMENSION_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "DimensionReport",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "arch": {"type": "array", "items": {"type": "integer", "minimum": 1},
                 "minItems": 2},
        "degree": {"type": "integer", "minimum": 0},
        "field": _FIELD,
        "seed": {"type": "integer"},
        "trials": {"type": "integer", "minimum": 1},
        "params": {"type": "integer", "minimum": 0},
        "ambient": {"type": "integer", "minimum": 0},
        "rank_per_trial": {"type": "array", "items": {"type": "integer"}},
        "dim": {"type": "integer", "minimum": 0},
        "edim": {"type": "integer", "minimum": 0},
        "edim_branch": {"enum": ["parameter_count", "ambient_space"]},
        "defect": {"type": "integer", "minimum": 0},
        "fiber_dim": {"type": "integer", "minimum": 0},
        "sz_failure_bound": {"type": ["string", "null"]},
        "elapsed_ms": {"type": "number", "minimum": 0},
    },
    "required": [
        "schema_version", "arch", "degree", "field", "seed", "trials",
        "params", "ambient", "rank_per_trial", "dim", "edim", "edim_branch",
        "defect", "fiber_dim", "sz_failure_bound", "elapsed_ms",
    ],
}

EDIM_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "EdimReport",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "arch": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "degree": {"type": "integer", "minimum": 0},
        "params": {"type": "integer", "minimum": 0},
        "ambient": {"type": "integer", "minimum": 0},
        "edim": {"type": "integer", "minimum": 0},
        "edim_branch": {"enum": ["parameter_count", "ambient_space"]},
    },
    "required": ["schema_version", "arch", "degree", "params", "ambient",
                 "edim", "edim_branch"],
}

THRESHOLD_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ThresholdReport",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "arch": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "probed_range": {"type": "array", "items": {"type": "integer"},
                         "minItems": 2, "maxItems": 2},
        "deficient_degrees": {"type": "array", "items": {"type": "integer"}},
        "estimated_threshold": {"type": "integer", "minimum": 0},
        "theoretical_bound": {"type": "integer", "minimum": 0},
        "verified_up_to": {"type": "integer", "minimum": 1},
        "bound_hypothesis_met": {"type": "boolean"},
        "reports": {"type": "object",
                    "additionalProperties": DIMENSION_REPORT_SCHEMA},
        "errors": {"type": "object", "additionalProperties": {"type": "string"}},
    },
    "required": [
        "schema_version", "arch", "probed_range", "deficient_degrees",
        "estimated_threshold", "theoretical_bound", "verified_up_to",
        "bound_hypothesis_met", "reports", "errors",
    ],
}

TICKET_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "TicketReport",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "m_max": {"type": "integer", "minimum": 1},
        "members": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "certificates": {"type": "object"},
        "certificate_field": _FIELD,
        "pairwise_proportional": {"type": "boolean"},
        "ns_bound": {"type": "integer", "minimum": 0},
        "bound_violations": {"type": "array", "items": {"type": "integer"}},
        "screen_rejections": {"type": "array", "items": {"type": "integer"}},
        "errors": {"type": "object", "additionalProperties": {"type": "string"}},
    },
    "required": [
        "schema_version", "m_max", "members", "certificates",
        "certificate_field", "pairwise_proportional", "ns_bound",
        "bound_violations", "screen_rejections", "errors",
    ],
}

ZERO_WITNESS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ZeroWitnessReport",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "found": {"type": "boolean"},
        "point": {"type": "array",
                  "items": {"type": "array", "items": {"type": "number"},
                            "minItems": 2, "maxItems": 2}},
        "residual": {"type": "number", "minimum": 0},
        "singular_layer_index": {"type": "integer", "minimum": 1},
    },
    "required": ["schema_version", "found"],
}

HOMOGENEITY_CHECK_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "HomogeneityCheckReport",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "arch": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "degree": {"type": "integer", "minimum": 1},
        "trials": {"type": "integer", "minimum": 1},
        "passed": {"type": "boolean"},
        "failed_seed": {"type": ["integer", "null"]},
    },
    "required": ["schema_version", "arch", "degree", "trials", "passed",
                 "failed_seed"],
}

FIBER_CHECK_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "FiberCheckReport",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "arch": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "degree": {"type": "integer", "minimum": 0},
        "fiber_dim": {"type": "integer"},
        "lower_bound": {"type": "integer", "minimum": 0},
        "ok": {"type": "boolean"},
        "report": DIMENSION_REPORT_SCHEMA,
    },
    "required": ["schema_version", "arch", "degree", "fiber_dim",
                 "lower_bound", "ok", "report"],
}
