#include "rca/error.hpp"

namespace rca {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::sandbox_violation: return "sandbox violation";
        case ErrorKind::not_found: return "not found";
        case ErrorKind::missing_parent: return "missing parent directory";
        case ErrorKind::invalid_range: return "invalid range";
        case ErrorKind::span_too_large: return "span too large";
        case ErrorKind::nothing_to_undo: return "nothing to undo";
        case ErrorKind::extraction: return "extraction error";
        case ErrorKind::ambiguity: return "ambiguous match";
        case ErrorKind::unknown_action: return "unknown action";
        case ErrorKind::malformed_input: return "malformed input";
        case ErrorKind::missing_field: return "missing field";
        case ErrorKind::unknown_field: return "unknown field";
        case ErrorKind::type_mismatch: return "type mismatch";
        case ErrorKind::validation: return "validation error";
        case ErrorKind::parse: return "parse error";
        case ErrorKind::config: return "configuration error";
        case ErrorKind::io: return "i/o error";
        case ErrorKind::spawn: return "spawn failure";
        case ErrorKind::provider: return "provider failure";
        case ErrorKind::budget_exhausted: return "budget exhausted";
        case ErrorKind::cassette_exhausted: return "cassette exhausted";
        case ErrorKind::digest_mismatch: return "digest mismatch";
        case ErrorKind::role_mismatch: return "role mismatch";
        case ErrorKind::usage: return "usage error";
    }
    return "error";
}

std::string_view id(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::sandbox_violation: return "sandbox_violation";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::missing_parent: return "missing_parent";
        case ErrorKind::invalid_range: return "invalid_range";
        case ErrorKind::span_too_large: return "span_too_large";
        case ErrorKind::nothing_to_undo: return "nothing_to_undo";
        case ErrorKind::extraction: return "extraction";
        case ErrorKind::ambiguity: return "ambiguity";
        case ErrorKind::unknown_action: return "unknown_action";
        case ErrorKind::malformed_input: return "malformed_input";
        case ErrorKind::missing_field: return "missing_field";
        case ErrorKind::unknown_field: return "unknown_field";
        case ErrorKind::type_mismatch: return "type_mismatch";
        case ErrorKind::validation: return "validation";
        case ErrorKind::parse: return "parse";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
        case ErrorKind::spawn: return "spawn";
        case ErrorKind::provider: return "provider";
        case ErrorKind::budget_exhausted: return "budget_exhausted";
        case ErrorKind::cassette_exhausted: return "cassette_exhausted";
        case ErrorKind::digest_mismatch: return "digest_mismatch";
        case ErrorKind::role_mismatch: return "role_mismatch";
        case ErrorKind::usage: return "usage";
    }
    return "error";
}

}  // namespace rca
