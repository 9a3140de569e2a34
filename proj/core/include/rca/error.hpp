#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rca {

enum class ErrorKind {
    sandbox_violation,
    not_found,
    missing_parent,
    invalid_range,
    span_too_large,
    nothing_to_undo,
    extraction,
    ambiguity,
    unknown_action,
    malformed_input,
    missing_field,
    unknown_field,
    type_mismatch,
    validation,
    parse,
    config,
    io,
    spawn,
    provider,
    budget_exhausted,
    cassette_exhausted,
    digest_mismatch,
    role_mismatch,
    usage,
};

std::string_view to_string(ErrorKind kind);

// The enumerator name, e.g. "unknown_field". Stable across message wording.
std::string_view id(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the planner's
// dispatcher, the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace rca
