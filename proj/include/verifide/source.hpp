#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace verifide {

/// A source region. Lines and columns are 0-based, columns count UTF-8
/// bytes, and the end position is exclusive.
struct Span {
    int start_line = 0;
    int start_col = 0;
    int end_line = 0;
    int end_col = 0;

    bool contains(int line, int col) const;
    bool contains(const Span& inner) const;
    bool empty() const { return start_line == end_line && start_col == end_col; }

    auto operator<=>(const Span&) const = default;
};

Span merge(const Span& first, const Span& last);
std::string to_string(const Span& span);

enum class Severity : std::uint8_t { Error, Warning, Info };

enum class DiagnosticCode : std::uint8_t { SyntaxError, NameError, TypeError };

struct Diagnostic {
    Span span;
    Severity severity = Severity::Error;
    DiagnosticCode code = DiagnosticCode::SyntaxError;
    std::string message;
};

const char* to_string(Severity severity);
const char* to_string(DiagnosticCode code);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

}  // namespace verifide
