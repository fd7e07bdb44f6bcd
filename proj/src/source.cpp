#include <verifide/source.hpp>

#include <algorithm>
#include <tuple>

namespace verifide {

bool Span::contains(int line, int col) const {
    auto pos = std::tie(line, col);
    return std::tie(start_line, start_col) <= pos && pos < std::tie(end_line, end_col);
}

bool Span::contains(const Span& inner) const {
    return std::tie(start_line, start_col) <= std::tie(inner.start_line, inner.start_col) &&
           std::tie(inner.end_line, inner.end_col) <= std::tie(end_line, end_col);
}

Span merge(const Span& first, const Span& last) {
    return Span{first.start_line, first.start_col, last.end_line, last.end_col};
}

std::string to_string(const Span& span) {
    return std::to_string(span.start_line) + ":" + std::to_string(span.start_col) + "-" +
           std::to_string(span.end_line) + ":" + std::to_string(span.end_col);
}

const char* to_string(Severity severity) {
    switch (severity) {
        case Severity::Error: return "error";
        case Severity::Warning: return "warning";
        case Severity::Info: return "info";
    }
    return "error";
}

const char* to_string(DiagnosticCode code) {
    switch (code) {
        case DiagnosticCode::SyntaxError: return "SyntaxError";
        case DiagnosticCode::NameError: return "NameError";
        case DiagnosticCode::TypeError: return "TypeError";
    }
    return "SyntaxError";
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

}  // namespace verifide
