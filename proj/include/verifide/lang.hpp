#pragma once

#include <verifide/ast.hpp>
#include <verifide/lexer.hpp>

#include <memory>
#include <optional>
#include <string_view>

namespace verifide {

/// Parses MiniSpec source. Syntax errors are reported in
/// `Program::diagnostics`; parsing resumes at the next top-level
/// `method` or `function` so the remaining declarations still appear.
Program parse(std::string_view text);

/// Resolves names, checks types, fills the call graph and the hover map.
/// Resolution and type errors are appended to `program.diagnostics`.
void resolve(Program& program);

/// parse + resolve.
Program analyze(std::string_view text);

/// The innermost hover entry whose span contains the position.
std::optional<HoverInfo> hover_info(const Program& program, int line, int col);

/// Default decreases tuple: the int-typed parameters in declaration order.
std::vector<std::string> default_decreases(const std::vector<Param>& params);

/// Whether every self-call of the method is the final statement on its
/// control path. False for methods without self-calls.
bool is_tail_recursive(const MethodDecl& method);

}  // namespace verifide
