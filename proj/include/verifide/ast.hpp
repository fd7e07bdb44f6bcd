#pragma once

#include <verifide/source.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace verifide {

enum class Type : std::uint8_t { Unknown, Int, Bool, IntArray };

const char* to_string(Type type);

enum class ExprKind : std::uint8_t {
    IntLit,
    BoolLit,
    Name,
    Unary,
    Binary,
    Index,   // operands: array, index
    Length,  // operands: array
    Call,    // operands: arguments
    Old,     // operands: inner
    Forall,  // operands: low, high, body; name = bound variable
    Ite,     // operands: condition, then, else
};

enum class UnaryOp : std::uint8_t { Neg, Not };

enum class BinaryOp : std::uint8_t {
    Add, Sub, Mul, Div, Mod,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or, Implies, Iff,
};

const char* to_string(UnaryOp op);
const char* to_string(BinaryOp op);

/// What a Name or Call refers to, filled in by the resolver.
enum class RefKind : std::uint8_t { Unresolved, Parameter, ReturnParameter, Local, Bound, Function, Method };

struct Expr {
    ExprKind kind = ExprKind::IntLit;
    Span span;
    std::int64_t int_value = 0;
    bool bool_value = false;
    std::string name;
    Span name_span;
    UnaryOp unary_op = UnaryOp::Neg;
    BinaryOp binary_op = BinaryOp::Add;
    std::vector<std::unique_ptr<Expr>> operands;

    Type type = Type::Unknown;
    RefKind ref = RefKind::Unresolved;
};

using ExprPtr = std::unique_ptr<Expr>;

enum class StmtKind : std::uint8_t { VarDecl, Assign, ArrayAssign, Call, If, While, Assert, Assume, Return };

struct Stmt {
    StmtKind kind = StmtKind::Return;
    Span span;
    // VarDecl: the declared name. Assign/Call: left-hand sides. ArrayAssign: the array.
    std::vector<std::string> targets;
    std::vector<Span> target_spans;
    std::optional<Type> declared_type;
    // Right-hand side, condition, asserted expression, or the Call expression.
    ExprPtr expr;
    ExprPtr index;  // ArrayAssign only
    std::vector<ExprPtr> invariants;
    std::vector<ExprPtr> decreases;
    std::vector<Stmt> body;       // then-branch or loop body
    std::vector<Stmt> else_body;
    bool has_else = false;
    Span body_span;  // braces of `body`
    Span else_span;

    // Set by the resolver when `expr` is a call to a method.
    bool is_method_call = false;
};

struct Param {
    std::string name;
    Type type = Type::Unknown;
    Span span;
};

struct FunctionDecl {
    std::string name;
    Span name_span;
    Span span;
    std::vector<Param> params;
    Type result = Type::Unknown;
    std::vector<ExprPtr> requires_;
    std::vector<ExprPtr> decreases;
    ExprPtr body;
    std::optional<int> time_limit_s;
    Span time_limit_span;
};

struct MethodDecl {
    std::string name;
    Span name_span;
    Span span;       // whole declaration
    Span spec_span;  // `method` keyword through the last clause
    std::vector<Param> params;
    std::vector<Param> returns;
    std::vector<ExprPtr> requires_;
    std::vector<ExprPtr> ensures;
    std::vector<ExprPtr> decreases;
    std::vector<Stmt> body;
    Span body_span;   // including braces
    Span close_span;  // the closing brace; the fallthrough return location
    std::optional<int> time_limit_s;
    Span time_limit_span;
};

enum class EntityKind : std::uint8_t { FunctionDef, MethodSpec, MethodBody };

const char* to_string(EntityKind kind);
std::optional<EntityKind> entity_kind_from_string(std::string_view text);

struct EntityId {
    std::string name;
    EntityKind kind = EntityKind::FunctionDef;

    auto operator<=>(const EntityId&) const = default;
};

/// "Name/Kind", e.g. "Foo/MethodBody".
std::string to_string(const EntityId& id);
std::optional<EntityId> entity_id_from_string(std::string_view text);

enum class DeclKind : std::uint8_t { Function, Method };

struct DeclRef {
    DeclKind kind = DeclKind::Function;
    std::size_t index = 0;
};

struct Entity {
    EntityId id;
    DeclRef decl;
    Span span;
};

struct HoverInfo {
    Span span;
    std::string text;
    // Non-empty for variable occurrences; used to attach state values.
    std::string variable;
};

struct Program {
    std::vector<FunctionDecl> functions;
    std::vector<MethodDecl> methods;
    std::vector<DeclRef> order;  // declarations in source order
    std::vector<Entity> entities;
    std::map<EntityId, std::set<EntityId>> call_graph;
    std::vector<HoverInfo> hover;
    std::vector<Diagnostic> diagnostics;

    const FunctionDecl* find_function(std::string_view name) const;
    const MethodDecl* find_method(std::string_view name) const;
    const Entity* find_entity(const EntityId& id) const;
    bool ok() const { return !has_errors(diagnostics); }
};

/// Canonical source rendering; parsing the output yields the same entities.
std::string pretty_print(const Program& program);
std::string pretty_print(const Expr& expr);

}  // namespace verifide
