#include <verifide/lang.hpp>

#include <algorithm>
#include <map>
#include <sstream>

namespace verifide {

namespace {

struct Symbol {
    RefKind kind = RefKind::Local;
    Type type = Type::Unknown;
};

std::string kind_label(RefKind kind) {
    switch (kind) {
        case RefKind::Parameter: return "(parameter)";
        case RefKind::ReturnParameter: return "(return parameter)";
        case RefKind::Local: return "(local variable)";
        case RefKind::Bound: return "(bound variable)";
        default: return "";
    }
}

std::string params_text(const std::vector<Param>& params) {
    std::string out = "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ", ";
        out += params[i].name + ": " + to_string(params[i].type);
    }
    return out + ")";
}

std::string signature(const FunctionDecl& fn) {
    return "function " + fn.name + params_text(fn.params) + ": " + to_string(fn.result);
}

std::string signature(const MethodDecl& m) {
    std::string out = "method " + m.name + params_text(m.params);
    if (!m.returns.empty()) out += " returns " + params_text(m.returns);
    return out;
}

std::string decreases_text(const std::vector<ExprPtr>& explicit_clause, const std::vector<Param>& params) {
    if (!explicit_clause.empty()) {
        std::string out = "decreases: ";
        for (std::size_t i = 0; i < explicit_clause.size(); ++i) {
            if (i) out += ", ";
            out += pretty_print(*explicit_clause[i]);
        }
        return out;
    }
    std::vector<std::string> names = default_decreases(params);
    std::string out = "decreases (default): ";
    if (names.empty()) return out + "(none)";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    return out;
}

bool is_self_call(const Stmt& s, const std::string& self) {
    if (!s.is_method_call && s.kind != StmtKind::Call) return false;
    return s.expr && s.expr->kind == ExprKind::Call && s.expr->name == self;
}

// Records, for every self-call statement, whether it sits in tail position.
void classify_self_calls(const std::vector<Stmt>& block, bool tail, const std::string& self,
                         std::map<const Stmt*, bool>& out) {
    for (std::size_t i = 0; i < block.size(); ++i) {
        const Stmt& s = block[i];
        const bool followed_by_return = i + 1 < block.size() && block[i + 1].kind == StmtKind::Return;
        const bool stmt_tail = followed_by_return || (tail && i + 1 == block.size());
        if (is_self_call(s, self)) out[&s] = stmt_tail;
        if (s.kind == StmtKind::If) {
            classify_self_calls(s.body, stmt_tail, self, out);
            classify_self_calls(s.else_body, stmt_tail, self, out);
        } else if (s.kind == StmtKind::While) {
            classify_self_calls(s.body, false, self, out);
        }
    }
}

class Resolver {
public:
    explicit Resolver(Program& program) : program_(program) {}

    void run() {
        check_duplicate_declarations();
        for (const Entity& e : program_.entities) program_.call_graph[e.id];
        for (FunctionDecl& fn : program_.functions) resolve_function(fn);
        for (MethodDecl& m : program_.methods) resolve_method(m);
        std::stable_sort(program_.hover.begin(), program_.hover.end(),
                         [](const HoverInfo& a, const HoverInfo& b) { return a.span < b.span; });
    }

private:
    // ---- diagnostics / hover ----

    void error(DiagnosticCode code, const Span& span, std::string message) {
        program_.diagnostics.push_back({span, Severity::Error, code, std::move(message)});
    }

    void hover(const Span& span, std::string text, std::string variable = {}) {
        program_.hover.push_back({span, std::move(text), std::move(variable)});
    }

    void hover_variable(const Span& span, const std::string& name, const Symbol& sym) {
        hover(span, kind_label(sym.kind) + " " + name + ": " + to_string(sym.type), name);
    }

    void add_edge(const EntityId& from, const EntityId& to) {
        if (!program_.find_entity(from) || !program_.find_entity(to)) return;
        program_.call_graph[from].insert(to);
    }

    void check_duplicate_declarations() {
        std::map<std::string, int> seen;
        for (const DeclRef& ref : program_.order) {
            const bool is_fn = ref.kind == DeclKind::Function;
            const std::string& name = is_fn ? program_.functions[ref.index].name : program_.methods[ref.index].name;
            const Span& span = is_fn ? program_.functions[ref.index].name_span : program_.methods[ref.index].name_span;
            if (seen[name]++ > 0) error(DiagnosticCode::NameError, span, "duplicate declaration of '" + name + "'");
        }
    }

    // ---- scopes ----

    const Symbol* lookup(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto found = it->find(name);
            if (found != it->end()) return &found->second;
        }
        return nullptr;
    }

    void declare(const std::string& name, const Span& span, Symbol sym) {
        if (lookup(name)) {
            error(DiagnosticCode::NameError, span, "duplicate variable name '" + name + "'");
        }
        scopes_.back()[name] = sym;
        hover_variable(span, name, sym);
    }

    void push_scope() { scopes_.emplace_back(); }
    void pop_scope() { scopes_.pop_back(); }

    // ---- context ----

    struct Context {
        EntityId entity;          // edges originate here
        bool allow_old = false;
        bool in_old = false;
        std::string self;         // enclosing declaration name
        bool self_is_function = false;
    };

    // ---- expressions ----

    Type expect_type(Expr& e, Type want, Context& ctx, const char* what) {
        Type got = check(e, ctx);
        if (got != Type::Unknown && got != want) {
            error(DiagnosticCode::TypeError, e.span,
                  std::string(what) + " must have type " + to_string(want) + ", found " + to_string(got));
        }
        return want;
    }

    Type check(Expr& e, Context& ctx) {
        e.type = infer(e, ctx);
        return e.type;
    }

    Type infer(Expr& e, Context& ctx) {
        switch (e.kind) {
            case ExprKind::IntLit: return Type::Int;
            case ExprKind::BoolLit: return Type::Bool;
            case ExprKind::Name: {
                const Symbol* sym = lookup(e.name);
                if (!sym) {
                    error(DiagnosticCode::NameError, e.span, "unresolved identifier '" + e.name + "'");
                    return Type::Unknown;
                }
                e.ref = sym->kind;
                hover_variable(e.name_span, e.name, *sym);
                return sym->type;
            }
            case ExprKind::Unary:
                if (e.unary_op == UnaryOp::Neg) return expect_type(*e.operands[0], Type::Int, ctx, "operand of '-'");
                return expect_type(*e.operands[0], Type::Bool, ctx, "operand of '!'");
            case ExprKind::Binary: return infer_binary(e, ctx);
            case ExprKind::Index:
                expect_type(*e.operands[0], Type::IntArray, ctx, "indexed expression");
                expect_type(*e.operands[1], Type::Int, ctx, "array index");
                return Type::Int;
            case ExprKind::Length:
                expect_type(*e.operands[0], Type::IntArray, ctx, "operand of '.Length'");
                hover(e.name_span, "(array length) Length: int");
                return Type::Int;
            case ExprKind::Call: return infer_call(e, ctx);
            case ExprKind::Old: {
                if (!ctx.allow_old) {
                    error(DiagnosticCode::TypeError, e.span, "old() is only allowed in ensures clauses");
                }
                const bool was = ctx.in_old;
                ctx.in_old = true;
                Type t = check(*e.operands[0], ctx);
                ctx.in_old = was;
                return t;
            }
            case ExprKind::Forall: {
                expect_type(*e.operands[0], Type::Int, ctx, "forall lower bound");
                expect_type(*e.operands[1], Type::Int, ctx, "forall upper bound");
                push_scope();
                declare(e.name, e.name_span, Symbol{RefKind::Bound, Type::Int});
                expect_type(*e.operands[2], Type::Bool, ctx, "forall body");
                pop_scope();
                return Type::Bool;
            }
            case ExprKind::Ite: {
                expect_type(*e.operands[0], Type::Bool, ctx, "condition");
                Type a = check(*e.operands[1], ctx);
                Type b = check(*e.operands[2], ctx);
                if (a != Type::Unknown && b != Type::Unknown && a != b) {
                    error(DiagnosticCode::TypeError, e.span, "branches of if-then-else have different types");
                }
                return a != Type::Unknown ? a : b;
            }
        }
        return Type::Unknown;
    }

    Type infer_binary(Expr& e, Context& ctx) {
        Expr& lhs = *e.operands[0];
        Expr& rhs = *e.operands[1];
        const std::string op = std::string("operand of '") + to_string(e.binary_op) + "'";
        switch (e.binary_op) {
            case BinaryOp::Add:
            case BinaryOp::Sub:
            case BinaryOp::Mul:
            case BinaryOp::Div:
            case BinaryOp::Mod:
                expect_type(lhs, Type::Int, ctx, op.c_str());
                expect_type(rhs, Type::Int, ctx, op.c_str());
                return Type::Int;
            case BinaryOp::Lt:
            case BinaryOp::Le:
            case BinaryOp::Gt:
            case BinaryOp::Ge:
                expect_type(lhs, Type::Int, ctx, op.c_str());
                expect_type(rhs, Type::Int, ctx, op.c_str());
                return Type::Bool;
            case BinaryOp::Eq:
            case BinaryOp::Ne: {
                Type a = check(lhs, ctx);
                Type b = check(rhs, ctx);
                if (a == Type::IntArray || b == Type::IntArray) {
                    error(DiagnosticCode::TypeError, e.span, "arrays cannot be compared");
                } else if (a != Type::Unknown && b != Type::Unknown && a != b) {
                    error(DiagnosticCode::TypeError, e.span,
                          std::string("cannot compare ") + to_string(a) + " with " + to_string(b));
                }
                return Type::Bool;
            }
            case BinaryOp::And:
            case BinaryOp::Or:
            case BinaryOp::Implies:
            case BinaryOp::Iff:
                expect_type(lhs, Type::Bool, ctx, op.c_str());
                expect_type(rhs, Type::Bool, ctx, op.c_str());
                return Type::Bool;
        }
        return Type::Unknown;
    }

    void check_args(Expr& call, const std::vector<Param>& params, Context& ctx) {
        if (call.operands.size() != params.size()) {
            error(DiagnosticCode::TypeError, call.span,
                  "'" + call.name + "' expects " + std::to_string(params.size()) + " argument(s), got " +
                      std::to_string(call.operands.size()));
        }
        for (std::size_t i = 0; i < call.operands.size(); ++i) {
            if (i < params.size()) {
                expect_type(*call.operands[i], params[i].type, ctx, "argument");
            } else {
                check(*call.operands[i], ctx);
            }
        }
    }

    Type infer_call(Expr& e, Context& ctx) {
        if (const FunctionDecl* fn = program_.find_function(e.name)) {
            e.ref = RefKind::Function;
            add_edge(ctx.entity, {fn->name, EntityKind::FunctionDef});
            const bool self = ctx.self_is_function && ctx.self == fn->name;
            hover(e.name_span, self ? "recursive call" : signature(*fn));
            check_args(e, fn->params, ctx);
            return fn->result;
        }
        if (program_.find_method(e.name)) {
            error(DiagnosticCode::TypeError, e.span,
                  "method '" + e.name + "' can only be called as a statement");
            for (ExprPtr& arg : e.operands) check(*arg, ctx);
            return Type::Unknown;
        }
        error(DiagnosticCode::NameError, e.name_span, "unresolved function '" + e.name + "'");
        for (ExprPtr& arg : e.operands) check(*arg, ctx);
        return Type::Unknown;
    }

    // ---- declarations ----

    void declare_params(const std::vector<Param>& params, RefKind kind) {
        for (const Param& p : params) declare(p.name, p.span, Symbol{kind, p.type});
    }

    void check_decreases(std::vector<ExprPtr>& clause, Context& ctx) {
        for (ExprPtr& d : clause) {
            Type t = check(*d, ctx);
            if (t == Type::IntArray) error(DiagnosticCode::TypeError, d->span, "decreases expressions must be int or bool");
        }
    }

    void resolve_function(FunctionDecl& fn) {
        Context ctx;
        ctx.entity = {fn.name, EntityKind::FunctionDef};
        ctx.self = fn.name;
        ctx.self_is_function = true;
        hover(fn.name_span, signature(fn) + "\n" + decreases_text(fn.decreases, fn.params));
        if (fn.time_limit_s) hover(fn.time_limit_span, "(attribute) timeLimit");
        push_scope();
        declare_params(fn.params, RefKind::Parameter);
        for (const Param& p : fn.params) {
            if (p.type == Type::IntArray) {
                error(DiagnosticCode::TypeError, p.span, "functions cannot take array parameters");
            }
        }
        for (ExprPtr& r : fn.requires_) expect_type(*r, Type::Bool, ctx, "requires clause");
        check_decreases(fn.decreases, ctx);
        if (fn.result == Type::IntArray) error(DiagnosticCode::TypeError, fn.name_span, "functions cannot return arrays");
        expect_type(*fn.body, fn.result, ctx, "function body");
        pop_scope();
    }

    void resolve_method(MethodDecl& m) {
        const EntityId spec{m.name, EntityKind::MethodSpec};
        const EntityId body{m.name, EntityKind::MethodBody};
        add_edge(body, spec);
        if (m.time_limit_s) hover(m.time_limit_span, "(attribute) timeLimit");

        Context sctx;
        sctx.entity = spec;
        sctx.self = m.name;
        push_scope();
        declare_params(m.params, RefKind::Parameter);
        for (ExprPtr& r : m.requires_) expect_type(*r, Type::Bool, sctx, "requires clause");
        check_decreases(m.decreases, sctx);
        push_scope();
        declare_params(m.returns, RefKind::ReturnParameter);
        for (const Param& r : m.returns) {
            if (r.type == Type::IntArray) {
                error(DiagnosticCode::TypeError, r.span, "array-typed return parameters are not supported");
            }
        }
        sctx.allow_old = true;
        for (ExprPtr& e : m.ensures) expect_type(*e, Type::Bool, sctx, "ensures clause");

        Context bctx;
        bctx.entity = body;
        bctx.self = m.name;
        push_scope();
        resolve_block(m.body, bctx, false);
        pop_scope();
        pop_scope();
        pop_scope();

        std::map<const Stmt*, bool> self_calls;
        classify_self_calls(m.body, true, m.name, self_calls);
        std::string text = signature(m) + "\n" + decreases_text(m.decreases, m.params);
        if (!self_calls.empty()) text += is_tail_recursive(m) ? "\ntail recursive" : "\nnot tail recursive";
        hover(m.name_span, text);
        for (const auto& [stmt, tail] : self_calls) {
            hover(stmt->expr->name_span, tail ? "tail-recursive call" : "recursive call");
        }
    }

    // ---- statements ----

    bool is_method_call_expr(const Expr& e) const {
        return e.kind == ExprKind::Call && !program_.find_function(e.name) && program_.find_method(e.name);
    }

    // Returns the callee's return types, after checking arguments and recording edges.
    std::vector<Type> resolve_method_call(Stmt& s, Context& ctx) {
        Expr& call = *s.expr;
        const MethodDecl* callee = program_.find_method(call.name);
        s.is_method_call = true;
        call.ref = RefKind::Method;
        add_edge(ctx.entity, {callee->name, EntityKind::MethodSpec});
        if (callee->name != ctx.self) hover(call.name_span, signature(*callee));
        check_args(call, callee->params, ctx);
        std::vector<Type> out;
        for (const Param& r : callee->returns) out.push_back(r.type);
        return out;
    }

    void check_assignable(const std::string& name, const Span& span, Type value, Context&) {
        const Symbol* sym = lookup(name);
        if (!sym) {
            error(DiagnosticCode::NameError, span, "unresolved identifier '" + name + "'");
            return;
        }
        hover_variable(span, name, *sym);
        if (sym->kind != RefKind::Local && sym->kind != RefKind::ReturnParameter) {
            error(DiagnosticCode::TypeError, span, "cannot assign to " + kind_label(sym->kind) + " '" + name + "'");
        }
        if (value != Type::Unknown && sym->type != Type::Unknown && value != sym->type) {
            error(DiagnosticCode::TypeError, span,
                  "cannot assign " + std::string(to_string(value)) + " to '" + name + "' of type " + to_string(sym->type));
        }
    }

    void resolve_block(std::vector<Stmt>& block, Context& ctx, bool new_scope) {
        if (new_scope) push_scope();
        for (Stmt& s : block) resolve_stmt(s, ctx);
        if (new_scope) pop_scope();
    }

    void resolve_stmt(Stmt& s, Context& ctx) {
        switch (s.kind) {
            case StmtKind::VarDecl: {
                Type t = Type::Unknown;
                if (is_method_call_expr(*s.expr)) {
                    std::vector<Type> outs = resolve_method_call(s, ctx);
                    if (outs.size() != 1) {
                        error(DiagnosticCode::TypeError, s.span,
                              "'" + s.expr->name + "' returns " + std::to_string(outs.size()) + " value(s), expected 1");
                    } else {
                        t = outs[0];
                    }
                } else {
                    t = check(*s.expr, ctx);
                }
                if (s.declared_type) {
                    if (t != Type::Unknown && t != *s.declared_type) {
                        error(DiagnosticCode::TypeError, s.expr->span,
                              std::string("initializer has type ") + to_string(t) + ", expected " + to_string(*s.declared_type));
                    }
                    t = *s.declared_type;
                }
                declare(s.targets[0], s.target_spans[0], Symbol{RefKind::Local, t});
                break;
            }
            case StmtKind::Assign: {
                if (is_method_call_expr(*s.expr)) {
                    std::vector<Type> outs = resolve_method_call(s, ctx);
                    if (outs.size() != s.targets.size()) {
                        error(DiagnosticCode::TypeError, s.span,
                              "'" + s.expr->name + "' returns " + std::to_string(outs.size()) + " value(s), but " +
                                  std::to_string(s.targets.size()) + " target(s) given");
                    }
                    for (std::size_t i = 0; i < s.targets.size(); ++i) {
                        check_assignable(s.targets[i], s.target_spans[i], i < outs.size() ? outs[i] : Type::Unknown, ctx);
                    }
                } else {
                    Type t = check(*s.expr, ctx);
                    if (s.targets.size() != 1) {
                        error(DiagnosticCode::TypeError, s.span, "multiple assignment requires a method call");
                    }
                    for (std::size_t i = 0; i < s.targets.size(); ++i) {
                        check_assignable(s.targets[i], s.target_spans[i], t, ctx);
                    }
                }
                break;
            }
            case StmtKind::ArrayAssign: {
                const Symbol* sym = lookup(s.targets[0]);
                if (!sym) {
                    error(DiagnosticCode::NameError, s.target_spans[0], "unresolved identifier '" + s.targets[0] + "'");
                } else {
                    hover_variable(s.target_spans[0], s.targets[0], *sym);
                    if (sym->type != Type::IntArray && sym->type != Type::Unknown) {
                        error(DiagnosticCode::TypeError, s.target_spans[0], "'" + s.targets[0] + "' is not an array");
                    }
                }
                expect_type(*s.index, Type::Int, ctx, "array index");
                expect_type(*s.expr, Type::Int, ctx, "array element");
                break;
            }
            case StmtKind::Call: {
                Expr& call = *s.expr;
                if (program_.find_function(call.name)) {
                    error(DiagnosticCode::TypeError, s.span, "a function call cannot be used as a statement");
                    check(call, ctx);
                } else if (!program_.find_method(call.name)) {
                    error(DiagnosticCode::NameError, call.name_span, "unresolved method '" + call.name + "'");
                    for (ExprPtr& arg : call.operands) check(*arg, ctx);
                } else {
                    std::vector<Type> outs = resolve_method_call(s, ctx);
                    if (!outs.empty()) {
                        error(DiagnosticCode::TypeError, s.span,
                              "'" + call.name + "' returns values; assign them to variables");
                    }
                }
                break;
            }
            case StmtKind::If:
                expect_type(*s.expr, Type::Bool, ctx, "if condition");
                resolve_block(s.body, ctx, true);
                resolve_block(s.else_body, ctx, true);
                break;
            case StmtKind::While:
                expect_type(*s.expr, Type::Bool, ctx, "loop condition");
                for (ExprPtr& inv : s.invariants) expect_type(*inv, Type::Bool, ctx, "loop invariant");
                check_decreases(s.decreases, ctx);
                resolve_block(s.body, ctx, true);
                break;
            case StmtKind::Assert:
                expect_type(*s.expr, Type::Bool, ctx, "assertion");
                break;
            case StmtKind::Assume:
                expect_type(*s.expr, Type::Bool, ctx, "assumption");
                break;
            case StmtKind::Return:
                break;
        }
    }

    Program& program_;
    std::vector<std::map<std::string, Symbol>> scopes_;
};

}  // namespace

std::vector<std::string> default_decreases(const std::vector<Param>& params) {
    std::vector<std::string> names;
    for (const Param& p : params) {
        if (p.type == Type::Int) names.push_back(p.name);
    }
    return names;
}

bool is_tail_recursive(const MethodDecl& method) {
    std::map<const Stmt*, bool> self_calls;
    classify_self_calls(method.body, true, method.name, self_calls);
    if (self_calls.empty()) return false;
    return std::all_of(self_calls.begin(), self_calls.end(), [](const auto& kv) { return kv.second; });
}

void resolve(Program& program) { Resolver(program).run(); }

std::optional<HoverInfo> hover_info(const Program& program, int line, int col) {
    const HoverInfo* best = nullptr;
    for (const HoverInfo& h : program.hover) {
        if (!h.span.contains(line, col)) continue;
        if (!best || best->span.contains(h.span)) best = &h;
    }
    if (!best) return std::nullopt;
    return *best;
}

}  // namespace verifide
