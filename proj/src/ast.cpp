#include <verifide/ast.hpp>

#include <sstream>

namespace verifide {

const char* to_string(Type type) {
    switch (type) {
        case Type::Unknown: return "?";
        case Type::Int: return "int";
        case Type::Bool: return "bool";
        case Type::IntArray: return "array<int>";
    }
    return "?";
}

const char* to_string(UnaryOp op) { return op == UnaryOp::Neg ? "-" : "!"; }

const char* to_string(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Mod: return "%";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::And: return "&&";
        case BinaryOp::Or: return "||";
        case BinaryOp::Implies: return "==>";
        case BinaryOp::Iff: return "<==>";
    }
    return "?";
}

const char* to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::FunctionDef: return "FunctionDef";
        case EntityKind::MethodSpec: return "MethodSpec";
        case EntityKind::MethodBody: return "MethodBody";
    }
    return "FunctionDef";
}

std::optional<EntityKind> entity_kind_from_string(std::string_view text) {
    if (text == "FunctionDef") return EntityKind::FunctionDef;
    if (text == "MethodSpec") return EntityKind::MethodSpec;
    if (text == "MethodBody") return EntityKind::MethodBody;
    return std::nullopt;
}

std::string to_string(const EntityId& id) { return id.name + "/" + to_string(id.kind); }

std::optional<EntityId> entity_id_from_string(std::string_view text) {
    const auto slash = text.rfind('/');
    if (slash == std::string_view::npos || slash == 0) return std::nullopt;
    auto kind = entity_kind_from_string(text.substr(slash + 1));
    if (!kind) return std::nullopt;
    return EntityId{std::string(text.substr(0, slash)), *kind};
}

const FunctionDecl* Program::find_function(std::string_view name) const {
    for (const FunctionDecl& fn : functions) {
        if (fn.name == name) return &fn;
    }
    return nullptr;
}

const MethodDecl* Program::find_method(std::string_view name) const {
    for (const MethodDecl& m : methods) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

const Entity* Program::find_entity(const EntityId& id) const {
    for (const Entity& e : entities) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

// ---- pretty printer ----

namespace {

bool needs_parens_as_operand(const Expr& e) {
    return e.kind == ExprKind::Binary || e.kind == ExprKind::Forall || e.kind == ExprKind::Ite;
}

bool is_atomic(const Expr& e) {
    switch (e.kind) {
        case ExprKind::IntLit:
        case ExprKind::BoolLit:
        case ExprKind::Name:
        case ExprKind::Call:
        case ExprKind::Index:
        case ExprKind::Length:
        case ExprKind::Old:
            return true;
        default:
            return false;
    }
}

void print_expr(std::ostream& out, const Expr& e);

void print_operand(std::ostream& out, const Expr& e) {
    if (needs_parens_as_operand(e)) {
        out << '(';
        print_expr(out, e);
        out << ')';
    } else {
        print_expr(out, e);
    }
}

void print_postfix_base(std::ostream& out, const Expr& e) {
    if (is_atomic(e)) {
        print_expr(out, e);
    } else {
        out << '(';
        print_expr(out, e);
        out << ')';
    }
}

void print_expr(std::ostream& out, const Expr& e) {
    switch (e.kind) {
        case ExprKind::IntLit: out << e.int_value; break;
        case ExprKind::BoolLit: out << (e.bool_value ? "true" : "false"); break;
        case ExprKind::Name: out << e.name; break;
        case ExprKind::Unary:
            out << to_string(e.unary_op);
            print_operand(out, *e.operands[0]);
            break;
        case ExprKind::Binary:
            print_operand(out, *e.operands[0]);
            out << ' ' << to_string(e.binary_op) << ' ';
            print_operand(out, *e.operands[1]);
            break;
        case ExprKind::Index:
            print_postfix_base(out, *e.operands[0]);
            out << '[';
            print_expr(out, *e.operands[1]);
            out << ']';
            break;
        case ExprKind::Length:
            print_postfix_base(out, *e.operands[0]);
            out << ".Length";
            break;
        case ExprKind::Call:
            out << e.name << '(';
            for (std::size_t i = 0; i < e.operands.size(); ++i) {
                if (i) out << ", ";
                print_expr(out, *e.operands[i]);
            }
            out << ')';
            break;
        case ExprKind::Old:
            out << "old(";
            print_expr(out, *e.operands[0]);
            out << ')';
            break;
        case ExprKind::Forall:
            out << "forall " << e.name << " :: ";
            print_operand(out, *e.operands[0]);
            out << " <= " << e.name << " < ";
            print_operand(out, *e.operands[1]);
            out << " ==> ";
            print_expr(out, *e.operands[2]);
            break;
        case ExprKind::Ite:
            out << "if ";
            print_expr(out, *e.operands[0]);
            out << " then ";
            print_expr(out, *e.operands[1]);
            out << " else ";
            print_expr(out, *e.operands[2]);
            break;
    }
}

void print_params(std::ostream& out, const std::vector<Param>& params) {
    out << '(';
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out << ", ";
        out << params[i].name << ": " << to_string(params[i].type);
    }
    out << ')';
}

void print_list(std::ostream& out, const std::vector<ExprPtr>& list) {
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out << ", ";
        print_expr(out, *list[i]);
    }
}

void print_block(std::ostream& out, const std::vector<Stmt>& body, int indent);

void print_stmt(std::ostream& out, const Stmt& s, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    out << pad;
    switch (s.kind) {
        case StmtKind::VarDecl:
            out << "var " << s.targets[0];
            if (s.declared_type) out << ": " << to_string(*s.declared_type);
            out << " := ";
            print_expr(out, *s.expr);
            out << ";\n";
            break;
        case StmtKind::Assign:
            for (std::size_t i = 0; i < s.targets.size(); ++i) {
                if (i) out << ", ";
                out << s.targets[i];
            }
            out << " := ";
            print_expr(out, *s.expr);
            out << ";\n";
            break;
        case StmtKind::ArrayAssign:
            out << s.targets[0] << '[';
            print_expr(out, *s.index);
            out << "] := ";
            print_expr(out, *s.expr);
            out << ";\n";
            break;
        case StmtKind::Call:
            print_expr(out, *s.expr);
            out << ";\n";
            break;
        case StmtKind::If: {
            const Stmt* cur = &s;
            out << "if ";
            while (true) {
                print_expr(out, *cur->expr);
                out << " {\n";
                print_block(out, cur->body, indent + 2);
                out << pad << '}';
                if (!cur->has_else) break;
                if (cur->else_body.size() == 1 && cur->else_body[0].kind == StmtKind::If) {
                    cur = &cur->else_body[0];
                    out << " else if ";
                    continue;
                }
                out << " else {\n";
                print_block(out, cur->else_body, indent + 2);
                out << pad << '}';
                break;
            }
            out << '\n';
            break;
        }
        case StmtKind::While:
            out << "while ";
            print_expr(out, *s.expr);
            out << '\n';
            for (const ExprPtr& inv : s.invariants) {
                out << pad << "  invariant ";
                print_expr(out, *inv);
                out << '\n';
            }
            if (!s.decreases.empty()) {
                out << pad << "  decreases ";
                print_list(out, s.decreases);
                out << '\n';
            }
            out << pad << "{\n";
            print_block(out, s.body, indent + 2);
            out << pad << "}\n";
            break;
        case StmtKind::Assert:
            out << "assert ";
            print_expr(out, *s.expr);
            out << ";\n";
            break;
        case StmtKind::Assume:
            out << "assume ";
            print_expr(out, *s.expr);
            out << ";\n";
            break;
        case StmtKind::Return:
            out << "return;\n";
            break;
    }
}

void print_block(std::ostream& out, const std::vector<Stmt>& body, int indent) {
    for (const Stmt& s : body) print_stmt(out, s, indent);
}

void print_time_limit(std::ostream& out, const std::optional<int>& limit) {
    if (limit) out << "{:timeLimit " << *limit << "} ";
}

}  // namespace

std::string pretty_print(const Expr& expr) {
    std::ostringstream out;
    print_expr(out, expr);
    return out.str();
}

std::string pretty_print(const Program& program) {
    std::ostringstream out;
    bool first = true;
    for (const DeclRef& ref : program.order) {
        if (!first) out << '\n';
        first = false;
        if (ref.kind == DeclKind::Function) {
            const FunctionDecl& fn = program.functions[ref.index];
            out << "function ";
            print_time_limit(out, fn.time_limit_s);
            out << fn.name;
            print_params(out, fn.params);
            out << ": " << to_string(fn.result) << '\n';
            for (const ExprPtr& r : fn.requires_) {
                out << "  requires ";
                print_expr(out, *r);
                out << '\n';
            }
            if (!fn.decreases.empty()) {
                out << "  decreases ";
                print_list(out, fn.decreases);
                out << '\n';
            }
            out << "{\n  ";
            print_expr(out, *fn.body);
            out << "\n}\n";
        } else {
            const MethodDecl& m = program.methods[ref.index];
            out << "method ";
            print_time_limit(out, m.time_limit_s);
            out << m.name;
            print_params(out, m.params);
            if (!m.returns.empty()) {
                out << " returns ";
                print_params(out, m.returns);
            }
            out << '\n';
            for (const ExprPtr& r : m.requires_) {
                out << "  requires ";
                print_expr(out, *r);
                out << '\n';
            }
            for (const ExprPtr& r : m.ensures) {
                out << "  ensures ";
                print_expr(out, *r);
                out << '\n';
            }
            if (!m.decreases.empty()) {
                out << "  decreases ";
                print_list(out, m.decreases);
                out << '\n';
            }
            out << "{\n";
            print_block(out, m.body, 2);
            out << "}\n";
        }
    }
    return out.str();
}

}  // namespace verifide
