#include <verifide/lang.hpp>

#include <charconv>
#include <stdexcept>
#include <utility>

namespace verifide {

namespace {

struct SyntaxError : std::runtime_error {
    SyntaxError(Span at, const std::string& message) : std::runtime_error(message), span(at) {}
    Span span;
};

class Parser {
public:
    explicit Parser(std::string_view text) {
        for (Token& token : lex_scan(text)) {
            if (token.kind == TokenKind::Whitespace || token.kind == TokenKind::Comment) continue;
            if (token.kind == TokenKind::Error) {
                error_tokens_.push_back(token);
                continue;
            }
            tokens_.push_back(std::move(token));
        }
        // End-of-input marker positioned after the last character.
        Token eof;
        eof.kind = TokenKind::Whitespace;
        int line = 0;
        int col = 0;
        for (char c : text) {
            if (c == '\n') {
                ++line;
                col = 0;
            } else {
                ++col;
            }
        }
        eof.span = Span{line, col, line, col};
        tokens_.push_back(eof);
    }

    Program run() {
        Program program;
        for (const Token& bad : error_tokens_) {
            program.diagnostics.push_back(
                {bad.span, Severity::Error, DiagnosticCode::SyntaxError, "unexpected character sequence '" + bad.text + "'"});
        }
        while (!at_end()) {
            const std::size_t start = pos_;
            try {
                if (is_keyword("function")) {
                    program.functions.push_back(parse_function());
                    program.order.push_back({DeclKind::Function, program.functions.size() - 1});
                } else if (is_keyword("method")) {
                    program.methods.push_back(parse_method());
                    program.order.push_back({DeclKind::Method, program.methods.size() - 1});
                } else {
                    throw SyntaxError(peek().span, "expected 'method' or 'function', found '" + peek().text + "'");
                }
            } catch (const SyntaxError& e) {
                program.diagnostics.push_back({e.span, Severity::Error, DiagnosticCode::SyntaxError, e.what()});
                if (pos_ == start) ++pos_;
                recover();
            }
        }
        build_entities(program);
        return program;
    }

private:
    // ---- token helpers ----

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    bool at_end() const { return pos_ + 1 >= tokens_.size(); }
    bool is_op(std::string_view op, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Operator && t.text == op;
    }
    bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Keyword && t.text == kw;
    }
    bool is_ident(std::size_t ahead = 0) const { return peek(ahead).kind == TokenKind::Ident; }

    const Token& advance() {
        const Token& t = tokens_[pos_];
        if (!at_end()) ++pos_;
        last_ = t.span;
        return t;
    }
    bool accept_op(std::string_view op) {
        if (!is_op(op)) return false;
        advance();
        return true;
    }
    bool accept_keyword(std::string_view kw) {
        if (!is_keyword(kw)) return false;
        advance();
        return true;
    }
    const Token& expect_op(std::string_view op) {
        if (!is_op(op)) fail("expected '" + std::string(op) + "'");
        return advance();
    }
    void expect_keyword(std::string_view kw) {
        if (!is_keyword(kw)) fail("expected '" + std::string(kw) + "'");
        advance();
    }
    const Token& expect_ident(std::string_view what) {
        if (!is_ident()) fail("expected " + std::string(what));
        return advance();
    }
    [[noreturn]] void fail(const std::string& message) const {
        const Token& t = peek();
        std::string found = at_end() ? "end of input" : "'" + t.text + "'";
        throw SyntaxError(t.span, message + ", found " + found);
    }

    void recover() {
        while (!at_end() && !is_keyword("method") && !is_keyword("function")) ++pos_;
    }

    Span span_from(const Span& start) const { return merge(start, last_); }

    // ---- declarations ----

    // Only {:timeLimit n} is recognised.
    void parse_attributes(std::optional<int>& time_limit, Span& time_limit_span) {
        while (is_op("{") && is_op(":", 1)) {
            advance();
            advance();
            const Token& name = expect_ident("attribute name");
            if (name.text != "timeLimit") throw SyntaxError(name.span, "unknown attribute '" + name.text + "'");
            time_limit_span = name.span;
            if (peek().kind != TokenKind::Number || peek().text.size() > 6) fail("expected a time limit in seconds");
            time_limit = std::stoi(advance().text);
            expect_op("}");
        }
    }

    Type parse_type() {
        if (accept_keyword("int")) return Type::Int;
        if (accept_keyword("bool")) return Type::Bool;
        if (accept_keyword("array")) {
            expect_op("<");
            expect_keyword("int");
            expect_op(">");
            return Type::IntArray;
        }
        fail("expected a type");
    }

    std::vector<Param> parse_params() {
        std::vector<Param> params;
        expect_op("(");
        if (!is_op(")")) {
            do {
                const Token& name = expect_ident("parameter name");
                Param p;
                p.name = name.text;
                p.span = name.span;
                expect_op(":");
                p.type = parse_type();
                params.push_back(std::move(p));
            } while (accept_op(","));
        }
        expect_op(")");
        return params;
    }

    std::vector<ExprPtr> parse_expr_list() {
        std::vector<ExprPtr> list;
        do {
            list.push_back(parse_expr());
        } while (accept_op(","));
        return list;
    }

    FunctionDecl parse_function() {
        FunctionDecl fn;
        const Span start = peek().span;
        expect_keyword("function");
        parse_attributes(fn.time_limit_s, fn.time_limit_span);
        const Token& name = expect_ident("function name");
        fn.name = name.text;
        fn.name_span = name.span;
        fn.params = parse_params();
        expect_op(":");
        fn.result = parse_type();
        while (true) {
            if (accept_keyword("requires")) {
                fn.requires_.push_back(parse_expr());
            } else if (accept_keyword("decreases")) {
                for (ExprPtr& e : parse_expr_list()) fn.decreases.push_back(std::move(e));
            } else {
                break;
            }
            accept_op(";");
        }
        expect_op("{");
        fn.body = parse_expr();
        expect_op("}");
        fn.span = span_from(start);
        return fn;
    }

    MethodDecl parse_method() {
        MethodDecl m;
        const Span start = peek().span;
        expect_keyword("method");
        parse_attributes(m.time_limit_s, m.time_limit_span);
        const Token& name = expect_ident("method name");
        m.name = name.text;
        m.name_span = name.span;
        m.params = parse_params();
        if (accept_keyword("returns")) m.returns = parse_params();
        while (true) {
            if (accept_keyword("requires")) {
                m.requires_.push_back(parse_expr());
            } else if (accept_keyword("ensures")) {
                m.ensures.push_back(parse_expr());
            } else if (accept_keyword("decreases")) {
                for (ExprPtr& e : parse_expr_list()) m.decreases.push_back(std::move(e));
            } else {
                break;
            }
            accept_op(";");
        }
        m.spec_span = span_from(start);
        const Span body_start = peek().span;
        m.body = parse_block();
        m.close_span = last_;
        m.body_span = span_from(body_start);
        m.span = span_from(start);
        return m;
    }

    // ---- statements ----

    std::vector<Stmt> parse_block() {
        std::vector<Stmt> stmts;
        expect_op("{");
        while (!is_op("}")) {
            if (at_end()) fail("expected '}'");
            stmts.push_back(parse_stmt());
        }
        expect_op("}");
        return stmts;
    }

    Stmt parse_stmt() {
        const Span start = peek().span;
        Stmt s;
        if (accept_keyword("var")) {
            s.kind = StmtKind::VarDecl;
            const Token& name = expect_ident("variable name");
            s.targets.push_back(name.text);
            s.target_spans.push_back(name.span);
            if (accept_op(":")) s.declared_type = parse_type();
            expect_op(":=");
            s.expr = parse_expr();
            expect_op(";");
        } else if (accept_keyword("if")) {
            s.kind = StmtKind::If;
            s.expr = parse_expr();
            const Span body_start = peek().span;
            s.body = parse_block();
            s.body_span = span_from(body_start);
            if (accept_keyword("else")) {
                s.has_else = true;
                const Span else_start = peek().span;
                if (is_keyword("if")) {
                    s.else_body.push_back(parse_stmt());
                } else {
                    s.else_body = parse_block();
                }
                s.else_span = span_from(else_start);
            }
        } else if (accept_keyword("while")) {
            s.kind = StmtKind::While;
            s.expr = parse_expr();
            while (true) {
                if (accept_keyword("invariant")) {
                    s.invariants.push_back(parse_expr());
                } else if (accept_keyword("decreases")) {
                    for (ExprPtr& e : parse_expr_list()) s.decreases.push_back(std::move(e));
                } else {
                    break;
                }
                accept_op(";");
            }
            const Span body_start = peek().span;
            s.body = parse_block();
            s.body_span = span_from(body_start);
        } else if (accept_keyword("assert")) {
            s.kind = StmtKind::Assert;
            s.expr = parse_expr();
            expect_op(";");
        } else if (accept_keyword("assume")) {
            s.kind = StmtKind::Assume;
            s.expr = parse_expr();
            expect_op(";");
        } else if (accept_keyword("return")) {
            s.kind = StmtKind::Return;
            expect_op(";");
        } else if (is_ident() && is_op("(", 1)) {
            s.kind = StmtKind::Call;
            s.expr = parse_postfix();
            if (s.expr->kind != ExprKind::Call) fail("expected a call statement");
            expect_op(";");
        } else if (is_ident() && is_op("[", 1)) {
            s.kind = StmtKind::ArrayAssign;
            const Token& name = advance();
            s.targets.push_back(name.text);
            s.target_spans.push_back(name.span);
            expect_op("[");
            s.index = parse_expr();
            expect_op("]");
            expect_op(":=");
            s.expr = parse_expr();
            expect_op(";");
        } else if (is_ident()) {
            s.kind = StmtKind::Assign;
            do {
                const Token& name = expect_ident("assignment target");
                s.targets.push_back(name.text);
                s.target_spans.push_back(name.span);
            } while (accept_op(","));
            expect_op(":=");
            s.expr = parse_expr();
            expect_op(";");
        } else {
            fail("expected a statement");
        }
        s.span = span_from(start);
        return s;
    }

    // ---- expressions ----

    ExprPtr make(ExprKind kind, const Span& span) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->span = span;
        return e;
    }

    ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
        auto e = make(ExprKind::Binary, merge(lhs->span, rhs->span));
        e->binary_op = op;
        e->operands.push_back(std::move(lhs));
        e->operands.push_back(std::move(rhs));
        return e;
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_implies();
        while (accept_op("<==>")) {
            lhs = binary(BinaryOp::Iff, std::move(lhs), parse_implies());
        }
        return lhs;
    }

    ExprPtr parse_implies() {
        ExprPtr lhs = parse_or();
        if (accept_op("==>")) {
            return binary(BinaryOp::Implies, std::move(lhs), parse_implies());
        }
        return lhs;
    }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (accept_op("||")) lhs = binary(BinaryOp::Or, std::move(lhs), parse_and());
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_relation();
        while (accept_op("&&")) lhs = binary(BinaryOp::And, std::move(lhs), parse_relation());
        return lhs;
    }

    std::optional<BinaryOp> relation_op() const {
        if (peek().kind != TokenKind::Operator) return std::nullopt;
        const std::string& t = peek().text;
        if (t == "==") return BinaryOp::Eq;
        if (t == "!=") return BinaryOp::Ne;
        if (t == "<") return BinaryOp::Lt;
        if (t == "<=") return BinaryOp::Le;
        if (t == ">") return BinaryOp::Gt;
        if (t == ">=") return BinaryOp::Ge;
        return std::nullopt;
    }

    ExprPtr parse_relation() {
        ExprPtr lhs = parse_additive();
        if (auto op = relation_op()) {
            advance();
            lhs = binary(*op, std::move(lhs), parse_additive());
            if (relation_op()) fail("chained comparisons are not supported; use '&&'");
        }
        return lhs;
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        while (true) {
            if (accept_op("+")) {
                lhs = binary(BinaryOp::Add, std::move(lhs), parse_multiplicative());
            } else if (accept_op("-")) {
                lhs = binary(BinaryOp::Sub, std::move(lhs), parse_multiplicative());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_unary();
        while (true) {
            if (accept_op("*")) {
                lhs = binary(BinaryOp::Mul, std::move(lhs), parse_unary());
            } else if (accept_op("/")) {
                lhs = binary(BinaryOp::Div, std::move(lhs), parse_unary());
            } else if (accept_op("%")) {
                lhs = binary(BinaryOp::Mod, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_unary() {
        const Span start = peek().span;
        if (accept_op("!")) {
            ExprPtr inner = parse_unary();
            auto e = make(ExprKind::Unary, merge(start, inner->span));
            e->unary_op = UnaryOp::Not;
            e->operands.push_back(std::move(inner));
            return e;
        }
        if (accept_op("-")) {
            ExprPtr inner = parse_unary();
            auto e = make(ExprKind::Unary, merge(start, inner->span));
            e->unary_op = UnaryOp::Neg;
            e->operands.push_back(std::move(inner));
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        while (true) {
            if (accept_op("[")) {
                ExprPtr index = parse_expr();
                expect_op("]");
                auto ix = make(ExprKind::Index, merge(e->span, last_));
                ix->operands.push_back(std::move(e));
                ix->operands.push_back(std::move(index));
                e = std::move(ix);
            } else if (is_op(".")) {
                advance();
                const Token& field = expect_ident("'Length'");
                if (field.text != "Length") {
                    throw SyntaxError(field.span, "unknown member '" + field.text + "'; only 'Length' is supported");
                }
                auto len = make(ExprKind::Length, merge(e->span, field.span));
                len->name_span = field.span;
                len->operands.push_back(std::move(e));
                e = std::move(len);
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        const Span start = t.span;
        if (t.kind == TokenKind::Number) {
            advance();
            auto e = make(ExprKind::IntLit, start);
            std::int64_t value = 0;
            auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
            if (ec != std::errc{}) throw SyntaxError(start, "integer literal out of range");
            e->int_value = value;
            return e;
        }
        if (is_keyword("true") || is_keyword("false")) {
            advance();
            auto e = make(ExprKind::BoolLit, start);
            e->bool_value = t.text == "true";
            return e;
        }
        if (accept_keyword("old")) {
            expect_op("(");
            ExprPtr inner = parse_expr();
            expect_op(")");
            auto e = make(ExprKind::Old, span_from(start));
            e->operands.push_back(std::move(inner));
            return e;
        }
        if (accept_keyword("forall")) return parse_forall(start);
        if (accept_keyword("if")) {
            auto e = make(ExprKind::Ite, start);
            e->operands.push_back(parse_expr());
            expect_keyword("then");
            e->operands.push_back(parse_expr());
            expect_keyword("else");
            e->operands.push_back(parse_expr());
            e->span = span_from(start);
            return e;
        }
        if (accept_op("(")) {
            ExprPtr inner = parse_expr();
            expect_op(")");
            return inner;
        }
        if (t.kind == TokenKind::Ident) {
            const Token& name = advance();
            if (accept_op("(")) {
                auto call = make(ExprKind::Call, start);
                call->name = name.text;
                call->name_span = name.span;
                if (!is_op(")")) {
                    for (ExprPtr& arg : parse_expr_list()) call->operands.push_back(std::move(arg));
                }
                expect_op(")");
                call->span = span_from(start);
                return call;
            }
            auto e = make(ExprKind::Name, start);
            e->name = name.text;
            e->name_span = name.span;
            return e;
        }
        fail("expected an expression");
    }

    // forall i :: L <= i < H ==> E
    ExprPtr parse_forall(const Span& start) {
        auto e = make(ExprKind::Forall, start);
        const Token& bound = expect_ident("bound variable");
        e->name = bound.text;
        e->name_span = bound.span;
        if (accept_op(":")) {
            if (parse_type() != Type::Int) throw SyntaxError(last_, "bound variables must have type int");
        }
        expect_op("::");
        ExprPtr low = parse_additive();
        expect_op("<=");
        const Token& again = expect_ident("the bound variable");
        if (again.text != e->name) {
            throw SyntaxError(again.span, "forall range must constrain the bound variable '" + e->name + "'");
        }
        expect_op("<");
        ExprPtr high = parse_additive();
        expect_op("==>");
        ExprPtr body = parse_expr();
        e->operands.push_back(std::move(low));
        e->operands.push_back(std::move(high));
        e->operands.push_back(std::move(body));
        e->span = span_from(start);
        return e;
    }

    static void build_entities(Program& program) {
        for (const DeclRef& ref : program.order) {
            if (ref.kind == DeclKind::Function) {
                const FunctionDecl& fn = program.functions[ref.index];
                program.entities.push_back({{fn.name, EntityKind::FunctionDef}, ref, fn.span});
            } else {
                const MethodDecl& m = program.methods[ref.index];
                program.entities.push_back({{m.name, EntityKind::MethodSpec}, ref, m.spec_span});
                program.entities.push_back({{m.name, EntityKind::MethodBody}, ref, m.body_span});
            }
        }
    }

    std::vector<Token> tokens_;
    std::vector<Token> error_tokens_;
    std::size_t pos_ = 0;
    Span last_;
};

}  // namespace

Program parse(std::string_view text) { return Parser(text).run(); }

Program analyze(std::string_view text) {
    Program program = parse(text);
    resolve(program);
    return program;
}

}  // namespace verifide
