#include <verifide/prover.hpp>

#include "interp.hpp"

namespace verifide {

using namespace detail;

namespace {

constexpr std::size_t kMaxMethodDepth = 200;

struct ReturnSignal {};
struct PruneSignal {};

class ConcreteExecutor {
public:
    ConcreteExecutor(const Program& program, const Bounds& bounds)
        : program_(program), counter_{0, bounds.max_steps}, sccs_(function_sccs(program)),
          ev_(program, counter_, sccs_) {}

    Outcome run(const MethodDecl& entry, std::span<const Value> inputs) {
        Outcome out;
        std::vector<RtValue> args;
        for (const Value& v : inputs) args.push_back(install(v, heap_));
        Env env;
        env.push();
        for (std::size_t i = 0; i < entry.params.size() && i < args.size(); ++i) env.declare(entry.params[i].name, args[i]);
        try {
            for (const ExprPtr& r : entry.requires_) {
                if (!ev_.eval_bool(*r, env, heap_, nullptr)) {
                    out.precondition_held = false;
                    return out;
                }
            }
            invoke(entry, args);
        } catch (const Fault& f) {
            out.kind = Outcome::Kind::Fault;
            out.span = f.span;
            out.message = f.message;
            out.step_budget_exceeded = f.budget;
        } catch (const PruneSignal&) {
        }
        return out;
    }

private:
    std::vector<RtValue> invoke(const MethodDecl& m, const std::vector<RtValue>& args) {
        if (depth_ >= kMaxMethodDepth) throw Fault{m.name_span, "recursion depth exceeded", {}, true};
        ++depth_;
        Env env;
        env.push();
        for (std::size_t i = 0; i < m.params.size(); ++i) env.declare(m.params[i].name, args[i]);
        for (const Param& r : m.returns) env.declare(r.name, r.type == Type::Bool ? rt_bool(false) : rt_int(0));
        const Heap entry = heap_;
        try {
            exec_block(m.body, env);
        } catch (const ReturnSignal&) {
        }
        while (env.depth() > 1) env.pop();
        for (const ExprPtr& e : m.ensures) {
            if (!ev_.eval_bool(*e, env, heap_, &entry)) throw Fault{e->span, "postcondition violated", {}, false};
        }
        std::vector<RtValue> results;
        for (const Param& r : m.returns) results.push_back(*env.find(r.name));
        --depth_;
        return results;
    }

    void exec_block(const std::vector<Stmt>& block, Env& env) {
        env.push();
        for (const Stmt& s : block) exec(s, env);
        env.pop();
    }

    std::vector<RtValue> call(const Stmt& s, Env& env) {
        const MethodDecl& callee = *program_.find_method(s.expr->name);
        const std::vector<RtValue> args = ev_.eval_list(s.expr->operands, env, heap_, nullptr);
        Env cenv;
        cenv.push();
        for (std::size_t i = 0; i < callee.params.size(); ++i) cenv.declare(callee.params[i].name, args[i]);
        for (const ExprPtr& r : callee.requires_) {
            if (!ev_.eval_bool(*r, cenv, heap_, nullptr)) throw Fault{s.span, "call precondition violated", {}, false};
        }
        return invoke(callee, args);
    }

    void exec(const Stmt& s, Env& env) {
        counter_.tick(s.span);
        if (s.is_method_call || s.kind == StmtKind::Call) {
            std::vector<RtValue> results = call(s, env);
            if (s.kind == StmtKind::VarDecl) {
                env.declare(s.targets[0], results.at(0));
            } else if (s.kind == StmtKind::Assign) {
                for (std::size_t i = 0; i < s.targets.size(); ++i) *env.find(s.targets[i]) = results.at(i);
            }
            return;
        }
        switch (s.kind) {
            case StmtKind::VarDecl: env.declare(s.targets[0], ev_.eval(*s.expr, env, heap_, nullptr)); break;
            case StmtKind::Assign: *env.find(s.targets[0]) = ev_.eval(*s.expr, env, heap_, nullptr); break;
            case StmtKind::ArrayAssign: {
                const RtValue arr = *env.find(s.targets[0]);
                const std::int64_t idx = ev_.eval(*s.index, env, heap_, nullptr).scalar;
                const std::int64_t val = ev_.eval(*s.expr, env, heap_, nullptr).scalar;
                auto& elems = heap_[static_cast<std::size_t>(arr.scalar)];
                if (idx < 0 || idx >= static_cast<std::int64_t>(elems.size())) {
                    throw Fault{s.index->span, "index out of range", {}, false};
                }
                elems[static_cast<std::size_t>(idx)] = val;
                break;
            }
            case StmtKind::If:
                if (ev_.eval_bool(*s.expr, env, heap_, nullptr)) {
                    exec_block(s.body, env);
                } else if (s.has_else) {
                    exec_block(s.else_body, env);
                }
                break;
            case StmtKind::While:
                check_invariants(s, env);
                while (ev_.eval_bool(*s.expr, env, heap_, nullptr)) {
                    exec_block(s.body, env);
                    counter_.tick(s.span);
                    check_invariants(s, env);
                }
                break;
            case StmtKind::Assert:
                if (!ev_.eval_bool(*s.expr, env, heap_, nullptr)) throw Fault{s.span, "assertion violated", {}, false};
                break;
            case StmtKind::Assume:
                if (!ev_.eval_bool(*s.expr, env, heap_, nullptr)) throw PruneSignal{};
                break;
            case StmtKind::Return: throw ReturnSignal{};
            case StmtKind::Call: break;
        }
    }

    void check_invariants(const Stmt& loop, Env& env) {
        for (const ExprPtr& inv : loop.invariants) {
            if (!ev_.eval_bool(*inv, env, heap_, nullptr)) throw Fault{inv->span, "loop invariant violated", {}, false};
        }
    }

    const Program& program_;
    StepCounter counter_;
    std::map<std::string, int> sccs_;
    Evaluator ev_;
    Heap heap_;
    std::size_t depth_ = 0;
};

}  // namespace

Outcome execute_concrete(const Program& program, std::string_view entry, std::span<const Value> inputs,
                         const Bounds& bounds) {
    const MethodDecl* m = program.find_method(entry);
    if (!m) return {Outcome::Kind::Fault, {}, "unknown method '" + std::string(entry) + "'", false, true};
    return ConcreteExecutor(program, bounds).run(*m, inputs);
}

}  // namespace verifide
