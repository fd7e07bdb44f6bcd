#include "interp.hpp"

#include <verifide/fingerprint.hpp>
#include <verifide/lang.hpp>

namespace verifide::detail {

namespace {

constexpr std::size_t kMaxCallDepth = 400;

template <typename Op>
std::int64_t checked(Op op, std::int64_t a, std::int64_t b, const Span& at) {
    std::int64_t out = 0;
    if (op(a, b, &out)) throw Fault{at, "integer overflow", {}, false};
    return out;
}

bool add_ovf(std::int64_t a, std::int64_t b, std::int64_t* out) { return __builtin_add_overflow(a, b, out); }
bool sub_ovf(std::int64_t a, std::int64_t b, std::int64_t* out) { return __builtin_sub_overflow(a, b, out); }
bool mul_ovf(std::int64_t a, std::int64_t b, std::int64_t* out) { return __builtin_mul_overflow(a, b, out); }

std::map<std::string, int> sccs_of(const DepEdges& edges) {
    std::map<std::string, int> out;
    const DepGraph graph = condense(edges);
    int id = 0;
    for (const auto& component : graph.sccs) {
        for (const EntityId& e : component) out[e.name] = id;
        ++id;
    }
    return out;
}

}  // namespace

Value materialize(const RtValue& v, const Heap& heap) {
    switch (v.kind) {
        case Value::Kind::Int: return Value::of_int(v.scalar);
        case Value::Kind::Bool: return Value::of_bool(v.scalar != 0);
        case Value::Kind::Array: return Value::of_array(heap[static_cast<std::size_t>(v.scalar)]);
    }
    return {};
}

RtValue install(const Value& v, Heap& heap) {
    switch (v.kind) {
        case Value::Kind::Int: return rt_int(v.integer);
        case Value::Kind::Bool: return rt_bool(v.boolean);
        case Value::Kind::Array:
            heap.push_back(v.elements);
            return rt_array(static_cast<std::int64_t>(heap.size() - 1));
    }
    return {};
}

std::map<std::string, int> function_sccs(const Program& program) {
    DepEdges edges;
    for (const auto& [from, tos] : program.call_graph) {
        if (from.kind != EntityKind::FunctionDef) continue;
        auto& out = edges[from];
        for (const EntityId& to : tos) {
            if (to.kind == EntityKind::FunctionDef) out.insert(to);
        }
    }
    return sccs_of(edges);
}

std::map<std::string, int> method_sccs(const Program& program) {
    DepEdges edges;
    for (const auto& [from, tos] : program.call_graph) {
        if (from.kind != EntityKind::MethodBody) continue;
        auto& out = edges[EntityId{from.name, EntityKind::MethodBody}];
        for (const EntityId& to : tos) {
            if (to.kind == EntityKind::MethodSpec && to.name != from.name) {
                out.insert(EntityId{to.name, EntityKind::MethodBody});
            }
        }
    }
    return sccs_of(edges);
}

bool decreases_strictly(const std::vector<RtValue>& now, const std::vector<RtValue>& before) {
    const std::size_t n = std::min(now.size(), before.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (now[i].scalar == before[i].scalar) continue;
        if (now[i].kind == Value::Kind::Bool) return now[i].scalar < before[i].scalar;
        return now[i].scalar < before[i].scalar && before[i].scalar >= 0;
    }
    return false;
}

std::vector<RtValue> Evaluator::eval_list(const std::vector<ExprPtr>& list, Env& env, const Heap& heap,
                                          const Heap* old_heap) {
    std::vector<RtValue> out;
    out.reserve(list.size());
    for (const ExprPtr& e : list) out.push_back(eval(*e, env, heap, old_heap));
    return out;
}

std::vector<RtValue> Evaluator::function_measure(const FunctionDecl& fn, Env& env, const Heap& heap) {
    if (!fn.decreases.empty()) return eval_list(fn.decreases, env, heap, nullptr);
    std::vector<RtValue> out;
    for (const std::string& name : default_decreases(fn.params)) out.push_back(*env.find(name));
    return out;
}

RtValue Evaluator::eval(const Expr& e, Env& env, const Heap& heap, const Heap* old_heap) {
    switch (e.kind) {
        case ExprKind::IntLit: return rt_int(e.int_value);
        case ExprKind::BoolLit: return rt_bool(e.bool_value);
        case ExprKind::Name: {
            const RtValue* v = env.find(e.name);
            if (!v) throw Fault{e.span, "variable '" + e.name + "' is not initialized", {}, false};
            return *v;
        }
        case ExprKind::Unary: {
            RtValue v = eval(*e.operands[0], env, heap, old_heap);
            if (e.unary_op == UnaryOp::Not) return rt_bool(v.scalar == 0);
            return rt_int(checked(sub_ovf, 0, v.scalar, e.span));
        }
        case ExprKind::Binary: return binary(e, env, heap, old_heap);
        case ExprKind::Index: {
            RtValue arr = eval(*e.operands[0], env, heap, old_heap);
            RtValue idx = eval(*e.operands[1], env, heap, old_heap);
            const auto& elems = heap[static_cast<std::size_t>(arr.scalar)];
            if (idx.scalar < 0 || idx.scalar >= static_cast<std::int64_t>(elems.size())) {
                throw Fault{e.span, "index out of range", {}, false};
            }
            return rt_int(elems[static_cast<std::size_t>(idx.scalar)]);
        }
        case ExprKind::Length: {
            RtValue arr = eval(*e.operands[0], env, heap, old_heap);
            return rt_int(static_cast<std::int64_t>(heap[static_cast<std::size_t>(arr.scalar)].size()));
        }
        case ExprKind::Call: return call_function(e, env, heap, old_heap);
        case ExprKind::Old: {
            return eval(*e.operands[0], env, old_heap ? *old_heap : heap, nullptr);
        }
        case ExprKind::Forall: {
            const std::int64_t low = eval(*e.operands[0], env, heap, old_heap).scalar;
            const std::int64_t high = eval(*e.operands[1], env, heap, old_heap).scalar;
            for (std::int64_t i = low; i < high; ++i) {
                counter_.tick(e.span);
                env.push();
                env.declare(e.name, rt_int(i));
                bool holds = false;
                try {
                    holds = eval_bool(*e.operands[2], env, heap, old_heap);
                } catch (...) {
                    env.pop();
                    throw;
                }
                env.pop();
                if (!holds) return rt_bool(false);
            }
            return rt_bool(true);
        }
        case ExprKind::Ite:
            if (eval_bool(*e.operands[0], env, heap, old_heap)) return eval(*e.operands[1], env, heap, old_heap);
            return eval(*e.operands[2], env, heap, old_heap);
    }
    return rt_int(0);
}

RtValue Evaluator::binary(const Expr& e, Env& env, const Heap& heap, const Heap* old_heap) {
    const Expr& lhs_e = *e.operands[0];
    const Expr& rhs_e = *e.operands[1];
    switch (e.binary_op) {
        case BinaryOp::And:
            if (!eval_bool(lhs_e, env, heap, old_heap)) return rt_bool(false);
            return rt_bool(eval_bool(rhs_e, env, heap, old_heap));
        case BinaryOp::Or:
            if (eval_bool(lhs_e, env, heap, old_heap)) return rt_bool(true);
            return rt_bool(eval_bool(rhs_e, env, heap, old_heap));
        case BinaryOp::Implies:
            if (!eval_bool(lhs_e, env, heap, old_heap)) return rt_bool(true);
            return rt_bool(eval_bool(rhs_e, env, heap, old_heap));
        default:
            break;
    }
    const RtValue a = eval(lhs_e, env, heap, old_heap);
    const RtValue b = eval(rhs_e, env, heap, old_heap);
    switch (e.binary_op) {
        case BinaryOp::Add: return rt_int(checked(add_ovf, a.scalar, b.scalar, e.span));
        case BinaryOp::Sub: return rt_int(checked(sub_ovf, a.scalar, b.scalar, e.span));
        case BinaryOp::Mul: return rt_int(checked(mul_ovf, a.scalar, b.scalar, e.span));
        case BinaryOp::Div:
        case BinaryOp::Mod: {
            if (b.scalar == 0) throw Fault{e.span, "possible division by zero", {}, false};
            if (b.scalar == -1 && a.scalar == INT64_MIN) throw Fault{e.span, "integer overflow", {}, false};
            // Euclidean: the remainder is never negative.
            std::int64_t r = a.scalar % b.scalar;
            if (r < 0) r += b.scalar < 0 ? -b.scalar : b.scalar;
            if (e.binary_op == BinaryOp::Mod) return rt_int(r);
            return rt_int((a.scalar - r) / b.scalar);
        }
        case BinaryOp::Eq: return rt_bool(a.scalar == b.scalar);
        case BinaryOp::Ne: return rt_bool(a.scalar != b.scalar);
        case BinaryOp::Lt: return rt_bool(a.scalar < b.scalar);
        case BinaryOp::Le: return rt_bool(a.scalar <= b.scalar);
        case BinaryOp::Gt: return rt_bool(a.scalar > b.scalar);
        case BinaryOp::Ge: return rt_bool(a.scalar >= b.scalar);
        case BinaryOp::Iff: return rt_bool((a.scalar != 0) == (b.scalar != 0));
        default: break;
    }
    return rt_int(0);
}

RtValue Evaluator::call_function(const Expr& call, Env& env, const Heap& heap, const Heap* old_heap) {
    const FunctionDecl* fn = program_.find_function(call.name);
    if (!fn) throw Fault{call.span, "unknown function '" + call.name + "'", {}, false};
    counter_.tick(call.span);
    if (frames_.size() >= kMaxCallDepth) throw Fault{call.span, "recursion depth exceeded", {}, true};

    std::vector<RtValue> args = eval_list(call.operands, env, heap, old_heap);
    Env callee;
    callee.push();
    for (std::size_t i = 0; i < fn->params.size() && i < args.size(); ++i) callee.declare(fn->params[i].name, args[i]);

    for (const ExprPtr& r : fn->requires_) {
        if (!eval_bool(*r, callee, heap, nullptr)) {
            throw Fault{call.span, "function precondition might not hold", {r->span}, false};
        }
    }
    if (!frames_.empty()) {
        const Frame& caller = frames_.back();
        auto a = fn_sccs_.find(caller.fn->name);
        auto b = fn_sccs_.find(fn->name);
        if (a != fn_sccs_.end() && b != fn_sccs_.end() && a->second == b->second) {
            std::vector<RtValue> before = function_measure(*caller.fn, *caller.env, heap);
            std::vector<RtValue> now = function_measure(*fn, callee, heap);
            if (!decreases_strictly(now, before)) {
                std::vector<Span> related;
                for (const ExprPtr& d : caller.fn->decreases) related.push_back(d->span);
                throw Fault{call.span, "decreases expression might not decrease", related, false};
            }
        }
    }
    frames_.push_back({fn, &callee});
    RtValue result;
    try {
        result = eval(*fn->body, callee, heap, nullptr);
    } catch (...) {
        frames_.pop_back();
        throw;
    }
    frames_.pop_back();
    return result;
}

}  // namespace verifide::detail
