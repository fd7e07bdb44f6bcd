#pragma once

// Runtime shared by the bounded checker and the concrete executor.

#include <verifide/prover.hpp>

#include <string_view>
#include <vector>

namespace verifide::detail {

struct RtValue {
    Value::Kind kind = Value::Kind::Int;
    std::int64_t scalar = 0;  // int value, bool as 0/1, or array handle
};

inline RtValue rt_int(std::int64_t v) { return {Value::Kind::Int, v}; }
inline RtValue rt_bool(bool v) { return {Value::Kind::Bool, v ? 1 : 0}; }
inline RtValue rt_array(std::int64_t handle) { return {Value::Kind::Array, handle}; }

using Heap = std::vector<std::vector<std::int64_t>>;

class Env {
public:
    void push() { marks_.push_back(vars_.size()); }
    void pop() {
        vars_.resize(marks_.back());
        marks_.pop_back();
    }
    std::size_t depth() const { return marks_.size(); }

    void declare(std::string_view name, RtValue value) { vars_.push_back({name, value}); }
    const RtValue* find(std::string_view name) const {
        for (auto it = vars_.rbegin(); it != vars_.rend(); ++it) {
            if (it->first == name) return &it->second;
        }
        return nullptr;
    }
    RtValue* find(std::string_view name) {
        for (auto it = vars_.rbegin(); it != vars_.rend(); ++it) {
            if (it->first == name) return &it->second;
        }
        return nullptr;
    }
    const std::vector<std::pair<std::string_view, RtValue>>& vars() const { return vars_; }

private:
    std::vector<std::pair<std::string_view, RtValue>> vars_;
    std::vector<std::size_t> marks_;
};

/// Thrown for runtime faults.
struct Fault {
    Span span;
    std::string message;
    std::vector<Span> related;
    bool budget = false;
};

struct StepCounter {
    std::int64_t steps = 0;
    std::int64_t limit = 10000;

    void tick(const Span& at, std::int64_t n = 1) {
        steps += n;
        if (steps > limit) throw Fault{at, "step budget exceeded", {}, true};
    }
};

Value materialize(const RtValue& v, const Heap& heap);
RtValue install(const Value& v, Heap& heap);

/// Function-level strongly connected components, keyed by function name.
std::map<std::string, int> function_sccs(const Program& program);
/// Method-level strongly connected components over method calls.
std::map<std::string, int> method_sccs(const Program& program);

/// Lexicographic well-founded decrease; ints must stay non-negative in the
/// caller's tuple at the first differing position.
bool decreases_strictly(const std::vector<RtValue>& now, const std::vector<RtValue>& before);

class Evaluator {
public:
    Evaluator(const Program& program, StepCounter& counter, const std::map<std::string, int>& fn_sccs)
        : program_(program), counter_(counter), fn_sccs_(fn_sccs) {}

    RtValue eval(const Expr& e, Env& env, const Heap& heap, const Heap* old_heap);
    bool eval_bool(const Expr& e, Env& env, const Heap& heap, const Heap* old_heap) {
        return eval(e, env, heap, old_heap).scalar != 0;
    }
    std::vector<RtValue> eval_list(const std::vector<ExprPtr>& list, Env& env, const Heap& heap, const Heap* old_heap);

    /// Evaluates a function's decreases tuple (explicit or default) on its parameters.
    std::vector<RtValue> function_measure(const FunctionDecl& fn, Env& env, const Heap& heap);

    /// Sets the function whose body is being evaluated at the outermost level.
    void enter_function(const FunctionDecl* fn, Env* env) { frames_.push_back({fn, env}); }
    void leave_function() { frames_.pop_back(); }

private:
    RtValue call_function(const Expr& call, Env& env, const Heap& heap, const Heap* old_heap);
    RtValue binary(const Expr& e, Env& env, const Heap& heap, const Heap* old_heap);

    struct Frame {
        const FunctionDecl* fn;
        Env* env;
    };

    const Program& program_;
    StepCounter& counter_;
    const std::map<std::string, int>& fn_sccs_;
    std::vector<Frame> frames_;
};

}  // namespace verifide::detail
