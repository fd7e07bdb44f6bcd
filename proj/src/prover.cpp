#include <verifide/prover.hpp>

#include "interp.hpp"

#include <verifide/lang.hpp>

#include <chrono>
#include <set>
#include <sstream>

namespace verifide {

using namespace detail;

// ---- values and names ----

Value Value::of_int(std::int64_t v) {
    Value out;
    out.kind = Kind::Int;
    out.integer = v;
    return out;
}

Value Value::of_bool(bool v) {
    Value out;
    out.kind = Kind::Bool;
    out.boolean = v;
    return out;
}

Value Value::of_array(std::vector<std::int64_t> elements) {
    Value out;
    out.kind = Kind::Array;
    out.elements = std::move(elements);
    return out;
}

std::string Value::render() const {
    switch (kind) {
        case Kind::Int: return std::to_string(integer);
        case Kind::Bool: return boolean ? "true" : "false";
        case Kind::Array: {
            std::string out = "[";
            for (std::size_t i = 0; i < elements.size(); ++i) {
                if (i) out += ", ";
                out += std::to_string(elements[i]);
            }
            return out + "]";
        }
    }
    return {};
}

const Value* TraceState::find(std::string_view name) const {
    for (const Binding& b : bindings) {
        if (b.name == name) return &b.value;
    }
    return nullptr;
}

const char* to_string(Obligation obligation) {
    switch (obligation) {
        case Obligation::FunctionWF: return "FunctionWF";
        case Obligation::MethodSpecWF: return "MethodSpecWF";
        case Obligation::MethodBody: return "MethodBody";
    }
    return "FunctionWF";
}

Obligation obligation_for(EntityKind kind) {
    switch (kind) {
        case EntityKind::FunctionDef: return Obligation::FunctionWF;
        case EntityKind::MethodSpec: return Obligation::MethodSpecWF;
        case EntityKind::MethodBody: return Obligation::MethodBody;
    }
    return Obligation::FunctionWF;
}

std::string to_string(const UnitId& id) { return std::string(to_string(id.obligation)) + "(" + id.entity.name + ")"; }

const char* to_string(Verdict::Kind kind) {
    switch (kind) {
        case Verdict::Kind::Verified: return "verified";
        case Verdict::Kind::Failed: return "failed";
        case Verdict::Kind::Timeout: return "timeout";
    }
    return "verified";
}

std::vector<VerificationUnit> extract_units(const std::shared_ptr<const Program>& program) {
    std::vector<VerificationUnit> units;
    for (std::size_t i = 0; i < program->entities.size(); ++i) {
        const Entity& e = program->entities[i];
        units.push_back({{e.id, obligation_for(e.id.kind)}, program, i});
    }
    return units;
}

int effective_timeout_ms(const VerificationUnit& unit, int default_ms) {
    const Entity& e = unit.entity();
    const std::optional<int>& limit = e.decl.kind == DeclKind::Function
                                          ? unit.program->functions[e.decl.index].time_limit_s
                                          : unit.program->methods[e.decl.index].time_limit_s;
    return limit ? *limit * 1000 : default_ms;
}

// ---- enumeration ----

namespace {

std::vector<Value> scalar_domain(Type type, const Bounds& bounds) {
    std::vector<Value> out;
    if (type == Type::Bool) {
        out.push_back(Value::of_bool(false));
        out.push_back(Value::of_bool(true));
    } else {
        for (std::int64_t v = bounds.int_low; v <= bounds.int_high; ++v) out.push_back(Value::of_int(v));
    }
    return out;
}

std::vector<Value> arrays_of_length(std::size_t length, const Bounds& bounds) {
    std::vector<Value> out;
    std::vector<std::int64_t> cur(length, bounds.int_low);
    while (true) {
        out.push_back(Value::of_array(cur));
        std::size_t i = 0;
        while (i < length && cur[i] == bounds.int_high) cur[i++] = bounds.int_low;
        if (i == length) break;
        ++cur[i];
    }
    return out;
}

std::vector<Value> input_domain(Type type, const Bounds& bounds) {
    if (type != Type::IntArray) return scalar_domain(type, bounds);
    std::vector<Value> out;
    for (int len = 0; len <= bounds.max_array_len; ++len) {
        for (Value& v : arrays_of_length(static_cast<std::size_t>(len), bounds)) out.push_back(std::move(v));
    }
    return out;
}

// Odometer over a product of domains.
bool for_each_product(const std::vector<std::vector<Value>>& domains,
                      const std::function<bool(std::span<const Value>)>& visit) {
    for (const auto& d : domains) {
        if (d.empty()) return true;
    }
    std::vector<std::size_t> idx(domains.size(), 0);
    std::vector<Value> cur;
    cur.reserve(domains.size());
    for (const auto& d : domains) cur.push_back(d[0]);
    while (true) {
        if (!visit(cur)) return false;
        std::size_t i = domains.size();
        while (i > 0) {
            --i;
            if (++idx[i] < domains[i].size()) {
                cur[i] = domains[i][idx[i]];
                break;
            }
            idx[i] = 0;
            cur[i] = domains[i][0];
            if (i == 0) return true;
        }
        if (domains.empty()) return true;
    }
}

}  // namespace

void for_each_input(const std::vector<Param>& params, const Bounds& bounds,
                    const std::function<bool(std::span<const Value>)>& visit) {
    std::vector<std::vector<Value>> domains;
    for (const Param& p : params) domains.push_back(input_domain(p.type, bounds));
    for_each_product(domains, visit);
}

bool requires_hold(const Program& program, const MethodDecl& method, std::span<const Value> inputs,
                   const Bounds& bounds) {
    StepCounter counter{0, bounds.max_steps};
    const auto sccs = function_sccs(program);
    Evaluator ev(program, counter, sccs);
    Heap heap;
    Env env;
    env.push();
    for (std::size_t i = 0; i < method.params.size() && i < inputs.size(); ++i) {
        env.declare(method.params[i].name, install(inputs[i], heap));
    }
    try {
        for (const ExprPtr& r : method.requires_) {
            if (!ev.eval_bool(*r, env, heap, nullptr)) return false;
        }
    } catch (const Fault&) {
        return false;
    }
    return true;
}

// ---- the bounded checker ----

namespace {

struct TraceNode {
    Span location;
    std::vector<Binding> bindings;
    std::shared_ptr<const TraceNode> prev;
};

using TracePtr = std::shared_ptr<const TraceNode>;

std::vector<Binding> snapshot(const Env& env, const Heap& heap) {
    std::vector<Binding> out;
    out.reserve(env.vars().size());
    for (const auto& [name, v] : env.vars()) out.push_back({std::string(name), materialize(v, heap)});
    return out;
}

CounterexampleTrace unwind(const TracePtr& last) {
    CounterexampleTrace trace;
    for (const TraceNode* n = last.get(); n; n = n->prev.get()) trace.states.push_back({n->location, n->bindings});
    std::reverse(trace.states.begin(), trace.states.end());
    return trace;
}

// Blue-dot location for a statement: the condition for if/while, otherwise the statement.
Span dot_location(const Stmt& s) {
    if ((s.kind == StmtKind::If || s.kind == StmtKind::While) && s.expr) return s.expr->span;
    return s.span;
}

Span opening_brace(const Span& block) { return Span{block.start_line, block.start_col, block.start_line, block.start_col + 1}; }

RtValue default_value(Type type) { return type == Type::Bool ? rt_bool(false) : rt_int(0); }

struct Frame {
    const std::vector<Stmt>* block = nullptr;
    std::size_t next = 0;
    const Stmt* loop = nullptr;
    std::vector<RtValue> measure;
};

struct Machine {
    Env env;
    Heap heap;
    std::vector<Frame> frames;
    TracePtr trace;
    StepCounter counter;
};

class UnitChecker {
public:
    UnitChecker(const VerificationUnit& unit, const Bounds& bounds, int timeout_ms, std::stop_token stop, int cap)
        : unit_(unit),
          program_(*unit.program),
          entity_(unit.entity()),
          bounds_(bounds),
          stop_(std::move(stop)),
          deadline_(std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms)),
          cap_(cap),
          fn_sccs_(function_sccs(program_)),
          method_sccs_(method_sccs(program_)) {}

    std::optional<Verdict> run() {
        switch (entity_.id.kind) {
            case EntityKind::FunctionDef: check_function(program_.functions[entity_.decl.index]); break;
            case EntityKind::MethodSpec: check_spec(program_.methods[entity_.decl.index]); break;
            case EntityKind::MethodBody: check_body(program_.methods[entity_.decl.index]); break;
        }
        if (status_ == Status::Cancelled) return std::nullopt;
        if (status_ == Status::TimedOut) return Verdict::timeout();
        if (errors_.empty()) return Verdict::verified();
        return Verdict::failed(std::move(errors_));
    }

private:
    enum class Status { Running, TimedOut, Cancelled, CapReached };

    bool running() {
        if (status_ != Status::Running) return false;
        if (stop_.stop_requested()) {
            status_ = Status::Cancelled;
        } else if (std::chrono::steady_clock::now() >= deadline_) {
            status_ = Status::TimedOut;
        }
        return status_ == Status::Running;
    }

    bool running_sampled() { return (++poll_ & 0xFF) != 0 ? status_ == Status::Running : running(); }

    bool within_unit(const Span& span) const { return entity_.span.contains(span); }

    void report(std::string message, const Span& at, std::vector<Span> related, CounterexampleTrace trace) {
        if (status_ != Status::Running) return;
        if (!reported_spans_.insert(at).second) return;
        errors_.push_back({std::move(message), at, std::move(related), std::move(trace)});
        if (static_cast<int>(errors_.size()) >= cap_) status_ = Status::CapReached;
    }

    // Two-state trace for function and specification obligations.
    CounterexampleTrace short_trace(const Span& entry, const std::vector<Binding>& entry_bindings, const Span& at,
                                    const Env& env, const Heap& heap) {
        CounterexampleTrace t;
        t.states.push_back({entry, entry_bindings});
        t.states.push_back({at, snapshot(env, heap)});
        return t;
    }

    void report_fault(const Fault& f, const Span& entry, const std::vector<Binding>& entry_bindings, const Env& env,
                      const Heap& heap) {
        if (!within_unit(f.span)) return;
        report(f.message, f.span, f.related, short_trace(entry, entry_bindings, f.span, env, heap));
    }

    // ---- FunctionWF ----

    void check_function(const FunctionDecl& fn) {
        for_each_input(fn.params, bounds_, [&](std::span<const Value> inputs) {
            if (!running()) return false;
            StepCounter counter{0, bounds_.max_steps};
            Evaluator ev(program_, counter, fn_sccs_);
            Heap heap;
            Env env;
            env.push();
            for (std::size_t i = 0; i < fn.params.size(); ++i) env.declare(fn.params[i].name, install(inputs[i], heap));
            const std::vector<Binding> entry = snapshot(env, heap);
            try {
                for (const ExprPtr& r : fn.requires_) {
                    if (!ev.eval_bool(*r, env, heap, nullptr)) return true;
                }
                ev.function_measure(fn, env, heap);
                ev.enter_function(&fn, &env);
                ev.eval(*fn.body, env, heap, nullptr);
            } catch (const Fault& f) {
                report_fault(f, fn.name_span, entry, env, heap);
            }
            return status_ == Status::Running;
        });
    }

    // ---- MethodSpecWF ----

    void check_spec(const MethodDecl& m) {
        for_each_input(m.params, bounds_, [&](std::span<const Value> inputs) {
            if (!running()) return false;
            StepCounter counter{0, bounds_.max_steps};
            Evaluator ev(program_, counter, fn_sccs_);
            Heap heap;
            Env env;
            env.push();
            std::vector<std::size_t> arrays;
            for (std::size_t i = 0; i < m.params.size(); ++i) {
                RtValue v = install(inputs[i], heap);
                if (v.kind == Value::Kind::Array) arrays.push_back(static_cast<std::size_t>(v.scalar));
                env.declare(m.params[i].name, v);
            }
            const std::vector<Binding> entry = snapshot(env, heap);
            try {
                for (const ExprPtr& r : m.requires_) {
                    if (!ev.eval_bool(*r, env, heap, nullptr)) return true;
                }
                ev.eval_list(m.decreases, env, heap, nullptr);
            } catch (const Fault& f) {
                report_fault(f, m.name_span, entry, env, heap);
                return status_ == Status::Running;
            }
            if (m.ensures.empty()) return true;

            // Every return tuple and array post-state in bounds.
            std::vector<std::vector<Value>> domains;
            for (const Param& r : m.returns) domains.push_back(scalar_domain(r.type, bounds_));
            for (std::size_t h : arrays) domains.push_back(arrays_for(heap[h].size()));
            const Heap pre = heap;
            env.push();
            for_each_product(domains, [&](std::span<const Value> post) {
                if (!running_sampled()) return false;
                env.pop();
                env.push();
                std::size_t k = 0;
                for (const Param& r : m.returns) env.declare(r.name, install(post[k++], heap));
                for (std::size_t h : arrays) heap[h] = post[k++].elements;
                counter.steps = 0;
                try {
                    for (const ExprPtr& e : m.ensures) {
                        if (!ev.eval_bool(*e, env, heap, &pre)) break;
                    }
                } catch (const Fault& f) {
                    report_fault(f, m.name_span, entry, env, heap);
                }
                heap.resize(pre.size());
                return status_ == Status::Running;
            });
            return status_ == Status::Running;
        });
    }

    const std::vector<Value>& arrays_for(std::size_t length) {
        auto it = fixed_arrays_.find(length);
        if (it == fixed_arrays_.end()) it = fixed_arrays_.emplace(length, arrays_of_length(length, bounds_)).first;
        return it->second;
    }

    // ---- MethodBody ----

    void check_body(const MethodDecl& m) {
        method_ = &m;
        for_each_input(m.params, bounds_, [&](std::span<const Value> inputs) {
            if (!running()) return false;
            Machine root;
            root.counter = StepCounter{0, bounds_.max_steps};
            root.env.push();
            for (std::size_t i = 0; i < m.params.size(); ++i) {
                root.env.declare(m.params[i].name, install(inputs[i], root.heap));
            }
            Evaluator ev(program_, root.counter, fn_sccs_);
            try {
                for (const ExprPtr& r : m.requires_) {
                    if (!ev.eval_bool(*r, root.env, root.heap, nullptr)) return true;
                }
                entry_measure_ = method_measure(m, root.env, root.heap, ev);
            } catch (const Fault&) {
                return true;  // ill-formed spec: MethodSpecWF reports it
            }
            for (const Param& r : m.returns) root.env.declare(r.name, default_value(r.type));
            entry_heap_ = root.heap;
            root.counter.steps = 0;
            root.trace = std::make_shared<TraceNode>(
                TraceNode{opening_brace(m.body_span), snapshot(root.env, root.heap), nullptr});
            root.env.push();
            root.frames.push_back({&m.body, 0, nullptr, {}});

            std::vector<Machine> pending;
            pending.push_back(std::move(root));
            while (!pending.empty() && running_sampled()) {
                Machine cur = std::move(pending.back());
                pending.pop_back();
                run_path(cur, pending);
            }
            return running();
        });
    }

    std::vector<RtValue> method_measure(const MethodDecl& m, Env& env, const Heap& heap, Evaluator& ev) {
        if (!m.decreases.empty()) return ev.eval_list(m.decreases, env, heap, nullptr);
        std::vector<RtValue> out;
        for (const std::string& name : default_decreases(m.params)) out.push_back(*env.find(name));
        return out;
    }

    void record(Machine& mc, const Span& at) {
        mc.trace = std::make_shared<TraceNode>(TraceNode{at, snapshot(mc.env, mc.heap), mc.trace});
    }

    void fail_path(Machine& mc, std::string message, const Span& at, std::vector<Span> related, bool add_state) {
        if (add_state) record(mc, at);
        report(std::move(message), at, std::move(related), unwind(mc.trace));
    }

    void push_frame(Machine& mc, const std::vector<Stmt>& block, const Stmt* loop, std::vector<RtValue> measure) {
        mc.env.push();
        mc.frames.push_back({&block, 0, loop, std::move(measure)});
    }

    void run_path(Machine& mc, std::vector<Machine>& pending) {
        Evaluator ev(program_, mc.counter, fn_sccs_);
        try {
            while (running_sampled()) {
                if (mc.frames.empty()) {
                    exit_check(mc, method_->close_span, true, ev);
                    return;
                }
                Frame& f = mc.frames.back();
                if (f.next >= f.block->size()) {
                    const Stmt* loop = f.loop;
                    std::vector<RtValue> measure = std::move(f.measure);
                    mc.frames.pop_back();
                    mc.env.pop();
                    if (loop && !loop_back(mc, *loop, measure, ev)) return;
                    continue;
                }
                const Stmt& s = (*f.block)[f.next++];
                mc.counter.tick(s.span);
                if (s.is_method_call || s.kind == StmtKind::Call) {
                    call(mc, s, pending, ev);
                    return;
                }
                if (!step(mc, s, ev)) return;
            }
        } catch (const Fault& f) {
            if (f.budget && !within_unit(f.span)) return;
            if (!within_unit(f.span)) return;
            fail_path(mc, f.message, f.span, f.related, true);
        }
    }

    // Executes one non-call statement. Returns false when the path ends.
    bool step(Machine& mc, const Stmt& s, Evaluator& ev) {
        switch (s.kind) {
            case StmtKind::VarDecl:
                mc.env.declare(s.targets[0], ev.eval(*s.expr, mc.env, mc.heap, nullptr));
                record(mc, s.span);
                return true;
            case StmtKind::Assign:
                *mc.env.find(s.targets[0]) = ev.eval(*s.expr, mc.env, mc.heap, nullptr);
                record(mc, s.span);
                return true;
            case StmtKind::ArrayAssign: {
                const RtValue arr = *mc.env.find(s.targets[0]);
                const std::int64_t idx = ev.eval(*s.index, mc.env, mc.heap, nullptr).scalar;
                const std::int64_t val = ev.eval(*s.expr, mc.env, mc.heap, nullptr).scalar;
                auto& elems = mc.heap[static_cast<std::size_t>(arr.scalar)];
                if (idx < 0 || idx >= static_cast<std::int64_t>(elems.size())) {
                    throw Fault{s.index->span, "index out of range", {}, false};
                }
                elems[static_cast<std::size_t>(idx)] = val;
                record(mc, s.span);
                return true;
            }
            case StmtKind::If: {
                const bool cond = ev.eval_bool(*s.expr, mc.env, mc.heap, nullptr);
                record(mc, dot_location(s));
                if (cond) {
                    push_frame(mc, s.body, nullptr, {});
                } else if (s.has_else) {
                    push_frame(mc, s.else_body, nullptr, {});
                }
                return true;
            }
            case StmtKind::While:
                for (const ExprPtr& inv : s.invariants) {
                    if (!ev.eval_bool(*inv, mc.env, mc.heap, nullptr)) {
                        fail_path(mc, "loop invariant might not hold on entry", inv->span, {}, true);
                        return false;
                    }
                }
                return loop_head(mc, s, ev);
            case StmtKind::Assert: {
                const bool holds = ev.eval_bool(*s.expr, mc.env, mc.heap, nullptr);
                record(mc, s.span);
                if (!holds) {
                    fail_path(mc, "assertion might not hold", s.span, {}, false);
                    return false;
                }
                return true;
            }
            case StmtKind::Assume: {
                if (!ev.eval_bool(*s.expr, mc.env, mc.heap, nullptr)) return false;
                record(mc, s.span);
                return true;
            }
            case StmtKind::Return:
                record(mc, s.span);
                exit_check(mc, s.span, false, ev);
                return false;
            case StmtKind::Call:
                break;
        }
        return true;
    }

    bool loop_head(Machine& mc, const Stmt& loop, Evaluator& ev) {
        const bool cond = ev.eval_bool(*loop.expr, mc.env, mc.heap, nullptr);
        record(mc, dot_location(loop));
        if (cond) push_frame(mc, loop.body, &loop, ev.eval_list(loop.decreases, mc.env, mc.heap, nullptr));
        return true;
    }

    bool loop_back(Machine& mc, const Stmt& loop, const std::vector<RtValue>& before, Evaluator& ev) {
        mc.counter.tick(loop.span);
        for (const ExprPtr& inv : loop.invariants) {
            if (!ev.eval_bool(*inv, mc.env, mc.heap, nullptr)) {
                fail_path(mc, "loop invariant might not be maintained by the loop", inv->span, {}, true);
                return false;
            }
        }
        if (!loop.decreases.empty()) {
            const std::vector<RtValue> now = ev.eval_list(loop.decreases, mc.env, mc.heap, nullptr);
            if (!decreases_strictly(now, before)) {
                fail_path(mc, "decreases expression might not decrease", loop.decreases.front()->span, {}, true);
                return false;
            }
        }
        return loop_head(mc, loop, ev);
    }

    void exit_check(Machine& mc, const Span& exit, bool add_state, Evaluator& ev) {
        for (const ExprPtr& e : method_->ensures) {
            bool holds = true;
            try {
                holds = ev.eval_bool(*e, mc.env, mc.heap, &entry_heap_);
            } catch (const Fault&) {
                return;  // ill-formed postcondition: MethodSpecWF reports it
            }
            if (!holds) {
                fail_path(mc, "ensures clause might not hold", exit, {e->span}, add_state);
                return;
            }
        }
    }

    // A method call: check the callee's precondition and termination, then
    // continue along every callee post-state allowed by its postcondition.
    void call(Machine& mc, const Stmt& s, std::vector<Machine>& pending, Evaluator& ev) {
        const Expr& call = *s.expr;
        const MethodDecl& callee = *program_.find_method(call.name);
        const std::vector<RtValue> args = ev.eval_list(call.operands, mc.env, mc.heap, nullptr);

        Env cenv;
        cenv.push();
        for (std::size_t i = 0; i < callee.params.size(); ++i) cenv.declare(callee.params[i].name, args[i]);
        try {
            for (const ExprPtr& r : callee.requires_) {
                if (!ev.eval_bool(*r, cenv, mc.heap, nullptr)) {
                    fail_path(mc, "call precondition might not hold", s.span, {r->span}, true);
                    return;
                }
            }
        } catch (const Fault&) {
            return;  // callee's own MethodSpecWF
        }

        if (same_method_scc(callee.name, method_->name)) {
            std::vector<RtValue> now;
            try {
                now = method_measure(callee, cenv, mc.heap, ev);
            } catch (const Fault&) {
                return;
            }
            if (!decreases_strictly(now, entry_measure_)) {
                std::vector<Span> related;
                for (const ExprPtr& d : method_->decreases) related.push_back(d->span);
                fail_path(mc, "decreases expression might not decrease", s.span, related, true);
                return;
            }
        }

        // Candidate post-states: every return tuple and every content of each
        // distinct array argument.
        std::vector<std::size_t> arrays;
        for (const RtValue& a : args) {
            if (a.kind != Value::Kind::Array) continue;
            const auto h = static_cast<std::size_t>(a.scalar);
            if (std::find(arrays.begin(), arrays.end(), h) == arrays.end()) arrays.push_back(h);
        }
        std::vector<std::vector<Value>> domains;
        for (const Param& r : callee.returns) domains.push_back(scalar_domain(r.type, bounds_));
        for (std::size_t h : arrays) domains.push_back(arrays_for(mc.heap[h].size()));

        std::vector<std::vector<Value>> accepted;
        Heap post = mc.heap;
        cenv.push();
        StepCounter probe{0, bounds_.max_steps};
        Evaluator cev(program_, probe, fn_sccs_);
        for_each_product(domains, [&](std::span<const Value> candidate) {
            if (!running_sampled()) return false;
            cenv.pop();
            cenv.push();
            std::size_t k = 0;
            for (const Param& r : callee.returns) cenv.declare(r.name, install(candidate[k++], post));
            for (std::size_t h : arrays) post[h] = candidate[k++].elements;
            probe.steps = 0;
            bool ok = true;
            try {
                for (const ExprPtr& e : callee.ensures) {
                    if (!cev.eval_bool(*e, cenv, post, &mc.heap)) {
                        ok = false;
                        break;
                    }
                }
            } catch (const Fault&) {
                ok = false;
            }
            if (ok) accepted.emplace_back(candidate.begin(), candidate.end());
            post.resize(mc.heap.size());
            return true;
        });
        if (status_ != Status::Running) return;

        for (auto it = accepted.rbegin(); it != accepted.rend(); ++it) {
            Machine child = mc;
            std::size_t k = 0;
            std::vector<RtValue> results;
            for (const Param& r : callee.returns) {
                (void)r;
                results.push_back(install((*it)[k++], child.heap));
            }
            for (std::size_t h : arrays) child.heap[h] = (*it)[k++].elements;
            if (s.kind == StmtKind::VarDecl) {
                child.env.declare(s.targets[0], results.at(0));
            } else if (s.kind == StmtKind::Assign) {
                for (std::size_t i = 0; i < s.targets.size(); ++i) *child.env.find(s.targets[i]) = results.at(i);
            }
            record(child, s.span);
            pending.push_back(std::move(child));
        }
    }

    bool same_method_scc(const std::string& a, const std::string& b) const {
        if (a == b) return true;
        auto x = method_sccs_.find(a);
        auto y = method_sccs_.find(b);
        return x != method_sccs_.end() && y != method_sccs_.end() && x->second == y->second;
    }

    const VerificationUnit& unit_;
    const Program& program_;
    const Entity& entity_;
    Bounds bounds_;
    std::stop_token stop_;
    std::chrono::steady_clock::time_point deadline_;
    int cap_;
    std::map<std::string, int> fn_sccs_;
    std::map<std::string, int> method_sccs_;
    std::map<std::size_t, std::vector<Value>> fixed_arrays_;

    Status status_ = Status::Running;
    std::uint64_t poll_ = 0;
    std::vector<VerificationError> errors_;
    std::set<Span> reported_spans_;

    const MethodDecl* method_ = nullptr;
    Heap entry_heap_;
    std::vector<RtValue> entry_measure_;
};

}  // namespace

std::optional<Verdict> verify_unit(const VerificationUnit& unit, const Bounds& bounds, int timeout_ms,
                                   std::stop_token stop, int error_cap) {
    return UnitChecker(unit, bounds, timeout_ms, std::move(stop), error_cap).run();
}

}  // namespace verifide
