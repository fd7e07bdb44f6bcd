#pragma once

#include <verifide/ast.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

namespace verifide {

/// Input domain for exhaustive checking.
struct Bounds {
    std::int64_t int_low = -3;
    std::int64_t int_high = 3;
    int max_array_len = 3;
    std::int64_t max_steps = 10000;

    bool valid() const { return int_low <= int_high && max_array_len >= 0 && max_steps > 0; }
    bool operator==(const Bounds&) const = default;
};

enum class Obligation : std::uint8_t { FunctionWF, MethodSpecWF, MethodBody };

const char* to_string(Obligation obligation);
Obligation obligation_for(EntityKind kind);

struct UnitId {
    EntityId entity;
    Obligation obligation = Obligation::FunctionWF;

    auto operator<=>(const UnitId&) const = default;
};

std::string to_string(const UnitId& id);

/// A fully concrete runtime value.
struct Value {
    enum class Kind : std::uint8_t { Int, Bool, Array };

    Kind kind = Kind::Int;
    std::int64_t integer = 0;
    bool boolean = false;
    std::vector<std::int64_t> elements;

    static Value of_int(std::int64_t v);
    static Value of_bool(bool v);
    static Value of_array(std::vector<std::int64_t> elements);

    /// Decimal int, true/false, or "[1, 2, 3]".
    std::string render() const;

    bool operator==(const Value&) const = default;
};

struct Binding {
    std::string name;
    Value value;

    bool operator==(const Binding&) const = default;
};

/// One blue dot: a program point and every variable in scope there.
struct TraceState {
    Span location;
    std::vector<Binding> bindings;

    const Value* find(std::string_view name) const;
    bool operator==(const TraceState&) const = default;
};

struct CounterexampleTrace {
    std::vector<TraceState> states;

    bool operator==(const CounterexampleTrace&) const = default;
};

struct VerificationError {
    std::string message;
    Span error_span;
    std::vector<Span> related_spans;
    CounterexampleTrace trace;

    bool operator==(const VerificationError&) const = default;
};

struct Verdict {
    enum class Kind : std::uint8_t { Verified, Failed, Timeout };

    Kind kind = Kind::Verified;
    std::vector<VerificationError> errors;  // non-empty iff Failed

    static Verdict verified() { return {}; }
    static Verdict timeout() { return {Kind::Timeout, {}}; }
    static Verdict failed(std::vector<VerificationError> errors) { return {Kind::Failed, std::move(errors)}; }

    bool operator==(const Verdict&) const = default;
};

const char* to_string(Verdict::Kind kind);

struct VerificationUnit {
    UnitId id;
    std::shared_ptr<const Program> program;
    std::size_t entity_index = 0;

    const Entity& entity() const { return program->entities[entity_index]; }
};

/// One unit per entity, in source order.
std::vector<VerificationUnit> extract_units(const std::shared_ptr<const Program>& program);

/// The unit's own `{:timeLimit n}` (seconds) if present, else `default_ms`.
int effective_timeout_ms(const VerificationUnit& unit, int default_ms);

inline constexpr int kDefaultErrorCap = 8;

/// Checks one unit exhaustively within `bounds`. Returns std::nullopt if
/// cancelled through `stop` (checked at least once per input).
std::optional<Verdict> verify_unit(const VerificationUnit& unit, const Bounds& bounds, int timeout_ms,
                                   std::stop_token stop = {}, int error_cap = kDefaultErrorCap);

struct Outcome {
    enum class Kind : std::uint8_t { Ok, Fault };

    Kind kind = Kind::Ok;
    Span span;
    std::string message;
    bool step_budget_exceeded = false;
    bool precondition_held = true;
};

/// Whole-program execution of `entry` on concrete inputs, running callee
/// bodies rather than their specifications. Reports the first assertion,
/// specification, or runtime fault.
Outcome execute_concrete(const Program& program, std::string_view entry, std::span<const Value> inputs,
                         const Bounds& bounds);

/// Every well-typed argument tuple for `params` within `bounds`, in a fixed
/// order. The callback returns false to stop early.
void for_each_input(const std::vector<Param>& params, const Bounds& bounds,
                    const std::function<bool(std::span<const Value>)>& visit);

/// Evaluates the method's requires clauses on the inputs. Faults count as false.
bool requires_hold(const Program& program, const MethodDecl& method, std::span<const Value> inputs,
                   const Bounds& bounds);

// ---- pluggable provers ----

struct ProofResult {
    Verdict verdict;
    std::int64_t duration_ms = 0;
};

class Prover {
public:
    virtual ~Prover() = default;

    /// std::nullopt means the attempt was cancelled.
    virtual std::optional<ProofResult> prove(const VerificationUnit& unit, const Bounds& bounds, int timeout_ms,
                                             std::stop_token stop) const = 0;
};

class BoundedProver final : public Prover {
public:
    explicit BoundedProver(int error_cap = kDefaultErrorCap) : error_cap_(error_cap) {}

    std::optional<ProofResult> prove(const VerificationUnit& unit, const Bounds& bounds, int timeout_ms,
                                     std::stop_token stop) const override;

private:
    int error_cap_;
};

/// Test prover: waits a scripted delay, then returns a scripted verdict.
/// A delay longer than the timeout yields Timeout after `timeout_ms`.
/// Without `real_time` nothing sleeps and durations are virtual.
class ScriptedProver final : public Prover {
public:
    enum class Result : std::uint8_t { Verified, Failed, Bounded };

    struct Script {
        std::int64_t delay_ms = 0;
        Result result = Result::Verified;
    };

    ScriptedProver(Script fallback, std::map<EntityId, Script> per_entity, bool real_time);

    std::optional<ProofResult> prove(const VerificationUnit& unit, const Bounds& bounds, int timeout_ms,
                                     std::stop_token stop) const override;

    const Script& script_for(const EntityId& id) const;

private:
    Script fallback_;
    std::map<EntityId, Script> per_entity_;
    bool real_time_;
};

}  // namespace verifide
