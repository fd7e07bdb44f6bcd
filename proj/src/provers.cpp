#include <verifide/prover.hpp>

#include <chrono>
#include <condition_variable>
#include <mutex>

namespace verifide {

namespace {

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count();
}

// Sleeps for `ms` unless `stop` is requested first. Returns false on cancellation.
bool interruptible_sleep(std::int64_t ms, const std::stop_token& stop) {
    std::mutex m;
    std::condition_variable_any cv;
    std::unique_lock lock(m);
    cv.wait_for(lock, stop, std::chrono::milliseconds(ms), [] { return false; });
    return !stop.stop_requested();
}

}  // namespace

std::optional<ProofResult> BoundedProver::prove(const VerificationUnit& unit, const Bounds& bounds, int timeout_ms,
                                                std::stop_token stop) const {
    const auto start = std::chrono::steady_clock::now();
    std::optional<Verdict> verdict = verify_unit(unit, bounds, timeout_ms, std::move(stop), error_cap_);
    if (!verdict) return std::nullopt;
    return ProofResult{std::move(*verdict), elapsed_ms(start)};
}

ScriptedProver::ScriptedProver(Script fallback, std::map<EntityId, Script> per_entity, bool real_time)
    : fallback_(fallback), per_entity_(std::move(per_entity)), real_time_(real_time) {}

const ScriptedProver::Script& ScriptedProver::script_for(const EntityId& id) const {
    auto it = per_entity_.find(id);
    return it == per_entity_.end() ? fallback_ : it->second;
}

std::optional<ProofResult> ScriptedProver::prove(const VerificationUnit& unit, const Bounds& bounds, int timeout_ms,
                                                 std::stop_token stop) const {
    const Script& script = script_for(unit.id.entity);
    const bool times_out = script.delay_ms > timeout_ms;
    const std::int64_t wait = times_out ? timeout_ms : script.delay_ms;
    if (stop.stop_requested()) return std::nullopt;
    if (real_time_ && wait > 0 && !interruptible_sleep(wait, stop)) return std::nullopt;
    if (times_out) return ProofResult{Verdict::timeout(), wait};

    switch (script.result) {
        case Result::Verified: return ProofResult{Verdict::verified(), wait};
        case Result::Failed: {
            const Entity& e = unit.entity();
            VerificationError err{"scripted failure", e.span, {}, {}};
            return ProofResult{Verdict::failed({err}), wait};
        }
        case Result::Bounded: {
            std::optional<Verdict> verdict = verify_unit(unit, bounds, timeout_ms, std::move(stop));
            if (!verdict) return std::nullopt;
            return ProofResult{std::move(*verdict), wait};
        }
    }
    return std::nullopt;
}

}  // namespace verifide
