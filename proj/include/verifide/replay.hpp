#pragma once

#include <verifide/orchestrator.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace verifide {

/// 0-based line numbers of `new_text` that are not part of a longest
/// common subsequence of lines with `old_text`.
std::set<int> diff_lines(std::string_view old_text, std::string_view new_text);

struct ScriptSnapshot {
    std::int64_t at_ms = 0;
    std::string text;
};

/// Config fields a script may override; unset fields keep their defaults.
struct ConfigOverrides {
    std::optional<int> workers;
    std::optional<int> debounce_ms;
    std::optional<int> timeout_ms;
    std::optional<Bounds> bounds;
    std::optional<ProverKind> prover;
    std::optional<bool> real_time;
};

struct SessionScript {
    std::string file;
    std::vector<ScriptSnapshot> snapshots;
    ConfigOverrides overrides;
    ScriptedProver::Script scripted_default;
    std::map<EntityId, ScriptedProver::Script> scripted_entities;
};

class ScriptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws ScriptError on schema violations.
SessionScript parse_session_script(const nlohmann::json& j);
SessionScript load_session_script(const std::filesystem::path& path);

void apply_overrides(const ConfigOverrides& overrides, Config& config, bool& real_time);

struct ReplayOptions {
    Config config;
    bool real_time = false;
    std::optional<std::filesystem::path> cache_file;
};

enum class UnitAction : std::uint8_t { Proved, CacheHit, Skipped };

const char* to_string(UnitAction action);

struct UnitReport {
    EntityId entity;
    Obligation obligation = Obligation::FunctionWF;
    Priority priority = Priority::High;
    UnitAction action = UnitAction::Proved;
    Verdict verdict;
    std::int64_t duration_ms = 0;
    Checksum entity_checksum;
    Checksum dependency_checksum;
};

struct SnapshotReport {
    int snapshot_id = 0;
    std::int64_t at_ms = 0;
    /// Superseded snapshots were never resolved (a newer edit arrived
    /// within the debounce interval).
    bool superseded = false;
    std::int64_t resolution_ms = 0;
    std::vector<Diagnostic> diagnostics;
    std::vector<UnitReport> units;  // completion order
    int prover_invocations = 0;
    int cache_hits = 0;
    std::int64_t wall_ms = 0;

    bool has_errors() const;
};

struct Report {
    std::string file;
    std::vector<SnapshotReport> snapshots;
    std::int64_t wall_ms = 0;
    int prover_invocations = 0;
    int cache_hits = 0;

    bool has_resolution_errors() const;
    nlohmann::json to_json() const;
};

/// Feeds the script through an orchestrator. Debounce intervals pass
/// instantly on a virtual clock and each resolved snapshot is verified to
/// completion before the next edit. Wall time is real with `real_time`,
/// otherwise the simulated makespan of the prover durations.
Report run_session(const SessionScript& script, const ReplayOptions& options);

}  // namespace verifide
