#include <verifide/replay.hpp>

#include <verifide/json_io.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

namespace verifide {

using nlohmann::json;

// ---- line diff ----

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (true) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            return lines;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
}

}  // namespace

std::set<int> diff_lines(std::string_view old_text, std::string_view new_text) {
    const auto a = split_lines(old_text);
    const auto b = split_lines(new_text);
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
        ++suffix;
    }
    const std::size_t n = a.size() - prefix - suffix;
    const std::size_t m = b.size() - prefix - suffix;

    // lcs[i][j]: LCS length of a[prefix+i..] and b[prefix+j..] within the middle.
    std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            lcs[i][j] = a[prefix + i] == b[prefix + j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
        }
    }
    std::set<int> edited;
    std::size_t i = 0;
    std::size_t j = 0;
    while (j < m) {
        if (i < n && a[prefix + i] == b[prefix + j]) {
            ++i;
            ++j;
        } else if (i < n && lcs[i + 1][j] >= lcs[i][j + 1]) {
            ++i;
        } else {
            edited.insert(static_cast<int>(prefix + j));
            ++j;
        }
    }
    return edited;
}

// ---- scripts ----

namespace {

template <typename T>
std::optional<T> optional_field(const json& j, const char* key, const char* what) {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ScriptError(std::string("field '") + key + "' must be " + what);
    }
}

ScriptedProver::Script parse_script(const json& j) {
    if (!j.is_object()) throw ScriptError("scripted prover entry must be an object");
    ScriptedProver::Script s;
    s.delay_ms = optional_field<std::int64_t>(j, "delayMs", "an integer").value_or(0);
    if (s.delay_ms < 0) throw ScriptError("delayMs must be non-negative");
    const std::string result = optional_field<std::string>(j, "result", "a string").value_or("verified");
    if (result == "verified") {
        s.result = ScriptedProver::Result::Verified;
    } else if (result == "failed") {
        s.result = ScriptedProver::Result::Failed;
    } else if (result == "bounded") {
        s.result = ScriptedProver::Result::Bounded;
    } else {
        throw ScriptError("unknown scripted result '" + result + "'");
    }
    return s;
}

std::string snapshot_text(const json& snap) {
    auto it = snap.find("text");
    if (it == snap.end()) throw ScriptError("snapshot without text");
    if (it->is_string()) return it->get<std::string>();
    if (it->is_array()) {
        std::string text;
        for (const json& line : *it) {
            if (!line.is_string()) throw ScriptError("snapshot text lines must be strings");
            text += line.get<std::string>();
            text += '\n';
        }
        return text;
    }
    throw ScriptError("snapshot text must be a string or an array of lines");
}

}  // namespace

SessionScript parse_session_script(const json& j) {
    if (!j.is_object()) throw ScriptError("script must be a JSON object");
    SessionScript script;
    script.file = optional_field<std::string>(j, "file", "a string").value_or("buffer.msp");

    auto snaps = j.find("snapshots");
    if (snaps == j.end() || !snaps->is_array() || snaps->empty()) {
        throw ScriptError("script needs a non-empty 'snapshots' array");
    }
    for (const json& s : *snaps) {
        if (!s.is_object()) throw ScriptError("snapshot must be an object");
        ScriptSnapshot snap;
        const auto at = optional_field<std::int64_t>(s, "atMs", "an integer");
        if (!at) throw ScriptError("snapshot needs an integer 'atMs'");
        snap.at_ms = *at;
        snap.text = snapshot_text(s);
        if (!script.snapshots.empty() && snap.at_ms <= script.snapshots.back().at_ms) {
            throw ScriptError("snapshot atMs values must be strictly increasing");
        }
        script.snapshots.push_back(std::move(snap));
    }

    if (auto cfg = j.find("config"); cfg != j.end()) {
        if (!cfg->is_object()) throw ScriptError("'config' must be an object");
        ConfigOverrides& o = script.overrides;
        o.workers = optional_field<int>(*cfg, "workers", "an integer");
        o.debounce_ms = optional_field<int>(*cfg, "debounceMs", "an integer");
        o.timeout_ms = optional_field<int>(*cfg, "timeoutMs", "an integer");
        o.real_time = optional_field<bool>(*cfg, "realTime", "a boolean");
        if (auto b = cfg->find("bounds"); b != cfg->end()) {
            if (!b->is_object()) throw ScriptError("'bounds' must be an object");
            Bounds bounds;
            bounds.int_low = optional_field<std::int64_t>(*b, "intLow", "an integer").value_or(bounds.int_low);
            bounds.int_high = optional_field<std::int64_t>(*b, "intHigh", "an integer").value_or(bounds.int_high);
            bounds.max_array_len = optional_field<int>(*b, "maxArrayLen", "an integer").value_or(bounds.max_array_len);
            bounds.max_steps = optional_field<std::int64_t>(*b, "maxSteps", "an integer").value_or(bounds.max_steps);
            if (!bounds.valid()) throw ScriptError("invalid bounds");
            o.bounds = bounds;
        }
    }

    if (auto p = j.find("prover"); p != j.end()) {
        if (!p->is_object()) throw ScriptError("'prover' must be an object");
        const std::string kind = optional_field<std::string>(*p, "kind", "a string").value_or("bounded");
        if (kind == "bounded") {
            script.overrides.prover = ProverKind::Bounded;
        } else if (kind == "scripted") {
            script.overrides.prover = ProverKind::Scripted;
        } else {
            throw ScriptError("unknown prover kind '" + kind + "'");
        }
        if (auto d = p->find("default"); d != p->end()) script.scripted_default = parse_script(*d);
        if (auto e = p->find("entities"); e != p->end()) {
            if (!e->is_object()) throw ScriptError("'entities' must be an object");
            for (const auto& [key, value] : e->items()) {
                std::optional<EntityId> id = entity_id_from_string(key);
                if (!id) throw ScriptError("bad entity id '" + key + "' (expected Name/Kind)");
                script.scripted_entities[*id] = parse_script(value);
            }
        }
    }
    return script;
}

SessionScript load_session_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScriptError("cannot read " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScriptError(std::string("malformed JSON: ") + e.what());
    }
    return parse_session_script(j);
}

void apply_overrides(const ConfigOverrides& o, Config& config, bool& real_time) {
    if (o.workers) config.max_workers = *o.workers;
    if (o.debounce_ms) config.debounce_ms = *o.debounce_ms;
    if (o.timeout_ms) config.timeout_ms = *o.timeout_ms;
    if (o.bounds) config.bounds = *o.bounds;
    if (o.prover) config.prover_kind = *o.prover;
    if (o.real_time) real_time = *o.real_time;
}

// ---- reports ----

const char* to_string(UnitAction action) {
    switch (action) {
        case UnitAction::Proved: return "Proved";
        case UnitAction::CacheHit: return "CacheHit";
        case UnitAction::Skipped: return "Skipped";
    }
    return "Proved";
}

bool SnapshotReport::has_errors() const { return verifide::has_errors(diagnostics); }

bool Report::has_resolution_errors() const {
    return std::any_of(snapshots.begin(), snapshots.end(), [](const SnapshotReport& s) { return s.has_errors(); });
}

json Report::to_json() const {
    json snaps = json::array();
    for (const SnapshotReport& s : snapshots) {
        json diags = json::array();
        for (const Diagnostic& d : s.diagnostics) diags.push_back(diagnostic_json(d));
        json units = json::array();
        for (const UnitReport& u : s.units) {
            units.push_back({{"entity", u.entity.name},
                             {"kind", to_string(u.entity.kind)},
                             {"obligation", to_string(u.obligation)},
                             {"priority", to_string(u.priority)},
                             {"action", to_string(u.action)},
                             {"verdict", verdict_json(u.verdict)},
                             {"durationMs", u.duration_ms},
                             {"entityChecksum", to_hex(u.entity_checksum)},
                             {"dependencyChecksum", to_hex(u.dependency_checksum)}});
        }
        snaps.push_back({{"snapshotId", s.snapshot_id},
                         {"atMs", s.at_ms},
                         {"superseded", s.superseded},
                         {"resolutionMs", s.resolution_ms},
                         {"diagnostics", diags},
                         {"units", units},
                         {"proverInvocations", s.prover_invocations},
                         {"cacheHits", s.cache_hits},
                         {"wallMs", s.wall_ms}});
    }
    return {{"file", file},
            {"snapshots", snaps},
            {"totals", {{"wallMs", wall_ms}, {"proverInvocations", prover_invocations}, {"cacheHits", cache_hits}}}};
}

namespace {

// Greedy list scheduling of durations, in invocation order, onto `workers`.
std::int64_t makespan(const std::vector<std::int64_t>& durations, int workers) {
    std::priority_queue<std::int64_t, std::vector<std::int64_t>, std::greater<>> free_at;
    for (int i = 0; i < workers; ++i) free_at.push(0);
    std::int64_t end = 0;
    for (std::int64_t d : durations) {
        const std::int64_t start = free_at.top();
        free_at.pop();
        free_at.push(start + d);
        end = std::max(end, start + d);
    }
    return end;
}

}  // namespace

Report run_session(const SessionScript& script, const ReplayOptions& options) {
    const Config& config = options.config;
    std::shared_ptr<const Prover> prover;
    if (config.prover_kind == ProverKind::Scripted) {
        prover = std::make_shared<ScriptedProver>(script.scripted_default, script.scripted_entities, options.real_time);
    }
    auto clock = std::make_shared<VirtualClock>();
    auto cache = std::make_shared<ResultCache>(config.cache_capacity);
    if (options.cache_file && config.cache_enabled && std::filesystem::exists(*options.cache_file)) {
        if (!cache->load(*options.cache_file)) cache->clear();
    }

    Report report;
    report.file = script.file;
    std::map<int, std::int64_t> real_wall;
    const auto session_start = std::chrono::steady_clock::now();
    {
        Orchestrator orch(config, prover, clock, cache);
        std::string previous;
        for (std::size_t i = 0; i < script.snapshots.size(); ++i) {
            const ScriptSnapshot& snap = script.snapshots[i];
            clock->set(snap.at_ms);
            const int id = orch.submit_text(snap.text, diff_lines(previous, snap.text), snap.at_ms);
            previous = snap.text;
            SnapshotReport sr;
            sr.snapshot_id = id;
            sr.at_ms = snap.at_ms;
            const std::int64_t expiry = snap.at_ms + config.debounce_ms;
            if (i + 1 < script.snapshots.size() && script.snapshots[i + 1].at_ms < expiry) {
                sr.superseded = true;
                report.snapshots.push_back(std::move(sr));
                continue;
            }
            const auto started = std::chrono::steady_clock::now();
            clock->set(expiry);
            orch.tick();
            orch.wait_idle();
            real_wall[id] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
            report.snapshots.push_back(std::move(sr));
        }
        orch.wait_idle();

        std::map<int, SnapshotReport*> by_id;
        for (SnapshotReport& s : report.snapshots) by_id[s.snapshot_id] = &s;
        std::map<int, std::map<UnitId, std::int64_t>> durations;
        for (const Event& e : orch.poll_events(0)) {
            auto it = by_id.find(e.snapshot_id);
            if (it == by_id.end()) continue;
            SnapshotReport& s = *it->second;
            switch (e.kind) {
                case EventKind::ResolutionDiagnostics:
                    s.diagnostics = e.diagnostics;
                    s.resolution_ms = options.real_time ? e.duration_ms : 0;
                    break;
                case EventKind::UnitCompleted:
                case EventKind::UnitSkipped: {
                    UnitReport u;
                    u.entity = e.unit.entity;
                    u.obligation = e.unit.obligation;
                    u.priority = e.priority;
                    u.action = e.kind == EventKind::UnitSkipped ? UnitAction::Skipped
                               : e.from_cache                   ? UnitAction::CacheHit
                                                                : UnitAction::Proved;
                    u.verdict = e.verdict;
                    u.duration_ms = e.duration_ms;
                    u.entity_checksum = e.entity_checksum;
                    u.dependency_checksum = e.dependency_checksum;
                    if (u.action == UnitAction::Proved) {
                        ++s.prover_invocations;
                        durations[e.snapshot_id][e.unit] = e.duration_ms;
                    }
                    if (u.action == UnitAction::CacheHit) ++s.cache_hits;
                    s.units.push_back(std::move(u));
                    break;
                }
                default: break;
            }
        }
        // Deterministic unit order: completion order varies with worker count.
        if (config.max_workers > 1) {
            for (SnapshotReport& s : report.snapshots) {
                std::stable_sort(s.units.begin(), s.units.end(), [](const UnitReport& a, const UnitReport& b) {
                    return std::tie(a.entity, a.obligation) < std::tie(b.entity, b.obligation);
                });
            }
        }
        std::map<int, std::vector<std::int64_t>> invocation_durations;
        for (const Invocation& inv : orch.invocations()) {
            invocation_durations[inv.snapshot_id].push_back(durations[inv.snapshot_id][inv.unit]);
        }
        for (SnapshotReport& s : report.snapshots) {
            s.wall_ms = options.real_time ? real_wall[s.snapshot_id]
                                          : makespan(invocation_durations[s.snapshot_id], config.max_workers);
            report.prover_invocations += s.prover_invocations;
            report.cache_hits += s.cache_hits;
            if (!options.real_time) report.wall_ms += s.wall_ms;
        }
    }
    if (options.real_time) {
        report.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                               session_start)
                             .count();
    }
    if (options.cache_file && config.cache_enabled) cache->save(*options.cache_file);
    return report;
}

}  // namespace verifide
