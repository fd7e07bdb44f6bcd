#include <verifide/replay.hpp>

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace verifide;
using nlohmann::json;

namespace {

Report replay(const SessionScript& script, bool cache = true, std::optional<std::filesystem::path> cache_file = {}) {
    ReplayOptions options;
    apply_overrides(script.overrides, options.config, options.real_time);
    options.config.cache_enabled = cache;
    options.cache_file = std::move(cache_file);
    return run_session(script, options);
}

SessionScript corpus_session(const std::string& name) {
    return load_session_script(testing_support::corpus_dir() / "sessions" / name);
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = a.size(); i-- > 0;) {
        for (std::size_t j = b.size(); j-- > 0;) {
            t[i][j] = a[i] == b[j] ? t[i + 1][j + 1] + 1 : std::max(t[i + 1][j], t[i][j + 1]);
        }
    }
    return t[0][0];
}

bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& of) {
    std::size_t k = 0;
    for (const std::string& s : of) {
        if (k < sub.size() && sub[k] == s) ++k;
    }
    return k == sub.size();
}

struct SessionRuns {
    SessionScript script;
    Report cached;
    Report uncached;
};

// Corpus sessions are replayed once per test binary.
const std::vector<SessionRuns>& corpus_runs() {
    static const std::vector<SessionRuns> runs = [] {
        std::vector<SessionRuns> out;
        for (const auto& path : testing_support::corpus_files("sessions", ".json")) {
            SessionScript script = load_session_script(path);
            Report cached = replay(script, true);
            Report uncached = replay(script, false);
            out.push_back({std::move(script), std::move(cached), std::move(uncached)});
        }
        return out;
    }();
    return runs;
}

std::map<UnitId, Verdict> final_verdicts(const SnapshotReport& s) {
    std::map<UnitId, Verdict> out;
    for (const UnitReport& u : s.units) {
        if (u.verdict.kind != Verdict::Kind::Timeout) out[{u.entity, u.obligation}] = u.verdict;
    }
    return out;
}

}  // namespace

TEST(DiffLines, Examples) {
    EXPECT_TRUE(diff_lines("a\nb\n", "a\nb\n").empty());
    EXPECT_EQ(diff_lines(testing_support::kThreeSnap0, testing_support::kThreeSnap1), std::set<int>{4});
    EXPECT_EQ(diff_lines("a\nb\nc\n", "x\ny\nz\n"), (std::set<int>{0, 1, 2}));
    EXPECT_EQ(diff_lines("", "a\nb"), (std::set<int>{0, 1}));
    EXPECT_EQ(diff_lines("a\nb", ""), std::set<int>{0});
}

TEST(DiffLines, MinimalAgainstReferenceLcs) {
    std::mt19937 rng(3);
    const std::vector<std::string> alphabet{"a", "b", "c", "d"};
    for (int round = 0; round < 500; ++round) {
        std::vector<std::string> old_lines(rng() % 9);
        std::vector<std::string> new_lines(rng() % 9);
        for (auto& l : old_lines) l = alphabet[rng() % alphabet.size()];
        for (auto& l : new_lines) l = alphabet[rng() % alphabet.size()];
        std::string old_text;
        std::string new_text;
        for (const auto& l : old_lines) old_text += l + "\n";
        for (const auto& l : new_lines) new_text += l + "\n";

        const std::set<int> edited = diff_lines(old_text, new_text);
        ASSERT_EQ(edited.size(), new_lines.size() - lcs_length(old_lines, new_lines)) << old_text << "|" << new_text;
        std::vector<std::string> kept;
        for (int i = 0; i < static_cast<int>(new_lines.size()); ++i) {
            if (!edited.count(i)) kept.push_back(new_lines[static_cast<std::size_t>(i)]);
        }
        ASSERT_TRUE(is_subsequence(kept, old_lines));
        ASSERT_EQ(split(new_text), new_lines);
    }
}

TEST(Replay, ThreeSnapshots) {
    const Report r = replay(corpus_session("three_snapshots.json"));
    ASSERT_EQ(r.snapshots.size(), 3u);
    std::vector<int> invocations;
    std::vector<int> hits;
    for (const SnapshotReport& s : r.snapshots) {
        invocations.push_back(s.prover_invocations);
        hits.push_back(s.cache_hits);
    }
    EXPECT_EQ(invocations, (std::vector<int>{5, 1, 5}));
    EXPECT_EQ(hits, (std::vector<int>{0, 4, 0}));
    for (const UnitReport& u : r.snapshots[1].units) {
        if (u.action == UnitAction::Proved) {
            EXPECT_EQ(u.entity, (EntityId{"Bar", EntityKind::MethodBody}));
            EXPECT_EQ(u.priority, Priority::Medium);
        } else {
            EXPECT_EQ(u.priority, Priority::Highest);
        }
    }
    std::vector<std::string> failed;
    for (const UnitReport& u : r.snapshots[2].units) {
        if (u.verdict.kind == Verdict::Kind::Failed) failed.push_back(to_string(u.entity));
    }
    EXPECT_EQ(failed, std::vector<std::string>{"Foo/MethodBody"});
    EXPECT_EQ(r.prover_invocations, 11);
    EXPECT_EQ(r.cache_hits, 4);
    EXPECT_FALSE(r.has_resolution_errors());
}

TEST(Replay, ReportJsonShape) {
    const json j = replay(corpus_session("three_snapshots.json")).to_json();
    EXPECT_EQ(j["file"], "three_snapshots.msp");
    EXPECT_EQ(j["totals"]["proverInvocations"], 11);
    EXPECT_EQ(j["totals"]["cacheHits"], 4);
    const json& unit = j["snapshots"][1]["units"][0];
    for (const char* key : {"entity", "kind", "obligation", "priority", "action", "verdict", "durationMs",
                            "entityChecksum", "dependencyChecksum"}) {
        EXPECT_TRUE(unit.contains(key)) << key;
    }
    EXPECT_EQ(unit["entityChecksum"].get<std::string>().size(), 16u);
}

TEST(Replay, CommentEditsCostNothing) {
    const Report r = replay(corpus_session("comments.json"));
    ASSERT_GE(r.snapshots.size(), 2u);
    for (std::size_t i = 1; i < r.snapshots.size(); ++i) {
        if (r.snapshots[i].superseded) continue;
        EXPECT_EQ(r.snapshots[i].prover_invocations, 0);
        ASSERT_EQ(r.snapshots[i].units.size(), r.snapshots[0].units.size());
        std::map<EntityId, std::pair<Checksum, Checksum>> first;
        for (const UnitReport& u : r.snapshots[0].units) first[u.entity] = {u.entity_checksum, u.dependency_checksum};
        for (const UnitReport& u : r.snapshots[i].units) {
            EXPECT_EQ(first.at(u.entity), std::make_pair(u.entity_checksum, u.dependency_checksum));
        }
    }
}

TEST(Replay, TotalsAreConsistent) {
    for (const SessionRuns& run : corpus_runs()) {
        const Report& r = run.cached;
        int invocations = 0;
        int hits = 0;
        for (const SnapshotReport& s : r.snapshots) {
            invocations += s.prover_invocations;
            hits += s.cache_hits;
            if (s.superseded || s.has_errors()) {
                EXPECT_TRUE(s.units.empty());
                continue;
            }
            const auto program = analyze(run.script.snapshots[static_cast<std::size_t>(s.snapshot_id)].text);
            EXPECT_EQ(static_cast<std::size_t>(s.prover_invocations + s.cache_hits), program.entities.size()) << r.file;
            for (const UnitReport& u : s.units) EXPECT_GE(u.duration_ms, 0);
        }
        EXPECT_EQ(invocations, r.prover_invocations);
        EXPECT_EQ(hits, r.cache_hits);
    }
}

TEST(Replay, SupersededAndErroneousSnapshots) {
    const Report r = replay(corpus_session("typing_burst.json"));
    EXPECT_TRUE(r.has_resolution_errors());
    bool any_superseded = false;
    for (const SnapshotReport& s : r.snapshots) any_superseded |= s.superseded;
    EXPECT_TRUE(any_superseded);
}

TEST(Replay, PersistentCacheSkipsAllWork) {
    const auto path = std::filesystem::temp_directory_path() / "verifide_replay_cache.mspc";
    std::filesystem::remove(path);
    SessionScript script = corpus_session("three_snapshots.json");
    script.snapshots.resize(1);
    EXPECT_EQ(replay(script, true, path).prover_invocations, 5);
    EXPECT_EQ(replay(script, true, path).prover_invocations, 0);
    std::filesystem::remove(path);
}

TEST(Replay, ScriptedRunsAreBitIdentical) {
    SessionScript script = corpus_session("three_snapshots.json");
    script.overrides.prover = ProverKind::Scripted;
    script.scripted_default = {40, ScriptedProver::Result::Bounded};
    const std::string first = replay(script).to_json().dump();
    for (int i = 0; i < 3; ++i) EXPECT_EQ(replay(script).to_json().dump(), first);
}

TEST(Replay, VirtualWallTimeIsScheduleMakespan) {
    std::string text;
    for (int i = 0; i < 12; ++i) text += "function F" + std::to_string(i) + "(): int { " + std::to_string(i) + " }\n";
    SessionScript script;
    script.file = "independent.msp";
    script.snapshots = {{0, text}};
    script.overrides.prover = ProverKind::Scripted;
    script.scripted_default = {200, ScriptedProver::Result::Verified};
    script.overrides.workers = 1;
    EXPECT_EQ(replay(script).wall_ms, 2400);
    script.overrides.workers = 3;
    EXPECT_EQ(replay(script).wall_ms, 800);
}

TEST(Replay, CacheIsTransparentOnCorpusSessions) {
    for (const SessionRuns& run : corpus_runs()) {
        const Report& cached = run.cached;
        const Report& uncached = run.uncached;
        ASSERT_EQ(cached.snapshots.size(), uncached.snapshots.size());
        for (std::size_t i = 0; i < cached.snapshots.size(); ++i) {
            EXPECT_EQ(final_verdicts(cached.snapshots[i]), final_verdicts(uncached.snapshots[i])) << cached.file << " " << i;
        }
    }
}

TEST(SessionScriptParsing, AcceptsLineArraysAndOverrides) {
    const json j = json::parse(R"js({
        "file": "x.msp",
        "config": {"workers": 2, "debounceMs": 100, "timeoutMs": 50, "realTime": true,
                   "bounds": {"intLow": -1, "intHigh": 1, "maxArrayLen": 2, "maxSteps": 99}},
        "prover": {"kind": "scripted", "default": {"delayMs": 5, "result": "failed"},
                   "entities": {"Foo/MethodBody": {"delayMs": 7, "result": "bounded"}}},
        "snapshots": [{"atMs": 0, "text": ["method Foo()", "{ }"]}, {"atMs": 10, "text": ""}]
    })js");
    const SessionScript s = parse_session_script(j);
    EXPECT_EQ(s.snapshots[0].text, "method Foo()\n{ }\n");
    Config c;
    bool real_time = false;
    apply_overrides(s.overrides, c, real_time);
    EXPECT_EQ(c.max_workers, 2);
    EXPECT_EQ(c.debounce_ms, 100);
    EXPECT_EQ(c.timeout_ms, 50);
    EXPECT_EQ(c.bounds.max_steps, 99);
    EXPECT_EQ(c.prover_kind, ProverKind::Scripted);
    EXPECT_TRUE(real_time);
    EXPECT_EQ(s.scripted_default.result, ScriptedProver::Result::Failed);
    EXPECT_EQ(s.scripted_entities.at({"Foo", EntityKind::MethodBody}).delay_ms, 7);
}

TEST(SessionScriptParsing, RejectsSchemaViolations) {
    for (const char* text : {
             R"([])",
             R"({"file": "x", "snapshots": []})",
             R"({"file": "x"})",
             R"({"file": "x", "snapshots": [{"atMs": 5, "text": ""}, {"atMs": 5, "text": ""}]})",
             R"({"file": "x", "snapshots": [{"atMs": 0, "text": 3}]})",
             R"({"file": "x", "snapshots": [{"text": ""}]})",
             R"({"file": "x", "snapshots": [{"atMs": 0, "text": ""}], "prover": {"kind": "oracle"}})",
             R"({"file": "x", "snapshots": [{"atMs": 0, "text": ""}], "prover": {"kind": "scripted", "entities": {"Foo": {}}}})",
             R"({"file": "x", "snapshots": [{"atMs": 0, "text": ""}], "config": {"workers": "two"}})",
         }) {
        EXPECT_THROW(parse_session_script(json::parse(text)), ScriptError) << text;
    }
    EXPECT_THROW(load_session_script("/nonexistent/script.json"), ScriptError);
}
