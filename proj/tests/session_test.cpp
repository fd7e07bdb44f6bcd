#include <verifide/session.hpp>

#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "support.hpp"

using namespace verifide;
using nlohmann::json;

namespace {

struct Client {
    std::shared_ptr<VirtualClock> clock = std::make_shared<VirtualClock>();
    std::vector<json> received;
    std::unique_ptr<Session> session;
    int next_id = 1;

    explicit Client(int workers = 1) {
        Config c;
        c.max_workers = workers;
        session = std::make_unique<Session>(c, [this](const std::string& line) { received.push_back(json::parse(line)); },
                                            nullptr, clock);
    }

    json request(json message) {
        message["id"] = next_id++;
        const std::size_t before = received.size();
        session->handle_line(message.dump());
        EXPECT_EQ(received.size(), before + 1);
        return received.back();
    }

    // Sends the buffer and lets verification finish.
    int update(const std::string& text, std::set<int> edited = {}) {
        const json ack = request({{"type", "update"}, {"text", text}, {"editedLines", edited}, {"atMs", clock->now_ms()}});
        EXPECT_EQ(ack["type"], "ack");
        clock->advance(500);
        session->pump();
        session->orchestrator().wait_idle();
        session->pump();
        return ack["snapshotId"].get<int>();
    }

    std::vector<json> of_type(const std::string& type) const {
        std::vector<json> out;
        for (const json& m : received) {
            if (m["type"] == type) out.push_back(m);
        }
        return out;
    }

    json first_error() const {
        for (const json& m : of_type("unitResult")) {
            if (!m["errors"].empty()) return m["errors"][0];
        }
        return nullptr;
    }
};

}  // namespace

TEST(Session, UpdatePushesDiagnosticsResultsAndVerified) {
    Client c;
    const int id = c.update(testing_support::kThreeSnap0, {0});
    std::vector<std::string> kinds;
    for (const json& m : c.received) {
        if (m["type"] != "margins") kinds.push_back(m["type"]);
    }
    ASSERT_GE(kinds.size(), 3u);
    EXPECT_EQ(kinds[0], "ack");
    EXPECT_EQ(kinds[1], "resolutionDiagnostics");
    EXPECT_EQ(kinds.back(), "verified");
    EXPECT_EQ(c.of_type("unitResult").size(), 5u);
    for (const json& m : c.received) {
        if (m.contains("snapshotId")) EXPECT_EQ(m["snapshotId"], id);
    }
    EXPECT_EQ(c.of_type("unitResult")[0]["entity"], (json{{"name", "Foo"}, {"kind", "MethodSpec"}}));
}

TEST(Session, MarginsReportEveryLine) {
    Client c;
    c.request({{"type", "update"}, {"text", "method M()\n{\n}\n"}, {"editedLines", {1}}, {"atMs", 0}});
    c.session->pump();
    const auto margins = c.of_type("margins");
    ASSERT_FALSE(margins.empty());
    const json& lines = margins.back()["lines"];
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[1], (json{{"line", 1}, {"state", "edited"}}));
    EXPECT_EQ(lines[0]["state"], "idle");
    c.clock->advance(500);
    c.session->pump();
    c.session->orchestrator().wait_idle();
    c.session->pump();
    bool saw_verifying = false;
    for (const json& m : c.of_type("margins")) saw_verifying |= m["lines"][1]["state"] == "verifying";
    EXPECT_TRUE(saw_verifying);
    EXPECT_EQ(c.of_type("margins").back()["lines"][1]["state"], "idle");
}

TEST(Session, ResolutionErrorsArePushed) {
    Client c;
    c.update("method M() { x := 1; }");
    const auto diags = c.of_type("resolutionDiagnostics");
    ASSERT_EQ(diags.size(), 1u);
    ASSERT_FALSE(diags[0]["items"].empty());
    EXPECT_EQ(diags[0]["items"][0]["severity"], "error");
    EXPECT_TRUE(diags[0]["items"][0]["span"].contains("startLine"));
    EXPECT_TRUE(c.of_type("unitResult").empty());
}

TEST(Session, HoverParameter) {
    Client c;
    c.update("method M(x: int)\n{\n  var y := x;\n}\n");
    const json r = c.request({{"type", "hover"}, {"line", 0}, {"col", 9}});
    EXPECT_EQ(r["type"], "hoverResult");
    EXPECT_EQ(r["text"], "(parameter) x: int");
    EXPECT_TRUE(c.request({{"type", "hover"}, {"line", 1}, {"col", 0}})["text"].is_null());
}

TEST(Session, FillTraceSelection) {
    Client c;
    c.update(testing_support::corpus_program("fill_weak.msp"));
    const json error = c.first_error();
    ASSERT_FALSE(error.is_null());
    EXPECT_EQ(error["message"], "ensures clause might not hold");

    const json trace = c.request({{"type", "selectError"}, {"errorId", error["errorId"]}});
    ASSERT_EQ(trace["type"], "trace");
    const json& states = trace["states"];
    ASSERT_EQ(states.size(), error["traceLength"].get<std::size_t>());
    std::set<int> lines;
    for (const json& s : states) lines.insert(s["line"].get<int>());
    EXPECT_TRUE(lines.count(8));
    EXPECT_TRUE(lines.count(9));

    // The prover's own trace is the oracle for every state selection.
    const auto program = testing_support::analyzed(testing_support::corpus_program("fill_weak.msp"));
    VerificationError oracle;
    for (const VerificationUnit& u : extract_units(program)) {
        if (to_string(u.id) == "MethodBody(Fill)") oracle = verify_unit(u, {}, 60000)->errors.at(0);
    }
    ASSERT_EQ(oracle.trace.states.size(), states.size());
    const int n = static_cast<int>(states.size());
    for (int i = 0; i < n; ++i) {
        const int prev = (i + n - 1) % n;
        const json r = c.request({{"type", "selectState"}, {"errorId", error["errorId"]}, {"stateIndex", i}, {"previousIndex", prev}});
        ASSERT_EQ(r["type"], "stateValues");
        const TraceState& cur = oracle.trace.states[static_cast<std::size_t>(i)];
        ASSERT_EQ(r["values"].size(), cur.bindings.size());
        for (std::size_t k = 0; k < cur.bindings.size(); ++k) {
            EXPECT_EQ(r["values"][k]["name"], cur.bindings[k].name);
            EXPECT_EQ(r["values"][k]["value"], cur.bindings[k].value.render());
            const Value* p = oracle.trace.states[static_cast<std::size_t>(prev)].find(cur.bindings[k].name);
            EXPECT_EQ(r["values"][k]["previous"], p ? json(p->render()) : json(nullptr));
        }
    }
}

TEST(Session, DefaultStateIsLastAndPreviousIsNull) {
    Client c;
    c.update("method M(x: int)\n{\n  var a := x;\n  var b := a + 1;\n  assert b == x;\n}\n");
    const json error = c.first_error();
    ASSERT_EQ(error["traceLength"], 4);
    const json last = c.request({{"type", "selectState"}, {"errorId", error["errorId"]}});
    ASSERT_EQ(last["values"].size(), 3u);
    for (const json& v : last["values"]) EXPECT_TRUE(v["previous"].is_null());

    // Walking back one state: Previous holds the error-state values.
    const json earlier = c.request({{"type", "selectState"}, {"errorId", error["errorId"]}, {"stateIndex", 2}, {"previousIndex", 3}});
    ASSERT_EQ(earlier["values"].size(), 3u);
    for (const json& v : earlier["values"]) EXPECT_FALSE(v["previous"].is_null());
    // Before `var b` runs, b is absent.
    const json before_b = c.request({{"type", "selectState"}, {"errorId", error["errorId"]}, {"stateIndex", 1}, {"previousIndex", 2}});
    ASSERT_EQ(before_b["values"].size(), 2u);
    const json entry = c.request({{"type", "selectState"}, {"errorId", error["errorId"]}, {"stateIndex", 0}, {"previousIndex", nullptr}});
    ASSERT_EQ(entry["values"].size(), 1u);
    EXPECT_EQ(entry["values"][0]["name"], "x");
}

TEST(Session, AssertFalseTraceHasTwoStates) {
    Client c;
    c.update("method M()\n{\n  assert false;\n}\n");
    const json error = c.first_error();
    const json trace = c.request({{"type", "selectError"}, {"errorId", error["errorId"]}});
    EXPECT_EQ(trace["states"].size(), 2u);
}

TEST(Session, HoverShowsSelectedStateValue) {
    Client c;
    c.update("method M(x: int)\n{\n  var a := x;\n  var b := a + 1;\n  assert b == x;\n}\n");
    const json error = c.first_error();
    c.request({{"type", "selectError"}, {"errorId", error["errorId"]}});
    const json hover = c.request({{"type", "hover"}, {"line", 3}, {"col", 6}});
    const std::string text = hover["text"];
    EXPECT_NE(text.find("\nvalue in selected state: "), std::string::npos) << text;
}

TEST(Session, ErrorsGoStaleAfterNewerVerification) {
    Client c;
    c.update("method M()\n{\n  assert false;\n}\n");
    const json error = c.first_error();
    c.clock->advance(1000);
    c.update("method M()\n{\n  assert true;\n}\n");
    EXPECT_EQ(c.request({{"type", "selectError"}, {"errorId", error["errorId"]}})["reason"], "stale-error");
    EXPECT_EQ(c.request({{"type", "selectState"}, {"errorId", error["errorId"]}})["reason"], "stale-error");
    EXPECT_EQ(c.request({{"type", "selectError"}, {"errorId", 999}})["reason"], "stale-error");
}

TEST(Session, StateIndexBounds) {
    Client c;
    c.update("method M()\n{\n  assert false;\n}\n");
    const json error = c.first_error();
    for (const json& bad : {json{{"stateIndex", 2}}, json{{"stateIndex", -1}}, json{{"stateIndex", 0}, {"previousIndex", 5}}}) {
        json m{{"type", "selectState"}, {"errorId", error["errorId"]}};
        m.update(bad);
        EXPECT_EQ(c.request(m)["reason"], "index-out-of-range") << bad;
    }
}

TEST(Session, TokensReflectLatestText) {
    Client c;
    c.request({{"type", "update"}, {"text", "method M() { }"}, {"atMs", 0}});
    const json r = c.request({{"type", "tokens"}});
    ASSERT_EQ(r["type"], "tokens");
    ASSERT_FALSE(r["tokens"].empty());
    EXPECT_EQ(r["tokens"][0]["kind"], "keyword");
    EXPECT_EQ(r["tokens"][0]["span"], (json{{"startLine", 0}, {"startCol", 0}, {"endLine", 0}, {"endCol", 6}}));
}

TEST(Session, ProtocolErrors) {
    Client c;
    c.session->handle_line("{not json");
    EXPECT_EQ(c.received.back(), (json{{"type", "error"}, {"id", nullptr}, {"reason", "malformed-json"}}));
    EXPECT_EQ(c.request({{"type", "launch"}})["reason"], "unknown-type");
    EXPECT_EQ(c.request({{"type", "hover"}, {"line", "x"}})["reason"], "bad-request");
    EXPECT_EQ(c.request({{"kind", "hover"}})["reason"], "bad-request");
    c.session->handle_line("[1, 2]");
    EXPECT_EQ(c.received.back()["reason"], "bad-request");
}

// Every client line is answered by exactly one response carrying its id,
// or by a pushed error when no id could be read.
TEST(SessionProperties, ProtocolTotality) {
    Client c;
    std::mt19937 rng(9);
    const std::vector<std::string> types{"update", "hover", "selectError", "selectState", "tokens", "nope"};
    for (int i = 0; i < 300; ++i) {
        const std::size_t before = c.received.size();
        if (rng() % 10 == 0) {
            c.session->handle_line("{\"type\": \"hover\", \"id\": " + std::to_string(i) + ",");
            ASSERT_EQ(c.received.size(), before + 1);
            ASSERT_EQ(c.received.back()["type"], "error");
            continue;
        }
        json m{{"type", types[rng() % types.size()]}, {"id", i}};
        if (rng() % 2) m["text"] = "method M() { }";
        if (rng() % 2) m["line"] = static_cast<int>(rng() % 3);
        if (rng() % 2) m["col"] = static_cast<int>(rng() % 12);
        if (rng() % 2) m["errorId"] = static_cast<int>(rng() % 3);
        if (rng() % 3 == 0) m["stateIndex"] = "zero";
        c.session->handle_line(m.dump());
        ASSERT_EQ(c.received.size(), before + 1) << m;
        ASSERT_EQ(c.received.back()["id"], i) << m;
    }
}

TEST(Session, ServeLinesRoundTrip) {
    std::deque<std::string> input{
        R"({"type":"update","id":1,"text":"method M() { assert false; }","editedLines":[0]})",
        "garbage",
        R"({"type":"tokens","id":2})",
    };
    std::vector<json> output;
    std::mutex mu;
    Config c;
    c.debounce_ms = 0;
    c.max_workers = 1;
    serve_lines(
        c,
        [&]() -> std::optional<std::string> {
            if (input.empty()) {
                // Keep the connection open until verification has been pushed.
                for (int i = 0; i < 500; ++i) {
                    {
                        std::lock_guard lock(mu);
                        for (const json& m : output) {
                            if (m["type"] == "verified") return std::nullopt;
                        }
                    }
                    std::this_thread::sleep_for(std::chrono::milliseconds(10));
                }
                return std::nullopt;
            }
            std::string line = input.front();
            input.pop_front();
            return line;
        },
        [&](const std::string& line) {
            std::lock_guard lock(mu);
            output.push_back(json::parse(line));
        });
    std::set<std::string> types;
    for (const json& m : output) types.insert(m["type"]);
    for (const char* t : {"ack", "error", "tokens", "unitResult", "verified", "margins", "resolutionDiagnostics"}) {
        EXPECT_TRUE(types.count(t)) << t;
    }
}
