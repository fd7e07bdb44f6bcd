#include <verifide/prover.hpp>

#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "support.hpp"

using namespace verifide;
using testing_support::analyzed;

namespace {

std::map<std::string, Verdict> verify_all(const std::shared_ptr<const Program>& p, const Bounds& bounds = {},
                                          int cap = kDefaultErrorCap) {
    std::map<std::string, Verdict> out;
    for (const VerificationUnit& u : extract_units(p)) out[to_string(u.id)] = *verify_unit(u, bounds, 60000, {}, cap);
    return out;
}

VerificationUnit unit_named(const std::shared_ptr<const Program>& p, const std::string& id) {
    for (const VerificationUnit& u : extract_units(p)) {
        if (to_string(u.id) == id) return u;
    }
    throw std::runtime_error("no unit " + id);
}

bool all_verified(const std::map<std::string, Verdict>& verdicts) {
    for (const auto& [id, v] : verdicts) {
        if (v.kind != Verdict::Kind::Verified) return false;
    }
    return true;
}

bool has_method_calls(const std::vector<Stmt>& block) {
    for (const Stmt& s : block) {
        if (s.is_method_call || s.kind == StmtKind::Call) return true;
        if (has_method_calls(s.body) || has_method_calls(s.else_body)) return true;
    }
    return false;
}

std::vector<Value> entry_inputs(const MethodDecl& m, const TraceState& entry) {
    std::vector<Value> inputs;
    for (const Param& p : m.params) inputs.push_back(*entry.find(p.name));
    return inputs;
}

std::set<int> state_lines(const VerificationError& e) {
    std::set<int> lines;
    for (const TraceState& s : e.trace.states) lines.insert(s.location.start_line);
    return lines;
}

}  // namespace

TEST(Prover, ChangedFunctionFailsFooEnsures) {
    const auto p = analyzed(testing_support::kThreeSnap2);
    const auto verdicts = verify_all(p);
    const Verdict& foo = verdicts.at("MethodBody(Foo)");
    ASSERT_EQ(foo.kind, Verdict::Kind::Failed);
    ASSERT_EQ(foo.errors.size(), 1u);
    EXPECT_EQ(foo.errors[0].message, "ensures clause might not hold");
    ASSERT_EQ(foo.errors[0].related_spans.size(), 1u);
    EXPECT_EQ(foo.errors[0].related_spans[0], p->methods[0].ensures[0]->span);
    EXPECT_EQ(verdicts.at("MethodBody(Bar)").kind, Verdict::Kind::Verified);
    EXPECT_EQ(verdicts.at("FunctionWF(P)").kind, Verdict::Kind::Verified);
}

TEST(Prover, EarlierSnapshotsVerify) {
    EXPECT_TRUE(all_verified(verify_all(analyzed(testing_support::kThreeSnap0))));
    EXPECT_TRUE(all_verified(verify_all(analyzed(testing_support::kThreeSnap1))));
}

TEST(Prover, IdentityVerifiesInSmallBounds) {
    Bounds b;
    b.int_low = -2;
    b.int_high = 2;
    EXPECT_TRUE(all_verified(verify_all(analyzed("method Id(x: int) returns (y: int) ensures y == x { y := x; }"), b)));
}

TEST(Prover, FillWithoutFrameFailsThroughAssignmentAndCall) {
    const auto p = analyzed(testing_support::corpus_program("fill_weak.msp"));
    const Verdict v = verify_all(p).at("MethodBody(Fill)");
    ASSERT_EQ(v.kind, Verdict::Kind::Failed);
    const VerificationError& e = v.errors.at(0);
    EXPECT_EQ(e.message, "ensures clause might not hold");
    const std::set<int> lines = state_lines(e);
    EXPECT_TRUE(lines.count(8)) << "a[end] := v";
    EXPECT_TRUE(lines.count(9)) << "Fill(a, end + 1, v)";
    // The last state sits at the exit and shows a clobbered prefix.
    EXPECT_EQ(e.trace.states.back().location.start_line, 11);
}

TEST(Prover, FillWithFrameVerifies) {
    EXPECT_TRUE(all_verified(verify_all(analyzed(testing_support::corpus_program("fill_framed.msp")))));
}

TEST(Prover, AssertFalseHasTwoStates) {
    const auto p = analyzed("method M() { assert false; }");
    const Verdict v = verify_all(p).at("MethodBody(M)");
    ASSERT_EQ(v.kind, Verdict::Kind::Failed);
    EXPECT_EQ(v.errors[0].trace.states.size(), 2u);
    EXPECT_EQ(v.errors[0].message, "assertion might not hold");
}

TEST(Prover, StraightLineTraceHasOneStatePerStatement) {
    const auto p = analyzed("method M(x: int)\n{\n  var a := x;\n  var b := a + 1;\n  assert b == x;\n}\n");
    const Verdict v = verify_all(p).at("MethodBody(M)");
    ASSERT_EQ(v.kind, Verdict::Kind::Failed);
    const auto& states = v.errors[0].trace.states;
    ASSERT_EQ(states.size(), 4u);
    EXPECT_EQ(states[0].bindings.size(), 1u);
    EXPECT_EQ(states[1].find("a")->integer, states[0].find("x")->integer);
    EXPECT_EQ(states[3].location.start_line, 4);
}

TEST(Prover, ReportsFirstFailurePerSpanUpToCap) {
    std::string body;
    for (int i = 0; i < 10; ++i) body += "  assert x != " + std::to_string(i - 3) + ";\n";
    Bounds b;
    b.int_low = -3;
    b.int_high = 6;
    const auto p = analyzed("method M(x: int)\n{\n" + body + "}\n");
    const Verdict capped = verify_all(p, b).at("MethodBody(M)");
    ASSERT_EQ(capped.kind, Verdict::Kind::Failed);
    EXPECT_EQ(capped.errors.size(), 8u);
    std::set<Span> spans;
    for (const auto& e : capped.errors) spans.insert(e.error_span);
    EXPECT_EQ(spans.size(), 8u);
    EXPECT_EQ(verify_all(p, b, 3).at("MethodBody(M)").errors.size(), 3u);
}

TEST(Prover, DivisionByZeroInFunction) {
    const Verdict v = verify_all(analyzed(testing_support::corpus_program("div_by_zero.msp"))).at("FunctionWF(Ratio)");
    ASSERT_EQ(v.kind, Verdict::Kind::Failed);
    EXPECT_EQ(v.errors[0].message, "possible division by zero");
}

TEST(Prover, SpecWellDefinedness) {
    const auto p = analyzed("method M(a: array<int>) returns (r: int) ensures r == a[0] { }");
    const auto verdicts = verify_all(p);
    ASSERT_EQ(verdicts.at("MethodSpecWF(M)").kind, Verdict::Kind::Failed);
    EXPECT_EQ(verdicts.at("MethodSpecWF(M)").errors[0].message, "index out of range");
    EXPECT_EQ(verdicts.at("MethodBody(M)").kind, Verdict::Kind::Failed);
}

TEST(Prover, EuclideanDivision) {
    const auto p = analyzed("method M() { assert -7 / 2 == -4; assert -7 % 2 == 1; assert 7 / -2 == -3; assert 7 % -2 == 1; }");
    EXPECT_TRUE(all_verified(verify_all(p)));
}

TEST(Prover, FunctionTermination) {
    const auto bad = analyzed("function F(n: int): int { if n == 0 then 0 else F(n - 1) }");
    const Verdict v = verify_all(bad).at("FunctionWF(F)");
    ASSERT_EQ(v.kind, Verdict::Kind::Failed);
    EXPECT_EQ(v.errors[0].message, "decreases expression might not decrease");
    EXPECT_TRUE(all_verified(verify_all(
        analyzed("function F(n: int): int requires n >= 0 { if n == 0 then 0 else F(n - 1) }"))));
}

TEST(Prover, TimesOut) {
    const auto p = analyzed(testing_support::corpus_program("fill_framed.msp"));
    const auto v = verify_unit(unit_named(p, "MethodSpecWF(Fill)"), {}, 1);
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(v->kind, Verdict::Kind::Timeout);
}

TEST(Prover, CancellationReturnsNothing) {
    const auto p = analyzed(testing_support::corpus_program("fill_framed.msp"));
    std::stop_source source;
    source.request_stop();
    EXPECT_FALSE(verify_unit(unit_named(p, "MethodSpecWF(Fill)"), {}, 60000, source.get_token()).has_value());
}

TEST(Prover, TimeLimitAttributeOverridesDefault) {
    const auto p = analyzed("method {:timeLimit 2} M() { }\nmethod N() { }");
    EXPECT_EQ(effective_timeout_ms(unit_named(p, "MethodBody(M)"), 10000), 2000);
    EXPECT_EQ(effective_timeout_ms(unit_named(p, "MethodBody(N)"), 10000), 10000);
}

TEST(Prover, ZeroBranchCallIsVacuous) {
    const auto p = analyzed("method Never() ensures false { assume false; }\nmethod Caller() { Never(); assert false; }");
    EXPECT_TRUE(all_verified(verify_all(p)));
}

TEST(Prover, InputEnumerationCoversDomain) {
    const std::vector<Param> params{{"x", Type::Int, {}}, {"b", Type::Bool, {}}, {"a", Type::IntArray, {}}};
    Bounds bounds;
    bounds.int_low = -1;
    bounds.int_high = 1;
    bounds.max_array_len = 2;
    std::set<std::string> seen;
    for_each_input(params, bounds, [&](std::span<const Value> in) {
        std::string key;
        for (const Value& v : in) key += v.render() + ";";
        seen.insert(key);
        return true;
    });
    // 3 ints * 2 bools * (1 + 3 + 9) arrays
    EXPECT_EQ(seen.size(), 3u * 2u * 13u);
}

TEST(Prover, DeterministicAcrossThreads) {
    const auto p = analyzed(testing_support::corpus_program("sum_loop_bad_invariant.msp"));
    const Verdict reference = verify_all(p).at("MethodBody(SumTo)");
    std::vector<std::future<Verdict>> runs;
    for (int i = 0; i < 4; ++i) {
        runs.push_back(std::async(std::launch::async, [&] {
            return *verify_unit(unit_named(p, "MethodBody(SumTo)"), {}, 60000);
        }));
    }
    for (auto& r : runs) EXPECT_EQ(r.get(), reference);
}

TEST(ScriptedProverTest, DelayBeyondTimeoutIsTimeout) {
    const auto p = analyzed("method M() { }");
    const ScriptedProver prover({200, ScriptedProver::Result::Verified}, {}, false);
    const auto r = prover.prove(unit_named(p, "MethodBody(M)"), {}, 50, {});
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->verdict.kind, Verdict::Kind::Timeout);
    EXPECT_EQ(r->duration_ms, 50);
}

TEST(ScriptedProverTest, DelayWithinTimeoutGivesTrueVerdict) {
    const auto p = analyzed("method M() { assert false; }");
    const ScriptedProver prover({10, ScriptedProver::Result::Bounded}, {}, false);
    const auto r = prover.prove(unit_named(p, "MethodBody(M)"), {}, 50, {});
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->verdict, *verify_unit(unit_named(p, "MethodBody(M)"), {}, 50));
}

TEST(ScriptedProverTest, RealTimeSleepIsCancellable) {
    const auto p = analyzed("method M() { }");
    const ScriptedProver prover({5000, ScriptedProver::Result::Verified}, {}, true);
    std::stop_source source;
    const auto start = std::chrono::steady_clock::now();
    std::thread canceller([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        source.request_stop();
    });
    const auto r = prover.prove(unit_named(p, "MethodBody(M)"), {}, 10000, source.get_token());
    canceller.join();
    EXPECT_FALSE(r.has_value());
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(2));
}

TEST(ScriptedProverTest, PerEntityScripts) {
    const auto p = analyzed("method M() { }");
    const ScriptedProver prover({0, ScriptedProver::Result::Verified},
                                {{{"M", EntityKind::MethodBody}, {0, ScriptedProver::Result::Failed}}}, false);
    EXPECT_EQ(prover.prove(unit_named(p, "MethodBody(M)"), {}, 50, {})->verdict.kind, Verdict::Kind::Failed);
    EXPECT_EQ(prover.prove(unit_named(p, "MethodSpecWF(M)"), {}, 50, {})->verdict.kind, Verdict::Kind::Verified);
}

TEST(Executor, IdentityRunsOk) {
    const auto p = analyzed("method Id(x: int) returns (y: int) ensures y == x { y := x; }");
    const Value in[] = {Value::of_int(2)};
    EXPECT_EQ(execute_concrete(*p, "Id", in, {}).kind, Outcome::Kind::Ok);
}

TEST(Executor, AssertFalseFaultsAtAssert) {
    const auto p = analyzed("method M()\n{\n  assert false;\n}\n");
    const Outcome o = execute_concrete(*p, "M", {}, {});
    ASSERT_EQ(o.kind, Outcome::Kind::Fault);
    EXPECT_EQ(o.span.start_line, 2);
}

TEST(Executor, RunsCalleeBodies) {
    const auto p = analyzed(testing_support::corpus_program("weak_callee_spec.msp"));
    EXPECT_EQ(execute_concrete(*p, "UseThree", {}, {}).kind, Outcome::Kind::Ok);
}

TEST(Executor, StepBudget) {
    const auto p = analyzed("method Loop() { var i := 0; while true { i := i + 1; } }");
    Bounds b;
    b.max_steps = 100;
    const Outcome o = execute_concrete(*p, "Loop", {}, b);
    EXPECT_EQ(o.kind, Outcome::Kind::Fault);
    EXPECT_TRUE(o.step_budget_exceeded);
}

// Every failing trace replays: running the same body concretely from the
// trace's entry bindings fails at the reported location. Bodies with
// method calls are excluded since concrete runs execute callee bodies.
TEST(ProverProperties, TracesReplayConcretely) {
    int replayed = 0;
    for (const auto& path : testing_support::corpus_files("programs", ".msp")) {
        const auto p = analyzed(testing_support::read_file(path));
        for (const VerificationUnit& u : extract_units(p)) {
            if (u.id.obligation != Obligation::MethodBody) continue;
            const MethodDecl& m = *p->find_method(u.id.entity.name);
            const Verdict v = *verify_unit(u, {}, 60000);
            for (const VerificationError& e : v.errors) {
                ASSERT_GE(e.trace.states.size(), 2u);
                if (has_method_calls(m.body) || e.message.find("decreases") != std::string::npos) continue;
                const auto inputs = entry_inputs(m, e.trace.states.front());
                ASSERT_TRUE(requires_hold(*p, m, inputs, {}));
                const Outcome o = execute_concrete(*p, m.name, inputs, {});
                ASSERT_EQ(o.kind, Outcome::Kind::Fault) << path << " " << e.message;
                const Span expected = e.message == "ensures clause might not hold" ? e.related_spans.at(0) : e.error_span;
                EXPECT_EQ(o.span, expected) << path << " " << e.message;
                ++replayed;
            }
        }
    }
    EXPECT_GE(replayed, 5);
}

// Within bounds, a fully verified program never faults when run whole.
TEST(ProverProperties, ModularSoundnessOverCorpus) {
    int verified_programs = 0;
    for (const auto& path : testing_support::corpus_files("programs", ".msp")) {
        const auto p = analyzed(testing_support::read_file(path));
        if (!all_verified(verify_all(p))) continue;
        ++verified_programs;
        for (const MethodDecl& m : p->methods) {
            for_each_input(m.params, {}, [&](std::span<const Value> in) {
                if (!requires_hold(*p, m, in, {})) return true;
                const Outcome o = execute_concrete(*p, m.name, in, {});
                EXPECT_EQ(o.kind, Outcome::Kind::Ok) << path << " " << m.name << ": " << o.message;
                return o.kind == Outcome::Kind::Ok;
            });
        }
    }
    EXPECT_GE(verified_programs, 10);
}

// Making a callee's postcondition unsatisfiable only removes call branches.
TEST(ProverProperties, UnsatisfiableCalleeEnsuresKeepsCallersVerified) {
    for (const char* name : {"double.msp", "index_checked.msp", "swap.msp", "countdown.msp"}) {
        const std::string text = testing_support::corpus_program(name);
        const auto base = verify_all(analyzed(text));
        std::string strengthened = text;
        std::size_t pos = 0;
        while ((pos = strengthened.find("\n{", pos)) != std::string::npos) {
            strengthened.insert(pos, "\n  ensures false");
            pos += 18;
        }
        const auto p = analyzed(strengthened);
        ASSERT_TRUE(p->ok()) << strengthened;
        const auto after = verify_all(p);
        for (const auto& [id, v] : base) {
            if (id.rfind("MethodBody", 0) != 0 || v.kind != Verdict::Kind::Verified) continue;
            // The callee's own body now fails; callers must stay verified.
            const std::string method = id.substr(11, id.size() - 12);
            bool is_callee = false;
            for (const auto& [from, tos] : p->call_graph) {
                if (from.name != method && tos.count({method, EntityKind::MethodSpec})) is_callee = true;
            }
            if (is_callee || method == "CountDown") continue;
            EXPECT_EQ(after.at(id).kind, Verdict::Kind::Verified) << name << " " << id;
        }
    }
}
