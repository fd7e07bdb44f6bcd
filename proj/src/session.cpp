#include <verifide/session.hpp>

#include <verifide/json_io.hpp>

namespace verifide {

using nlohmann::json;

json error_message(const json& id, std::string_view reason) {
    return {{"type", "error"}, {"id", id}, {"reason", reason}};
}

namespace {

json entity_json(const EntityId& id) { return {{"name", id.name}, {"kind", to_string(id.kind)}}; }

}  // namespace

Session::Session(Config config, Sink sink, std::shared_ptr<const Prover> prover, std::shared_ptr<Clock> clock)
    : sink_(std::move(sink)),
      clock_(clock ? std::move(clock) : std::make_shared<SteadyClock>()),
      virtual_clock_(dynamic_cast<VirtualClock*>(clock_.get())),
      orchestrator_(config, std::move(prover), clock_) {}

void Session::send(const json& message) { sink_(message.dump()); }

void Session::handle_line(std::string_view line) {
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) return;
    json message;
    try {
        message = json::parse(line);
    } catch (const json::parse_error&) {
        send(error_message(nullptr, "malformed-json"));
        return;
    }
    send(handle(message));
}

json Session::handle(const json& m) {
    if (!m.is_object()) return error_message(nullptr, "bad-request");
    const json id = m.contains("id") ? m["id"] : json(nullptr);
    auto type = m.find("type");
    if (type == m.end() || !type->is_string()) return error_message(id, "bad-request");
    const std::string t = type->get<std::string>();
    try {
        if (t == "update") return on_update(m, id);
        if (t == "hover") return on_hover(m, id);
        if (t == "selectError") return on_select_error(m, id);
        if (t == "selectState") return on_select_state(m, id);
        if (t == "tokens") return on_tokens(id);
    } catch (const json::exception&) {
        return error_message(id, "bad-request");
    }
    return error_message(id, "unknown-type");
}

json Session::on_update(const json& m, const json& id) {
    const std::string text = m.at("text").get<std::string>();
    std::set<int> edited;
    if (auto it = m.find("editedLines"); it != m.end()) edited = it->get<std::set<int>>();
    std::int64_t at = clock_->now_ms();
    if (virtual_clock_) {
        if (auto it = m.find("atMs"); it != m.end()) virtual_clock_->set(it->get<std::int64_t>());
        at = virtual_clock_->now_ms();
    }
    const int snapshot = orchestrator_.submit_text(text, edited, at);
    return {{"type", "ack"}, {"id", id}, {"snapshotId", snapshot}};
}

json Session::on_hover(const json& m, const json& id) {
    const int line = m.at("line").get<int>();
    const int col = m.at("col").get<int>();
    json response{{"type", "hoverResult"}, {"id", id}, {"text", nullptr}};
    std::shared_ptr<const Program> program = orchestrator_.latest_clean_program();
    if (!program) return response;
    std::optional<HoverInfo> info = hover_info(*program, line, col);
    if (!info) return response;
    std::string text = info->text;

    std::lock_guard lock(mu_);
    if (selected_ && !info->variable.empty()) {
        auto it = errors_.find(selected_->first);
        if (it != errors_.end() && it->second.snapshot_id >= latest_verified_) {
            const TraceState& state = it->second.error.trace.states[static_cast<std::size_t>(selected_->second)];
            if (const Value* v = state.find(info->variable)) text += "\nvalue in selected state: " + v->render();
        }
    }
    response["text"] = text;
    return response;
}

const Session::ErrorRecord* Session::find_error(const json& error_id) const {
    if (!error_id.is_number_integer()) return nullptr;
    auto it = errors_.find(error_id.get<int>());
    if (it == errors_.end() || it->second.snapshot_id < latest_verified_) return nullptr;
    return &it->second;
}

json Session::on_select_error(const json& m, const json& id) {
    std::lock_guard lock(mu_);
    const ErrorRecord* rec = find_error(m.at("errorId"));
    if (!rec) return error_message(id, "stale-error");
    json states = json::array();
    for (const TraceState& s : rec->error.trace.states) {
        states.push_back({{"line", s.location.start_line}, {"col", s.location.start_col}});
    }
    const int last = static_cast<int>(rec->error.trace.states.size()) - 1;
    if (last >= 0) {
        selected_ = std::pair{m.at("errorId").get<int>(), last};
    } else {
        selected_.reset();
    }
    return {{"type", "trace"}, {"id", id}, {"states", states}};
}

json Session::on_select_state(const json& m, const json& id) {
    std::lock_guard lock(mu_);
    const ErrorRecord* rec = find_error(m.at("errorId"));
    if (!rec) return error_message(id, "stale-error");
    const auto& states = rec->error.trace.states;
    const int count = static_cast<int>(states.size());
    int index = count - 1;
    if (auto it = m.find("stateIndex"); it != m.end() && !it->is_null()) index = it->get<int>();
    std::optional<int> previous;
    if (auto it = m.find("previousIndex"); it != m.end() && !it->is_null()) previous = it->get<int>();
    if (index < 0 || index >= count || (previous && (*previous < 0 || *previous >= count))) {
        return error_message(id, "index-out-of-range");
    }
    selected_ = std::pair{m.at("errorId").get<int>(), index};

    const TraceState& cur = states[static_cast<std::size_t>(index)];
    json values = json::array();
    for (const Binding& b : cur.bindings) {
        json prev = nullptr;
        if (previous) {
            if (const Value* v = states[static_cast<std::size_t>(*previous)].find(b.name)) prev = v->render();
        }
        values.push_back({{"name", b.name}, {"value", b.value.render()}, {"previous", prev}});
    }
    return {{"type", "stateValues"}, {"id", id}, {"values", values}};
}

json Session::on_tokens(const json& id) {
    json tokens = json::array();
    for (const Token& t : orchestrator_.tokens()) {
        if (t.kind == TokenKind::Whitespace) continue;
        tokens.push_back({{"kind", to_string(t.kind)}, {"span", span_json(t.span)}});
    }
    return {{"type", "tokens"}, {"id", id}, {"tokens", tokens}};
}

std::optional<json> Session::push_for(const Event& e) {
    switch (e.kind) {
        case EventKind::MarginsChanged: {
            json lines = json::array();
            for (int l = 0; l < e.margins.line_count; ++l) {
                lines.push_back({{"line", l}, {"state", to_string(e.margins.at(l))}});
            }
            return json{{"type", "margins"}, {"lines", lines}};
        }
        case EventKind::ResolutionDiagnostics: {
            json items = json::array();
            for (const Diagnostic& d : e.diagnostics) {
                items.push_back({{"span", span_json(d.span)}, {"severity", to_string(d.severity)}, {"message", d.message}});
            }
            return json{{"type", "resolutionDiagnostics"}, {"snapshotId", e.snapshot_id}, {"items", items}};
        }
        case EventKind::UnitCompleted: {
            json errors = json::array();
            for (const VerificationError& err : e.verdict.errors) {
                const int error_id = next_error_id_++;
                errors_[error_id] = {e.snapshot_id, err};
                json related = json::array();
                for (const Span& s : err.related_spans) related.push_back(span_json(s));
                errors.push_back({{"errorId", error_id},
                                  {"span", span_json(err.error_span)},
                                  {"message", err.message},
                                  {"relatedSpans", related},
                                  {"traceLength", err.trace.states.size()}});
            }
            return json{{"type", "unitResult"},
                        {"snapshotId", e.snapshot_id},
                        {"entity", entity_json(e.unit.entity)},
                        {"obligation", to_string(e.unit.obligation)},
                        {"verdict", to_string(e.verdict.kind)},
                        {"fromCache", e.from_cache},
                        {"errors", errors}};
        }
        case EventKind::SnapshotVerified: {
            latest_verified_ = e.snapshot_id;
            std::erase_if(errors_, [&](const auto& kv) { return kv.second.snapshot_id < e.snapshot_id; });
            if (selected_ && !errors_.contains(selected_->first)) selected_.reset();
            return json{{"type", "verified"}, {"snapshotId", e.snapshot_id}};
        }
        case EventKind::Resync: return error_message(nullptr, "resync");
        default: return std::nullopt;
    }
}

int Session::pump() {
    orchestrator_.tick();
    std::lock_guard lock(mu_);
    int pushed = 0;
    for (const Event& e : orchestrator_.poll_events(seen_seq_)) {
        seen_seq_ = e.seq;
        if (std::optional<json> msg = push_for(e)) {
            send(*msg);
            ++pushed;
        }
    }
    return pushed;
}

int Session::pump_wait(std::chrono::milliseconds timeout) {
    std::uint64_t since = 0;
    {
        std::lock_guard lock(mu_);
        since = seen_seq_;
    }
    orchestrator_.wait_events(since, timeout);
    return pump();
}

}  // namespace verifide
