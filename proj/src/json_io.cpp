#include <verifide/json_io.hpp>

namespace verifide {

using nlohmann::json;

json span_json(const Span& s) {
    return {{"startLine", s.start_line}, {"startCol", s.start_col}, {"endLine", s.end_line}, {"endCol", s.end_col}};
}

std::optional<Span> span_from_json(const json& j) {
    if (!j.is_object()) return std::nullopt;
    Span s;
    for (auto [key, field] : {std::pair{"startLine", &s.start_line}, std::pair{"startCol", &s.start_col},
                              std::pair{"endLine", &s.end_line}, std::pair{"endCol", &s.end_col}}) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_number_integer()) return std::nullopt;
        *field = it->get<int>();
    }
    return s;
}

json diagnostic_json(const Diagnostic& d) {
    return {{"span", span_json(d.span)},
            {"severity", to_string(d.severity)},
            {"code", to_string(d.code)},
            {"message", d.message}};
}

json value_json(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Int: return v.integer;
        case Value::Kind::Bool: return v.boolean;
        case Value::Kind::Array: return v.elements;
    }
    return nullptr;
}

json error_json(const VerificationError& e) {
    json related = json::array();
    for (const Span& s : e.related_spans) related.push_back(span_json(s));
    json states = json::array();
    for (const TraceState& st : e.trace.states) {
        json bindings = json::object();
        for (const Binding& b : st.bindings) bindings[b.name] = b.value.render();
        states.push_back({{"location", span_json(st.location)}, {"bindings", bindings}});
    }
    return {{"message", e.message}, {"span", span_json(e.error_span)}, {"relatedSpans", related}, {"trace", states}};
}

json verdict_json(const Verdict& v) {
    json errors = json::array();
    for (const VerificationError& e : v.errors) errors.push_back(error_json(e));
    return {{"kind", to_string(v.kind)}, {"errors", errors}};
}

}  // namespace verifide
