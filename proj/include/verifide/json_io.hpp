#pragma once

#include <verifide/cache.hpp>
#include <verifide/prover.hpp>
#include <verifide/source.hpp>

#include <json.hpp>

namespace verifide {

/// {"startLine","startCol","endLine","endCol"}
nlohmann::json span_json(const Span& span);
std::optional<Span> span_from_json(const nlohmann::json& j);

nlohmann::json diagnostic_json(const Diagnostic& d);
nlohmann::json value_json(const Value& v);
nlohmann::json error_json(const VerificationError& e);
nlohmann::json verdict_json(const Verdict& v);

}  // namespace verifide
