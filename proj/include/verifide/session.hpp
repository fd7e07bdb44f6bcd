#pragma once

#include <verifide/orchestrator.hpp>

#include <json.hpp>

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace verifide {

/// One editor connection speaking newline-delimited JSON. Client requests
/// go through handle_line; orchestrator events become pushed messages in
/// pump. All output goes through the sink one complete line at a time.
class Session {
public:
    using Sink = std::function<void(const std::string& line)>;

    Session(Config config, Sink sink, std::shared_ptr<const Prover> prover = nullptr,
            std::shared_ptr<Clock> clock = nullptr);

    void handle_line(std::string_view line);
    nlohmann::json handle(const nlohmann::json& message);

    /// Fires the debounce timer if due, then pushes every new event.
    /// Returns the number of messages pushed.
    int pump();
    /// Like pump, but first waits up to `timeout` for new events.
    int pump_wait(std::chrono::milliseconds timeout);

    Orchestrator& orchestrator() { return orchestrator_; }

private:
    struct ErrorRecord {
        int snapshot_id = 0;
        VerificationError error;
    };

    nlohmann::json on_update(const nlohmann::json& m, const nlohmann::json& id);
    nlohmann::json on_hover(const nlohmann::json& m, const nlohmann::json& id);
    nlohmann::json on_select_error(const nlohmann::json& m, const nlohmann::json& id);
    nlohmann::json on_select_state(const nlohmann::json& m, const nlohmann::json& id);
    nlohmann::json on_tokens(const nlohmann::json& id);

    const ErrorRecord* find_error(const nlohmann::json& error_id) const;
    std::optional<nlohmann::json> push_for(const Event& event);
    void send(const nlohmann::json& message);

    Sink sink_;
    std::shared_ptr<Clock> clock_;
    VirtualClock* virtual_clock_ = nullptr;
    Orchestrator orchestrator_;

    std::mutex mu_;  // everything below, and pumping
    std::uint64_t seen_seq_ = 0;
    int next_error_id_ = 1;
    int latest_verified_ = -1;
    std::map<int, ErrorRecord> errors_;
    std::optional<std::pair<int, int>> selected_;  // errorId, stateIndex
};

nlohmann::json error_message(const nlohmann::json& id, std::string_view reason);

/// Serves one session over a pair of line functions until read_line
/// returns std::nullopt.
void serve_lines(const Config& config, const std::function<std::optional<std::string>()>& read_line,
                 const std::function<void(const std::string&)>& write_line);

/// Serves the standard streams.
void serve_stdio(const Config& config);

/// Accepts TCP connections on host:port, one session per connection.
/// Returns a nonzero exit status if the socket cannot be bound.
int serve_tcp(const Config& config, const std::string& host, int port);

}  // namespace verifide
