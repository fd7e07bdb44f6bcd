#pragma once

#include <verifide/cache.hpp>
#include <verifide/fingerprint.hpp>
#include <verifide/lang.hpp>
#include <verifide/prover.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <stop_token>
#include <thread>
#include <vector>

namespace verifide {

enum class ProverKind : std::uint8_t { Bounded, Scripted };

struct Config {
    int debounce_ms = 500;
    int max_workers = default_workers();
    int timeout_ms = 10000;
    Bounds bounds;
    std::size_t cache_capacity = ResultCache::kDefaultCapacity;
    ProverKind prover_kind = ProverKind::Bounded;
    bool cache_enabled = true;

    static int default_workers();
    bool valid() const { return debounce_ms >= 0 && max_workers >= 1 && timeout_ms >= 0 && bounds.valid(); }
};

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() const = 0;
};

class SteadyClock final : public Clock {
public:
    SteadyClock() : origin_(std::chrono::steady_clock::now()) {}
    std::int64_t now_ms() const override;

private:
    std::chrono::steady_clock::time_point origin_;
};

/// Manually advanced clock for deterministic tests.
class VirtualClock final : public Clock {
public:
    std::int64_t now_ms() const override { return now_.load(); }
    void set(std::int64_t ms);
    void advance(std::int64_t ms) { now_ += ms; }

private:
    std::atomic<std::int64_t> now_{0};
};

enum class LineState : std::uint8_t { Idle, EditedPending, BeingVerified };

const char* to_string(LineState state);

struct MarginState {
    int line_count = 0;
    std::map<int, LineState> marked;  // lines that are not Idle

    LineState at(int line) const;
    bool operator==(const MarginState&) const = default;
};

enum class EventKind : std::uint8_t {
    SnapshotAccepted,
    ResolutionDiagnostics,
    UnitScheduled,
    UnitCompleted,
    UnitSkipped,
    SnapshotVerified,
    MarginsChanged,
    Resync,
};

const char* to_string(EventKind kind);

struct Event {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::SnapshotAccepted;
    int snapshot_id = -1;
    std::int64_t at_ms = 0;

    std::vector<Diagnostic> diagnostics;  // ResolutionDiagnostics

    UnitId unit;  // UnitScheduled, UnitCompleted, UnitSkipped
    Priority priority = Priority::High;
    Checksum entity_checksum;
    Checksum dependency_checksum;
    Verdict verdict;
    bool from_cache = false;
    std::int64_t duration_ms = 0;  // prover time, or real resolution time

    MarginState margins;  // MarginsChanged
};

struct Invocation {
    int snapshot_id = 0;
    UnitId unit;
    Priority priority = Priority::High;
};

/// The continuous verification engine. Text snapshots come in through
/// submit_text; after the debounce interval the latest one is resolved and,
/// if clean, verified unit by unit on a worker pool. Results come out as an
/// ordered event stream.
class Orchestrator {
public:
    static constexpr std::size_t kEventCapacity = 65536;

    /// Null arguments select defaults: a prover matching config.prover_kind
    /// (Scripted requires an explicit prover), a SteadyClock, a fresh cache.
    explicit Orchestrator(Config config, std::shared_ptr<const Prover> prover = nullptr,
                          std::shared_ptr<Clock> clock = nullptr, std::shared_ptr<ResultCache> cache = nullptr);
    ~Orchestrator();

    Orchestrator(const Orchestrator&) = delete;
    Orchestrator& operator=(const Orchestrator&) = delete;

    int submit_text(std::string text, const std::set<int>& edited_lines, std::int64_t at_ms);

    /// Fires the debounce expiry if its deadline has passed on the clock.
    /// Returns true if it fired.
    bool tick();
    std::optional<std::int64_t> debounce_deadline() const;

    /// Resolves the latest snapshot and starts or queues its verification.
    void on_debounce_expired();

    /// Starts verifying a resolved, clean snapshot. No-op if a run is
    /// already active (the snapshot is remembered instead).
    void start_verification(int snapshot_id);

    int pool_size(int pending_units) const;

    std::vector<Event> poll_events(std::uint64_t since_seq) const;
    /// Blocks until an event newer than since_seq exists or the timeout ends.
    std::vector<Event> wait_events(std::uint64_t since_seq, std::chrono::milliseconds timeout) const;
    std::uint64_t last_seq() const;

    MarginState margin_states() const;

    /// Blocks until no run is active and none is pending.
    void wait_idle() const;
    bool idle() const;

    std::vector<Token> tokens() const;
    /// The most recent snapshot that resolved without errors.
    std::shared_ptr<const Program> latest_clean_program() const;
    std::optional<int> latest_clean_snapshot() const;

    std::vector<Invocation> invocations() const;
    std::vector<std::int64_t> parse_times() const;

    const Config& config() const { return config_; }
    ResultCache& cache() { return *cache_; }
    const Clock& clock() const { return *clock_; }

private:
    struct Snapshot {
        int id = 0;
        std::string text;
        std::set<int> edited;
        std::int64_t at_ms = 0;
        int line_count = 0;
        std::shared_ptr<const Program> program;
        bool clean = false;
        std::map<EntityId, EntityFingerprint> fingerprints;
    };

    struct QueueItem {
        Priority priority;
        std::size_t order;
        VerificationUnit unit;
        EntityFingerprint fingerprint;

        bool operator<(const QueueItem& other) const {
            if (priority != other.priority) return priority < other.priority;
            return order > other.order;
        }
    };

    void emit(Event event);
    void emit_margins();
    MarginState margins_locked() const;
    void start_locked(int snapshot_id);
    void finish_run_locked();
    void ensure_workers_locked();
    void worker_loop(std::stop_token stop);
    bool stale_locked(const QueueItem& item) const;

    Config config_;
    std::shared_ptr<const Prover> prover_;
    std::shared_ptr<Clock> clock_;
    std::shared_ptr<ResultCache> cache_;

    mutable std::mutex mu_;
    mutable std::condition_variable_any events_cv_;
    mutable std::condition_variable_any idle_cv_;
    std::condition_variable_any work_cv_;

    std::map<int, Snapshot> snapshots_;
    int next_snapshot_ = 0;
    std::optional<std::int64_t> deadline_;
    std::optional<int> latest_clean_;
    std::shared_ptr<const Program> latest_clean_program_;
    std::vector<std::int64_t> parse_times_;

    // Margins: lines edited after the last handoff, and lines of the run.
    int handed_upto_ = -1;
    int last_resolved_ = -1;
    int resolving_ = -1;
    std::set<int> verifying_lines_;

    bool running_ = false;
    int current_ = -1;
    std::optional<int> pending_;
    std::priority_queue<QueueItem> queue_;
    int in_flight_ = 0;
    std::vector<Invocation> invocations_;

    std::deque<Event> events_;
    std::uint64_t next_seq_ = 1;

    std::vector<std::jthread> workers_;
};

}  // namespace verifide
