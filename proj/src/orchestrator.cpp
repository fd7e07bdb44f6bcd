#include <verifide/orchestrator.hpp>

#include <algorithm>
#include <stdexcept>

namespace verifide {

int Config::default_workers() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

std::int64_t SteadyClock::now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - origin_).count();
}

void VirtualClock::set(std::int64_t ms) {
    if (ms > now_.load()) now_ = ms;
}

const char* to_string(LineState state) {
    switch (state) {
        case LineState::Idle: return "idle";
        case LineState::EditedPending: return "edited";
        case LineState::BeingVerified: return "verifying";
    }
    return "idle";
}

LineState MarginState::at(int line) const {
    auto it = marked.find(line);
    return it == marked.end() ? LineState::Idle : it->second;
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::SnapshotAccepted: return "SnapshotAccepted";
        case EventKind::ResolutionDiagnostics: return "ResolutionDiagnostics";
        case EventKind::UnitScheduled: return "UnitScheduled";
        case EventKind::UnitCompleted: return "UnitCompleted";
        case EventKind::UnitSkipped: return "UnitSkipped";
        case EventKind::SnapshotVerified: return "SnapshotVerified";
        case EventKind::MarginsChanged: return "MarginsChanged";
        case EventKind::Resync: return "Resync";
    }
    return "Resync";
}

namespace {

int count_lines(std::string_view text) {
    return 1 + static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

Orchestrator::Orchestrator(Config config, std::shared_ptr<const Prover> prover, std::shared_ptr<Clock> clock,
                           std::shared_ptr<ResultCache> cache)
    : config_(config), prover_(std::move(prover)), clock_(std::move(clock)), cache_(std::move(cache)) {
    if (!config_.valid()) throw std::invalid_argument("invalid orchestrator configuration");
    if (!prover_) {
        if (config_.prover_kind == ProverKind::Scripted) throw std::invalid_argument("scripted prover not supplied");
        prover_ = std::make_shared<BoundedProver>();
    }
    if (!clock_) clock_ = std::make_shared<SteadyClock>();
    if (!cache_) cache_ = std::make_shared<ResultCache>(config_.cache_capacity);
}

Orchestrator::~Orchestrator() {
    for (auto& w : workers_) w.request_stop();
    workers_.clear();
}

// ---- intake ----

int Orchestrator::submit_text(std::string text, const std::set<int>& edited_lines, std::int64_t at_ms) {
    std::lock_guard lock(mu_);
    Snapshot snap;
    snap.id = next_snapshot_++;
    snap.line_count = count_lines(text);
    snap.text = std::move(text);
    snap.edited = edited_lines;
    snap.at_ms = at_ms;
    // Snapshots newer than anything resolved will never be resolved themselves.
    const int floor = std::max({handed_upto_, last_resolved_, resolving_});
    for (auto it = snapshots_.upper_bound(floor); it != snapshots_.end();) {
        snap.edited.insert(it->second.edited.begin(), it->second.edited.end());
        it = snapshots_.erase(it);
    }
    const int id = snap.id;
    snapshots_.emplace(id, std::move(snap));
    deadline_ = at_ms + config_.debounce_ms;

    Event accepted;
    accepted.kind = EventKind::SnapshotAccepted;
    accepted.snapshot_id = id;
    emit(std::move(accepted));
    emit_margins();
    return id;
}

bool Orchestrator::tick() {
    {
        std::lock_guard lock(mu_);
        if (!deadline_ || clock_->now_ms() < *deadline_) return false;
    }
    on_debounce_expired();
    return true;
}

std::optional<std::int64_t> Orchestrator::debounce_deadline() const {
    std::lock_guard lock(mu_);
    return deadline_;
}

void Orchestrator::on_debounce_expired() {
    std::unique_lock lock(mu_);
    deadline_.reset();
    if (snapshots_.empty()) return;
    const int id = snapshots_.rbegin()->first;
    const std::string text = snapshots_.rbegin()->second.text;
    resolving_ = id;
    lock.unlock();

    const auto started = std::chrono::steady_clock::now();
    auto program = std::make_shared<Program>(analyze(text));
    std::vector<EntityFingerprint> fps;
    if (program->ok()) fps = fingerprint(*program);
    const auto resolution_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();

    lock.lock();
    resolving_ = -1;
    last_resolved_ = std::max(last_resolved_, id);
    parse_times_.push_back(clock_->now_ms());
    auto it = snapshots_.find(id);
    if (it == snapshots_.end()) return;
    Snapshot& snap = it->second;
    snap.program = program;
    snap.clean = program->ok();
    for (const EntityFingerprint& fp : fps) snap.fingerprints[fp.id] = fp;

    Event diags;
    diags.kind = EventKind::ResolutionDiagnostics;
    diags.snapshot_id = id;
    diags.diagnostics = program->diagnostics;
    diags.duration_ms = resolution_ms;
    emit(std::move(diags));

    if (!snap.clean) return;
    latest_clean_ = id;
    latest_clean_program_ = program;
    start_locked(id);
}

void Orchestrator::start_verification(int snapshot_id) {
    std::lock_guard lock(mu_);
    auto it = snapshots_.find(snapshot_id);
    if (it == snapshots_.end() || !it->second.clean) return;
    start_locked(snapshot_id);
}

// ---- runs ----

void Orchestrator::start_locked(int snapshot_id) {
    if (running_) {
        pending_ = snapshot_id;
        return;
    }
    Snapshot& snap = snapshots_.at(snapshot_id);
    running_ = true;
    current_ = snapshot_id;
    pending_.reset();

    verifying_lines_.clear();
    for (auto it = snapshots_.upper_bound(handed_upto_); it != snapshots_.end() && it->first <= snapshot_id; ++it) {
        verifying_lines_.insert(it->second.edited.begin(), it->second.edited.end());
    }
    handed_upto_ = snapshot_id;
    // Older snapshots are no longer needed for margins or scheduling.
    snapshots_.erase(snapshots_.begin(), snapshots_.lower_bound(snapshot_id));
    emit_margins();

    const std::vector<VerificationUnit> units = extract_units(snap.program);
    for (std::size_t i = 0; i < units.size(); ++i) {
        const VerificationUnit& unit = units[i];
        const EntityFingerprint& fp = snap.fingerprints.at(unit.id.entity);
        Priority priority = Priority::High;
        std::optional<Verdict> cached;
        if (config_.cache_enabled) {
            priority = cache_->priority_of(fp.id, fp.entity_checksum, fp.dependency_checksum);
            if (priority == Priority::Highest) {
                cached = cache_->lookup(fp.id, fp.dependency_checksum);
                if (!cached) priority = Priority::Low;
            }
        }

        Event scheduled;
        scheduled.kind = EventKind::UnitScheduled;
        scheduled.snapshot_id = snapshot_id;
        scheduled.unit = unit.id;
        scheduled.priority = priority;
        scheduled.entity_checksum = fp.entity_checksum;
        scheduled.dependency_checksum = fp.dependency_checksum;
        emit(scheduled);

        if (cached) {
            Event done = scheduled;
            done.kind = EventKind::UnitCompleted;
            done.verdict = std::move(*cached);
            done.from_cache = true;
            emit(std::move(done));
        } else {
            queue_.push({priority, i, unit, fp});
        }
    }

    if (queue_.empty()) {
        finish_run_locked();
        return;
    }
    ensure_workers_locked();
    work_cv_.notify_all();
}

void Orchestrator::finish_run_locked() {
    Event verified;
    verified.kind = EventKind::SnapshotVerified;
    verified.snapshot_id = current_;
    emit(std::move(verified));
    verifying_lines_.clear();
    running_ = false;
    emit_margins();

    const int finished = current_;
    if (pending_ && *pending_ != finished) {
        const int next = *pending_;
        pending_.reset();
        start_locked(next);
        return;
    }
    pending_.reset();
    idle_cv_.notify_all();
}

bool Orchestrator::stale_locked(const QueueItem& item) const {
    if (!pending_ || *pending_ == current_) return false;
    auto snap = snapshots_.find(*pending_);
    if (snap == snapshots_.end()) return false;
    auto fp = snap->second.fingerprints.find(item.unit.id.entity);
    return fp == snap->second.fingerprints.end() ||
           fp->second.dependency_checksum != item.fingerprint.dependency_checksum;
}

void Orchestrator::ensure_workers_locked() {
    while (static_cast<int>(workers_.size()) < config_.max_workers) {
        workers_.emplace_back([this](std::stop_token stop) { worker_loop(stop); });
    }
}

int Orchestrator::pool_size(int pending_units) const { return std::max(0, std::min(config_.max_workers, pending_units)); }

void Orchestrator::worker_loop(std::stop_token stop) {
    std::unique_lock lock(mu_);
    while (true) {
        work_cv_.wait(lock, stop, [this] { return !queue_.empty(); });
        if (stop.stop_requested()) return;
        QueueItem item = queue_.top();
        queue_.pop();
        const int snapshot_id = current_;

        if (stale_locked(item)) {
            Event skipped;
            skipped.kind = EventKind::UnitSkipped;
            skipped.snapshot_id = snapshot_id;
            skipped.unit = item.unit.id;
            skipped.priority = item.priority;
            skipped.entity_checksum = item.fingerprint.entity_checksum;
            skipped.dependency_checksum = item.fingerprint.dependency_checksum;
            emit(std::move(skipped));
            if (queue_.empty() && in_flight_ == 0) finish_run_locked();
            continue;
        }

        ++in_flight_;
        invocations_.push_back({snapshot_id, item.unit.id, item.priority});
        lock.unlock();
        std::optional<ProofResult> result =
            prover_->prove(item.unit, config_.bounds, effective_timeout_ms(item.unit, config_.timeout_ms), stop);
        lock.lock();
        --in_flight_;
        if (!result) return;

        if (config_.cache_enabled) {
            cache_->store({item.fingerprint.id, item.fingerprint.entity_checksum, item.fingerprint.dependency_checksum,
                           result->verdict, snapshot_id, result->duration_ms});
        }
        Event done;
        done.kind = EventKind::UnitCompleted;
        done.snapshot_id = snapshot_id;
        done.unit = item.unit.id;
        done.priority = item.priority;
        done.entity_checksum = item.fingerprint.entity_checksum;
        done.dependency_checksum = item.fingerprint.dependency_checksum;
        done.verdict = std::move(result->verdict);
        done.duration_ms = result->duration_ms;
        emit(std::move(done));
        if (queue_.empty() && in_flight_ == 0) finish_run_locked();
    }
}

// ---- events and queries ----

void Orchestrator::emit(Event event) {
    event.seq = next_seq_++;
    event.at_ms = clock_->now_ms();
    events_.push_back(std::move(event));
    if (events_.size() > kEventCapacity) events_.pop_front();
    events_cv_.notify_all();
}

void Orchestrator::emit_margins() {
    Event e;
    e.kind = EventKind::MarginsChanged;
    e.margins = margins_locked();
    emit(std::move(e));
}

MarginState Orchestrator::margins_locked() const {
    MarginState m;
    if (!snapshots_.empty()) m.line_count = snapshots_.rbegin()->second.line_count;
    for (int line : verifying_lines_) m.marked[line] = LineState::BeingVerified;
    for (auto it = snapshots_.upper_bound(handed_upto_); it != snapshots_.end(); ++it) {
        for (int line : it->second.edited) m.marked[line] = LineState::EditedPending;
    }
    return m;
}

MarginState Orchestrator::margin_states() const {
    std::lock_guard lock(mu_);
    return margins_locked();
}

std::vector<Event> Orchestrator::poll_events(std::uint64_t since_seq) const {
    std::lock_guard lock(mu_);
    if (events_.empty() || since_seq >= events_.back().seq) return {};
    if (since_seq + 1 < events_.front().seq) {
        Event resync;
        resync.kind = EventKind::Resync;
        resync.seq = events_.back().seq;
        resync.at_ms = clock_->now_ms();
        return {resync};
    }
    const auto first = static_cast<std::size_t>(since_seq + 1 - events_.front().seq);
    return {events_.begin() + static_cast<std::ptrdiff_t>(first), events_.end()};
}

std::vector<Event> Orchestrator::wait_events(std::uint64_t since_seq, std::chrono::milliseconds timeout) const {
    {
        std::unique_lock lock(mu_);
        events_cv_.wait_for(lock, timeout, [&] { return next_seq_ - 1 > since_seq; });
    }
    return poll_events(since_seq);
}

std::uint64_t Orchestrator::last_seq() const {
    std::lock_guard lock(mu_);
    return next_seq_ - 1;
}

void Orchestrator::wait_idle() const {
    std::unique_lock lock(mu_);
    idle_cv_.wait(lock, [this] { return !running_ && !pending_; });
}

bool Orchestrator::idle() const {
    std::lock_guard lock(mu_);
    return !running_ && !pending_;
}

std::vector<Token> Orchestrator::tokens() const {
    std::lock_guard lock(mu_);
    if (snapshots_.empty()) return {};
    return lex_scan(snapshots_.rbegin()->second.text);
}

std::shared_ptr<const Program> Orchestrator::latest_clean_program() const {
    std::lock_guard lock(mu_);
    return latest_clean_program_;
}

std::optional<int> Orchestrator::latest_clean_snapshot() const {
    std::lock_guard lock(mu_);
    return latest_clean_;
}

std::vector<Invocation> Orchestrator::invocations() const {
    std::lock_guard lock(mu_);
    return invocations_;
}

std::vector<std::int64_t> Orchestrator::parse_times() const {
    std::lock_guard lock(mu_);
    return parse_times_;
}

}  // namespace verifide
