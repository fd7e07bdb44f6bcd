#include <verifide/cache.hpp>

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

namespace verifide {

const char* to_string(Priority priority) {
    switch (priority) {
        case Priority::Low: return "Low";
        case Priority::Medium: return "Medium";
        case Priority::High: return "High";
        case Priority::Highest: return "Highest";
    }
    return "Low";
}

ResultCache::ResultCache(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

std::optional<Verdict> ResultCache::lookup(const EntityId& id, Checksum dependency_checksum) {
    std::lock_guard lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    const CacheEntry& e = *it->second;
    if (e.dependency_checksum != dependency_checksum || e.verdict.kind == Verdict::Kind::Timeout) return std::nullopt;
    lru_.splice(lru_.begin(), lru_, it->second);
    return e.verdict;
}

void ResultCache::store(CacheEntry entry) {
    std::lock_guard lock(mutex_);
    store_locked(std::move(entry));
}

void ResultCache::store_locked(CacheEntry entry) {
    auto it = index_.find(entry.entity);
    if (it != index_.end()) {
        lru_.erase(it->second);
        index_.erase(it);
    }
    lru_.push_front(std::move(entry));
    index_[lru_.front().entity] = lru_.begin();
    while (lru_.size() > capacity_) {
        index_.erase(lru_.back().entity);
        lru_.pop_back();
    }
}

Priority ResultCache::priority_of(const EntityId& id, Checksum entity_checksum, Checksum dependency_checksum) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) return Priority::High;
    const CacheEntry& e = *it->second;
    if (e.dependency_checksum == dependency_checksum && e.verdict.kind != Verdict::Kind::Timeout) {
        return Priority::Highest;
    }
    if (e.entity_checksum != entity_checksum) return Priority::Medium;
    return Priority::Low;
}

std::optional<CacheEntry> ResultCache::peek(const EntityId& id) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return *it->second;
}

std::vector<CacheEntry> ResultCache::entries() const {
    std::lock_guard lock(mutex_);
    return {lru_.begin(), lru_.end()};
}

std::size_t ResultCache::size() const {
    std::lock_guard lock(mutex_);
    return lru_.size();
}

void ResultCache::clear() {
    std::lock_guard lock(mutex_);
    lru_.clear();
    index_.clear();
}

// ---- persistence ----

namespace {

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
    void u16(std::uint16_t v) { uint(v, 2); }
    void u32(std::uint32_t v) { uint(v, 4); }
    void u64(std::uint64_t v) { uint(v, 8); }
    void i64(std::int64_t v) { uint(static_cast<std::uint64_t>(v), 8); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void span(const Span& s) {
        for (int v : {s.start_line, s.start_col, s.end_line, s.end_col}) u32(static_cast<std::uint32_t>(v));
    }
    void value(const Value& v) {
        u8(static_cast<std::uint8_t>(v.kind));
        switch (v.kind) {
            case Value::Kind::Int: i64(v.integer); break;
            case Value::Kind::Bool: u8(v.boolean ? 1 : 0); break;
            case Value::Kind::Array:
                u32(static_cast<std::uint32_t>(v.elements.size()));
                for (std::int64_t x : v.elements) i64(x);
                break;
        }
    }
    void error(const VerificationError& e) {
        str(e.message);
        span(e.error_span);
        u32(static_cast<std::uint32_t>(e.related_spans.size()));
        for (const Span& s : e.related_spans) span(s);
        u32(static_cast<std::uint32_t>(e.trace.states.size()));
        for (const TraceState& st : e.trace.states) {
            span(st.location);
            u32(static_cast<std::uint32_t>(st.bindings.size()));
            for (const Binding& b : st.bindings) {
                str(b.name);
                value(b.value);
            }
        }
    }

private:
    void uint(std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    bool ok() const { return ok_; }

    std::uint8_t u8() { return static_cast<std::uint8_t>(uint(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(uint(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
    std::uint64_t u64() { return uint(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(uint(8)); }
    std::string str() {
        const std::uint32_t n = count();
        std::string s(n, '\0');
        if (n && !in_.read(s.data(), n)) ok_ = false;
        return s;
    }
    Span span() {
        Span s;
        s.start_line = static_cast<int>(u32());
        s.start_col = static_cast<int>(u32());
        s.end_line = static_cast<int>(u32());
        s.end_col = static_cast<int>(u32());
        return s;
    }
    Value value() {
        const std::uint8_t kind = u8();
        switch (kind) {
            case 0: return Value::of_int(i64());
            case 1: return Value::of_bool(u8() != 0);
            case 2: {
                std::vector<std::int64_t> elems(count());
                for (auto& x : elems) x = i64();
                return Value::of_array(std::move(elems));
            }
            default: ok_ = false; return {};
        }
    }
    VerificationError error() {
        VerificationError e;
        e.message = str();
        e.error_span = span();
        e.related_spans.resize(count());
        for (Span& s : e.related_spans) s = span();
        e.trace.states.resize(count());
        for (TraceState& st : e.trace.states) {
            st.location = span();
            st.bindings.resize(count());
            for (Binding& b : st.bindings) {
                b.name = str();
                b.value = value();
            }
        }
        return e;
    }

    // Sizes are capped so a corrupt file cannot trigger huge allocations.
    std::uint32_t count() {
        const std::uint32_t n = u32();
        if (n > (1u << 24)) {
            ok_ = false;
            return 0;
        }
        return ok_ ? n : 0;
    }

private:
    std::uint64_t uint(int bytes) {
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) {
            const int c = in_.get();
            if (c == EOF) {
                ok_ = false;
                return 0;
            }
            v |= static_cast<std::uint64_t>(c) << (8 * i);
        }
        return v;
    }

    std::istream& in_;
    bool ok_ = true;
};

constexpr std::array<char, 4> kMagic{'M', 'S', 'P', 'C'};

}  // namespace

void ResultCache::write(std::ostream& out) const {
    std::lock_guard lock(mutex_);
    Writer w(out);
    out.write(kMagic.data(), kMagic.size());
    w.u16(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(lru_.size()));
    // Least recent first so that reading restores the recency order.
    for (auto it = lru_.rbegin(); it != lru_.rend(); ++it) {
        w.str(it->entity.name);
        w.u8(static_cast<std::uint8_t>(it->entity.kind));
        w.u64(it->entity_checksum.value);
        w.u64(it->dependency_checksum.value);
        w.u8(static_cast<std::uint8_t>(it->verdict.kind));
        if (it->verdict.kind == Verdict::Kind::Failed) {
            w.u32(static_cast<std::uint32_t>(it->verdict.errors.size()));
            for (const VerificationError& e : it->verdict.errors) w.error(e);
        }
        w.u32(static_cast<std::uint32_t>(it->duration_ms));
    }
}

bool ResultCache::read(std::istream& in) {
    std::lock_guard lock(mutex_);
    lru_.clear();
    index_.clear();
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) return false;
    Reader r(in);
    if (r.u16() != kFormatVersion) return false;
    const std::uint32_t n = r.count();
    std::vector<CacheEntry> loaded;
    for (std::uint32_t i = 0; i < n && r.ok(); ++i) {
        CacheEntry e;
        e.entity.name = r.str();
        const std::uint8_t kind = r.u8();
        if (kind > static_cast<std::uint8_t>(EntityKind::MethodBody)) return false;
        e.entity.kind = static_cast<EntityKind>(kind);
        e.entity_checksum.value = r.u64();
        e.dependency_checksum.value = r.u64();
        const std::uint8_t tag = r.u8();
        if (tag > static_cast<std::uint8_t>(Verdict::Kind::Timeout)) return false;
        e.verdict.kind = static_cast<Verdict::Kind>(tag);
        if (e.verdict.kind == Verdict::Kind::Failed) {
            e.verdict.errors.resize(r.count());
            for (VerificationError& err : e.verdict.errors) err = r.error();
        }
        e.duration_ms = r.u32();
        loaded.push_back(std::move(e));
    }
    if (!r.ok()) return false;
    for (CacheEntry& e : loaded) store_locked(std::move(e));
    return true;
}

bool ResultCache::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    write(out);
    return static_cast<bool>(out);
}

bool ResultCache::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    return read(in);
}

}  // namespace verifide
