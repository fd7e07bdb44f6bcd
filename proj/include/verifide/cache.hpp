#pragma once

#include <verifide/fingerprint.hpp>
#include <verifide/prover.hpp>

#include <filesystem>
#include <iosfwd>
#include <list>
#include <mutex>
#include <optional>
#include <unordered_map>

namespace verifide {

enum class Priority : std::uint8_t { Low = 0, Medium = 1, High = 2, Highest = 3 };

const char* to_string(Priority priority);

struct CacheEntry {
    EntityId entity;
    Checksum entity_checksum;
    Checksum dependency_checksum;
    Verdict verdict;
    int verified_at_snapshot = 0;
    std::int64_t duration_ms = 0;

    bool operator==(const CacheEntry&) const = default;
};

/// Per-entity verification results with LRU eviction. All operations are
/// individually atomic.
class ResultCache {
public:
    static constexpr std::size_t kDefaultCapacity = 4096;
    static constexpr std::uint16_t kFormatVersion = 1;

    explicit ResultCache(std::size_t capacity = kDefaultCapacity);

    /// The cached verdict if the entry's dependency checksum matches.
    /// Timeout verdicts never match. A hit refreshes recency.
    std::optional<Verdict> lookup(const EntityId& id, Checksum dependency_checksum);

    /// Replaces any entry for the same entity, then evicts beyond capacity.
    void store(CacheEntry entry);

    /// Highest if a lookup would hit, High without an entry, Medium if the
    /// entity checksum changed, Low otherwise.
    Priority priority_of(const EntityId& id, Checksum entity_checksum, Checksum dependency_checksum) const;

    /// Reads an entry without touching recency.
    std::optional<CacheEntry> peek(const EntityId& id) const;

    /// Most recently used first.
    std::vector<CacheEntry> entries() const;

    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }
    void clear();

    void write(std::ostream& out) const;
    /// Replaces the contents. Returns false (leaving the cache empty) on a
    /// malformed stream.
    bool read(std::istream& in);

    bool save(const std::filesystem::path& path) const;
    bool load(const std::filesystem::path& path);

private:
    struct IdHash {
        std::size_t operator()(const EntityId& id) const {
            return std::hash<std::string>{}(id.name) * 31 + static_cast<std::size_t>(id.kind);
        }
    };

    void store_locked(CacheEntry entry);

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::list<CacheEntry> lru_;
    std::unordered_map<EntityId, std::list<CacheEntry>::iterator, IdHash> index_;
};

}  // namespace verifide
