#pragma once

#include <verifide/ast.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace verifide {

struct Checksum {
    std::uint64_t value = 0;

    auto operator<=>(const Checksum&) const = default;
};

/// 16 lowercase hex digits.
std::string to_hex(Checksum checksum);
std::optional<Checksum> checksum_from_hex(std::string_view hex);

/// 64-bit FNV-1a.
Checksum fnv1a(std::span<const std::uint8_t> bytes);

/// FNV-1a over the length-prefixed concatenation of the parts.
Checksum combine(std::span<const Checksum> parts);

/// Position-free, comment-free serialization of an entity: prefix notation
/// with one tag byte per node and length-prefixed children.
std::vector<std::uint8_t> canonicalize(const Program& program, const Entity& entity);

Checksum entity_checksum(const Program& program, const Entity& entity);

using DepEdges = std::map<EntityId, std::set<EntityId>>;

/// The direct-dependency relation used for checksums: the resolved call
/// graph plus an edge from every method specification to every function,
/// since function definitions form the global context of all method
/// obligations.
DepEdges dependency_edges(const Program& program);

struct DepGraph {
    std::vector<EntityId> nodes;
    DepEdges edges;
    /// Strongly connected components, dependencies before dependents.
    std::vector<std::vector<EntityId>> sccs;
};

/// Tarjan condensation. `order` fixes the DFS root order (and thereby the
/// order among independent components); nodes not listed in `order` are
/// visited afterwards in sorted order.
DepGraph condense(const DepEdges& edges, std::span<const EntityId> order = {});

using ChecksumMap = std::map<EntityId, Checksum>;

ChecksumMap dependency_checksums(const DepGraph& graph, const ChecksumMap& entity_checksums);

struct EntityFingerprint {
    EntityId id;
    Checksum entity_checksum;
    Checksum dependency_checksum;
};

/// Entity and dependency checksums for every entity, in program order.
std::vector<EntityFingerprint> fingerprint(const Program& program);

}  // namespace verifide
