#include <verifide/fingerprint.hpp>

#include <algorithm>
#include <cstdio>
#include <functional>

namespace verifide {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// Node tags. Values are part of the checksum format; do not renumber.
enum Tag : std::uint8_t {
    kEntity = 1,
    kName = 2,
    kParam = 3,
    kTypeTag = 4,
    kRequires = 5,
    kEnsures = 6,
    kDecreases = 7,
    kBody = 8,
    kTimeLimit = 9,
    kReturns = 10,
    kParams = 11,

    kIntLit = 20,
    kBoolLit = 21,
    kVar = 22,
    kUnary = 23,
    kBinary = 24,
    kIndex = 25,
    kLength = 26,
    kCall = 27,
    kOld = 28,
    kForall = 29,
    kIte = 30,

    kVarDecl = 40,
    kAssign = 41,
    kArrayAssign = 42,
    kCallStmt = 43,
    kIf = 44,
    kWhile = 45,
    kAssert = 46,
    kAssume = 47,
    kReturn = 48,
    kBlock = 49,
    kInvariant = 50,
};

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }

    // Writes `tag`, a u32 length placeholder, the children, then patches the length.
    template <typename Fn>
    void node(std::uint8_t tag, Fn&& children) {
        u8(tag);
        const std::size_t at = out_.size();
        u32(0);
        children();
        const auto len = static_cast<std::uint32_t>(out_.size() - at - 4);
        for (int i = 0; i < 4; ++i) out_[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(len >> (8 * i));
    }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    std::vector<std::uint8_t> out_;
};

void write_expr(Writer& w, const Expr& e);

void write_exprs(Writer& w, std::uint8_t tag, const std::vector<ExprPtr>& list) {
    w.node(tag, [&] {
        for (const ExprPtr& e : list) write_expr(w, *e);
    });
}

void write_expr(Writer& w, const Expr& e) {
    switch (e.kind) {
        case ExprKind::IntLit:
            w.node(kIntLit, [&] { w.u64(static_cast<std::uint64_t>(e.int_value)); });
            return;
        case ExprKind::BoolLit:
            w.node(kBoolLit, [&] { w.u8(e.bool_value ? 1 : 0); });
            return;
        case ExprKind::Name:
            w.node(kVar, [&] { w.str(e.name); });
            return;
        case ExprKind::Unary:
            w.node(kUnary, [&] {
                w.u8(static_cast<std::uint8_t>(e.unary_op));
                write_expr(w, *e.operands[0]);
            });
            return;
        case ExprKind::Binary:
            w.node(kBinary, [&] {
                w.u8(static_cast<std::uint8_t>(e.binary_op));
                write_expr(w, *e.operands[0]);
                write_expr(w, *e.operands[1]);
            });
            return;
        case ExprKind::Index:
            w.node(kIndex, [&] {
                write_expr(w, *e.operands[0]);
                write_expr(w, *e.operands[1]);
            });
            return;
        case ExprKind::Length:
            w.node(kLength, [&] { write_expr(w, *e.operands[0]); });
            return;
        case ExprKind::Call:
            w.node(kCall, [&] {
                w.str(e.name);
                for (const ExprPtr& arg : e.operands) write_expr(w, *arg);
            });
            return;
        case ExprKind::Old:
            w.node(kOld, [&] { write_expr(w, *e.operands[0]); });
            return;
        case ExprKind::Forall:
            w.node(kForall, [&] {
                w.str(e.name);
                for (const ExprPtr& op : e.operands) write_expr(w, *op);
            });
            return;
        case ExprKind::Ite:
            w.node(kIte, [&] {
                for (const ExprPtr& op : e.operands) write_expr(w, *op);
            });
            return;
    }
}

void write_block(Writer& w, const std::vector<Stmt>& block);

void write_stmt(Writer& w, const Stmt& s) {
    auto targets = [&] {
        for (const std::string& t : s.targets) w.str(t);
    };
    switch (s.kind) {
        case StmtKind::VarDecl:
            w.node(kVarDecl, [&] {
                targets();
                w.u8(s.declared_type ? static_cast<std::uint8_t>(*s.declared_type) + 1 : 0);
                write_expr(w, *s.expr);
            });
            return;
        case StmtKind::Assign:
            w.node(kAssign, [&] {
                w.node(kBlock, targets);
                write_expr(w, *s.expr);
            });
            return;
        case StmtKind::ArrayAssign:
            w.node(kArrayAssign, [&] {
                targets();
                write_expr(w, *s.index);
                write_expr(w, *s.expr);
            });
            return;
        case StmtKind::Call:
            w.node(kCallStmt, [&] { write_expr(w, *s.expr); });
            return;
        case StmtKind::If:
            w.node(kIf, [&] {
                write_expr(w, *s.expr);
                write_block(w, s.body);
                w.u8(s.has_else ? 1 : 0);
                write_block(w, s.else_body);
            });
            return;
        case StmtKind::While:
            w.node(kWhile, [&] {
                write_expr(w, *s.expr);
                write_exprs(w, kInvariant, s.invariants);
                write_exprs(w, kDecreases, s.decreases);
                write_block(w, s.body);
            });
            return;
        case StmtKind::Assert:
            w.node(kAssert, [&] { write_expr(w, *s.expr); });
            return;
        case StmtKind::Assume:
            w.node(kAssume, [&] { write_expr(w, *s.expr); });
            return;
        case StmtKind::Return:
            w.node(kReturn, [] {});
            return;
    }
}

void write_block(Writer& w, const std::vector<Stmt>& block) {
    w.node(kBlock, [&] {
        for (const Stmt& s : block) write_stmt(w, s);
    });
}

void write_params(Writer& w, std::uint8_t tag, const std::vector<Param>& params) {
    w.node(tag, [&] {
        for (const Param& p : params) {
            w.node(kParam, [&] {
                w.str(p.name);
                w.u8(static_cast<std::uint8_t>(p.type));
            });
        }
    });
}

void write_time_limit(Writer& w, const std::optional<int>& limit) {
    w.node(kTimeLimit, [&] {
        if (limit) w.u64(static_cast<std::uint64_t>(*limit));
    });
}

}  // namespace

std::string to_hex(Checksum checksum) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum.value));
    return buf;
}

std::optional<Checksum> checksum_from_hex(std::string_view hex) {
    if (hex.size() != 16) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : hex) {
        v <<= 4;
        if (c >= '0' && c <= '9') {
            v |= static_cast<std::uint64_t>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            v |= static_cast<std::uint64_t>(c - 'a' + 10);
        } else {
            return std::nullopt;
        }
    }
    return Checksum{v};
}

Checksum fnv1a(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = kFnvOffset;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
    return Checksum{h};
}

Checksum combine(std::span<const Checksum> parts) {
    Writer w;
    w.u64(parts.size());
    for (const Checksum& c : parts) {
        w.u8(8);
        w.u64(c.value);
    }
    const std::vector<std::uint8_t> bytes = w.take();
    return fnv1a(bytes);
}

std::vector<std::uint8_t> canonicalize(const Program& program, const Entity& entity) {
    Writer w;
    w.node(kEntity, [&] {
        w.u8(static_cast<std::uint8_t>(entity.id.kind));
        w.node(kName, [&] { w.str(entity.id.name); });
        if (entity.decl.kind == DeclKind::Function) {
            const FunctionDecl& fn = program.functions[entity.decl.index];
            write_time_limit(w, fn.time_limit_s);
            write_params(w, kParams, fn.params);
            w.node(kTypeTag, [&] { w.u8(static_cast<std::uint8_t>(fn.result)); });
            write_exprs(w, kRequires, fn.requires_);
            write_exprs(w, kDecreases, fn.decreases);
            w.node(kBody, [&] { write_expr(w, *fn.body); });
            return;
        }
        const MethodDecl& m = program.methods[entity.decl.index];
        write_time_limit(w, m.time_limit_s);
        if (entity.id.kind == EntityKind::MethodSpec) {
            write_params(w, kParams, m.params);
            write_params(w, kReturns, m.returns);
            write_exprs(w, kRequires, m.requires_);
            write_exprs(w, kEnsures, m.ensures);
            write_exprs(w, kDecreases, m.decreases);
        } else {
            w.node(kBody, [&] { write_block(w, m.body); });
        }
    });
    return w.take();
}

Checksum entity_checksum(const Program& program, const Entity& entity) {
    const std::vector<std::uint8_t> bytes = canonicalize(program, entity);
    return fnv1a(bytes);
}

DepEdges dependency_edges(const Program& program) {
    DepEdges edges = program.call_graph;
    for (const Entity& e : program.entities) edges[e.id];
    for (const Entity& spec : program.entities) {
        if (spec.id.kind != EntityKind::MethodSpec) continue;
        for (const Entity& fn : program.entities) {
            if (fn.id.kind == EntityKind::FunctionDef) edges[spec.id].insert(fn.id);
        }
    }
    return edges;
}

DepGraph condense(const DepEdges& edges, std::span<const EntityId> order) {
    DepGraph graph;
    graph.edges = edges;
    std::set<EntityId> all;
    for (const auto& [from, tos] : edges) {
        all.insert(from);
        all.insert(tos.begin(), tos.end());
    }
    for (const EntityId& id : order) {
        if (all.count(id) && std::find(graph.nodes.begin(), graph.nodes.end(), id) == graph.nodes.end()) {
            graph.nodes.push_back(id);
        }
    }
    for (const EntityId& id : all) {
        if (std::find(graph.nodes.begin(), graph.nodes.end(), id) == graph.nodes.end()) graph.nodes.push_back(id);
    }

    std::map<EntityId, int> index;
    std::map<EntityId, int> lowlink;
    std::set<EntityId> on_stack;
    std::vector<EntityId> stack;
    int counter = 0;
    static const std::set<EntityId> kNone;

    std::function<void(const EntityId&)> visit = [&](const EntityId& v) {
        index[v] = lowlink[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        auto it = graph.edges.find(v);
        const std::set<EntityId>& succ = it == graph.edges.end() ? kNone : it->second;
        for (const EntityId& w : succ) {
            if (!index.count(w)) {
                visit(w);
                lowlink[v] = std::min(lowlink[v], lowlink[w]);
            } else if (on_stack.count(w)) {
                lowlink[v] = std::min(lowlink[v], index[w]);
            }
        }
        if (lowlink[v] == index[v]) {
            std::vector<EntityId> component;
            EntityId w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                component.push_back(w);
            } while (!(w == v));
            std::sort(component.begin(), component.end());
            graph.sccs.push_back(std::move(component));
        }
    };
    for (const EntityId& v : graph.nodes) {
        if (!index.count(v)) visit(v);
    }
    return graph;
}

ChecksumMap dependency_checksums(const DepGraph& graph, const ChecksumMap& entity_checksums) {
    ChecksumMap dep;
    static const std::set<EntityId> kNone;
    auto succ = [&](const EntityId& id) -> const std::set<EntityId>& {
        auto it = graph.edges.find(id);
        return it == graph.edges.end() ? kNone : it->second;
    };
    for (const std::vector<EntityId>& component : graph.sccs) {
        const EntityId& first = component.front();
        const bool cyclic = component.size() > 1 || succ(first).count(first) > 0;
        if (!cyclic) {
            std::vector<Checksum> parts{entity_checksums.at(first)};
            for (const EntityId& d : succ(first)) parts.push_back(dep.at(d));  // std::set: sorted by id
            dep[first] = combine(parts);
            continue;
        }
        const std::set<EntityId> members(component.begin(), component.end());
        std::set<EntityId> outside;
        for (const EntityId& e : component) {
            for (const EntityId& d : succ(e)) {
                if (!members.count(d)) outside.insert(d);
            }
        }
        std::vector<Checksum> group_parts{Checksum{component.size()}};
        for (const EntityId& e : members) group_parts.push_back(entity_checksums.at(e));
        for (const EntityId& d : outside) group_parts.push_back(dep.at(d));
        const Checksum group = combine(group_parts);
        for (const EntityId& e : component) {
            const Checksum pair[] = {entity_checksums.at(e), group};
            dep[e] = combine(pair);
        }
    }
    return dep;
}

std::vector<EntityFingerprint> fingerprint(const Program& program) {
    ChecksumMap ecs;
    std::vector<EntityId> order;
    for (const Entity& e : program.entities) {
        ecs[e.id] = entity_checksum(program, e);
        order.push_back(e.id);
    }
    const DepGraph graph = condense(dependency_edges(program), order);
    const ChecksumMap deps = dependency_checksums(graph, ecs);
    std::vector<EntityFingerprint> out;
    for (const Entity& e : program.entities) out.push_back({e.id, ecs.at(e.id), deps.at(e.id)});
    return out;
}

}  // namespace verifide
