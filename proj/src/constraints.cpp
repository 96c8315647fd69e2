#include "scfuzz/constraints.hpp"

#include <json.hpp>

using nlohmann::json;

namespace scfuzz {

// ---------------------------------------------------------------------------
// ObjectPath

std::string ObjectPath::text() const {
    std::string out = root;
    for (const auto& seg : segments) {
        out += '.';
        out += seg;
    }
    return out;
}

ObjectPath ObjectPath::parent() const {
    ObjectPath p{root, segments};
    if (!p.segments.empty()) p.segments.pop_back();
    return p;
}

ObjectPath ObjectPath::child(const std::string& key) const {
    ObjectPath c{root, segments};
    c.segments.push_back(key);
    return c;
}

bool ObjectPath::contains(const ObjectPath& other) const {
    if (other.root != root || other.segments.size() <= segments.size()) return false;
    for (size_t i = 0; i < segments.size(); ++i) {
        if (other.segments[i] != segments[i]) return false;
    }
    return true;
}

ObjectPath parse_path(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    int bracket = 0;
    char quote = 0;
    for (char c : text) {
        if (quote) {
            cur += c;
            if (c == quote) quote = 0;
            continue;
        }
        if (bracket && (c == '"' || c == '\'')) {
            quote = c;
            cur += c;
            continue;
        }
        if (c == '[') ++bracket;
        if (c == ']' && bracket) --bracket;
        if (c == '.' && bracket == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.empty() || parts[0].empty()) {
        throw ConfigError("bad object path '" + text + "'");
    }
    ObjectPath p;
    p.root = parts[0];
    for (size_t i = 1; i < parts.size(); ++i) {
        if (parts[i].empty()) throw ConfigError("bad object path '" + text + "'");
        p.segments.push_back(parts[i]);
    }
    return p;
}

// ---------------------------------------------------------------------------
// StructureConstraint

Quad& StructureConstraint::ensure_path(const ObjectPath& path) {
    if (!path.is_root()) {
        ObjectPath parent = path.parent();
        if (!mappings.count(parent)) ensure_path(parent);
    }
    return mappings[path];
}

bool validate_quad(const Quad& q, const TypeLattice& lattice) {
    for (const auto& t : q.t_bt) lattice.at(t);
    for (const auto& t : q.t_nbt) lattice.at(t);
    // A required supertype at or below a forbidden one leaves no
    // satisfying type; the converse direction (e.g. required long,
    // forbidden bool) is an ordinary "that type but not its subtype"
    // constraint and stays legal.
    for (const auto& t1 : q.t_bt) {
        for (const auto& t2 : q.t_nbt) {
            if (lattice.is_subtype(t1, t2)) return false;
        }
    }
    for (const auto& a : q.a_bt) {
        if (q.a_nbt.count(a)) return false;
    }
    if (q.exact_type) {
        if (!q.t_bt.count(*q.exact_type)) return false;
        if (q.forbidden_exact.count(*q.exact_type)) return false;
    }
    return true;
}

bool validate_constraint(const StructureConstraint& sc, const TypeLattice& lattice) {
    for (const auto& [path, quad] : sc.mappings) {
        if (!validate_quad(quad, lattice)) return false;
        if (!path.is_root() && !sc.mappings.count(path.parent())) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Canonical serialization

static json quad_to_json(const Quad& q) {
    json obj = json::object();
    auto put = [&obj](const char* name, const std::set<std::string>& s) {
        if (s.empty()) return;
        obj[name] = json::array();
        for (const auto& v : s) obj[name].push_back(v);
    };
    put("a_bt", q.a_bt);
    put("a_nbt", q.a_nbt);
    if (q.exact_type) obj["exact"] = *q.exact_type;
    put("forbidden_exact", q.forbidden_exact);
    put("t_bt", q.t_bt);
    put("t_nbt", q.t_nbt);
    return obj;
}

std::string canonical_key(const StructureConstraint& sc) {
    // json objects iterate in key order, so path and set ordering is
    // insertion-independent.
    json out = json::object();
    for (const auto& [path, quad] : sc.mappings) {
        if (path.is_root() && quad.empty()) continue;
        out[path.text()] = quad_to_json(quad);
    }
    return out.dump();
}

StructureConstraint constraint_from_json(const std::string& text) {
    json obj = json::parse(text);
    if (!obj.is_object()) throw ConfigError("constraint JSON must be an object");
    StructureConstraint sc;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        ObjectPath path = parse_path(it.key());
        Quad& q = sc.ensure_path(path);
        const json& j = it.value();
        if (!j.is_object()) throw ConfigError("quad for '" + it.key() + "' must be an object");
        auto read_set = [&j](const char* name, std::set<std::string>& out) {
            if (!j.contains(name)) return;
            for (const auto& v : j.at(name)) out.insert(v.get<std::string>());
        };
        read_set("t_bt", q.t_bt);
        read_set("t_nbt", q.t_nbt);
        read_set("a_bt", q.a_bt);
        read_set("a_nbt", q.a_nbt);
        read_set("forbidden_exact", q.forbidden_exact);
        if (j.contains("exact")) q.exact_type = j.at("exact").get<std::string>();
    }
    return sc;
}

// ---------------------------------------------------------------------------
// Satisfaction

namespace {

// Walks `path` from the root value, dereferencing member methods to their
// results, mirroring what attribute extraction reports.
std::optional<ValuePtr> resolve_path(const ObjectPath& path,
                                     const std::map<std::string, ValuePtr>& inputs,
                                     const Universe& universe) {
    auto it = inputs.find(path.root);
    if (it == inputs.end() || !it->second) return std::nullopt;
    ValuePtr cur = it->second;
    for (const auto& seg : path.segments) {
        auto next = resolve_attr(cur, seg, universe);
        if (!next) return std::nullopt;
        cur = *next;
    }
    return cur;
}

}  // namespace

bool satisfied_by(const StructureConstraint& sc,
                  const std::map<std::string, ValuePtr>& inputs,
                  const Universe& universe) {
    const TypeLattice& lattice = universe.lattice();
    for (const auto& [path, quad] : sc.mappings) {
        auto value = resolve_path(path, inputs, universe);
        if (!value) {
            if (path.is_root()) return false;
            if (!quad.empty()) return false;
            // Absence is fine when the parent merely forbids this key;
            // a parent a_bt demand fails at the parent itself.
            const Quad* parent = nullptr;
            auto pit = sc.mappings.find(path.parent());
            if (pit != sc.mappings.end()) parent = &pit->second;
            const std::string& key = path.segments.back();
            if (parent && parent->a_bt.count(key)) return false;
            continue;
        }
        const ValuePtr& v = *value;
        for (const auto& t : quad.t_bt) {
            if (!lattice.is_subtype(v->type, t)) return false;
        }
        for (const auto& t : quad.t_nbt) {
            if (lattice.is_subtype(v->type, t)) return false;
        }
        if (quad.exact_type && v->type != *quad.exact_type) return false;
        if (quad.forbidden_exact.count(v->type)) return false;
        for (const auto& a : quad.a_bt) {
            if (!lookup_attr(v, a, universe)) return false;
        }
        for (const auto& a : quad.a_nbt) {
            if (lookup_attr(v, a, universe)) return false;
        }
    }
    return true;
}

}  // namespace scfuzz
