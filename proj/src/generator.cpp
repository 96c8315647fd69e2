#include "scfuzz/generator.hpp"

#include <algorithm>

namespace scfuzz {

// ---------------------------------------------------------------------------
// ValueSet

ValueSet::ValueSet() {
    for (std::int64_t v : {0, 1, -1}) entries_.push_back({Scalar{v}, Origin::Default});
    entries_.push_back({Scalar{0.0}, Origin::Default});
    entries_.push_back({Scalar{1.5}, Origin::Default});
    entries_.push_back({Scalar{std::string{}}, Origin::Default});
    entries_.push_back({Scalar{std::string{"abc"}}, Origin::Default});
}

void ValueSet::add(Scalar value, Origin origin) {
    entries_.push_back({std::move(value), origin});
}

bool ValueSet::has_harvested() const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [](const Entry& e) { return e.origin != Origin::Default; });
}

static Scalar type_constant(const std::string& type) {
    if (type == "long") return Scalar{std::int64_t{1}};
    if (type == "bool") return Scalar{true};
    if (type == "float") return Scalar{1.5};
    if (type == "bytes") return Scalar{BytesLit{}};
    return Scalar{std::string{"abc"}};
}

Scalar ValueSet::draw_typed(const std::string& type, Rng& rng) const {
    std::vector<const Entry*> harvested, defaults;
    for (const auto& e : entries_) {
        if (scalar_type_name(e.value) != type) continue;
        (e.origin == Origin::Default ? defaults : harvested).push_back(&e);
    }
    const auto& pool = harvested.empty() ? defaults : harvested;
    if (pool.empty()) return type_constant(type);
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)]->value;
}

Scalar ValueSet::draw_any(Rng& rng) const {
    std::vector<const Entry*> harvested, defaults;
    for (const auto& e : entries_) {
        (e.origin == Origin::Default ? defaults : harvested).push_back(&e);
    }
    const auto& pool = harvested.empty() ? defaults : harvested;
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)]->value;
}

// ---------------------------------------------------------------------------
// Topological ordering

std::vector<ObjectPath> topo_order(const StructureConstraint& sc) {
    // Containment is the prefix relation, so sorting by descending depth
    // with lexicographic ties gives every child before its ancestors and a
    // deterministic order overall.
    std::vector<ObjectPath> paths;
    for (const auto& [path, quad] : sc.mappings) paths.push_back(path);
    std::stable_sort(paths.begin(), paths.end(), [](const ObjectPath& a, const ObjectPath& b) {
        if (a.segments.size() != b.segments.size()) {
            return a.segments.size() > b.segments.size();
        }
        return a.text() < b.text();
    });
    return paths;
}

// ---------------------------------------------------------------------------
// Inherit sets

std::set<std::string> compute_inherits(const Quad& quad, const TypeLattice& lattice) {
    std::set<std::string> pool;
    for (const auto& name : lattice.builtin_names()) {
        bool excluded = false;
        for (const auto& t : quad.t_nbt) {
            if (lattice.is_subtype(name, t)) {
                excluded = true;
                break;
            }
        }
        if (!excluded) pool.insert(name);
    }
    if (!quad.t_bt.empty()) {
        std::set<std::string> kept;
        for (const auto& t : quad.t_bt) {
            if (pool.count(t)) kept.insert(t);
        }
        // Every required supertype must survive; one excluded by the
        // forbidden set (or unknown among the builtins) cannot be
        // inherited at all.
        if (kept.size() != quad.t_bt.size()) {
            throw UnsatisfiableSC("a required supertype is excluded");
        }
        pool = std::move(kept);
    }
    if (pool.empty()) {
        throw UnsatisfiableSC("no builtin type satisfies the inheritance constraints");
    }
    return pool;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

bool is_dunder(const std::string& key) {
    return key.size() > 4 && key.rfind("__", 0) == 0 && key.find("__", key.size() - 2) != std::string::npos;
}

struct Gen {
    const StructureConstraint& sc;
    const ValueSet& values;
    Rng& rng;
    Universe& universe;
    std::map<ObjectPath, ValuePtr> attrimap{};

    // Keys that must be materialized on `path`: required attributes plus
    // children carrying their own constraints.
    std::vector<std::string> attach_keys(const ObjectPath& path, const Quad& quad) const {
        std::set<std::string> keys(quad.a_bt.begin(), quad.a_bt.end());
        for (const auto& [p, q] : sc.mappings) {
            if (p.segments.size() == path.segments.size() + 1 && path.contains(p) && !q.empty()) {
                keys.insert(p.segments.back());
            }
        }
        for (const auto& k : keys) {
            if (quad.a_nbt.count(k)) {
                throw UnsatisfiableSC("attribute '" + k + "' is both required and forbidden");
            }
        }
        return {keys.begin(), keys.end()};
    }

    ValuePtr child_value(const ObjectPath& path, const std::string& key) {
        auto it = attrimap.find(path.child(key));
        if (it != attrimap.end()) return it->second;
        return universe.make_scalar("long", values.draw_typed("long", rng));
    }

    bool quad_holds_for(const Quad& quad, const ValuePtr& v) const {
        StructureConstraint probe;
        probe.mappings[ObjectPath{"probe", {}}] = quad;
        return satisfied_by(probe, {{"probe", v}}, universe);
    }

    void check_forbidden_attrs(const Quad& quad, const std::vector<std::string>& bases) const {
        for (const auto& base : bases) {
            auto intr = universe.lattice().intrinsics_of(base);
            for (const auto& k : quad.a_nbt) {
                if (intr.count(k)) {
                    throw UnsatisfiableSC("attribute '" + k + "' is intrinsic to required base '" +
                                          base + "'");
                }
            }
        }
    }

    StorageKind combined_storage(const std::vector<std::string>& bases) const {
        for (const auto& b : bases) {
            StorageKind sk = universe.storage_kind(b);
            if (sk == StorageKind::Sequence || sk == StorageKind::Mapping) return sk;
        }
        for (const auto& b : bases) {
            if (universe.storage_kind(b) == StorageKind::Scalar) return StorageKind::Scalar;
        }
        return StorageKind::Opaque;
    }

    ValuePtr build_bare(const std::string& type) {
        StorageKind sk = universe.storage_kind(type);
        if (sk == StorageKind::Scalar) {
            if (type == "complex") return universe.make_object(type, {}, std::nullopt, std::nullopt);
            return universe.make_scalar(type, values.draw_typed(type, rng));
        }
        if (sk == StorageKind::Opaque) return universe.make_opaque(type);
        return universe.make_collection(type, {});
    }

    ValuePtr build_value(const ObjectPath& path, const Quad& quad) {
        const TypeLattice& lattice = universe.lattice();

        // A dunder child with no type demands becomes the member variable a
        // synthesized method returns; integers are the default payload.
        if (!path.is_root() && is_dunder(path.segments.back()) && quad.t_bt.empty() &&
            quad.a_bt.empty() && !quad.exact_type) {
            bool long_ok = true;
            for (const auto& t : quad.t_nbt) {
                if (lattice.is_subtype("long", t)) long_ok = false;
            }
            if (long_ok && quad.a_nbt.empty()) {
                return universe.make_scalar("long", values.draw_typed("long", rng));
            }
        }

        std::vector<std::string> attach = attach_keys(path, quad);
        bool wants_elements = false;
        for (const auto& key : attach) {
            if (parse_element_key(key, nullptr)) wants_elements = true;
        }

        if (quad.exact_type) {
            // The pin fixes the type name, so it alone must carry every
            // inheritance requirement.
            const std::string& type = *quad.exact_type;
            for (const auto& t : quad.t_bt) {
                if (!lattice.is_subtype(type, t)) {
                    throw UnsatisfiableSC("exact type '" + type + "' does not inherit '" + t +
                                          "'");
                }
            }
            for (const auto& t : quad.t_nbt) {
                if (lattice.is_subtype(type, t)) {
                    throw UnsatisfiableSC("exact type '" + type + "' inherits forbidden '" + t +
                                          "'");
                }
            }
            check_forbidden_attrs(quad, {type});
            StorageKind sk = universe.storage_kind(type);
            std::vector<std::pair<std::string, ValuePtr>> elements;
            for (const auto& key : attach) {
                std::string inner;
                if (parse_element_key(key, &inner) ||
                    (sk == StorageKind::Mapping && !is_dunder(key))) {
                    if (sk != StorageKind::Sequence && sk != StorageKind::Mapping) {
                        throw UnsatisfiableSC("element key '" + key + "' on exact builtin '" +
                                              type + "'");
                    }
                    if (inner.empty()) inner = key;
                    elements.emplace_back(inner, child_value(path, key));
                    continue;
                }
                // Member lookups on an exact builtin can only be answered
                // by its intrinsic table.
                std::string owner = lattice.intrinsic_owner(type, key);
                ValuePtr stub = owner.empty() ? nullptr : universe.factory().intrinsic_stub(owner, key);
                auto child = sc.mappings.find(path.child(key));
                if (!stub || (child != sc.mappings.end() &&
                              !quad_holds_for(child->second, stub->returns))) {
                    throw UnsatisfiableSC("exact type '" + type + "' cannot carry attribute '" +
                                          key + "'");
                }
            }
            std::optional<Scalar> payload;
            if (sk == StorageKind::Scalar && type != "complex") {
                payload = values.draw_typed(type, rng);
            }
            return universe.make_object(type, {}, std::optional(std::move(elements)),
                                        std::move(payload));
        }

        std::set<std::string> inherits = compute_inherits(quad, lattice);

        std::vector<std::string> bases;
        if (!quad.t_bt.empty()) {
            bases.assign(inherits.begin(), inherits.end());
            for (size_t i = 0; i < bases.size(); ++i) {
                for (size_t j = i + 1; j < bases.size(); ++j) {
                    if (lattice.conflicting(bases[i], bases[j])) {
                        throw UnsatisfiableSC("required bases '" + bases[i] + "' and '" +
                                              bases[j] + "' conflict");
                    }
                }
            }
            check_forbidden_attrs(quad, bases);
            if (wants_elements) {
                StorageKind sk = combined_storage(bases);
                if (sk != StorageKind::Sequence && sk != StorageKind::Mapping) {
                    throw UnsatisfiableSC("element constraints need a collection base");
                }
            }
        } else {
            std::vector<std::string> candidates;
            for (const auto& name : inherits) {
                auto intr = lattice.intrinsics_of(name);
                bool ok = true;
                for (const auto& k : quad.a_nbt) {
                    if (intr.count(k)) ok = false;
                }
                if (ok && wants_elements) {
                    StorageKind sk = universe.storage_kind(name);
                    if (sk != StorageKind::Sequence && sk != StorageKind::Mapping) ok = false;
                }
                if (ok) candidates.push_back(name);
            }
            if (candidates.empty()) {
                throw UnsatisfiableSC("no builtin base avoids the forbidden attributes");
            }
            std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
            bases.push_back(candidates[pick(rng)]);
        }

        bool bare_ok = attach.empty() && bases.size() == 1 &&
                       !quad.forbidden_exact.count(bases[0]);
        if (bare_ok) return build_bare(bases[0]);

        // Synthesized class over the chosen bases.
        std::string synth = universe.add_synthesized(bases);
        StorageKind sk = combined_storage(bases);
        std::vector<std::pair<std::string, ValuePtr>> attrs;
        std::vector<std::pair<std::string, ValuePtr>> elements;
        for (const auto& key : attach) {
            std::string inner;
            if (parse_element_key(key, &inner)) {
                elements.emplace_back(inner, child_value(path, key));
            } else if (is_dunder(key)) {
                attrs.emplace_back(key, universe.make_method(child_value(path, key)));
            } else if (sk == StorageKind::Mapping) {
                elements.emplace_back(key, child_value(path, key));
            } else {
                attrs.emplace_back(key, child_value(path, key));
            }
        }
        std::optional<Scalar> payload;
        if (sk == StorageKind::Scalar) {
            for (const auto& b : bases) {
                if (universe.storage_kind(b) == StorageKind::Scalar && b != "complex") {
                    payload = values.draw_typed(b, rng);
                    break;
                }
            }
        }
        return universe.make_object(synth, std::move(attrs),
                                    sk == StorageKind::Sequence || sk == StorageKind::Mapping
                                        ? std::optional(std::move(elements))
                                        : std::nullopt,
                                    std::move(payload));
    }
};

}  // namespace

std::map<std::string, ValuePtr> generate(const StructureConstraint& sc, const ValueSet& values,
                                         Rng& rng, Universe& universe) {
    Gen gen{sc, values, rng, universe};
    for (const auto& path : topo_order(sc)) {
        gen.attrimap[path] = gen.build_value(path, sc.mappings.at(path));
    }
    std::map<std::string, ValuePtr> roots;
    for (const auto& [path, quad] : sc.mappings) {
        if (path.is_root()) roots[path.root] = gen.attrimap.at(path);
    }
    return roots;
}

}  // namespace scfuzz
