#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scfuzz/value_model.hpp"

namespace scfuzz {

/// An input object or one of its (possibly nested) attributes: a root
/// argument name plus attribute-key segments. Element segments keep their
/// [k] decoration.
struct ObjectPath {
    std::string root;
    std::vector<std::string> segments;

    std::string text() const;
    bool is_root() const { return segments.empty(); }
    ObjectPath parent() const;
    ObjectPath child(const std::string& key) const;

    /// True iff `other` extends this path by one or more segments.
    bool contains(const ObjectPath& other) const;

    bool operator==(const ObjectPath&) const = default;
    bool operator<(const ObjectPath& o) const { return text() < o.text(); }
};

/// Parses dotted path text (segments split on '.' outside [..] brackets).
ObjectPath parse_path(const std::string& text);

/// Required/forbidden supertypes and required/forbidden attribute keys for
/// one object path. `exact_type` additionally pins the type name itself;
/// `forbidden_exact` forbids name equality without constraining inheritance.
struct Quad {
    std::set<std::string> t_bt;
    std::set<std::string> t_nbt;
    std::set<std::string> a_bt;
    std::set<std::string> a_nbt;
    std::optional<std::string> exact_type;
    std::set<std::string> forbidden_exact;

    bool empty() const {
        return t_bt.empty() && t_nbt.empty() && a_bt.empty() && a_nbt.empty() &&
               !exact_type && forbidden_exact.empty();
    }
    bool operator==(const Quad&) const = default;
};

/// A conjunction of path -> quad mappings plus the identity bindings that
/// tie trace object ids to paths. Bindings are construction state and never
/// serialize.
struct StructureConstraint {
    std::map<ObjectPath, Quad> mappings;
    std::map<std::int64_t, ObjectPath> bindings;

    Quad& ensure_path(const ObjectPath& path);
    bool operator==(const StructureConstraint& o) const { return mappings == o.mappings; }
};

/// True iff the quad is well-formed in `lattice`: no required supertype
/// lies at-or-below a forbidden one (which would make every satisfying
/// type violate the forbidden set), attribute sets are disjoint, and the
/// exact pins are consistent. Unknown type names raise ConfigError.
bool validate_quad(const Quad& q, const TypeLattice& lattice);

bool validate_constraint(const StructureConstraint& sc, const TypeLattice& lattice);

/// Deterministic serialization used for both deduplication and reporting:
/// a JSON object keyed by path text (sorted), quads as sorted arrays with
/// empty fields omitted. Root paths with empty quads carry no information
/// and are omitted. Identity bindings are excluded.
std::string canonical_key(const StructureConstraint& sc);

/// canonical_key's JSON, as parseable text --> constraint.
StructureConstraint constraint_from_json(const std::string& text);

/// The literal satisfaction semantics: every mapped path must resolve to a
/// value whose type meets the quad's type sets and exact pins and whose
/// attribute table meets a_bt/a_nbt. An unresolvable path falsifies the
/// constraint unless its quad is empty and its key is only demanded absent.
bool satisfied_by(const StructureConstraint& sc,
                  const std::map<std::string, ValuePtr>& inputs,
                  const Universe& universe);

}  // namespace scfuzz
