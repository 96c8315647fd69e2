#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace scfuzz {

/// Raised for bad configuration: unknown type names, malformed lattice
/// files, arity mismatches.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scalar payloads

struct BytesLit {
    std::string data;
    bool operator==(const BytesLit&) const = default;
    auto operator<=>(const BytesLit&) const = default;
};

/// A scalar literal: integer, float, string, bytes, or boolean.
/// Equality is strict on both variant kind and value.
using Scalar = std::variant<std::int64_t, double, std::string, BytesLit, bool>;

/// Builtin type name carried by a scalar payload (long/float/str/bytes/bool).
std::string scalar_type_name(const Scalar& s);

/// Source-style literal text: 1, 1.5, 'abc', b'\x00', True.
std::string scalar_literal(const Scalar& s);

// ---------------------------------------------------------------------------
// Type lattice

enum class TypeKind { Scalar, Sequence, Mapping, Synthesized, Opaque };

std::string type_kind_name(TypeKind k);
std::optional<TypeKind> type_kind_from_name(const std::string& name);

struct TypeDescriptor {
    std::string name;
    TypeKind kind = TypeKind::Opaque;
    std::vector<std::string> bases;  // empty only for the top type
};

/// The set of known types, their inheritance relation, intrinsic attribute
/// table and multiple-inheritance conflict pairs.
///
/// Builtin content is fixed at construction; synthesized types may be
/// registered later from a single construction context (the campaign
/// thread). Queries are const and safe to share once registration stops.
class TypeLattice {
public:
    /// object, long (alias int), bool<=long, float, complex, str, bytes,
    /// list, tuple, dict, set — plus the intrinsic attribute table and the
    /// pairwise layout conflicts between the concrete builtins.
    static TypeLattice default_lattice();

    /// Applies a line-oriented override file on top of the default lattice:
    ///   type <name> <kind> : <parent>[,<parent>...]
    ///   attr <type> <key>
    ///   conflict <t1> <t2>
    static TypeLattice from_override_text(const std::string& text);

    TypeLattice() = default;

    void add_type(TypeDescriptor desc);
    void add_intrinsic(const std::string& type, const std::string& key);
    void add_conflict(const std::string& a, const std::string& b);
    std::string add_synthesized(const std::vector<std::string>& bases);

    bool has(const std::string& name) const;
    const TypeDescriptor& at(const std::string& name) const;

    /// Reflexive-transitive inheritance test. Throws ConfigError on
    /// unknown names.
    bool is_subtype(const std::string& t1, const std::string& t2) const;

    bool conflicting(const std::string& a, const std::string& b) const;

    /// All intrinsic attribute keys answerable by values of `type`,
    /// including keys inherited from supertypes.
    std::set<std::string> intrinsics_of(const std::string& type) const;

    /// The supertype whose table declares intrinsic `key` for `type`,
    /// or empty when the key is not intrinsic.
    std::string intrinsic_owner(const std::string& type, const std::string& key) const;

    /// Non-synthesized type names, sorted. The candidate pool for
    /// inheritance computation.
    std::vector<std::string> builtin_names() const;

    /// Checks the partial-order requirements: unique top `object`,
    /// every other type reachable from >=1 parent, acyclic edges,
    /// irreflexive conflict pairs, conflict-free bases on synthesized
    /// types. Throws ConfigError on violation.
    void validate() const;

    const std::map<std::string, TypeDescriptor>& types() const { return types_; }
    const std::map<std::string, std::set<std::string>>& intrinsic_table() const { return intrinsic_; }
    const std::set<std::pair<std::string, std::string>>& conflicts() const { return conflicts_; }

private:
    std::string resolve_alias(const std::string& name) const;

    std::map<std::string, TypeDescriptor> types_;
    std::map<std::string, std::set<std::string>> intrinsic_;
    std::set<std::pair<std::string, std::string>> conflicts_;  // normalized a < b
    std::map<std::string, std::string> aliases_;               // int -> long
    int synth_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Structured values

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

/// A runtime value: identity id (stands in for the heap address, never
/// reassigned), type name, materialized attributes, collection elements
/// and optional scalar payload. Member methods are attribute values whose
/// `returns` child holds the call result. Immutable after construction.
struct Value {
    std::int64_t id = 0;
    std::string type;
    std::vector<std::pair<std::string, ValuePtr>> attrs;
    std::optional<std::vector<std::pair<std::string, ValuePtr>>> elements;
    std::optional<Scalar> payload;
    ValuePtr returns;  // non-null => this value is a member method

    bool is_method() const { return returns != nullptr; }
};

/// Storage category of a type after resolving synthesized bases:
/// which of payload/elements a value of this type carries.
enum class StorageKind { Scalar, Sequence, Mapping, Opaque };

/// Allocates identity ids and owns the canonical intrinsic-stub values.
///
/// Stub ids live below 1000 and are fixed by the lattice contents;
/// fresh ids count up from 1000. One factory per campaign; id handout
/// is confined to a single construction context.
class ValueFactory {
public:
    explicit ValueFactory(const TypeLattice& lattice);

    std::int64_t fresh_id() { return next_id_++; }

    /// Canonical method stub for an intrinsic (declaring type, key) pair,
    /// or null when the pair is not in the intrinsic table.
    ValuePtr intrinsic_stub(const std::string& owner_type, const std::string& key) const;

private:
    std::map<std::pair<std::string, std::string>, ValuePtr> stubs_;
    std::int64_t next_id_ = 1000;
};

/// Lattice plus campaign-scoped value machinery. Synthesized types are
/// registered here so executions can subtype-test generated classes.
class Universe {
public:
    explicit Universe(TypeLattice lattice)
        : lattice_(std::move(lattice)), factory_(lattice_) {}

    Universe(const Universe&) = delete;
    Universe& operator=(const Universe&) = delete;

    const TypeLattice& lattice() const { return lattice_; }
    ValueFactory& factory() { return factory_; }
    const ValueFactory& factory() const { return factory_; }

    std::string add_synthesized(const std::vector<std::string>& bases) {
        return lattice_.add_synthesized(bases);
    }

    StorageKind storage_kind(const std::string& type) const;

    // Construction helpers; every call consumes one fresh id.
    ValuePtr make_scalar(const std::string& type, Scalar payload);
    ValuePtr make_scalar_default(const std::string& type);
    ValuePtr make_collection(const std::string& type,
                             std::vector<std::pair<std::string, ValuePtr>> elements);
    ValuePtr make_opaque(const std::string& type);
    ValuePtr make_method(ValuePtr result);
    ValuePtr make_object(const std::string& type,
                         std::vector<std::pair<std::string, ValuePtr>> attrs,
                         std::optional<std::vector<std::pair<std::string, ValuePtr>>> elements,
                         std::optional<Scalar> payload);

private:
    TypeLattice lattice_;
    ValueFactory factory_;
};

/// True iff `key` is an element access of the form [k] with k a decimal
/// index or quoted mapping key; `inner` receives the undecorated key.
bool parse_element_key(const std::string& key, std::string* inner);

/// Wraps a bare mapping key or decimal index into element form.
std::string element_key(const std::string& inner);

/// Materialized attribute/element lookup. Bare keys search attrs, then
/// elements, then the intrinsic table (yielding the canonical stub);
/// [k] keys search elements only.
std::optional<ValuePtr> lookup_attr(const ValuePtr& value, const std::string& key,
                                    const Universe& universe);

/// lookup_attr plus one method dereference: extraction observes a member
/// method through its result object, so records, environment bindings and
/// path walking all see the same id.
std::optional<ValuePtr> resolve_attr(const ValuePtr& value, const std::string& key,
                                     const Universe& universe);

/// Deterministic source-style rendering: scalar assignments, collection
/// literals, or class-definition listings for synthesized values.
/// Identity ids never appear in the output.
std::string render_value(const ValuePtr& value, const Universe& universe);

}  // namespace scfuzz
