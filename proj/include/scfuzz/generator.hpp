#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "scfuzz/constraints.hpp"
#include "scfuzz/value_model.hpp"

namespace scfuzz {

/// No structured value can meet the constraint (conflicting bases, a
/// forbidden intrinsic attribute, an empty inherit set, ...).
struct UnsatisfiableSC : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// The pool of scalar literals used for payloads and baseline inputs.
/// Harvested entries (source literals, corpus scalars) are preferred;
/// the injected defaults (0, 1, -1, 0.0, 1.5, '', 'abc') back them up so
/// the pool is never empty.
class ValueSet {
public:
    enum class Origin { Default, SourceLiteral, Corpus };

    ValueSet();  // defaults only

    void add(Scalar value, Origin origin);

    /// A scalar whose payload type matches the builtin `type` (long, bool,
    /// float, str, bytes). Harvested entries win; defaults fill gaps; a
    /// fixed per-type constant is the last resort.
    Scalar draw_typed(const std::string& type, Rng& rng) const;

    /// Any harvested scalar; defaults only when nothing was harvested.
    Scalar draw_any(Rng& rng) const;

    size_t size() const { return entries_.size(); }
    bool has_harvested() const;

private:
    struct Entry {
        Scalar value;
        Origin origin;
    };
    std::vector<Entry> entries_;
};

/// Keys ordered children-before-parents (a path precedes every path that
/// contains it), ties broken lexicographically.
std::vector<ObjectPath> topo_order(const StructureConstraint& sc);

/// The builtin types a satisfying class must inherit: builtins minus
/// everything at or below a forbidden type, intersected with the required
/// set when it is nonempty. Throws UnsatisfiableSC when nothing remains.
std::set<std::string> compute_inherits(const Quad& quad, const TypeLattice& lattice);

/// Synthesizes one structured value per root such that the constraint is
/// satisfied. Deterministic given (sc, values, rng state); synthesized
/// classes are registered in the universe. Throws UnsatisfiableSC when the
/// constraint demands the impossible.
std::map<std::string, ValuePtr> generate(const StructureConstraint& sc, const ValueSet& values,
                                         Rng& rng, Universe& universe);

}  // namespace scfuzz
