#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "scfuzz/constraints.hpp"
#include "scfuzz/trace.hpp"

namespace scfuzz {

/// Root ids handed to the builder are not distinct.
struct BuildError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BuildOutcome {
    StructureConstraint sc;
    std::vector<StructureConstraint> reverses;  // trace order
    std::vector<std::string> reverse_keys;      // canonical keys, same order
    int rule_applications = 0;                  // records that updated the sc
    int dropped_invalid = 0;                    // reversed copies with ill-formed quads
    int duplicate_bindings = 0;                 // aliased ids/paths resolved keep-first
};

/// Builds the constraint for a trace. Records whose object id matches no
/// binding are ignored (locally created objects); matching starts from the
/// root ids and extends through extracted-attribute ids, re-scanning until
/// no new binding appears.
///
/// Rules per record on a bound object:
///  - type check: result true adds the type to t_bt (plus the exact pin
///    when flagged), false adds it to t_nbt (or to forbidden_exact for
///    exact checks).
///  - attribute get: the key's child path is registered with an empty quad;
///    a non-NULL result adds the key to a_bt and binds the returned id to
///    the child path; NULL adds the key to a_nbt.
StructureConstraint build_sc(const std::vector<ApiCallRecord>& trace,
                             const std::vector<std::pair<std::string, std::int64_t>>& roots,
                             const TypeLattice& lattice);

/// build_sc plus one reversed constraint per polarity-carrying rule
/// application: a copy of the constraint-so-far with the current record's
/// value pushed into the opposite set, encoding the other branch. Exact
/// type checks yield two candidates (subtype-but-not-exact, and
/// not-subtype). Candidates with ill-formed quads are dropped and counted;
/// candidates whose canonical key is already in `seen_keys` are skipped,
/// and kept keys are added to `seen_keys`.
BuildOutcome build_with_reverses(const std::vector<ApiCallRecord>& trace,
                                 const std::vector<std::pair<std::string, std::int64_t>>& roots,
                                 std::set<std::string>& seen_keys, const TypeLattice& lattice);

}  // namespace scfuzz
