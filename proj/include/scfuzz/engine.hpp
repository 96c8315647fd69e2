#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scfuzz/generator.hpp"
#include "scfuzz/target_dsl.hpp"

namespace scfuzz {

enum class CampaignMode { Constraint, RandomBaseline };

std::string mode_name(CampaignMode m);
std::optional<CampaignMode> mode_from_name(const std::string& name);

struct CampaignConfig {
    int sc_cap_per_loop = 800;
    int max_loops = 40;
    std::uint64_t rng_seed = 0;
    CampaignMode mode = CampaignMode::Constraint;
    std::string corpus_path;   // empty = no corpus
    int max_executions = 0;    // 0 = until saturation; the baseline falls back to 1000
    std::string out_dir;       // empty = keep artifacts in memory only
};

struct LoopStats {
    int loop = 0;
    int executions = 0;
    int new_path_scs = 0;
    int new_reverses = 0;
    int generated_inputs = 0;
    int unsat = 0;
};

struct Finding {
    std::string kind;  // leak | crash | abort
    std::string sc_key;
    std::string message;
    std::vector<std::string> input_listings;
    std::vector<std::string> trace_lines;
    std::map<std::int64_t, std::int64_t> ledger;       // net refcount deltas
    std::map<std::int64_t, std::int64_t> leak_deltas;  // positive, return excluded
    std::string input_ref;  // persisted input directory, relative to out_dir
};

struct ApiCoverage {
    // "TC <type>" / "AG <key>" -> return kinds seen (true/false, null/nonnull)
    std::map<std::string, std::set<std::string>> kinds;
    std::map<std::string, std::int64_t> record_counts;
};

struct CampaignReport {
    std::string target;
    CampaignConfig config;
    std::vector<LoopStats> loops;
    std::set<std::string> explored_keys;  // canonical keys of executed-path constraints
    ApiCoverage coverage;
    std::vector<Finding> findings;
    int executions_total = 0;
    int unsat_count = 0;
    int dropped_reverse_count = 0;     // reversed copies with ill-formed quads
    int truncated_reverse_count = 0;   // reverses beyond the per-loop cap
    int duplicate_binding_count = 0;
    int gen_check_failures = 0;        // generated input violating its constraint
    int sc_oracle_failures = 0;        // built constraint not satisfied by its inputs
    bool saturated = false;

    bool has_bug_findings() const;  // leaks or crashes
    std::string to_json() const;
    std::string text_summary() const;
};

struct CoverageStats {
    int distinct_pairs = 0;
    int type_check_pairs = 0;
    int attr_get_pairs = 0;
    int pairs_with_all_kinds = 0;
    std::int64_t total_records = 0;
};

CoverageStats coverage_stats(const CampaignReport& report);

/// Deep copy with fresh identity ids, so one parsed seed can feed several
/// arguments without aliasing.
ValuePtr clone_with_fresh_ids(const ValuePtr& value, Universe& universe);

/// Runs the iterative campaign: execute pending inputs, build path
/// constraints and their reverses against a campaign-wide seen set,
/// generate inputs for the kept reverses (capped per loop), and stop when
/// a loop contributes nothing new, the loop limit, or the execution
/// budget. The baseline mode replaces constraint guidance with scalar
/// draws from the harvested value pool.
CampaignReport run_campaign(const TargetProgram& program, const CampaignConfig& config,
                            const TypeLattice& lattice);

}  // namespace scfuzz
