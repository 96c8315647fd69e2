#include "scfuzz/engine.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "scfuzz/input_text.hpp"
#include "scfuzz/sc_builder.hpp"

using nlohmann::json;

namespace scfuzz {

std::string mode_name(CampaignMode m) {
    return m == CampaignMode::Constraint ? "pycing" : "random-baseline";
}

std::optional<CampaignMode> mode_from_name(const std::string& name) {
    if (name == "pycing") return CampaignMode::Constraint;
    if (name == "random-baseline") return CampaignMode::RandomBaseline;
    return std::nullopt;
}

bool CampaignReport::has_bug_findings() const {
    for (const auto& f : findings) {
        if (f.kind == "leak" || f.kind == "crash") return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Value cloning

ValuePtr clone_with_fresh_ids(const ValuePtr& value, Universe& universe) {
    if (!value) return nullptr;
    auto out = std::make_shared<Value>(*value);
    out->id = universe.factory().fresh_id();
    for (auto& [k, v] : out->attrs) v = clone_with_fresh_ids(v, universe);
    if (out->elements) {
        for (auto& [k, v] : *out->elements) v = clone_with_fresh_ids(v, universe);
    }
    if (out->returns) out->returns = clone_with_fresh_ids(out->returns, universe);
    return out;
}

// ---------------------------------------------------------------------------
// Report serialization

std::string CampaignReport::to_json() const {
    json j;
    j["target"] = target;
    j["mode"] = mode_name(config.mode);
    j["seed"] = config.rng_seed;
    j["sc_cap_per_loop"] = config.sc_cap_per_loop;
    j["max_loops"] = config.max_loops;
    j["max_executions"] = config.max_executions;
    j["loops"] = json::array();
    for (const auto& l : loops) {
        j["loops"].push_back({{"loop", l.loop},
                              {"executions", l.executions},
                              {"new_path_scs", l.new_path_scs},
                              {"new_reverses", l.new_reverses},
                              {"generated_inputs", l.generated_inputs},
                              {"unsat", l.unsat}});
    }
    j["explored_sc_keys"] = json::array();
    for (const auto& k : explored_keys) j["explored_sc_keys"].push_back(k);
    json cov = json::object();
    for (const auto& [pair, kinds_seen] : coverage.kinds) {
        json e;
        e["kinds"] = json::array();
        for (const auto& k : kinds_seen) e["kinds"].push_back(k);
        auto it = coverage.record_counts.find(pair);
        e["records"] = it == coverage.record_counts.end() ? 0 : it->second;
        cov[pair] = e;
    }
    j["api_coverage"] = cov;
    j["findings"] = json::array();
    for (const auto& f : findings) {
        json e;
        e["kind"] = f.kind;
        e["sc_key"] = f.sc_key;
        if (!f.message.empty()) e["message"] = f.message;
        e["inputs"] = f.input_listings;
        e["trace"] = f.trace_lines;
        if (!f.ledger.empty()) {
            json ledger = json::object();
            for (const auto& [id, delta] : f.ledger) ledger[std::to_string(id)] = delta;
            e["ledger"] = ledger;
        }
        if (!f.leak_deltas.empty()) {
            json leaks = json::object();
            for (const auto& [id, delta] : f.leak_deltas) {
                leaks[std::to_string(id)] = delta;
            }
            e["leaked"] = leaks;
        }
        if (!f.input_ref.empty()) e["input_ref"] = f.input_ref;
        j["findings"].push_back(e);
    }
    j["counters"] = {{"executions", executions_total},
                     {"unsat", unsat_count},
                     {"dropped_invalid_reverses", dropped_reverse_count},
                     {"truncated_reverses", truncated_reverse_count},
                     {"duplicate_bindings", duplicate_binding_count},
                     {"generation_check_failures", gen_check_failures},
                     {"sc_oracle_failures", sc_oracle_failures}};
    j["saturated"] = saturated;
    return j.dump(2) + "\n";
}

std::string CampaignReport::text_summary() const {
    std::string out;
    out += "target: " + target + "  mode: " + mode_name(config.mode) +
           "  seed: " + std::to_string(config.rng_seed) + "\n";
    out += "loops: " + std::to_string(loops.size()) +
           "  executions: " + std::to_string(executions_total) +
           "  saturated: " + (saturated ? "yes" : "no") + "\n";
    out += "explored path constraints: " + std::to_string(explored_keys.size()) + "\n";
    CoverageStats cs = coverage_stats(*this);
    out += "api coverage: " + std::to_string(cs.distinct_pairs) + " call kinds (" +
           std::to_string(cs.type_check_pairs) + " type checks, " +
           std::to_string(cs.attr_get_pairs) + " attribute gets), " +
           std::to_string(cs.pairs_with_all_kinds) + " with both return kinds\n";
    out += "unsat: " + std::to_string(unsat_count) +
           "  dropped reverses: " + std::to_string(dropped_reverse_count) +
           "  truncated: " + std::to_string(truncated_reverse_count) + "\n";
    int leaks = 0, crashes = 0, aborts = 0;
    for (const auto& f : findings) {
        if (f.kind == "leak") ++leaks;
        if (f.kind == "crash") ++crashes;
        if (f.kind == "abort") ++aborts;
    }
    out += "findings: " + std::to_string(leaks) + " leak(s), " + std::to_string(crashes) +
           " crash(es), " + std::to_string(aborts) + " abort path(s)\n";
    for (const auto& f : findings) {
        if (f.kind == "abort") continue;
        out += "  [" + f.kind + "] " + f.sc_key;
        if (!f.leak_deltas.empty()) {
            out += "  deltas:";
            for (const auto& [id, d] : f.leak_deltas) {
                out += " id" + std::to_string(id) + ":+" + std::to_string(d);
            }
        }
        out += "\n";
    }
    return out;
}

CoverageStats coverage_stats(const CampaignReport& report) {
    CoverageStats s;
    for (const auto& [pair, kinds_seen] : report.coverage.kinds) {
        ++s.distinct_pairs;
        if (pair.rfind("TC ", 0) == 0) ++s.type_check_pairs;
        if (pair.rfind("AG ", 0) == 0) ++s.attr_get_pairs;
        if (kinds_seen.size() >= 2) ++s.pairs_with_all_kinds;
    }
    for (const auto& [pair, count] : report.coverage.record_counts) s.total_records += count;
    return s;
}

// ---------------------------------------------------------------------------
// Campaign loop

namespace {

struct PendingInput {
    std::vector<ValuePtr> values;
    std::string sc_json;  // the reversed constraint that produced it, if any
};

struct Campaign {
    const TargetProgram& program;
    const CampaignConfig& config;
    Universe universe;
    CampaignReport report;
    ValueSet values;
    Rng rng;
    std::set<std::string> seen_keys;
    std::set<std::string> finding_dedup;
    std::filesystem::path out_root;

    Campaign(const TargetProgram& prog, const CampaignConfig& cfg, const TypeLattice& lattice)
        : program(prog), config(cfg), universe(lattice), rng(cfg.rng_seed) {
        report.target = prog.name;
        report.config = cfg;
    }

    void harvest_scalars(const ValuePtr& v, ValueSet::Origin origin) {
        if (v->payload) values.add(*v->payload, origin);
        for (const auto& [k, a] : v->attrs) harvest_scalars(a, origin);
        if (v->elements) {
            for (const auto& [k, e] : *v->elements) harvest_scalars(e, origin);
        }
        if (v->returns) harvest_scalars(v->returns, origin);
    }

    std::vector<ValuePtr> corpus_values() {
        std::vector<ValuePtr> out;
        if (config.corpus_path.empty()) return out;
        std::ifstream in(config.corpus_path);
        if (!in) throw ConfigError("cannot open corpus file '" + config.corpus_path + "'");
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        for (const auto& block : split_blocks(text)) {
            ValuePtr v = parse_value_listing(block, universe);
            harvest_scalars(v, ValueSet::Origin::Corpus);
            out.push_back(v);
        }
        return out;
    }

    std::vector<PendingInput> initial_inputs() {
        std::vector<PendingInput> out;
        for (const auto& seed : corpus_values()) {
            PendingInput p;
            for (size_t i = 0; i < program.params.size(); ++i) {
                p.values.push_back(clone_with_fresh_ids(seed, universe));
            }
            out.push_back(std::move(p));
        }
        for (const auto& type : universe.lattice().builtin_names()) {
            PendingInput p;
            for (size_t i = 0; i < program.params.size(); ++i) {
                p.values.push_back(universe.make_scalar_default(type));
            }
            out.push_back(std::move(p));
        }
        return out;
    }

    std::string persist_input(int loop_no, int index, const PendingInput& input) {
        if (config.out_dir.empty()) return "";
        char buf[64];
        std::snprintf(buf, sizeof buf, "loops/loop_%04d/input_%04d", loop_no, index);
        std::filesystem::path dir = out_root / buf;
        std::filesystem::create_directories(dir);
        std::ofstream vals(dir / "values.txt");
        for (size_t i = 0; i < input.values.size(); ++i) {
            if (i) vals << "\n";
            vals << render_value(input.values[i], universe);
        }
        if (!input.sc_json.empty()) {
            std::ofstream sc(dir / "sc.json");
            sc << input.sc_json << "\n";
        }
        return buf;
    }

    void record_coverage(const std::vector<ApiCallRecord>& trace) {
        for (const auto& r : trace) {
            std::string pair =
                (r.act == ApiCallRecord::Act::TypeCheck ? "TC " : "AG ") + r.val_act;
            std::string kind = r.act == ApiCallRecord::Act::TypeCheck
                                   ? (r.result ? "true" : "false")
                                   : (r.ret ? "nonnull" : "null");
            report.coverage.kinds[pair].insert(kind);
            ++report.coverage.record_counts[pair];
        }
    }

    void record_findings(const ExecutionResult& result, const std::string& sc_key,
                         const PendingInput& input, const std::string& input_ref) {
        std::string kind;
        if (result.outcome == OutcomeKind::Crashed) {
            kind = "crash";
        } else if (result.outcome == OutcomeKind::Aborted) {
            kind = "abort";
        } else if (!result.leaks.empty()) {
            kind = "leak";
        } else {
            return;
        }
        std::string dedup = kind + "|" + sc_key + "|" + std::to_string(result.leaks.size());
        if (!finding_dedup.insert(dedup).second) return;
        Finding f;
        f.kind = kind;
        f.sc_key = sc_key;
        f.message = result.message;
        for (const auto& v : input.values) {
            f.input_listings.push_back(render_value(v, universe));
        }
        for (const auto& r : result.trace) f.trace_lines.push_back(encode_record(r));
        f.ledger = result.ledger;
        f.leak_deltas = result.leaks;
        f.input_ref = input_ref;
        report.findings.push_back(std::move(f));
    }

    bool budget_left() const {
        int budget = config.max_executions;
        if (budget == 0 && config.mode == CampaignMode::RandomBaseline) budget = 1000;
        return budget == 0 || report.executions_total < budget;
    }

    std::vector<ValuePtr> ordered_inputs(const std::map<std::string, ValuePtr>& roots) {
        std::vector<ValuePtr> out;
        for (const auto& param : program.params) {
            auto it = roots.find(param);
            if (it != roots.end()) {
                out.push_back(it->second);
            } else {
                out.push_back(universe.make_scalar("long", values.draw_typed("long", rng)));
            }
        }
        return out;
    }

    void run() {
        for (const auto& type : program.referenced_types()) {
            universe.lattice().at(type);  // unknown names fail before any work
        }
        // Literals keep their multiplicity; a value used twice in the
        // source weighs twice in the pool.
        for (const auto& lit : program.literals) {
            values.add(lit, ValueSet::Origin::SourceLiteral);
        }
        if (!config.out_dir.empty()) {
            out_root = config.out_dir;
            std::filesystem::create_directories(out_root);
        }

        std::vector<PendingInput> pending;
        if (config.mode == CampaignMode::Constraint) {
            pending = initial_inputs();
        } else {
            pending = baseline_batch();
        }

        for (int loop_no = 1; loop_no <= config.max_loops && !pending.empty(); ++loop_no) {
            if (!budget_left()) break;
            LoopStats stats;
            stats.loop = loop_no;
            struct KeptReverse {
                StructureConstraint sc;
                std::string key;
            };
            std::vector<KeptReverse> reverses;

            int input_index = 0;
            for (const auto& input : pending) {
                if (!budget_left()) break;
                ExecutionResult result = execute(program, input.values, universe);
                ++stats.executions;
                ++report.executions_total;
                record_coverage(result.trace);

                std::vector<std::pair<std::string, std::int64_t>> roots;
                std::map<std::string, ValuePtr> root_values;
                for (size_t i = 0; i < program.params.size(); ++i) {
                    roots.emplace_back(program.params[i], input.values[i]->id);
                    root_values[program.params[i]] = input.values[i];
                }
                BuildOutcome built =
                    build_with_reverses(result.trace, roots, seen_keys, universe.lattice());
                report.dropped_reverse_count += built.dropped_invalid;
                report.duplicate_binding_count += built.duplicate_bindings;
                if (!satisfied_by(built.sc, root_values, universe)) {
                    ++report.sc_oracle_failures;
                }
                std::string key = canonical_key(built.sc);
                if (report.explored_keys.insert(key).second) ++stats.new_path_scs;

                std::string ref = persist_input(loop_no, ++input_index, input);
                record_findings(result, key, input, ref);

                for (size_t i = 0; i < built.reverses.size(); ++i) {
                    reverses.push_back({std::move(built.reverses[i]), built.reverse_keys[i]});
                }
            }

            stats.new_reverses = static_cast<int>(reverses.size());
            if (static_cast<int>(reverses.size()) > config.sc_cap_per_loop) {
                report.truncated_reverse_count +=
                    static_cast<int>(reverses.size()) - config.sc_cap_per_loop;
                reverses.resize(config.sc_cap_per_loop);
            }

            std::vector<PendingInput> next;
            if (config.mode == CampaignMode::Constraint) {
                for (const auto& rev : reverses) {
                    try {
                        auto roots = generate(rev.sc, values, rng, universe);
                        if (!satisfied_by(rev.sc, roots, universe)) {
                            ++report.gen_check_failures;
                        }
                        PendingInput p;
                        p.values = ordered_inputs(roots);
                        p.sc_json = rev.key;
                        ++stats.generated_inputs;
                        next.push_back(std::move(p));
                    } catch (const UnsatisfiableSC&) {
                        ++stats.unsat;
                        ++report.unsat_count;
                    }
                }
            } else if (budget_left()) {
                next = baseline_batch();
                stats.generated_inputs = static_cast<int>(next.size());
            }

            report.loops.push_back(stats);
            if (next.empty()) {
                // Nothing new to try. That is saturation unless the budget
                // cut the loop short.
                report.saturated = config.mode == CampaignMode::Constraint && budget_left();
                break;
            }
            pending = std::move(next);
        }
    }

    std::vector<PendingInput> baseline_batch() {
        // Value-only fuzzing: bare scalars from the harvested pool, one
        // batch per loop, bounded by the execution budget.
        int budget = config.max_executions == 0 ? 1000 : config.max_executions;
        int remaining = budget - report.executions_total;
        int batch = std::min(remaining, config.sc_cap_per_loop);
        std::vector<PendingInput> out;
        for (int i = 0; i < batch; ++i) {
            PendingInput p;
            for (size_t j = 0; j < program.params.size(); ++j) {
                Scalar s = values.draw_any(rng);
                p.values.push_back(universe.make_scalar(scalar_type_name(s), s));
            }
            out.push_back(std::move(p));
        }
        return out;
    }
};

}  // namespace

CampaignReport run_campaign(const TargetProgram& program, const CampaignConfig& config,
                            const TypeLattice& lattice) {
    Campaign campaign(program, config, lattice);
    campaign.run();
    return std::move(campaign.report);
}

}  // namespace scfuzz
