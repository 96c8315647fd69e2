// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion carries a wall-clock budget.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "scfuzz/engine.hpp"
#include "scfuzz/input_text.hpp"
#include "scfuzz/sc_builder.hpp"
#include "test_util.hpp"

using namespace scfuzz;

namespace {

int g_failures = 0;
std::vector<std::string> g_errors;

void expect(bool cond, const std::string& what) {
    if (!cond) g_errors.push_back(what);
}

void criterion(int n, const std::string& name, double budget_seconds,
               const std::function<void()>& body) {
    g_errors.clear();
    auto start = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        g_errors.push_back(std::string("exception: ") + e.what());
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed >= budget_seconds) {
        g_errors.push_back("over time budget (" + std::to_string(elapsed) + "s of " +
                           std::to_string(budget_seconds) + "s)");
    }
    if (g_errors.empty()) {
        std::printf("[PASS] criterion %d: %s (%.2fs)\n", n, name.c_str(), elapsed);
    } else {
        ++g_failures;
        std::printf("[FAIL] criterion %d: %s (%.2fs)\n", n, name.c_str(), elapsed);
        for (const auto& e : g_errors) std::printf("       - %s\n", e.c_str());
    }
}

const char* kWorkedKey =
    R"({"o2":{"a_nbt":["__index__"],"t_nbt":["float","long"]},"o2.__index__":{}})";

struct WorkedRun {
    std::vector<ApiCallRecord> trace;
    std::vector<std::pair<std::string, std::int64_t>> roots;
};

WorkedRun worked_example_run(Universe& u) {
    TargetProgram p = parse_program(slurp_file(fixture_path("power.nlib")));
    ValuePtr o1 = parse_value_listing("obj = [1, 2, 3]\n", u);
    ValuePtr o2 = parse_value_listing("obj = 'abc'\n", u);
    ExecutionResult r = execute(p, {o1, o2}, u);
    return {r.trace, {{"o1", o1->id}, {"o2", o2->id}}};
}

void criterion_1() {
    Universe u(TypeLattice::default_lattice());
    WorkedRun run = worked_example_run(u);
    StructureConstraint sc = build_sc(run.trace, run.roots, u.lattice());
    expect(canonical_key(sc) == kWorkedKey,
           "built key " + canonical_key(sc) + " != expected " + kWorkedKey);
}

void criterion_2() {
    Universe u(TypeLattice::default_lattice());
    WorkedRun run = worked_example_run(u);
    std::set<std::string> seen;
    BuildOutcome out = build_with_reverses(run.trace, run.roots, seen, u.lattice());
    expect(out.reverse_keys.size() == 3,
           "expected 3 reverses, got " + std::to_string(out.reverse_keys.size()));
    const std::vector<std::string> expected{
        R"({"o2":{"t_bt":["long"]}})",
        R"({"o2":{"t_bt":["float"],"t_nbt":["long"]}})",
        R"({"o2":{"a_bt":["__index__"],"t_nbt":["float","long"]},"o2.__index__":{}})",
    };
    for (size_t i = 0; i < expected.size() && i < out.reverse_keys.size(); ++i) {
        expect(out.reverse_keys[i] == expected[i],
               "reverse " + std::to_string(i) + " is " + out.reverse_keys[i]);
    }

    // Bound property over randomized traces.
    std::mt19937_64 rng(77);
    static const char* types[] = {"long", "bool", "float", "str", "bytes", "list", "dict"};
    for (int round = 0; round < 1000; ++round) {
        std::vector<ApiCallRecord> trace;
        std::int64_t next_child = 5000;
        std::vector<std::int64_t> ids{1002, 1003, 42};  // two roots and a stray
        size_t n = rng() % 8;
        for (size_t i = 0; i < n; ++i) {
            std::int64_t obj = ids[rng() % ids.size()];
            if (rng() % 2 == 0) {
                trace.push_back(ApiCallRecord::type_check(obj, types[rng() % 7],
                                                          rng() % 4 == 0, rng() % 2 == 0));
            } else {
                std::optional<std::int64_t> ret;
                if (rng() % 2 == 0) {
                    ret = next_child++;
                    ids.push_back(*ret);
                }
                trace.push_back(ApiCallRecord::attr_get(
                    obj, "k" + std::to_string(rng() % 5), ret, rng() % 2 == 0));
            }
        }
        std::set<std::string> fresh;
        BuildOutcome o =
            build_with_reverses(trace, {{"a", 1002}, {"b", 1003}}, fresh, u.lattice());
        if (o.reverses.size() > static_cast<size_t>(o.rule_applications)) {
            expect(false, "reversal bound violated on round " + std::to_string(round));
            return;
        }
    }
}

void criterion_3() {
    for (const char* fixture : {"power.nlib", "record_fields.nlib", "identity.nlib",
                                "balanced.nlib", "getitem_leak.nlib", "exact_dict.nlib"}) {
        TargetProgram prog = parse_program(slurp_file(fixture_path(fixture)));
        CampaignConfig cfg;
        cfg.rng_seed = 7;
        CampaignReport report = run_campaign(prog, cfg, TypeLattice::default_lattice());
        expect(report.gen_check_failures == 0,
               std::string(fixture) + ": generated input violated its constraint");
        expect(report.sc_oracle_failures == 0,
               std::string(fixture) + ": built constraint rejected its own inputs");
        // Nothing silent: every kept reverse either generated or counted
        // unsatisfiable.
        int kept = 0, resolved = 0;
        for (const auto& loop : report.loops) {
            kept += std::min(loop.new_reverses, cfg.sc_cap_per_loop);
            resolved += loop.generated_inputs + loop.unsat;
        }
        expect(kept == resolved, std::string(fixture) + ": " + std::to_string(kept) +
                                     " kept reverses but " + std::to_string(resolved) +
                                     " resolved");
    }
}

void criterion_4() {
    TargetProgram prog = parse_program(slurp_file(fixture_path("power.nlib")));
    CampaignConfig cfg;
    cfg.rng_seed = 7;
    CampaignReport report = run_campaign(prog, cfg, TypeLattice::default_lattice());
    expect(report.explored_keys.size() >= 4,
           "explored " + std::to_string(report.explored_keys.size()) + " constraints, want >= 4");
    expect(report.loops.size() <= 4,
           "took " + std::to_string(report.loops.size()) + " loops, want <= 4");
    int leaks = 0;
    for (const auto& f : report.findings) {
        if (f.kind != "leak") continue;
        ++leaks;
        expect(f.leak_deltas.size() == 1 && f.leak_deltas.begin()->second == 1,
               "leak delta is not exactly +1 on one object");
    }
    expect(leaks == 1, "expected exactly 1 leak finding, got " + std::to_string(leaks));
}

void criterion_5() {
    TargetProgram prog = parse_program(slurp_file(fixture_path("record_fields.nlib")));
    TypeLattice lat = TypeLattice::default_lattice();
    CampaignConfig guided;
    guided.rng_seed = 11;
    guided.corpus_path = fixture_path("scalar_corpus.txt");
    guided.max_executions = 1000;
    CampaignReport g = run_campaign(prog, guided, lat);
    expect(g.explored_keys.size() == 4,
           "guided explored " + std::to_string(g.explored_keys.size()) + ", want 4");

    CampaignConfig baseline = guided;
    baseline.mode = CampaignMode::RandomBaseline;
    CampaignReport b = run_campaign(prog, baseline, lat);
    expect(b.explored_keys.size() == 1,
           "baseline explored " + std::to_string(b.explored_keys.size()) + ", want exactly 1");
    expect(b.executions_total == 1000,
           "baseline ran " + std::to_string(b.executions_total) + " executions, want 1000");
}

void criterion_6() {
    for (const char* fixture : {"power.nlib", "record_fields.nlib", "identity.nlib",
                                "balanced.nlib", "getitem_leak.nlib", "exact_dict.nlib"}) {
        TargetProgram prog = parse_program(slurp_file(fixture_path(fixture)));
        CampaignConfig cfg;
        cfg.rng_seed = 424242;
        CampaignReport a = run_campaign(prog, cfg, TypeLattice::default_lattice());
        CampaignReport b = run_campaign(prog, cfg, TypeLattice::default_lattice());
        expect(a.to_json() == b.to_json(), std::string(fixture) + ": reports differ across runs");
        for (const auto& loop : a.loops) {
            expect(loop.generated_inputs + loop.unsat <= cfg.sc_cap_per_loop,
                   std::string(fixture) + ": loop kept more reverses than the cap");
        }

        CampaignConfig tiny = cfg;
        tiny.sc_cap_per_loop = 1;
        CampaignReport t = run_campaign(prog, tiny, TypeLattice::default_lattice());
        for (const auto& loop : t.loops) {
            expect(loop.generated_inputs + loop.unsat <= 1,
                   std::string(fixture) + ": cap 1 exceeded");
        }
    }
}

void criterion_7() {
    std::mt19937_64 rng(31337);
    static const char* keys[] = {"__index__", "__len__", "names", "[0]", "[\"kv\"]", "x"};
    static const char* types[] = {"long", "float", "str", "dict", "list", "bool", "object"};
    for (int i = 0; i < 10000; ++i) {
        ApiCallRecord r;
        if (rng() % 2 == 0) {
            r = ApiCallRecord::type_check(static_cast<std::int64_t>(rng() % 1000000),
                                          types[rng() % 7], rng() % 2 == 0, rng() % 2 == 0);
        } else {
            std::optional<std::int64_t> ret;
            if (rng() % 2 == 0) ret = static_cast<std::int64_t>(rng() % 1000000);
            r = ApiCallRecord::attr_get(static_cast<std::int64_t>(rng() % 1000000),
                                        keys[rng() % 6], ret, rng() % 2 == 0);
        }
        ApiCallRecord back = parse_record(encode_record(r));
        if (!(back == r)) {
            expect(false, "round trip failed for: " + encode_record(r));
            return;
        }
    }

    // Canonicalization is insensitive to insertion order.
    static const char* quad_types[] = {"long", "float", "str", "dict", "list"};
    for (int round = 0; round < 200; ++round) {
        std::vector<std::function<void(StructureConstraint&)>> edits;
        for (int i = 0; i < 6; ++i) {
            int which = static_cast<int>(rng() % 4);
            std::string type = quad_types[rng() % 5];
            std::string key = std::string("k") + std::to_string(rng() % 4);
            std::string path = rng() % 2 ? "o" : "o.child";
            edits.push_back([which, type, key, path](StructureConstraint& sc) {
                Quad& q = sc.ensure_path(parse_path(path));
                switch (which) {
                    case 0: q.t_bt.insert(type); break;
                    case 1: q.t_nbt.insert(type); break;
                    case 2: q.a_bt.insert(key); break;
                    default: q.a_nbt.insert(key); break;
                }
            });
        }
        StructureConstraint fwd, rev;
        for (const auto& e : edits) e(fwd);
        for (auto it = edits.rbegin(); it != edits.rend(); ++it) (*it)(rev);
        if (canonical_key(fwd) != canonical_key(rev)) {
            expect(false, "canonical keys differ under reordered construction");
            return;
        }
        if (canonical_key(constraint_from_json(canonical_key(fwd))) != canonical_key(fwd)) {
            expect(false, "canonical key not stable through JSON parse");
            return;
        }
    }
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion(1, "worked-example path constraint, canonical key match", 1.0, criterion_1);
    criterion(2, "reversal fidelity and bound on randomized traces", 30.0, criterion_2);
    criterion(3, "generation soundness across bundled targets, no silent failures", 60.0,
              criterion_3);
    criterion(4, "leak reproduction: >=4 path constraints in <=4 loops, exactly one leak", 10.0,
              criterion_4);
    criterion(5, "guided explores 4 paths, value baseline exactly 1 in 1000 executions", 10.0,
              criterion_5);
    criterion(6, "seeded determinism and per-loop reverse cap", 10.0, criterion_6);
    criterion(7, "codec round trip x10000 and order-insensitive canonicalization", 10.0,
              criterion_7);
    if (g_failures) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
