#include <doctest.h>

#include <filesystem>

#include "scfuzz/engine.hpp"
#include "test_util.hpp"

using namespace scfuzz;

static TargetProgram fixture_program(const std::string& name) {
    return parse_program(slurp_file(fixture_path(name)));
}

static CampaignConfig config_with_seed(std::uint64_t seed) {
    CampaignConfig cfg;
    cfg.rng_seed = seed;
    return cfg;
}

TEST_CASE("power campaign finds all paths and the single leak") {
    CampaignReport report = run_campaign(fixture_program("power.nlib"), config_with_seed(7),
                                         TypeLattice::default_lattice());
    CHECK(report.explored_keys.size() >= 4);
    CHECK(report.loops.size() <= 4);
    CHECK(report.saturated);

    int leaks = 0;
    for (const auto& f : report.findings) {
        if (f.kind != "leak") continue;
        ++leaks;
        REQUIRE(f.leak_deltas.size() == 1);
        CHECK(f.leak_deltas.begin()->second == 1);
        CHECK(f.sc_key.find("\"a_bt\":[\"__index__\"]") != std::string::npos);
        CHECK_FALSE(f.trace_lines.empty());
        CHECK_FALSE(f.input_listings.empty());
    }
    CHECK(leaks == 1);
    CHECK(report.has_bug_findings());

    // The worked-example path is among the explored constraints.
    CHECK(report.explored_keys.count(
        R"({"o2":{"a_nbt":["__index__"],"t_nbt":["float","long"]},"o2.__index__":{}})"));

    CHECK(report.sc_oracle_failures == 0);
    CHECK(report.gen_check_failures == 0);
}

TEST_CASE("record_fields differential: guided vs baseline") {
    TargetProgram prog = fixture_program("record_fields.nlib");
    TypeLattice lat = TypeLattice::default_lattice();

    CampaignConfig guided = config_with_seed(11);
    guided.corpus_path = fixture_path("scalar_corpus.txt");
    CampaignReport g = run_campaign(prog, guided, lat);
    CHECK(g.explored_keys.size() == 4);
    CHECK(g.saturated);

    CampaignConfig baseline = guided;
    baseline.mode = CampaignMode::RandomBaseline;
    baseline.max_executions = 1000;
    CampaignReport b = run_campaign(prog, baseline, lat);
    CHECK(b.explored_keys.size() == 1);
    CHECK(b.executions_total == 1000);
    CHECK_FALSE(b.saturated);
}

TEST_CASE("identical seeds give byte-identical reports") {
    for (const char* fixture : {"power.nlib", "record_fields.nlib", "getitem_leak.nlib"}) {
        TargetProgram prog = fixture_program(fixture);
        CampaignConfig cfg = config_with_seed(1234);
        CampaignReport a = run_campaign(prog, cfg, TypeLattice::default_lattice());
        CampaignReport b = run_campaign(prog, cfg, TypeLattice::default_lattice());
        CHECK(a.to_json() == b.to_json());
    }
}

TEST_CASE("per-loop cap is honored and campaigns still terminate") {
    TargetProgram prog = fixture_program("power.nlib");
    CampaignConfig cfg = config_with_seed(3);
    cfg.sc_cap_per_loop = 1;
    CampaignReport report = run_campaign(prog, cfg, TypeLattice::default_lattice());
    for (const auto& loop : report.loops) {
        CHECK(loop.generated_inputs + loop.unsat <= 1);
    }
    CHECK(report.truncated_reverse_count > 0);
    CHECK(report.loops.size() <= 40);

    CampaignConfig wide = config_with_seed(3);
    CampaignReport full = run_campaign(prog, wide, TypeLattice::default_lattice());
    for (const auto& loop : full.loops) {
        CHECK(loop.generated_inputs + loop.unsat <= wide.sc_cap_per_loop);
    }
}

TEST_CASE("explored constraints accumulate monotonically") {
    CampaignReport report = run_campaign(fixture_program("record_fields.nlib"),
                                         config_with_seed(5), TypeLattice::default_lattice());
    int total_new = 0;
    for (const auto& loop : report.loops) {
        CHECK(loop.new_path_scs >= 0);
        total_new += loop.new_path_scs;
    }
    CHECK(total_new == static_cast<int>(report.explored_keys.size()));
}

TEST_CASE("every bundled fixture saturates in constraint mode") {
    for (const char* fixture : {"power.nlib", "record_fields.nlib", "identity.nlib",
                                "balanced.nlib", "getitem_leak.nlib", "exact_dict.nlib"}) {
        CampaignReport report = run_campaign(fixture_program(fixture), config_with_seed(7),
                                             TypeLattice::default_lattice());
        INFO(fixture);
        CHECK(report.saturated);
        CHECK(report.loops.size() <= 40);
        CHECK(report.sc_oracle_failures == 0);
        CHECK(report.gen_check_failures == 0);
    }
}

TEST_CASE("balanced pairing stays leak-free; unpaired retention leaks") {
    CampaignReport clean = run_campaign(fixture_program("balanced.nlib"), config_with_seed(2),
                                        TypeLattice::default_lattice());
    for (const auto& f : clean.findings) CHECK(f.kind != "leak");

    CampaignReport leaky = run_campaign(fixture_program("getitem_leak.nlib"),
                                        config_with_seed(2), TypeLattice::default_lattice());
    int leaks = 0;
    for (const auto& f : leaky.findings) {
        if (f.kind == "leak") ++leaks;
    }
    CHECK(leaks == 1);
}

TEST_CASE("crash statements surface as crash findings") {
    TargetProgram prog = parse_program(
        "method crashy(a) { if typecheck(a, dict) { crash } return a }");
    CampaignReport report =
        run_campaign(prog, config_with_seed(1), TypeLattice::default_lattice());
    bool saw_crash = false;
    for (const auto& f : report.findings) {
        if (f.kind == "crash") saw_crash = true;
    }
    CHECK(saw_crash);
    CHECK(report.has_bug_findings());
}

TEST_CASE("coverage statistics") {
    CampaignReport empty;
    CoverageStats zero = coverage_stats(empty);
    CHECK(zero.distinct_pairs == 0);
    CHECK(zero.total_records == 0);
    CHECK(zero.pairs_with_all_kinds == 0);

    // One execution: counts equal the trace contents.
    TargetProgram prog = fixture_program("power.nlib");
    CampaignConfig cfg = config_with_seed(0);
    cfg.max_executions = 1;
    cfg.max_loops = 1;
    CampaignReport one = run_campaign(prog, cfg, TypeLattice::default_lattice());
    CHECK(one.executions_total == 1);
    CoverageStats s = coverage_stats(one);
    std::int64_t trace_len = 0;
    for (const auto& [pair, count] : one.coverage.record_counts) trace_len += count;
    CHECK(s.total_records == trace_len);
    CHECK(s.distinct_pairs == static_cast<int>(one.coverage.kinds.size()));

    // A full power campaign covers both outcomes of the long check.
    CampaignReport full =
        run_campaign(prog, config_with_seed(7), TypeLattice::default_lattice());
    REQUIRE(full.coverage.kinds.count("TC long"));
    CHECK(full.coverage.kinds.at("TC long") == std::set<std::string>{"false", "true"});
    REQUIRE(full.coverage.kinds.count("AG __index__"));
    CHECK(full.coverage.kinds.at("AG __index__") ==
          std::set<std::string>{"nonnull", "null"});
}

TEST_CASE("baseline draws prefer harvested scalars") {
    // The only harvested scalars are the two string keys, so every baseline
    // input is a string and only the not-a-dict path is reachable.
    TargetProgram prog = fixture_program("record_fields.nlib");
    CampaignConfig cfg = config_with_seed(21);
    cfg.mode = CampaignMode::RandomBaseline;
    cfg.max_executions = 200;
    CampaignReport report = run_campaign(prog, cfg, TypeLattice::default_lattice());
    CHECK(report.executions_total == 200);
    CHECK(report.explored_keys.size() == 1);
    CHECK(report.explored_keys.count(R"({"rec":{"t_nbt":["dict"]}})"));
}

TEST_CASE("unknown type names fail before any execution") {
    TargetProgram prog = parse_program("method m(a){ if typecheck(a, ghost) { crash } return a }");
    CHECK_THROWS_AS(
        run_campaign(prog, config_with_seed(0), TypeLattice::default_lattice()), ConfigError);
}

// Random loop-free programs: every campaign terminates (saturation or the
// loop limit) with clean self-check counters.
namespace {

struct ProgramGen {
    std::mt19937_64 rng;
    std::string out;
    int var_counter = 0;

    explicit ProgramGen(std::uint64_t seed) : rng(seed) {}

    std::string pick(const std::vector<std::string>& xs) { return xs[rng() % xs.size()]; }

    std::string indent(int depth) { return std::string(static_cast<size_t>(depth) * 2, ' '); }

    void emit_block(std::vector<std::string> vars, int depth) {
        int stmts = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < stmts; ++i) {
            int kind = static_cast<int>(rng() % (depth < 3 ? 6 : 4));
            switch (kind) {
                case 0: {
                    std::string v = "v" + std::to_string(var_counter++);
                    out += indent(depth) + v + " = " +
                           pick({"getattr", "getattr_incref", "invoke_incref"}) + "(" +
                           pick(vars) + ", \"" +
                           pick({"__index__", "__len__", "names", "[0]", "k"}) + "\")\n";
                    vars.push_back(v);
                    break;
                }
                case 1:
                    out += indent(depth) + "incref " + pick(vars) + "\n";
                    break;
                case 2:
                    out += indent(depth) + "decref " + pick(vars) + "\n";
                    break;
                case 3:
                    out += indent(depth) +
                           pick({"return " + pick(vars), "abort \"stop\"", "crash"}) + "\n";
                    return;
                default: {
                    std::string cond;
                    switch (rng() % 3) {
                        case 0:
                            cond = "typecheck(" + pick(vars) + ", " +
                                   pick({"long", "float", "str", "dict", "list", "bool"}) +
                                   (rng() % 4 == 0 ? ", exact)" : ")");
                            break;
                        case 1:
                            cond = "hasattr(" + pick(vars) + ", \"" +
                                   pick({"__index__", "names", "[0]"}) + "\")";
                            break;
                        default:
                            cond = "eq(" + pick(vars) + ", " +
                                   pick({"0", "1", "'abc'", "2.5"}) + ")";
                            break;
                    }
                    out += indent(depth) + "if " + cond + " {\n";
                    emit_block(vars, depth + 1);
                    out += indent(depth) + "} else {\n";
                    emit_block(vars, depth + 1);
                    out += indent(depth) + "}\n";
                    break;
                }
            }
        }
        out += indent(depth) + "return " + pick(vars) + "\n";
    }

    std::string generate() {
        int nparams = 1 + static_cast<int>(rng() % 2);
        std::vector<std::string> vars;
        out = "method fuzzed(";
        for (int i = 0; i < nparams; ++i) {
            if (i) out += ", ";
            vars.push_back("p" + std::to_string(i));
            out += vars.back();
        }
        out += ") {\n";
        emit_block(vars, 1);
        out += "}\n";
        return out;
    }
};

}  // namespace

TEST_CASE("random programs terminate with clean self-checks") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        ProgramGen gen(seed);
        std::string source = gen.generate();
        INFO(source);
        TargetProgram prog = parse_program(source);
        CampaignConfig cfg;
        cfg.rng_seed = seed;
        cfg.max_executions = 3000;
        CampaignReport report = run_campaign(prog, cfg, TypeLattice::default_lattice());
        CHECK(report.loops.size() <= 40);
        CHECK(report.gen_check_failures == 0);
        CHECK(report.sc_oracle_failures == 0);
        CHECK(report.explored_keys.size() >= 1);
    }
}

TEST_CASE("campaign artifacts persist under the output directory") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "scfuzz_engine_test_out";
    fs::remove_all(dir);
    CampaignConfig cfg = config_with_seed(7);
    cfg.out_dir = dir.string();
    CampaignReport report = run_campaign(fixture_program("power.nlib"), cfg,
                                         TypeLattice::default_lattice());
    bool checked = false;
    for (const auto& f : report.findings) {
        if (f.kind != "leak") continue;
        REQUIRE_FALSE(f.input_ref.empty());
        CHECK(fs::exists(dir / f.input_ref / "values.txt"));
        CHECK(fs::exists(dir / f.input_ref / "sc.json"));
        checked = true;
    }
    CHECK(checked);
    fs::remove_all(dir);
}
