#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "scfuzz/engine.hpp"
#include "scfuzz/input_text.hpp"
#include "scfuzz/sc_builder.hpp"
#include "scfuzz_bench_suites.hpp"

namespace fs = std::filesystem;
using namespace scfuzz;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

TypeLattice load_lattice(const std::string& path) {
    if (path.empty()) return TypeLattice::default_lattice();
    return TypeLattice::from_override_text(slurp(path));
}

TargetProgram load_program(const std::string& path) {
    return parse_program(slurp(path));
}

struct CommonFlags {
    std::uint64_t seed = 0;
    int sc_cap = 800;
    int max_loops = 40;
    int budget = 0;
    std::string mode = "pycing";
    std::string corpus;
    std::string out_dir;
    std::string lattice_path;
};

void add_campaign_flags(CLI::App* cmd, CommonFlags& flags, bool with_mode) {
    cmd->add_option("--seed", flags.seed, "campaign random seed");
    cmd->add_option("--sc-cap", flags.sc_cap, "reversed constraints kept per loop")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-loops", flags.max_loops, "loop limit")->check(CLI::PositiveNumber);
    cmd->add_option("--budget", flags.budget,
                    "execution budget, 0 = run to saturation (baseline default 1000)");
    if (with_mode) {
        cmd->add_option("--mode", flags.mode, "pycing or random-baseline")
            ->check(CLI::IsMember({"pycing", "random-baseline"}));
        cmd->add_option("--corpus", flags.corpus, "seed corpus file");
        cmd->add_option("--out", flags.out_dir, "report/artifact directory");
    }
    cmd->add_option("--lattice", flags.lattice_path, "type lattice override file");
}

CampaignConfig make_config(const CommonFlags& flags) {
    CampaignConfig cfg;
    cfg.rng_seed = flags.seed;
    cfg.sc_cap_per_loop = flags.sc_cap;
    cfg.max_loops = flags.max_loops;
    cfg.max_executions = flags.budget;
    cfg.mode = *mode_from_name(flags.mode);
    cfg.corpus_path = flags.corpus;
    cfg.out_dir = flags.out_dir;
    return cfg;
}

int cmd_run(const std::string& target, CommonFlags& flags) {
    if (flags.out_dir.empty()) flags.out_dir = "scfuzz-out";
    TypeLattice lattice = load_lattice(flags.lattice_path);
    TargetProgram program = load_program(target);
    CampaignReport report = run_campaign(program, make_config(flags), lattice);

    fs::create_directories(flags.out_dir);
    std::ofstream(fs::path(flags.out_dir) / "report.json") << report.to_json();
    std::ofstream(fs::path(flags.out_dir) / "report.txt") << report.text_summary();
    std::cout << report.text_summary();
    std::cout << "report: " << (fs::path(flags.out_dir) / "report.json").string() << "\n";
    return report.has_bug_findings() ? 1 : 0;
}

int cmd_trace(const std::string& target, const std::string& inputs_path, CommonFlags& flags) {
    TypeLattice lattice = load_lattice(flags.lattice_path);
    TargetProgram program = load_program(target);
    Universe universe(lattice);

    std::string text = slurp(inputs_path);
    std::vector<std::string> blocks = split_blocks(text);
    std::vector<ValuePtr> inputs;
    if (blocks.size() == 1 && !blocks[0].empty() && blocks[0][0] == '{') {
        // A constraint block: generate the whole input set from it.
        StructureConstraint sc = constraint_from_json(blocks[0]);
        ValueSet values;
        for (const auto& lit : program.literals) {
            values.add(lit, ValueSet::Origin::SourceLiteral);
        }
        Rng rng(flags.seed);
        auto roots = generate(sc, values, rng, universe);
        for (const auto& param : program.params) {
            auto it = roots.find(param);
            inputs.push_back(it != roots.end()
                                 ? it->second
                                 : universe.make_scalar("long", Scalar{std::int64_t{1}}));
        }
    } else {
        if (blocks.size() != program.params.size()) {
            throw ConfigError("inputs file has " + std::to_string(blocks.size()) +
                              " block(s), method takes " +
                              std::to_string(program.params.size()));
        }
        for (const auto& block : blocks) {
            inputs.push_back(parse_value_listing(block, universe));
        }
    }

    ExecutionResult result = execute(program, inputs, universe);
    std::cout << encode_trace(result.trace);
    return 0;
}

int cmd_render(const std::string& sc_path, CommonFlags& flags) {
    TypeLattice lattice = load_lattice(flags.lattice_path);
    Universe universe(lattice);
    StructureConstraint sc = constraint_from_json(slurp(sc_path));
    if (!validate_constraint(sc, lattice)) {
        throw ConfigError("ill-formed constraint in '" + sc_path + "'");
    }
    ValueSet values;
    Rng rng(flags.seed);
    try {
        auto roots = generate(sc, values, rng, universe);
        bool first = true;
        for (const auto& [root, value] : roots) {
            if (!first) std::cout << "\n";
            first = false;
            std::cout << "# " << root << "\n" << render_value(value, universe);
        }
    } catch (const UnsatisfiableSC& e) {
        std::cerr << "unsatisfiable: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_bench(const std::string& suite, CommonFlags& flags) {
    const BenchSuite* found = nullptr;
    for (const auto& s : kBenchSuites) {
        if (suite == s.name) found = &s;
    }
    if (!found) {
        std::cerr << "unknown suite '" << suite << "' (have:";
        for (const auto& s : kBenchSuites) std::cerr << " " << s.name;
        std::cerr << ")\n";
        return 2;
    }
    TypeLattice lattice = load_lattice(flags.lattice_path);
    TargetProgram program = parse_program(found->source);
    if (flags.budget == 0) flags.budget = 1000;

    std::printf("%-10s %-18s %9s %11s %6s %8s\n", "suite", "mode", "explored", "executions",
                "leaks", "crashes");
    for (CampaignMode mode : {CampaignMode::Constraint, CampaignMode::RandomBaseline}) {
        CampaignConfig cfg = make_config(flags);
        cfg.mode = mode;
        cfg.out_dir.clear();
        CampaignReport report = run_campaign(program, cfg, lattice);
        int leaks = 0, crashes = 0;
        for (const auto& f : report.findings) {
            if (f.kind == "leak") ++leaks;
            if (f.kind == "crash") ++crashes;
        }
        std::printf("%-10s %-18s %9zu %11d %6d %8d\n", found->name,
                    mode_name(mode).c_str(), report.explored_keys.size(),
                    report.executions_total, leaks, crashes);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structure-constraint guided testing of simulated native methods"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string target, inputs_path, sc_path, suite;

    CLI::App* run = app.add_subcommand("run", "run a campaign against a target");
    run->add_option("target", target, "target .nlib file")->required();
    add_campaign_flags(run, flags, true);

    CLI::App* trace = app.add_subcommand("trace", "execute once and print the API call trace");
    trace->add_option("target", target, "target .nlib file")->required();
    trace->add_option("--inputs", inputs_path, "input values file")->required();
    trace->add_option("--seed", flags.seed, "seed for constraint-block inputs");
    trace->add_option("--lattice", flags.lattice_path, "type lattice override file");

    CLI::App* render = app.add_subcommand("render", "generate inputs for a constraint and print them");
    render->add_option("--sc", sc_path, "constraint JSON file")->required();
    render->add_option("--seed", flags.seed, "generation seed");
    render->add_option("--lattice", flags.lattice_path, "type lattice override file");

    CLI::App* bench = app.add_subcommand("bench", "compare constraint-guided and baseline modes");
    bench->add_option("suite", suite, "bundled suite name")->required();
    add_campaign_flags(bench, flags, false);

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(target, flags);
        if (trace->parsed()) return cmd_trace(target, inputs_path, flags);
        if (render->parsed()) return cmd_render(sc_path, flags);
        if (bench->parsed()) return cmd_bench(suite, flags);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
