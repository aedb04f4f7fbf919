#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"

#include "multires/scenario.hpp"
#include "multires/session.hpp"

namespace {

using namespace multires;

// exit codes: 0 success, 2 validation, 3 I/O, 4 convergence
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitConvergence = 4;

bool use_color() {
    if (std::getenv("MULTIRES_NO_COLOR") != nullptr) return false;
    return isatty(fileno(stdout)) != 0;
}

std::string bold(const std::string& s) {
    return use_color() ? "\033[1m" + s + "\033[0m" : s;
}

std::string fmt(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ','))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

OperationPlan resolve_plan(const Scenario& scenario, const std::string& name) {
    const auto it = scenario.plans.find(name);
    if (it != scenario.plans.end()) return it->second;
    if (std::filesystem::exists(name)) {
        std::ifstream in(name);
        if (!in) throw IoError("cannot read plan file '" + name + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        OperationPlan plan = parse_plan_text(buf.str(), name);
        const ValidationReport rep = validate_plan(plan);
        if (!rep.ok()) throw ValidationError(name + ": " + rep.problems.front());
        return plan;
    }
    throw ValidationError("unknown plan '" + name + "' (not in scenario, not a file)");
}

struct SolveArgs {
    std::string scenario_path;
    std::string plans_csv;
    std::string lambdas_csv;
    std::optional<double> gamma;
    double tol = 1e-9;
    std::optional<int> horizon;
    std::string out_path;
    std::string format = "csv";
};

void print_value_table(const RunRecord& rec) {
    std::cout << bold("plan " + rec.plan + "  lambda_A " + fmt(rec.lambda_a, "%.6g") +
                      "  gamma " + fmt(rec.gamma, "%.6g"))
              << "\n";
    for (const auto& [vertex, value] : rec.values)
        std::cout << "  " << vertex << "  " << fmt(value, "%.4f") << "\n";
}

int cmd_validate(const std::string& path) {
    const Scenario sc = load_scenario(path);
    std::cout << "ok: scenario '" << sc.name << "' is valid (" << sc.game.count() << " vertices, "
              << sc.trees.size() << " trees, " << sc.plans.size() << " plans)\n";
    return 0;
}

int cmd_solve(const SolveArgs& args) {
    const Scenario sc = load_scenario(args.scenario_path);

    std::vector<std::string> plan_names = split_csv(args.plans_csv);
    if (plan_names.empty())
        for (const auto& [name, plan] : sc.plans) plan_names.push_back(name);
    std::vector<OperationPlan> plans;
    for (const auto& name : plan_names) plans.push_back(resolve_plan(sc, name));

    std::vector<double> lambdas;
    for (const auto& tok : split_csv(args.lambdas_csv)) {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw ValidationError("bad --lambda value '" + tok + "'");
        lambdas.push_back(v);
    }
    if (lambdas.empty()) lambdas.push_back(sc.game.lambda_a());

    SolveOptions opts;
    opts.tol = args.tol;
    opts.horizon = args.horizon;

    struct Run {
        size_t plan;
        double lambda;
    };
    std::vector<Run> runs;
    for (size_t p = 0; p < plans.size(); ++p)
        for (double l : lambdas) runs.push_back({p, l});

    std::vector<RunRecord> records(runs.size());
    std::exception_ptr error;
    const long nruns = static_cast<long>(runs.size());
    // independent runs; records land in deterministic slots
#pragma omp parallel for schedule(dynamic) if (nruns > 1)
    for (long r = 0; r < nruns; ++r) {
        try {
            const MacroGame game = sc.game.with_overrides(args.gamma, runs[r].lambda);
            Session session(game, sc.trees, opts);
            const auto steps = session.run_plan(plans[runs[r].plan]);
            records[r] = make_run_record(sc, plan_names[runs[r].plan], session, steps);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    ResultSet results;
    results.records = std::move(records);
    for (const RunRecord& rec : results.records) print_value_table(rec);

    if (!args.out_path.empty()) {
        const ExportFormat fmt =
            args.format == "json" ? ExportFormat::Json : ExportFormat::Csv;
        export_results(results, fmt, args.out_path);
        std::cout << "wrote " << args.out_path << "\n";
    }
    return 0;
}

int cmd_inspect(const std::string& scenario_path, const std::string& vertex,
                std::optional<double> lambda, std::optional<double> gamma, double tol) {
    const Scenario sc = load_scenario(scenario_path);
    if (!sc.trees.count(vertex))
        throw ValidationError("no game tree registered for vertex '" + vertex + "'");

    SolveOptions opts;
    opts.tol = tol;
    const MacroGame game = sc.game.with_overrides(gamma, lambda);
    Session session(game, sc.trees, opts);
    const int s = game.index(vertex);

    session.zoom_in(vertex);
    const MicroRecord& mr = session.micro(vertex);
    const GameTree& original = sc.trees.at(vertex);

    std::cout << bold("vertex " + vertex + "  lambda_A " + fmt(game.lambda_a(), "%.6g") +
                      "  gamma " + fmt(game.gamma(), "%.6g"))
              << "\n";
    std::cout << "defender macro mix at " << vertex << ":\n";
    const auto& targets = game.action_targets(s);
    for (size_t i = 0; i < targets.size(); ++i) {
        const std::string label =
            targets[i] == s ? "secure nothing" : "secure edge to " + game.id(targets[i]);
        std::cout << "  " << label << "  " << fmt(session.defender().probs[s][i], "%.4f") << "\n";
    }

    std::cout << "grounded terminal utilities (attacker):\n";
    for (const auto& [terminal, outcome] : mr.grounded.outcomes()) {
        const Outcome& orig = original.outcomes().at(terminal);
        std::string tag;
        if (orig.kind == Outcome::Kind::Successor)
            tag = orig.successor == vertex ? "stay" : "advance to " + orig.successor;
        else
            tag = "local payoff";
        std::cout << "  " << terminal << "  " << fmt(outcome.payoff, "%.4f") << "  (" << tag
                  << ")\n";
    }

    std::cout << "backward-induction choices:\n";
    for (const auto& [node, action] : mr.spne.chosen_action) {
        const TreeNode* n = mr.grounded.find(node);
        std::cout << "  " << node << " [" << (n && n->owner ? to_string(*n->owner) : "?") << "] -> "
                  << action << "\n";
    }

    std::cout << "outcome distribution tau (by macro outcome):\n";
    for (size_t i = 0; i < targets.size(); ++i) {
        const std::string label = targets[i] == s ? vertex + " (stay)" : game.id(targets[i]);
        std::cout << "  " << label << "  " << fmt(mr.tau_actions[i], "%.4f") << "\n";
    }
    std::cout << "micro game value: " << fmt(mr.spne.value, "%.4f") << "\n";
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"multires - multi-resolution attack-defense game solver"};
    app.require_subcommand(1);

    std::string scenario_path;

    auto* validate = app.add_subcommand("validate", "validate a scenario and its game trees");
    validate->add_option("--scenario", scenario_path, "scenario file")->required();

    SolveArgs sargs;
    auto* solve = app.add_subcommand("solve", "solve plans and export per-vertex values");
    solve->add_option("--scenario", sargs.scenario_path, "scenario file")->required();
    solve->add_option("--plan", sargs.plans_csv, "plan names or plan files, comma separated");
    solve->add_option("--lambda", sargs.lambdas_csv, "attacker capability override list");
    double gamma_in = -1.0;
    auto* gopt = solve->add_option("--gamma", gamma_in, "discount override");
    solve->add_option("--tol", sargs.tol, "value-iteration tolerance");
    int horizon_in = 0;
    auto* hopt = solve->add_option("--horizon", horizon_in, "finite horizon K (default: discounted)");
    solve->add_option("--out", sargs.out_path, "output file");
    solve->add_option("--format", sargs.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string vertex;
    std::string ilambda_csv;
    double igamma = -1.0;
    double itol = 1e-9;
    auto* inspect = app.add_subcommand("inspect", "zoom into one vertex and print the grounded tree");
    inspect->add_option("--scenario", scenario_path, "scenario file")->required();
    inspect->add_option("--vertex", vertex, "vertex id")->required();
    auto* ilopt = inspect->add_option("--lambda", ilambda_csv, "attacker capability override");
    auto* igopt = inspect->add_option("--gamma", igamma, "discount override");
    inspect->add_option("--tol", itol, "value-iteration tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    if (validate->parsed()) return cmd_validate(scenario_path);
    if (solve->parsed()) {
        if (*gopt) sargs.gamma = gamma_in;
        if (*hopt) sargs.horizon = horizon_in;
        return cmd_solve(sargs);
    }
    if (inspect->parsed()) {
        std::optional<double> lam;
        if (*ilopt) lam = std::stod(ilambda_csv);
        std::optional<double> gam;
        if (*igopt) gam = igamma;
        return cmd_inspect(scenario_path, vertex, lam, gam, itol);
    }
    return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const multires::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const multires::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
