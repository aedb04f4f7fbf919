// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
// Usage: multires_acceptance --cli <path-to-multires-binary> --data <data-dir>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "multires/game_tree.hpp"
#include "multires/matrix_game.hpp"
#include "multires/scenario.hpp"
#include "multires/session.hpp"

using namespace multires;
namespace fs = std::filesystem;

namespace {

struct Args {
    fs::path cli;
    fs::path data;
};

struct CriterionResult {
    bool pass = false;
    std::string detail;
    double ms = 0.0;
};

using Criterion = std::function<std::string()>;  // empty string = pass

CriterionResult run_criterion(const Criterion& fn) {
    CriterionResult out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        out.detail = fn();
        out.pass = out.detail.empty();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                 .count();
    return out;
}

std::string check_time(double ms, double limit_ms) {
    if (ms <= limit_ms) return "";
    std::ostringstream os;
    os << "runtime " << ms << " ms exceeds " << limit_ms << " ms";
    return os.str();
}

// --- random fixtures (same seeds every run) -------------------------------

PayoffMatrix random_matrix(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> size(1, 4), entry(-9, 9);
    PayoffMatrix m(size(rng), size(rng));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m.at(i, j) = entry(rng);
    return m;
}

struct TreeGen {
    std::mt19937_64 rng;
    GameTree tree;
    int next_id = 0;
    int decisions = 0;

    explicit TreeGen(unsigned seed) : rng(seed) {}

    std::string build(int depth) {
        const bool must_stop = depth >= 4 || decisions >= 9;
        const bool terminal = must_stop || (depth > 0 && rng() % 100 < 35);
        if (terminal) {
            const std::string id = "z" + std::to_string(next_id++);
            tree.add_node(id, NodeKind::Terminal);
            tree.set_outcome(
                id, Outcome::local(static_cast<double>(static_cast<int>(rng() % 21) - 10)));
            return id;
        }
        const std::string id = "x" + std::to_string(next_id++);
        const Player owner = rng() % 2 == 0 ? Player::Attacker : Player::Defender;
        tree.add_node(id, NodeKind::Decision, owner, "h_" + id);
        ++decisions;
        const int branching = 1 + static_cast<int>(rng() % 3);
        const char* labels[] = {"a", "b", "c"};
        for (int k = 0; k < branching; ++k) tree.add_edge(id, build(depth + 1), labels[k]);
        return id;
    }
};

GameTree random_tree(unsigned seed) {
    TreeGen gen(seed);
    const bool two_roots = gen.rng() % 2 == 0;
    const std::string r1 = gen.build(1);
    gen.tree.set_chance(r1, two_roots ? 0.5 : 1.0);
    if (two_roots) {
        const std::string r2 = gen.build(1);
        gen.tree.set_chance(r2, 0.5);
    }
    return gen.tree;
}

// golden CSV: (plan, lambda, vertex) -> value
std::map<std::tuple<std::string, std::string, std::string>, double> read_golden(
    const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read golden file '" + path.string() + "'");
    std::map<std::tuple<std::string, std::string, std::string>, double> out;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string scenario, plan, lambda, gamma, vertex, value;
        std::getline(ls, scenario, ',');
        std::getline(ls, plan, ',');
        std::getline(ls, lambda, ',');
        std::getline(ls, gamma, ',');
        std::getline(ls, vertex, ',');
        std::getline(ls, value, ',');
        out[{plan, lambda, vertex}] = std::stod(value);
    }
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
    Args args;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli")
            args.cli = argv[i + 1];
        else if (flag == "--data")
            args.data = argv[i + 1];
    }
    if (args.cli.empty() || args.data.empty()) {
        std::cerr << "usage: multires_acceptance --cli <binary> --data <dir>\n";
        return 2;
    }
    const fs::path scenario_path = args.data / "case_study.scenario";
    const fs::path golden_path = args.data / "golden" / "case_study_values.csv";

    std::vector<std::pair<std::string, Criterion>> criteria;

    criteria.emplace_back("matrix-game exactness on the 2x2 closed forms, <1ms each", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto a = solve_matrix_game({{3, -1}, {-2, 4}});
        const auto t1 = std::chrono::steady_clock::now();
        const auto b = solve_matrix_game({{1, -1}, {-1, 1}});
        const auto t2 = std::chrono::steady_clock::now();

        if (std::fabs(a.value - 1.0) > 1e-9) return std::string("value != 1.0");
        if (std::fabs(a.row_mix[0] - 0.6) > 1e-9 || std::fabs(a.row_mix[1] - 0.4) > 1e-9)
            return std::string("row mix != (0.6, 0.4)");
        if (std::fabs(a.col_mix[0] - 0.5) > 1e-9 || std::fabs(a.col_mix[1] - 0.5) > 1e-9)
            return std::string("col mix != (0.5, 0.5)");
        if (std::fabs(b.value) > 1e-9) return std::string("matching pennies value != 0");
        const double ms1 = std::chrono::duration<double, std::milli>(t1 - t0).count();
        const double ms2 = std::chrono::duration<double, std::milli>(t2 - t1).count();
        if (ms1 > 1.0 || ms2 > 1.0) return std::string("a solve took more than 1 ms");
        return std::string();
    });

    criteria.emplace_back("LP value vs support-enumeration oracle on 100 seeded matrices", [] {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(20240601);
        for (int t = 0; t < 100; ++t) {
            const PayoffMatrix m = random_matrix(rng);
            const double lp = solve_matrix_game(m).value;
            const double oracle = support_enumeration_oracle(m);
            if (std::fabs(lp - oracle) > 1e-6)
                return "matrix " + std::to_string(t) + ": |lp - oracle| = " +
                       std::to_string(std::fabs(lp - oracle));
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        return check_time(ms, 1000.0);
    });

    criteria.emplace_back("backward induction equals enumeration on 200 seeded trees", [] {
        const auto t0 = std::chrono::steady_clock::now();
        for (unsigned seed = 0; seed < 200; ++seed) {
            const GameTree t = random_tree(seed);
            if (solve_spne(t).value != enumerate_minimax_oracle(t))
                return "tree seed " + std::to_string(seed) + ": values differ";
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        return check_time(ms, 5000.0);
    });

    criteria.emplace_back("value-iteration soundness on the case-study game", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const Scenario sc = load_scenario(scenario_path);
        SolveOptions opts;
        const auto res = solve_spe(sc.game, opts);
        if (res.residual > 1e-9) return std::string("residual above 1e-9");
        SolveOptions high;
        high.v0 = 100.0;
        const auto res2 = solve_spe(sc.game, high);
        for (int s = 0; s < sc.game.count(); ++s)
            if (std::fabs(res.values[s] - res2.values[s]) > 1e-8)
                return std::string("V0=0 and V0=100 disagree at ") + sc.game.id(s);
        const auto eval = evaluate_profile(sc.game, res.attacker, res.defender);
        for (int s = 0; s < sc.game.count(); ++s)
            if (std::fabs(eval[s] - res.values[s]) > 1e-6)
                return std::string("evaluate_profile mismatch at ") + sc.game.id(s);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        return check_time(ms, 1000.0);
    });

    criteria.emplace_back("transition normalization over every (s, a_A, a_D)", [&] {
        const Scenario sc = load_scenario(scenario_path);
        for (int s = 0; s < sc.game.count(); ++s) {
            const auto acts = actions_at(sc.game, s);
            for (const auto& a : acts)
                for (const auto& d : acts) {
                    const auto t = transition(sc.game, s, a, d);
                    double sum = 0.0;
                    for (const auto& [v, p] : t) {
                        if (v != s && v != a.to)
                            return std::string("support outside {stay, target} at ") +
                                   sc.game.id(s);
                        sum += p;
                    }
                    if (sum != 1.0)
                        return std::string("transition mass != 1 at ") + sc.game.id(s);
                }
        }
        return std::string();
    });

    criteria.emplace_back("CAG values are monotone in lambda_A across {0.5, 0.6, 0.7}", [&] {
        const Scenario sc = load_scenario(scenario_path);
        const auto v5 = solve_spe(sc.game.with_overrides(std::nullopt, 0.5)).values;
        const auto v6 = solve_spe(sc.game.with_overrides(std::nullopt, 0.6)).values;
        const auto v7 = solve_spe(sc.game.with_overrides(std::nullopt, 0.7)).values;
        for (int s = 0; s < sc.game.count(); ++s) {
            if (v5[s] > v6[s] + 1e-9)
                return "V(0.5) > V(0.6) at " + sc.game.id(s);
            if (v6[s] > v7[s] + 1e-9)
                return "V(0.6) > V(0.7) at " + sc.game.id(s);
        }
        return std::string();
    });

    criteria.emplace_back("defender advantage: V_Seq5 <= V_Seq3 <= V_CAG at lambda_A = 0.6", [&] {
        const Scenario sc = load_scenario(scenario_path);
        SolveOptions tight;
        tight.tol = 1e-12;  // independent verification run

        auto values_for = [&](const std::string& plan) {
            Session session(sc.game, sc.trees, tight);
            session.run_plan(sc.plans.at(plan));
            return session.values();
        };
        const auto v_cag = values_for("CAG");
        const auto v_seq3 = values_for("Seq3");
        const auto v_seq5 = values_for("Seq5");
        for (int s = 0; s < sc.game.count(); ++s) {
            if (v_seq5[s] > v_seq3[s] + 1e-6)
                return "V_Seq5 > V_Seq3 at " + sc.game.id(s);
            if (v_seq3[s] > v_cag[s] + 1e-6)
                return "V_Seq3 > V_CAG at " + sc.game.id(s);
        }
        // the frozen golden file must agree with the tight rerun
        const auto golden = read_golden(golden_path);
        for (int s = 0; s < sc.game.count(); ++s) {
            const std::string id = sc.game.id(s);
            const struct {
                const char* plan;
                const ValueFunction* v;
            } rows[] = {{"CAG", &v_cag}, {"Seq3", &v_seq3}, {"Seq5", &v_seq5}};
            for (const auto& row : rows) {
                const auto it = golden.find({row.plan, "0.6", id});
                if (it == golden.end())
                    return std::string("golden file misses ") + row.plan + "/" + id;
                if (std::fabs(it->second - (*row.v)[s]) > 1e-6)
                    return std::string("golden value drifted for ") + row.plan + "/" + id;
            }
        }
        return std::string();
    });

    criteria.emplace_back("zoom cycle idempotence at every vertex", [&] {
        const Scenario sc = load_scenario(scenario_path);
        for (int s = 0; s < sc.game.count(); ++s) {
            const std::string vertex = sc.game.id(s);
            Session session(sc.game, sc.trees);
            session.run_plan({{ZoomOp::In, vertex}, {ZoomOp::Out, vertex}});
            const auto pin1 = session.attacker().probs[s];
            const auto v1 = session.values();
            session.run_plan({{ZoomOp::In, vertex}, {ZoomOp::Out, vertex}});
            const auto& pin2 = session.attacker().probs[s];
            for (size_t i = 0; i < pin1.size(); ++i)
                if (std::fabs(pin1[i] - pin2[i]) >= 1e-9)
                    return "pi_A changed on the second cycle at " + vertex;
            for (int q = 0; q < sc.game.count(); ++q)
                if (std::fabs(v1[q] - session.values()[q]) >= 1e-9)
                    return "V changed on the second cycle at " + vertex;
        }
        return std::string();
    });

    criteria.emplace_back("golden-file determinism of cmd_solve (3 plans x 3 lambdas)", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const fs::path tmp = fs::temp_directory_path() / "multires_acceptance";
        fs::create_directories(tmp);
        const fs::path out1 = tmp / "values_run1.csv";
        const fs::path out2 = tmp / "values_run2.csv";
        const std::string base = "\"" + args.cli.string() + "\" solve --scenario \"" +
                                 scenario_path.string() +
                                 "\" --plan CAG,Seq3,Seq5 --lambda 0.5,0.6,0.7 --out \"";
        for (const fs::path* out : {&out1, &out2}) {
            const std::string cmd = base + out->string() + "\" > /dev/null";
            if (std::system(cmd.c_str()) != 0) return std::string("cmd_solve exited nonzero");
        }
        const std::string run1 = read_file(out1);
        if (run1 != read_file(out2)) return std::string("two runs differ byte-wise");
        if (run1 != read_file(golden_path))
            return std::string("output differs from the committed golden CSV");
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        return check_time(ms, 10000.0);
    });

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        const CriterionResult out = run_criterion(criteria[i].second);
        if (out.pass) {
            std::printf("PASS  %zu. %s (%.1f ms)\n", i + 1, criteria[i].first.c_str(), out.ms);
        } else {
            std::printf("FAIL  %zu. %s: %s\n", i + 1, criteria[i].first.c_str(),
                        out.detail.c_str());
            ++failures;
        }
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
