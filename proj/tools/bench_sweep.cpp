// Compares the serial and OpenMP value-iteration sweeps on a random macro
// game. Results must match bit for bit; the point of the parallel path is
// wall-clock only.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "multires/macro_game.hpp"

using namespace multires;

namespace {

MacroGame random_game(int n, int degree, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> nu_dist(1.0, 10.0);
    std::uniform_int_distribution<int> pick(0, n - 1);

    std::vector<MacroVertex> vertices;
    vertices.reserve(n);
    char buf[32];
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "v%05d", i);
        vertices.push_back({buf, nu_dist(rng)});
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (int s = 0; s < n; ++s) {
        for (int k = 0; k < degree; ++k) {
            int t = pick(rng);
            if (t == s) continue;
            edges.emplace_back(vertices[s].id, vertices[t].id);
        }
    }
    return MacroGame(std::move(vertices), std::move(edges), -2.0, 0.9, 0.6);
}

double run_timed(const MacroGame& game, ExecPolicy policy, double tol, SpeResult& out) {
    SolveOptions opts;
    opts.tol = tol;
    opts.policy = policy;
    const auto t0 = std::chrono::steady_clock::now();
    out = solve_spe(game, opts);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multires_bench - serial vs OpenMP value-iteration sweep"};
    int vertices = 1024;
    int degree = 6;
    double tol = 1e-6;
    unsigned seed = 20240601;
    bool check = false;
    app.add_option("--vertices", vertices, "number of macro vertices");
    app.add_option("--degree", degree, "outgoing edges per vertex (before dedup)");
    app.add_option("--tol", tol, "value-iteration tolerance");
    app.add_option("--seed", seed, "rng seed");
    app.add_flag("--check", check, "fail unless both sweeps agree bit for bit");
    CLI11_PARSE(app, argc, argv);

    const MacroGame game = random_game(vertices, degree, seed);
    std::printf("random macro game: %d vertices, %zu edges\n", game.count(),
                game.edge_list().size());

    SpeResult serial, parallel;
    const double t_serial = run_timed(game, ExecPolicy::Serial, tol, serial);
    const double t_parallel = run_timed(game, ExecPolicy::Parallel, tol, parallel);

    std::printf("serial   : %8.1f ms  (%d iterations, residual %.3e)\n", t_serial,
                serial.iterations, serial.residual);
    std::printf("parallel : %8.1f ms  (%d iterations, residual %.3e)\n", t_parallel,
                parallel.iterations, parallel.residual);
    std::printf("speedup  : %.2fx\n", t_serial / t_parallel);

    int mismatches = 0;
    for (int s = 0; s < game.count(); ++s) {
        if (serial.values[s] != parallel.values[s]) ++mismatches;
        if (serial.attacker.probs[s] != parallel.attacker.probs[s]) ++mismatches;
        if (serial.defender.probs[s] != parallel.defender.probs[s]) ++mismatches;
    }
    if (mismatches == 0) {
        std::printf("sweeps agree bit for bit\n");
        return 0;
    }
    std::printf("MISMATCH: %d entries differ between serial and parallel sweeps\n", mismatches);
    return check ? 1 : 0;
}
