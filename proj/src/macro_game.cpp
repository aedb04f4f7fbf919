#include "multires/macro_game.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace multires {

namespace {

void check_strategy(const MacroGame& game, const MacroStrategy& strat, const char* who) {
    if (static_cast<int>(strat.probs.size()) != game.count())
        throw ValidationError(std::string(who) + " strategy does not cover the vertex set");
    for (int s = 0; s < game.count(); ++s) {
        const auto& p = strat.probs[s];
        if (p.size() != game.action_targets(s).size())
            throw ValidationError(std::string(who) + " strategy at '" + game.id(s) +
                                  "' is not aligned with the action set");
        double sum = 0.0;
        for (double q : p) {
            if (q < -1e-12)
                throw ValidationError(std::string(who) + " strategy at '" + game.id(s) +
                                      "' has a negative entry");
            sum += q;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw ValidationError(std::string(who) + " strategy at '" + game.id(s) +
                                  "' does not sum to 1");
    }
}

void check_pins(const MacroGame& game, const PinMap& pins) {
    for (const auto& [s, mix] : pins) {
        if (s < 0 || s >= game.count()) throw ValidationError("pin references unknown vertex");
        if (mix.size() != game.action_targets(s).size())
            throw ValidationError("pin at '" + game.id(s) + "' is not aligned with the action set");
        double sum = 0.0;
        for (double q : mix) {
            if (q < -1e-12)
                throw ValidationError("pin at '" + game.id(s) + "' has a negative entry");
            sum += q;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw ValidationError("pin at '" + game.id(s) + "' does not sum to 1");
    }
}

// One synchronous sweep V_out(s) = value(stage_matrix(s, V_in)), with pinned
// states handled by pure defender best response to the pinned row mix.
// States are independent within a sweep, so the parallel and serial paths
// produce bit-identical results.
void sweep(const MacroGame& game, const ValueFunction& v_in, const PinMap* pins,
           ValueFunction& v_out, MacroStrategy* attacker, MacroStrategy* defender, bool parallel,
           double lp_tol) {
    const int n = game.count();
    std::exception_ptr error;

#pragma omp parallel for schedule(static) if (parallel)
    for (int s = 0; s < n; ++s) {
        try {
            const PayoffMatrix m = stage_matrix(game, s, v_in);
            const auto pin = pins ? pins->find(s) : PinMap::const_iterator{};
            if (pins && pin != pins->end()) {
                const std::vector<double>& x = pin->second;
                int best = 0;
                double best_val = 0.0;
                for (int j = 0; j < m.cols(); ++j) {
                    double t = 0.0;
                    for (int i = 0; i < m.rows(); ++i) t += x[i] * m.at(i, j);
                    if (j == 0 || t < best_val) {  // first index wins ties
                        best_val = t;
                        best = j;
                    }
                }
                v_out[s] = best_val;
                if (attacker) attacker->probs[s] = x;
                if (defender) {
                    std::vector<double> d(m.cols(), 0.0);
                    d[best] = 1.0;
                    defender->probs[s] = std::move(d);
                }
            } else {
                MatrixGameSolution sol = solve_matrix_game(m, lp_tol);
                v_out[s] = sol.value;
                if (attacker) attacker->probs[s] = std::move(sol.row_mix);
                if (defender) defender->probs[s] = std::move(sol.col_mix);
            }
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

bool run_parallel(const MacroGame& game, ExecPolicy policy) {
    switch (policy) {
        case ExecPolicy::Serial: return false;
        case ExecPolicy::Parallel: return true;
        case ExecPolicy::Auto: break;
    }
    return game.count() >= 64;
}

SpeResult iterate(const MacroGame& game, const PinMap* pins, const SolveOptions& opts) {
    if (opts.tol <= 0.0) throw ValidationError("solver tolerance must be positive");
    if (opts.horizon && *opts.horizon < 1)
        throw ValidationError("finite horizon must be at least 1");
    const bool parallel = run_parallel(game, opts.policy);
    const int n = game.count();

    SpeResult res;
    res.values.assign(n, opts.v0);
    res.attacker.probs.assign(n, {});
    res.defender.probs.assign(n, {});
    ValueFunction next(n, 0.0);

    if (opts.horizon) {
        // exactly K backward-recursion steps; strategies come from the final
        // step, i.e. the decision rule of the K-stage game at the root
        for (int k = 0; k < *opts.horizon; ++k) {
            const bool last = k + 1 == *opts.horizon;
            sweep(game, res.values, pins, next, last ? &res.attacker : nullptr,
                  last ? &res.defender : nullptr, parallel, opts.lp_tol);
            double r = 0.0;
            for (int s = 0; s < n; ++s) r = std::max(r, std::fabs(next[s] - res.values[s]));
            res.residual = r;
            std::swap(res.values, next);
            ++res.iterations;
        }
        return res;
    }

    for (int k = 0; k < opts.max_iters; ++k) {
        sweep(game, res.values, pins, next, nullptr, nullptr, parallel, opts.lp_tol);
        double r = 0.0;
        for (int s = 0; s < n; ++s) r = std::max(r, std::fabs(next[s] - res.values[s]));
        std::swap(res.values, next);
        ++res.iterations;
        res.residual = r;
        if (r <= opts.tol) {
            // one extra pass at the fixed point to extract the mixes
            sweep(game, res.values, pins, next, &res.attacker, &res.defender, parallel,
                  opts.lp_tol);
            return res;
        }
    }
    throw ConvergenceError("value iteration did not reach tolerance " +
                               std::to_string(opts.tol) + " in " +
                               std::to_string(opts.max_iters) +
                               " iterations (last residual " + std::to_string(res.residual) + ")",
                           res.residual);
}

}  // namespace

MacroGame::MacroGame(std::vector<MacroVertex> vertices,
                     std::vector<std::pair<std::string, std::string>> edges, double beta,
                     double gamma, double lambda_a)
    : vertices_(std::move(vertices)), beta_(beta), gamma_(gamma), lambda_a_(lambda_a) {
    if (vertices_.empty()) throw ValidationError("macro game needs at least one vertex");
    for (size_t i = 0; i < vertices_.size(); ++i) {
        if (!index_.emplace(vertices_[i].id, static_cast<int>(i)).second)
            throw ValidationError("duplicate vertex id '" + vertices_[i].id + "'");
        if (!(vertices_[i].nu > 0.0))
            throw ValidationError("nu must be > 0 at vertex '" + vertices_[i].id + "'");
    }
    if (!(beta_ < 0.0)) throw ValidationError("beta must be < 0");
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw ValidationError("gamma must be in [0, 1)");
    if (!(lambda_a_ >= 0.0 && lambda_a_ <= 1.0))
        throw ValidationError("lambda_A must be in [0, 1]");

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& [from, to] : edges) {
        if (!index_.count(from))
            throw ValidationError("edge references unknown vertex '" + from + "'");
        if (!index_.count(to)) throw ValidationError("edge references unknown vertex '" + to + "'");
        if (from == to) continue;  // self-loops are implicit on every vertex
        seen.emplace(from, to);
    }
    edges_.assign(seen.begin(), seen.end());

    targets_.resize(vertices_.size());
    for (size_t s = 0; s < vertices_.size(); ++s) {
        std::vector<std::string> succ;
        for (const auto& [from, to] : edges_)
            if (from == vertices_[s].id) succ.push_back(to);
        std::sort(succ.begin(), succ.end());
        targets_[s].push_back(static_cast<int>(s));
        for (const auto& id : succ) targets_[s].push_back(index_.at(id));
    }
}

int MacroGame::index(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown vertex '" + id + "'");
    return it->second;
}

MacroGame MacroGame::with_overrides(std::optional<double> gamma,
                                    std::optional<double> lambda_a) const {
    MacroGame g = *this;
    if (gamma) {
        if (!(*gamma >= 0.0 && *gamma < 1.0)) throw ValidationError("gamma must be in [0, 1)");
        g.gamma_ = *gamma;
    }
    if (lambda_a) {
        if (!(*lambda_a >= 0.0 && *lambda_a <= 1.0))
            throw ValidationError("lambda_A must be in [0, 1]");
        g.lambda_a_ = *lambda_a;
    }
    return g;
}

std::vector<MacroAction> actions_at(const MacroGame& game, int s) {
    if (s < 0 || s >= game.count()) throw ValidationError("unknown vertex index");
    std::vector<MacroAction> acts;
    for (int t : game.action_targets(s)) acts.push_back(MacroAction{s, t});
    return acts;
}

std::map<int, double> transition(const MacroGame& game, int s, MacroAction attack,
                                 MacroAction defend) {
    const auto& targets = game.action_targets(s);
    auto incident = [&](const MacroAction& a) {
        return a.from == s && std::find(targets.begin(), targets.end(), a.to) != targets.end();
    };
    if (!incident(attack) || !incident(defend))
        throw ValidationError("action not incident to vertex '" + game.id(s) + "'");

    std::map<int, double> out;
    if (attack.to == s || attack.to == defend.to) {
        out[s] = 1.0;  // holding, or traversing a secured edge: stay w.p. 1
    } else {
        out[attack.to] = game.lambda_a();
        out[s] = 1.0 - game.lambda_a();
    }
    return out;
}

double reward(const MacroGame& game, int s, MacroAction /*attack*/, MacroAction /*defend*/,
              int s_next) {
    if (s < 0 || s >= game.count() || s_next < 0 || s_next >= game.count())
        throw ValidationError("unknown vertex index");
    return s_next == s ? game.beta() : game.nu(s_next);
}

PayoffMatrix stage_matrix(const MacroGame& game, int s, const ValueFunction& v) {
    if (static_cast<int>(v.size()) != game.count())
        throw ValidationError("value function does not cover the vertex set");
    const auto& targets = game.action_targets(s);
    const int k = static_cast<int>(targets.size());
    const double stay = game.beta() + game.gamma() * v[s];
    const double lambda = game.lambda_a();

    PayoffMatrix m(k, k);
    for (int i = 0; i < k; ++i) {
        const int vi = targets[i];
        for (int j = 0; j < k; ++j) {
            if (vi == s || vi == targets[j])
                m.at(i, j) = stay;
            else
                m.at(i, j) = lambda * (game.nu(vi) + game.gamma() * v[vi]) + (1.0 - lambda) * stay;
        }
    }
    return m;
}

SpeResult solve_spe(const MacroGame& game, const SolveOptions& opts) {
    return iterate(game, nullptr, opts);
}

SpeResult solve_pinned_spe(const MacroGame& game, const PinMap& pins, const SolveOptions& opts) {
    check_pins(game, pins);
    return iterate(game, &pins, opts);
}

ValueFunction evaluate_profile(const MacroGame& game, const MacroStrategy& attacker,
                               const MacroStrategy& defender, const SolveOptions& opts) {
    check_strategy(game, attacker, "attacker");
    check_strategy(game, defender, "defender");
    if (opts.tol <= 0.0) throw ValidationError("solver tolerance must be positive");

    const int n = game.count();
    ValueFunction v(n, opts.v0), next(n, 0.0);
    for (int k = 0; k < opts.max_iters; ++k) {
        for (int s = 0; s < n; ++s) {
            const PayoffMatrix m = stage_matrix(game, s, v);
            double val = 0.0;
            for (int i = 0; i < m.rows(); ++i) {
                if (attacker.probs[s][i] == 0.0) continue;
                double row = 0.0;
                for (int j = 0; j < m.cols(); ++j) row += defender.probs[s][j] * m.at(i, j);
                val += attacker.probs[s][i] * row;
            }
            next[s] = val;
        }
        double r = 0.0;
        for (int s = 0; s < n; ++s) r = std::max(r, std::fabs(next[s] - v[s]));
        std::swap(v, next);
        if (r <= opts.tol) return v;
    }
    throw ConvergenceError("policy evaluation did not converge", 0.0);
}

}  // namespace multires
