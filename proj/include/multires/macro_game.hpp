#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "multires/errors.hpp"
#include "multires/matrix_game.hpp"

namespace multires {

struct MacroVertex {
    std::string id;
    double nu = 0.0;  // reward for entering this vertex, > 0
};

/// Zero-sum Markov game over a directed graph of engagements. The attacker
/// picks an outgoing edge to traverse (or the self-loop to hold), the
/// defender picks an edge to secure (self-loop = secure nothing). Traversal
/// of an unsecured edge succeeds with probability lambda_a.
class MacroGame {
public:
    MacroGame(std::vector<MacroVertex> vertices,
              std::vector<std::pair<std::string, std::string>> edges, double beta, double gamma,
              double lambda_a);

    int count() const { return static_cast<int>(vertices_.size()); }
    const std::string& id(int s) const { return vertices_[s].id; }
    int index(const std::string& id) const;  // throws ValidationError on unknown vertex
    double nu(int s) const { return vertices_[s].nu; }
    double beta() const { return beta_; }
    double gamma() const { return gamma_; }
    double lambda_a() const { return lambda_a_; }

    /// Action targets at s: s itself first (self-loop), then the successors
    /// sorted by vertex id. Both players share this action set.
    const std::vector<int>& action_targets(int s) const { return targets_[s]; }

    /// Normalized edge list (no self-loops, sorted, unique) for serialization.
    const std::vector<std::pair<std::string, std::string>>& edge_list() const { return edges_; }

    MacroGame with_overrides(std::optional<double> gamma, std::optional<double> lambda_a) const;

private:
    std::vector<MacroVertex> vertices_;
    std::map<std::string, int> index_;
    std::vector<std::pair<std::string, std::string>> edges_;
    std::vector<std::vector<int>> targets_;
    double beta_;
    double gamma_;
    double lambda_a_;
};

struct MacroAction {
    int from = -1;
    int to = -1;  // to == from is the self-loop
    bool operator==(const MacroAction&) const = default;
};

/// Actions available at s, self-loop first, then edges sorted by target id.
std::vector<MacroAction> actions_at(const MacroGame& game, int s);

/// The piecewise transition law. The result sums to exactly one and is
/// supported on {s, target of the attacker's action}.
std::map<int, double> transition(const MacroGame& game, int s, MacroAction attack,
                                 MacroAction defend);

/// Attacker reward for landing on s_next from s: beta when staying, nu(s_next)
/// when entering. The defender's reward is the negation.
double reward(const MacroGame& game, int s, MacroAction attack, MacroAction defend, int s_next);

using ValueFunction = std::vector<double>;  // indexed by vertex

/// Stage game at s under continuation values V: rows are attacker actions,
/// columns defender actions, both in action_targets order; entries are
/// sum_{s'} T(s'|s,a,d) * [R(s,a,d,s') + gamma * V(s')].
PayoffMatrix stage_matrix(const MacroGame& game, int s, const ValueFunction& v);

/// Per-vertex mixed strategy aligned with action_targets(s).
struct MacroStrategy {
    std::vector<std::vector<double>> probs;
};

enum class ExecPolicy { Auto, Serial, Parallel };

struct SolveOptions {
    double tol = 1e-9;
    int max_iters = 100000;
    std::optional<int> horizon;  // set: run exactly K backward-recursion steps
    ExecPolicy policy = ExecPolicy::Auto;
    double lp_tol = 1e-9;
    double v0 = 0.0;  // initial value at every vertex
};

struct SpeResult {
    ValueFunction values;
    MacroStrategy attacker;
    MacroStrategy defender;
    int iterations = 0;
    double residual = 0.0;
};

/// Fixed attacker distributions at selected vertices (over action_targets).
using PinMap = std::map<int, std::vector<double>>;

/// Shapley value iteration from V = v0: V_{k+1}(s) = value(stage_matrix(s, V_k))
/// until the sup-norm residual drops below tol. Strategies are the per-state
/// matrix-game mixes at the fixed point.
SpeResult solve_spe(const MacroGame& game, const SolveOptions& opts = {});

/// Value iteration with the attacker pinned at selected vertices: there the
/// defender best-responds purely to the pinned row mix; elsewhere the full
/// matrix game is solved. No pins reproduces solve_spe exactly.
SpeResult solve_pinned_spe(const MacroGame& game, const PinMap& pins,
                           const SolveOptions& opts = {});

/// Linear fixed point V = T_pi V for a fixed strategy pair, by iteration.
ValueFunction evaluate_profile(const MacroGame& game, const MacroStrategy& attacker,
                               const MacroStrategy& defender, const SolveOptions& opts = {});

}  // namespace multires
