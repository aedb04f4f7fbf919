#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "multires/errors.hpp"

namespace multires {

enum class Player { Attacker, Defender };

const char* to_string(Player p);

enum class NodeKind { Decision, Terminal };

/// What reaching a terminal node means: either a scalar attacker payoff
/// (absorbing, never rewritten), or a reference to a macro successor vertex
/// whose utility is filled in by zoom-in. Defender utility is always the
/// negation of the attacker's.
struct Outcome {
    enum class Kind { Successor, LocalPayoff };
    Kind kind = Kind::LocalPayoff;
    std::string successor;  // Kind::Successor
    double payoff = 0.0;    // Kind::LocalPayoff

    static Outcome succ(std::string vertex) {
        Outcome o;
        o.kind = Kind::Successor;
        o.successor = std::move(vertex);
        return o;
    }
    static Outcome local(double payoff) {
        Outcome o;
        o.kind = Kind::LocalPayoff;
        o.payoff = payoff;
        return o;
    }
};

struct TreeNode {
    std::string id;
    NodeKind kind = NodeKind::Decision;
    std::optional<Player> owner;         // decision nodes only
    std::optional<std::string> info_set; // decision nodes only
};

struct TreeEdge {
    std::string from;
    std::string to;
    std::string action;
};

/// Candidate extensive-form game tree. Construction is permissive: structural
/// rules (arborescence, action uniqueness, perfect recall, chance coverage,
/// outcome coverage) are checked by validate_tree, which reports violations
/// instead of failing, so arbitrary candidate structures can be represented.
class GameTree {
public:
    void add_node(std::string id, NodeKind kind,
                  std::optional<Player> owner = std::nullopt,
                  std::optional<std::string> info_set = std::nullopt);
    void add_edge(std::string from, std::string to, std::string action);
    void set_chance(const std::string& node_id, double prob);
    void set_outcome(const std::string& node_id, Outcome outcome);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const std::vector<TreeEdge>& edges() const { return edges_; }
    const std::map<std::string, double>& chance() const { return chance_; }
    const std::map<std::string, Outcome>& outcomes() const { return outcomes_; }

    const TreeNode* find(const std::string& id) const;

private:
    std::vector<TreeNode> nodes_;
    std::vector<TreeEdge> edges_;
    std::map<std::string, double> chance_;
    std::map<std::string, Outcome> outcomes_;
};

struct ValidationReport {
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
    std::string to_string() const;
};

/// Checks every invariant of the extensive form and reports all violations
/// with the offending node / information-set ids. Never throws.
ValidationReport validate_tree(const GameTree& tree);

/// Per-information-set distribution over that set's action labels.
using ActionDist = std::map<std::string, double>;

struct BehaviorStrategy {
    std::map<std::string, ActionDist> by_info_set;
};

/// Attacker and defender behavior strategies; nature's policy lives in the
/// tree itself (chance over initial nodes).
struct BehaviorProfile {
    BehaviorStrategy attacker;
    BehaviorStrategy defender;
};

/// One action per owned information set; the enumeration oracle's currency.
using PureStrategy = std::map<std::string, std::string>;

/// Probability of reaching each terminal node: product of the chance weight
/// of the path's initial node and each mover's behavior probability along
/// the path. Throws ValidationError on an invalid tree or incomplete profile.
std::map<std::string, double> outcome_distribution(const GameTree& tree,
                                                   const BehaviorProfile& profile);

/// Expected utility for `player` under the profile. Requires every terminal
/// outcome to be a LocalPayoff; throws NotGroundedError otherwise.
double expected_utility(const GameTree& tree, const BehaviorProfile& profile, Player player);

struct SpneResult {
    BehaviorProfile profile;  // pure (point-mass) behavior profile
    double value = 0.0;       // attacker value, chance-weighted over roots
    std::map<std::string, std::string> chosen_action;  // decision node -> action
    std::map<std::string, double> node_value;          // subgame value at each node
};

/// Backward induction for perfect-information zero-sum trees. At every
/// decision node the attacker maximizes and the defender minimizes the
/// subgame value; ties break to the lexicographically smallest action label.
SpneResult solve_spne(const GameTree& tree);

/// Independent oracle: max over attacker pure strategies of min over
/// defender pure strategies of expected utility. Budget: 12 decision nodes.
double enumerate_minimax_oracle(const GameTree& tree);

// --- serialization (UTF-8 JSON, schema is stable; unknown keys rejected) ---

GameTree parse_tree_json(const std::string& text, const std::string& origin);
std::string tree_to_json(const GameTree& tree);
GameTree load_tree(const std::filesystem::path& path);
void save_tree(const GameTree& tree, const std::filesystem::path& path);

}  // namespace multires
