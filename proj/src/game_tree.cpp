#include "multires/game_tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace multires {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct Compiled {
    const GameTree* tree = nullptr;
    std::map<std::string, int> by_id;
    std::vector<int> parent;                                        // -1 for roots
    std::vector<std::string> parent_action;                         // action on edge from parent
    std::vector<std::vector<std::pair<std::string, int>>> children; // sorted by action label
    std::vector<int> roots;                                         // sorted by node id
    std::vector<int> post_order;                                    // children before parents
    std::map<std::string, std::vector<int>> info_sets;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

void index_nodes(const GameTree& t, std::map<std::string, int>& by_id,
                 std::vector<std::string>* duplicates) {
    for (size_t i = 0; i < t.nodes().size(); ++i) {
        const auto& n = t.nodes()[i];
        if (!by_id.emplace(n.id, static_cast<int>(i)).second && duplicates)
            duplicates->push_back(n.id);
    }
}

// Own-history of node x for the owner of information set h: the sequence of
// (information set, action taken) pairs at that player's nodes on the root
// path. Perfect recall requires this to be identical across all of h.
std::vector<std::pair<std::string, std::string>> own_history(const Compiled& c, int x,
                                                             Player player) {
    std::vector<std::pair<std::string, std::string>> seq;
    int cur = x;
    while (c.parent[cur] >= 0) {
        const int par = c.parent[cur];
        const TreeNode& pn = c.tree->nodes()[par];
        if (pn.kind == NodeKind::Decision && pn.owner && *pn.owner == player)
            seq.emplace_back(pn.info_set.value_or(""), c.parent_action[cur]);
        cur = par;
    }
    std::reverse(seq.begin(), seq.end());
    return seq;
}

ValidationReport validate_impl(const GameTree& t, Compiled* out) {
    ValidationReport rep;
    auto bad = [&rep](const std::string& msg) { rep.problems.push_back(msg); };

    std::map<std::string, int> by_id;
    std::vector<std::string> dups;
    index_nodes(t, by_id, &dups);
    for (const auto& id : dups) bad("duplicate node id " + quote(id));

    const int n = static_cast<int>(t.nodes().size());
    if (n == 0) bad("tree has no nodes");

    std::vector<int> indegree(n, 0);
    std::vector<std::vector<std::pair<std::string, int>>> children(n);
    bool edges_ok = true;
    for (const auto& e : t.edges()) {
        const auto fi = by_id.find(e.from);
        const auto ti = by_id.find(e.to);
        if (fi == by_id.end()) {
            bad("edge references unknown node " + quote(e.from));
            edges_ok = false;
            continue;
        }
        if (ti == by_id.end()) {
            bad("edge references unknown node " + quote(e.to));
            edges_ok = false;
            continue;
        }
        children[fi->second].emplace_back(e.action, ti->second);
        ++indegree[ti->second];
    }

    for (int i = 0; i < n; ++i) {
        const TreeNode& node = t.nodes()[i];
        if (indegree[i] > 1)
            bad("arborescence violated: node " + quote(node.id) + " has multiple parents");
        std::set<std::string> labels;
        for (const auto& [action, child] : children[i])
            if (!labels.insert(action).second)
                bad("action labels not one-to-one at node " + quote(node.id) + " (action " +
                    quote(action) + ")");
        if (node.kind == NodeKind::Terminal) {
            if (!children[i].empty()) bad("terminal node " + quote(node.id) + " has outgoing edges");
            if (node.owner) bad("terminal node " + quote(node.id) + " must not have an owner");
            if (node.info_set) bad("terminal node " + quote(node.id) + " must not have an information set");
        } else {
            if (children[i].empty()) bad("decision node " + quote(node.id) + " has no outgoing edges");
            if (!node.owner) bad("decision node " + quote(node.id) + " has no owner");
            if (!node.info_set) bad("decision node " + quote(node.id) + " has no information set");
        }
    }

    // Reachability from initial (in-degree zero) nodes; unreachable nodes mean
    // a cycle or a disconnected fragment, both arborescence violations.
    std::vector<int> roots;
    for (int i = 0; i < n; ++i)
        if (indegree[i] == 0) roots.push_back(i);
    std::sort(roots.begin(), roots.end(), [&](int a, int b) {
        return t.nodes()[a].id < t.nodes()[b].id;
    });
    std::vector<char> reached(n, 0);
    std::vector<int> stack(roots);
    while (!stack.empty()) {
        const int x = stack.back();
        stack.pop_back();
        if (reached[x]) continue;
        reached[x] = 1;
        for (const auto& [action, child] : children[x]) stack.push_back(child);
    }
    for (int i = 0; i < n; ++i)
        if (!reached[i])
            bad("arborescence violated: node " + quote(t.nodes()[i].id) +
                " not reachable from an initial node");

    if (!rep.ok() || !edges_ok) return rep;

    Compiled c;
    c.tree = &t;
    c.by_id = std::move(by_id);
    c.children = std::move(children);
    c.roots = std::move(roots);
    c.parent.assign(n, -1);
    c.parent_action.assign(n, std::string());
    for (int i = 0; i < n; ++i) {
        std::sort(c.children[i].begin(), c.children[i].end());
        for (const auto& [action, child] : c.children[i]) {
            c.parent[child] = i;
            c.parent_action[child] = action;
        }
    }
    {
        // iterative post-order over the forest, children in action order
        std::vector<std::pair<int, bool>> st;
        for (auto it = c.roots.rbegin(); it != c.roots.rend(); ++it) st.emplace_back(*it, false);
        while (!st.empty()) {
            auto [x, expanded] = st.back();
            st.pop_back();
            if (expanded) {
                c.post_order.push_back(x);
                continue;
            }
            st.emplace_back(x, true);
            for (auto it = c.children[x].rbegin(); it != c.children[x].rend(); ++it)
                st.emplace_back(it->second, false);
        }
    }
    for (int i = 0; i < n; ++i) {
        const TreeNode& node = t.nodes()[i];
        if (node.kind == NodeKind::Decision && node.info_set)
            c.info_sets[*node.info_set].push_back(i);
    }

    // Information-set consistency: same owner, same available action labels.
    for (const auto& [h, members] : c.info_sets) {
        const TreeNode& first = t.nodes()[members.front()];
        auto labels_of = [&](int x) {
            std::vector<std::string> ls;
            for (const auto& [action, child] : c.children[x]) ls.push_back(action);
            return ls;
        };
        const auto ref_labels = labels_of(members.front());
        for (size_t k = 1; k < members.size(); ++k) {
            const TreeNode& other = t.nodes()[members[k]];
            if (other.owner != first.owner)
                bad("information set " + quote(h) + " mixes owners (nodes " + quote(first.id) +
                    " and " + quote(other.id) + ")");
            if (labels_of(members[k]) != ref_labels)
                bad("information set " + quote(h) + " has inconsistent action sets (nodes " +
                    quote(first.id) + " and " + quote(other.id) + ")");
        }
        // Perfect recall: identical own-history across the set. An information
        // set containing a node and its ancestor fails this check as well.
        if (first.owner) {
            const auto ref_seq = own_history(c, members.front(), *first.owner);
            for (size_t k = 1; k < members.size(); ++k) {
                if (own_history(c, members[k], *first.owner) != ref_seq) {
                    bad("perfect recall violated in information set " + quote(h) + " (nodes " +
                        quote(first.id) + " and " + quote(t.nodes()[members[k]].id) +
                        " have different own-histories)");
                    break;
                }
            }
        }
    }

    // Chance policy: defined exactly on the initial nodes, nonnegative,
    // sums to one. Probability mass on interior nodes is rejected.
    std::set<std::string> root_ids;
    for (int r : c.roots) root_ids.insert(t.nodes()[r].id);
    double sum = 0.0;
    for (const auto& [id, p] : t.chance()) {
        if (!c.by_id.count(id)) {
            bad("chance policy references unknown node " + quote(id));
            continue;
        }
        if (!root_ids.count(id)) {
            bad("chance probability attached to non-initial node " + quote(id));
            continue;
        }
        if (p < 0.0) bad("negative chance probability at node " + quote(id));
        sum += p;
    }
    bool chance_covered = true;
    for (const auto& id : root_ids)
        if (!t.chance().count(id)) {
            bad("chance policy missing initial node " + quote(id));
            chance_covered = false;
        }
    if (chance_covered && std::fabs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "chance policy sums to " << sum << ", expected 1";
        bad(os.str());
    }

    // Outcomes: exactly the terminal nodes carry one.
    for (const auto& [id, outcome] : t.outcomes()) {
        const auto it = c.by_id.find(id);
        if (it == c.by_id.end()) {
            bad("outcome references unknown node " + quote(id));
            continue;
        }
        if (t.nodes()[it->second].kind != NodeKind::Terminal)
            bad("outcome attached to non-terminal node " + quote(id));
    }
    for (int i = 0; i < n; ++i)
        if (t.nodes()[i].kind == NodeKind::Terminal && !t.outcomes().count(t.nodes()[i].id))
            bad("terminal node " + quote(t.nodes()[i].id) + " has no outcome");

    if (rep.ok() && out) *out = std::move(c);
    return rep;
}

Compiled compile(const GameTree& t) {
    Compiled c;
    const ValidationReport rep = validate_impl(t, &c);
    if (!rep.ok()) throw ValidationError("invalid game tree: " + rep.problems.front());
    return c;
}

const ActionDist& dist_for(const Compiled& c, const BehaviorProfile& profile, int node) {
    const TreeNode& n = c.tree->nodes()[node];
    const BehaviorStrategy& strat =
        *n.owner == Player::Attacker ? profile.attacker : profile.defender;
    const auto it = strat.by_info_set.find(*n.info_set);
    if (it == strat.by_info_set.end())
        throw ValidationError("incomplete profile: missing distribution for information set '" +
                              *n.info_set + "'");
    return it->second;
}

void check_profile(const Compiled& c, const BehaviorProfile& profile) {
    std::map<Player, std::set<std::string>> owned;
    for (const auto& [h, members] : c.info_sets)
        owned[*c.tree->nodes()[members.front()].owner].insert(h);
    for (Player p : {Player::Attacker, Player::Defender}) {
        const BehaviorStrategy& strat = p == Player::Attacker ? profile.attacker : profile.defender;
        for (const auto& [h, dist] : strat.by_info_set) {
            if (!owned[p].count(h))
                throw ValidationError(std::string("profile assigns information set '") + h +
                                      "' not owned by " + to_string(p));
            const int node = c.info_sets.at(h).front();
            std::set<std::string> labels;
            for (const auto& [action, child] : c.children[node]) labels.insert(action);
            double sum = 0.0;
            for (const auto& [action, prob] : dist) {
                if (!labels.count(action))
                    throw ValidationError("behavior strategy at '" + h +
                                          "' puts weight on unavailable action '" + action + "'");
                if (prob < 0.0)
                    throw ValidationError("behavior strategy at '" + h + "' has a negative entry");
                sum += prob;
            }
            if (std::fabs(sum - 1.0) > 1e-12)
                throw ValidationError("behavior strategy at '" + h + "' does not sum to 1");
        }
        for (const auto& h : owned[p])
            if (!strat.by_info_set.count(h))
                throw ValidationError("incomplete profile: missing distribution for information set '" +
                                      h + "'");
    }
}

double local_payoff(const GameTree& t, const std::string& terminal_id) {
    const Outcome& o = t.outcomes().at(terminal_id);
    if (o.kind != Outcome::Kind::LocalPayoff)
        throw NotGroundedError("utilities not grounded; zoom-in required (terminal '" +
                               terminal_id + "' references successor '" + o.successor + "')");
    return o.payoff;
}

}  // namespace

const char* to_string(Player p) { return p == Player::Attacker ? "Attacker" : "Defender"; }

void GameTree::add_node(std::string id, NodeKind kind, std::optional<Player> owner,
                        std::optional<std::string> info_set) {
    nodes_.push_back(TreeNode{std::move(id), kind, std::move(owner), std::move(info_set)});
}

void GameTree::add_edge(std::string from, std::string to, std::string action) {
    edges_.push_back(TreeEdge{std::move(from), std::move(to), std::move(action)});
}

void GameTree::set_chance(const std::string& node_id, double prob) { chance_[node_id] = prob; }

void GameTree::set_outcome(const std::string& node_id, Outcome outcome) {
    outcomes_[node_id] = std::move(outcome);
}

const TreeNode* GameTree::find(const std::string& id) const {
    for (const auto& n : nodes_)
        if (n.id == id) return &n;
    return nullptr;
}

std::string ValidationReport::to_string() const {
    std::string s;
    for (const auto& p : problems) {
        s += p;
        s += '\n';
    }
    return s;
}

ValidationReport validate_tree(const GameTree& tree) { return validate_impl(tree, nullptr); }

std::map<std::string, double> outcome_distribution(const GameTree& tree,
                                                   const BehaviorProfile& profile) {
    const Compiled c = compile(tree);
    check_profile(c, profile);
    std::map<std::string, double> tau;
    for (int root : c.roots) {
        // depth-first, multiplying move probabilities along the path
        std::vector<std::pair<int, double>> stack{{root, tree.chance().at(tree.nodes()[root].id)}};
        while (!stack.empty()) {
            auto [x, p] = stack.back();
            stack.pop_back();
            const TreeNode& node = tree.nodes()[x];
            if (node.kind == NodeKind::Terminal) {
                tau[node.id] += p;
                continue;
            }
            const ActionDist& dist = dist_for(c, profile, x);
            for (const auto& [action, child] : c.children[x]) {
                const auto it = dist.find(action);
                const double q = it == dist.end() ? 0.0 : it->second;
                stack.emplace_back(child, p * q);
            }
        }
    }
    return tau;
}

double expected_utility(const GameTree& tree, const BehaviorProfile& profile, Player player) {
    const auto tau = outcome_distribution(tree, profile);
    double u = 0.0;
    for (const auto& [z, p] : tau) u += p * local_payoff(tree, z);
    return player == Player::Attacker ? u : -u;
}

SpneResult solve_spne(const GameTree& tree) {
    const Compiled c = compile(tree);
    for (const auto& [h, members] : c.info_sets)
        if (members.size() > 1)
            throw ValidationError("imperfect information unsupported at micro solver "
                                  "(information set '" +
                                  h + "' has " + std::to_string(members.size()) + " nodes)");

    SpneResult res;
    std::vector<double> value(tree.nodes().size(), 0.0);
    for (int x : c.post_order) {
        const TreeNode& node = tree.nodes()[x];
        if (node.kind == NodeKind::Terminal) {
            value[x] = local_payoff(tree, node.id);
        } else {
            const bool maximize = *node.owner == Player::Attacker;
            int best = -1;
            for (size_t k = 0; k < c.children[x].size(); ++k) {
                const double v = value[c.children[x][k].second];
                if (best < 0 || (maximize ? v > value[c.children[x][best].second]
                                          : v < value[c.children[x][best].second]))
                    best = static_cast<int>(k);
            }
            // children are sorted by action label, so strict improvement keeps
            // the lexicographically smallest action on ties
            value[x] = value[c.children[x][best].second];
            const std::string& action = c.children[x][best].first;
            res.chosen_action[node.id] = action;
            BehaviorStrategy& strat =
                maximize ? res.profile.attacker : res.profile.defender;
            strat.by_info_set[*node.info_set] = ActionDist{{action, 1.0}};
        }
        res.node_value[node.id] = value[x];
    }
    double v = 0.0;
    for (int root : c.roots) v += tree.chance().at(tree.nodes()[root].id) * value[root];
    res.value = v;
    return res;
}

double enumerate_minimax_oracle(const GameTree& tree) {
    const Compiled c = compile(tree);
    std::vector<int> att_nodes, def_nodes;
    for (size_t i = 0; i < tree.nodes().size(); ++i) {
        const TreeNode& n = tree.nodes()[i];
        if (n.kind != NodeKind::Decision) continue;
        if (c.info_sets.at(*n.info_set).size() > 1)
            throw ValidationError("imperfect information unsupported at micro solver "
                                  "(information set '" +
                                  *n.info_set + "')");
        (*n.owner == Player::Attacker ? att_nodes : def_nodes).push_back(static_cast<int>(i));
    }
    if (att_nodes.size() + def_nodes.size() > 12)
        throw OracleBudgetError("enumeration oracle budget exceeded (" +
                                std::to_string(att_nodes.size() + def_nodes.size()) +
                                " decision nodes, limit 12)");

    std::vector<int> att_choice(att_nodes.size(), 0), def_choice(def_nodes.size(), 0);
    std::vector<int> choice_at(tree.nodes().size(), -1);

    auto evaluate = [&]() {
        for (size_t k = 0; k < att_nodes.size(); ++k) choice_at[att_nodes[k]] = att_choice[k];
        for (size_t k = 0; k < def_nodes.size(); ++k) choice_at[def_nodes[k]] = def_choice[k];
        double u = 0.0;
        for (int root : c.roots) {
            int x = root;
            while (tree.nodes()[x].kind != NodeKind::Terminal)
                x = c.children[x][choice_at[x]].second;
            u += tree.chance().at(tree.nodes()[root].id) * local_payoff(tree, tree.nodes()[x].id);
        }
        return u;
    };
    auto advance = [&](std::vector<int>& choice, const std::vector<int>& nodes) {
        for (size_t k = 0; k < choice.size(); ++k) {
            if (++choice[k] < static_cast<int>(c.children[nodes[k]].size())) return true;
            choice[k] = 0;
        }
        return false;
    };

    bool have_best = false;
    double best = 0.0;
    do {
        bool have_worst = false;
        double worst = 0.0;
        std::fill(def_choice.begin(), def_choice.end(), 0);
        do {
            const double u = evaluate();
            if (!have_worst || u < worst) {
                worst = u;
                have_worst = true;
            }
        } while (advance(def_choice, def_nodes));
        if (!have_best || worst > best) {
            best = worst;
            have_best = true;
        }
    } while (advance(att_choice, att_nodes));
    return best;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(const std::string& origin, const std::string& msg) {
    throw ValidationError(origin + ": " + msg);
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& origin, const std::string& where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) known = true;
        if (!known) parse_fail(origin, "unknown key '" + item.key() + "' in " + where);
    }
}

}  // namespace

GameTree parse_tree_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        parse_fail(origin, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) parse_fail(origin, "top level must be an object");
    require_keys(j, {"nodes", "edges", "chance", "outcomes"}, origin, "tree");
    for (const char* k : {"nodes", "edges", "chance", "outcomes"})
        if (!j.contains(k)) parse_fail(origin, std::string("missing key '") + k + "'");

    GameTree t;
    if (!j["nodes"].is_array()) parse_fail(origin, "'nodes' must be an array");
    for (const auto& jn : j["nodes"]) {
        if (!jn.is_object()) parse_fail(origin, "node entries must be objects");
        require_keys(jn, {"id", "kind", "owner", "info_set"}, origin, "node");
        if (!jn.contains("id") || !jn["id"].is_string()) parse_fail(origin, "node missing string 'id'");
        if (!jn.contains("kind") || !jn["kind"].is_string())
            parse_fail(origin, "node missing string 'kind'");
        const std::string id = jn["id"].get<std::string>();
        const std::string kind = jn["kind"].get<std::string>();
        if (kind != "decision" && kind != "terminal")
            parse_fail(origin, "node '" + id + "' has unknown kind '" + kind + "'");
        std::optional<Player> owner;
        if (jn.contains("owner") && !jn["owner"].is_null()) {
            if (!jn["owner"].is_string()) parse_fail(origin, "node '" + id + "' owner must be \"A\"|\"D\"|null");
            const std::string o = jn["owner"].get<std::string>();
            if (o == "A")
                owner = Player::Attacker;
            else if (o == "D")
                owner = Player::Defender;
            else
                parse_fail(origin, "node '" + id + "' has unknown owner '" + o + "'");
        }
        std::optional<std::string> info_set;
        if (jn.contains("info_set") && !jn["info_set"].is_null()) {
            if (!jn["info_set"].is_string())
                parse_fail(origin, "node '" + id + "' info_set must be a string or null");
            info_set = jn["info_set"].get<std::string>();
        }
        t.add_node(id, kind == "decision" ? NodeKind::Decision : NodeKind::Terminal, owner,
                   info_set);
    }

    if (!j["edges"].is_array()) parse_fail(origin, "'edges' must be an array");
    for (const auto& je : j["edges"]) {
        if (!je.is_object()) parse_fail(origin, "edge entries must be objects");
        require_keys(je, {"from", "to", "action"}, origin, "edge");
        for (const char* k : {"from", "to", "action"})
            if (!je.contains(k) || !je[k].is_string())
                parse_fail(origin, std::string("edge missing string '") + k + "'");
        t.add_edge(je["from"].get<std::string>(), je["to"].get<std::string>(),
                   je["action"].get<std::string>());
    }

    if (!j["chance"].is_object()) parse_fail(origin, "'chance' must be an object");
    for (const auto& item : j["chance"].items()) {
        if (!item.value().is_number())
            parse_fail(origin, "chance probability for '" + item.key() + "' must be a number");
        t.set_chance(item.key(), item.value().get<double>());
    }

    if (!j["outcomes"].is_object()) parse_fail(origin, "'outcomes' must be an object");
    for (const auto& item : j["outcomes"].items()) {
        const json& jo = item.value();
        if (!jo.is_object()) parse_fail(origin, "outcome for '" + item.key() + "' must be an object");
        require_keys(jo, {"succ", "payoff"}, origin, "outcome");
        if (jo.contains("succ") == jo.contains("payoff"))
            parse_fail(origin, "outcome for '" + item.key() +
                                   "' must have exactly one of 'succ' or 'payoff'");
        if (jo.contains("succ")) {
            if (!jo["succ"].is_string())
                parse_fail(origin, "outcome 'succ' for '" + item.key() + "' must be a string");
            t.set_outcome(item.key(), Outcome::succ(jo["succ"].get<std::string>()));
        } else {
            if (!jo["payoff"].is_number())
                parse_fail(origin, "outcome 'payoff' for '" + item.key() + "' must be a number");
            t.set_outcome(item.key(), Outcome::local(jo["payoff"].get<double>()));
        }
    }
    return t;
}

std::string tree_to_json(const GameTree& tree) {
    ordered_json j;
    j["nodes"] = ordered_json::array();
    for (const auto& n : tree.nodes()) {
        ordered_json jn;
        jn["id"] = n.id;
        jn["kind"] = n.kind == NodeKind::Decision ? "decision" : "terminal";
        jn["owner"] = n.owner ? ordered_json(*n.owner == Player::Attacker ? "A" : "D")
                              : ordered_json(nullptr);
        jn["info_set"] = n.info_set ? ordered_json(*n.info_set) : ordered_json(nullptr);
        j["nodes"].push_back(jn);
    }
    j["edges"] = ordered_json::array();
    for (const auto& e : tree.edges())
        j["edges"].push_back(ordered_json{{"from", e.from}, {"to", e.to}, {"action", e.action}});
    j["chance"] = ordered_json::object();
    for (const auto& [id, p] : tree.chance()) j["chance"][id] = p;
    j["outcomes"] = ordered_json::object();
    for (const auto& [id, o] : tree.outcomes()) {
        if (o.kind == Outcome::Kind::Successor)
            j["outcomes"][id] = ordered_json{{"succ", o.successor}};
        else
            j["outcomes"][id] = ordered_json{{"payoff", o.payoff}};
    }
    return j.dump(2) + "\n";
}

GameTree load_tree(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read tree file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_tree_json(buf.str(), path.filename().string());
}

void save_tree(const GameTree& tree, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write tree file '" + path.string() + "'");
    out << tree_to_json(tree);
    if (!out) throw IoError("failed writing tree file '" + path.string() + "'");
}

}  // namespace multires
