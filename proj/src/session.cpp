#include "multires/session.hpp"

#include <algorithm>
#include <sstream>

namespace multires {

ValidationReport validate_plan(const OperationPlan& plan) {
    ValidationReport rep;
    std::map<std::string, bool> live;  // vertex -> has an unconsumed zoom-in
    for (size_t i = 0; i < plan.size(); ++i) {
        const PlanStep& step = plan[i];
        if (step.op == ZoomOp::In) {
            live[step.vertex] = true;
        } else if (!live[step.vertex]) {
            rep.problems.push_back("step " + std::to_string(i + 1) + ": zoom-out on '" +
                                   step.vertex + "' without a live preceding zoom-in");
        } else {
            live[step.vertex] = false;
        }
    }
    return rep;
}

OperationPlan parse_plan_text(const std::string& text, const std::string& origin) {
    OperationPlan plan;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string op, vertex, extra;
        if (!(ls >> op)) continue;  // blank line
        if (!(ls >> vertex) || (ls >> extra))
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": expected '<in|out> <vertex>'");
        if (op == "in")
            plan.push_back({ZoomOp::In, vertex});
        else if (op == "out")
            plan.push_back({ZoomOp::Out, vertex});
        else
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": unknown operation '" +
                                  op + "'");
    }
    return plan;
}

std::string plan_to_text(const OperationPlan& plan) {
    std::string out;
    for (const PlanStep& step : plan) {
        out += step.op == ZoomOp::In ? "in " : "out ";
        out += step.vertex;
        out += '\n';
    }
    return out;
}

std::vector<std::string> outcome_set(const MacroGame& game, int s) {
    if (s < 0 || s >= game.count()) throw ValidationError("unknown vertex index");
    std::vector<std::string> out;
    for (int t : game.action_targets(s)) out.push_back(game.id(t));
    return out;
}

Session::Session(MacroGame game, std::map<std::string, GameTree> trees, SolveOptions opts)
    : game_(std::move(game)), trees_(std::move(trees)), opts_(std::move(opts)),
      config_(game_.count(), Level::Macro) {
    SpeResult base = solve_spe(game_, opts_);
    values_ = std::move(base.values);
    attacker_ = std::move(base.attacker);
    defender_ = std::move(base.defender);
}

const MicroRecord& Session::micro(const std::string& vertex) const {
    const auto it = micro_.find(vertex);
    if (it == micro_.end())
        throw ValidationError("vertex '" + vertex + "' has no micro solution yet");
    return it->second;
}

void Session::zoom_in(const std::string& vertex) {
    const int s = game_.index(vertex);
    const auto tree_it = trees_.find(vertex);
    if (tree_it == trees_.end())
        throw ValidationError("no game tree registered for vertex '" + vertex + "'");
    const GameTree& tree = tree_it->second;

    const auto& targets = game_.action_targets(s);
    auto target_row = [&](const std::string& succ) -> int {
        for (size_t i = 0; i < targets.size(); ++i)
            if (game_.id(targets[i]) == succ) return static_cast<int>(i);
        return -1;
    };

    // Ground successor-referencing terminals from the current macro profile:
    // the expected stage payoff of playing edge (s, s') against pi_D(.|s).
    const PayoffMatrix m = stage_matrix(game_, s, values_);
    const std::vector<double>& def_mix = defender_.probs[s];
    GameTree grounded = tree;
    for (const auto& [terminal, outcome] : tree.outcomes()) {
        if (outcome.kind != Outcome::Kind::Successor) continue;  // absorbing payoffs stay as-is
        const int row = target_row(outcome.successor);
        if (row < 0)
            throw ValidationError("inconsistent tree/topology: terminal '" + terminal +
                                  "' of vertex '" + vertex + "' references '" + outcome.successor +
                                  "', which is not in its outcome set");
        double r = 0.0;
        for (int j = 0; j < m.cols(); ++j) r += def_mix[j] * m.at(row, j);
        grounded.set_outcome(terminal, Outcome::local(r));
    }

    MicroRecord rec;
    rec.spne = solve_spne(grounded);
    rec.tau_terminals = outcome_distribution(grounded, rec.spne.profile);

    // Aggregate terminal probabilities by macro outcome: successor references
    // by their target, absorbing payoffs to the stay outcome.
    rec.tau_actions.assign(targets.size(), 0.0);
    for (const auto& [terminal, p] : rec.tau_terminals) {
        const Outcome& o = tree.outcomes().at(terminal);
        const int row = o.kind == Outcome::Kind::Successor ? target_row(o.successor) : 0;
        rec.tau_actions[row] += p;
    }
    rec.grounded = std::move(grounded);
    micro_[vertex] = std::move(rec);
    config_[s] = Level::Micro;
}

void Session::zoom_out(const std::string& vertex) {
    const int s = game_.index(vertex);
    if (config_[s] != Level::Micro || !micro_.count(vertex))
        throw PlanOrderError("zoom-out on '" + vertex + "' without a prior zoom-in");

    pins_[s] = micro_.at(vertex).tau_actions;
    SpeResult r = solve_pinned_spe(game_, pins_, opts_);
    values_ = std::move(r.values);
    attacker_ = std::move(r.attacker);
    defender_ = std::move(r.defender);
    config_[s] = Level::Macro;
}

std::vector<StepRecord> Session::run_plan(const OperationPlan& plan) {
    const ValidationReport rep = validate_plan(plan);
    if (!rep.ok()) throw PlanOrderError("invalid operation plan: " + rep.problems.front());

    std::vector<StepRecord> log;
    log.reserve(plan.size());
    for (const PlanStep& step : plan) {
        if (step.op == ZoomOp::In)
            zoom_in(step.vertex);
        else
            zoom_out(step.vertex);
        log.push_back(StepRecord{step.op, step.vertex, values_});
    }
    return log;
}

}  // namespace multires
