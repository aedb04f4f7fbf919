#pragma once

#include <map>
#include <string>
#include <vector>

#include "multires/game_tree.hpp"
#include "multires/macro_game.hpp"

namespace multires {

enum class Level { Macro, Micro };
enum class ZoomOp { In, Out };

struct PlanStep {
    ZoomOp op = ZoomOp::In;
    std::string vertex;
    bool operator==(const PlanStep&) const = default;
};

/// Ordered zoom operations; every Out must have a live In before it.
using OperationPlan = std::vector<PlanStep>;

/// Reports every zoom-out lacking a live preceding zoom-in on its vertex.
ValidationReport validate_plan(const OperationPlan& plan);

/// Text format: one `in <vertex>` or `out <vertex>` per line, `#` comments.
OperationPlan parse_plan_text(const std::string& text, const std::string& origin);
std::string plan_to_text(const OperationPlan& plan);

/// Successors of s including s itself (self-loop = remaining in the current
/// engagement), in action_targets order.
std::vector<std::string> outcome_set(const MacroGame& game, int s);

/// Everything a zoom-in produces for one vertex: the grounded tree (successor
/// references replaced by expected macro continuation values), its SPNE, and
/// the induced outcome distribution.
struct MicroRecord {
    GameTree grounded;
    SpneResult spne;
    std::map<std::string, double> tau_terminals;  // per terminal node
    std::vector<double> tau_actions;              // aggregated per macro action
};

struct StepRecord {
    ZoomOp op;
    std::string vertex;
    ValueFunction values;  // after the operation
};

/// Mutable multi-resolution state: a resolution level per vertex, the running
/// macro equilibrium, attacker pins produced by zoom-outs, and the micro
/// solutions of every vertex zoomed so far. Construction solves the fully
/// abstracted game (all vertices at macro level).
class Session {
public:
    Session(MacroGame game, std::map<std::string, GameTree> trees, SolveOptions opts = {});

    const MacroGame& game() const { return game_; }
    const ValueFunction& values() const { return values_; }
    const MacroStrategy& attacker() const { return attacker_; }
    const MacroStrategy& defender() const { return defender_; }
    const std::vector<Level>& config() const { return config_; }
    Level level(const std::string& vertex) const { return config_[game_.index(vertex)]; }
    const PinMap& pins() const { return pins_; }
    bool has_micro(const std::string& vertex) const { return micro_.count(vertex) > 0; }
    const MicroRecord& micro(const std::string& vertex) const;

    /// Grounds the vertex's tree from the current macro profile, solves it by
    /// backward induction and flips the vertex to micro level.
    void zoom_in(const std::string& vertex);

    /// Transcribes the micro outcome distribution into the attacker's macro
    /// strategy at the vertex, pins it there, re-solves the macro game and
    /// flips the vertex back to macro level.
    void zoom_out(const std::string& vertex);

    /// Validates and applies the plan, logging values after every operation.
    std::vector<StepRecord> run_plan(const OperationPlan& plan);

private:
    MacroGame game_;
    std::map<std::string, GameTree> trees_;
    SolveOptions opts_;
    std::vector<Level> config_;
    ValueFunction values_;
    MacroStrategy attacker_;
    MacroStrategy defender_;
    PinMap pins_;
    std::map<std::string, MicroRecord> micro_;
};

}  // namespace multires
