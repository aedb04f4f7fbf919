#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "multires/game_tree.hpp"
#include "multires/macro_game.hpp"
#include "multires/session.hpp"

namespace multires {

/// A complete solvable case: macro graph with parameters, one game tree per
/// vertex that has one, and named operation plans.
struct Scenario {
    std::string name;
    std::string description;
    MacroGame game;
    std::map<std::string, std::string> tree_files;  // vertex -> path relative to the scenario
    std::map<std::string, GameTree> trees;
    std::map<std::string, OperationPlan> plans;
};

/// Loads and fully validates a scenario. Errors name the file and the first
/// offending key. Trees are loaded relative to the scenario file and must
/// validate; their successor references must match the macro edge set.
Scenario load_scenario(const std::filesystem::path& path);

/// Writes the scenario and its trees under the directory of `path`.
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

struct StrategyTable {
    // vertex id -> (target vertex id -> probability); self target = hold/secure nothing
    std::map<std::string, std::map<std::string, double>> by_vertex;
};

struct ExportStep {
    std::string op;      // "in" | "out"
    std::string vertex;
    std::vector<std::pair<std::string, double>> values;  // after the step, id-sorted
};

struct RunRecord {
    std::string scenario;
    std::string plan;
    double lambda_a = 0.0;
    double gamma = 0.0;
    std::vector<std::pair<std::string, double>> values;  // vertex id -> value, id-sorted
    StrategyTable attacker;
    StrategyTable defender;
    std::vector<ExportStep> steps;
};

struct ResultSet {
    std::vector<RunRecord> records;
};

enum class ExportFormat { Csv, Json };

RunRecord make_run_record(const Scenario& scenario, const std::string& plan_name,
                          const Session& session, const std::vector<StepRecord>& steps);

/// CSV columns: scenario,plan,lambda_A,gamma,vertex,value with 6-decimal
/// values, rows ordered by (plan, lambda_A, vertex). JSON carries the same
/// records plus strategies and step logs. Output is byte-deterministic.
void export_results(const ResultSet& results, ExportFormat format,
                    const std::filesystem::path& path);

std::string results_to_csv(const ResultSet& results);
std::string results_to_json(const ResultSet& results);

}  // namespace multires
