#include "multires/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace multires {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& origin, const std::string& key, const std::string& msg) {
    throw ValidationError(origin + ": " + key + ": " + msg);
}

double require_number(const json& j, const std::string& origin, const std::string& key,
                      const std::string& path) {
    if (!j.contains(key) || !j[key].is_number()) fail(origin, path, "must be a number");
    return j[key].get<double>();
}

std::string require_string(const json& j, const std::string& origin, const std::string& key,
                           const std::string& path) {
    if (!j.contains(key) || !j[key].is_string()) fail(origin, path, "must be a string");
    return j[key].get<std::string>();
}

std::string fmt(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scenario file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string origin = path.filename().string();

    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw ValidationError(origin + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) fail(origin, "$", "top level must be an object");

    static const std::set<std::string> known = {"format_version", "name",     "description",
                                                "vertices",       "edges",    "beta",
                                                "gamma",          "lambda_A", "trees",
                                                "plans"};
    for (const auto& item : j.items())
        if (!known.count(item.key())) fail(origin, item.key(), "unknown key (rejected)");

    if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
        j["format_version"].get<int>() != 1)
        fail(origin, "format_version", "must be 1");
    const std::string name = require_string(j, origin, "name", "name");
    const std::string description =
        j.contains("description") ? require_string(j, origin, "description", "description") : "";

    if (!j.contains("vertices") || !j["vertices"].is_array() || j["vertices"].empty())
        fail(origin, "vertices", "must be a non-empty array");
    std::vector<MacroVertex> vertices;
    for (size_t i = 0; i < j["vertices"].size(); ++i) {
        const json& jv = j["vertices"][i];
        const std::string key = "vertices[" + std::to_string(i) + "]";
        if (!jv.is_object()) fail(origin, key, "must be an object");
        for (const auto& item : jv.items())
            if (item.key() != "id" && item.key() != "nu")
                fail(origin, key + "." + item.key(), "unknown key (rejected)");
        MacroVertex v;
        v.id = require_string(jv, origin, "id", key + ".id");
        v.nu = require_number(jv, origin, "nu", key + ".nu");
        if (!(v.nu > 0.0)) fail(origin, key + ".nu", "must be > 0");
        vertices.push_back(std::move(v));
    }

    if (!j.contains("edges") || !j["edges"].is_array()) fail(origin, "edges", "must be an array");
    std::vector<std::pair<std::string, std::string>> edges;
    for (size_t i = 0; i < j["edges"].size(); ++i) {
        const json& je = j["edges"][i];
        const std::string key = "edges[" + std::to_string(i) + "]";
        if (!je.is_array() || je.size() != 2 || !je[0].is_string() || !je[1].is_string())
            fail(origin, key, "must be a [from, to] pair of vertex ids");
        edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
    }

    const double beta = require_number(j, origin, "beta", "beta");
    if (!(beta < 0.0)) fail(origin, "beta", "must be < 0");
    const double gamma = require_number(j, origin, "gamma", "gamma");
    if (!(gamma >= 0.0 && gamma < 1.0)) fail(origin, "gamma", "gamma must be < 1 and >= 0");
    const double lambda_a = require_number(j, origin, "lambda_A", "lambda_A");
    if (!(lambda_a >= 0.0 && lambda_a <= 1.0)) fail(origin, "lambda_A", "must be in [0, 1]");

    MacroGame game = [&] {
        try {
            return MacroGame(vertices, edges, beta, gamma, lambda_a);
        } catch (const ValidationError& e) {
            fail(origin, "edges", e.what());
        }
    }();

    std::map<std::string, std::string> tree_files;
    std::map<std::string, GameTree> trees;
    if (!j.contains("trees") || !j["trees"].is_object()) fail(origin, "trees", "must be an object");
    for (const auto& item : j["trees"].items()) {
        const std::string key = "trees." + item.key();
        bool known_vertex = false;
        for (const auto& v : vertices) known_vertex |= v.id == item.key();
        if (!known_vertex) fail(origin, key, "references unknown vertex");
        if (!item.value().is_string()) fail(origin, key, "must be a path string");
        const std::string rel = item.value().get<std::string>();
        const std::filesystem::path tree_path = path.parent_path() / rel;
        GameTree tree = load_tree(tree_path);
        const ValidationReport rep = validate_tree(tree);
        if (!rep.ok()) fail(origin, key, rel + ": " + rep.problems.front());
        // successor references must stay within the vertex's outcome set
        const int s = game.index(item.key());
        const auto outs = outcome_set(game, s);
        for (const auto& [terminal, outcome] : tree.outcomes()) {
            if (outcome.kind != Outcome::Kind::Successor) continue;
            if (std::find(outs.begin(), outs.end(), outcome.successor) == outs.end())
                fail(origin, key,
                     rel + ": terminal '" + terminal + "' references '" + outcome.successor +
                         "', not adjacent to '" + item.key() + "'");
        }
        tree_files[item.key()] = rel;
        trees[item.key()] = std::move(tree);
    }

    std::map<std::string, OperationPlan> plans;
    if (!j.contains("plans") || !j["plans"].is_object()) fail(origin, "plans", "must be an object");
    for (const auto& item : j["plans"].items()) {
        const std::string key = "plans." + item.key();
        if (!item.value().is_array()) fail(origin, key, "must be an array of [op, vertex] pairs");
        OperationPlan plan;
        for (size_t i = 0; i < item.value().size(); ++i) {
            const json& js = item.value()[i];
            const std::string skey = key + "[" + std::to_string(i) + "]";
            if (!js.is_array() || js.size() != 2 || !js[0].is_string() || !js[1].is_string())
                fail(origin, skey, "must be an [\"in\"|\"out\", vertex] pair");
            const std::string op = js[0].get<std::string>();
            const std::string vertex = js[1].get<std::string>();
            if (op != "in" && op != "out") fail(origin, skey, "operation must be 'in' or 'out'");
            bool known_vertex = false;
            for (const auto& v : vertices) known_vertex |= v.id == vertex;
            if (!known_vertex) fail(origin, skey, "references unknown vertex '" + vertex + "'");
            plan.push_back({op == "in" ? ZoomOp::In : ZoomOp::Out, vertex});
        }
        const ValidationReport rep = validate_plan(plan);
        if (!rep.ok()) fail(origin, key, rep.problems.front());
        // zoom-in needs a tree at that vertex
        for (const PlanStep& step : plan)
            if (step.op == ZoomOp::In && !trees.count(step.vertex))
                fail(origin, key, "zooms into '" + step.vertex + "' which has no tree");
        plans[item.key()] = std::move(plan);
    }

    return Scenario{name, description, std::move(game), std::move(tree_files), std::move(trees),
                    std::move(plans)};
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    ordered_json j;
    j["format_version"] = 1;
    j["name"] = scenario.name;
    if (!scenario.description.empty()) j["description"] = scenario.description;
    j["vertices"] = ordered_json::array();
    for (int s = 0; s < scenario.game.count(); ++s)
        j["vertices"].push_back(
            ordered_json{{"id", scenario.game.id(s)}, {"nu", scenario.game.nu(s)}});
    j["edges"] = ordered_json::array();
    for (const auto& [from, to] : scenario.game.edge_list())
        j["edges"].push_back(ordered_json::array({from, to}));
    j["beta"] = scenario.game.beta();
    j["gamma"] = scenario.game.gamma();
    j["lambda_A"] = scenario.game.lambda_a();
    j["trees"] = ordered_json::object();
    for (const auto& [vertex, rel] : scenario.tree_files) j["trees"][vertex] = rel;
    j["plans"] = ordered_json::object();
    for (const auto& [name, plan] : scenario.plans) {
        ordered_json jp = ordered_json::array();
        for (const PlanStep& step : plan)
            jp.push_back(ordered_json::array(
                {step.op == ZoomOp::In ? "in" : "out", step.vertex}));
        j["plans"][name] = std::move(jp);
    }

    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scenario file '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing scenario file '" + path.string() + "'");

    for (const auto& [vertex, rel] : scenario.tree_files) {
        const std::filesystem::path tree_path = path.parent_path() / rel;
        if (!tree_path.parent_path().empty())
            std::filesystem::create_directories(tree_path.parent_path());
        save_tree(scenario.trees.at(vertex), tree_path);
    }
}

RunRecord make_run_record(const Scenario& scenario, const std::string& plan_name,
                          const Session& session, const std::vector<StepRecord>& steps) {
    const MacroGame& game = session.game();
    RunRecord rec;
    rec.scenario = scenario.name;
    rec.plan = plan_name;
    rec.lambda_a = game.lambda_a();
    rec.gamma = game.gamma();
    for (int s = 0; s < game.count(); ++s)
        rec.values.emplace_back(game.id(s), session.values()[s]);
    std::sort(rec.values.begin(), rec.values.end());
    auto fill = [&](const MacroStrategy& strat, StrategyTable& table) {
        for (int s = 0; s < game.count(); ++s) {
            const auto& targets = game.action_targets(s);
            std::map<std::string, double> row;
            for (size_t i = 0; i < targets.size(); ++i)
                row[game.id(targets[i])] = strat.probs[s][i];
            table.by_vertex[game.id(s)] = std::move(row);
        }
    };
    fill(session.attacker(), rec.attacker);
    fill(session.defender(), rec.defender);
    for (const StepRecord& step : steps) {
        ExportStep es;
        es.op = step.op == ZoomOp::In ? "in" : "out";
        es.vertex = step.vertex;
        for (int s = 0; s < game.count(); ++s) es.values.emplace_back(game.id(s), step.values[s]);
        std::sort(es.values.begin(), es.values.end());
        rec.steps.push_back(std::move(es));
    }
    return rec;
}

namespace {

std::vector<const RunRecord*> sorted_records(const ResultSet& results) {
    std::vector<const RunRecord*> recs;
    for (const auto& r : results.records) recs.push_back(&r);
    std::stable_sort(recs.begin(), recs.end(), [](const RunRecord* a, const RunRecord* b) {
        if (a->plan != b->plan) return a->plan < b->plan;
        return a->lambda_a < b->lambda_a;
    });
    return recs;
}

}  // namespace

std::string results_to_csv(const ResultSet& results) {
    std::string out = "scenario,plan,lambda_A,gamma,vertex,value\n";
    for (const RunRecord* r : sorted_records(results)) {
        for (const auto& [vertex, value] : r->values) {
            out += r->scenario;
            out += ',';
            out += r->plan;
            out += ',';
            out += fmt(r->lambda_a, "%.6g");
            out += ',';
            out += fmt(r->gamma, "%.6g");
            out += ',';
            out += vertex;
            out += ',';
            out += fmt(value, "%.6f");
            out += '\n';
        }
    }
    return out;
}

std::string results_to_json(const ResultSet& results) {
    ordered_json arr = ordered_json::array();
    for (const RunRecord* r : sorted_records(results)) {
        ordered_json jr;
        jr["scenario"] = r->scenario;
        jr["plan"] = r->plan;
        jr["lambda_A"] = r->lambda_a;
        jr["gamma"] = r->gamma;
        jr["values"] = ordered_json::object();
        for (const auto& [vertex, value] : r->values) jr["values"][vertex] = value;
        auto dump_strategy = [](const StrategyTable& t) {
            ordered_json js = ordered_json::object();
            for (const auto& [vertex, row] : t.by_vertex) {
                ordered_json jrow = ordered_json::object();
                for (const auto& [target, p] : row) jrow[target] = p;
                js[vertex] = std::move(jrow);
            }
            return js;
        };
        jr["attacker_strategy"] = dump_strategy(r->attacker);
        jr["defender_strategy"] = dump_strategy(r->defender);
        ordered_json jsteps = ordered_json::array();
        for (const ExportStep& step : r->steps) {
            ordered_json js;
            js["op"] = step.op;
            js["vertex"] = step.vertex;
            js["values"] = ordered_json::object();
            for (const auto& [vertex, value] : step.values) js["values"][vertex] = value;
            jsteps.push_back(std::move(js));
        }
        jr["steps"] = std::move(jsteps);
        arr.push_back(std::move(jr));
    }
    return arr.dump(2) + "\n";
}

void export_results(const ResultSet& results, ExportFormat format,
                    const std::filesystem::path& path) {
    if (results.records.empty())
        throw ValidationError("refusing to export an empty result set");
    const std::string text =
        format == ExportFormat::Csv ? results_to_csv(results) : results_to_json(results);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write results to '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("failed writing results to '" + path.string() + "'");
}

}  // namespace multires
