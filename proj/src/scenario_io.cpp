#include "matchfield/scenario_io.hpp"

#include "matchfield/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace matchfield {

using nlohmann::json;

namespace {

void reject_unknown(const json &obj, const std::set<std::string> &allowed, const std::string &where)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.contains(it.key()))
            throw ParseError(fmt::format("unknown key '{}' in {}", it.key(), where));
}

const json &require(const json &obj, const std::string &key, const std::string &where)
{
    auto it = obj.find(key);
    if (it == obj.end())
        throw ParseError(fmt::format("missing key '{}' in {}", key, where));
    return *it;
}

void expect_object(const json &j, const std::string &where)
{
    if (!j.is_object())
        throw ParseError(where + " must be an object");
}

double number(const json &j, const std::string &where)
{
    if (!j.is_number())
        throw ParseError(where + " must be a number");
    return j.get<double>();
}

std::int64_t integer(const json &j, const std::string &where)
{
    if (!j.is_number_integer())
        throw ParseError(where + " must be an integer");
    return j.get<std::int64_t>();
}

/// Nested array of numbers with the given shape, flattened row-major.
void read_tensor(const json &j, int K, int rank, const std::string &where, std::vector<double> &out)
{
    if (rank == 0) {
        out.push_back(number(j, where));
        return;
    }
    if (!j.is_array() || static_cast<int>(j.size()) != K)
        throw ParseError(fmt::format("{} must be an array of length {}", where, K));
    for (int i = 0; i < K; ++i)
        read_tensor(j[i], K, rank - 1, fmt::format("{}[{}]", where, i + 1), out);
}

std::vector<std::vector<double>> read_matrix(const json &j, int rows, int cols, const std::string &where)
{
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ParseError(fmt::format("{} must be an array of {} rows", where, rows));
    std::vector<std::vector<double>> out(rows);
    for (int r = 0; r < rows; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
            throw ParseError(fmt::format("{}[{}] must have {} entries", where, r + 1, cols));
        for (int c = 0; c < cols; ++c)
            out[r].push_back(number(j[r][c], fmt::format("{}[{}][{}]", where, r + 1, c + 1)));
    }
    return out;
}

struct ParsedTable {
    InputMatrices inputs;
    FeedbackRule rule;
};

ParsedTable read_table(const json &j, int K, IntensityMode mode, const std::string &where)
{
    expect_object(j, where);
    const bool feedback = mode == IntensityMode::feedback;
    if (feedback)
        reject_unknown(j, {"eta", "xi", "sigma", "varsigma", "c", "cap"}, where);
    else
        reject_unknown(j, {"eta", "theta", "xi", "sigma", "varsigma"}, where);

    ParsedTable t{InputMatrices(K), {}};
    std::vector<double> flat;
    auto load = [&](const char *key, int rank, auto &&assign) {
        flat.clear();
        read_tensor(require(j, key, where), K, rank, where + "." + key, flat);
        assign(flat);
    };
    load("eta", 2, [&](const std::vector<double> &v) {
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                t.inputs.eta(a, b) = v[a * K + b];
    });
    if (!feedback)
        load("theta", 2, [&](const std::vector<double> &v) {
            for (int a = 0; a < K; ++a)
                for (int b = 0; b < K; ++b)
                    t.inputs.theta(a, b) = v[a * K + b];
        });
    t.inputs.recompute_b();
    load("xi", 2, [&](const std::vector<double> &v) {
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                t.inputs.xi(a, b) = v[a * K + b];
    });
    load("sigma", 4, [&](const std::vector<double> &v) {
        std::size_t i = 0;
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                for (int c = 0; c < K; ++c)
                    for (int d = 0; d < K; ++d)
                        t.inputs.sigma(a, b, c, d) = v[i++];
    });
    load("varsigma", 3, [&](const std::vector<double> &v) {
        std::size_t i = 0;
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                for (int c = 0; c < K; ++c)
                    t.inputs.varsigma(a, b, c) = v[i++];
    });
    if (feedback) {
        t.rule.c = read_matrix(require(j, "c", where), K, K, where + ".c");
        t.rule.cap = read_matrix(require(j, "cap", where), K, K, where + ".cap");
    }
    return t;
}

Distribution read_p0(const json &j, int K)
{
    if (!j.is_array())
        throw ParseError("p0 must be an array of [k, l, mass] triples");
    Distribution p(K);
    std::vector<bool> seen(p.size(), false);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json &t = j[i];
        const std::string where = fmt::format("p0[{}]", i + 1);
        if (!t.is_array() || t.size() != 3)
            throw ParseError(where + " must be a [k, l, mass] triple");
        const auto k = integer(t[0], where + " type");
        if (k < 1 || k > K)
            throw ParseError(fmt::format("{} type {} outside 1..{}", where, k, K));
        int partner;
        if (t[1].is_string()) {
            if (t[1].get<std::string>() != "J")
                throw ParseError(where + " partner must be a type index or \"J\"");
            partner = kUnmatched;
        } else {
            const auto l = integer(t[1], where + " partner");
            if (l < 1 || l > K)
                throw ParseError(fmt::format("{} partner {} outside 1..{}", where, l, K));
            partner = static_cast<int>(l - 1);
        }
        const std::size_t idx = p.space().index(static_cast<int>(k - 1), partner);
        if (seen[idx])
            throw ParseError(where + " repeats a cell");
        seen[idx] = true;
        p[idx] = number(t[2], where + " mass");
    }
    return p;
}

EnvironmentProcess read_environment(const json &j)
{
    expect_object(j, "environment");
    reject_unknown(j, {"states", "transition", "initial", "path_mode", "path"}, "environment");
    EnvironmentProcess env;
    env.states.clear();
    const json &states = require(j, "states", "environment");
    if (!states.is_array() || states.empty())
        throw ParseError("environment.states must be a non-empty array of labels");
    for (const auto &s : states) {
        if (!s.is_string())
            throw ParseError("environment.states entries must be strings");
        env.states.push_back(s.get<std::string>());
    }
    const int S = env.state_count();
    env.transition = read_matrix(require(j, "transition", "environment"), S, S, "environment.transition");
    auto state_index = [&](const json &v, const std::string &where) {
        if (!v.is_string())
            throw ParseError(where + " must be a state label");
        const auto it = std::find(env.states.begin(), env.states.end(), v.get<std::string>());
        if (it == env.states.end())
            throw ParseError(fmt::format("{} names unknown state \"{}\"", where, v.get<std::string>()));
        return static_cast<int>(it - env.states.begin());
    };
    env.initial = state_index(require(j, "initial", "environment"), "environment.initial");
    const json &mode = require(j, "path_mode", "environment");
    if (mode == "fixed")
        env.path_mode = PathMode::fixed;
    else if (mode == "sampled")
        env.path_mode = PathMode::sampled;
    else
        throw ParseError("environment.path_mode must be \"fixed\" or \"sampled\"");
    if (auto it = j.find("path"); it != j.end()) {
        if (!it->is_array())
            throw ParseError("environment.path must be an array of state labels");
        for (const auto &s : *it)
            env.path.push_back(state_index(s, "environment.path entry"));
    }
    if (env.path_mode == PathMode::fixed && env.path.empty())
        throw ParseError("environment.path is required when path_mode is \"fixed\"");
    if (env.path_mode == PathMode::sampled && !env.path.empty())
        throw ParseError("environment.path is only allowed when path_mode is \"fixed\"");
    return env;
}

IntensitySpec read_intensities(const json &j, int K, const EnvironmentProcess &env)
{
    expect_object(j, "intensities");
    reject_unknown(j, {"mode", "tables"}, "intensities");
    IntensitySpec spec;
    const json &mode = require(j, "mode", "intensities");
    if (mode == "constant")
        spec.mode = IntensityMode::constant;
    else if (mode == "schedule")
        spec.mode = IntensityMode::schedule;
    else if (mode == "feedback")
        spec.mode = IntensityMode::feedback;
    else
        throw ParseError("intensities.mode must be \"constant\", \"schedule\" or \"feedback\"");

    const json &tables = require(j, "tables", "intensities");
    expect_object(tables, "intensities.tables");
    for (auto it = tables.begin(); it != tables.end(); ++it)
        if (std::find(env.states.begin(), env.states.end(), it.key()) == env.states.end())
            throw ParseError(fmt::format("unknown key '{}' in intensities.tables (not an environment state)",
                                         it.key()));

    for (const auto &label : env.states) {
        const std::string where = "intensities.tables." + label;
        const json &entry = require(tables, label, "intensities.tables");
        std::vector<InputMatrices> per_state;
        if (spec.mode == IntensityMode::schedule) {
            if (!entry.is_array() || entry.empty())
                throw ParseError(where + " must be a non-empty array of per-period tables");
            for (std::size_t t = 0; t < entry.size(); ++t)
                per_state.push_back(read_table(entry[t], K, spec.mode, fmt::format("{}[{}]", where, t + 1)).inputs);
        } else {
            auto parsed = read_table(entry, K, spec.mode, where);
            per_state.push_back(std::move(parsed.inputs));
            if (spec.mode == IntensityMode::feedback)
                spec.feedback.push_back(std::move(parsed.rule));
        }
        spec.tables.push_back(std::move(per_state));
    }
    return spec;
}

json write_table(const InputMatrices &m, const FeedbackRule *rule)
{
    const int K = m.types();
    json t = json::object();
    json eta = json::array(), theta = json::array(), xi = json::array(), sigma = json::array(),
         varsigma = json::array();
    for (int a = 0; a < K; ++a) {
        json eta_row = json::array(), theta_row = json::array(), xi_row = json::array(),
             sigma_row = json::array(), vs_row = json::array();
        for (int b = 0; b < K; ++b) {
            eta_row.push_back(m.eta(a, b));
            theta_row.push_back(m.theta(a, b));
            xi_row.push_back(m.xi(a, b));
            json block = json::array(), vs = json::array();
            for (int c = 0; c < K; ++c) {
                json row = json::array();
                for (int d = 0; d < K; ++d)
                    row.push_back(m.sigma(a, b, c, d));
                block.push_back(std::move(row));
                vs.push_back(m.varsigma(a, b, c));
            }
            sigma_row.push_back(std::move(block));
            vs_row.push_back(std::move(vs));
        }
        eta.push_back(std::move(eta_row));
        theta.push_back(std::move(theta_row));
        xi.push_back(std::move(xi_row));
        sigma.push_back(std::move(sigma_row));
        varsigma.push_back(std::move(vs_row));
    }
    t["eta"] = std::move(eta);
    if (rule == nullptr)
        t["theta"] = std::move(theta);
    t["xi"] = std::move(xi);
    t["sigma"] = std::move(sigma);
    t["varsigma"] = std::move(varsigma);
    if (rule != nullptr) {
        t["c"] = rule->c;
        t["cap"] = rule->cap;
    }
    return t;
}

} // namespace

ScenarioConfig parse_scenario(const std::string &text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError(std::string("malformed scenario: ") + e.what());
    }
    expect_object(root, "scenario");
    reject_unknown(root,
                   {"types", "horizon", "population", "master_seed", "replications", "p0", "environment",
                    "intensities"},
                   "scenario");

    try {
        ScenarioConfig sc;
        const auto K = integer(require(root, "types", "scenario"), "types");
        if (K < 1 || K > 1000)
            throw ParseError("types must be between 1 and 1000");
        sc.types = static_cast<int>(K);
        sc.horizon = static_cast<int>(integer(require(root, "horizon", "scenario"), "horizon"));
        sc.population = integer(require(root, "population", "scenario"), "population");
        const json &seed = require(root, "master_seed", "scenario");
        if (!seed.is_number_unsigned())
            throw ParseError("master_seed must be a non-negative integer");
        sc.master_seed = seed.get<std::uint64_t>();
        if (auto it = root.find("replications"); it != root.end())
            sc.replications = static_cast<int>(integer(*it, "replications"));
        sc.p0 = read_p0(require(root, "p0", "scenario"), sc.types);
        if (auto it = root.find("environment"); it != root.end())
            sc.environment = read_environment(*it);
        sc.intensities = read_intensities(require(root, "intensities", "scenario"), sc.types, sc.environment);
        return sc;
    } catch (const json::exception &e) {
        throw ParseError(std::string("malformed scenario: ") + e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig &sc)
{
    json root = json::object();
    root["types"] = sc.types;
    root["horizon"] = sc.horizon;
    root["population"] = sc.population;
    root["master_seed"] = sc.master_seed;
    root["replications"] = sc.replications;

    json p0 = json::array();
    for (std::size_t i = 0; i < sc.p0.size(); ++i) {
        if (sc.p0[i] == 0.0)
            continue;
        const auto e = sc.p0.space().at(i);
        json partner = e.matched() ? json(e.partner + 1) : json("J");
        p0.push_back(json::array({e.own + 1, partner, sc.p0[i]}));
    }
    root["p0"] = std::move(p0);

    const auto &env = sc.environment;
    json jenv = json::object();
    jenv["states"] = env.states;
    jenv["transition"] = env.transition;
    jenv["initial"] = env.states.at(env.initial);
    jenv["path_mode"] = env.path_mode == PathMode::fixed ? "fixed" : "sampled";
    if (env.path_mode == PathMode::fixed) {
        json labels = json::array();
        for (int s : env.path)
            labels.push_back(env.states.at(s));
        jenv["path"] = std::move(labels);
    }
    root["environment"] = std::move(jenv);

    const auto &spec = sc.intensities;
    json jint = json::object();
    switch (spec.mode) {
    case IntensityMode::constant: jint["mode"] = "constant"; break;
    case IntensityMode::schedule: jint["mode"] = "schedule"; break;
    case IntensityMode::feedback: jint["mode"] = "feedback"; break;
    }
    json tables = json::object();
    for (std::size_t s = 0; s < spec.tables.size() && s < env.states.size(); ++s) {
        const auto &label = env.states[s];
        if (spec.mode == IntensityMode::schedule) {
            json list = json::array();
            for (const auto &m : spec.tables[s])
                list.push_back(write_table(m, nullptr));
            tables[label] = std::move(list);
        } else {
            const FeedbackRule *rule = spec.mode == IntensityMode::feedback ? &spec.feedback.at(s) : nullptr;
            tables[label] = write_table(spec.tables[s].at(0), rule);
        }
    }
    jint["tables"] = std::move(tables);
    root["intensities"] = std::move(jint);
    return root.dump(2) + "\n";
}

} // namespace matchfield
