#include "matchfield/errors.hpp"
#include "matchfield/scenario_io.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace matchfield;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path &p)
{
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string error_of(const std::string &text)
{
    try {
        parse_scenario(text);
    } catch (const ParseError &e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("shipped scenarios parse and validate")
{
    for (const char *name : {"k1_worked.json", "identity.json", "k2_feedback.json", "k3_feedback.json"}) {
        CAPTURE(name);
        const auto sc = load_scenario(testing::scenario_dir() / name);
        const auto report = sc.validate();
        CHECK_MESSAGE(report.ok(), report.summary());
    }
    const auto k1 = load_scenario(testing::scenario_dir() / "k1_worked.json");
    CHECK(k1.types == 1);
    CHECK(k1.p0.matched(0, 0) == 0.4);
    CHECK(k1.p0.unmatched(0) == 0.6);
    CHECK(k1.intensities.tables[0][0].theta(0, 0) == 0.5);
}

TEST_CASE("parse(serialize(scenario)) reproduces the scenario")
{
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const int K = 1 + trial % 4;
        ScenarioConfig sc;
        sc.types = K;
        sc.horizon = 3 + trial % 5;
        sc.population = 100 + trial;
        sc.master_seed = gen();
        sc.replications = 1 + trial % 3;
        sc.p0 = testing::random_distribution(K, gen);
        sc.environment.states = {"x", "y"};
        sc.environment.transition = {{0.25, 0.75}, {0.125, 0.875}};
        sc.environment.initial = trial % 2;
        if (trial % 3 == 0) {
            sc.environment.path_mode = PathMode::fixed;
            sc.environment.path.assign(sc.horizon, 1);
        }
        switch (trial % 3) {
        case 0:
            sc.intensities.mode = IntensityMode::constant;
            sc.intensities.tables = {{testing::random_inputs(sc.p0, gen)}, {testing::random_inputs(sc.p0, gen)}};
            break;
        case 1:
            sc.intensities.mode = IntensityMode::schedule;
            sc.intensities.tables.resize(2);
            for (auto &per_state : sc.intensities.tables)
                for (int n = 0; n < sc.horizon; ++n)
                    per_state.push_back(testing::random_inputs(sc.p0, gen));
            break;
        default:
            sc.intensities.mode = IntensityMode::feedback;
            for (int s = 0; s < 2; ++s) {
                auto m = testing::random_inputs(sc.p0, gen);
                for (int k = 0; k < K; ++k)
                    for (int l = 0; l < K; ++l)
                        m.theta(k, l) = 0.0;
                m.recompute_b();
                sc.intensities.tables.push_back({m});
                FeedbackRule rule;
                rule.c.assign(K, std::vector<double>(K, 0.3));
                rule.cap.assign(K, std::vector<double>(K, 0.9));
                sc.intensities.feedback.push_back(rule);
            }
        }
        const auto text = serialize_scenario(sc);
        const auto back = parse_scenario(text);
        CHECK(back == sc);
        CHECK(serialize_scenario(back) == text);
    }
}

TEST_CASE("parser rejects malformed scenarios")
{
    const json base = json::parse(read_file(testing::scenario_dir() / "k1_worked.json"));

    SUBCASE("unknown top-level key is named")
    {
        json j = base;
        j["horizn"] = 3;
        CHECK(error_of(j.dump()).find("horizn") != std::string::npos);
    }
    SUBCASE("unknown table key")
    {
        json j = base;
        j["intensities"]["tables"]["default"]["gamma"] = 1;
        CHECK(error_of(j.dump()).find("gamma") != std::string::npos);
    }
    SUBCASE("table for a state that does not exist")
    {
        json j = base;
        j["intensities"]["tables"]["other"] = j["intensities"]["tables"]["default"];
        CHECK(error_of(j.dump()).find("other") != std::string::npos);
    }
    SUBCASE("environment refers to states by label")
    {
        json j = base;
        j["environment"]["initial"] = "stormy";
        CHECK(error_of(j.dump()).find("stormy") != std::string::npos);
        j["environment"]["initial"] = 0;
        CHECK(error_of(j.dump()).find("state label") != std::string::npos);
    }
    SUBCASE("missing required key")
    {
        json j = base;
        j.erase("horizon");
        CHECK(error_of(j.dump()).find("horizon") != std::string::npos);
    }
    SUBCASE("p0 cell outside the type range")
    {
        json j = base;
        j["p0"].push_back(json::array({2, "J", 0.0}));
        CHECK(error_of(j.dump()).find("outside") != std::string::npos);
    }
    SUBCASE("repeated p0 cell")
    {
        json j = base;
        j["p0"].push_back(json::array({1, "J", 0.0}));
        CHECK(error_of(j.dump()).find("repeats") != std::string::npos);
    }
    SUBCASE("ill-shaped sigma")
    {
        json j = base;
        j["intensities"]["tables"]["default"]["sigma"] = json::array({1.0});
        CHECK(error_of(j.dump()).find("sigma") != std::string::npos);
    }
    SUBCASE("theta is not accepted in feedback mode")
    {
        json j = base;
        j["intensities"]["mode"] = "feedback";
        j["intensities"]["tables"]["default"]["c"] = json::array({json::array({1.0})});
        j["intensities"]["tables"]["default"]["cap"] = json::array({json::array({1.0})});
        CHECK(error_of(j.dump()).find("theta") != std::string::npos);
    }
    SUBCASE("not JSON at all")
    {
        CHECK(error_of("types = 3").find("malformed") != std::string::npos);
    }
}

TEST_CASE("semantic problems surface in validate, not in the parser")
{
    json j = json::parse(read_file(testing::scenario_dir() / "identity.json"));
    j["intensities"]["tables"]["a"]["eta"][0] = json::array({1.0, 0.1});
    const auto sc = parse_scenario(j.dump());
    const auto report = sc.validate();
    CHECK_FALSE(report.ok());
    CHECK(report.summary().find("eta row 1") != std::string::npos);
}
