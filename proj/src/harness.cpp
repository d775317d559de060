#include "matchfield/harness.hpp"

#include "matchfield/errors.hpp"
#include "matchfield/scenario_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace matchfield {

double total_variation(const Distribution &p, const Distribution &q)
{
    if (p.types() != q.types())
        throw InvalidInputs("cannot compare distributions over different type spaces");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

double linf_distance(const Distribution &p, const Distribution &q)
{
    if (p.types() != q.types())
        throw InvalidInputs("cannot compare distributions over different type spaces");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s = std::max(s, std::abs(p[i] - q[i]));
    return s;
}

unsigned worker_count(std::size_t jobs)
{
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("MATCHFIELD_THREADS")) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            cap = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(cap, jobs)));
}

void for_each_replication(int count, const std::function<void(int)> &job)
{
    if (count <= 0)
        return;
    std::vector<std::exception_ptr> errors(count);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < count; r = next++) {
            try {
                job(r);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const unsigned n = worker_count(static_cast<std::size_t>(count));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t)
            pool.emplace_back(worker);
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

std::vector<double> gz_residuals(const MeanfieldTrajectory &traj)
{
    std::vector<double> out;
    const auto matrices = transition_matrices(traj);
    for (std::size_t n = 0; n < matrices.size(); ++n)
        out.push_back(linf_distance(evolve(traj.hat[n], matrices[n]), traj.hat[n + 1]));
    return out;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty())
        return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

const Distribution &meanfield_stage(const MeanfieldTrajectory &traj, int n, Stage s)
{
    switch (s) {
    case Stage::check: return traj.check[n];
    case Stage::ccheck: return traj.ccheck[n];
    case Stage::hat: break;
    }
    return traj.hat[n];
}

constexpr Stage kStages[] = {Stage::check, Stage::ccheck, Stage::hat};

} // namespace

ComparisonReport run_comparison(const ScenarioConfig &scenario)
{
    std::vector<std::vector<ComparisonRow>> per_rep(scenario.replications);
    for_each_replication(scenario.replications, [&](int r) {
        const auto path = scenario.environment_path(r);
        const auto traj = iterate_meanfield(scenario, path);
        const auto residuals = gz_residuals(traj);
        const auto sim = run_simulation(scenario, path, r);

        auto &rows = per_rep[r];
        rows.push_back({r, 0, path.front(), Stage::hat, total_variation(sim.initial, scenario.p0),
                        linf_distance(sim.initial, scenario.p0), 0.0});
        for (int n = 1; n <= scenario.horizon; ++n) {
            const auto &snap = sim.periods[n - 1];
            for (Stage s : kStages) {
                const auto &empirical = snap.stages[static_cast<int>(s)];
                const auto &expected = meanfield_stage(traj, n, s);
                rows.push_back({r, n, snap.env_state, s, total_variation(empirical, expected),
                                linf_distance(empirical, expected), residuals[n - 1]});
            }
        }
    });

    ComparisonReport report;
    for (auto &rows : per_rep)
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());

    std::map<std::pair<int, int>, std::pair<std::vector<double>, double>> groups;
    for (const auto &row : report.rows) {
        auto &g = groups[{row.period, static_cast<int>(row.stage)}];
        g.first.push_back(row.tv);
        g.second = std::max(g.second, row.linf);
    }
    for (const auto &[key, g] : groups) {
        ComparisonSummary s;
        s.period = key.first;
        s.stage = static_cast<Stage>(key.second);
        s.tv_min = quantile(g.first, 0.0);
        s.tv_q25 = quantile(g.first, 0.25);
        s.tv_median = quantile(g.first, 0.5);
        s.tv_q75 = quantile(g.first, 0.75);
        s.tv_max = quantile(g.first, 1.0);
        s.linf_max = g.second;
        report.summary.push_back(s);
    }
    return report;
}

namespace {

std::string state_label(const ScenarioConfig &scenario, int s)
{
    return scenario.environment.states.at(s);
}

void add_distribution_rows(Table &t, std::vector<Cell> prefix, const Distribution &p)
{
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto e = p.space().at(i);
        std::vector<Cell> row = prefix;
        row.emplace_back(static_cast<std::int64_t>(e.own + 1));
        row.emplace_back(partner_label(e.partner));
        row.emplace_back(p[i]);
        t.add(std::move(row));
    }
}

} // namespace

Table trajectory_table(const ScenarioConfig &scenario, const MeanfieldTrajectory &traj)
{
    Table t{{"period", "env_state", "stage", "k", "l", "mass"}, {}};
    add_distribution_rows(t, {std::int64_t{0}, std::string(""), to_string(Stage::hat)}, traj.hat[0]);
    for (int n = 1; n <= traj.horizon(); ++n) {
        const std::string env = state_label(scenario, traj.env_path[n - 1]);
        for (Stage s : kStages)
            add_distribution_rows(t, {std::int64_t{n}, env, to_string(s)}, meanfield_stage(traj, n, s));
    }
    return t;
}

Table transition_table(const std::vector<TransitionMatrix> &matrices)
{
    Table t{{"period", "src_k", "src_l", "dst_k", "dst_l", "probability"}, {}};
    for (const auto &z : matrices)
        for (std::size_t src = 0; src < z.dim(); ++src) {
            const auto a = z.space().at(src);
            for (std::size_t dst = 0; dst < z.dim(); ++dst) {
                const auto b = z.space().at(dst);
                t.add({std::int64_t{z.period()}, std::int64_t{a.own + 1}, partner_label(a.partner),
                       std::int64_t{b.own + 1}, partner_label(b.partner), z(src, dst)});
            }
        }
    return t;
}

Table residual_table(const ScenarioConfig &scenario, const MeanfieldTrajectory &traj)
{
    Table t{{"period", "env_state", "gz_residual"}, {}};
    const auto residuals = gz_residuals(traj);
    for (std::size_t n = 0; n < residuals.size(); ++n)
        t.add({static_cast<std::int64_t>(n + 1), state_label(scenario, traj.env_path[n]), residuals[n]});
    return t;
}

Table snapshot_table(const ScenarioConfig &scenario, const std::vector<SimulationResult> &runs)
{
    Table t{{"replication", "period", "env_state", "stage", "k", "l", "mass"}, {}};
    for (const auto &run : runs) {
        const std::int64_t r = run.replication;
        add_distribution_rows(t, {r, std::int64_t{0}, std::string(""), to_string(Stage::hat)}, run.initial);
        for (std::size_t n = 0; n < run.periods.size(); ++n) {
            const auto &snap = run.periods[n];
            for (Stage s : kStages)
                add_distribution_rows(t,
                                      {r, static_cast<std::int64_t>(n + 1), state_label(scenario, snap.env_state),
                                       to_string(s)},
                                      snap.stages[static_cast<int>(s)]);
        }
    }
    return t;
}

Table comparison_table(const ScenarioConfig &scenario, const ComparisonReport &report)
{
    Table t{{"replication", "period", "env_state", "stage", "tv_distance", "linf_distance", "gz_residual"}, {}};
    for (const auto &row : report.rows)
        t.add({std::int64_t{row.replication}, std::int64_t{row.period},
               row.period == 0 ? std::string("") : state_label(scenario, row.env_state), to_string(row.stage),
               row.tv, row.linf, row.gz_residual});
    return t;
}

Table summary_table(const ComparisonReport &report)
{
    Table t{{"period", "stage", "tv_min", "tv_q25", "tv_median", "tv_q75", "tv_max", "linf_max"}, {}};
    for (const auto &s : report.summary)
        t.add({std::int64_t{s.period}, to_string(s.stage), s.tv_min, s.tv_q25, s.tv_median, s.tv_q75, s.tv_max,
               s.linf_max});
    return t;
}

namespace {

class ValidationFailure : public std::runtime_error {
public:
    explicit ValidationFailure(ValidationReport report)
        : std::runtime_error("scenario failed validation"), report_(std::move(report))
    {
    }
    const ValidationReport &report() const { return report_; }

private:
    ValidationReport report_;
};

/// Files written by one command; removed again unless commit() is reached.
class OutputSet {
public:
    OutputSet(std::filesystem::path dir, OutputFormat format) : dir_(std::move(dir)), format_(format)
    {
        std::filesystem::create_directories(dir_);
    }
    OutputSet(const OutputSet &) = delete;
    OutputSet &operator=(const OutputSet &) = delete;
    ~OutputSet()
    {
        if (committed_)
            return;
        std::error_code ec;
        for (const auto &p : written_)
            std::filesystem::remove(p, ec);
    }

    std::filesystem::path write(const std::string &stem, const Table &table)
    {
        const auto path = dir_ / (stem + (format_ == OutputFormat::csv ? ".csv" : ".json"));
        std::ostringstream buf;
        if (format_ == OutputFormat::csv)
            write_csv(table, buf);
        else
            write_json(table, buf);
        write_bytes(path, buf.str());
        return path;
    }

    void write_bytes(const std::filesystem::path &path, const std::string &bytes)
    {
        written_.push_back(path);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << bytes;
        if (!out)
            throw std::runtime_error("failed to write " + path.string());
    }

    void commit() { committed_ = true; }

private:
    std::filesystem::path dir_;
    OutputFormat format_;
    std::vector<std::filesystem::path> written_;
    bool committed_ = false;
};

int guarded(std::ostream &log, const std::function<void()> &body)
{
    try {
        body();
        return kExitOk;
    } catch (const ValidationFailure &e) {
        log << "scenario is invalid:\n";
        for (const auto &v : e.report().violations)
            log << "  - " << v << '\n';
        return kExitValidation;
    } catch (const ParseError &e) {
        log << "parse error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const MatchingInfeasible &e) {
        log << "matching infeasible: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const InfeasibleRounding &e) {
        log << "infeasible rounding: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const InvalidInputs &e) {
        log << "invalid inputs: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception &e) {
        log << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace

ScenarioConfig prepare_scenario(const RunOptions &options)
{
    ScenarioConfig sc = load_scenario(options.scenario);
    if (options.seed)
        sc.master_seed = *options.seed;
    if (options.replications)
        sc.replications = *options.replications;
    if (options.periods)
        sc.horizon = *options.periods;
    auto report = sc.validate();
    if (!report.ok())
        throw ValidationFailure(std::move(report));
    return sc;
}

int cmd_validate(const std::filesystem::path &scenario, std::ostream &out)
{
    return guarded(out, [&] {
        RunOptions options;
        options.scenario = scenario;
        const auto sc = prepare_scenario(options);
        out << fmt::format("ok: {} types, horizon {}, population {}, {} environment state(s), {} replication(s)\n",
                           sc.types, sc.horizon, sc.population, sc.environment.state_count(), sc.replications);
    });
}

int cmd_meanfield(const RunOptions &options, std::ostream &log)
{
    return guarded(log, [&] {
        const auto sc = prepare_scenario(options);
        const auto traj = iterate_meanfield(sc, sc.environment_path(0));
        OutputSet out(options.out, options.format);
        const auto path = out.write("trajectory", trajectory_table(sc, traj));
        out.commit();
        log << "wrote " << path.string() << '\n';
    });
}

int cmd_transition(const RunOptions &options, std::ostream &log)
{
    return guarded(log, [&] {
        const auto sc = prepare_scenario(options);
        const auto traj = iterate_meanfield(sc, sc.environment_path(0));
        const auto residuals = residual_table(sc, traj);
        OutputSet out(options.out, options.format);
        const auto zpath = out.write("transition", transition_table(transition_matrices(traj)));
        const auto rpath = out.write("gz_residual", residuals);
        out.commit();
        double worst = 0.0;
        for (double r : gz_residuals(traj))
            worst = std::max(worst, r);
        log << "wrote " << zpath.string() << " and " << rpath.string() << " (max residual "
            << format_double(worst) << ")\n";
    });
}

int cmd_simulate(const RunOptions &options, std::ostream &log)
{
    return guarded(log, [&] {
        const auto sc = prepare_scenario(options);
        std::vector<SimulationResult> runs(sc.replications);
        for_each_replication(sc.replications,
                             [&](int r) { runs[r] = run_simulation(sc, sc.environment_path(r), r); });
        OutputSet out(options.out, options.format);
        const auto path = out.write("snapshots", snapshot_table(sc, runs));
        if (options.dump_population)
            for (const auto &run : runs) {
                std::ostringstream buf;
                dump_population(run.final_population, buf);
                out.write_bytes(options.out / fmt::format("population_r{}.bin", run.replication), buf.str());
            }
        out.commit();
        log << "wrote " << path.string() << '\n';
    });
}

int cmd_compare(const RunOptions &options, std::ostream &log)
{
    return guarded(log, [&] {
        const auto sc = prepare_scenario(options);
        const auto report = run_comparison(sc);
        OutputSet out(options.out, options.format);
        const auto rows = out.write("compare", comparison_table(sc, report));
        const auto summary = out.write("compare_summary", summary_table(report));
        out.commit();
        double tv = 0.0, residual = 0.0;
        for (const auto &row : report.rows) {
            tv = std::max(tv, row.tv);
            residual = std::max(residual, row.gz_residual);
        }
        log << "wrote " << rows.string() << " and " << summary.string() << " (max tv " << format_double(tv)
            << ", max gz residual " << format_double(residual) << ")\n";
    });
}

} // namespace matchfield
