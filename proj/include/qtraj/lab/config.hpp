#ifndef QTRAJ_LAB_CONFIG_HPP
#define QTRAJ_LAB_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/qshje_microstates.hpp"
#include "qtraj/trajectories.hpp"
#include "qtraj/units_potentials.hpp"

namespace qtraj::lab {

using json = nlohmann::json;

enum class Task { Solve, Microstate, DTdESweep, Trajectory, Compare, BeatScan };

inline const char* to_string(Task t)
{
    switch (t) {
        case Task::Solve: return "solve";
        case Task::Microstate: return "microstate";
        case Task::DTdESweep: return "dtde-sweep";
        case Task::Trajectory: return "trajectory";
        case Task::Compare: return "compare";
        case Task::BeatScan: return "beat-scan";
    }
    return "?";
}

inline std::optional<Task> parse_task(const std::string& s)
{
    for (auto t : {Task::Solve, Task::Microstate, Task::DTdESweep, Task::Trajectory, Task::Compare, Task::BeatScan})
        if (s == to_string(t))
            return t;
    return std::nullopt;
}

struct GridConfig
{
    std::optional<double> q_min, q_max;
    std::size_t points = 4001;
};

struct ModelConfig
{
    std::string kind = "classical"; // classical | continuum | beat
    int i = 1;
    int j = 2;
    double delta_alpha = 0.0;
    double dE = 0.0;
};

struct TrajectoryConfig
{
    std::string flow = "floyd"; // floyd | bohm | classical
    std::vector<double> q0{0.0};
    double t0 = 0.0;
    double t1 = 1.0;
    IntegratorConfig integrator;
};

struct SweepConfig
{
    std::vector<double> q{0.5};
    std::size_t random_points = 0; // extra q positions drawn with the seed
    double t0 = 0.0;
    double t1 = 1.0;
    std::size_t times = 101;
};

struct BeatScanConfig
{
    int levels = 3; // adjacent pairs among the first `levels` levels
    int periods = 16;
    std::size_t samples = 4096;
    double q0 = 0.3;
};

struct ScenarioConfig
{
    Task task = Task::Solve;
    Units units;
    PotentialSpec potential;
    GridConfig grid;
    int n_max = 5;
    double eig_tol = 1e-10;
    int level = 1;                 // bound microstate level
    std::optional<double> energy;  // unbound energy
    MicrostateCoefficients coefficients;
    std::optional<double> q_ref;
    ModelConfig model;
    TrajectoryConfig trajectory;
    SweepConfig sweep;
    BeatScanConfig beat;
    std::uint64_t seed = 0;
    std::string output;

    Grid make_grid() const
    {
        return Grid(grid.q_min.value_or(potential.q_min), grid.q_max.value_or(potential.q_max), grid.points);
    }
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& what)
{
    raise(ErrorKind::Config, path + ": " + what);
}

inline void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!n.IsMap())
        config_error(path.empty() ? "<root>" : path, "expected a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!ok.count(key))
            config_error(path.empty() ? key : path + "." + key, "unknown key");
    }
}

template <class T>
T get(const YAML::Node& n, const std::string& key, const std::string& path, T fallback)
{
    const auto v = n[key];
    if (!v)
        return fallback;
    try {
        return v.as<T>();
    }
    catch (const YAML::Exception&) {
        config_error(path.empty() ? key : path + "." + key, "wrong type");
    }
}

template <class T>
std::optional<T> get_opt(const YAML::Node& n, const std::string& key, const std::string& path)
{
    if (!n[key])
        return std::nullopt;
    return get<T>(n, key, path, T{});
}

inline std::vector<double> get_list(const YAML::Node& n, const std::string& key, const std::string& path,
                                    std::vector<double> fallback)
{
    const auto v = n[key];
    if (!v)
        return fallback;
    if (v.IsScalar())
        return {get<double>(n, key, path, 0.0)};
    try {
        return v.as<std::vector<double>>();
    }
    catch (const YAML::Exception&) {
        config_error(path + "." + key, "expected a number or a list of numbers");
    }
}

inline std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

inline PotentialSpec parse_potential(const YAML::Node& n, const std::string& path)
{
    check_keys(n, path, {"family", "value", "width", "height", "depth", "omega", "q_min", "q_max", "table"});
    const auto name = get<std::string>(n, "family", path, "");
    const auto fam = parse_family(name);
    if (!fam)
        config_error(join(path, "family"), "unknown potential family '" + name + "'");
    PotentialSpec s;
    s.family = *fam;
    s.value = get(n, "value", path, 0.0);
    s.width = get(n, "width", path, 1.0);
    s.height = get(n, "height", path, get(n, "depth", path, 0.0));
    s.omega = get(n, "omega", path, 1.0);
    if (s.family == PotentialFamily::InfiniteWell) {
        s.q_min = 0.0;
        s.q_max = s.width;
        if (n["q_min"] || n["q_max"])
            config_error(path, "the infinite well occupies [0, width]; q_min/q_max are not accepted");
    }
    else if (s.family == PotentialFamily::Tabulated) {
        const auto t = n["table"];
        if (!t || !t.IsSequence())
            config_error(join(path, "table"), "expected a list of [q, V] pairs");
        for (std::size_t k = 0; k < t.size(); ++k) {
            const auto e = t[k];
            if (!e.IsSequence() || e.size() != 2)
                config_error(join(path, "table") + "[" + std::to_string(k) + "]", "expected [q, V]");
            s.table.push_back({e[0].as<double>(), e[1].as<double>()});
        }
        if (!s.table.empty()) {
            s.q_min = s.table.front().q;
            s.q_max = s.table.back().q;
        }
    }
    else {
        if (!n["q_min"] || !n["q_max"])
            config_error(path, "q_min and q_max are required");
        s.q_min = get(n, "q_min", path, 0.0);
        s.q_max = get(n, "q_max", path, 1.0);
    }
    try {
        s.validate();
    }
    catch (const Error& e) {
        config_error(path, e.what());
    }
    return s;
}

inline IntegratorConfig parse_integrator(const YAML::Node& n, const std::string& path)
{
    IntegratorConfig c;
    const auto method = get<std::string>(n, "method", path, "RK45");
    if (method == "RK45")
        c.method = Method::RK45;
    else if (method == "RK4")
        c.method = Method::RK4;
    else
        config_error(join(path, "method"), "expected RK4 or RK45");
    c.dt = get(n, "dt", path, c.dt);
    c.abs_tol = get(n, "abs_tol", path, c.abs_tol);
    c.rel_tol = get(n, "rel_tol", path, c.rel_tol);
    c.max_step = get(n, "max_step", path, c.max_step);
    c.velocity_cap = get(n, "velocity_cap", path, c.velocity_cap);
    c.sample_dt = get(n, "sample_dt", path, c.sample_dt);
    c.max_steps = get<std::size_t>(n, "max_steps", path, c.max_steps);
    try {
        c.validate();
    }
    catch (const Error& e) {
        config_error(path, e.what());
    }
    return c;
}

} // namespace detail

/// Parses and validates a scenario. `task_override` is the CLI subcommand;
/// a `task` key in the file must agree with it.
inline ScenarioConfig parse_scenario(const YAML::Node& root, std::optional<Task> task_override = std::nullopt)
{
    using namespace detail;
    check_keys(root, "", {"task", "seed", "units", "potential", "grid", "solve", "level", "energy", "microstate",
                          "model", "trajectory", "sweep", "beat_scan", "output"});
    ScenarioConfig c;
    if (root["task"]) {
        const auto name = get<std::string>(root, "task", "", "");
        const auto t = parse_task(name);
        if (!t)
            config_error("task", "unknown task '" + name + "'");
        if (task_override && *task_override != *t)
            config_error("task", std::string("file declares '") + name + "' but the command is '"
                                     + to_string(*task_override) + "'");
        c.task = *t;
    }
    else if (task_override) {
        c.task = *task_override;
    }
    else {
        config_error("task", "missing");
    }
    c.seed = get<std::uint64_t>(root, "seed", "", 0);
    c.output = get<std::string>(root, "output", "", "");

    if (const auto u = root["units"]) {
        check_keys(u, "units", {"hbar", "mass"});
        c.units.hbar = get(u, "hbar", "units", 1.0);
        c.units.mass = get(u, "mass", "units", 1.0);
        try {
            c.units.validate();
        }
        catch (const Error& e) {
            config_error("units", e.what());
        }
    }
    if (!root["potential"])
        config_error("potential", "missing");
    c.potential = parse_potential(root["potential"], "potential");

    if (const auto g = root["grid"]) {
        check_keys(g, "grid", {"q_min", "q_max", "points"});
        c.grid.q_min = get_opt<double>(g, "q_min", "grid");
        c.grid.q_max = get_opt<double>(g, "q_max", "grid");
        c.grid.points = get<std::size_t>(g, "points", "grid", c.grid.points);
    }
    try {
        const auto g = c.make_grid();
        if (!in_domain(c.potential, g.q_min) || !in_domain(c.potential, g.q_max))
            config_error("grid", "grid extends outside the potential domain");
    }
    catch (const Error& e) {
        if (e.is_config())
            throw;
        config_error("grid", e.what());
    }

    if (const auto s = root["solve"]) {
        check_keys(s, "solve", {"n_max", "tol"});
        c.n_max = get(s, "n_max", "solve", c.n_max);
        c.eig_tol = get(s, "tol", "solve", c.eig_tol);
        if (c.n_max < 1)
            config_error("solve.n_max", "must be at least 1");
        if (!(c.eig_tol > 0.0))
            config_error("solve.tol", "must be positive");
    }
    c.level = get(root, "level", "", level_offset(c.potential));
    if (c.level < level_offset(c.potential))
        config_error("level", "below the ground level of the family");
    c.energy = get_opt<double>(root, "energy", "");

    if (const auto m = root["microstate"]) {
        check_keys(m, "microstate", {"a", "b", "c", "q_ref"});
        c.coefficients.a = get(m, "a", "microstate", 1.0);
        c.coefficients.b = get(m, "b", "microstate", 1.0);
        c.coefficients.c = get(m, "c", "microstate", 0.0);
        c.q_ref = get_opt<double>(m, "q_ref", "microstate");
        try {
            c.coefficients.validate();
        }
        catch (const Error& e) {
            config_error("microstate", e.what());
        }
    }
    if (const auto m = root["model"]) {
        check_keys(m, "model", {"kind", "i", "j", "delta_alpha", "dE"});
        c.model.kind = get<std::string>(m, "kind", "model", c.model.kind);
        if (c.model.kind != "classical" && c.model.kind != "continuum" && c.model.kind != "beat")
            config_error("model.kind", "expected classical, continuum or beat");
        const int off = level_offset(c.potential);
        c.model.i = get(m, "i", "model", off);
        c.model.j = get(m, "j", "model", c.model.i + 1);
        c.model.delta_alpha = get(m, "delta_alpha", "model", 0.0);
        c.model.dE = get(m, "dE", "model", 0.0);
        if (c.model.kind == "beat" && c.model.i == c.model.j)
            config_error("model.j", "must differ from model.i");
        if (c.model.kind == "beat" && std::min(c.model.i, c.model.j) < off)
            config_error("model", "level below the ground level of the family");
        if (c.model.dE < 0.0)
            config_error("model.dE", "must be positive");
    }
    else if (spectrum_class(c.potential) == SpectrumClass::Continuous) {
        c.model.kind = "continuum";
    }
    if (const auto t = root["trajectory"]) {
        check_keys(t, "trajectory", {"flow", "q0", "t0", "t1", "method", "dt", "abs_tol", "rel_tol", "max_step",
                                     "velocity_cap", "sample_dt", "max_steps"});
        c.trajectory.flow = get<std::string>(t, "flow", "trajectory", c.trajectory.flow);
        if (c.trajectory.flow != "floyd" && c.trajectory.flow != "bohm" && c.trajectory.flow != "classical")
            config_error("trajectory.flow", "expected floyd, bohm or classical");
        c.trajectory.q0 = get_list(t, "q0", "trajectory", c.trajectory.q0);
        c.trajectory.t0 = get(t, "t0", "trajectory", 0.0);
        c.trajectory.t1 = get(t, "t1", "trajectory", 1.0);
        c.trajectory.integrator = parse_integrator(t, "trajectory");
        if (c.trajectory.q0.empty())
            config_error("trajectory.q0", "empty");
        for (double q : c.trajectory.q0)
            if (!in_domain(c.potential, q))
                config_error("trajectory.q0", "position outside the potential domain");
        if (c.trajectory.t1 == c.trajectory.t0)
            config_error("trajectory.t1", "must differ from t0");
    }
    if (const auto s = root["sweep"]) {
        check_keys(s, "sweep", {"q", "random_points", "t0", "t1", "times"});
        c.sweep.q = get_list(s, "q", "sweep", c.sweep.q);
        c.sweep.random_points = get<std::size_t>(s, "random_points", "sweep", 0);
        c.sweep.t0 = get(s, "t0", "sweep", 0.0);
        c.sweep.t1 = get(s, "t1", "sweep", 1.0);
        c.sweep.times = get<std::size_t>(s, "times", "sweep", c.sweep.times);
        if (c.sweep.times < 1)
            config_error("sweep.times", "must be at least 1");
        for (double q : c.sweep.q)
            if (!in_domain(c.potential, q))
                config_error("sweep.q", "position outside the potential domain");
    }
    if (const auto b = root["beat_scan"]) {
        check_keys(b, "beat_scan", {"levels", "periods", "samples", "q0"});
        c.beat.levels = get(b, "levels", "beat_scan", c.beat.levels);
        c.beat.periods = get(b, "periods", "beat_scan", c.beat.periods);
        c.beat.samples = get<std::size_t>(b, "samples", "beat_scan", c.beat.samples);
        c.beat.q0 = get(b, "q0", "beat_scan", c.beat.q0);
        if (c.beat.levels < 2)
            config_error("beat_scan.levels", "needs at least two levels");
        if (c.beat.periods < 1 || c.beat.samples < 16)
            config_error("beat_scan", "periods >= 1 and samples >= 16 required");
        if (!in_domain(c.potential, c.beat.q0))
            config_error("beat_scan.q0", "position outside the potential domain");
    }

    const bool bound = spectrum_class(c.potential) != SpectrumClass::Continuous;
    const bool needs_energy = !bound && (c.task == Task::Microstate || c.task == Task::DTdESweep
                                         || c.task == Task::Trajectory || c.task == Task::Compare);
    if (needs_energy && !c.energy)
        config_error("energy", "required for an unbound potential");
    if (c.task == Task::Solve && !bound)
        config_error("potential.family", "solve needs a potential with bound states");
    if (c.task == Task::BeatScan && !bound)
        config_error("potential.family", "beat-scan needs a potential with bound states");
    if (c.task == Task::Compare && bound)
        config_error("potential.family", "compare needs an unbound (Constant or Step) potential");
    if (c.model.kind == "continuum" && bound && (c.task == Task::DTdESweep || c.task == Task::Trajectory))
        config_error("model.kind", "continuum model needs an unbound potential");
    if (c.model.kind == "beat" && !bound && (c.task == Task::DTdESweep || c.task == Task::Trajectory))
        config_error("model.kind", "beat model needs bound states");
    return c;
}

inline ScenarioConfig load_scenario(const std::string& path, std::optional<Task> task_override = std::nullopt)
{
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    }
    catch (const YAML::BadFile&) {
        raise(ErrorKind::Config, path + ": cannot read file");
    }
    catch (const YAML::Exception& e) {
        raise(ErrorKind::Config, path + ": " + e.what());
    }
    return parse_scenario(root, task_override);
}

/// Canonical JSON form of a parsed scenario (sorted keys); the scenario hash
/// is taken over its compact dump, so formatting of the source file does not
/// matter.
inline json canonical(const ScenarioConfig& c)
{
    json j;
    j["task"] = to_string(c.task);
    j["seed"] = c.seed;
    j["units"] = {{"hbar", c.units.hbar}, {"mass", c.units.mass}};
    json p = {{"family", to_string(c.potential.family)}, {"q_min", c.potential.q_min}, {"q_max", c.potential.q_max}};
    switch (c.potential.family) {
        case PotentialFamily::Constant: p["value"] = c.potential.value; break;
        case PotentialFamily::InfiniteWell: p["width"] = c.potential.width; break;
        case PotentialFamily::FiniteWell:
            p["width"] = c.potential.width;
            p["height"] = c.potential.height;
            break;
        case PotentialFamily::Harmonic: p["omega"] = c.potential.omega; break;
        case PotentialFamily::Step: p["height"] = c.potential.height; break;
        case PotentialFamily::Tabulated: {
            json t = json::array();
            for (const auto& n : c.potential.table)
                t.push_back({n.q, n.v});
            p["table"] = t;
            break;
        }
    }
    j["potential"] = p;
    const auto g = c.make_grid();
    j["grid"] = {{"q_min", g.q_min}, {"q_max", g.q_max}, {"points", g.n_points}};
    j["solve"] = {{"n_max", c.n_max}, {"tol", c.eig_tol}};
    j["level"] = c.level;
    j["energy"] = c.energy ? json(*c.energy) : json(nullptr);
    j["microstate"] = {{"a", c.coefficients.a}, {"b", c.coefficients.b}, {"c", c.coefficients.c},
                       {"q_ref", c.q_ref ? json(*c.q_ref) : json(nullptr)}};
    j["model"] = {{"kind", c.model.kind}, {"i", c.model.i}, {"j", c.model.j}, {"delta_alpha", c.model.delta_alpha},
                  {"dE", c.model.dE}};
    const auto& ic = c.trajectory.integrator;
    j["trajectory"] = {{"flow", c.trajectory.flow}, {"q0", c.trajectory.q0}, {"t0", c.trajectory.t0},
                       {"t1", c.trajectory.t1}, {"method", ic.method == Method::RK4 ? "RK4" : "RK45"},
                       {"dt", ic.dt}, {"abs_tol", ic.abs_tol}, {"rel_tol", ic.rel_tol}, {"max_step", ic.max_step},
                       {"velocity_cap", ic.velocity_cap}, {"sample_dt", ic.sample_dt}, {"max_steps", ic.max_steps}};
    j["sweep"] = {{"q", c.sweep.q}, {"random_points", c.sweep.random_points}, {"t0", c.sweep.t0},
                  {"t1", c.sweep.t1}, {"times", c.sweep.times}};
    j["beat_scan"] = {{"levels", c.beat.levels}, {"periods", c.beat.periods}, {"samples", c.beat.samples},
                      {"q0", c.beat.q0}};
    return j;
}

} // namespace qtraj::lab

#endif // QTRAJ_LAB_CONFIG_HPP
