#ifndef QTRAJ_LAB_RUNNER_HPP
#define QTRAJ_LAB_RUNNER_HPP

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qtraj/energy_variation.hpp"
#include "qtraj/lab/config.hpp"
#include "qtraj/lab/io.hpp"
#include "qtraj/lab/registry.hpp"
#include "qtraj/qshje_microstates.hpp"
#include "qtraj/schrodinger1d.hpp"
#include "qtraj/spectral.hpp"
#include "qtraj/trajectories.hpp"

namespace qtraj::lab {

/// Runs body(k) for k in [0, n) on up to `threads` workers. Each index is
/// handled by exactly one worker, so results stored by index are independent
/// of the thread count. The first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F&& body)
{
    const std::size_t workers = std::clamp<std::size_t>(threads > 0 ? threads : 1, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t k = 0; k < n; ++k)
            body(k);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = w; k < n; k += workers)
                    body(k);
            }
            catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

struct RunOptions
{
    fs::path out = "runs";
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::ostream* events = nullptr; // event report sink (stderr in the CLI)
};

namespace detail {

inline json coefficients_json(const MicrostateCoefficients& c) { return {{"a", c.a}, {"b", c.b}, {"c", c.c}}; }

inline json events_json(const std::vector<TrajectoryEvent>& ev)
{
    json a = json::array();
    for (const auto& e : ev)
        a.push_back({{"t", e.t}, {"kind", to_string(e.kind)}, {"q", e.q}, {"detail", e.detail}});
    return a;
}

inline double wronskian_spread(const SolutionPair& p)
{
    const auto w = wronskian_profile(p.phi, p.theta);
    double worst = 0.0;
    for (double x : w)
        worst = std::max(worst, std::abs(x - p.wronskian));
    return worst / std::abs(p.wronskian);
}

inline std::vector<EigenSolution> solve_levels(const ScenarioConfig& c, int count)
{
    auto eig = find_bound_eigenvalues(c.potential, c.make_grid(), count, c.eig_tol, c.units);
    if (static_cast<int>(eig.size()) < count) {
        std::ostringstream os;
        os << "only " << eig.size() << " bound levels below the domain edges, " << count << " requested";
        raise(ErrorKind::InvalidArgument, os.str());
    }
    return eig;
}

struct BuiltMicrostate
{
    Microstate ms;
    std::optional<EigenSolution> eigen;
};

inline BuiltMicrostate microstate_for(const ScenarioConfig& c)
{
    const bool bound = spectrum_class(c.potential) != SpectrumClass::Continuous;
    BuiltMicrostate out{Microstate{}, std::nullopt};
    if (bound && !c.energy) {
        const int idx = c.level - level_offset(c.potential);
        auto eig = solve_levels(c, idx + 1);
        out.eigen = eig[idx];
        out.ms = build_microstate(solution_pair(eig[idx]), c.coefficients, c.potential, c.units, c.q_ref);
    }
    else {
        const auto pair = solution_pair(c.potential, *c.energy, c.make_grid(), c.units);
        out.ms = build_microstate(pair, c.coefficients, c.potential, c.units, c.q_ref);
    }
    return out;
}

inline VariationModel model_for(const ScenarioConfig& c)
{
    if (c.model.kind == "continuum")
        return VariationModel::continuum(make_continuum_system(c.potential, *c.energy, c.model.dE, c.units));
    if (c.model.kind == "beat")
        return VariationModel::beat(make_variation_frame(c.potential, c.make_grid(), c.model.i, c.model.j,
                                                         c.coefficients, c.model.delta_alpha, c.units));
    return VariationModel::classical(microstate_for(c).ms);
}

inline std::string event_flag(const TrajectoryResult& r, std::size_t k)
{
    const auto& s = r.samples;
    for (const auto& e : r.events) {
        const double lo = k == 0 ? s[0].t : s[k - 1].t;
        const double hi = s[k].t;
        const bool inside = std::min(lo, hi) <= e.t && e.t <= std::max(lo, hi);
        if (inside && (k > 0 || e.t == s[0].t))
            return to_string(e.kind);
    }
    return "none";
}

inline CsvTable trajectory_table(const TrajectoryResult& r)
{
    CsvTable t({"t", "q", "v", "t_q", "dTdE", "dQdE", "event_flag"});
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
        const auto& s = r.samples[k];
        t.row(s.t, s.q, s.v, s.t_q, s.dtde, s.dqde, event_flag(r, k));
    }
    return t;
}

/// Sign changes of dT/dE on the interior nodes of the grid, each refined by
/// bisection.
inline json sign_changes(const std::function<double(double)>& f, const Grid& g)
{
    json out = json::array();
    double prev = f(g.at(1));
    for (std::size_t i = 2; i + 1 < g.size(); ++i) {
        const double cur = f(g.at(i));
        if (std::isfinite(prev) && std::isfinite(cur) && (prev < 0.0) != (cur < 0.0)) {
            const double z = qtraj::detail::locate(f, g.at(i - 1), g.at(i), 1e-12);
            out.push_back({{"q", z}, {"from", prev < 0.0 ? "negative" : "positive"}});
        }
        prev = cur;
    }
    return out;
}

inline void report_events(const RunOptions& opt, const std::string& label, const TrajectoryResult& r)
{
    if (!opt.events)
        return;
    for (const auto& e : r.events)
        *opt.events << "event " << label << ": " << to_string(e.kind) << " at t = " << e.t << ", q = " << e.q
                    << " (" << e.detail << ")\n";
}

// --- tasks ---------------------------------------------------------------

inline json run_solve(const ScenarioConfig& c, const Registry& reg, RunRecord& rec)
{
    const auto eig = solve_levels(c, c.n_max);
    const auto exact = analytic_spectrum(c.potential, c.n_max, c.units);
    CsvTable table({"level", "index", "energy", "analytic", "rel_error", "nodes", "wronskian_spread"});
    json levels = json::array(), energies = json::array();
    double worst_err = 0.0, worst_w = 0.0;
    for (std::size_t k = 0; k < eig.size(); ++k) {
        const auto& e = eig[k];
        const double a = exact && k < exact->size() ? (*exact)[k] : numerics::nan;
        const double rel = std::isnan(a) ? numerics::nan : std::abs(e.energy - a) / std::abs(a);
        const double ws = wronskian_spread(solution_pair(e));
        const int nodes = count_interior_nodes(e.psi);
        table.row(e.level, e.index, e.energy, a, rel, nodes, ws);
        levels.push_back(e.level);
        energies.push_back(e.energy);
        if (!std::isnan(rel))
            worst_err = std::max(worst_err, rel);
        worst_w = std::max(worst_w, ws);
    }
    rec.artifacts.push_back(reg.write_artifact(rec.id, "spectrum", "spectrum.csv", table.str()));
    json s = {{"spectrum_class", to_string(spectrum_class(c.potential))},
              {"levels", levels},
              {"eigenvalues", energies},
              {"max_wronskian_spread", worst_w}};
    s["max_rel_error"] = exact ? json(worst_err) : json(nullptr);
    return s;
}

inline json run_microstate(const ScenarioConfig& c, const Registry& reg, RunRecord& rec)
{
    const auto built = microstate_for(c);
    const auto& ms = built.ms;
    const auto qs = quantum_potential_schwarzian(ms);
    const auto qb = quantum_potential_bohm(ms.grid(), ms.r, ms.units);
    const auto res = residual_profile(ms);
    CsvTable table({"q", "w_prime", "w", "r", "q_schwarzian", "q_bohm", "residual"});
    double worst_q = 0.0, r2_lo = 1e300, r2_hi = 0.0;
    for (std::size_t i = 0; i < ms.grid().size(); ++i) {
        table.row(ms.grid().at(i), ms.w_prime.values[i], ms.w.values[i], ms.r[i], qs[i], qb.values[i], res[i]);
        if (i >= 5 && i + 5 < ms.grid().size() && std::isfinite(qs[i]) && std::isfinite(qb.values[i]))
            worst_q = std::max(worst_q, std::abs(qs[i] - qb.values[i]));
        const double r2w = ms.r[i] * ms.r[i] * std::abs(ms.w_prime.values[i]);
        r2_lo = std::min(r2_lo, r2w);
        r2_hi = std::max(r2_hi, r2w);
    }
    rec.artifacts.push_back(reg.write_artifact(rec.id, "field", "field.csv", table.str()));
    json s = {{"energy", ms.energy},
              {"coefficients", coefficients_json(ms.coefficients)},
              {"q_ref", ms.q_ref},
              {"calibration_scale", ms.scale},
              {"wronskian", ms.pair.wronskian},
              {"qshje_residual", qshje_residual(ms)},
              {"schwarzian_vs_bohm", worst_q},
              {"r2_wprime_spread", (r2_hi - r2_lo) / r2_hi},
              {"match_defect", ms.pair.match_defect}};
    if (built.eigen) {
        s["level"] = built.eigen->level;
        const auto bw = bipolar_decomposition(ms, as_complex(built.eigen->psi));
        s["bipolar"] = {{"scale_plus", bw.scale_plus},   {"scale_minus", bw.scale_minus},
                        {"phase_plus", bw.phase_plus},   {"phase_minus", bw.phase_minus},
                        {"fit_residual", bw.fit_residual}};
    }
    return s;
}

inline json run_sweep(const ScenarioConfig& c, const Registry& reg, RunRecord& rec, const RunOptions& opt)
{
    const auto model = model_for(c);
    std::vector<double> qs = c.sweep.q;
    if (c.sweep.random_points > 0) {
        std::mt19937_64 rng(opt.seed.value_or(c.seed));
        const double span = c.potential.q_max - c.potential.q_min;
        std::uniform_real_distribution<double> u(c.potential.q_min + 0.05 * span, c.potential.q_max - 0.05 * span);
        for (std::size_t k = 0; k < c.sweep.random_points; ++k)
            qs.push_back(u(rng));
    }
    const std::size_t nt = c.sweep.times;
    std::vector<std::vector<VariationModel::Point>> vals(qs.size(), std::vector<VariationModel::Point>(nt));
    auto time_at = [&](std::size_t k) {
        return nt == 1 ? c.sweep.t0 : c.sweep.t0 + (c.sweep.t1 - c.sweep.t0) * static_cast<double>(k) / (nt - 1);
    };
    parallel_for(qs.size(), opt.threads, [&](std::size_t a) {
        for (std::size_t k = 0; k < nt; ++k)
            vals[a][k] = model.at(qs[a], time_at(k));
    });
    CsvTable table({"t", "q", "dTdE", "dQdE", "m_q", "pole_flag"});
    std::size_t poles = 0, changes = 0;
    for (std::size_t a = 0; a < qs.size(); ++a) {
        double prev = numerics::nan;
        for (std::size_t k = 0; k < nt; ++k) {
            const auto& p = vals[a][k];
            int flag = 0;
            if (p.pole) {
                ++poles;
                flag = 1;
            }
            table.row(time_at(k), qs[a], p.dtde, delta_Q_delta_E(p.dtde), quantum_mass(c.units.mass, p.dtde).m_q,
                      flag);
            if (std::isfinite(prev) && std::isfinite(p.dtde) && (prev < 0.0) != (p.dtde < 0.0))
                ++changes;
            if (std::isfinite(p.dtde))
                prev = p.dtde;
        }
    }
    rec.artifacts.push_back(reg.write_artifact(rec.id, "sweep", "sweep.csv", table.str()));
    json s = {{"model", model.describe()}, {"rows", table.size()}, {"pole_rows", poles}, {"time_sign_changes", changes}};
    if (const auto* f = model.frame()) {
        s["beat_period"] = f->beat_period();
        s["delta_e"] = f->delta_e;
        s["levels"] = {f->level_i, f->level_j};
    }
    if (const auto* sys = model.continuum_system()) {
        const Grid g = c.make_grid();
        s["dtde_sign_changes"] = sign_changes([&](double q) { return delta_T_delta_E_continuum(*sys, q); }, g);
    }
    return s;
}

inline Flow flow_for(const ScenarioConfig& c, const VariationModel& model)
{
    const bool bound = spectrum_class(c.potential) != SpectrumClass::Continuous;
    if (c.trajectory.flow == "floyd")
        return floyd_flow(model);
    if (c.trajectory.flow == "bohm") {
        if (!bound)
            return bohm_flow(make_continuum_system(c.potential, *c.energy, c.model.dE, c.units));
        const int idx = c.level - level_offset(c.potential);
        const auto eig = solve_levels(c, idx + 1);
        return bohm_flow(phase_field(as_complex(eig[idx].psi), c.units), c.units);
    }
    double E = c.energy.value_or(0.0);
    if (bound && !c.energy) {
        const int idx = c.level - level_offset(c.potential);
        E = solve_levels(c, idx + 1)[idx].energy;
    }
    return classical_flow(c.potential, E, c.units);
}

inline json run_trajectory(const ScenarioConfig& c, const Registry& reg, RunRecord& rec, const RunOptions& opt)
{
    const auto model = model_for(c);
    const Flow flow = flow_for(c, model);
    const auto& q0 = c.trajectory.q0;
    std::vector<TrajectoryResult> results(q0.size());
    parallel_for(q0.size(), opt.threads, [&](std::size_t k) {
        results[k] = quantum_time_along(
            integrate_trajectory(flow, q0[k], c.trajectory.t0, c.trajectory.t1, c.trajectory.integrator));
    });
    json runs = json::array();
    for (std::size_t k = 0; k < q0.size(); ++k) {
        const auto& r = results[k];
        std::ostringstream name;
        name << "trajectory_" << k << ".csv";
        rec.artifacts.push_back(reg.write_artifact(rec.id, "trajectory", name.str(), trajectory_table(r).str()));
        report_events(opt, name.str(), r);
        json one = {{"q0", q0[k]},
                    {"t_end", r.last().t},
                    {"q_end", r.last().q},
                    {"completed", r.completed},
                    {"steps", r.steps},
                    {"events", events_json(r.events)}};
        if (c.trajectory.flow == "floyd")
            one["epoch_identity_residual"] = epoch_identity_check(model, r);
        runs.push_back(one);
    }
    return {{"flow", flow.label}, {"model", model.describe()}, {"trajectories", runs}};
}

inline json run_compare(const ScenarioConfig& c, const Registry& reg, RunRecord& rec, const RunOptions& opt)
{
    const auto sys = make_continuum_system(c.potential, *c.energy, c.model.dE, c.units);
    const double q0 = c.trajectory.q0.front();
    const double span = c.trajectory.t1 - c.trajectory.t0;
    if (!(span > 0.0))
        raise(ErrorKind::Config, "trajectory.t1: compare needs t1 > t0");
    IntegratorConfig ic = c.trajectory.integrator;
    if (ic.sample_dt <= 0.0)
        ic.sample_dt = span / 2000.0;
    const auto td = bohm_floyd_time_deformation(sys, q0, span, ic);
    const auto model = VariationModel::continuum(sys);

    const auto& bs = td.bohm.samples;
    const double tq_span = bs.back().t_q - bs.front().t_q;
    IntegratorConfig fc = ic;
    fc.sample_dt = 0.0;
    const auto floyd = quantum_time_along(integrate_trajectory(floyd_flow(model), q0, 0.0, tq_span, fc));
    IntegratorConfig cc = ic;
    cc.sample_dt = 0.0;
    const auto classical = integrate_trajectory(classical_flow(c.potential, *c.energy, c.units), q0, 0.0, span, cc);
    report_events(opt, "floyd", floyd);
    report_events(opt, "bohm", td.bohm);

    CsvTable table({"t", "q_bohm", "t_q", "dTdE", "q_floyd_at_t_q", "q_classical"});
    for (const auto& s : bs) {
        const auto qf = position_at(floyd, s.t_q - bs.front().t_q);
        const auto qc = position_at(classical, s.t);
        table.row(s.t, s.q, s.t_q, s.dtde, qf.value_or(numerics::nan), qc.value_or(numerics::nan));
    }
    rec.artifacts.push_back(reg.write_artifact(rec.id, "comparison", "comparison.csv", table.str()));
    rec.artifacts.push_back(reg.write_artifact(rec.id, "trajectory", "bohm.csv", trajectory_table(td.bohm).str()));
    rec.artifacts.push_back(reg.write_artifact(rec.id, "trajectory", "floyd.csv", trajectory_table(floyd).str()));

    json segs = json::array();
    for (const auto& sg : td.segments)
        segs.push_back({{"t_begin", sg.t_begin},
                        {"t_end", sg.t_end},
                        {"q_begin", sg.q_begin},
                        {"q_end", sg.q_end},
                        {"q_anchor", sg.q_anchor},
                        {"dtde_sign", sg.dtde_sign},
                        {"max_discrepancy", sg.max_discrepancy},
                        {"compared", sg.compared},
                        {"floyd_truncated", sg.floyd_truncated}});
    json record = {{"q0", q0},
                   {"span", span},
                   {"energy", *c.energy},
                   {"reflection", {std::real(sys.state.r), std::imag(sys.state.r)}},
                   {"segments", segs},
                   {"split", td.split()},
                   {"max_discrepancy", td.max_discrepancy},
                   {"bohm_path_dtde_zeros", events_json(td.zeros)},
                   {"floyd_events", events_json(floyd.events)},
                   {"dtde_sign_changes",
                    sign_changes([&](double q) { return delta_T_delta_E_continuum(sys, q); }, c.make_grid())}};
    record["epoch_identity_residual"] = epoch_identity_check(model, floyd);
    rec.artifacts.push_back(reg.write_artifact(rec.id, "comparison", "comparison.json", dump_json(record)));
    return record;
}

inline json run_beat_scan(const ScenarioConfig& c, const Registry& reg, RunRecord& rec, const RunOptions& opt)
{
    const auto eig = solve_levels(c, c.beat.levels);
    const std::size_t npairs = eig.size() - 1;
    std::vector<json> rows(npairs);
    std::vector<std::vector<double>> spectra(npairs);
    parallel_for(npairs, opt.threads, [&](std::size_t k) {
        const auto ms_i = build_microstate(solution_pair(eig[k]), c.coefficients, c.potential, c.units, c.q_ref);
        const auto ms_j = build_microstate(solution_pair(eig[k + 1]), c.coefficients, c.potential, c.units, c.q_ref);
        const auto frame = make_variation_frame(ms_i, ms_j, c.model.delta_alpha, eig[k].level, eig[k + 1].level);
        double dt = 0.0;
        const auto v = beat_velocity_series(frame, c.beat.q0, 0.0, c.beat.periods, c.beat.samples, &dt);
        const auto peak = dominant_frequency(v, dt);
        spectra[k] = amplitude_spectrum(v);
        const double f_beat = frame.delta_e / (2.0 * std::numbers::pi * c.units.hbar);
        rows[k] = {{"i", eig[k].level},
                   {"j", eig[k + 1].level},
                   {"delta_e", frame.delta_e},
                   {"beat_frequency", f_beat},
                   {"beat_period", frame.beat_period()},
                   {"peak_frequency", peak.frequency},
                   {"bin_width", peak.bin_width},
                   {"peak_within_bin", std::abs(peak.frequency - f_beat) <= peak.bin_width}};
    });
    CsvTable table({"i", "j", "delta_e", "beat_frequency", "beat_period", "peak_frequency", "bin_width",
                    "peak_within_bin"});
    for (const auto& r : rows)
        table.row(r["i"].get<int>(), r["j"].get<int>(), r["delta_e"].get<double>(), r["beat_frequency"].get<double>(),
                  r["beat_period"].get<double>(), r["peak_frequency"].get<double>(), r["bin_width"].get<double>(),
                  r["peak_within_bin"].get<bool>());
    rec.artifacts.push_back(reg.write_artifact(rec.id, "beats", "beats.csv", table.str()));
    for (std::size_t k = 0; k < npairs; ++k) {
        CsvTable sp({"frequency", "amplitude"});
        const double df = rows[k]["bin_width"].get<double>();
        for (std::size_t b = 0; b < spectra[k].size(); ++b)
            sp.row(df * static_cast<double>(b), spectra[k][b]);
        std::ostringstream name;
        name << "spectrum_" << rows[k]["i"].get<int>() << "_" << rows[k]["j"].get<int>() << ".csv";
        rec.artifacts.push_back(reg.write_artifact(rec.id, "spectrum", name.str(), sp.str()));
    }
    return {{"pairs", rows}, {"q0", c.beat.q0}, {"periods", c.beat.periods}, {"samples", c.beat.samples},
            {"coefficients", coefficients_json(c.coefficients)}};
}

} // namespace detail

inline std::string scenario_hash(const ScenarioConfig& c) { return sha256_hex(canonical(c).dump()); }

/// Executes the scenario, writes its artifacts and summary, and appends the
/// run to the registry under opt.out.
inline RunRecord run_scenario(ScenarioConfig c, const RunOptions& opt)
{
    if (opt.seed)
        c.seed = *opt.seed;
    const Registry reg(opt.out);
    RunRecord rec;
    rec.task = to_string(c.task);
    rec.scenario_hash = scenario_hash(c);
    rec.id = reg.next_id(rec.task, rec.scenario_hash);
    rec.created = utc_timestamp();
    json summary;
    switch (c.task) {
        case Task::Solve: summary = detail::run_solve(c, reg, rec); break;
        case Task::Microstate: summary = detail::run_microstate(c, reg, rec); break;
        case Task::DTdESweep: summary = detail::run_sweep(c, reg, rec, opt); break;
        case Task::Trajectory: summary = detail::run_trajectory(c, reg, rec, opt); break;
        case Task::Compare: summary = detail::run_compare(c, reg, rec, opt); break;
        case Task::BeatScan: summary = detail::run_beat_scan(c, reg, rec, opt); break;
    }
    summary["task"] = rec.task;
    summary["potential"] = canonical(c)["potential"];
    summary["scenario"] = canonical(c);
    rec.summary = summary;
    rec.artifacts.push_back(reg.write_artifact(rec.id, "summary", "summary.json", dump_json(summary)));
    reg.commit(rec);
    return rec;
}

inline void describe_config(const ScenarioConfig& c, std::ostream& os)
{
    const auto& p = c.potential;
    os << "potential: " << to_string(p.family) << " on [" << p.q_min << ", " << p.q_max << "]";
    switch (p.family) {
        case PotentialFamily::Constant: os << ", V = " << p.value; break;
        case PotentialFamily::InfiniteWell: os << ", L = " << p.width; break;
        case PotentialFamily::FiniteWell: os << ", L = " << p.width << ", V0 = " << p.height; break;
        case PotentialFamily::Harmonic: os << ", omega = " << p.omega; break;
        case PotentialFamily::Step: os << ", V0 = " << p.height; break;
        case PotentialFamily::Tabulated: os << ", " << p.table.size() << " nodes"; break;
    }
    os << "\nspectrum class: " << to_string(spectrum_class(p)) << "\n";
    os << "units: hbar = " << c.units.hbar << ", m = " << c.units.mass << "\n";
    const auto g = c.make_grid();
    os << "grid: " << g.n_points << " points on [" << g.q_min << ", " << g.q_max << "]\n";
    os << "task: " << to_string(c.task) << "\n";
    switch (c.task) {
        case Task::Solve: os << "plan: first " << c.n_max << " bound levels, tol " << c.eig_tol << "\n"; break;
        case Task::Microstate:
        case Task::DTdESweep:
        case Task::Trajectory:
            os << "plan: coefficients (" << c.coefficients.a << ", " << c.coefficients.b << ", " << c.coefficients.c
               << "), model " << c.model.kind;
            if (c.model.kind == "beat")
                os << " (" << c.model.i << ", " << c.model.j << ")";
            if (c.energy)
                os << ", E = " << *c.energy;
            else
                os << ", level " << c.level;
            os << "\n";
            break;
        case Task::Compare:
            os << "plan: Bohm vs Floyd vs classical from q0 = " << c.trajectory.q0.front() << " over ["
               << c.trajectory.t0 << ", " << c.trajectory.t1 << "], E = " << c.energy.value_or(0.0) << "\n";
            break;
        case Task::BeatScan:
            os << "plan: adjacent pairs among " << c.beat.levels << " levels, " << c.beat.periods
               << " beat periods, " << c.beat.samples << " samples at q0 = " << c.beat.q0 << "\n";
            break;
    }
}

inline void describe_run(const Registry& reg, const std::string& id, std::ostream& os)
{
    const auto r = reg.find(id);
    os << "run " << r.id << " (" << r.task << ", " << r.created << ", version " << r.version << ")\n";
    os << "scenario hash: " << r.scenario_hash << "\n";
    const auto& s = r.summary;
    if (s.contains("potential"))
        os << "potential: " << s["potential"]["family"].get<std::string>() << "\n";
    os << std::setprecision(9);
    if (r.task == "solve") {
        for (std::size_t k = 0; k < s["levels"].size(); ++k)
            os << "level " << s["levels"][k].get<int>() << ": E = " << s["eigenvalues"][k].get<double>() << "\n";
    }
    else if (r.task == "beat-scan") {
        for (const auto& p : s["pairs"])
            os << "pair (" << p["i"].get<int>() << ", " << p["j"].get<int>()
               << "): beat period " << p["beat_period"].get<double>() << ", beat frequency "
               << p["beat_frequency"].get<double>() << ", spectral peak " << p["peak_frequency"].get<double>()
               << (p["peak_within_bin"].get<bool>() ? " (within one bin)" : " (outside one bin)") << "\n";
    }
    else if (r.task == "microstate") {
        os << "E = " << s["energy"].get<double>() << ", QSHJE residual " << s["qshje_residual"].get<double>() << "\n";
    }
    else if (r.task == "compare") {
        os << "max Bohm/Floyd discrepancy " << s["max_discrepancy"].get<double>() << " over "
           << s["segments"].size() << " segment(s); " << s["dtde_sign_changes"].size()
           << " dT/dE sign change(s) on the grid\n";
    }
    else if (r.task == "trajectory") {
        for (const auto& t : s["trajectories"])
            os << "q0 = " << t["q0"].get<double>() << " -> q = " << t["q_end"].get<double>() << " at t = "
               << t["t_end"].get<double>() << ", " << t["events"].size() << " event(s)\n";
    }
    else if (r.task == "dtde-sweep") {
        os << s["rows"].get<std::size_t>() << " rows, " << s["pole_rows"].get<std::size_t>() << " pole rows\n";
    }
    const auto bad = reg.verify(r);
    os << "artifacts: " << r.artifacts.size() << (bad.empty() ? " (digests verified)" : " (DIGEST MISMATCH)") << "\n";
    for (const auto& b : bad)
        os << "  mismatch: " << b << "\n";
}

/// Tidy plot data from a stored run: kind trajectory | field | sweep.
inline std::vector<fs::path> export_plot_data(const Registry& reg, const std::string& id, const std::string& kind)
{
    const auto r = reg.find(id);
    static const std::map<std::string, std::vector<std::string>> schema = {
        {"trajectory", {"t", "q", "v", "t_q", "dTdE", "dQdE", "event_flag"}},
        {"field", {"q", "w_prime", "w", "r", "q_schwarzian", "q_bohm"}},
        {"sweep", {"t", "q", "dTdE", "pole_flag"}},
    };
    std::vector<std::string> available;
    for (const auto& a : r.artifacts)
        if (schema.count(a.kind) && std::find(available.begin(), available.end(), a.kind) == available.end())
            available.push_back(a.kind);
    if (!schema.count(kind) || std::find(available.begin(), available.end(), kind) == available.end()) {
        std::string list;
        for (const auto& a : available)
            list += (list.empty() ? "" : ", ") + a;
        raise(ErrorKind::InvalidArgument,
              "run " + id + " has no '" + kind + "' data; available: " + (list.empty() ? "none" : list));
    }
    const auto& cols = schema.at(kind);
    std::vector<fs::path> out;
    for (const auto& a : r.artifacts) {
        if (a.kind != kind)
            continue;
        const fs::path src = reg.root() / a.path;
        const auto have = csv_columns(src);
        std::vector<std::size_t> pick;
        for (const auto& c : cols) {
            const auto it = std::find(have.begin(), have.end(), c);
            if (it == have.end())
                raise(ErrorKind::InvalidArgument, src.string() + " lacks column " + c);
            pick.push_back(static_cast<std::size_t>(it - have.begin()));
        }
        std::istringstream in(read_file(src));
        std::ostringstream os;
        std::string line;
        std::getline(in, line);
        os << "# ";
        for (std::size_t k = 0; k < cols.size(); ++k)
            os << (k ? "," : "") << cols[k];
        os << "\n";
        while (std::getline(in, line)) {
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                cells.push_back(cell);
            for (std::size_t k = 0; k < pick.size(); ++k)
                os << (k ? "," : "") << cells.at(pick[k]);
            os << "\n";
        }
        const fs::path dst = reg.run_dir(id) / "export" / (fs::path(a.path).stem().string() + "." + kind + ".csv");
        atomic_write(dst, os.str());
        out.push_back(dst);
    }
    return out;
}

} // namespace qtraj::lab

#endif // QTRAJ_LAB_RUNNER_HPP
