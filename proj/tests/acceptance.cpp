// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "qtraj/lab/runner.hpp"
#include "qtraj/spectral.hpp"
#include "qtraj/trajectories.hpp"

using namespace qtraj;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

const std::vector<MicrostateCoefficients> coefficient_sets{{1, 1, 0}, {2, 1, 0}, {1, 1, 0.5}};

BuildOptions measure_only()
{
    BuildOptions o;
    o.residual_tolerance = std::nullopt;
    return o;
}

struct Labeled
{
    std::string label;
    Microstate ms;
};

/// Every microstate named by the residual criterion.
const std::vector<Labeled>& criterion_microstates()
{
    static const std::vector<Labeled> all = [] {
        std::vector<Labeled> out;
        const auto free = PotentialSpec::constant(0, -5, 5);
        out.push_back({"free E=0.5",
                       build_microstate(solution_pair(free, 0.5, Grid(-5, 5, 4001)), {1, 1, 0}, free, {}, std::nullopt,
                                        measure_only())});
        const auto iw = PotentialSpec::infinite_well(1.0);
        const auto eig = find_bound_eigenvalues(iw, Grid(0, 1, 4001), 2);
        for (int n : {1, 2})
            for (const auto& k : coefficient_sets) {
                std::ostringstream os;
                os << "well E_" << n << " (" << k.a << "," << k.b << "," << k.c << ")";
                out.push_back({os.str(), build_microstate(solution_pair(eig[n - 1]), k, iw, {}, std::nullopt,
                                                          measure_only())});
            }
        const auto ho = PotentialSpec::harmonic(1.0, -5, 5);
        const auto heig = find_bound_eigenvalues(ho, Grid(-5, 5, 8001), 1);
        for (const auto& k : coefficient_sets) {
            std::ostringstream os;
            os << "oscillator E_0 (" << k.a << "," << k.b << "," << k.c << ")";
            out.push_back({os.str(), build_microstate(solution_pair(heig[0]), k, ho, {}, std::nullopt,
                                                      measure_only())});
        }
        return out;
    }();
    return all;
}

Outcome eigenvalues()
{
    double worst = 0.0;
    const auto iw = find_bound_eigenvalues(PotentialSpec::infinite_well(1.0), Grid(0, 1, 4001), 5);
    for (int n = 1; n <= 5; ++n) {
        const double ref = oracle::infinite_well_level(n, 1.0);
        worst = std::max(worst, std::abs(iw[n - 1].energy - ref) / ref);
    }
    const auto ho = find_bound_eigenvalues(PotentialSpec::harmonic(1.0, -8, 8), Grid(-8, 8, 8001), 6);
    for (int n = 0; n <= 5; ++n) {
        const double ref = oracle::harmonic_level(n, 1.0);
        worst = std::max(worst, std::abs(ho[n].energy - ref) / ref);
    }
    return {worst < 1e-5, "max relative error " + sci(worst) + " (well n=1..5, oscillator n=0..5)"};
}

Outcome residuals()
{
    double worst = 0.0;
    std::string at;
    for (const auto& [label, ms] : criterion_microstates()) {
        const double r = qshje_residual(ms);
        if (r >= worst) {
            worst = r;
            at = label;
        }
    }
    return {worst < 1e-6, "max interior residual " + sci(worst) + " at " + at};
}

Outcome multiplicity()
{
    std::vector<const Microstate*> e1;
    for (const auto& l : criterion_microstates())
        if (l.label.rfind("well E_1", 0) == 0)
            e1.push_back(&l.ms);
    double min_sep = 1e300, worst = 0.0;
    for (std::size_t a = 0; a < e1.size(); ++a) {
        for (const double r : residual_profile(*e1[a]))
            if (!std::isnan(r))
                worst = std::max(worst, std::abs(r));
        for (std::size_t b = a + 1; b < e1.size(); ++b) {
            double sep = 0.0;
            for (std::size_t i = 0; i < e1[a]->w_prime.size(); ++i)
                sep = std::max(sep, std::abs(e1[a]->w_prime.values[i] - e1[b]->w_prime.values[i]));
            min_sep = std::min(min_sep, sep);
        }
    }
    return {e1.size() == 3 && min_sep > 1e-3 && worst < 1e-6,
            "min pairwise max|dW'| " + sci(min_sep) + ", max |T+Q+V-E| " + sci(worst)};
}

Outcome potential_forms()
{
    double worst = 0.0;
    for (const auto& [label, ms] : criterion_microstates()) {
        const auto qs = quantum_potential_schwarzian(ms);
        const auto qb = quantum_potential_bohm(ms.grid(), ms.r, ms.units);
        for (std::size_t i = 5; i + 5 < qs.size(); ++i)
            if (!std::isnan(qs[i]) && !std::isnan(qb.values[i]))
                worst = std::max(worst, std::abs(qs[i] - qb.values[i]));
    }
    return {worst < 1e-5, "max |Q_schwarzian - Q_bohm| " + sci(worst)};
}

Outcome beat_form()
{
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    int checked = 0;
    const VariationFrame frames[] = {
        make_variation_frame(PotentialSpec::infinite_well(1.0), Grid(0, 1, 4001), 1, 2, {2, 1, 0}),
        make_variation_frame(PotentialSpec::harmonic(1.0, -5, 5), Grid(-5, 5, 8001), 0, 1, {1, 1, 0}),
    };
    for (const auto& f : frames) {
        const auto& g = f.ms_i.grid();
        const double span = g.q_max - g.q_min;
        std::uniform_real_distribution<double> uq(g.q_min + 0.1 * span, g.q_max - 0.1 * span);
        std::uniform_real_distribution<double> ut(0.0, f.beat_period());
        for (int n = 0; n < 20;) {
            const double q = uq(rng), t = ut(rng);
            const auto b = delta_T_delta_E_discrete(f, q, t);
            if (std::abs(b.cos_phase) < 0.1)
                continue;
            const double ref = oracle::brute_force_dtde(f, q, t);
            worst = std::max(worst, std::abs(b.value - ref) / std::max(1.0, std::abs(ref)));
            ++n;
            ++checked;
        }
    }
    return {worst < 1e-4, "max deviation from finite-theta oracle " + sci(worst) + " over " + std::to_string(checked)
                              + " points"};
}

Outcome beat_quantization()
{
    const auto f = make_variation_frame(PotentialSpec::infinite_well(1.0), Grid(0, 1, 4001), 1, 2, {2, 1, 0});
    const double pi = std::numbers::pi;
    const double expected_period = 4.0 / (3.0 * pi);
    const double expected_freq = 3.0 * pi / 4.0;
    double dt = 0.0;
    const auto v = beat_velocity_series(f, 0.3, 0.0, 16, 4096, &dt);
    const auto peak = dominant_frequency(v, dt);
    const bool freq_ok = std::abs(peak.frequency - expected_freq) <= peak.bin_width;
    const bool period_ok = std::abs(f.beat_period() - expected_period) <= 1e-9;
    std::ostringstream os;
    os.precision(9);
    os << "peak " << peak.frequency << " (bin " << peak.bin << ", width " << peak.bin_width << ") vs "
       << expected_freq << " (ratio " << peak.frequency / expected_freq << "); beat_period " << f.beat_period()
       << " vs " << expected_period;
    return {freq_ok && period_ok, os.str()};
}

Outcome classical_limit()
{
    const auto spec = PotentialSpec::constant(0, -10, 10);
    const auto sys = make_continuum_system(spec, 0.5);
    const auto model = VariationModel::continuum(sys);
    double dt_err = 0.0, epoch = 0.0;
    for (double q = -9.0; q <= 9.0; q += 0.5) {
        dt_err = std::max(dt_err, std::abs(delta_T_delta_E_continuum(sys, q) - 1.0));
        epoch = std::max(epoch, std::abs(epoch_rate(model, q, 0.0)));
    }
    IntegratorConfig cfg;
    cfg.sample_dt = 0.01;
    const auto fl = integrate_trajectory(floyd_flow(model), -3.0, 0.0, 5.0, cfg);
    const auto bo = integrate_trajectory(bohm_flow(sys), -3.0, 0.0, 5.0, cfg);
    const auto cl = integrate_trajectory(classical_flow(spec, 0.5), -3.0, 0.0, 5.0, cfg);
    double traj = 0.0;
    const bool same = fl.samples.size() == bo.samples.size() && cl.samples.size() == bo.samples.size();
    if (same)
        for (std::size_t k = 0; k < bo.samples.size(); ++k)
            traj = std::max({traj, std::abs(fl.samples[k].q - bo.samples[k].q),
                             std::abs(cl.samples[k].q - bo.samples[k].q)});
    return {same && fl.completed && dt_err < 1e-6 && epoch < 1e-6 && traj < 1e-8,
            "|dT/dE - 1| " + sci(dt_err) + ", |epoch rate| " + sci(epoch) + ", trajectory spread " + sci(traj)};
}

Outcome stationary_bohm()
{
    double v_max = 0.0, dqde_err = 0.0, moved = 0.0;
    auto check = [&](const PotentialSpec& spec, const Grid& g, int levels, double q0) {
        for (const auto& e : find_bound_eigenvalues(spec, g, levels)) {
            const auto phase = phase_field(as_complex(e.psi));
            for (std::size_t i = 0; i < g.size(); i += 7)
                v_max = std::max(v_max, std::abs(bohm_velocity(phase, g.at(i))));
            const auto r = integrate_trajectory(bohm_flow(phase), q0, 0.0, 5.0);
            for (const auto& s : r.samples) {
                moved = std::max(moved, std::abs(s.q - q0));
                dqde_err = std::max(dqde_err, std::abs(s.dqde - 1.0));
            }
        }
    };
    check(PotentialSpec::infinite_well(1.0), Grid(0, 1, 2001), 3, 0.3);
    check(PotentialSpec::harmonic(1.0, -8, 8), Grid(-8, 8, 4001), 3, 0.7);
    return {v_max == 0.0 && moved == 0.0 && dqde_err == 0.0,
            "max |v| " + sci(v_max) + ", max displacement " + sci(moved) + ", max |dQ/dE - 1| " + sci(dqde_err)};
}

Outcome step_potential()
{
    const double V0 = 0.75, E = 1.0;
    const auto spec = PotentialSpec::step(V0, -10, 10);
    const auto sys = make_continuum_system(spec, E);
    int changes = 0;
    double prev = delta_T_delta_E_continuum(sys, -10.0);
    for (double q = -10.0 + 1e-3; q < 0.0; q += 1e-3) {
        const double v = delta_T_delta_E_continuum(sys, q);
        if ((v < 0.0) != (prev < 0.0))
            ++changes;
        prev = v;
    }
    const auto r = integrate_trajectory(floyd_flow(VariationModel::continuum(sys)), -2.5, 0.0, 20.0);
    const bool singular = r.has_event(EventKind::SingularVelocity);
    const double k1 = std::sqrt(2.0 * E), k2 = std::sqrt(2.0 * (E - V0));
    const double r_err = std::abs(sys.state.r - (k1 - k2) / (k1 + k2));
    // the analytic state must also satisfy the matching conditions at q = 0
    const double match = std::max(std::abs(sys.state.psi(-1e-300) - sys.state.psi(0.0)),
                                  std::abs(sys.state.dpsi(-1e-300) - sys.state.dpsi(0.0)));
    return {changes >= 1 && singular && r_err < 1e-10 && match < 1e-12,
            std::to_string(changes) + " sign changes of dT/dE on q < 0, SingularVelocity "
                + (singular ? "emitted" : "missing") + ", |r - (k1-k2)/(k1+k2)| " + sci(r_err)};
}

Outcome time_deformation()
{
    const auto sys = make_continuum_system(PotentialSpec::step(0.75, -10, 10), 1.0);
    const auto td = bohm_floyd_time_deformation(sys, -0.9, 2.0);
    const bool pole_free = td.zeros.empty() && td.segments.size() == 1 && !td.segments[0].floyd_truncated;
    const auto model = VariationModel::continuum(sys);
    IntegratorConfig cfg;
    cfg.sample_dt = 1e-3;
    const auto fl = integrate_trajectory(floyd_flow(model), -0.9, 0.0, td.bohm.last().t_q, cfg);
    const double epoch = epoch_identity_check(model, fl);
    return {pole_free && td.max_discrepancy < 1e-4 && epoch < 1e-3,
            std::string(pole_free ? "pole-free" : "split") + " segment, max |q_bohm(t_Q) - q_floyd| "
                + sci(td.max_discrepancy) + ", epoch identity residual " + sci(epoch)};
}

Outcome hygiene()
{
    // Wronskian spread over every pair used above
    double spread = 0.0;
    auto pair_spread = [&](const SolutionPair& p) {
        for (double w : wronskian_profile(p.phi, p.theta))
            spread = std::max(spread, std::abs(w - p.wronskian) / std::abs(p.wronskian));
    };
    for (const auto& e : find_bound_eigenvalues(PotentialSpec::infinite_well(1.0), Grid(0, 1, 4001), 5))
        pair_spread(solution_pair(e));
    for (const auto& e : find_bound_eigenvalues(PotentialSpec::harmonic(1.0, -8, 8), Grid(-8, 8, 8001), 6))
        pair_spread(solution_pair(e));
    for (const auto& l : criterion_microstates())
        pair_spread(l.ms.pair);

    // eigenvalue error under grid halving
    auto order = [](const PotentialSpec& spec, double lo, double hi, int level, double exact) {
        std::vector<double> err;
        for (std::size_t n : {51u, 101u, 201u}) {
            const auto e = find_bound_eigenvalues(spec, Grid(lo, hi, n), level + 1);
            err.push_back(std::abs(e[level].energy - exact));
        }
        return std::min(std::log2(err[0] / err[1]), std::log2(err[1] / err[2]));
    };
    const double p_well = order(PotentialSpec::infinite_well(1.0), 0, 1, 1, oracle::infinite_well_level(2, 1.0));
    const double p_osc = order(PotentialSpec::harmonic(1.0, -6, 6), -6, 6, 0, oracle::harmonic_level(0, 1.0));

    // same seed, different thread counts: identical artifacts
    bool identical = true;
    const auto base = lab::fs::temp_directory_path() / ("qtraj_acceptance_" + std::to_string(::getpid()));
    lab::fs::remove_all(base);
    const auto cfg = lab::load_scenario(std::string(QTRAJ_SCENARIO_DIR) + "/infinite_well_sweep.yaml");
    lab::RunOptions a, b;
    a.out = base / "a";
    b.out = base / "b";
    b.threads = 4;
    const auto ra = lab::run_scenario(cfg, a);
    const auto rb = lab::run_scenario(cfg, b);
    identical = ra.artifacts.size() == rb.artifacts.size();
    for (std::size_t k = 0; identical && k < ra.artifacts.size(); ++k)
        identical = lab::read_file(a.out / ra.artifacts[k].path) == lab::read_file(b.out / rb.artifacts[k].path);
    lab::fs::remove_all(base);

    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << "Wronskian spread " << sci(spread) << ", observed order " << p_well << " (well E_2) " << p_osc
       << " (oscillator E_0), rerun artifacts " << (identical ? "identical" : "DIFFER");
    return {spread < 1e-6 && std::abs(p_well - 4.0) < 0.3 && std::abs(p_osc - 4.0) < 0.3 && identical, os.str()};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"eigenvalue oracle", eigenvalues},
        {"QSHJE residual", residuals},
        {"microstate multiplicity", multiplicity},
        {"quantum-potential equivalence", potential_forms},
        {"dT/dE beat form vs brute force", beat_form},
        {"beat quantization", beat_quantization},
        {"classical/continuum limits", classical_limit},
        {"stationary Bohm bound states", stationary_bohm},
        {"step potential", step_potential},
        {"time deformation", time_deformation},
        {"numerical hygiene", hygiene},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        }
        catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += o.pass ? 0 : 1;
        std::printf("criterion %2zu %s  %-32s %s [%.1f s]\n", k + 1, o.pass ? "PASS" : "FAIL",
                    criteria[k].first.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
