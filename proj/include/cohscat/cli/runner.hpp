#pragma once

// Figure and simulation commands. Each command turns a resolved scenario
// into one table (written as CSV), a plot and a set of summary values.

#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "cohscat/cli/csv.hpp"
#include "cohscat/cli/scenario.hpp"
#include "cohscat/cli/svg.hpp"
#include "cohscat/correlations.hpp"
#include "cohscat/emitter.hpp"
#include "cohscat/fock.hpp"
#include "cohscat/hom.hpp"
#include "cohscat/pulsed.hpp"
#include "cohscat/spectrum.hpp"

#ifndef COHSCAT_VERSION
#define COHSCAT_VERSION "0.0.0"
#endif

namespace cohscat::cli {

inline constexpr const char* kArtifactVersion = COHSCAT_VERSION;

struct Output {
    std::string id;
    CsvTable table;
    PlotSpec plot;
    Json results = Json::object();
    std::map<std::string, std::string> sidecars;  // extra files: name -> content
};

/// Options that belong to a single simulation command rather than the scenario.
struct SimOptions {
    std::string input = "dual";  // noon: single or dual
    bool synthetic = false;      // hbt, hom-pulsed: synthetic stream instead of Monte Carlo
};

struct Context {
    Scenario scenario;
    unsigned threads = 1;
    SimOptions sim;
};

namespace detail {

inline std::string ratio_label(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", r);
    return buf;
}

inline Series series(std::string name, const std::vector<double>& x, const std::vector<double>& y,
                     bool scatter = false) {
    return {std::move(name), x, y, scatter};
}

inline std::pair<double, double> couplers(const CircuitBlock& c) {
    const double solved = c.r1 && c.r2 ? 0.0 : coupler_for_visibility(c.target_single_visibility);
    return {c.r1.value_or(solved), c.r2.value_or(solved)};
}

inline std::vector<double> phi_grid(const CircuitBlock& c) {
    return linspace(0.0, c.phi_span_pi * std::numbers::pi, c.phi_points);
}

inline PhotonStream make_stream(const Context& ctx) {
    const auto& s = ctx.scenario;
    if (ctx.sim.synthetic)
        return synthetic_stream(s.pulse_train.train(), s.source_model.multiphoton_g, s.emitter.t1, s.seed);
    return simulate_stream(s.emitter.params(), s.pulse_train.train(), s.seed, ctx.threads);
}

inline Output fringe_output(const Context& ctx, const std::string& id, FringeInput input) {
    const auto& s = ctx.scenario;
    const auto [r1, r2] = couplers(s.circuit);
    const auto grid = phi_grid(s.circuit);
    const SourceModel source{s.source_model.overlap, s.source_model.multiphoton_g};
    const auto t = mzi_fringes(source, r1, r2, grid, input);

    Output out;
    out.id = id;
    out.table.header = {"phi_rad", "p_out0", "p_out1", "p_coincidence"};
    for (std::size_t k = 0; k < grid.size(); ++k)
        out.table.add_row({grid[k], t.p_out0[k], t.p_out1[k], t.p_coincidence[k]});
    out.results["r1"] = r1;
    out.results["r2"] = r2;

    const auto single = input == FringeInput::kSingle ? t : mzi_fringes(source, r1, r2, grid, FringeInput::kSingle);
    const auto f1 = fit_fringe(grid, single.p_out0, 1);
    out.results["single_visibility"] = f1.visibility;
    out.results["single_frequency"] = f1.frequency;
    if (input == FringeInput::kDual) {
        const auto f2 = fit_fringe(grid, t.p_coincidence, 2);
        out.results["coincidence_visibility"] = f2.visibility;
        out.results["coincidence_frequency"] = f2.frequency;
        out.results["frequency_ratio"] = f2.frequency / f1.frequency;
        out.results["coincidence_min"] = *std::min_element(t.p_coincidence.begin(), t.p_coincidence.end());
        out.results["fit_residual"] = f2.residual_norm;
        out.plot = {"Two-photon fringes", "phase (rad)", "probability",
                    {series("coincidence", grid, t.p_coincidence), series("both in out0", grid, t.p_out0),
                     series("both in out1", grid, t.p_out1)}};
    } else {
        out.results["fit_residual"] = f1.residual_norm;
        out.plot = {"Single-photon fringes", "phase (rad)", "probability",
                    {series("out0", grid, t.p_out0), series("out1", grid, t.p_out1)}};
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Figures.

inline Output figure_fig1d(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto p = s.emitter.params();
    GatingModel gating{s.gating.charge_occupation, 0.0, s.gating.collection_efficiency};
    gating.laser_leakage = s.gating.laser_leakage.value_or(
        leakage_for_ratio(p, gating, s.gating.rabi_per_sqrt_power, s.gating.re_to_laser_ratio));
    const auto powers = linspace(0.0, s.gating.max_power_nw, s.gating.points);
    const auto on = saturation_curve(p, gating, powers, s.gating.rabi_per_sqrt_power, true);
    const auto off = saturation_curve(p, gating, powers, s.gating.rabi_per_sqrt_power, false);

    Output out;
    out.id = "fig1d";
    out.table.header = {"power_nw", "counts_gate_on", "counts_gate_off"};
    std::vector<double> y_on, y_off;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        out.table.add_row({powers[i], on[i].counts, off[i].counts});
        y_on.push_back(on[i].counts);
        y_off.push_back(off[i].counts);
    }
    const double p_sat = saturation_power(p, s.gating.rabi_per_sqrt_power);
    const auto knee_on = saturation_curve(p, gating, std::vector<double>{p_sat}, s.gating.rabi_per_sqrt_power, true);
    const double laser_at_knee = gating.laser_leakage * p_sat;
    out.results["laser_leakage"] = gating.laser_leakage;
    out.results["saturation_power_nw"] = p_sat;
    out.results["re_to_laser_at_knee"] = (knee_on[0].counts - laser_at_knee) / laser_at_knee;
    out.plot = {"Gated saturation curve", "power (nW)", "counts/s",
                {detail::series("gate on", powers, y_on), detail::series("laser only", powers, y_off)}};
    return out;
}

inline Output figure_fig2a(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto p = s.emitter.params();
    const auto tau = symmetric_grid(s.timing.tau_max, s.timing.half_points);
    const auto ideal = g2(p, s.drive.rabi(), tau);
    const auto blinked =
        s.blinking.enabled ? apply_blinking(ideal, {s.blinking.amplitude, s.blinking.timescale}) : ideal;
    const auto measured = convolve_timing(blinked, TimingResponse{s.timing.irf_fwhm});

    Output out;
    out.id = "fig2a";
    out.table.header = {"tau_ns", "g2_ideal", "g2_blinking", "g2_measured"};
    for (std::size_t i = 0; i < tau.size(); ++i)
        out.table.add_row({tau[i], ideal.values()[i], blinked.values()[i], measured.values()[i]});
    const std::size_t mid = s.timing.half_points;
    out.results["rabi_rad_per_ns"] = s.drive.rabi();
    out.results["g2_zero_ideal"] = ideal.values()[mid];
    out.results["g2_zero_measured"] = measured.values()[mid];
    out.plot = {"Auto-correlation under CW drive", "tau (ns)", "g2",
                {detail::series("ideal", tau, ideal.values()), detail::series("measured", tau, measured.values())}};
    return out;
}

inline Output figure_fig2b(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto p = s.emitter.params();
    const SpectralResponse resp{s.spectral.instrument_fwhm, s.spectral.laser_fwhm};
    const auto grid = spectrum_grid(s.spectral.half_span, s.spectral.points);
    const auto trace = emission_spectrum(p, s.drive.rabi(), resp, grid);
    const auto inc = trace.incoherent_density();

    Output out;
    out.id = "fig2b";
    out.table.header = {"energy_uev", "density", "coherent_density", "incoherent_density"};
    for (std::size_t i = 0; i < trace.size(); ++i)
        out.table.add_row({trace.energy()[i], trace.density()[i], trace.coherent_density()[i], inc[i]});
    out.results["rrs_fraction"] = rrs_fraction(p, s.drive.rabi());
    out.results["coherent_weight"] = trace.coherent_weight();
    out.results["natural_linewidth_uev"] = p.linewidth_uev();
    const auto fit = fit_linewidth(trace, resp);
    out.results["fitted_intrinsic_fwhm_uev"] = fit.intrinsic_fwhm;
    out.results["fitted_total_fwhm_uev"] = fit.total_fwhm;
    out.results["linewidth_ratio"] = fit.intrinsic_fwhm > 0.0 ? p.linewidth_uev() / fit.intrinsic_fwhm : 0.0;
    out.plot = {"Emission spectrum", "energy from laser (ueV)", "density (1/ueV)",
                {detail::series("total", trace.energy(), trace.density()),
                 detail::series("incoherent", trace.energy(), inc)}};
    return out;
}

inline Output figure_fig2c(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto p = s.emitter.params();
    const auto ghz = linspace(0.0, s.drive.sweep_max_ghz, s.drive.sweep_points);
    const std::vector<double> ratios{1.0, 0.3};

    Output out;
    out.id = "fig2c";
    out.table.header = {"rabi_ghz", "i_total_norm"};
    for (double r : ratios) out.table.header.push_back("rrs_frac_ratio" + detail::ratio_label(r));
    std::vector<std::vector<double>> cols(1 + ratios.size());
    for (double f : ghz) {
        const double rabi = rabi_from_ghz(f, s.drive.rabi_convention());
        std::vector<Cell> row{f, 2.0 * steady_state(p, rabi).rho_ee()};
        cols[0].push_back(std::get<double>(row[1]));
        for (std::size_t k = 0; k < ratios.size(); ++k) {
            const double v = rrs_fraction(p.with_t2(2.0 * ratios[k] * p.t1()), rabi);
            row.push_back(v);
            cols[k + 1].push_back(v);
        }
        out.table.add_row(std::move(row));
    }
    for (std::size_t k = 0; k < ratios.size(); ++k)
        out.results["max_rrs_frac_ratio" + detail::ratio_label(ratios[k])] =
            *std::max_element(cols[k + 1].begin(), cols[k + 1].end());
    out.results["i_total_norm_at_drive"] = 2.0 * steady_state(p, s.drive.rabi()).rho_ee();
    out.plot = {"Total intensity and RRS fraction", "Rabi frequency (GHz)", "normalised",
                {detail::series("I_total", ghz, cols[0]), detail::series("RRS T2/2T1=1.0", ghz, cols[1]),
                 detail::series("RRS T2/2T1=0.3", ghz, cols[2])}};
    return out;
}

inline Output figure_fig2d(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto tau = symmetric_grid(s.hom.tau_max, s.hom.half_points);
    const HomSetup setup{s.hom.delay, s.hom.splitter_ratio};
    const auto pair = hom_pair(s.emitter.params(), s.drive.rabi(), setup, tau);

    Output out;
    out.id = "fig2d";
    out.table.header = {"tau_ns", "g2_parallel", "g2_orthogonal"};
    for (std::size_t i = 0; i < tau.size(); ++i)
        out.table.add_row({tau[i], pair.parallel.values()[i], pair.orthogonal.values()[i]});
    out.results["g2_parallel_zero"] = pair.parallel.values()[s.hom.half_points];
    out.results["g2_orthogonal_zero"] = pair.orthogonal.values()[s.hom.half_points];
    out.plot = {"CW two-photon interference", "tau (ns)", "g2",
                {detail::series("parallel", tau, pair.parallel.values()),
                 detail::series("orthogonal", tau, pair.orthogonal.values())}};
    return out;
}

inline Output figure_fig2e(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto p = s.emitter.params();
    const auto tau = symmetric_grid(s.hom.tau_max, s.hom.half_points);
    const HomSetup setup{s.hom.delay, s.hom.splitter_ratio};
    const auto family = visibility_family(p, s.drive.rabi(), setup, s.hom.ratios, tau);

    const auto pair = hom_pair(p, s.drive.rabi(), setup, tau);
    double irf = 0.0;
    if (s.hom.irf_fwhm) {
        irf = *s.hom.irf_fwhm;
    } else {
        irf = solve_timing_irf(pair.parallel, pair.orthogonal, s.hom.target_peak_visibility).fwhm;
    }
    const auto measured = visibility(convolve_timing(pair.parallel, TimingResponse{irf}),
                                     convolve_timing(pair.orthogonal, TimingResponse{irf}));

    Output out;
    out.id = "fig2e";
    out.table.header = {"tau_ns"};
    for (double r : s.hom.ratios) out.table.header.push_back("v_ratio" + detail::ratio_label(r));
    out.table.header.push_back("v_measured");
    for (std::size_t i = 0; i < tau.size(); ++i) {
        std::vector<Cell> row{tau[i]};
        for (const auto& f : family) row.push_back(f.values()[i]);
        row.push_back(measured.trace.values()[i]);
        out.table.add_row(std::move(row));
    }
    const auto& mv = measured.trace.values();
    out.results["irf_fwhm_ns"] = irf;
    out.results["irf_source"] = s.hom.irf_fwhm ? "config" : "solved";
    out.results["peak_visibility_measured"] = *std::max_element(mv.begin(), mv.end());
    for (std::size_t k = 0; k < family.size(); ++k)
        out.results["v_zero_ratio" + detail::ratio_label(s.hom.ratios[k])] = family[k].values()[s.hom.half_points];
    out.plot.title = "HOM visibility";
    out.plot.x_label = "tau (ns)";
    out.plot.y_label = "V";
    for (std::size_t k = 0; k < family.size(); ++k)
        out.plot.series.push_back(
            detail::series("T2/2T1=" + detail::ratio_label(s.hom.ratios[k]), tau, family[k].values()));
    out.plot.series.push_back(detail::series("with IRF", tau, mv));
    return out;
}

inline Output figure_fig3b(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto stream = detail::make_stream(ctx);
    const auto rep = hbt_analyze(stream, s.pulse_train.bin_width, static_cast<int>(s.pulse_train.max_pair_lag));

    Output out;
    out.id = "fig3b";
    out.table.header = {"delay_ns", "coincidences"};
    for (std::size_t i = 0; i < rep.bin_centers.size(); ++i) out.table.add_row({rep.bin_centers[i], rep.histogram[i]});
    out.results["photons"] = stream.tags.size();
    out.results["g_metric"] = rep.g_metric;
    out.results["g_metric_error"] = rep.g_metric_error;
    out.results["g2_zero"] = rep.g2_zero;
    out.results["g2_zero_error"] = rep.g2_zero_error;
    out.plot = {"Pulsed auto-correlation", "delay (ns)", "coincidences",
                {detail::series("HBT", rep.bin_centers, rep.histogram)}};
    return out;
}

inline Output figure_fig3c(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto stream = detail::make_stream(ctx);
    const auto rep = pulsed_hom(stream, s.source_model.overlap, s.seed ^ 0x9E3779B97F4A7C15ull,
                                s.pulse_train.separation, static_cast<int>(s.pulse_train.max_pair_lag));

    Output out;
    out.id = "fig3c";
    out.table.header = {"pair_lag", "slot_lag", "delay_ns", "parallel", "orthogonal"};
    std::vector<double> x, par, ort;
    for (const auto& [lag, area] : rep.parallel.peak_areas) {
        const double delay = lag.pair_lag * s.pulse_train.pair_period + lag.pulse_lag * s.pulse_train.separation;
        const double o = rep.orthogonal.peak_areas.at(lag);
        out.table.add_row({double(lag.pair_lag), double(lag.pulse_lag), delay, area, o});
        x.push_back(delay);
        par.push_back(area);
        ort.push_back(o);
    }
    out.results["injected_overlap"] = s.source_model.overlap;
    out.results["overlap_estimate"] = rep.parallel.overlap;
    out.results["overlap_error"] = rep.parallel.overlap_error;
    out.results["g_metric"] = rep.g_metric;
    out.results["central_parallel"] = rep.central_parallel;
    out.results["central_orthogonal"] = rep.central_orthogonal;
    out.plot = {"Pulsed two-photon interference", "delay (ns)", "peak area",
                {detail::series("parallel", x, par, true), detail::series("orthogonal", x, ort, true)}};
    return out;
}

inline Output figure_fig3d(const Context& ctx) { return detail::fringe_output(ctx, "fig3d", FringeInput::kSingle); }
inline Output figure_fig3e(const Context& ctx) { return detail::fringe_output(ctx, "fig3e", FringeInput::kDual); }

using Command = std::function<Output(const Context&)>;

inline const std::vector<std::pair<std::string, Command>>& figures() {
    static const std::vector<std::pair<std::string, Command>> table{
        {"fig1d", figure_fig1d}, {"fig2a", figure_fig2a}, {"fig2b", figure_fig2b}, {"fig2c", figure_fig2c},
        {"fig2d", figure_fig2d}, {"fig2e", figure_fig2e}, {"fig3b", figure_fig3b}, {"fig3c", figure_fig3c},
        {"fig3d", figure_fig3d}, {"fig3e", figure_fig3e}};
    return table;
}

// ---------------------------------------------------------------------------
// Simulation commands.

inline Output sim_steady(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto p = s.emitter.params();
    Output out;
    out.id = "steady";
    out.table.header = {"convention", "rabi_rad_per_ns", "saturation", "rho_ee", "rrs_fraction", "i_total_norm"};
    std::vector<double> sat;
    for (auto [name, conv] : {std::pair{"cyclic", RabiConvention::kCyclic}, {"angular", RabiConvention::kAngular}}) {
        const double rabi = rabi_from_ghz(s.drive.rabi_ghz, conv);
        const auto ss = steady_state(p, rabi);
        out.table.add_row({std::string(name), rabi, p.saturation(rabi), ss.rho_ee(), rrs_fraction(p, rabi),
                           2.0 * ss.rho_ee()});
        out.results[std::string(name)] = {{"rabi_rad_per_ns", rabi},
                                          {"saturation", p.saturation(rabi)},
                                          {"rho_ee", ss.rho_ee()},
                                          {"rrs_fraction", rrs_fraction(p, rabi)}};
        sat.push_back(p.saturation(rabi));
    }
    const auto ghz = linspace(0.0, s.drive.sweep_max_ghz, s.drive.sweep_points);
    std::vector<double> cyc, ang;
    for (double f : ghz) {
        cyc.push_back(2.0 * steady_state(p, rabi_from_ghz(f, RabiConvention::kCyclic)).rho_ee());
        ang.push_back(2.0 * steady_state(p, rabi_from_ghz(f, RabiConvention::kAngular)).rho_ee());
    }
    out.plot = {"Steady-state intensity", "Rabi frequency (GHz)", "I / I_max",
                {detail::series("cyclic", ghz, cyc), detail::series("angular", ghz, ang)}};
    return out;
}

inline Output sim_g2(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto tau = symmetric_grid(s.timing.tau_max, s.timing.half_points);
    const auto t = g2(s.emitter.params(), s.drive.rabi(), tau);
    Output out;
    out.id = "g2";
    out.table.header = {"tau_ns", "g2"};
    for (std::size_t i = 0; i < tau.size(); ++i) out.table.add_row({tau[i], t.values()[i]});
    out.results["g2_zero"] = t.values()[s.timing.half_points];
    out.plot = {"g2", "tau (ns)", "g2", {detail::series("g2", tau, t.values())}};
    return out;
}

inline Output sim_g1(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto tau = linspace(0.0, s.timing.tau_max, s.timing.half_points + 1);
    const auto t = g1(s.emitter.params(), s.drive.rabi(), tau);
    Output out;
    out.id = "g1";
    out.table.header = {"tau_ns", "re_g1", "im_g1", "abs_g1"};
    std::vector<double> mag;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const auto z = t.complex_values()[i];
        out.table.add_row({tau[i], z.real(), z.imag(), std::abs(z)});
        mag.push_back(std::abs(z));
    }
    out.results["coherent_offset"] = t.coherent_offset();
    out.plot = {"|g1|", "tau (ns)", "|g1|", {detail::series("|g1|", tau, mag)}};
    return out;
}

inline Output sim_spectrum(const Context& ctx) {
    auto out = figure_fig2b(ctx);
    out.id = "spectrum";
    return out;
}

inline Output sim_hom_cw(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto tau = symmetric_grid(s.hom.tau_max, s.hom.half_points);
    const auto pair = hom_pair(s.emitter.params(), s.drive.rabi(), HomSetup{s.hom.delay, s.hom.splitter_ratio}, tau);
    const auto v = visibility(pair.parallel, pair.orthogonal);
    Output out;
    out.id = "hom_cw";
    out.table.header = {"tau_ns", "g2_parallel", "g2_orthogonal", "visibility"};
    for (std::size_t i = 0; i < tau.size(); ++i)
        out.table.add_row({tau[i], pair.parallel.values()[i], pair.orthogonal.values()[i], v.trace.values()[i]});
    out.results["visibility_zero"] = v.trace.values()[s.hom.half_points];
    out.results["undefined_points"] = v.undefined.size();
    out.plot = {"CW HOM", "tau (ns)", "", {detail::series("visibility", tau, v.trace.values())}};
    return out;
}

inline Output sim_rabi(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto& pt = s.pulse_train;
    const auto areas_pi = linspace(0.0, pt.rabi_max_pi, pt.rabi_points);
    std::vector<double> areas;
    for (double a : areas_pi) areas.push_back(a * std::numbers::pi);
    const auto shape = pt.train().shape;
    const auto curve = rabi_curve(s.emitter.params(), areas, pt.fwhm, shape);
    std::vector<RabiPoint> mc;
    if (pt.rabi_mc_pulses > 0)
        mc = rabi_curve_mc(s.emitter.params(), areas, pt.fwhm, pt.rabi_mc_pulses, s.seed, ctx.threads, shape);

    Output out;
    out.id = "rabi";
    out.table.header = {"area_pi", "probability"};
    if (!mc.empty()) out.table.header.insert(out.table.header.end(), {"mc_probability", "mc_std_error"});
    std::vector<double> y, ymc;
    for (std::size_t i = 0; i < areas.size(); ++i) {
        std::vector<Cell> row{areas_pi[i], curve[i].probability};
        y.push_back(curve[i].probability);
        if (!mc.empty()) {
            row.push_back(mc[i].probability);
            row.push_back(mc[i].std_error);
            ymc.push_back(mc[i].probability);
        }
        out.table.add_row(std::move(row));
    }
    const double at = rabi_curve(s.emitter.params(), std::vector<double>{pt.area_pi * std::numbers::pi}, pt.fwhm,
                                 shape)[0]
                          .probability;
    out.results["probability_at_area"] = at;
    out.plot = {"Pulsed Rabi oscillation", "pulse area (pi)", "photons per pulse",
                {detail::series("ODE", areas_pi, y)}};
    if (!mc.empty()) out.plot.series.push_back(detail::series("Monte Carlo", areas_pi, ymc, true));
    return out;
}

inline Output sim_stream(const Context& ctx) {
    const auto stream = detail::make_stream(ctx);
    Output out;
    out.id = "stream";
    out.table.header = {"pair_index", "pulse_index", "time_ns"};
    out.table.rows.reserve(stream.tags.size());
    for (const auto& t : stream.tags) out.table.add_row({double(t.pair), double(t.pulse), t.time});
    const auto counts = stream.counts();
    std::vector<double> hist(4, 0.0), idx{0, 1, 2, 3};
    for (auto c : counts) hist[std::min<std::size_t>(c, 3)] += 1.0;
    out.results["photons"] = stream.tags.size();
    out.results["pulses"] = counts.size();
    out.results["photons_per_pulse"] = double(stream.tags.size()) / double(counts.size());
    Json side;
    side["seed"] = stream.seed;
    side["pairs"] = stream.train.n_pairs;
    side["photons"] = stream.tags.size();
    side["synthetic"] = ctx.sim.synthetic;
    side["emitter"] = {{"t1", stream.params.t1()}, {"t2", stream.params.t2()}, {"detuning", stream.params.detuning()}};
    side["pulse_train"] = {{"pulse_area", stream.train.pulse_area},
                           {"pulse_fwhm", stream.train.pulse_fwhm},
                           {"separation", stream.train.separation},
                           {"pair_period", stream.train.pair_period},
                           {"shape", stream.train.shape == PulseShape::kSquare ? "square" : "gaussian"}};
    side["photon_number_histogram"] = hist;
    out.sidecars["stream.json"] = side.dump(2) + "\n";
    out.plot = {"Photons per pulse", "photons", "pulses", {detail::series("pulses", idx, hist, true)}};
    return out;
}

inline Output sim_hbt(const Context& ctx) {
    auto out = figure_fig3b(ctx);
    out.id = "hbt";
    return out;
}

inline Output sim_hom_pulsed(const Context& ctx) {
    auto out = figure_fig3c(ctx);
    out.id = "hom_pulsed";
    return out;
}

inline Output sim_noon(const Context& ctx) {
    return detail::fringe_output(ctx, "noon", ctx.sim.input == "single" ? FringeInput::kSingle : FringeInput::kDual);
}

inline const std::vector<std::pair<std::string, Command>>& simulations() {
    static const std::vector<std::pair<std::string, Command>> table{
        {"steady", sim_steady}, {"g2", sim_g2},         {"g1", sim_g1},         {"spectrum", sim_spectrum},
        {"hom-cw", sim_hom_cw}, {"rabi", sim_rabi},     {"stream", sim_stream}, {"hbt", sim_hbt},
        {"hom-pulsed", sim_hom_pulsed}, {"noon", sim_noon}};
    return table;
}

inline const std::map<std::string, std::string>& simulation_help() {
    static const std::map<std::string, std::string> help{
        {"steady", "Steady state and RRS fraction under both GHz conventions"},
        {"g2", "Second-order correlation, CSV tau_ns,g2"},
        {"g1", "First-order correlation for tau >= 0"},
        {"spectrum", "Emission spectrum with linewidth fit"},
        {"hom-cw", "CW two-photon interference and visibility"},
        {"rabi", "Photons per pulse versus pulse area"},
        {"stream", "Monte Carlo photon time tags"},
        {"hbt", "Pulsed auto-correlation and g metric"},
        {"hom-pulsed", "Pulsed two-photon interference and overlap estimate"},
        {"noon", "Mach-Zehnder fringes for single or dual input"}};
    return help;
}

/// Exit status for a failed run: 2 for bad input, 3 for numerical failure.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
        dynamic_cast<const std::out_of_range*>(&e))
        return 2;
    return 3;
}

// ---------------------------------------------------------------------------
// Artifact writing.

inline Json manifest(const Context& ctx, const std::string& command, const std::vector<Output>& outputs) {
    Json m;
    m["artifact_version"] = kArtifactVersion;
    m["command"] = command;
    m["options"] = {{"input", ctx.sim.input}, {"synthetic", ctx.sim.synthetic}};
    m["scenario"] = to_json(ctx.scenario);
    Json files = Json::array(), results = Json::object();
    for (const auto& o : outputs) {
        files.push_back(o.id + ".csv");
        files.push_back(o.id + ".svg");
        for (const auto& [name, content] : o.sidecars) files.push_back(name);
        results[o.id] = o.results;
    }
    m["files"] = files;
    m["results"] = results;
    return m;
}

inline void write_outputs(const Context& ctx, const std::string& command, const std::vector<Output>& outputs) {
    const std::filesystem::path dir(ctx.scenario.output_dir);
    std::filesystem::create_directories(dir);
    for (const auto& o : outputs) {
        write_text(dir / (o.id + ".csv"), o.table.str());
        write_text(dir / (o.id + ".svg"), render_svg(o.plot));
        for (const auto& [name, content] : o.sidecars) write_text(dir / name, content);
    }
    write_text(dir / "manifest.json", manifest(ctx, command, outputs).dump(2) + "\n");
}

}  // namespace cohscat::cli
