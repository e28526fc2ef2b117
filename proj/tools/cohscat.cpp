#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cohscat/cli/runner.hpp"
#include "cohscat/ode.hpp"
#include "cohscat/parallel.hpp"

namespace {

using namespace cohscat;
using namespace cohscat::cli;

constexpr int kExitSchema = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> rabi_ghz;
    std::optional<std::string> convention;
    std::optional<double> tau_max;
    std::optional<std::uint64_t> points;
    std::optional<std::uint64_t> pairs;
    std::optional<double> area_pi;
    std::optional<double> pulse_fwhm;
    std::optional<double> overlap;
    std::optional<double> g;
    std::optional<double> r1;
    std::optional<double> r2;
    std::optional<std::uint64_t> mc_pulses;
};

void apply(const Overrides& o, const std::string& sub, Scenario& s) {
    if (o.seed) s.seed = *o.seed;
    if (o.out) s.output_dir = *o.out;
    if (o.rabi_ghz) s.drive.rabi_ghz = *o.rabi_ghz;
    if (o.convention) s.drive.convention = *o.convention;
    const bool hom = sub == "hom-cw" || sub == "fig2d" || sub == "fig2e";
    if (o.tau_max) (hom ? s.hom.tau_max : s.timing.tau_max) = *o.tau_max;
    if (o.points) {
        if (hom)
            s.hom.half_points = *o.points;
        else if (sub == "rabi")
            s.pulse_train.rabi_points = *o.points;
        else if (sub == "noon" || sub == "fig3d" || sub == "fig3e")
            s.circuit.phi_points = *o.points;
        else if (sub == "spectrum" || sub == "fig2b")
            s.spectral.points = *o.points;
        else
            s.timing.half_points = *o.points;
    }
    if (o.pairs) s.pulse_train.pairs = *o.pairs;
    if (o.area_pi) s.pulse_train.area_pi = *o.area_pi;
    if (o.pulse_fwhm) s.pulse_train.fwhm = *o.pulse_fwhm;
    if (o.overlap) s.source_model.overlap = *o.overlap;
    if (o.g) s.source_model.multiphoton_g = *o.g;
    if (o.r1) s.circuit.r1 = *o.r1;
    if (o.r2) s.circuit.r2 = *o.r2;
    if (o.mc_pulses) s.pulse_train.rabi_mc_pulses = *o.mc_pulses;
    s.validate();
}

void print_results(const Output& o) {
    for (const auto& [k, v] : o.results.items()) {
        if (v.is_number_float())
            std::cout << o.id << ": " << k << " = " << format_number(v.get<double>()) << '\n';
        else if (v.is_object())
            for (const auto& [k2, v2] : v.items())
                std::cout << o.id << ": " << k << "." << k2 << " = "
                          << (v2.is_number_float() ? format_number(v2.get<double>()) : v2.dump()) << '\n';
        else
            std::cout << o.id << ": " << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity-enhanced resonance fluorescence simulator"};
    app.set_version_flag("--version", std::string(kArtifactVersion));
    app.require_subcommand(1);

    std::string config_path;
    unsigned threads = 0;
    Overrides ov;
    SimOptions sim_opts;

    app.add_option("--config", config_path, "Scenario JSON (or a manifest.json from an earlier run)");
    app.add_option("--seed", ov.seed, "64-bit RNG seed");
    app.add_option("--threads", threads, "Worker threads for Monte Carlo (default: COHSCAT_THREADS, then all cores)");
    app.add_option("--out", ov.out, "Output directory");
    app.add_option("--rabi-ghz", ov.rabi_ghz, "CW Rabi frequency in GHz");
    app.add_option("--convention", ov.convention, "GHz reading: cyclic (W/2pi) or angular")
        ->check(CLI::IsMember({"cyclic", "angular"}));
    app.add_option("--tau-max", ov.tau_max, "Largest |tau| in ns");
    app.add_option("--points", ov.points, "Grid size (half-points for tau grids)");
    app.add_option("--pairs", ov.pairs, "Number of pulse pairs");
    app.add_option("--area-pi", ov.area_pi, "Pulse area in units of pi");
    app.add_option("--pulse-fwhm", ov.pulse_fwhm, "Pulse FWHM in ns");
    app.add_option("--overlap", ov.overlap, "Two-photon overlap M");
    app.add_option("--g", ov.g, "Multi-photon g of the source model");
    app.add_option("--r1", ov.r1, "First coupler reflectivity");
    app.add_option("--r2", ov.r2, "Second coupler reflectivity");
    app.add_option("--mc-pulses", ov.mc_pulses, "Monte Carlo pulses per point for the Rabi curve");

    auto* figure = app.add_subcommand("figure", "Reproduce a figure panel");
    figure->fallthrough();
    std::string figure_id;
    std::vector<std::string> figure_ids{"all"};
    for (const auto& [id, fn] : figures()) figure_ids.push_back(id);
    figure->add_option("id", figure_id, "Panel id or 'all'")->required()->check(CLI::IsMember(figure_ids));

    auto* sim = app.add_subcommand("sim", "Run one simulation");
    sim->fallthrough();
    sim->require_subcommand(1);
    std::string sim_name;
    for (const auto& [name, fn] : simulations()) {
        auto* sub = sim->add_subcommand(name, simulation_help().at(name));
        sub->fallthrough();
        sub->callback([&sim_name, n = name] { sim_name = n; });
        if (name == "noon")
            sub->add_option("--input", sim_opts.input, "single or dual")->check(CLI::IsMember({"single", "dual"}));
        if (name == "stream" || name == "hbt" || name == "hom-pulsed")
            sub->add_flag("--synthetic", sim_opts.synthetic, "Use a synthetic stream with the source-model g");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitSchema;
    }

    std::string command;
    for (int i = 1; i < argc; ++i) command += (i > 1 ? " " : "") + std::string(argv[i]);

    Context ctx;
    ctx.threads = resolve_threads(threads);
    ctx.sim = sim_opts;
    const std::string target = figure->parsed() ? figure_id : sim_name;
    try {
        if (!config_path.empty()) ctx.scenario = load_scenario(config_path);
        apply(ov, target, ctx.scenario);
    } catch (const std::exception& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kExitSchema;
    }

    std::vector<Output> outputs;
    try {
        if (figure->parsed()) {
            for (const auto& [id, fn] : figures())
                if (figure_id == "all" || figure_id == id) outputs.push_back(fn(ctx));
        } else {
            for (const auto& [name, fn] : simulations())
                if (name == sim_name) outputs.push_back(fn(ctx));
        }
        write_outputs(ctx, command, outputs);
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        std::cerr << (code == kExitSchema ? "invalid input: " : "numerical failure: ") << e.what() << '\n';
        return code;
    }
    for (const auto& o : outputs) print_results(o);
    std::cout << "wrote " << ctx.scenario.output_dir << '\n';
    return 0;
}
