#pragma once

// Scenario configuration: a JSON document with a fixed set of optional
// blocks. Unknown keys anywhere are an error. to_json() emits every field,
// so a resolved scenario is also a valid input.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohscat/emitter.hpp"
#include "cohscat/pulsed.hpp"

namespace cohscat::cli {

using Json = nlohmann::ordered_json;

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EmitterBlock {
    double t1 = cavity_emitter().t1();
    double t2 = cavity_emitter().t2();
    double detuning = 0.0;  // rad/ns
    double cavity_q = 8900.0;
    double purcell_factor = 1.0;

    EmitterParams params() const { return {t1, t2, detuning, cavity_q, purcell_factor}; }
};

struct DriveBlock {
    double rabi_ghz = 0.83;
    std::string convention = "cyclic";  // or "angular"
    double sweep_max_ghz = 3.0;
    std::uint64_t sweep_points = 301;

    RabiConvention rabi_convention() const {
        return convention == "angular" ? RabiConvention::kAngular : RabiConvention::kCyclic;
    }
    double rabi() const { return rabi_from_ghz(rabi_ghz, rabi_convention()); }
};

struct GatingBlock {
    double charge_occupation = 1.0;
    double collection_efficiency = 0.01;
    std::optional<double> laser_leakage;  // counts/s per nW; solved from re_to_laser_ratio when absent
    double re_to_laser_ratio = 500.0;
    double rabi_per_sqrt_power = 1.0;  // rad/ns per sqrt(nW)
    double max_power_nw = 500.0;
    std::uint64_t points = 201;
};

struct BlinkingBlock {
    bool enabled = true;
    double amplitude = 0.1;
    double timescale = 50.0;  // ns
};

struct TimingBlock {
    double irf_fwhm = 0.1;  // ns
    double tau_max = 20.0;  // ns
    std::uint64_t half_points = 2000;
};

struct SpectralBlock {
    double instrument_fwhm = 0.78;  // ueV
    double laser_fwhm = 0.37;       // ueV
    double half_span = 40.0;        // ueV
    std::uint64_t points = 4096;
};

struct HomBlock {
    double delay = 10.4;  // ns
    double splitter_ratio = 0.5;
    std::vector<double> ratios{1.0, 0.3};
    double target_peak_visibility = 0.89;
    std::optional<double> irf_fwhm;  // ns; solved for the target when absent
    double tau_max = 25.0;
    std::uint64_t half_points = 1250;
};

struct PulseTrainBlock {
    double area_pi = 0.71;
    double fwhm = 0.057;  // ns
    double separation = 2.36;
    double pair_period = 13.1;
    std::uint64_t pairs = 100000;
    std::string shape = "gaussian";  // or "square"
    double bin_width = 0.05;         // ns, HBT histogram
    std::int64_t max_pair_lag = 3;
    double rabi_max_pi = 4.0;
    std::uint64_t rabi_points = 81;
    std::uint64_t rabi_mc_pulses = 0;  // 0: deterministic curve only

    PulseTrain train() const {
        PulseTrain t;
        t.pulse_area = area_pi * std::numbers::pi;
        t.pulse_fwhm = fwhm;
        t.separation = separation;
        t.pair_period = pair_period;
        t.n_pairs = pairs;
        t.shape = shape == "square" ? PulseShape::kSquare : PulseShape::kGaussian;
        return t;
    }
};

struct SourceModelBlock {
    double overlap = 0.90;
    double multiphoton_g = 0.167;
};

struct CircuitBlock {
    std::optional<double> r1;  // both solved from target_single_visibility when absent
    std::optional<double> r2;
    double target_single_visibility = 0.98;
    std::uint64_t phi_points = 181;
    double phi_span_pi = 2.0;
};

struct Scenario {
    EmitterBlock emitter;
    DriveBlock drive;
    GatingBlock gating;
    BlinkingBlock blinking;
    TimingBlock timing;
    SpectralBlock spectral;
    HomBlock hom;
    PulseTrainBlock pulse_train;
    SourceModelBlock source_model;
    CircuitBlock circuit;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    /// Domain checks beyond the schema; throws SchemaError.
    void validate() const;
};

namespace detail {

class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw SchemaError(path_ + ": expected an object");
    }

    void get(const char* key, double& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number()) fail(key, "a number");
            out = v->get<double>();
        }
    }
    void get(const char* key, std::optional<double>& out) {
        if (const Json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            if (!v->is_number()) fail(key, "a number or null");
            out = v->get<double>();
        }
    }
    void get(const char* key, std::uint64_t& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void get(const char* key, std::int64_t& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number_integer()) fail(key, "an integer");
            out = v->get<std::int64_t>();
        }
    }
    void get(const char* key, bool& out) {
        if (const Json* v = find(key)) {
            if (!v->is_boolean()) fail(key, "a boolean");
            out = v->get<bool>();
        }
    }
    void get(const char* key, std::string& out, std::initializer_list<const char*> allowed = {}) {
        if (const Json* v = find(key)) {
            if (!v->is_string()) fail(key, "a string");
            out = v->get<std::string>();
            if (allowed.size() == 0) return;
            std::string options;
            for (const char* a : allowed) {
                if (out == a) return;
                options += std::string(options.empty() ? "" : ", ") + a;
            }
            fail(key, "one of {" + options + "}");
        }
    }
    void get(const char* key, std::vector<double>& out) {
        if (const Json* v = find(key)) {
            if (!v->is_array()) fail(key, "an array of numbers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) fail(key, "an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }
    template <class Fn>
    void block(const char* key, Fn&& fn) {
        if (const Json* v = find(key)) {
            ObjectReader sub(*v, path_ + "." + key);
            fn(sub);
            sub.finish();
        }
    }

    /// Rejects any key that was never asked for.
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw SchemaError(path_ + ": unknown key \"" + k + "\"");
    }

private:
    const Json* find(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    [[noreturn]] void fail(const char* key, const std::string& what) const {
        throw SchemaError(path_ + "." + key + ": expected " + what);
    }

    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace detail

inline void Scenario::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw SchemaError(what);
    };
    try {
        (void)emitter.params();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("emitter: ") + e.what());
    }
    require(drive.rabi_ghz >= 0.0, "drive.rabi_ghz: must be >= 0");
    require(drive.sweep_max_ghz > 0.0 && drive.sweep_points >= 2, "drive: sweep needs max > 0 and >= 2 points");
    require(gating.charge_occupation >= 0.0 && gating.charge_occupation <= 1.0,
            "gating.charge_occupation: must lie in [0, 1]");
    require(gating.collection_efficiency >= 0.0, "gating.collection_efficiency: must be >= 0");
    require(!gating.laser_leakage || *gating.laser_leakage >= 0.0, "gating.laser_leakage: must be >= 0");
    require(gating.re_to_laser_ratio > 0.0, "gating.re_to_laser_ratio: must be > 0");
    require(gating.rabi_per_sqrt_power > 0.0, "gating.rabi_per_sqrt_power: must be > 0");
    require(gating.max_power_nw > 0.0 && gating.points >= 2, "gating: need max_power_nw > 0 and >= 2 points");
    require(blinking.amplitude >= 0.0 && blinking.timescale > 0.0, "blinking: amplitude >= 0, timescale > 0");
    require(timing.irf_fwhm >= 0.0, "timing.irf_fwhm: must be >= 0");
    require(timing.tau_max > 0.0 && timing.half_points >= 1, "timing: tau_max > 0 and half_points >= 1");
    require(spectral.instrument_fwhm >= 0.0 && spectral.laser_fwhm >= 0.0, "spectral: widths must be >= 0");
    require(spectral.half_span > 0.0 && spectral.points >= 16 && spectral.points % 2 == 0,
            "spectral: half_span > 0 and an even number of points >= 16");
    require(hom.delay > 0.0, "hom.delay: must be > 0");
    require(hom.splitter_ratio > 0.0 && hom.splitter_ratio < 1.0, "hom.splitter_ratio: must lie in (0, 1)");
    require(!hom.ratios.empty(), "hom.ratios: need at least one ratio");
    for (double r : hom.ratios) require(r > 0.0 && r <= 1.0, "hom.ratios: each ratio must lie in (0, 1]");
    require(hom.target_peak_visibility > 0.0 && hom.target_peak_visibility <= 1.0,
            "hom.target_peak_visibility: must lie in (0, 1]");
    require(!hom.irf_fwhm || *hom.irf_fwhm >= 0.0, "hom.irf_fwhm: must be >= 0");
    require(hom.tau_max >= 2.0 * hom.delay, "hom.tau_max: must be at least twice the delay");
    require(hom.half_points >= 1, "hom.half_points: must be >= 1");
    try {
        pulse_train.train().validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("pulse_train: ") + e.what());
    }
    require(pulse_train.bin_width > 0.0, "pulse_train.bin_width: must be > 0");
    require(pulse_train.max_pair_lag >= 2, "pulse_train.max_pair_lag: must be >= 2");
    require(pulse_train.rabi_max_pi > 0.0 && pulse_train.rabi_points >= 2,
            "pulse_train: rabi_max_pi > 0 and rabi_points >= 2");
    require(source_model.overlap >= 0.0 && source_model.overlap <= 1.0, "source_model.overlap: must lie in [0, 1]");
    require(source_model.multiphoton_g >= 0.0, "source_model.multiphoton_g: must be >= 0");
    for (const auto& r : {circuit.r1, circuit.r2})
        require(!r || (*r > 0.0 && *r < 1.0), "circuit.r1/r2: must lie in (0, 1)");
    require(circuit.target_single_visibility > 0.0 && circuit.target_single_visibility <= 1.0,
            "circuit.target_single_visibility: must lie in (0, 1]");
    require(circuit.phi_span_pi >= 2.0, "circuit.phi_span_pi: the phase grid must cover at least 2 pi");
    require(static_cast<double>(circuit.phi_points) >= 8.0 * circuit.phi_span_pi + 1.0,
            "circuit.phi_points: need at least 8 points per coincidence period");
    require(!output_dir.empty(), "output_dir: must not be empty");
}

/// Parse a scenario object; missing fields keep their defaults.
inline Scenario scenario_from_json(const Json& j) {
    Scenario s;
    detail::ObjectReader root(j, "scenario");
    root.block("emitter", [&](auto& r) {
        r.get("t1", s.emitter.t1);
        r.get("t2", s.emitter.t2);
        r.get("detuning", s.emitter.detuning);
        r.get("cavity_q", s.emitter.cavity_q);
        r.get("purcell_factor", s.emitter.purcell_factor);
    });
    root.block("drive", [&](auto& r) {
        r.get("rabi_ghz", s.drive.rabi_ghz);
        r.get("convention", s.drive.convention, {"cyclic", "angular"});
        r.get("sweep_max_ghz", s.drive.sweep_max_ghz);
        r.get("sweep_points", s.drive.sweep_points);
    });
    root.block("gating", [&](auto& r) {
        r.get("charge_occupation", s.gating.charge_occupation);
        r.get("collection_efficiency", s.gating.collection_efficiency);
        r.get("laser_leakage", s.gating.laser_leakage);
        r.get("re_to_laser_ratio", s.gating.re_to_laser_ratio);
        r.get("rabi_per_sqrt_power", s.gating.rabi_per_sqrt_power);
        r.get("max_power_nw", s.gating.max_power_nw);
        r.get("points", s.gating.points);
    });
    root.block("blinking", [&](auto& r) {
        r.get("enabled", s.blinking.enabled);
        r.get("amplitude", s.blinking.amplitude);
        r.get("timescale", s.blinking.timescale);
    });
    root.block("timing", [&](auto& r) {
        r.get("irf_fwhm", s.timing.irf_fwhm);
        r.get("tau_max", s.timing.tau_max);
        r.get("half_points", s.timing.half_points);
    });
    root.block("spectral", [&](auto& r) {
        r.get("instrument_fwhm", s.spectral.instrument_fwhm);
        r.get("laser_fwhm", s.spectral.laser_fwhm);
        r.get("half_span", s.spectral.half_span);
        r.get("points", s.spectral.points);
    });
    root.block("hom", [&](auto& r) {
        r.get("delay", s.hom.delay);
        r.get("splitter_ratio", s.hom.splitter_ratio);
        r.get("ratios", s.hom.ratios);
        r.get("target_peak_visibility", s.hom.target_peak_visibility);
        r.get("irf_fwhm", s.hom.irf_fwhm);
        r.get("tau_max", s.hom.tau_max);
        r.get("half_points", s.hom.half_points);
    });
    root.block("pulse_train", [&](auto& r) {
        r.get("area_pi", s.pulse_train.area_pi);
        r.get("fwhm", s.pulse_train.fwhm);
        r.get("separation", s.pulse_train.separation);
        r.get("pair_period", s.pulse_train.pair_period);
        r.get("pairs", s.pulse_train.pairs);
        r.get("shape", s.pulse_train.shape, {"gaussian", "square"});
        r.get("bin_width", s.pulse_train.bin_width);
        r.get("max_pair_lag", s.pulse_train.max_pair_lag);
        r.get("rabi_max_pi", s.pulse_train.rabi_max_pi);
        r.get("rabi_points", s.pulse_train.rabi_points);
        r.get("rabi_mc_pulses", s.pulse_train.rabi_mc_pulses);
    });
    root.block("source_model", [&](auto& r) {
        r.get("overlap", s.source_model.overlap);
        r.get("multiphoton_g", s.source_model.multiphoton_g);
    });
    root.block("circuit", [&](auto& r) {
        r.get("r1", s.circuit.r1);
        r.get("r2", s.circuit.r2);
        r.get("target_single_visibility", s.circuit.target_single_visibility);
        r.get("phi_points", s.circuit.phi_points);
        r.get("phi_span_pi", s.circuit.phi_span_pi);
    });
    root.get("seed", s.seed);
    root.get("output_dir", s.output_dir);
    root.finish();
    s.validate();
    return s;
}

inline Json to_json(const Scenario& s) {
    using detail::optional_json;
    Json j;
    j["emitter"] = {{"t1", s.emitter.t1},
                    {"t2", s.emitter.t2},
                    {"detuning", s.emitter.detuning},
                    {"cavity_q", s.emitter.cavity_q},
                    {"purcell_factor", s.emitter.purcell_factor}};
    j["drive"] = {{"rabi_ghz", s.drive.rabi_ghz},
                  {"convention", s.drive.convention},
                  {"sweep_max_ghz", s.drive.sweep_max_ghz},
                  {"sweep_points", s.drive.sweep_points}};
    j["gating"] = {{"charge_occupation", s.gating.charge_occupation},
                   {"collection_efficiency", s.gating.collection_efficiency},
                   {"laser_leakage", optional_json(s.gating.laser_leakage)},
                   {"re_to_laser_ratio", s.gating.re_to_laser_ratio},
                   {"rabi_per_sqrt_power", s.gating.rabi_per_sqrt_power},
                   {"max_power_nw", s.gating.max_power_nw},
                   {"points", s.gating.points}};
    j["blinking"] = {{"enabled", s.blinking.enabled},
                     {"amplitude", s.blinking.amplitude},
                     {"timescale", s.blinking.timescale}};
    j["timing"] = {{"irf_fwhm", s.timing.irf_fwhm},
                   {"tau_max", s.timing.tau_max},
                   {"half_points", s.timing.half_points}};
    j["spectral"] = {{"instrument_fwhm", s.spectral.instrument_fwhm},
                     {"laser_fwhm", s.spectral.laser_fwhm},
                     {"half_span", s.spectral.half_span},
                     {"points", s.spectral.points}};
    j["hom"] = {{"delay", s.hom.delay},
                {"splitter_ratio", s.hom.splitter_ratio},
                {"ratios", s.hom.ratios},
                {"target_peak_visibility", s.hom.target_peak_visibility},
                {"irf_fwhm", optional_json(s.hom.irf_fwhm)},
                {"tau_max", s.hom.tau_max},
                {"half_points", s.hom.half_points}};
    j["pulse_train"] = {{"area_pi", s.pulse_train.area_pi},
                        {"fwhm", s.pulse_train.fwhm},
                        {"separation", s.pulse_train.separation},
                        {"pair_period", s.pulse_train.pair_period},
                        {"pairs", s.pulse_train.pairs},
                        {"shape", s.pulse_train.shape},
                        {"bin_width", s.pulse_train.bin_width},
                        {"max_pair_lag", s.pulse_train.max_pair_lag},
                        {"rabi_max_pi", s.pulse_train.rabi_max_pi},
                        {"rabi_points", s.pulse_train.rabi_points},
                        {"rabi_mc_pulses", s.pulse_train.rabi_mc_pulses}};
    j["source_model"] = {{"overlap", s.source_model.overlap}, {"multiphoton_g", s.source_model.multiphoton_g}};
    j["circuit"] = {{"r1", optional_json(s.circuit.r1)},
                    {"r2", optional_json(s.circuit.r2)},
                    {"target_single_visibility", s.circuit.target_single_visibility},
                    {"phi_points", s.circuit.phi_points},
                    {"phi_span_pi", s.circuit.phi_span_pi}};
    j["seed"] = s.seed;
    j["output_dir"] = s.output_dir;
    return j;
}

/// Load a scenario file. A manifest written by a previous run is accepted
/// too; its "scenario" member is used.
inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SchemaError("cannot open config file " + path);
    Json j;
    try {
        j = Json::parse(f);
    } catch (const Json::parse_error& e) {
        throw SchemaError(path + ": invalid JSON: " + e.what());
    }
    if (j.is_object() && j.contains("artifact_version") && j.contains("scenario")) return scenario_from_json(j["scenario"]);
    return scenario_from_json(j);
}

}  // namespace cohscat::cli
