#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>
#include <string>

#include "cohscat/cli/runner.hpp"

namespace cohscat::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("cohscat_test_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(COHSCAT_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Csv, TwelveSignificantDigits) {
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(format_number(-0.0), "0");
    EXPECT_EQ(format_number(1e-20), "1e-20");
    EXPECT_EQ(format_number(123456789012345.0), "1.23456789012e+14");
}

TEST(Csv, LineFeedOnly) {
    CsvTable t;
    t.header = {"a", "b"};
    t.add_row({1.0, std::string("x")});
    t.add_row({2.5, std::string("y")});
    EXPECT_EQ(t.str(), "a,b\n1,x\n2.5,y\n");
    EXPECT_THROW(t.add_row({1.0}), std::logic_error);
}

TEST(Scenario, DefaultsRoundTrip) {
    const Scenario s;
    const Json j = to_json(s);
    EXPECT_EQ(to_json(scenario_from_json(j)), j);
    EXPECT_EQ(to_json(scenario_from_json(Json::object())), j);
}

TEST(Scenario, PartialBlocksKeepDefaults) {
    const auto s = scenario_from_json(Json::parse(R"({"drive": {"rabi_ghz": 1.5}, "seed": 9})"));
    EXPECT_DOUBLE_EQ(s.drive.rabi_ghz, 1.5);
    EXPECT_EQ(s.drive.convention, "cyclic");
    EXPECT_EQ(s.seed, 9u);
    EXPECT_DOUBLE_EQ(s.hom.delay, 10.4);
}

TEST(Scenario, RejectsUnknownKeys) {
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"emiter": {}})")), SchemaError);
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"hom": {"delay": 10.4, "dleay": 3}})")), SchemaError);
    try {
        scenario_from_json(Json::parse(R"({"circuit": {"r3": 0.5}})"));
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("scenario.circuit"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("r3"), std::string::npos);
    }
}

TEST(Scenario, RejectsWrongTypesAndValues) {
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"seed": -1})")), SchemaError);
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"seed": 1.5})")), SchemaError);
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"drive": {"rabi_ghz": "fast"}})")), SchemaError);
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"drive": {"convention": "radians"}})")), SchemaError);
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"emitter": {"t1": 1.0, "t2": 2.5}})")), SchemaError);
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"hom": {"tau_max": 12}})")), SchemaError);
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"hom": {"ratios": [1.2]}})")), SchemaError);
    EXPECT_THROW(scenario_from_json(Json::parse(R"({"pulse_train": {"separation": 20}})")), SchemaError);
    EXPECT_THROW(scenario_from_json(Json::parse(R"([1, 2])")), SchemaError);
}

TEST(Scenario, NullableFields) {
    const auto s = scenario_from_json(Json::parse(R"({"circuit": {"r1": 0.5, "r2": null}})"));
    ASSERT_TRUE(s.circuit.r1.has_value());
    EXPECT_FALSE(s.circuit.r2.has_value());
}

TEST(ExitCodes, InputErrorsAreTwoNumericalAreThree) {
    EXPECT_EQ(exit_code_for(SchemaError("x")), 2);
    EXPECT_EQ(exit_code_for(std::invalid_argument("x")), 2);
    EXPECT_EQ(exit_code_for(FitError("x", 1.0)), 3);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), 3);
}

TEST(Figures, Fig2cColumnsAndCeiling) {
    Context ctx;
    const auto out = figure_fig2c(ctx);
    const std::vector<std::string> header{"rabi_ghz", "i_total_norm", "rrs_frac_ratio1.0", "rrs_frac_ratio0.3"};
    EXPECT_EQ(out.table.header, header);
    const auto col = out.table.column("rrs_frac_ratio0.3");
    EXPECT_NEAR(*std::max_element(col.begin(), col.end()), 0.30, 1e-12);
    const auto total = out.table.column("i_total_norm");
    EXPECT_EQ(total.front(), 0.0);
    EXPECT_LT(total.back(), 1.0);
}

TEST(Figures, IdealSingleFringesHaveUnitVisibility) {
    Context ctx;
    ctx.scenario.circuit.r1 = 0.5;
    ctx.scenario.circuit.r2 = 0.5;
    ctx.scenario.source_model = {1.0, 0.0};
    const auto out = figure_fig3d(ctx);
    EXPECT_NEAR(out.results["single_visibility"].get<double>(), 1.0, 1e-9);
    const std::vector<std::string> header{"phi_rad", "p_out0", "p_out1", "p_coincidence"};
    EXPECT_EQ(out.table.header, header);
}

TEST(Figures, IdealCoincidenceFringesDoubleFrequency) {
    Context ctx;
    ctx.scenario.circuit.r1 = 0.5;
    ctx.scenario.circuit.r2 = 0.5;
    ctx.scenario.source_model = {1.0, 0.0};
    const auto out = figure_fig3e(ctx);
    EXPECT_NEAR(out.results["frequency_ratio"].get<double>(), 2.0, 0.02);
}

TEST(Figures, DefaultCouplersReproduceSingleVisibility) {
    Context ctx;
    const auto out = figure_fig3d(ctx);
    EXPECT_NEAR(out.results["single_visibility"].get<double>(), 0.98, 0.005);
    EXPECT_GT(figure_fig3e(ctx).results["coincidence_min"].get<double>(), 0.0);
}

TEST(Figures, Fig2eRecordsIrf) {
    Context ctx;
    ctx.scenario.hom.half_points = 1040;
    const auto out = figure_fig2e(ctx);
    EXPECT_GT(out.results["irf_fwhm_ns"].get<double>(), 0.0);
    EXPECT_NEAR(out.results["peak_visibility_measured"].get<double>(), 0.89, 0.02);
    const auto j = manifest(ctx, "figure fig2e", {out});
    EXPECT_TRUE(j["results"]["fig2e"].contains("irf_fwhm_ns"));
    EXPECT_EQ(j["scenario"], to_json(ctx.scenario));
}

TEST(Figures, SvgIsProduced) {
    Context ctx;
    const auto svg = render_svg(figure_fig2c(ctx).plot);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("polyline"), std::string::npos);
}

TEST(Sim, SteadyReportsBothConventions) {
    Context ctx;
    const auto out = sim_steady(ctx);
    ASSERT_EQ(out.table.rows.size(), 2u);
    EXPECT_EQ(std::get<std::string>(out.table.rows[0][0]), "cyclic");
    EXPECT_EQ(std::get<std::string>(out.table.rows[1][0]), "angular");
    const auto rabi = out.table.column("rabi_rad_per_ns");
    EXPECT_NEAR(rabi[0] / rabi[1], 2.0 * std::numbers::pi, 1e-12);
}

TEST(Binary, StreamIsByteIdentical) {
    const auto dir = scratch("stream");
    ASSERT_EQ(run_cli("sim stream --pairs 100000 --seed 7 --threads 1 --out " + (dir / "a").string(), dir / "a.log"), 0);
    ASSERT_EQ(run_cli("sim stream --pairs 100000 --seed 7 --threads 1 --out " + (dir / "b").string(), dir / "b.log"), 0);
    ASSERT_EQ(run_cli("sim stream --pairs 100000 --seed 7 --threads 3 --out " + (dir / "c").string(), dir / "c.log"), 0);
    const auto a = slurp(dir / "a" / "stream.csv");
    EXPECT_EQ(a.rfind("pair_index,pulse_index,time_ns\n", 0), 0u);
    EXPECT_EQ(a.find('\r'), std::string::npos);
    EXPECT_EQ(a, slurp(dir / "b" / "stream.csv"));
    EXPECT_EQ(a, slurp(dir / "c" / "stream.csv"));
    EXPECT_TRUE(fs::exists(dir / "a" / "stream.json"));
    EXPECT_TRUE(fs::exists(dir / "a" / "manifest.json"));
}

TEST(Binary, ManifestReplayReproducesOutputs) {
    const auto dir = scratch("replay");
    ASSERT_EQ(run_cli("figure fig2c --seed 5 --out " + (dir / "first").string(), dir / "1.log"), 0);
    ASSERT_EQ(run_cli("figure fig2c --config " + (dir / "first" / "manifest.json").string() + " --out " +
                          (dir / "second").string(),
                      dir / "2.log"),
              0);
    EXPECT_EQ(slurp(dir / "first" / "fig2c.csv"), slurp(dir / "second" / "fig2c.csv"));
    const auto m = Json::parse(slurp(dir / "second" / "manifest.json"));
    EXPECT_EQ(m["scenario"]["seed"], 5);
    EXPECT_EQ(m["artifact_version"], kArtifactVersion);
}

TEST(Binary, G2Plumbing) {
    const auto dir = scratch("g2");
    ASSERT_EQ(run_cli("sim g2 --tau-max 10 --points 200 --out " + dir.string(), dir / "log"), 0);
    const auto csv = slurp(dir / "g2.csv");
    EXPECT_EQ(csv.rfind("tau_ns,g2\n-10,", 0), 0u);
}

TEST(Binary, ExitCodes) {
    const auto dir = scratch("exit");
    EXPECT_EQ(run_cli("sim g2 --no-such-flag 3", dir / "a.log"), 2);
    EXPECT_NE(slurp(dir / "a.log").find("Usage"), std::string::npos);
    EXPECT_EQ(run_cli("figure fig9z", dir / "b.log"), 2);
    std::ofstream(dir / "bad.json") << R"({"emitter": {"t1": 1, "tau": 2}})";
    EXPECT_EQ(run_cli("sim g2 --config " + (dir / "bad.json").string(), dir / "c.log"), 2);
    EXPECT_NE(slurp(dir / "c.log").find("unknown key"), std::string::npos);
    EXPECT_EQ(run_cli("sim noon --r1 1.5", dir / "d.log"), 2);
    EXPECT_EQ(run_cli("sim steady --out " + (dir / "ok").string(), dir / "e.log"), 0);
    EXPECT_NE(slurp(dir / "e.log").find("angular"), std::string::npos);
}

}  // namespace
}  // namespace cohscat::cli
