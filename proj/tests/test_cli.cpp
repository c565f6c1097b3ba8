#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include "mw/cclock.hpp"
#include "mw/io.hpp"

using namespace mw;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

fs::path scratch() {
    static const fs::path d = [] {
        auto p = fs::temp_directory_path() / ("mw_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return d;
}

Run run(const std::string& args, const std::string& env = "") {
    const auto o = scratch() / "stdout.txt", e = scratch() / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(MWTOOL_PATH) + " " + args + " >" +
                            o.string() + " 2>" + e.string();
    const int st = std::system(cmd.c_str());
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, read_text(o.string()), read_text(e.string())};
}

nlohmann::json run_json(const std::string& args) {
    auto r = run(args);
    EXPECT_EQ(r.code, 0) << args << "\n" << r.err;
    return nlohmann::json::parse(r.out);
}

void check_schema(const nlohmann::json& j, const std::string& command) {
    EXPECT_EQ(j.at("schema_version"), 1);
    EXPECT_EQ(j.at("command"), command);
    EXPECT_EQ(j.at("inputs_digest").get<std::string>().size(), 16u);
    EXPECT_TRUE(j.at("results").is_object());
}

}  // namespace

TEST(Cli, HelpAndUsage) {
    auto h = run("--help");
    EXPECT_EQ(h.code, 0);
    EXPECT_NE(h.out.find("Subcommands"), std::string::npos);
    EXPECT_EQ(run("clock --help").code, 0);
    auto none = run("");
    EXPECT_EQ(none.code, 2);
    EXPECT_NE(none.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run("clock solve --bogus 1").code, 2);
    EXPECT_EQ(run("clock solve --n 0").code, 2);
}

TEST(Cli, ExitCodes) {
    auto v = run("clock solve --N 1/0");
    EXPECT_EQ(v.code, 2);
    EXPECT_NE(v.err.find("validation"), std::string::npos);
    EXPECT_EQ(run("clock solve --species unobtainium").code, 2);
    EXPECT_EQ(run("phase ab --scenario nowhere").code, 2);
    EXPECT_EQ(run("budget --file " + (scratch() / "missing.json").string()).code, 1);
}

TEST(Cli, ClockTableMatchesSolver) {
    auto r = run("clock table --species electron");
    ASSERT_EQ(r.code, 0);
    auto t = parse_csv(r.out);
    ASSERT_EQ(t.rows.size(), 3u);
    const auto beta = t.numeric("beta"), bp = t.numeric("beta_prime"), wm = t.numeric("omega_m/omega_C"),
               wl = t.numeric("omega_L/omega_C");
    const std::vector<std::pair<int, Rational>> cfgs{{2, Rational(1, 2)}, {1, Rational(1, 2)}, {1, Rational(1000)}};
    for (std::size_t i = 0; i < 3; ++i) {
        auto s = solve_lock({cfgs[i].first, cfgs[i].second, 1.0, 0.0});
        EXPECT_NEAR(beta[i], s.beta, 1e-15);
        EXPECT_NEAR(bp[i], s.beta_prime, 1e-15);
        EXPECT_NEAR(wm[i], s.omega_m, 1e-15);
        EXPECT_NEAR(wl[i], s.omega_L, 1e-15);
    }
    EXPECT_NEAR(std::round(beta[0] * 1000) / 1000, 0.707, 1e-12);
    EXPECT_NEAR(std::round(bp[0] * 1000) / 1000, 0.943, 1e-12);
}

TEST(Cli, AlphaReport) {
    auto j = run_json("alpha --species Cs133");
    check_schema(j, "alpha");
    EXPECT_NEAR(j["results"]["alpha"].get<double>() / 7.297352589e-3, 1.0, 2e-9);
    EXPECT_GT(j["results"]["sigma"].get<double>(), 0.0);
}

TEST(Cli, ReportsAreDeterministic) {
    for (const char* a : {"kernel dirac --samples 40 --seed 3", "budget --file present", "noise integrate --model low",
                          "kernel bragg", "sme fit-global"}) {
        auto x = run(a), y = run(a);
        EXPECT_EQ(x.code, 0) << a << x.err;
        EXPECT_EQ(x.out, y.out) << a;
    }
    EXPECT_NE(run("kernel dirac --samples 40 --seed 3").out, run("kernel dirac --samples 40 --seed 4").out);
}

TEST(Cli, ShippedScenarios) {
    auto b = run_json("budget --file present");
    check_schema(b, "budget");
    EXPECT_NEAR(b["results"]["total_uncertainty"].get<double>(), 132.6094265276809, 1e-9);
    EXPECT_EQ(b["results"]["units"], "ppt");
    auto n = run_json("noise integrate --model low --scenario present");
    EXPECT_NEAR(n["results"]["rms_phase_rad"].get<double>() / 0.39, 1.0, 0.15);
    auto p = run_json("kernel propagate");
    EXPECT_LT(p["results"]["max_pointwise_difference"].get<double>(), 1e-3);
}

TEST(Cli, OutputDirectoryAndEnvironment) {
    const auto d = scratch() / "out_flag";
    fs::remove_all(d);
    auto r = run("--out " + d.string() + " budget --file future");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(read_text((d / "budget.json").string()), r.out);

    const auto e = scratch() / "out_env";
    fs::remove_all(e);
    auto c = run("clock table", "MW_OUTPUT_DIR=" + e.string());
    ASSERT_EQ(c.code, 0);
    EXPECT_EQ(read_text((e / "clock_table.csv").string()), c.out);
}

TEST(Cli, AllanCsvAndPlot) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0, 1e-9);
    CsvTable in;
    in.header = {"t", "value"};
    for (int i = 0; i < 4096; ++i) in.rows.push_back({fmt(0.5 * i), fmt(n(rng))});
    const auto csv = scratch() / "series.csv";
    write_text(csv, to_csv(in));
    const auto d = scratch() / "allan_out";
    fs::remove_all(d);
    auto r = run("--out " + d.string() + " allan --input " + csv.string() + " --plot rav.svg");
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = parse_csv(r.out);
    const auto tau = t.numeric("tau"), rav = t.numeric("rav");
    ASSERT_GE(tau.size(), 8u);
    EXPECT_EQ(tau[0], 0.5);
    EXPECT_NEAR(rav[0] / 1e-9, 1.0, 0.05);
    const auto svg = read_text((d / "rav.svg").string());
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("polyline"), std::string::npos);
    EXPECT_EQ(run("allan --input " + csv.string() + " --column nope").code, 2);

    write_text(scratch() / "uneven.csv", "t,value\n0,1\n1,2\n3,1\n4,2\n");
    EXPECT_EQ(run("allan --input " + (scratch() / "uneven.csv").string()).code, 2);
}

TEST(Cli, SmeFits) {
    auto g = run_json("sme fit-global");
    check_schema(g, "sme fit-global");
    const auto ref = load_json_file(data_path("eep_limits_reference.json"));
    for (std::size_t i = 0; i < 5; ++i)
        EXPECT_NEAR(g["results"]["estimates"][i].get<double>(), ref["constraints"][i]["value"].get<double>(), 1e-18);

    nlohmann::json bad{{"constraints",
                        {{{"row", {1, 0, 0, 0, 0}}, {"value", 0.0}, {"sigma", 1.0}},
                         {{"row", {0, 1, 0, 0, 0}}, {"value", 0.0}, {"sigma", 1.0}}}}};
    write_text(scratch() / "bad.json", bad.dump());
    auto r = run("sme fit-global --constraints " + (scratch() / "bad.json").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("null_space"), std::string::npos);

    // flat series: every sigma estimate is zero
    CsvTable s;
    s.header = {"t", "value", "sigma"};
    for (int i = 0; i < 300; ++i) s.rows.push_back({fmt(1.1e5 * i), "0", "1e-9"});
    write_text(scratch() / "iso.csv", to_csv(s));
    auto f = run_json("sme fit-isotropy --input " + (scratch() / "iso.csv").string() + " --chi 0.9");
    check_schema(f, "sme fit-isotropy");
    for (auto& [k, v] : f["results"]["estimates"].items()) EXPECT_EQ(v.get<double>(), 0.0) << k;
}
