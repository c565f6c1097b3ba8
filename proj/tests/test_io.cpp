#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "mw/io.hpp"

using namespace mw;

TEST(Digest, Fnv1aVectors) {
    EXPECT_EQ(digest(""), "cbf29ce484222325");
    EXPECT_EQ(digest("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(digest("foobar"), "85944171f73967e8");
}

TEST(Report, SchemaAndDigest) {
    nlohmann::json in{{"T", 0.1}, {"k", 1.6e7}};
    auto r = make_report("phase mz", in, {{"phase", 1.0}});
    EXPECT_EQ(r["schema_version"], 1);
    EXPECT_EQ(r["command"], "phase mz");
    EXPECT_EQ(r["inputs_digest"], digest(in.dump()));
    EXPECT_EQ(r["results"]["phase"], 1.0);
    in["T"] = 0.2;
    EXPECT_NE(make_report("phase mz", in, {})["inputs_digest"], r["inputs_digest"]);
}

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(fmt(0.1), "0.1");
    EXPECT_EQ(fmt(-2.5e-9), "-2.5e-09");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-300, 300);
    for (int i = 0; i < 10000; ++i) {
        const double x = std::pow(10.0, u(rng)) * (i % 2 ? 1 : -1);
        EXPECT_EQ(std::strtod(fmt(x).c_str(), nullptr), x);
    }
}

TEST(Csv, RoundTripWithQuoting) {
    CsvTable t;
    t.header = {"name", "value", "note"};
    t.rows = {{"a", "1.5", "plain"},
              {"b,c", "-2e-3", "has \"quotes\""},
              {"multi", "3", "line one\nline two"},
              {"", "4", ""}};
    const std::string text = to_csv(t);
    EXPECT_EQ(text.substr(0, 16), "name,value,note\r");
    auto back = parse_csv(text);
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
    EXPECT_EQ(back.numeric("value"), (std::vector<double>{1.5, -2e-3, 3, 4}));
}

TEST(Csv, ParsingRules) {
    auto t = parse_csv("t,value\n0,1\r\n\n1,2\n");
    EXPECT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.numeric("t"), (std::vector<double>{0, 1}));
    EXPECT_THROW(t.numeric("missing"), std::invalid_argument);
    EXPECT_THROW(parse_csv(""), std::invalid_argument);
    EXPECT_THROW(parse_csv("a\n\"open"), std::invalid_argument);
    EXPECT_THROW(parse_csv("a\n1.5x\n").numeric("a"), std::invalid_argument);
    EXPECT_THROW(parse_csv("a,b\n1\n").numeric("b"), std::invalid_argument);
    EXPECT_EQ(split_csv_line("x,\"y,z\",w"), (std::vector<std::string>{"x", "y,z", "w"}));
}

TEST(Plot, DeterministicAndWellFormed) {
    PlotSeries s{"RAV <data>", {1, 10, 100, 1000}, {1e-8, 3e-9, 1e-9, 3e-10}};
    PlotStyle st{"Allan & guide", "tau [s]", "RAV", true, true};
    const auto a = emit_plot({s}, st), b = emit_plot({s}, st);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.rfind("<svg", 0), 0u);
    EXPECT_NE(a.find("</svg>"), std::string::npos);
    EXPECT_NE(a.find("&lt;data&gt;"), std::string::npos);
    EXPECT_NE(a.find("Allan &amp; guide"), std::string::npos);
    EXPECT_EQ(a.find("<data>"), std::string::npos);
    EXPECT_EQ(a.find("nan"), std::string::npos);
    // four markers, one polyline
    std::size_t n = 0;
    for (auto p = a.find("<circle"); p != std::string::npos; p = a.find("<circle", p + 1)) ++n;
    EXPECT_EQ(n, 4u);
}

TEST(Plot, EdgeCases) {
    PlotStyle st;
    const auto one = emit_plot({{"pt", {2.0}, {3.0}}}, st);
    EXPECT_NE(one.find("<circle"), std::string::npos);
    EXPECT_THROW(emit_plot({}, st), EmptySeries);
    EXPECT_THROW(emit_plot({{"e", {}, {}}}, st), EmptySeries);
    PlotStyle lg;
    lg.logy = true;
    EXPECT_THROW(emit_plot({{"neg", {1, 2}, {-1, 0}}}, lg), EmptySeries);
    EXPECT_THROW(emit_plot({{"bad", {1, 2}, {1}}}, st), std::invalid_argument);
    const auto withnan = emit_plot({{"n", {1, 2, 3}, {1, NAN, 2}}}, st);
    EXPECT_EQ(withnan.find("nan"), std::string::npos);
}

TEST(Output, DirectoryAndWrite) {
    const auto dir = std::filesystem::temp_directory_path() / "mw_io_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    const auto p = output_dir(dir.string());
    EXPECT_TRUE(std::filesystem::is_directory(p));
    write_text(p / "x.txt", "hello\n");
    EXPECT_EQ(read_text((p / "x.txt").string()), "hello\n");
    EXPECT_THROW(read_text((p / "missing.txt").string()), std::runtime_error);
    std::filesystem::remove_all(dir.parent_path());
}
