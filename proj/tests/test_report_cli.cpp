#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "thermoform/report.hpp"

namespace tf = thermoform;
namespace rp = thermoform::report;
namespace fs = std::filesystem;
using rp::Json;
using tf::Rational;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + THERMOFORM_CLI + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("thermoform_test_" + name);
  std::ofstream(p) << text;
  return p;
}

const char* kNotmixFile = R"({
  "dimension": 2,
  "symbols": 2,
  "matrices": [[["0", "2"], ["1", "0"]], [0, 1, 2, 0]],
  "label": "notmix2 from file"
})";

}  // namespace

TEST(TupleFile, ParsesNestedAndFlatLayouts) {
  const auto t = tf::parse_tuple_text(kNotmixFile);
  ASSERT_TRUE(std::holds_alternative<tf::MatrixTuple<Rational>>(t));
  const auto& q = std::get<tf::MatrixTuple<Rational>>(t);
  EXPECT_EQ(q.label(), "notmix2 from file");
  EXPECT_EQ(q[0], tf::builtins::notmix2()[0]);
  EXPECT_EQ(q[1], tf::builtins::notmix2()[1]);
  EXPECT_EQ(tf::tuple_digest(q), tf::tuple_digest(tf::builtins::notmix2()));
}

TEST(TupleFile, RationalStrings) {
  const auto t = tf::parse_tuple_text(R"({"dimension": 1, "matrices": [["3/5"], ["-4/10"]]})");
  const auto& q = std::get<tf::MatrixTuple<Rational>>(t);
  EXPECT_EQ(q[0](0, 0), Rational(3, 5));
  EXPECT_EQ(q[1](0, 0), Rational(-2, 5));
}

TEST(TupleFile, DecimalsForceDoublePolicy) {
  const auto t = tf::parse_tuple_text(R"({"dimension": 1, "matrices": [[0.5], ["1/3"]]})");
  ASSERT_TRUE(std::holds_alternative<tf::MatrixTuple<double>>(t));
  EXPECT_DOUBLE_EQ(std::get<tf::MatrixTuple<double>>(t)[1](0, 0), 1.0 / 3);
  // explicit exact policy reads decimal strings exactly
  const auto e = tf::parse_tuple_text(R"({"dimension": 1, "scalar_policy": "exact-rational", "matrices": [["0.1"], [2]]})");
  EXPECT_EQ(std::get<tf::MatrixTuple<Rational>>(e)[0](0, 0), Rational(1, 10));
  EXPECT_THROW(tf::parse_tuple_text(R"({"dimension": 1, "scalar_policy": "exact-rational", "matrices": [[0.1], [2]]})"),
               tf::InvalidInput);
  const auto d = tf::parse_tuple_text(R"({"dimension": 1, "scalar_policy": "double-precision", "matrices": [[1], [2]]})");
  EXPECT_TRUE(std::holds_alternative<tf::MatrixTuple<double>>(d));
}

TEST(TupleFile, Errors) {
  try {
    tf::parse_tuple_text("{\n  \"dimension\": 2,\n  \"matrices\": [1 2]\n}");
    FAIL() << "expected ParseError";
  } catch (const tf::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 18u);
  }
  EXPECT_THROW(tf::parse_tuple_text(R"({"dimension": 2, "matrices": [[[1,0],[0]], [[1,0],[0,1]]]})"), tf::InvalidInput);
  EXPECT_THROW(tf::parse_tuple_text(R"({"dimension": 1, "matrices": [["1/0"], ["1"]]})"), tf::InvalidInput);
  EXPECT_THROW(tf::parse_tuple_text(R"({"dimension": 1, "matrices": [["1"]]})"), tf::InvalidInput);
  EXPECT_THROW(tf::parse_tuple_text(R"({"dimension": 1, "symbols": 3, "matrices": [["1"], ["2"]]})"), tf::InvalidInput);
  EXPECT_THROW(tf::parse_tuple_text(R"({"matrices": [["1"], ["2"]]})"), tf::InvalidInput);
  EXPECT_THROW(tf::parse_tuple_text(R"({"dimension": 1, "matrices": [[true], ["2"]]})"), tf::InvalidInput);
}

TEST(TupleFile, RoundTripThroughJson) {
  const auto t = tf::builtins::alpha(Rational(3, 5), Rational(4, 5));
  const auto back = tf::parse_tuple_text(tf::tuple_to_json(t).dump());
  EXPECT_EQ(tf::tuple_digest(std::get<tf::MatrixTuple<Rational>>(back)), tf::tuple_digest(t));
  EXPECT_NE(tf::tuple_digest(t), tf::tuple_digest(tf::to_double(t)));
}

TEST(Csv, QuotesAndLineEndings) {
  tf::CsvTable c({"a", "b"});
  c.add({"1,2", "say \"hi\""});
  c.add({"x", "y"});
  EXPECT_EQ(c.str(), "a,b\n\"1,2\",\"say \"\"hi\"\"\"\nx,y\n");
  EXPECT_THROW(c.add({"only one"}), tf::Error);
}

TEST(Fnv, KnownVector) {
  EXPECT_EQ(tf::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(tf::fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("pressure --builtin notmix2 --s 2 --N 6").code, 0);
  EXPECT_EQ(cli("pressure --builtin notmix2 --s 0").code, 2);
  EXPECT_EQ(cli("pressure --builtin nosuch").code, 2);
  EXPECT_EQ(cli("pressure").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  const auto bad = temp_file("nonsquare.json", R"({"dimension": 2, "matrices": [[[1,0],[0]], [[1,0],[0,1]]]})");
  EXPECT_EQ(cli("inspect --input " + bad.string()).code, 2);
  EXPECT_EQ(cli("kusuoka --builtin diagpair").code, 3);
  EXPECT_EQ(cli("pressure --builtin notmix2 --N 10", "THERMOFORM_BUDGET_CAP=100").code, 4);
  EXPECT_EQ(cli("classify --builtin diagpair").code, 0);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, InspectExamples) {
  const auto nm = Json::parse(cli("inspect --builtin notmix2").out);
  EXPECT_EQ(nm["results"]["irreducibility"]["verdict"], "NoWitnessFound");
  const auto nil = Json::parse(cli("inspect --builtin nilpotent2").out);
  EXPECT_EQ(nil["results"]["irreducibility"]["verdict"], "NoWitnessFound");
  EXPECT_EQ(nil["results"]["support"]["length"], 2);
}

TEST(Cli, PressureAndRadiusExamples) {
  const auto p = Json::parse(cli("pressure --builtin notmix2 --s 2 --N 6").out);
  EXPECT_EQ(p["results"]["status"], "exact (even s)");
  EXPECT_NEAR(p["results"]["exact"].get<double>(), std::log(5.0), 1e-12);
  const auto r = Json::parse(cli("radius --builtin notmix2 --p inf --N 4").out);
  EXPECT_NEAR(r["results"]["lower"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(r["results"]["upper"].get<double>(), 2.0, 1e-12);
  const auto csv = cli("pressure --builtin notmix2 --s 2 --N 3 --format csv").out;
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,upper,periodic_lower,spectral_diagnostic");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(Cli, KusuokaExamples) {
  const auto a = Json::parse(cli("kusuoka --builtin 'alpha(3/5,4/5)'").out);
  EXPECT_NEAR(a["results"]["kusuoka"]["pressure"].get<double>(), 0.0, 1e-12);
  for (const char* key : {"Q", "Qhat"}) {
    const auto& q = a["results"]["kusuoka"][key];
    EXPECT_NEAR(q[0][0].get<double>(), 1 / std::sqrt(2.0), 1e-10);
    EXPECT_NEAR(q[1][1].get<double>(), 1 / std::sqrt(2.0), 1e-10);
    EXPECT_NEAR(q[0][1].get<double>(), 0.0, 1e-10);
  }
  const fs::path dir = fs::temp_directory_path() / "thermoform_test_kusuoka";
  fs::remove_all(dir);
  ASSERT_EQ(cli("kusuoka --builtin notmix2 --n-max 2 --out " + dir.string()).code, 0);
  std::ifstream in(dir / "cylinders.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string cyl = ss.str();
  EXPECT_NE(cyl.find("1 1,2,0.16"), std::string::npos) << cyl;
  EXPECT_NE(cyl.find("1 2,2,0.34"), std::string::npos) << cyl;
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "series.csv"));
}

TEST(Cli, WitnessesReverify) {
  // invariant subspace of the reducible pair
  const auto d = Json::parse(cli("inspect --builtin diagpair").out);
  const auto w = rp::subspace_from_json<Rational>(d["witnesses"]["invariant_subspace"]);
  EXPECT_TRUE(w.proper());
  EXPECT_TRUE(w.invariant_under(tf::builtins::diagpair()));

  const auto c = Json::parse(cli("classify --builtin 'alpha(3/5,4/5)'").out);
  const auto& pair = c["witnesses"]["counterexample_pair"];
  const auto t = tf::builtins::alpha(Rational(3, 5), Rational(4, 5));
  const auto a = tf::word_product(t, rp::word_from_json(pair[0]));
  const auto b = tf::word_product(t, rp::word_from_json(pair[1]));
  EXPECT_GT(std::fabs(tf::spectral_radius(tf::Matrix<Rational>(a * b)) - tf::spectral_radius(a) * tf::spectral_radius(b)),
            0.1);

  const auto n = Json::parse(cli("classify --builtin notmix2").out);
  const auto& mo = n["witnesses"]["mixing_obstruction"];
  const auto sub = rp::subspace_from_json<Rational>(mo["witness"]);
  EXPECT_TRUE(sub.invariant_under(tf::product_tuple(tf::builtins::notmix2(), mo["n"].get<std::size_t>())));
}

TEST(Cli, DeterministicAcrossThreadCounts) {
  auto strip = [](Json j) {
    j.erase("timings");
    j["parameters"].erase("threads");
    return j;
  };
  const auto a = strip(Json::parse(cli("pressure --builtin rankone4 --s 1.5 --N 6 --threads 1").out));
  const auto b = strip(Json::parse(cli("pressure --builtin rankone4 --s 1.5 --N 6 --threads 3").out));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(strip(Json::parse(cli("classify --builtin notmix2").out)).dump(),
            strip(Json::parse(cli("classify --builtin notmix2").out)).dump());
}

TEST(Cli, CorrelationSeries) {
  const auto j = Json::parse(cli("correlate --builtin notmix2 --x 1 --y 1 --n-max 20").out);
  EXPECT_NEAR(j["results"]["cesaro_average"].get<double>(), 0.25, 0.01);
  EXPECT_NEAR(j["results"]["max_gap"].get<double>(), 0.09, 1e-9);
  EXPECT_EQ(cli("correlate --builtin notmix2 --x 3").code, 2);
}
