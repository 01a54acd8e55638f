#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "kacrice/cli.hpp"
#include "kacrice/config.hpp"
#include "kacrice/errors.hpp"
#include "kacrice/report.hpp"
#include "kacrice/rootcount.hpp"

using namespace kacrice;
using nlohmann::json;
using doctest::Approx;

namespace {

struct Run {
  int code;
  std::string out, err;
};

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / ("kacrice_cli_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_config(const std::string& name, const json& doc) {
  const auto path = scratch() / name;
  std::ofstream(path) << doc.dump();
  return path.string();
}

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "kacrice");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json worked_config() {
  return {{"noise", {{"family", "shub-smale"}, {"d", 2}}}, {"signal", {{"variant", "radial"}, {"r", 1.0}}},
          {"m", {1, 2}}, {"r0", 2.0}};
}

}  // namespace

TEST_CASE("expect prints the Kostlan closed form column") {
  const auto cfg = write_config("ss.json", {{"noise", {{"family", "shub-smale"}, {"d", 2}}}, {"m", {1, 2, 3}}});
  const auto r = run({"expect", "--config", cfg});
  REQUIRE(r.code == kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j["schema_version"] == kSchemaVersion);
  const double expect[] = {std::sqrt(2.0), 2.0, std::sqrt(8.0)};
  for (int k = 0; k < 3; ++k) {
    CHECK(j["rows"][k]["shub_smale_sqrt_prod_d"].get<double>() == Approx(expect[k]).epsilon(1e-14));
    CHECK(j["rows"][k]["centered_EN_X"].get<double>() == Approx(expect[k]).epsilon(1e-6));
  }
}

TEST_CASE("expect for real-roots noise matches Monte Carlo counting") {
  const auto cfg = write_config("rr.json", {{"noise", {{"family", "real-roots"}, {"alphas", {1.0, 2.0}}}}, {"m", {1}}});
  const auto r = run({"expect", "--config", cfg, "--format", "csv"});
  REQUIRE(r.code == kExitOk);
  const auto line = r.out.substr(r.out.find("\r\n") + 2);
  const double value = std::stod(line.substr(line.find(',') + 1));
  McOptions opt;
  opt.n = 40000;
  const auto mc = mc_expected_roots(NoiseModel::uniform(1, real_roots_q({1.0, 2.0})), SignalSpec::zero(1), opt);
  CHECK(std::abs(mc.estimate.mean - value) < 4.0 * mc.estimate.std_error);
}

TEST_CASE("validation errors carry field paths and exit 2") {
  auto doc = worked_config();
  doc["m"] = json::array();
  auto r = run({"expect", "--config", write_config("empty_m.json", doc)});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("m:") != std::string::npos);

  doc = worked_config();
  doc["mc"] = {{"n", 5}};
  r = run({"mc", "--config", write_config("small_n.json", doc)});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("mc.n") != std::string::npos);

  doc = worked_config();
  doc["signal"]["r"] = -1.0;
  r = run({"bound", "--config", write_config("neg_r.json", doc)});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("signal.r") != std::string::npos);

  CHECK(run({"expect", "--config", (scratch() / "missing.json").string()}).code == kExitValidation);
  CHECK(run({"nonsense"}).code == kExitValidation);
}

TEST_CASE("bound reproduces the worked constants") {
  const auto r = run({"bound", "--config", write_config("worked.json", worked_config())});
  REQUIRE(r.code == kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j["constants"]["theta"].get<double>() == Approx((3 + 2 * std::sqrt(2.0)) / 6).epsilon(1e-14));
  CHECK(j["constants"]["C"].get<double>() == Approx(15 * std::sqrt(5.0)).epsilon(1e-14));
  CHECK(j["constants"]["theta_symbolic"] == "(3+2*sqrt(2))/6");
  CHECK(j["constants"]["C_symbolic"] == "15*sqrt(5)");
  CHECK(j["failures"].empty());
  CHECK(j["decay_table"].size() == 2);
  CHECK(j["decay_table"][0]["N_P"] == "inf");
}

TEST_CASE("bound with the zero signal reports the lower-control failure") {
  auto doc = worked_config();
  doc["signal"] = {{"variant", "zero"}};
  const auto r = run({"bound", "--config", write_config("zero.json", doc)});
  CHECK(r.code == kExitHypothesis);
  const auto j = json::parse(r.out);
  REQUIRE(!j["failures"].empty());
  CHECK(j["failures"][0].get<std::string>().find("(H4)") != std::string::npos);
  CHECK(j["per_m"][0]["snr"]["ell"].get<double>() == 0.0);
}

TEST_CASE("bound with real-roots noise echoes the named constants") {
  json doc = {{"noise", {{"family", "real-roots"}, {"alphas", {1.0, 3.0}}}},
              {"signal", {{"variant", "radial"}, {"r", 1.0}}},
              {"m", {2}},
              {"r0", 2.0}};
  const auto r = run({"bound", "--config", write_config("rr_bound.json", doc)});
  REQUIRE(r.code == kExitOk);
  const auto h = json::parse(r.out)["per_m"][0]["hypotheses"];
  CHECK(h["named_D"][0].get<double>() == 2.0);
  CHECK(h["named_E"][0].get<double>() == 2.0 * (3.0 - 1.0));
  CHECK(h["named_bounds_valid"] == true);
}

TEST_CASE("hyp subcommand exits 3 when the common-h hypothesis fails") {
  json doc = {{"noise", json::array({{{"family", "shub-smale"}, {"d", 2}}, {{"family", "real-roots"}, {"alphas", {1.0, 2.0}}}})},
              {"m", {2}}};
  const auto r = run({"hyp", "--config", write_config("mixed.json", doc)});
  CHECK(r.code == kExitHypothesis);
  CHECK(json::parse(r.out)["rows"][0]["h1_holds"] == false);
  doc["m"] = {3};
  const auto bad = run({"hyp", "--config", write_config("mixed3.json", doc)});
  CHECK(bad.code == kExitValidation);
  CHECK(bad.err.find("noise") != std::string::npos);
}

TEST_CASE("mc prints the exact one-dimensional value next to the estimate") {
  json doc = {{"noise", {{"family", "shub-smale"}, {"d", 2}}},
              {"signal", json::parse(R"({"variant": "dense", "terms": [{"j": [2], "c": 1.0}, {"j": [0], "c": -1.0}]})")},
              {"m", {1}},
              {"mc", {{"n", 20000}}}};
  const auto r = run({"mc", "--config", write_config("perturbed.json", doc)});
  REQUIRE(r.code == kExitOk);
  const auto row = json::parse(r.out)["rows"][0];
  const double mean = row["estimate"]["mean"], se = row["estimate"]["std_error"], exact = row["exact_1d"];
  CHECK(std::abs(mean - exact) < 4.0 * se);
}

TEST_CASE("mc rejects m > 2 with guidance") {
  auto doc = worked_config();
  doc["m"] = {3};
  const auto r = run({"mc", "--config", write_config("m3.json", doc)});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("expect") != std::string::npos);
}

TEST_CASE("exact1d subcommand and flag overrides") {
  json doc = {{"noise", {{"family", "shub-smale"}, {"d", 2}}},
              {"signal", json::parse(R"({"variant": "dense", "terms": [{"j": [2], "c": 1.0}, {"j": [0], "c": -1.0}]})")},
              {"m", {1}},
              {"lambda", 1e-4}};
  const auto r = run({"exact1d", "--config", write_config("lam.json", doc)});
  REQUIRE(r.code == kExitOk);
  CHECK(std::abs(json::parse(r.out)["exact_1d"].get<double>() - std::sqrt(2.0)) < 1e-3);
  CHECK(run({"exact1d", "--config", write_config("lam.json", doc), "--m", "1", "2"}).code == kExitValidation);
}

TEST_CASE("repeated runs with the same seed are byte-identical, including across thread counts") {
  json doc = {{"noise", {{"family", "shub-smale"}, {"d", 3}}}, {"m", {1}}, {"mc", {{"n", 3000}}}};
  const auto path = write_config("det.json", doc);
  const auto a = run({"mc", "--config", path, "--seed", "17"});
  const auto b = run({"mc", "--config", path, "--seed", "17"});
  const auto c = run({"mc", "--config", path, "--seed", "17", "--threads", "4"});
  const auto d = run({"mc", "--config", path, "--seed", "18"});
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  CHECK(a.out != d.out);
}

TEST_CASE("--emit-config round-trips") {
  auto doc = worked_config();
  doc["seed"] = 123;
  const auto r = run({"bound", "--config", write_config("emit.json", doc), "--emit-config", "--threads", "2"});
  REQUIRE(r.code == kExitOk);
  const auto resolved = json::parse(r.out);
  CHECK(resolved["seed"] == 123);
  CHECK(resolved["threads"] == 2);
  CHECK(to_json(parse_config(resolved)) == resolved);
}

TEST_CASE("--out writes the report to a file") {
  const auto out = (scratch() / "report.csv").string();
  const auto r = run({"expect", "--config", write_config("o.json", worked_config()), "--format", "csv", "--out", out});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.empty());
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  CHECK(header.rfind("m,centered_EN_X", 0) == 0);
}

TEST_CASE("CSV quoting and number formatting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CsvTable t({"x", "y"});
  t.add({"1", "two\nlines"});
  CHECK(t.str() == "x,y\r\n1,\"two\nlines\"\r\n");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  // The log carries ~1e-13 relative precision at this magnitude; compare mantissa and exponent numerically.
  const std::string big = format_log(LogValue::from_log(1000.0 * std::log(10.0)));
  const auto e = big.find('e');
  REQUIRE(e != std::string::npos);
  const double mant = std::stod(big.substr(0, e));
  const int expo = std::stoi(big.substr(e + 1));
  CHECK(std::abs(mant * std::pow(10.0, expo - 999) - 10.0) < 1e-11);
}
