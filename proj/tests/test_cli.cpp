#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "horolab/cli.hpp"
#include "horolab/measures.hpp"

using namespace horolab;
using Catch::Approx;
using Json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "horolab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    v.push_back(line);
  }
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) v.push_back(f);
  return v;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "horolab_test_cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("fourier command", "[cli]") {
  const auto r = run({"fourier", "--measure", "cantor:3:0,2", "--xi", "0:100:1"});
  REQUIRE(r.code == cli::kExitOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 102);
  CHECK(rows[0] == "xi,re,im,abs");
  const auto first = fields(rows[1]);
  CHECK(std::stod(first[0]) == 0.0);
  CHECK(std::stod(first[3]) == 1.0);
  const auto second = fields(rows[2]);
  const double expected = measures::fourier_abs(measures::parse_measure("cantor:3:0,2"), 1.0);
  CHECK(std::stod(second[3]) == Approx(expected).epsilon(1e-15));
  CHECK(r.out.find("\r\n") != std::string::npos);
  const Json j = Json::parse(r.err);
  CHECK(j["command"] == "fourier");
}

TEST_CASE("dim command", "[cli]") {
  const auto json = scratch("dim.json");
  const auto r = run({"dim", "--measure", "cantor:450:0..446", "--xmax", "1000000", "--json", json.string()});
  REQUIRE(r.code == cli::kExitOk);
  const Json j = Json::parse(slurp(json));
  for (const char* key : {"command", "config", "seed", "exponent", "stderr", "r2", "status"}) CHECK(j.contains(key));
  CHECK(j["details"]["cvy_bound"].get<double>() == Approx(0.6094711505009305).epsilon(1e-12));
  CHECK(j["details"]["cvy_bound"].get<double>() > 0.609375);
  CHECK(j["details"]["cvy_exceeds_threshold"] == true);
  CHECK(j["details"].contains("dimension"));
  CHECK(j["config"]["measure"] == "cantor:450:0..446");
  CHECK(j["config"]["star"] == false);
  CHECK(lines(r.out)[0] == "X,S");
}

TEST_CASE("equidist command", "[cli]") {
  const auto json = scratch("equidist.json");
  const auto r = run({"equidist", "--measure", "leb", "--test", "eisenstein:t=1", "--ygrid", "0.25:0.5:12", "--method",
                      "cylinder", "--tol", "1e-8", "--json", json.string()});
  REQUIRE(r.code == cli::kExitOk);
  const Json j = Json::parse(slurp(json));
  CHECK(j["exponent"].get<double>() == Approx(0.5).margin(0.05));
  CHECK(j["status"] == "ok");
  const auto rows = lines(r.out);
  CHECK(rows[0] == "y,re,im,abs_error,envelope,error_bar,cusp_fraction");
  CHECK(rows.size() == 13);
}

TEST_CASE("inconclusive experiments exit with status 2", "[cli]") {
  const auto r = run({"equidist", "--measure", "dirac:0", "--test", "bump:y0=1.2,y1=2", "--ygrid", "0.25:0.5:8"});
  CHECK(r.code == cli::kExitInconclusive);
  const Json j = Json::parse(r.err);
  CHECK(j["status"] != "ok");
}

TEST_CASE("diagnostics name the failing production", "[cli]") {
  const auto bad_measure = run({"fourier", "--measure", "cantor:3:0,7"});
  CHECK(bad_measure.code == cli::kExitError);
  CHECK(bad_measure.err.rfind("error: ", 0) == 0);
  CHECK(bad_measure.err.find("<digits>") != std::string::npos);

  const auto bad_test = run({"equidist", "--measure", "leb", "--test", "bump:y0=2"});
  CHECK(bad_test.code == cli::kExitError);
  CHECK(bad_test.err.find("<bump>") != std::string::npos);

  CHECK(run({"nosuch"}).code == cli::kExitError);
  CHECK(run({"fourier"}).code == cli::kExitError);
  CHECK(run({"fourier", "--measure", "leb", "--xi", "0:1"}).code == cli::kExitError);
  CHECK(run({"equidist", "--config", scratch("missing.cfg").string()}).code == cli::kExitError);
}

TEST_CASE("config files supply defaults that flags override", "[cli]") {
  const auto cfg = scratch("fourier.cfg");
  {
    std::ofstream f(cfg);
    f << "# fourier sweep\nmeasure = cantor:3:0,2\nxi=0:4:1\n\n";
  }
  const auto a = run({"fourier", "--config", cfg.string()});
  REQUIRE(a.code == cli::kExitOk);
  CHECK(lines(a.out).size() == 6);
  const auto b = run({"fourier", "--config", cfg.string(), "--xi", "0:2:1"});
  REQUIRE(b.code == cli::kExitOk);
  CHECK(lines(b.out).size() == 4);

  const auto bad = scratch("bad.cfg");
  {
    std::ofstream f(bad);
    f << "measure\n";
  }
  const auto c = run({"fourier", "--config", bad.string()});
  CHECK(c.code == cli::kExitError);
  CHECK(c.err.find("<config>") != std::string::npos);
}

TEST_CASE("identical seeds give byte-identical output", "[cli][determinism]") {
  const std::vector<std::vector<std::string>> commands = {
      {"equidist", "--measure", "cantor:3:0,2", "--ygrid", "0.25:0.5:5", "--budget", "50000", "--seed", "9"},
      {"khintchine", "--measure", "cantor:450:0..446", "--Q", "300", "--samples", "5000", "--seed", "4"},
      {"twisted", "--ygrid", "0.25:0.5:6"},
      {"stationary", "--phase", "poly:0,0,1", "--xi-grid", "10:1000:9"},
  };
  for (const auto& cmd : commands) {
    const auto a = run(cmd);
    auto threaded = cmd;
    threaded.insert(threaded.begin(), {"--threads", "3"});
    const auto b = run(threaded);
    CHECK(a.out == b.out);
    CHECK(a.err == b.err);
    CHECK(a.out == run(cmd).out);
  }
  const auto s1 = run({"khintchine", "--measure", "leb", "--Q", "100", "--samples", "2000", "--seed", "1"});
  const auto s2 = run({"khintchine", "--measure", "leb", "--Q", "100", "--samples", "2000", "--seed", "2"});
  CHECK(s1.out != s2.out);
}

TEST_CASE("CSV and JSON files", "[cli]") {
  const auto csv = scratch("spectral.csv");
  const auto r = run({"spectral-gap", "--test", "eisenstein:t=1", "--ygrid", "0.125:0.5:4", "--csv", csv.string()});
  REQUIRE(r.code == cli::kExitOk);
  const auto rows = lines(slurp(csv));
  CHECK(rows[0] == "y,sup");
  CHECK(rows.size() == 5);
  // the summary moves to stdout when the CSV goes to a file
  const Json j = Json::parse(r.out);
  CHECK(j["command"] == "spectral-gap");
  CHECK(j["seed"].is_null());
}
