#include <doctest.h>

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cpm/cli.hpp"
#include "cpm/inference.hpp"
#include "cpm/report.hpp"
#include "cpm/simulate.hpp"

using namespace cpm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cpm_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_study_csv(const fs::path& dir, int n, std::uint64_t rep) {
  SimDesign d;
  d.n = n;
  const auto s = generate_replicate(d, rep);
  const fs::path p = dir / "study.csv";
  std::ofstream f(p);
  f << "y,x1,x2\n";
  f.precision(17);
  for (const auto& r : s) f << r.y << ',' << r.z[0] << ',' << r.z[1] << '\n';
  return p;
}

const std::string kData = CPM_TEST_DATA_DIR;

// Same keys everywhere and numbers equal to a relative 1e-9.
void check_json_close(const nlohmann::json& got, const nlohmann::json& want, const std::string& path = "") {
  CAPTURE(path);
  REQUIRE(got.type() == want.type());
  if (want.is_object()) {
    REQUIRE(got.size() == want.size());
    for (auto it = want.begin(); it != want.end(); ++it) {
      REQUIRE(got.contains(it.key()));
      check_json_close(got[it.key()], it.value(), path + "/" + it.key());
    }
  } else if (want.is_array()) {
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) check_json_close(got[i], want[i], path + "/" + std::to_string(i));
  } else if (want.is_number_float()) {
    const double a = got.get<double>(), b = want.get<double>();
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)));
  } else {
    CHECK(got == want);
  }
}

}  // namespace

TEST_CASE("fit report layout matches the golden file") {
  auto r = run_cli({"fit", "--data", kData + "/small.csv", "--outcome", "y", "--covariates", "x1,x2", "--link", "probit",
                "--alpha-table", "--residuals"});
  REQUIRE(r.code == cli::kExitOk);
  const auto got = nlohmann::json::parse(r.out);
  const auto want = nlohmann::json::parse(slurp(kData + "/../golden/fit_small_probit.json"));
  check_json_close(got, want);
  CHECK(got["schema_version"] == kReportSchemaVersion);
}

TEST_CASE("fit report CSV layout") {
  auto r = run_cli({"fit", "--data", kData + "/small.csv", "--outcome", "y", "--covariates", "x1", "--format", "csv"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.rfind("# schema_version=1\nsection,name,value,se,ci_low,ci_high,z,p_value\n", 0) == 0);
  CHECK(r.out.find("meta,link,logit,,,,,\n") != std::string::npos);
  CHECK(r.out.find("\ncoef,x1,") != std::string::npos);
}

TEST_CASE("json round trip is lossless") {
  SimDesign d;
  d.n = 120;
  auto enc = encode_ordinal(censor_transform(generate_replicate(d, 2), std::exp(-2.0), std::exp(2.0)));
  auto f = fit(enc, LinkFamily(LinkKind::extreme_value));
  REQUIRE(f.converged);
  auto report = make_fit_report(f, {"x1", "x2"}, true, true);
  const auto j = to_json(report);
  const auto back = fit_report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(to_json(back) == j);

  // a reloaded fit answers the same queries
  auto g = fit_from_report(back);
  const Eigen::Vector2d z(1.0, 0.25);
  auto a = conditional_cdf(f, 1.3, z), b = conditional_cdf(g, 1.3, z);
  CHECK(a.estimate == b.estimate);
  CHECK(*a.se == *b.se);
  CHECK(conditional_quantile(f, 0.4, z).estimate == conditional_quantile(g, 0.4, z).estimate);
  CHECK(ahat(f, std::exp(2.0)) == ahat(g, std::exp(2.0)));
}

TEST_CASE("intercept-only alpha table inverts the ECDF") {
  auto r = run_cli({"fit", "--data", kData + "/y_only.csv", "--outcome", "y", "--alpha-table"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  const auto alpha = j["alpha_table"]["alpha"].get<std::vector<double>>();
  // y = 3.1, 1.2, 2.2, 1.2: ECDF 0.5, 0.75 at cuts 1.2, 2.2
  REQUIRE(alpha.size() == 2);
  const LinkFamily logit(LinkKind::logit);
  CHECK(std::abs(alpha[0] - link_quantile(logit, 0.5)) < 1e-10);
  CHECK(std::abs(alpha[1] - link_quantile(logit, 0.75)) < 1e-10);
}

TEST_CASE("exit codes and usage errors") {
  const auto csv = kData + "/small.csv";
  CHECK(run_cli({"fit", "--data", csv}).code == cli::kExitInputError);
  CHECK(run_cli({"fit", "--data", csv, "--outcome", "y", "--lower", "0.5"}).code == cli::kExitInputError);
  CHECK(run_cli({"fit", "--data", csv, "--outcome", "y", "--link", "cauchit"}).code == cli::kExitInputError);
  CHECK(run_cli({"fit", "--data", csv, "--outcome", "y", "--format", "xml"}).code == cli::kExitInputError);
  CHECK(run_cli({"fit", "--data", kData + "/blank_y.csv", "--outcome", "y"}).code == cli::kExitInputError);
  CHECK(run_cli({"fit", "--data", csv, "--outcome", "nope"}).code == cli::kExitInputError);
  CHECK(run_cli({}).code == cli::kExitInputError);
  CHECK(run_cli({"simulate", "--bounds", "3,1"}).code == cli::kExitInputError);
  CHECK(run_cli({"simulate", "--bounds", "abc"}).code == cli::kExitInputError);

  auto dup = run_cli({"fit", "--data", csv, "--outcome", "y", "--covariates", "x1,x1"});
  CHECK(dup.code == cli::kExitInputError);
  CHECK(dup.err.find("collinear") != std::string::npos);

  auto warn = run_cli({"fit", "--data", csv, "--outcome", "y", "--lower", "0.01", "--upper", "100"});
  CHECK(warn.code == cli::kExitOk);
  CHECK(warn.err.find("censor no observations") != std::string::npos);
}

TEST_CASE("non-convergence exits with 2 and still writes the report") {
  const auto dir = scratch("sep");
  {
    std::ofstream f(dir / "sep.csv");
    f << "y,x\n";
    for (int i = 0; i < 10; ++i) f << 1 + i * 0.01 << ",0\n";
    for (int i = 0; i < 10; ++i) f << 5 + i * 0.01 << ",1\n";
  }
  auto r = run_cli({"fit", "--data", (dir / "sep.csv").string(), "--outcome", "y", "--covariates", "x", "--out",
                (dir / "fit.json").string()});
  CHECK(r.code == cli::kExitNotConverged);
  CHECK(r.err.find("did not converge") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "fit.json"));
  CHECK(j["model"]["converged"] == false);
  // undefined standard errors are written as null and read back as NaN
  const auto back = fit_report_from_json(j);
  CHECK(std::isnan(back.coefficients[0].se));
}

TEST_CASE("predict from a saved model") {
  const auto dir = scratch("predict");
  const auto data = write_study_csv(dir, 1000, 11);
  const auto model = (dir / "model.json").string();
  auto r = run_cli({"fit", "--data", data.string(), "--outcome", "y", "--covariates", "x1,x2", "--link", "probit",
                "--alpha-table", "--out", model});
  REQUIRE(r.code == cli::kExitOk);
  {
    std::ofstream at(dir / "at.csv");
    at << "x1,x2\n0,0\n1,-0.5\n";
  }
  auto p = run_cli({"predict", "--model", model, "--at", (dir / "at.csv").string(), "--cdf", "1.5", "--exceed", "1.5",
                "--quantile", "0.5", "--mean"});
  REQUIRE(p.code == cli::kExitOk);
  std::istringstream lines(p.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "# schema_version=1");
  std::getline(lines, line);
  CHECK(line == "row,estimand,argument,estimate,se,ci_low,ci_high,flag,note");
  std::map<std::string, double> est;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    est[cells[0] + ":" + cells[1]] = std::stod(cells[3]);
  }
  CHECK(std::abs(est["1:exceed"] - (1.0 - est["1:cdf"])) < 1e-12);
  CHECK(std::abs(est["2:exceed"] - (1.0 - est["2:cdf"])) < 1e-12);
  CHECK(std::abs(est["1:quantile"] - 1.0) < 0.15);
  CHECK(std::abs(est["1:mean"] - std::exp(0.5)) < 0.25);

  // wrong covariate columns
  {
    std::ofstream at(dir / "bad.csv");
    at << "x1\n0\n";
  }
  CHECK(run_cli({"predict", "--model", model, "--at", (dir / "bad.csv").string(), "--cdf", "1"}).code ==
        cli::kExitInputError);
  // model without an alpha table cannot answer queries
  const auto bare = (dir / "bare.json").string();
  REQUIRE(run_cli({"fit", "--data", data.string(), "--outcome", "y", "--covariates", "x1,x2", "--out", bare}).code == 0);
  CHECK(run_cli({"predict", "--model", bare, "--at", (dir / "at.csv").string(), "--cdf", "1"}).code ==
        cli::kExitInputError);
}

TEST_CASE("censored models refuse the mean") {
  const auto dir = scratch("censored");
  const auto data = write_study_csv(dir, 1000, 12);
  const auto model = (dir / "model.json").string();
  auto r = run_cli({"fit", "--data", data.string(), "--outcome", "y", "--covariates", "x1,x2", "--link", "probit",
                "--lower", std::to_string(std::exp(-2.0)), "--upper", std::to_string(std::exp(2.0)), "--alpha-table",
                "--out", model});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(slurp(model));
  const double se = j["coefficients"][0]["se"].get<double>();
  CHECK(se > 0.055);
  CHECK(se < 0.085);
  {
    std::ofstream at(dir / "at.csv");
    at << "x1,x2\n0,0\n";
  }
  auto p = run_cli({"predict", "--model", model, "--at", (dir / "at.csv").string(), "--mean"});
  REQUIRE(p.code == cli::kExitOk);
  CHECK(p.out.find("1,mean,,NA,NA,NA,NA,refused,") != std::string::npos);
}

TEST_CASE("simulate output is independent of --threads") {
  const auto d1 = scratch("sim1"), d8 = scratch("sim8");
  const std::vector<std::string> common{"simulate", "--n", "100", "--replicates", "12", "--seed", "7"};
  auto a = common, b = common;
  a.insert(a.end(), {"--threads", "1", "--out-dir", d1.string()});
  b.insert(b.end(), {"--threads", "8", "--out-dir", d8.string()});
  REQUIRE(run_cli(a).code == cli::kExitOk);
  REQUIRE(run_cli(b).code == cli::kExitOk);
  int files = 0;
  for (const auto& e : fs::directory_iterator(d1)) {
    CHECK(slurp(e.path()) == slurp(d8 / e.path().filename()));
    ++files;
  }
  CHECK(files == 2 + 4);
}

TEST_CASE("simulate smoke run is fast") {
  const auto dir = scratch("smoke");
  const auto t0 = std::chrono::steady_clock::now();
  auto r = run_cli({"simulate", "--n", "100", "--replicates", "2", "--bounds", "none", "--bounds", "e^-2,e^2", "--out-dir",
                dir.string()});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(r.code == cli::kExitOk);
  CHECK(secs < 5.0);
  CHECK(fs::exists(dir / "metrics.csv"));
  CHECK(fs::exists(dir / "bias_curve_1.csv"));
  CHECK(r.out.find("[e^-2,e^2]") != std::string::npos);
}
