#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "cpm/errors.hpp"
#include "cpm/rng.hpp"
#include "cpm/simulate.hpp"

using namespace cpm;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  using B = Philox4x32::Block;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::bijection(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("generator streams are distinct and reproducible") {
  Philox4x32 a(5, 0, 0), b(5, 0, 0), c(5, 1, 0), d(6, 0, 0);
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    same_c += x == c();
    same_d += x == d();
  }
  CHECK(same_c < 3);
  CHECK(same_d < 3);
}

TEST_CASE("replicates are deterministic in (seed, index)") {
  SimDesign d;
  auto r1 = generate_replicate(d, 17), r2 = generate_replicate(d, 17), r3 = generate_replicate(d, 18);
  REQUIRE(r1.size() == 100);
  for (size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].y == r2[i].y);
    CHECK(r1[i].z == r2[i].z);
  }
  CHECK(r1[0].y != r3[0].y);
  d.seed = 2;
  CHECK(generate_replicate(d, 17)[0].y != r1[0].y);
  for (auto& s : r1) {
    CHECK((s.z[0] == 0.0 || s.z[0] == 1.0));
    CHECK(s.y > 0.0);
  }
}

TEST_CASE("null design reduces to the latent law") {
  SimDesign d;
  d.n = 100000;
  d.beta1 = 0.0;
  d.beta2 = 0.0;
  auto s = generate_replicate(d, 0);
  std::vector<double> ly;
  for (auto& r : s) ly.push_back(std::log(r.y));
  std::sort(ly.begin(), ly.end());
  const LinkFamily probit(LinkKind::probit);
  double D = 0.0;
  const double n = static_cast<double>(ly.size());
  for (size_t i = 0; i < ly.size(); ++i) {
    const double F = probit.cdf(ly[i]);
    D = std::max({D, (i + 1) / n - F, F - i / n});
  }
  // asymptotic Kolmogorov critical value at level 0.01
  CHECK(D * std::sqrt(n) < 1.6276);
}

TEST_CASE("censoring fractions at the default bounds") {
  SimDesign d;
  d.n = 20000;
  auto s = generate_replicate(d, 1);
  const double want[] = {0.002, 0.13, 0.71};
  for (int b = 0; b < 3; ++b) {
    const double t = std::vector<double>{4.0, 2.0, 0.5}[static_cast<size_t>(b)];
    auto c = censor_transform(s, std::exp(-t), std::exp(t));
    const double frac = static_cast<double>(c.num_left() + c.num_right()) / d.n;
    CHECK(std::abs(frac - want[b]) < 0.02);
  }
}

TEST_CASE("a single replicate has no SD") {
  SimDesign d;
  d.replicates = 1;
  d.seed = 3;
  auto res = simulate_study(d, 1);
  const auto& c = res.metrics.at(Estimand::beta1, 0);
  REQUIRE(c.bias.has_value());
  CHECK_FALSE(c.sd.has_value());
  REQUIRE(res.replicates[0].fits[0].beta1.has_value());
  CHECK(*c.bias == *res.replicates[0].fits[0].beta1 - 1.0);
  CHECK(res.metrics.at(Estimand::mean, 1).refused);
  CHECK_FALSE(res.metrics.at(Estimand::mean, 0).refused);
  CHECK_FALSE(res.metrics.at(Estimand::median, 0).mean_se.has_value());
  const auto csv = format_metrics_csv(res.metrics);
  CHECK(csv.find("100,none,beta1,") != std::string::npos);
  CHECK(csv.find(",NA,") != std::string::npos);
}

TEST_CASE("aggregates and MSE convention") {
  SimDesign d;
  d.replicates = 40;
  auto res = simulate_study(d, 4);
  const int R = res.metrics.replicates;
  CHECK(R == 40);
  for (const auto& c : res.metrics.cells) {
    if (c.refused || !c.sd) continue;
    const double R1 = c.used;
    CHECK(std::abs(*c.mse - (*c.bias * *c.bias + *c.sd * *c.sd * (R1 - 1) / R1)) < 1e-12);
    CHECK(*c.mse >= *c.bias * *c.bias - 1e-15);
  }
  for (size_t b = 0; b < d.bound_pairs.size(); ++b) CHECK(res.metrics.fit_failures[b] == 0);
  CHECK(res.metrics.censor_fraction[0] == 0.0);
  CHECK(res.metrics.censor_fraction[3] > 0.5);
}

TEST_CASE("study results do not depend on the thread count") {
  SimDesign d;
  d.replicates = 24;
  d.n = 150;
  auto a = simulate_study(d, 1), b = simulate_study(d, 6);
  CHECK(format_metrics_csv(a.metrics) == format_metrics_csv(b.metrics));
  CHECK(format_metrics_text(a.metrics) == format_metrics_text(b.metrics));
  for (size_t k = 0; k < a.curves.size(); ++k)
    CHECK(format_bias_curve_csv(a.curves[k]) == format_bias_curve_csv(b.curves[k]));
}

TEST_CASE("bias curves skip points outside the support") {
  SimDesign d;
  d.replicates = 10;
  const Bounds b{std::exp(-2.0), std::exp(2.0)};
  auto curve = ahat_bias_curve(d, b, 2);
  REQUIRE(curve.y.size() == 33);
  for (size_t g = 0; g < curve.y.size(); ++g) {
    const bool outside = curve.y[g] < b.lower || curve.y[g] > b.upper;
    if (outside) {
      CHECK(curve.n_contributing[g] == 0);
      CHECK(std::isnan(curve.mean_bias[g]));
    } else {
      // a replicate without censoring at a bound has no A-hat beyond its extreme cut
      CHECK(curve.n_contributing[g] >= 9);
    }
  }
  auto unc = ahat_bias_curve(d, std::nullopt, 2);
  CHECK(unc.n_contributing.front() < 10);  // e^-4 lies below most replicates' smallest outcome
  CHECK(unc.n_contributing[16] == 10);
  const auto csv = format_bias_curve_csv(unc);
  CHECK(csv.rfind("# schema_version=1 bound_pair=none\ny,mean_bias,n_contributing\n", 0) == 0);
}

TEST_CASE("design validation") {
  SimDesign d;
  d.n = 5;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d = SimDesign{};
  d.replicates = 0;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d = SimDesign{};
  d.bound_pairs = {Bounds{2.0, 1.0}};
  CHECK_THROWS_AS(d.validate(), InvalidBounds);
}

TEST_CASE("text table layout") {
  SimDesign d;
  d.replicates = 3;
  auto t = run_study(d, 2);
  const auto text = format_metrics_text(t);
  CHECK(text.rfind("Simulation results for estimates from CPMs (probit link), n = 100, 3 replicates\n", 0) == 0);
  CHECK(text.find("Estimand                       Uncensored      [e^-4,e^4]      [e^-2,e^2]  [e^-0.5,e^0.5]\n") !=
        std::string::npos);
  CHECK(text.find("E(Y|X=0)        bias") != std::string::npos);
  CHECK(text == read_file(std::string(CPM_TEST_DATA_DIR) + "/../golden/table1_n100_r3.txt"));
  CHECK(format_metrics_csv(t) == read_file(std::string(CPM_TEST_DATA_DIR) + "/../golden/metrics_n100_r3.csv"));
}
