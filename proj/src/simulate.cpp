#include "cpm/simulate.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "cpm/errors.hpp"
#include "cpm/format.hpp"
#include "cpm/inference.hpp"
#include "cpm/rng.hpp"

namespace cpm {
namespace {

double truth_of(const SimDesign& d, Estimand e) {
  switch (e) {
    case Estimand::beta1: return d.beta1;
    case Estimand::beta2: return d.beta2;
    case Estimand::ahat_mid: return std::log(kAhatProbePoint);
    case Estimand::median: return std::exp(d.link.quantile_unchecked(0.5));
    case Estimand::mean:
      // E exp(eps): lognormal for probit, Exp(1) for extreme-value, infinite for logit.
      switch (d.link.kind()) {
        case LinkKind::probit: return std::exp(0.5);
        case LinkKind::extreme_value: return 1.0;
        case LinkKind::logit: return std::numeric_limits<double>::infinity();
      }
  }
  return 0.0;
}

ReplicateFit fit_one(const SimDesign& design, const std::vector<RawSample>& samples,
                     const std::optional<Bounds>& bounds) {
  ReplicateFit out;
  out.ahat_grid.assign(design.grid.size(), std::numeric_limits<double>::quiet_NaN());
  CensoredDataset data = bounds ? censor_transform(samples, bounds->lower, bounds->upper) : make_uncensored(samples);
  out.censored_fraction = static_cast<double>(data.num_left() + data.num_right()) / static_cast<double>(data.size());
  const OrdinalEncoding enc = encode_ordinal(data);
  const CpmFit f = fit(enc, design.link, design.fit_options);
  out.converged = f.converged;
  out.stationarity = f.max_abs_gradient;
  if (!f.converged) return out;

  try {
    const Eigen::MatrixXd vb = beta_covariance(f);
    out.beta1 = f.params.beta(0);
    out.beta1_se = std::sqrt(vb(0, 0));
    out.beta2 = f.params.beta(1);
    out.beta2_se = std::sqrt(vb(1, 1));

    const FunctionalContrast h = FunctionalContrast::indicator_upto(enc, kAhatProbePoint);
    const double a = ahat(f, kAhatProbePoint);
    if (std::isfinite(a)) {
      out.ahat_mid = a;
      out.ahat_mid_se = std::sqrt(functional_variance(f, std::span(&h, 1), false)(0, 0));
    }

    const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(2);
    out.median = conditional_quantile(f, 0.5, z0).estimate;
    if (!f.censored()) {
      const EstimateWithSE mu = conditional_mean(f, z0);
      out.mean = mu.estimate;
      out.mean_se = mu.se;
    }
  } catch (const InferenceUnavailable&) {
    out.converged = false;
    return out;
  }

  for (size_t g = 0; g < design.grid.size(); ++g) {
    const double y = design.grid[g];
    if (bounds && (y < bounds->lower || y > bounds->upper)) continue;
    const double a = ahat(f, y);
    if (std::isfinite(a)) out.ahat_grid[g] = a;
  }
  return out;
}

std::optional<double> field(const ReplicateFit& r, Estimand e) {
  switch (e) {
    case Estimand::beta1: return r.beta1;
    case Estimand::beta2: return r.beta2;
    case Estimand::ahat_mid: return r.ahat_mid;
    case Estimand::median: return r.median;
    case Estimand::mean: return r.mean;
  }
  return std::nullopt;
}

std::optional<double> se_field(const ReplicateFit& r, Estimand e) {
  switch (e) {
    case Estimand::beta1: return r.beta1_se;
    case Estimand::beta2: return r.beta2_se;
    case Estimand::ahat_mid: return r.ahat_mid_se;
    case Estimand::median: return std::nullopt;
    case Estimand::mean: return r.mean_se;
  }
  return std::nullopt;
}

bool has_se(Estimand e) { return e != Estimand::median; }

// Label "[e^a,e^b]" when both bounds are exp of quarter-integers.
std::string pretty_bounds(const std::optional<Bounds>& b) {
  if (!b) return "Uncensored";
  auto tag = [](double v) -> std::string {
    const double t = std::log(v);
    const double q = std::round(4.0 * t) / 4.0;
    if (std::abs(t - q) > 1e-9) return format_fixed(v, 4);
    char buf[32];
    std::snprintf(buf, sizeof buf, "e^%g", q);
    return buf;
  };
  return "[" + tag(b->lower) + "," + tag(b->upper) + "]";
}

}  // namespace

void SimDesign::validate() const {
  if (n < 10) throw InvalidArgument("simulation requires n >= 10");
  if (replicates < 1) throw InvalidArgument("simulation requires at least one replicate");
  if (bound_pairs.empty()) throw InvalidArgument("at least one bound pair (or none) is required");
  for (const auto& b : bound_pairs)
    if (b && !(b->lower < b->upper)) throw InvalidBounds("each bound pair needs L < U");
  fit_options.validate();
}

std::vector<std::optional<Bounds>> SimDesign::default_bound_pairs() {
  return {std::nullopt, Bounds{std::exp(-4.0), std::exp(4.0)}, Bounds{std::exp(-2.0), std::exp(2.0)},
          Bounds{std::exp(-0.5), std::exp(0.5)}};
}

std::vector<double> SimDesign::default_grid() {
  std::vector<double> g;
  for (int i = -16; i <= 16; ++i) g.push_back(std::exp(0.25 * i));
  return g;
}

std::string estimand_name(Estimand e) {
  switch (e) {
    case Estimand::beta1: return "beta1";
    case Estimand::beta2: return "beta2";
    case Estimand::ahat_mid: return "A(e^0.5)";
    case Estimand::median: return "median(Y|X=0)";
    case Estimand::mean: return "E(Y|X=0)";
  }
  return "?";
}

const MetricsCell& MetricsTable::at(Estimand e, size_t bound_index) const {
  for (const auto& c : cells)
    if (c.estimand == e && c.bound_index == bound_index) return c;
  throw InvalidArgument("no metrics cell for " + estimand_name(e));
}

std::vector<RawSample> generate_replicate(const SimDesign& design, std::uint64_t replicate_index) {
  Philox4x32 gen(design.seed, static_cast<std::uint32_t>(replicate_index),
                 static_cast<std::uint32_t>(replicate_index >> 32));
  std::bernoulli_distribution x1_dist(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<RawSample> out(static_cast<size_t>(design.n));
  for (auto& s : out) {
    const double x1 = x1_dist(gen) ? 1.0 : 0.0;
    const double x2 = normal(gen);
    double eps;
    if (design.link.kind() == LinkKind::probit) {
      eps = normal(gen);
    } else {
      double u;
      do u = unit(gen);
      while (u <= 0.0);
      eps = design.link.quantile_unchecked(u);
    }
    s.y = std::exp(design.beta1 * x1 + design.beta2 * x2 + eps);
    s.z = {x1, x2};
  }
  return out;
}

ReplicateRecord run_replicate(const SimDesign& design, std::uint64_t replicate_index) {
  const auto samples = generate_replicate(design, replicate_index);
  ReplicateRecord rec;
  rec.fits.reserve(design.bound_pairs.size());
  for (const auto& b : design.bound_pairs) rec.fits.push_back(fit_one(design, samples, b));
  return rec;
}

MetricsTable aggregate_metrics(const SimDesign& design, const std::vector<ReplicateRecord>& records) {
  MetricsTable t;
  t.n = design.n;
  t.replicates = static_cast<int>(records.size());
  t.link = design.link;
  t.bound_pairs = design.bound_pairs;
  const size_t nb = design.bound_pairs.size();
  t.censor_fraction.assign(nb, 0.0);
  t.fit_failures.assign(nb, 0);
  for (size_t b = 0; b < nb; ++b) {
    double frac = 0.0;
    for (const auto& r : records) {
      frac += r.fits[b].censored_fraction;
      if (!r.fits[b].converged) ++t.fit_failures[b];
    }
    t.censor_fraction[b] = records.empty() ? 0.0 : frac / static_cast<double>(records.size());
    if (t.fit_failures[b] * 20 > t.replicates)
      t.warnings.push_back("WARNING: " + std::to_string(t.fit_failures[b]) + " of " + std::to_string(t.replicates) +
                           " fits failed to converge for bounds " + bound_label(design.bound_pairs[b]));
  }

  for (Estimand e : kAllEstimands) {
    const double truth = truth_of(design, e);
    for (size_t b = 0; b < nb; ++b) {
      MetricsCell cell{e, b, {}, {}, {}, {}, 0, 0, false};
      if (e == Estimand::mean && design.bound_pairs[b]) {
        cell.refused = true;
        t.cells.push_back(cell);
        continue;
      }
      std::vector<double> est, se;
      for (const auto& r : records) {
        const auto& f = r.fits[b];
        const auto v = f.converged ? field(f, e) : std::nullopt;
        if (!v) {
          ++cell.failures;
          continue;
        }
        est.push_back(*v);
        if (auto s = se_field(f, e)) se.push_back(*s);
      }
      cell.used = static_cast<int>(est.size());
      if (!est.empty()) {
        double sum = 0.0, sq = 0.0;
        for (double v : est) sum += v;
        const double mean = sum / static_cast<double>(est.size());
        for (double v : est) sq += (v - truth) * (v - truth);
        cell.bias = mean - truth;
        cell.mse = sq / static_cast<double>(est.size());
        if (est.size() >= 2) {
          double dev = 0.0;
          for (double v : est) dev += (v - mean) * (v - mean);
          cell.sd = std::sqrt(dev / static_cast<double>(est.size() - 1));
        }
        if (has_se(e) && !se.empty()) {
          double s = 0.0;
          for (double v : se) s += v;
          cell.mean_se = s / static_cast<double>(se.size());
        }
      }
      t.cells.push_back(cell);
    }
  }
  return t;
}

BiasCurve aggregate_bias_curve(const SimDesign& design, const std::vector<ReplicateRecord>& records,
                               size_t bound_index) {
  BiasCurve c;
  c.bounds = design.bound_pairs.at(bound_index);
  c.y = design.grid;
  c.mean_bias.assign(design.grid.size(), std::numeric_limits<double>::quiet_NaN());
  c.n_contributing.assign(design.grid.size(), 0);
  for (size_t g = 0; g < design.grid.size(); ++g) {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : records) {
      const auto& f = r.fits[bound_index];
      if (!f.converged || f.ahat_grid.empty()) continue;
      const double a = f.ahat_grid[g];
      if (std::isnan(a)) continue;
      sum += a - std::log(design.grid[g]);
      ++count;
    }
    c.n_contributing[g] = count;
    if (count > 0) c.mean_bias[g] = sum / count;
  }
  return c;
}

StudyResults simulate_study(const SimDesign& design, int threads) {
  design.validate();
  StudyResults res;
  res.replicates.resize(static_cast<size_t>(design.replicates));
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
  const long long reps = design.replicates;
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (long long r = 0; r < reps; ++r)
    res.replicates[static_cast<size_t>(r)] = run_replicate(design, static_cast<std::uint64_t>(r));
  res.metrics = aggregate_metrics(design, res.replicates);
  for (size_t b = 0; b < design.bound_pairs.size(); ++b)
    res.curves.push_back(aggregate_bias_curve(design, res.replicates, b));
  return res;
}

MetricsTable run_study(const SimDesign& design, int threads) { return simulate_study(design, threads).metrics; }

BiasCurve ahat_bias_curve(const SimDesign& design, const std::optional<Bounds>& bounds, int threads) {
  SimDesign d = design;
  d.bound_pairs = {bounds};
  return simulate_study(d, threads).curves.front();
}

std::string bound_label(const std::optional<Bounds>& b) {
  if (!b) return "none";
  return format_roundtrip(b->lower) + ":" + format_roundtrip(b->upper);
}

std::string format_metrics_csv(const MetricsTable& t) {
  std::ostringstream os;
  os << "# schema_version=1\n";
  os << "n,bound_pair,estimand,bias,sd,mean_se,mse,failures\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_roundtrip(*v) : std::string("NA"); };
  for (const auto& c : t.cells) {
    os << t.n << ',' << bound_label(t.bound_pairs[c.bound_index]) << ',' << estimand_name(c.estimand) << ',';
    if (c.refused) {
      os << "NA,NA,NA,NA,NA\n";
      continue;
    }
    os << opt(c.bias) << ',' << opt(c.sd) << ',' << opt(c.mean_se) << ',' << opt(c.mse) << ',' << c.failures
       << '\n';
  }
  return os.str();
}

std::string format_metrics_text(const MetricsTable& t) {
  std::ostringstream os;
  char buf[256];
  os << "Simulation results for estimates from CPMs (" << t.link.name() << " link), n = " << t.n << ", "
     << t.replicates << " replicates\n";
  std::snprintf(buf, sizeof buf, "%-16s%-9s", "Estimand", "");
  os << buf;
  for (const auto& b : t.bound_pairs) {
    std::snprintf(buf, sizeof buf, "%16s", pretty_bounds(b).c_str());
    os << buf;
  }
  os << '\n';
  for (Estimand e : kAllEstimands) {
    struct Row {
      const char* label;
      std::optional<double> MetricsCell::*member;
    };
    std::vector<Row> rows = {{"bias", &MetricsCell::bias}, {"SD", &MetricsCell::sd}};
    if (has_se(e)) rows.push_back({"mean SE", &MetricsCell::mean_se});
    rows.push_back({"MSE", &MetricsCell::mse});
    bool first = true;
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof buf, "%-16s%-9s", first ? estimand_name(e).c_str() : "", row.label);
      os << buf;
      first = false;
      for (size_t b = 0; b < t.bound_pairs.size(); ++b) {
        const MetricsCell& c = t.at(e, b);
        const auto v = c.refused ? std::nullopt : c.*(row.member);
        std::snprintf(buf, sizeof buf, "%16s", format_fixed(v, 4).c_str());
        os << buf;
      }
      os << '\n';
    }
  }
  std::snprintf(buf, sizeof buf, "%-25s", "censored fraction");
  os << buf;
  for (double f : t.censor_fraction) {
    std::snprintf(buf, sizeof buf, "%16s", format_fixed(f, 4).c_str());
    os << buf;
  }
  os << '\n';
  std::snprintf(buf, sizeof buf, "%-25s", "non-converged fits");
  os << buf;
  for (int f : t.fit_failures) {
    std::snprintf(buf, sizeof buf, "%16d", f);
    os << buf;
  }
  os << '\n';
  for (const auto& w : t.warnings) os << w << '\n';
  return os.str();
}

std::string format_bias_curve_csv(const BiasCurve& c) {
  std::ostringstream os;
  os << "# schema_version=1 bound_pair=" << bound_label(c.bounds) << '\n';
  os << "y,mean_bias,n_contributing\n";
  for (size_t g = 0; g < c.y.size(); ++g) {
    os << format_roundtrip(c.y[g]) << ',' << (c.n_contributing[g] > 0 ? format_roundtrip(c.mean_bias[g]) : "NA")
       << ',' << c.n_contributing[g] << '\n';
  }
  return os.str();
}

}  // namespace cpm
