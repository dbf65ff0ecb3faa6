#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cpm {

// One observation (y, z). z excludes an intercept column.
struct RawSample {
  double y = 0.0;
  std::vector<double> z;
};

struct Bounds {
  double lower;
  double upper;
};

// Outcomes after censoring at [L,U]. yprime == L where left, == U where right.
struct CensoredDataset {
  Eigen::VectorXd yprime;
  std::vector<std::uint8_t> left;
  std::vector<std::uint8_t> right;
  Eigen::MatrixXd covariates;  // n x p
  std::optional<Bounds> bounds;

  Eigen::Index size() const { return yprime.size(); }
  Eigen::Index num_covariates() const { return covariates.cols(); }
  Eigen::Index num_left() const;
  Eigen::Index num_right() const;
};

// Multinomial view of a (possibly censored) continuous outcome. Categories
// and cut indices are zero-based.
struct OrdinalEncoding {
  std::vector<double> cuts;   // a_1 < ... < a_J
  std::vector<int> category;  // per observation, index into cuts
  Eigen::MatrixXd covariates;
  std::optional<Bounds> bounds;
  std::optional<int> left_cat;   // 0 when some observation is left-censored
  std::optional<int> right_cat;  // J-1 when some observation is right-censored

  int n_categories() const { return static_cast<int>(cuts.size()); }
  // Number of intercepts alpha, J-1.
  int n_alpha() const { return n_categories() - 1; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(category.size()); }
  Eigen::Index num_covariates() const { return covariates.cols(); }
  std::vector<Eigen::Index> category_counts() const;
};

// Dataset with no censoring applied (bounds absent).
CensoredDataset make_uncensored(std::span<const RawSample> samples);

// y <= L maps to (L, left); y >= U maps to (U, right); interior values pass
// through. Observation order is preserved.
CensoredDataset censor_transform(std::span<const RawSample> samples, double lower, double upper);

OrdinalEncoding encode_ordinal(const CensoredDataset& data);

// Reads a headed CSV. Row numbers in errors are 1-based data rows.
std::vector<RawSample> read_csv(const std::filesystem::path& path, const std::string& outcome_column,
                                const std::vector<std::string>& covariate_columns);

// Parses the named numeric columns of a headed CSV into an n x k matrix.
Eigen::MatrixXd read_csv_columns(const std::filesystem::path& path,
                                 const std::vector<std::string>& columns);

}  // namespace cpm
