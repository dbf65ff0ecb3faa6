#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cpm {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidBounds : public Error {
 public:
  using Error::Error;
};

class DegenerateData : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

// A cell probability was <= 0, which only happens when alpha is not
// increasing across an occupied category.
class NonMonotoneParameters : public Error {
 public:
  using Error::Error;
};

class CollinearityError : public Error {
 public:
  CollinearityError(const std::string& what, std::vector<int> columns)
      : Error(what), columns_(std::move(columns)) {}
  // Zero-based covariate indices judged redundant.
  const std::vector<int>& columns() const noexcept { return columns_; }

 private:
  std::vector<int> columns_;
};

class InferenceUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace cpm
