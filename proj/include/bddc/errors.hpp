#pragma once

#include <stdexcept>
#include <string>

namespace bddc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A regressor matrix does not have full column rank.
class RankDeficientError : public Error {
 public:
  RankDeficientError(int rank, int required, const std::string& what)
      : Error(what + " (rank " + std::to_string(rank) + " < " +
              std::to_string(required) + ")"),
        rank_(rank),
        required_(required) {}
  int rank() const { return rank_; }
  int required() const { return required_; }

 private:
  int rank_;
  int required_;
};

// A scalar or matrix argument is outside its admissible set.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// I - L_w (Lambda^{-1} kron x) is numerically singular at the queried state.
class SingularGainError : public Error {
 public:
  SingularGainError(double condition, const std::string& what)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// The conic solver broke down (not the same as a certified infeasibility).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace bddc
