// core.hpp
// Shared scalar aliases, seeded RNG helpers and small utilities used across
// the library. Everything numeric is Eigen-based; no other math dependency.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace kamwave {

using Real = double;
using Cplx = std::complex<double>;

using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;
using Mat2 = Eigen::Matrix2d;
using Mat2c = Eigen::Matrix2cd;

inline constexpr Real kPi = 3.14159265358979323846;
inline constexpr Cplx kI{0.0, 1.0};

// <s> = max(|s|, 1)
inline Real bracket_weight(int s) { return std::max(std::abs(s), 1) * 1.0; }

// Deterministic RNG; every random draw in the library goes through one of
// these with a documented seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  Real uniform(Real a = 0.0, Real b = 1.0) {
    return std::uniform_real_distribution<Real>(a, b)(eng_);
  }
  Real normal() { return std::normal_distribution<Real>(0.0, 1.0)(eng_); }
  Cplx cnormal() { return {normal(), normal()}; }
  int integer(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(eng_);
  }
 private:
  std::mt19937_64 eng_;
};

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Divisor too small: names the offending mode/sites so the caller can
// exclude the current parameter sample.
struct ResonanceError : std::runtime_error {
  std::vector<int> k;
  int s = 0, s_prime = 0;
  std::string family;
  Real value = 0.0, threshold = 0.0;
  ResonanceError(std::string msg, std::vector<int> k_, int s_, int sp_,
                 std::string family_, Real value_, Real threshold_)
      : std::runtime_error(std::move(msg)), k(std::move(k_)), s(s_),
        s_prime(sp_), family(std::move(family_)), value(value_),
        threshold(threshold_) {}
};

inline Real sqr(Real x) { return x * x; }

}  // namespace kamwave
