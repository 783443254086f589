#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvflow {

using Vec = std::vector<double>;

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidPointError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PositivityError : std::domain_error {
  using std::domain_error::domain_error;
};

struct RegimeExitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline Vec operator+(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vec operator-(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Vec operator*(double s, Vec a) {
  for (auto& x : a) x *= s;
  return a;
}

inline double sqr(double x) { return x * x; }

// Area of the unit sphere S^{m} embedded in R^{m+1}.
inline double sphere_area(int m) {
  return 2.0 * std::pow(M_PI, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

inline double conformal_cn(int n) { return 4.0 * (n - 1) / double(n - 2); }

}  // namespace curvflow
