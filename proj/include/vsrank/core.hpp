#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsrank {

using Vec = std::vector<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (transaction files, CSV, JSON).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The accumulated constraints admit no capacity.
class InfeasibleVersionSpace : public Error {
 public:
  using Error::Error;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

inline Vec subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("subtract: dimension mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace vsrank
