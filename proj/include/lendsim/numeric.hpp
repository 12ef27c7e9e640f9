#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>

namespace lendsim {

// Exact arithmetic backing for the --exact mode. Engines that admit closed-form
// checks are templated on the scalar type; everything stochastic stays double.
using Rational = boost::multiprecision::cpp_rational;

template <typename R>
struct scalar_ops;

template <>
struct scalar_ops<double> {
  static constexpr bool exact = false;
  static double from_ratio(long long num, long long den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::fabs(x); }
};

template <>
struct scalar_ops<Rational> {
  static constexpr bool exact = true;
  static Rational from_ratio(long long num, long long den) { return Rational(num, den); }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
};

// Running sum. Plain in exact mode, Neumaier-compensated for double so that
// cumulative ledgers over ~1e4 steps stay well inside 1e-9 of closed forms.
template <typename R>
class Accumulator {
 public:
  void add(const R& x) { sum_ += x; }
  R value() const { return sum_; }

 private:
  R sum_{};
};

template <>
class Accumulator<double> {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Shortest round-trip decimal form, stable across platforms for CSV output.
std::string format_double(double x);

}  // namespace lendsim
