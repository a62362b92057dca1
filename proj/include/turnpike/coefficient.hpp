#pragma once

#include <string>
#include <vector>

namespace turnpike {

/// Scalar coefficient t -> value from a small set of named families, so that
/// problem configs stay declarative: constant, exponential a*exp(b*t),
/// polynomial c0 + c1 t + ..., or a table with linear interpolation.
class Coefficient {
 public:
  Coefficient() = default;

  static Coefficient constant(double value);
  static Coefficient exponential(double amplitude, double rate);
  static Coefficient polynomial(std::vector<double> coeffs);
  static Coefficient tabulated(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;
  std::string describe() const;

 private:
  enum class Kind { Constant, Exponential, Polynomial, Tabulated };
  Kind kind_ = Kind::Constant;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> coeffs_;
  std::vector<double> times_;
  std::vector<double> values_;
};

}  // namespace turnpike
