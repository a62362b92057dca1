#include "turnpike/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace turnpike {

Coefficient Coefficient::constant(double value) {
  Coefficient c;
  c.kind_ = Kind::Constant;
  c.a_ = value;
  return c;
}

Coefficient Coefficient::exponential(double amplitude, double rate) {
  Coefficient c;
  c.kind_ = Kind::Exponential;
  c.a_ = amplitude;
  c.b_ = rate;
  return c;
}

Coefficient Coefficient::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("Coefficient: polynomial needs coefficients");
  Coefficient c;
  c.kind_ = Kind::Polynomial;
  c.coeffs_ = std::move(coeffs);
  return c;
}

Coefficient Coefficient::tabulated(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("Coefficient: table needs matching times/values, at least two");
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw std::invalid_argument("Coefficient: table times must be ascending");
  }
  Coefficient c;
  c.kind_ = Kind::Tabulated;
  c.times_ = std::move(times);
  c.values_ = std::move(values);
  return c;
}

double Coefficient::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return a_;
    case Kind::Exponential:
      return a_ * std::exp(b_ * t);
    case Kind::Polynomial: {
      double v = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * t + *it;
      return v;
    }
    case Kind::Tabulated: {
      if (t <= times_.front()) return values_.front();
      if (t >= times_.back()) return values_.back();
      const auto hi = std::upper_bound(times_.begin(), times_.end(), t);
      const auto i = static_cast<size_t>(hi - times_.begin());
      const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
      return (1.0 - w) * values_[i - 1] + w * values_[i];
    }
  }
  return 0.0;
}

std::string Coefficient::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Constant:
      os << "constant(" << a_ << ")";
      break;
    case Kind::Exponential:
      os << a_ << "*exp(" << b_ << "*t)";
      break;
    case Kind::Polynomial:
      os << "poly(";
      for (size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
      os << ")";
      break;
    case Kind::Tabulated:
      os << "table[" << times_.size() << "]";
      break;
  }
  return os.str();
}

}  // namespace turnpike
