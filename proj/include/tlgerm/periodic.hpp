#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tlgerm/errors.hpp"

namespace tlgerm {

// 1-periodic continuous piecewise-linear path given by knots 0 = t_0 < ... < t_n = 1.
class PeriodicPL {
 public:
  PeriodicPL() : t_{0.0, 1.0}, v_{0.0, 0.0} {}
  PeriodicPL(std::vector<double> t, std::vector<double> v) : t_(std::move(t)), v_(std::move(v)) {
    if (t_.size() < 2 || t_.size() != v_.size()) throw ValidationError("periodic path needs at least two knots");
    if (t_.front() != 0.0 || std::abs(t_.back() - 1.0) > 1e-12) throw ValidationError("periodic path knots must span [0, 1]");
    t_.back() = 1.0;
    for (std::size_t i = 0; i + 1 < t_.size(); ++i)
      if (!(t_[i + 1] > t_[i])) throw ValidationError("periodic path knots must increase");
    double scale = 1.0;
    for (double x : v_) scale = std::max(scale, std::abs(x));
    if (std::abs(v_.back() - v_.front()) > 1e-9 * scale) throw ValidationError("path is not periodic");
    v_.back() = v_.front();
  }

  const std::vector<double>& knots() const { return t_; }
  const std::vector<double>& values() const { return v_; }
  std::size_t pieces() const { return t_.size() - 1; }
  double slope(std::size_t i) const { return (v_[i + 1] - v_[i]) / (t_[i + 1] - t_[i]); }

  std::size_t piece_at(double u) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), u);
    std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    return std::min(i, pieces() - 1);
  }

  double operator()(double t) const {
    double u = t - std::floor(t);
    std::size_t i = piece_at(u);
    return v_[i] + slope(i) * (u - t_[i]);
  }

  double min() const { return *std::min_element(v_.begin(), v_.end()); }
  double max() const { return *std::max_element(v_.begin(), v_.end()); }
  bool constant(double tol = 1e-14) const { return max() - min() <= tol; }

 private:
  std::vector<double> t_, v_;
};

}  // namespace tlgerm
