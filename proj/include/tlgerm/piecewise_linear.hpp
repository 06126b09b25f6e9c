#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tlgerm/errors.hpp"

namespace tlgerm {

// Continuous piecewise-linear curve, constant beyond its end nodes.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.empty() || x_.size() != y_.size()) throw ValidationError("piecewise-linear curve needs matching nonempty nodes");
    for (std::size_t i = 0; i + 1 < x_.size(); ++i)
      if (!(x_[i + 1] > x_[i])) throw ValidationError("piecewise-linear nodes must be strictly increasing");
  }

  const std::vector<double>& xs() const { return x_; }
  const std::vector<double>& ys() const { return y_; }
  bool empty() const { return x_.empty(); }

  double operator()(double t) const {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    if (t == x_[i]) return y_[i];
    double w = (t - x_[i]) / (x_[i + 1] - x_[i]);
    return y_[i] + w * (y_[i + 1] - y_[i]);
  }

  // sup{t : curve(t) <= v} for a nondecreasing curve, capped at the last node.
  double upper_inverse(double v) const {
    if (y_.front() > v) return x_.front();
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      if (y_[i + 1] > v) {
        if (y_[i + 1] == y_[i]) return x_[i];
        double w = (v - y_[i]) / (y_[i + 1] - y_[i]);
        return x_[i] + std::clamp(w, 0.0, 1.0) * (x_[i + 1] - x_[i]);
      }
    }
    return x_.back();
  }

  bool nondecreasing(double tol = 0.0) const {
    for (std::size_t i = 0; i + 1 < y_.size(); ++i)
      if (y_[i + 1] < y_[i] - tol) return false;
    return true;
  }

  static PiecewiseLinear from_function(std::vector<double> x, auto&& fn) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = fn(x[i]);
    return PiecewiseLinear(std::move(x), std::move(y));
  }

 private:
  std::vector<double> x_, y_;
};

}  // namespace tlgerm
