#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tlgerm/errors.hpp"

namespace tlgerm {

// Root of a monotone function on [lo, hi]; assumes a sign change or returns the nearest end.
template <class F>
double bisect_increasing(F&& fn, double target, double lo, double hi, double tol = 1e-14) {
  if (fn(lo) >= target) return lo;
  if (fn(hi) <= target) return hi;
  for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (fn(mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct QuadraticFlux {
  double a = 0.0, c = 1.0, fmax = 1.0;

  double b() const { return 0.5 * (a + c); }
  double value(double p) const { return 4.0 * fmax * (p - a) * (c - p) / ((c - a) * (c - a)); }
  double derivative(double p) const { return 4.0 * fmax * (a + c - 2.0 * p) / ((c - a) * (c - a)); }
  double inv_derivative(double v) const {
    return std::clamp(b() - v * (c - a) * (c - a) / (8.0 * fmax), a, c);
  }
  double offset_from_b(double lambda) const {
    double r = 1.0 - std::clamp(lambda / fmax, 0.0, 1.0);
    return 0.5 * (c - a) * std::sqrt(r);
  }
  double inv_up(double lambda) const { return b() - offset_from_b(lambda); }
  double inv_down(double lambda) const { return b() + offset_from_b(lambda); }
};

// Monotone (Fritsch-Carlson) cubic Hermite interpolant of concave samples.
class SampledFlux {
 public:
  SampledFlux(std::vector<double> p, std::vector<double> f) {
    auto d = std::make_shared<Data>();
    d->p = std::move(p);
    d->f = std::move(f);
    validate(*d);
    build_slopes(*d);
    data_ = std::move(d);
  }

  const std::vector<double>& nodes() const { return data_->p; }
  const std::vector<double>& values() const { return data_->f; }

  double a() const { return data_->p.front(); }
  double c() const { return data_->p.back(); }
  double b() const { return data_->p[data_->imax]; }
  double fmax() const { return data_->f[data_->imax]; }

  double value(double x) const {
    auto [i, t, h] = locate(x);
    const auto& D = *data_;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * D.f[i] + (t3 - 2 * t2 + t) * h * D.d[i] +
           (-2 * t3 + 3 * t2) * D.f[i + 1] + (t3 - t2) * h * D.d[i + 1];
  }

  double derivative(double x) const {
    auto [i, t, h] = locate(x);
    const auto& D = *data_;
    double t2 = t * t;
    return ((6 * t2 - 6 * t) * D.f[i] + (-6 * t2 + 6 * t) * D.f[i + 1]) / h +
           (3 * t2 - 4 * t + 1) * D.d[i] + (3 * t2 - 2 * t) * D.d[i + 1];
  }

  double inv_derivative(double v) const {
    return bisect_increasing([this](double x) { return -derivative(x); }, -v, a(), c(), 1e-15);
  }
  double inv_up(double lambda) const {
    return bisect_increasing([this](double x) { return value(x); }, lambda, a(), b(), 1e-15);
  }
  double inv_down(double lambda) const {
    return bisect_increasing([this](double x) { return -value(x); }, -lambda, b(), c(), 1e-15);
  }

 private:
  struct Data {
    std::vector<double> p, f, d;
    std::size_t imax = 0;
  };
  std::shared_ptr<const Data> data_;

  static void validate(Data& D) {
    const auto n = D.p.size();
    if (n < 3 || D.f.size() != n) throw ValidationError("sampled flux needs at least 3 (p, f) pairs of equal length");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(D.p[i + 1] > D.p[i])) throw ValidationError("sampled flux nodes must be strictly increasing");
    double scale = *std::max_element(D.f.begin(), D.f.end());
    if (!(scale > 0)) throw ValidationError("sampled flux must have positive maximum");
    if (std::abs(D.f.front()) > 1e-12 * scale || std::abs(D.f.back()) > 1e-12 * scale)
      throw ValidationError("sampled flux must vanish at both endpoints");
    D.f.front() = 0.0;
    D.f.back() = 0.0;
    double prev = (D.f[1] - D.f[0]) / (D.p[1] - D.p[0]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double s = (D.f[i + 1] - D.f[i]) / (D.p[i + 1] - D.p[i]);
      if (s > prev + 1e-12 * std::max(1.0, std::abs(prev)))
        throw ValidationError("sampled flux fails the concavity test at node " + std::to_string(i));
      prev = s;
    }
    D.imax = static_cast<std::size_t>(std::max_element(D.f.begin(), D.f.end()) - D.f.begin());
    for (std::size_t i = 0; i < n; ++i)
      if (i != D.imax && D.f[i] == D.f[D.imax]) throw ValidationError("sampled flux must have a unique maximiser");
  }

  static void build_slopes(Data& D) {
    const auto n = D.p.size();
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = D.p[i + 1] - D.p[i];
      del[i] = (D.f[i + 1] - D.f[i]) / h[i];
    }
    D.d.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (del[i - 1] * del[i] <= 0) continue;
      double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
      D.d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0) return 0.0;
      if (d0 * d1 <= 0 && std::abs(s) > std::abs(3 * d0)) return 3 * d0;
      return s;
    };
    D.d[0] = end_slope(h[0], h[1], del[0], del[1]);
    D.d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    D.d[D.imax] = 0.0;
  }

  struct Loc {
    std::size_t i;
    double t, h;
  };
  Loc locate(double x) const {
    const auto& p = data_->p;
    x = std::clamp(x, p.front(), p.back());
    auto it = std::upper_bound(p.begin(), p.end(), x);
    std::size_t i = it == p.begin() ? 0 : static_cast<std::size_t>(it - p.begin()) - 1;
    if (i + 1 >= p.size()) i = p.size() - 2;
    double h = p[i + 1] - p[i];
    return {i, (x - p[i]) / h, h};
  }
};

// A concave flux with f(a) = f(c) = 0 and unique maximiser b; optionally reversed (v -> f(-v)).
class Flux {
 public:
  Flux() : base_(QuadraticFlux{}) {}

  static Flux quadratic(double a, double c, double fmax) {
    if (!(c > a)) throw ValidationError("flux domain requires a < c");
    if (!(fmax > 0)) throw ValidationError("flux maximum must be positive");
    return Flux(QuadraticFlux{a, c, fmax});
  }
  static Flux sampled(std::vector<double> p, std::vector<double> f) {
    return Flux(SampledFlux(std::move(p), std::move(f)));
  }

  bool is_reversed() const { return mirror_; }
  bool is_quadratic() const { return std::holds_alternative<QuadraticFlux>(base_); }
  const QuadraticFlux* as_quadratic() const { return std::get_if<QuadraticFlux>(&base_); }
  const SampledFlux* as_sampled() const { return std::get_if<SampledFlux>(&base_); }

  double a() const { return mirror_ ? -base_c() : base_a(); }
  double b() const { return mirror_ ? -base_b() : base_b(); }
  double c() const { return mirror_ ? -base_a() : base_c(); }
  double f_max() const {
    return std::visit([](const auto& f) {
      if constexpr (std::is_same_v<std::decay_t<decltype(f)>, QuadraticFlux>) return f.fmax;
      else return f.fmax();
    }, base_);
  }

  void check_domain(double p, double slack = 1e-12) const {
    double s = slack * std::max(1.0, c() - a());
    if (p < a() - s || p > c() + s || std::isnan(p)) {
      std::ostringstream os;
      os << "density " << p << " outside flux domain [" << a() << ", " << c() << "]";
      throw DomainError(os.str());
    }
  }

  double operator()(double p) const { return base_value(mirror_ ? -p : p); }
  double derivative(double p) const { return mirror_ ? -base_derivative(-p) : base_derivative(p); }
  // Point where f'(p) = v, clipped to [a, c].
  double inv_derivative(double v) const { return mirror_ ? -base_inv_derivative(-v) : base_inv_derivative(v); }

  double plus(double p) const { return p <= b() ? (*this)(p) : f_max(); }
  double minus(double p) const { return p >= b() ? (*this)(p) : f_max(); }

  double inv_plus(double lambda) const {
    check_level(lambda);
    return mirror_ ? -base_inv_down(lambda) : base_inv_up(lambda);
  }
  double inv_minus(double lambda) const {
    check_level(lambda);
    return mirror_ ? -base_inv_up(lambda) : base_inv_down(lambda);
  }

  double max_speed() const { return std::max(std::abs(derivative(a())), std::abs(derivative(c()))); }

  Flux reversed() const {
    Flux r = *this;
    r.mirror_ = !mirror_;
    return r;
  }

  bool operator==(const Flux& o) const {
    if (mirror_ != o.mirror_ || base_.index() != o.base_.index()) return false;
    if (auto q = as_quadratic()) {
      auto r = o.as_quadratic();
      return q->a == r->a && q->c == r->c && q->fmax == r->fmax;
    }
    return as_sampled()->nodes() == o.as_sampled()->nodes() && as_sampled()->values() == o.as_sampled()->values();
  }

 private:
  explicit Flux(QuadraticFlux q) : base_(q) {}
  explicit Flux(SampledFlux s) : base_(std::move(s)) {}

  std::variant<QuadraticFlux, SampledFlux> base_;
  bool mirror_ = false;

  void check_level(double lambda) const {
    double fm = f_max();
    if (!(lambda >= -1e-12 * fm && lambda <= fm * (1 + 1e-12))) {
      std::ostringstream os;
      os << "flux level " << lambda << " outside [0, " << fm << "]";
      throw RangeError(os.str());
    }
  }

  double base_a() const {
    return std::visit([](const auto& f) {
      if constexpr (std::is_same_v<std::decay_t<decltype(f)>, QuadraticFlux>) return f.a;
      else return f.a();
    }, base_);
  }
  double base_c() const {
    return std::visit([](const auto& f) {
      if constexpr (std::is_same_v<std::decay_t<decltype(f)>, QuadraticFlux>) return f.c;
      else return f.c();
    }, base_);
  }
  double base_b() const {
    return std::visit([](const auto& f) { return f.b(); }, base_);
  }
  double base_value(double p) const {
    return std::visit([p](const auto& f) { return f.value(p); }, base_);
  }
  double base_derivative(double p) const {
    return std::visit([p](const auto& f) { return f.derivative(p); }, base_);
  }
  double base_inv_derivative(double v) const {
    return std::visit([v](const auto& f) { return f.inv_derivative(v); }, base_);
  }
  double base_inv_up(double l) const {
    return std::visit([l](const auto& f) { return f.inv_up(l); }, base_);
  }
  double base_inv_down(double l) const {
    return std::visit([l](const auto& f) { return f.inv_down(l); }, base_);
  }
};

// g(q) = f(q + shift) - offset restricted to [lo, hi], where f is monotone on the shifted interval.
struct ShiftedFlux {
  Flux f;
  double shift = 0.0, offset = 0.0, lo = 0.0, hi = 0.0;

  double operator()(double q) const { return f(q + shift) - offset; }
  double derivative(double q) const { return f.derivative(q + shift); }
  bool increasing() const { return 0.5 * (lo + hi) + shift <= f.b(); }
  double top() const { return increasing() ? hi : lo; }
  // g^{-1}(v) on [lo, hi].
  double inverse(double v) const {
    double lvl = std::clamp(v + offset, 0.0, f.f_max());
    double p = increasing() ? f.inv_plus(lvl) : f.inv_minus(lvl);
    return std::clamp(p - shift, lo, hi);
  }
};

struct XiValue {
  double value;
  double p;  // maximiser; d/dy xi = -p, d/ds xi = g(p)
};

// xi(s, y) = max_{p in [lo, hi]} (-p y + s g(p)) for concave g.
inline XiValue xi(const ShiftedFlux& g, double s, double y) {
  if (s < 0) throw DomainError("fundamental solution needs s >= 0");
  double p;
  if (s == 0.0) {
    p = y > 0 ? g.lo : (y < 0 ? g.hi : g.top());
  } else {
    double z = y / s;
    if (z >= g.derivative(g.lo)) p = g.lo;
    else if (z <= g.derivative(g.hi)) p = g.hi;
    else p = std::clamp(g.f.inv_derivative(z) - g.shift, g.lo, g.hi);
  }
  return {-p * y + s * g(p), p};
}

}  // namespace tlgerm
