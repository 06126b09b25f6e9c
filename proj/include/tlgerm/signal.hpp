#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <vector>

#include "tlgerm/errors.hpp"

namespace tlgerm {

struct SignalSegment {
  double duration = 0.0;
  int phase = 1;  // outgoing branch served during this segment (1 or 2)
  double A = 0.0;
};

// 1-periodic piecewise-constant traffic-light signal, right-continuous at its breakpoints.
class Signal {
 public:
  Signal() = default;
  explicit Signal(std::vector<SignalSegment> segs) : segs_(std::move(segs)) {
    if (segs_.empty()) throw ValidationError("signal needs at least one segment");
    double total = 0.0;
    for (const auto& s : segs_) {
      if (!(s.duration > 0)) throw ValidationError("signal segment durations must be positive");
      if (s.phase != 1 && s.phase != 2) throw ValidationError("signal phase must be 1 or 2");
      if (!(s.A >= 0) || !std::isfinite(s.A)) throw ValidationError("signal intensity A must be finite and nonnegative");
      total += s.duration;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "signal durations must sum to one period (got " << total << ")";
      throw ValidationError(os.str());
    }
    starts_.resize(segs_.size() + 1);
    starts_[0] = 0.0;
    for (std::size_t i = 0; i < segs_.size(); ++i) starts_[i + 1] = starts_[i] + segs_[i].duration;
    starts_.back() = 1.0;
    cumulative_.resize(segs_.size() + 1, 0.0);
    for (std::size_t i = 0; i < segs_.size(); ++i)
      cumulative_[i + 1] = cumulative_[i] + segs_[i].A * (starts_[i + 1] - starts_[i]);
  }

  const std::vector<SignalSegment>& segments() const { return segs_; }
  std::size_t size() const { return segs_.size(); }
  double start(std::size_t i) const { return starts_[i]; }
  double end(std::size_t i) const { return starts_[i + 1]; }
  double length(std::size_t i) const { return starts_[i + 1] - starts_[i]; }
  double A_of(std::size_t i) const { return segs_[i].A; }
  int phase_of(std::size_t i) const { return segs_[i].phase; }

  std::size_t index_at(double t) const {
    double u = t - std::floor(t);
    std::size_t lo = 0, hi = segs_.size();
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (starts_[mid] <= u) lo = mid;
      else hi = mid;
    }
    return lo;
  }
  double A(double t) const { return segs_[index_at(t)].A; }
  int phase(double t) const { return segs_[index_at(t)].phase; }

  double mean() const { return cumulative_.back(); }
  double limiter(int k) const {
    double s = 0.0;
    for (std::size_t i = 0; i < segs_.size(); ++i)
      if (segs_[i].phase == k) s += segs_[i].A * length(i);
    return s;
  }
  double max_A() const {
    double m = 0.0;
    for (const auto& s : segs_) m = std::max(m, s.A);
    return m;
  }

  // B(t) = int_0^t A, valid for any real t.
  double integral(double t) const {
    double n = std::floor(t);
    double u = t - n;
    std::size_t i = index_at(u);
    return n * mean() + cumulative_[i] + segs_[i].A * (u - starts_[i]);
  }

  // A restricted to the segments of phase k (zero elsewhere).
  Signal masked(int k) const {
    auto s = segs_;
    for (auto& seg : s)
      if (seg.phase != k) seg.A = 0.0;
    return Signal(std::move(s));
  }

  // First switch instant of the eps-scaled signal strictly after t.
  double next_switch(double t, double eps) const {
    double tau = t / eps;
    double n = std::floor(tau);
    double guard = 1e-12 * std::max(1.0, std::abs(t));
    for (int cycle = 0; cycle < 3; ++cycle, n += 1.0) {
      for (std::size_t i = 0; i <= segs_.size(); ++i) {
        double cand = eps * (n + starts_[i]);
        if (cand > t + guard) return cand;
      }
    }
    return t + eps;
  }

  void check_caps(double f0max, double f1max, double f2max) const {
    for (std::size_t i = 0; i < segs_.size(); ++i) {
      double cap = std::min(f0max, segs_[i].phase == 1 ? f1max : f2max);
      if (segs_[i].A > cap * (1 + 1e-12)) {
        std::ostringstream os;
        os << "flux-limiter cap violated on segment " << i << ": A = " << segs_[i].A
           << " exceeds min(f0_max, f" << segs_[i].phase << "_max) = " << cap;
        throw ValidationError(os.str());
      }
    }
  }

  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
      const auto* b = static_cast<const unsigned char*>(p);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
      }
    };
    for (const auto& s : segs_) {
      mix(&s.duration, sizeof s.duration);
      mix(&s.phase, sizeof s.phase);
      mix(&s.A, sizeof s.A);
    }
    return h;
  }

 private:
  std::vector<SignalSegment> segs_;
  std::vector<double> starts_, cumulative_;
};

}  // namespace tlgerm
