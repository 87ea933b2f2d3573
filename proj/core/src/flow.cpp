#include "bioreactor/flow.hpp"

#include <algorithm>
#include <cmath>

#include "bioreactor/error.hpp"

namespace bioreactor {

namespace {

/// Index i and weight w such that x ~ (1 - w) * grid[i] + w * grid[i + 1].
std::pair<std::size_t, double> bracket(const std::vector<double>& grid, double x) {
  if (grid.size() == 1 || x <= grid.front()) {
    return {0, 0.0};
  }
  if (x >= grid.back()) {
    return {grid.size() - 2, 1.0};
  }
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

void require_increasing(const std::vector<double>& grid, const char* field) {
  if (grid.empty()) {
    throw ConfigError(field, "must contain at least one sample");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError(field, "must be strictly increasing");
    }
  }
}

}  // namespace

FlowField::FlowField(Profile profile) : profile_(std::move(profile)) {
  auto track = [this](double q) {
    if (!std::isfinite(q)) {
      throw ConfigError("flow", "flow speed must be finite");
    }
    sup_ = std::max(sup_, std::abs(q));
    sup_negative_ = std::max(sup_negative_, -q);
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Constant>) {
          track(p.q0);
        } else if constexpr (std::is_same_v<T, TimeRamp>) {
          if (!(p.ramp_time > 0.0)) {
            throw ConfigError("flow.ramp_time", "must be positive");
          }
          track(p.q0);
          track(p.q1);
        } else {
          require_increasing(p.z, "flow.z");
          require_increasing(p.t, "flow.t");
          if (p.q.size() != p.t.size()) {
            throw ConfigError("flow.q", "needs one row per time sample");
          }
          for (const auto& row : p.q) {
            if (row.size() != p.z.size()) {
              throw ConfigError("flow.q", "needs one column per z sample");
            }
            for (double q : row) {
              track(q);
            }
            if (std::any_of(row.begin(), row.end(), [&](double q) { return q != row.front(); })) {
              axially_uniform_ = false;
            }
          }
        }
      },
      profile_);
}

double FlowField::operator()(const Vec2& x, double t) const {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return p.q0;
        } else if constexpr (std::is_same_v<T, TimeRamp>) {
          const double s = std::clamp(t / p.ramp_time, 0.0, 1.0);
          return p.q0 + (p.q1 - p.q0) * s;
        } else {
          const auto [it, wt] = bracket(p.t, t);
          const auto [iz, wz] = bracket(p.z, x.z);
          auto at = [&](std::size_t a, std::size_t b) {
            const std::size_t ta = std::min(a, p.t.size() - 1);
            const std::size_t zb = std::min(b, p.z.size() - 1);
            return p.q[ta][zb];
          };
          const double q0 = (1.0 - wz) * at(it, iz) + wz * at(it, iz + 1);
          const double q1 = (1.0 - wz) * at(it + 1, iz) + wz * at(it + 1, iz + 1);
          return (1.0 - wt) * q0 + wt * q1;
        }
      },
      profile_);
}

InletSchedule::InletSchedule(std::vector<std::pair<double, double>> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw ConfigError("inlet.schedule", "must contain at least one sample");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i].first) || !std::isfinite(samples_[i].second)) {
      throw ConfigError("inlet.schedule", "samples must be finite");
    }
    if (i > 0 && !(samples_[i].first > samples_[i - 1].first)) {
      throw ConfigError("inlet.schedule", "times must be strictly increasing");
    }
  }
}

double InletSchedule::operator()(double t) const {
  if (t <= samples_.front().first) {
    return samples_.front().second;
  }
  if (t >= samples_.back().first) {
    return samples_.back().second;
  }
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const auto& s) { return v < s.first; });
  const auto& [t1, v1] = *it;
  const auto& [t0, v0] = *(it - 1);
  return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

double InletSchedule::sup(double final_time) const {
  double s = std::max(std::abs((*this)(0.0)), std::abs((*this)(final_time)));
  for (const auto& [t, v] : samples_) {
    if (t > 0.0 && t < final_time) {
      s = std::max(s, std::abs(v));
    }
  }
  return s;
}

double InletSchedule::min(double final_time) const {
  double m = std::min((*this)(0.0), (*this)(final_time));
  for (const auto& [t, v] : samples_) {
    if (t > 0.0 && t < final_time) {
      m = std::min(m, v);
    }
  }
  return m;
}

double InletSchedule::l2_norm_squared(double final_time) const {
  std::vector<double> knots{0.0};
  for (const auto& [t, v] : samples_) {
    if (t > 0.0 && t < final_time) {
      knots.push_back(t);
    }
  }
  knots.push_back(final_time);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = (*this)(knots[i]);
    const double b = (*this)(knots[i + 1]);
    total += (knots[i + 1] - knots[i]) * (a * a + a * b + b * b) / 3.0;
  }
  return total;
}

}  // namespace bioreactor
