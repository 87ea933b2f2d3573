#pragma once

#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bioreactor/geometry.hpp"

namespace bioreactor {

/// Axial flow speed Q(x, t) >= 0 [m/s]; the velocity field is (0, 0, -Q).
class FlowField {
 public:
  struct Constant {
    double q0 = 0.0;
    friend bool operator==(const Constant&, const Constant&) = default;
  };
  /// Linear ramp from q0 at t = 0 to q1 at t = ramp_time, constant afterwards.
  struct TimeRamp {
    double q0 = 0.0;
    double q1 = 0.0;
    double ramp_time = 1.0;
    friend bool operator==(const TimeRamp&, const TimeRamp&) = default;
  };
  /// Bilinear interpolation of samples q[i_t][i_z] over a z grid and a t grid,
  /// held constant outside the sampled range.
  struct AxiallyVarying {
    std::vector<double> z;
    std::vector<double> t;
    std::vector<std::vector<double>> q;
    friend bool operator==(const AxiallyVarying&, const AxiallyVarying&) = default;
  };
  using Profile = std::variant<Constant, TimeRamp, AxiallyVarying>;

  FlowField() = default;
  explicit FlowField(Profile profile);

  static FlowField constant(double q0) { return FlowField(Constant{q0}); }
  static FlowField ramp(double q0, double q1, double ramp_time) { return FlowField(TimeRamp{q0, q1, ramp_time}); }

  const Profile& profile() const noexcept { return profile_; }

  double operator()(const Vec2& x, double t) const;

  /// sup |Q| over space and time.
  double sup() const noexcept { return sup_; }
  /// sup of the negative part max(-Q, 0).
  double sup_negative_part() const noexcept { return sup_negative_; }
  /// True when dQ/dz vanishes identically, i.e. the velocity is solenoidal.
  bool axially_uniform() const noexcept { return axially_uniform_; }

  friend bool operator==(const FlowField& a, const FlowField& b) { return a.profile_ == b.profile_; }

 private:
  Profile profile_ = Constant{};
  double sup_ = 0.0;
  double sup_negative_ = 0.0;
  bool axially_uniform_ = true;
};

/// Piecewise linear inlet concentration S_e(t) [mol/m^3], constant beyond the samples.
class InletSchedule {
 public:
  InletSchedule() = default;
  explicit InletSchedule(std::vector<std::pair<double, double>> samples);
  static InletSchedule constant(double value) { return InletSchedule({{0.0, value}}); }

  const std::vector<std::pair<double, double>>& samples() const noexcept { return samples_; }

  double operator()(double t) const;

  /// sup |S_e| over [0, T].
  double sup(double final_time) const;
  /// min S_e over [0, T].
  double min(double final_time) const;
  /// Exact integral of S_e^2 over [0, T].
  double l2_norm_squared(double final_time) const;

  friend bool operator==(const InletSchedule&, const InletSchedule&) = default;

 private:
  std::vector<std::pair<double, double>> samples_{{0.0, 0.0}};
};

}  // namespace bioreactor
