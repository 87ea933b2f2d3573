#pragma once

#include <string_view>

namespace bioreactor {

enum class KineticsKind { Monod, Haldane, CappedLinear, Zero };

std::string_view to_string(KineticsKind kind);

/**
 * Specific growth rate mu(s) of the biomass.
 *
 * Every model is bounded, Lipschitz, vanishes at s = 0 and is positive for
 * s > 0. Negative arguments evaluate to zero, so the constants reported by
 * sup_norm() and lipschitz() hold on the whole real line.
 *
 * Instances are immutable once constructed.
 */
class GrowthRateModel {
 public:
  /// The Zero model (no reaction).
  GrowthRateModel() = default;

  static GrowthRateModel zero();
  /// mu_max * s / (K_S + s)
  static GrowthRateModel monod(double mu_max, double half_saturation);
  /// mu_max * s / (K_S + s + s^2 / K_I)
  static GrowthRateModel haldane(double mu_max, double half_saturation, double inhibition);
  /// min(slope * s, cap)
  static GrowthRateModel capped_linear(double slope, double cap);

  KineticsKind kind() const noexcept { return kind_; }

  double mu_max() const noexcept { return p0_; }
  double half_saturation() const noexcept { return p1_; }
  double inhibition() const noexcept { return p2_; }
  double slope() const noexcept { return p0_; }
  double cap() const noexcept { return p1_; }

  /// Throws InvalidStateError for non-finite s.
  double eval(double s) const;
  double operator()(double s) const { return eval(s); }

  /// Derivative for s > 0 (right derivative at 0, zero for s < 0).
  double derivative(double s) const;

  /// Supremum of mu over the real line.
  double sup_norm() const noexcept { return sup_; }
  /// A valid Lipschitz constant over the real line.
  double lipschitz() const noexcept { return lipschitz_; }

  /// Location of the supremum for Haldane; mu is attained there.
  double argmax() const noexcept { return argmax_; }

  friend bool operator==(const GrowthRateModel& a, const GrowthRateModel& b) {
    return a.kind_ == b.kind_ && a.p0_ == b.p0_ && a.p1_ == b.p1_ && a.p2_ == b.p2_;
  }

 private:
  GrowthRateModel(KineticsKind kind, double p0, double p1, double p2);
  double raw(double s) const noexcept;

  KineticsKind kind_ = KineticsKind::Zero;
  double p0_ = 0.0;
  double p1_ = 0.0;
  double p2_ = 0.0;
  double sup_ = 0.0;
  double lipschitz_ = 0.0;
  double argmax_ = 0.0;
};

double eval_mu(const GrowthRateModel& model, double s);
double mu_sup(const GrowthRateModel& model);
double mu_lipschitz(const GrowthRateModel& model);

/// Maximizes a unimodal f on [lo, hi]; returns the maximizer.
double golden_section_max(auto&& f, double lo, double hi, double rel_tol);

}  // namespace bioreactor

#include "bioreactor/detail/golden_section.hpp"
