#include "bioreactor/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bioreactor/error.hpp"

namespace bioreactor {

namespace {

constexpr double kGoldenTolerance = 1e-10;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string("kinetics.") + name, "must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(KineticsKind kind) {
  switch (kind) {
    case KineticsKind::Monod: return "monod";
    case KineticsKind::Haldane: return "haldane";
    case KineticsKind::CappedLinear: return "capped_linear";
    case KineticsKind::Zero: return "zero";
  }
  return "unknown";
}

GrowthRateModel::GrowthRateModel(KineticsKind kind, double p0, double p1, double p2)
    : kind_(kind), p0_(p0), p1_(p1), p2_(p2) {
  switch (kind_) {
    case KineticsKind::Zero:
      break;
    case KineticsKind::Monod:
      sup_ = p0_;
      lipschitz_ = p0_ / p1_;
      break;
    case KineticsKind::CappedLinear:
      sup_ = p1_;
      lipschitz_ = p0_;
      argmax_ = p1_ / p0_;
      break;
    case KineticsKind::Haldane: {
      const double upper = 1e3 * std::max(p1_, p2_);
      argmax_ = golden_section_max([this](double s) { return raw(s); }, 0.0, upper, kGoldenTolerance);
      sup_ = raw(argmax_);
      // mu' is positive and decreasing up to the maximizer, so its largest
      // value there is mu'(0); beyond it the slope is negative.
      const double rising = p0_ / p1_;
      const double s_fall = golden_section_max([this](double s) { return -derivative(s); }, argmax_, upper,
                                               kGoldenTolerance);
      const double falling = -derivative(s_fall);
      lipschitz_ = std::max(rising, falling) * (1.0 + 1e-9);
      break;
    }
  }
}

GrowthRateModel GrowthRateModel::zero() { return GrowthRateModel{}; }

GrowthRateModel GrowthRateModel::monod(double mu_max, double half_saturation) {
  require_positive(mu_max, "mu_max");
  require_positive(half_saturation, "half_saturation");
  return GrowthRateModel(KineticsKind::Monod, mu_max, half_saturation, 0.0);
}

GrowthRateModel GrowthRateModel::haldane(double mu_max, double half_saturation, double inhibition) {
  require_positive(mu_max, "mu_max");
  require_positive(half_saturation, "half_saturation");
  require_positive(inhibition, "inhibition");
  return GrowthRateModel(KineticsKind::Haldane, mu_max, half_saturation, inhibition);
}

GrowthRateModel GrowthRateModel::capped_linear(double slope, double cap) {
  require_positive(slope, "slope");
  require_positive(cap, "cap");
  return GrowthRateModel(KineticsKind::CappedLinear, slope, cap, 0.0);
}

double GrowthRateModel::raw(double s) const noexcept {
  if (s <= 0.0) {
    return 0.0;
  }
  switch (kind_) {
    case KineticsKind::Zero: return 0.0;
    case KineticsKind::Monod: return p0_ * s / (p1_ + s);
    case KineticsKind::Haldane: return p0_ * s / (p1_ + s + s * s / p2_);
    case KineticsKind::CappedLinear: return std::min(p0_ * s, p1_);
  }
  return 0.0;
}

double GrowthRateModel::eval(double s) const {
  if (!std::isfinite(s)) {
    throw InvalidStateError("growth rate evaluated at a non-finite concentration");
  }
  return raw(s);
}

double GrowthRateModel::derivative(double s) const {
  if (s < 0.0) {
    return 0.0;
  }
  switch (kind_) {
    case KineticsKind::Zero: return 0.0;
    case KineticsKind::Monod: {
      const double den = p1_ + s;
      return p0_ * p1_ / (den * den);
    }
    case KineticsKind::Haldane: {
      const double den = p1_ + s + s * s / p2_;
      return p0_ * (p1_ - s * s / p2_) / (den * den);
    }
    case KineticsKind::CappedLinear: return p0_ * s < p1_ ? p0_ : 0.0;
  }
  return 0.0;
}

double eval_mu(const GrowthRateModel& model, double s) { return model.eval(s); }
double mu_sup(const GrowthRateModel& model) { return model.sup_norm(); }
double mu_lipschitz(const GrowthRateModel& model) { return model.lipschitz(); }

}  // namespace bioreactor
