#include "holo/geometry.hpp"

#include "holo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace holo::geometry {

namespace {

// Relative slack for closed-set membership tests evaluated in floating point.
constexpr double kBoundarySlack = 8 * std::numeric_limits<double>::epsilon();

}  // namespace

BernsteinEllipse::BernsteinEllipse(double rho) : rho_(rho) {
  if (!(rho > 1.0) || !std::isfinite(rho)) {
    throw DomainError("Bernstein ellipse needs rho > 1, got " + std::to_string(rho));
  }
}

double BernsteinEllipse::semi_minor() const noexcept { return semi_minor_length(rho_); }
double BernsteinEllipse::semi_major() const noexcept { return semi_major_length(rho_); }

Complex BernsteinEllipse::boundary_point(double theta) const {
  const Complex w = std::polar(rho_, theta);
  return 0.5 * (w + 1.0 / w);
}

Stadium::Stadium(double radius) : radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw DomainError("stadium radius must be positive, got " + std::to_string(radius));
  }
}

void AdmissibleProfile::validate() const {
  if (!(eps > 0.0)) throw DomainError("profile eps must be positive");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("profile p must lie in (0, 1]");
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!(b[j] > 0.0) || !std::isfinite(b[j])) {
      throw DomainError("profile b_" + std::to_string(j + 1) + " must be positive and finite");
    }
    if (j > 0 && b[j] > b[j - 1]) {
      throw DomainError("profile b must be non-increasing (b_" + std::to_string(j + 1) + " > b_" +
                        std::to_string(j) + ")");
    }
  }
}

double AdmissibleProfile::power_sum() const {
  double sum = 0.0;
  for (double bj : b) sum += std::pow(bj, p);
  return sum;
}

double semi_minor_length(double rho) { return 0.5 * (rho - 1.0 / rho); }
double semi_major_length(double rho) { return 0.5 * (rho + 1.0 / rho); }

double distance_to_unit_segment(Complex z) {
  const double x = std::clamp(z.real(), -1.0, 1.0);
  return std::abs(z - Complex(x, 0.0));
}

double admissibility_budget(std::span<const double> rho, const AdmissibleProfile& profile,
                            AdmissibilityForm form) {
  if (rho.size() > profile.b.size()) {
    throw DomainError("rho has " + std::to_string(rho.size()) +
                      " entries but the profile is truncated at " +
                      std::to_string(profile.b.size()));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (!(rho[j] > 1.0)) {
      throw DomainError("rho_" + std::to_string(j + 1) + " must exceed 1");
    }
    const double term = profile.b[j] * (rho[j] - 1.0);
    total = form == AdmissibilityForm::Sum ? total + term : std::max(total, term);
  }
  return total;
}

bool is_admissible(std::span<const double> rho, const AdmissibleProfile& profile,
                   AdmissibilityForm form) {
  profile.validate();
  return admissibility_budget(rho, profile, form) <= profile.eps * (1.0 + kBoundarySlack);
}

bool ellipse_contains(const BernsteinEllipse& e, Complex z) {
  const double focal_sum = std::abs(z - 1.0) + std::abs(z + 1.0);
  const double bound = e.rho() + 1.0 / e.rho();
  return focal_sum <= bound * (1.0 + kBoundarySlack);
}

bool stadium_contains(const Stadium& st, Complex z) {
  return distance_to_unit_segment(z) <= st.radius() * (1.0 + kBoundarySlack);
}

InclusionCheck ellipse_in_stadium(const BernsteinEllipse& e, const Stadium& st,
                                  std::size_t samples) {
  if (samples < 64) throw DomainError("ellipse_in_stadium needs at least 64 samples");
  InclusionCheck out;
  out.sampled = true;
  for (std::size_t k = 0; k < samples; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(samples);
    const Complex z = e.boundary_point(theta);
    out.max_distance = std::max(out.max_distance, distance_to_unit_segment(z));
    if (!stadium_contains(st, z)) out.sampled = false;
  }
  out.minor_axis = e.semi_minor() <= st.radius();
  out.major_axis = e.semi_major() - 1.0 <= st.radius();
  return out;
}

}  // namespace holo::geometry
