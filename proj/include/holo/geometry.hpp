#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace holo::geometry {

using Complex = std::complex<double>;

/// Image of the annulus 1 <= |w| < rho under the Joukowski map (w + 1/w)/2.
class BernsteinEllipse {
 public:
  explicit BernsteinEllipse(double rho);

  double rho() const noexcept { return rho_; }
  double semi_minor() const noexcept;  ///< (rho - 1/rho) / 2
  double semi_major() const noexcept;  ///< (rho + 1/rho) / 2
  /// Boundary point for w = rho e^{i theta}.
  Complex boundary_point(double theta) const;

 private:
  double rho_;
};

/// Closed neighbourhood {z : dist(z, [-1,1]) <= radius} of the unit segment.
class Stadium {
 public:
  explicit Stadium(double radius);
  double radius() const noexcept { return radius_; }

 private:
  double radius_;
};

/// Decreasing positive sequence b with budget eps, truncated to b.size() terms.
struct AdmissibleProfile {
  std::vector<double> b;
  double eps = 0.25;
  double p = 1.0;

  /// Throws DomainError unless b is positive and non-increasing, eps > 0, p in (0,1].
  void validate() const;
  double power_sum() const;  ///< sum_j b_j^p over the truncation
};

/// The admissibility test either uses the budget sum or only its largest term.
enum class AdmissibilityForm { Sum, Max };

double semi_minor_length(double rho);
double semi_major_length(double rho);

/// Euclidean distance from z to the segment [-1, 1].
double distance_to_unit_segment(Complex z);

/// sum_j b_j (rho_j - 1) (or the max over j), coordinates beyond rho.size()
/// contribute nothing.
double admissibility_budget(std::span<const double> rho, const AdmissibleProfile& profile,
                            AdmissibilityForm form = AdmissibilityForm::Sum);

/// Throws DomainError if some rho_j <= 1 or rho is longer than the profile.
bool is_admissible(std::span<const double> rho, const AdmissibleProfile& profile,
                   AdmissibilityForm form = AdmissibilityForm::Sum);

/// Focal-sum test |z-1| + |z+1| <= rho + 1/rho (boundary counts as inside).
bool ellipse_contains(const BernsteinEllipse& e, Complex z);
bool stadium_contains(const Stadium& st, Complex z);

struct InclusionCheck {
  bool sampled = false;     ///< every sampled boundary point inside the stadium
  bool minor_axis = false;  ///< R_minor(rho) <= radius
  bool major_axis = false;  ///< R_major(rho) - 1 <= radius
  double max_distance = 0;  ///< largest sampled distance to [-1,1]

  bool analytic() const { return minor_axis && major_axis; }
  bool included() const { return sampled && analytic(); }
  bool disagreement() const { return sampled != analytic(); }
};

/// Checks E_rho inside the stadium by sampling `samples` (>= 64) boundary points
/// and by the two axis inequalities.
InclusionCheck ellipse_in_stadium(const BernsteinEllipse& e, const Stadium& st,
                                  std::size_t samples = 256);

}  // namespace holo::geometry
