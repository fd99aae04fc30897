#pragma once

#include "holo/combinatorics.hpp"
#include "holo/derivatives.hpp"
#include "holo/geometry.hpp"
#include "holo/problem.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace holo::cert {

enum class GammaKind { Geometric, Power };

/// gamma_j = kappa * r^j (geometric) or kappa * j^sigma_g (power), j 1-based,
/// with kappa chosen so that Gamma = sum 1/gamma_j = target_fraction * cap.
struct GammaPolicy {
  GammaKind kind = GammaKind::Power;
  double param = 1.0;
  double target_fraction = 0.9;
};

GammaKind parse_gamma_kind(std::string_view name);
std::string_view to_string(GammaKind k);

std::vector<double> make_gamma(const GammaPolicy& policy, std::size_t s, double cap);
/// Linear rule: min(1, 4 D_low); factorial rule: 1.
double gamma_cap(combinatorics::AlphaRule rule, double D_low);
/// Throws AssumptionError unless sum 1/gamma_j < cap.
double check_gamma(std::span<const double> gamma, double cap);

struct CertOptions {
  std::size_t j_max = 8;        ///< coordinates used in the fit (clipped to s)
  unsigned n_max = 4;           ///< derivative orders used in the fit
  std::size_t fit_points = 20;  ///< seeded real y points for the fit
  std::size_t sample_budget = 200;  ///< stadium samples per coordinate for M_gamma
  std::uint64_t seed = 1;
  double margin = 1.1;
  double theta = 0.5;           ///< contour radius as a fraction of the stadium radius
  double fit_radius = 0.5;      ///< contour radius used while fitting zeta
  std::size_t Q = 64;
};

struct HoloCertificate {
  combinatorics::AlphaRule rule = combinatorics::AlphaRule::QuadrupleFactorial;
  double eps = 0.25;
  std::vector<double> c;      ///< field amplitudes c_j
  double zeta = 1.0;          ///< fitted constant, beta_j = zeta c_j
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<double> b;      ///< gamma_j beta_j
  double p = 1.0;             ///< smallest tabulated p with sum b_j^p <= p_budget
  double Gamma = 0.0;
  double Gamma_cap = 1.0;
  double M_lambda = 0.0;      ///< sup |lambda| over sampled H_gamma (and U)
  double M_u = 0.0;           ///< sup ||u||_{H1_0} over sampled H_gamma (and U)
  double lambda_bar = 0.0;    ///< sup |lambda| over sampled U
  double u_bar = 0.0;         ///< sup ||u||_{H1_0} over sampled U
  double D_low = 0.0;
  GammaPolicy policy;
  CertOptions options;
  std::size_t fit_samples = 0;
  std::size_t stadium_samples = 0;
  double fit_ratio_lambda = 0.0;  ///< max_{n,j,y} (|d^n lambda| / (lambda_bar alpha_n))^{1/n} / c_j
  double fit_ratio_u = 0.0;

  double M_gamma() const { return M_u; }
  std::size_t s() const { return beta.size(); }
  double stadium_radius(std::size_t j) const { return eps / b.at(j); }
};

HoloCertificate build_certificate(const ParametricProblem& problem, const GammaPolicy& policy,
                                  const CertOptions& opts = {});

struct CoordinateCheck {
  double rho = 1.0;
  double radius = 0.0;
  double R_minor = 0.0, R_major = 0.0;
  geometry::InclusionCheck inclusion;
};

struct AdmissibilityReport {
  double budget = 0.0;
  bool admissible = false;
  std::vector<CoordinateCheck> coords;
  bool all_included() const;
  bool pass() const { return admissible && all_included(); }
};

AdmissibilityReport check_admissibility_theorem(const HoloCertificate& cert, std::span<const double> rho);

struct BoundRow {
  deriv::MultiIndex nu;
  double measured_lambda = 0.0;
  double measured_u = 0.0;
  double predicted_lambda = 0.0;
  double predicted_u = 0.0;
  double worst_ratio = 0.0;  ///< max measured / predicted over both columns and all y
  std::size_t samples = 0;
  std::string error;         ///< measurement failure, if any
  bool pass = false;
};

struct BoundReport {
  std::vector<BoundRow> rows;
  bool all_pass() const;
};

/// M * nu! * prod_j (gamma_j beta_j / eps)^{nu_j}.
double predict(const HoloCertificate& cert, const deriv::MultiIndex& nu, double M);
BoundReport predict_mixed_bounds(const HoloCertificate& cert, std::span<const deriv::MultiIndex> nus);
BoundReport validate_bounds(const HoloCertificate& cert, const ParametricProblem& problem,
                            std::span<const std::vector<double>> y_samples,
                            std::span<const deriv::MultiIndex> nus);

/// Single-coordinate check |d_j^n lambda| <= lambda_bar alpha_n beta_j^n and the u analogue.
struct SingleCheck {
  std::size_t j = 0;
  unsigned n = 0;
  double measured_lambda = 0.0, bound_lambda = 0.0;
  double measured_u = 0.0, bound_u = 0.0;
  bool pass() const { return measured_lambda <= bound_lambda && measured_u <= bound_u; }
};
std::vector<SingleCheck> check_single_bounds(const HoloCertificate& cert, const ParametricProblem& problem,
                                             std::span<const double> y, std::size_t j_max, unsigned n_max);

/// Seeded reproducible points of [-1, 1]^s.
std::vector<std::vector<double>> seeded_points(std::size_t count, std::size_t s, std::uint64_t seed,
                                               double half_width = 1.0);

nlohmann::json to_json(const HoloCertificate& cert);
HoloCertificate certificate_from_json(const nlohmann::json& j);

}  // namespace holo::cert
