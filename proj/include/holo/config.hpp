#pragma once

#include "holo/certificate.hpp"
#include "holo/fields.hpp"
#include "holo/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace holo::config {

struct FieldConfig {
  double base = 1.0;
  double amplitude = 0.0;
  double sigma = 2.0;
  fields::ModeShape shape = fields::ModeShape::Fourier;
  /// Enforce base > amplitude * sum j^-sigma at construction (A and C default
  /// on). When off, positivity is left to the assumption check.
  bool enforce_positive = true;
};

struct QmcConfig {
  std::vector<std::uint32_t> N{251, 503, 1009, 2003};
  std::size_t R = 16;
  std::optional<std::size_t> s;  ///< defaults to the problem truncation
  std::string functional = "lambda";  ///< lambda | mean_u
  std::string weights = "certificate";  ///< certificate | amplitude
  bool continuation = false;
};

struct RunConfig {
  ProblemKind kind = ProblemKind::Linear;
  std::size_t n_cells = 128;
  std::size_t s = 8;
  double eta = 1.0;
  int p = 3;
  FieldConfig A, B, C;
  fem::SolverOptions solver;
  double damping = 0.5;
  int max_scf = 500;
  cert::GammaPolicy gamma;
  cert::CertOptions certificate;
  QmcConfig qmc;
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  std::string source;  ///< raw TOML text
  std::string hash;    ///< FNV-1a 64 of the raw text, 16 hex digits
};

std::string fnv1a_hex(std::string_view text);

/// Parses TOML text; unknown sections or keys and out-of-range values raise ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

fields::AffineField make_field(const FieldConfig& f, std::size_t s);
ParametricProblem build_problem(const RunConfig& cfg);

struct GeometryProfile {
  std::vector<double> b;
  std::vector<double> rho;
  double eps = 0.25;
  double p = 1.0;
  bool max_form = false;
  std::size_t samples = 256;
  std::string source;
  std::string hash;
};

GeometryProfile parse_profile(std::string_view text);
GeometryProfile load_profile(const std::string& path);

std::string read_file(const std::string& path);

/// "major.minor.patch" of the bundled TOML parser.
std::string toml_version();

}  // namespace holo::config
