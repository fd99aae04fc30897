#include "holo/fields.hpp"

#include "holo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace holo::fields {

ModeShape parse_mode_shape(std::string_view name) {
  if (name == "fourier") return ModeShape::Fourier;
  if (name == "bump") return ModeShape::Bump;
  if (name == "constant") return ModeShape::Constant;
  throw ConfigError("unknown mode shape '" + std::string(name) + "' (expected fourier|bump|constant)");
}

std::string_view to_string(ModeShape shape) {
  switch (shape) {
    case ModeShape::Fourier: return "fourier";
    case ModeShape::Bump: return "bump";
    case ModeShape::Constant: return "constant";
  }
  return "?";
}

AffineField::AffineField(SpatialFn phi0, std::vector<SpatialFn> modes, std::vector<double> amplitudes)
    : phi0_(std::move(phi0)), modes_(std::move(modes)), amplitudes_(std::move(amplitudes)) {
  if (modes_.size() != amplitudes_.size()) {
    throw DomainError("affine field: one amplitude per mode required");
  }
  for (double c : amplitudes_) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("affine field amplitudes must be positive");
  }
}

AffineField AffineField::constant(double value) {
  return AffineField([value](double) { return value; }, {}, {});
}

AffineField AffineField::sampled(SpatialFn phi0, std::vector<SpatialFn> modes,
                                 std::span<const double> sample_points) {
  std::vector<double> amps;
  amps.reserve(modes.size());
  for (const auto& m : modes) {
    double sup = 0.0;
    for (double x : sample_points) sup = std::max(sup, std::abs(m(x)));
    amps.push_back(sup);
  }
  return AffineField(std::move(phi0), std::move(modes), std::move(amps));
}

std::vector<Complex> AffineField::eval(std::span<const Complex> y, std::span<const double> x) const {
  if (y.size() > modes_.size()) {
    throw DomainError("parameter vector of length " + std::to_string(y.size()) +
                      " exceeds field truncation " + std::to_string(modes_.size()));
  }
  std::vector<Complex> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Complex v = phi0_(x[i]);
    for (std::size_t j = 0; j < y.size(); ++j) v += y[j] * modes_[j](x[i]);
    out[i] = v;
  }
  return out;
}

FieldTable::FieldTable(const AffineField& field, std::span<const double> x) {
  base.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) base[i] = field.base(x[i]);
  modes.resize(field.truncation());
  for (std::size_t j = 0; j < modes.size(); ++j) {
    modes[j].resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) modes[j][i] = field.mode(j, x[i]);
  }
}

void FieldTable::eval(std::span<const Complex> y, std::vector<Complex>& out) const {
  out.assign(base.begin(), base.end());
  const std::size_t s = std::min(y.size(), modes.size());
  for (std::size_t j = 0; j < s; ++j) {
    if (y[j] == Complex(0.0)) continue;
    const auto& col = modes[j];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[j] * col[i];
  }
}

namespace {

SpatialFn shape_function(ModeShape shape, std::size_t j, std::size_t s, double scale) {
  switch (shape) {
    case ModeShape::Fourier: {
      const double k = static_cast<double>(j) * std::numbers::pi;
      return [k, scale](double x) { return scale * std::sin(k * x); };
    }
    case ModeShape::Bump: {
      const double centre = (static_cast<double>(j) - 0.5) / static_cast<double>(s);
      const double half_width = 1.0 / static_cast<double>(s);
      return [centre, half_width, scale](double x) {
        return scale * std::max(0.0, 1.0 - std::abs(x - centre) / half_width);
      };
    }
    case ModeShape::Constant:
      return [scale](double) { return scale; };
  }
  return {};
}

}  // namespace

AffineField make_decay_field(const DecaySpec& spec) {
  if (!(spec.sigma > 1.0)) throw ConfigError("decay field needs sigma > 1");
  if (spec.amplitude < 0.0) throw ConfigError("decay field amplitude must be non-negative");
  const double base = spec.base;
  if (spec.amplitude == 0.0 || spec.s == 0) return AffineField::constant(base);

  double partial = 0.0;
  for (std::size_t j = 1; j <= spec.s; ++j) partial += std::pow(static_cast<double>(j), -spec.sigma);
  if (spec.require_positive && !(base > spec.amplitude * partial)) {
    std::ostringstream msg;
    msg << "decay field not uniformly positive: base " << base << " <= amplitude * sum j^-sigma = "
        << spec.amplitude * partial;
    throw ConfigError(msg.str());
  }

  std::vector<SpatialFn> modes;
  std::vector<double> amps;
  for (std::size_t j = 1; j <= spec.s; ++j) {
    const double c = spec.amplitude * std::pow(static_cast<double>(j), -spec.sigma);
    modes.push_back(shape_function(spec.shape, j, spec.s, c));
    amps.push_back(c);
  }
  return AffineField([base](double) { return base; }, std::move(modes), std::move(amps));
}

std::vector<double> sampling_grid(std::size_t n_cells) {
  if (n_cells == 0) throw DomainError("sampling grid needs at least one cell");
  std::vector<double> x(2 * n_cells + 1);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / static_cast<double>(2 * n_cells);
  return x;
}

namespace {

struct Envelope {
  double low = 0, high = 0, sup_abs = 0, low_node = 0;
};

Envelope envelope(const AffineField& f, std::size_t s, std::span<const double> pts) {
  Envelope e;
  e.low = std::numeric_limits<double>::infinity();
  e.high = -std::numeric_limits<double>::infinity();
  const std::size_t used = std::min(s, f.truncation());
  for (double x : pts) {
    double spread = 0.0;
    for (std::size_t j = 0; j < used; ++j) spread += std::abs(f.mode(j, x));
    const double b = f.base(x);
    if (b - spread < e.low) {
      e.low = b - spread;
      e.low_node = x;
    }
    e.high = std::max(e.high, b + spread);
    e.sup_abs = std::max(e.sup_abs, std::abs(b) + spread);
  }
  return e;
}

}  // namespace

FieldAssumptions verify_assumptions(const AffineField& A, const AffineField& B,
                                    const AffineField& C, std::size_t s,
                                    std::span<const double> sample_points) {
  if (sample_points.empty()) throw DomainError("verify_assumptions needs sample points");
  const Envelope a = envelope(A, s, sample_points);
  const Envelope b = envelope(B, s, sample_points);
  const Envelope c = envelope(C, s, sample_points);
  if (!(a.low > 0.0)) {
    std::ostringstream msg;
    msg << "coefficient lower-bound assumption violated: min over the cube of A(x,y) is " << a.low
        << " <= 0 at x = " << a.low_node;
    throw AssumptionError(msg.str(), a.low_node);
  }
  if (!(c.low > 0.0)) {
    std::ostringstream msg;
    msg << "coefficient lower-bound assumption violated: min over the cube of C(x,y) is " << c.low
        << " <= 0 at x = " << c.low_node;
    throw AssumptionError(msg.str(), c.low_node);
  }
  FieldAssumptions out;
  out.A_low = a.low;
  out.C_low = c.low;
  out.D_low = std::min(a.low, c.low);
  out.A_bar = a.sup_abs;
  out.B_bar = b.sup_abs;
  out.C_bar = c.sup_abs;
  out.s = s;
  out.sample_points = sample_points.size();
  return out;
}

std::vector<double> combined_amplitudes(std::span<const AffineField* const> fields, std::size_t s) {
  std::vector<double> c(s, 0.0);
  for (const AffineField* f : fields) {
    const auto& amps = f->amplitudes();
    for (std::size_t j = 0; j < std::min(s, amps.size()); ++j) c[j] = std::max(c[j], amps[j]);
  }
  return c;
}

}  // namespace holo::fields
