#include "entwb/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entwb/errors.hpp"
#include "entwb/numeric.hpp"
#include "entwb/quadrature.hpp"

namespace entwb {

namespace {

constexpr double kCellQuadTol = 1e-10;  // absolute tolerance per grid cell

double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

// Monotone bisection; the normal CDF is strictly increasing, so this is
// robust down to machine width.
double normal_quantile(double u, double mu, double sigma) {
  double lo = mu - 42.0 * sigma;
  double hi = mu + 42.0 * sigma;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (std::abs(lo) + sigma); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid, mu, sigma) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

DensitySpec DensitySpec::uniform(double a, double b, double window_tol) {
  if (!(a < b)) throw BadParams("uniform density: require a < b");
  if (window_tol < 0.0) throw BadParams("window_tol must be >= 0");
  DensitySpec s;
  s.family_ = DensityFamily::uniform;
  s.p1_ = a;
  s.p2_ = b;
  s.lo_ = a;
  s.hi_ = b;
  s.window_tol_ = window_tol;
  return s;
}

DensitySpec DensitySpec::normal(double mu, double sigma, double window_tol) {
  if (!(sigma > 0.0)) throw BadParams("normal density: require sigma > 0");
  if (!(window_tol > 0.0 && window_tol < 0.5)) {
    throw BadParams("normal density: window_tol must lie in (0, 0.5)");
  }
  DensitySpec s;
  s.family_ = DensityFamily::normal;
  s.p1_ = mu;
  s.p2_ = sigma;
  // Padded a little beyond the exact quantiles so the per-tail coverage
  // survives the rounding of cdf evaluations near 0 and 1.
  s.lo_ = normal_quantile(window_tol, mu, sigma) - 1e-4 * sigma;
  s.hi_ = normal_quantile(1.0 - window_tol, mu, sigma) + 1e-4 * sigma;
  s.window_tol_ = window_tol;
  return s;
}

DensitySpec DensitySpec::exponential(double lambda, double window_tol) {
  if (!(lambda > 0.0)) throw BadParams("exponential density: require lambda > 0");
  if (!(window_tol > 0.0 && window_tol < 1.0)) {
    throw BadParams("exponential density: window_tol must lie in (0, 1)");
  }
  DensitySpec s;
  s.family_ = DensityFamily::exponential;
  s.p1_ = lambda;
  s.lo_ = 0.0;
  s.hi_ = (-std::log(window_tol) + 1e-4) / lambda;
  s.window_tol_ = window_tol;
  return s;
}

DensitySpec DensitySpec::piecewise_linear(std::vector<Knot> knots,
                                          double window_tol) {
  if (knots.size() < 2) {
    throw BadParams("piecewise density: need at least two knots");
  }
  if (window_tol < 0.0) throw BadParams("window_tol must be >= 0");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (knots[i].f < -1e-12) {
      throw BadParams("piecewise density: negative value at knot " +
                      std::to_string(i));
    }
    knots[i].f = std::max(knots[i].f, 0.0);
    if (i > 0 && knots[i].x < knots[i - 1].x) {
      throw BadParams("piecewise density: knots must be sorted by x");
    }
  }
  DensitySpec s;
  s.family_ = DensityFamily::piecewise_linear;
  s.knots_ = std::move(knots);
  s.knot_cdf_.resize(s.knots_.size());
  CompensatedSum mass;
  s.knot_cdf_[0] = 0.0;
  for (std::size_t i = 1; i < s.knots_.size(); ++i) {
    const double w = s.knots_[i].x - s.knots_[i - 1].x;
    mass.add(0.5 * w * (s.knots_[i].f + s.knots_[i - 1].f));
    s.knot_cdf_[i] = mass.value();
  }
  if (std::abs(mass.value() - 1.0) > kMassTol) {
    throw BadParams("piecewise density: total mass is " +
                    std::to_string(mass.value()));
  }
  s.lo_ = s.knots_.front().x;
  s.hi_ = s.knots_.back().x;
  s.window_tol_ = window_tol;
  return s;
}

double DensitySpec::pdf(double x) const {
  switch (family_) {
    case DensityFamily::uniform:
      return (x >= p1_ && x <= p2_) ? 1.0 / (p2_ - p1_) : 0.0;
    case DensityFamily::normal:
      return normal_pdf(x, p1_, p2_);
    case DensityFamily::exponential:
      return x >= 0.0 ? p1_ * std::exp(-p1_ * x) : 0.0;
    case DensityFamily::piecewise_linear: {
      if (x < knots_.front().x || x > knots_.back().x) return 0.0;
      // Right-continuous at repeated abscissae.
      auto it = std::upper_bound(
          knots_.begin(), knots_.end(), x,
          [](double v, const Knot& k) { return v < k.x; });
      if (it == knots_.begin()) return knots_.front().f;
      if (it == knots_.end()) return knots_.back().f;
      const Knot& right = *it;
      const Knot& left = *(it - 1);
      if (right.x == left.x) return right.f;
      const double t = (x - left.x) / (right.x - left.x);
      return left.f + t * (right.f - left.f);
    }
  }
  return 0.0;
}

double DensitySpec::cdf(double x) const {
  switch (family_) {
    case DensityFamily::uniform:
      if (x <= p1_) return 0.0;
      if (x >= p2_) return 1.0;
      return (x - p1_) / (p2_ - p1_);
    case DensityFamily::normal:
      return normal_cdf(x, p1_, p2_);
    case DensityFamily::exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-p1_ * x);
    case DensityFamily::piecewise_linear: {
      if (x <= knots_.front().x) return 0.0;
      if (x >= knots_.back().x) return 1.0;
      auto it = std::upper_bound(
          knots_.begin(), knots_.end(), x,
          [](double v, const Knot& k) { return v < k.x; });
      const std::size_t j = static_cast<std::size_t>(it - knots_.begin());
      const Knot& left = knots_[j - 1];
      const double base = knot_cdf_[j - 1];
      if (knots_[j].x == left.x) return base;
      const double fx = pdf(x);
      return base + 0.5 * (x - left.x) * (left.f + fx);
    }
  }
  return 0.0;
}

double DensitySpec::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw OutOfRange("quantile: argument must lie in [0, 1]");
  }
  switch (family_) {
    case DensityFamily::uniform:
      return p1_ + u * (p2_ - p1_);
    case DensityFamily::normal:
      return normal_quantile(u, p1_, p2_);
    case DensityFamily::exponential:
      return u >= 1.0 ? hi_ : -std::log1p(-u) / p1_;
    case DensityFamily::piecewise_linear: {
      if (u <= 0.0) return knots_.front().x;
      if (u >= 1.0) return knots_.back().x;
      std::size_t j = 1;
      while (j + 1 < knots_.size() && knot_cdf_[j] < u) ++j;
      const Knot& a = knots_[j - 1];
      const Knot& b = knots_[j];
      const double m = u - knot_cdf_[j - 1];
      const double w = b.x - a.x;
      if (w <= 0.0 || m <= 0.0) return a.x;
      const double slope = (b.f - a.f) / w;
      double d;
      if (std::abs(slope) < 1e-300) {
        d = a.f > 0.0 ? m / a.f : w;
      } else {
        // Solve a.f d + slope d^2 / 2 = m for d in [0, w].
        const double disc = std::max(a.f * a.f + 2.0 * slope * m, 0.0);
        d = (-a.f + std::sqrt(disc)) / slope;
      }
      return a.x + std::clamp(d, 0.0, w);
    }
  }
  return 0.0;
}

double DensitySpec::mass_between(double a, double b) const {
  if (b <= a) return 0.0;
  switch (family_) {
    case DensityFamily::uniform: {
      const double overlap = std::min(b, p2_) - std::max(a, p1_);
      return overlap > 0.0 ? overlap / (p2_ - p1_) : 0.0;
    }
    case DensityFamily::normal:
      return integrate([this](double t) { return pdf(t); }, a, b,
                       kCellQuadTol);
    case DensityFamily::exponential: {
      const double left = std::max(a, 0.0);
      if (b <= left) return 0.0;
      return integrate([this](double t) { return pdf(t); }, left, b,
                       kCellQuadTol);
    }
    case DensityFamily::piecewise_linear:
      // Trapezoid pieces are exact; reuse the closed-form CDF.
      return cdf(b) - cdf(a);
  }
  return 0.0;
}

DensitySpec make_density_spec(DensityFamily family,
                              const std::vector<double>& params,
                              double window_tol) {
  switch (family) {
    case DensityFamily::uniform:
      if (params.size() != 2) throw BadParams("uniform expects {a, b}");
      return DensitySpec::uniform(params[0], params[1], window_tol);
    case DensityFamily::normal:
      if (params.size() != 2) throw BadParams("normal expects {mu, sigma}");
      return DensitySpec::normal(params[0], params[1], window_tol);
    case DensityFamily::exponential:
      if (params.size() != 1) throw BadParams("exponential expects {lambda}");
      return DensitySpec::exponential(params[0], window_tol);
    case DensityFamily::piecewise_linear: {
      if (params.size() < 4 || params.size() % 2 != 0) {
        throw BadParams("piecewise expects {x0, f0, x1, f1, ...}");
      }
      std::vector<Knot> knots;
      for (std::size_t i = 0; i < params.size(); i += 2) {
        knots.push_back({params[i], params[i + 1]});
      }
      return DensitySpec::piecewise_linear(std::move(knots), window_tol);
    }
  }
  throw BadParams("unknown density family");
}

double transport_map(const DensitySpec& spec_x, const DensitySpec& spec_y,
                     double x) {
  return spec_y.quantile(spec_x.cdf(x));
}

DensitySpec strictify(const DensitySpec& spec,
                      const std::vector<std::pair<double, double>>& zero_intervals) {
  if (zero_intervals.empty()) return spec;

  std::vector<std::pair<double, double>> gaps = zero_intervals;
  std::sort(gaps.begin(), gaps.end());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const auto [x0, d] = gaps[i];
    if (!(d > 0.0)) throw BadParams("strictify: gap length must be positive");
    if (x0 < spec.lo() - 1e-12 || x0 + d > spec.hi() + 1e-12) {
      throw OutOfRange("strictify: gap outside the support window");
    }
    if (i > 0 && x0 < gaps[i - 1].first + gaps[i - 1].second) {
      throw BadParams("strictify: gaps must be disjoint");
    }
    if (spec.mass_between(x0, x0 + d) > 1e-12 ||
        spec.pdf(x0 + 0.5 * d) > 1e-12) {
      throw NotZeroOnInterval("strictify: density is not zero on [" +
                              std::to_string(x0) + ", " +
                              std::to_string(x0 + d) + "]");
    }
  }
  // Strictly positive families never reach this point (the mass test
  // rejects any interior gap), so the input is piecewise-linear.
  if (spec.family() != DensityFamily::piecewise_linear) {
    throw NotZeroOnInterval("strictify: no removable gap in this family");
  }

  std::vector<Knot> squeezed;
  for (const Knot& k : spec.knots()) {
    double shift = 0.0;
    bool inside = false;
    for (const auto& [x0, d] : gaps) {
      if (k.x > x0 && k.x < x0 + d) inside = true;
      if (k.x >= x0 + d) shift += d;
    }
    if (!inside) squeezed.push_back({k.x - shift, k.f});
  }
  // Collapse runs at one abscissa to their outermost values.
  std::vector<Knot> cleaned;
  for (std::size_t i = 0; i < squeezed.size();) {
    std::size_t j = i;
    while (j + 1 < squeezed.size() && squeezed[j + 1].x == squeezed[i].x) ++j;
    cleaned.push_back(squeezed[i]);
    if (j > i && squeezed[j].f != squeezed[i].f) cleaned.push_back(squeezed[j]);
    i = j + 1;
  }
  return DensitySpec::piecewise_linear(std::move(cleaned), spec.window_tol());
}

namespace {

struct Axis {
  std::int64_t first = 0;
  std::vector<double> masses;
};

Axis discretize_axis(const DensitySpec& spec, int n) {
  Axis axis;
  const double n_d = static_cast<double>(n);
  axis.first = static_cast<std::int64_t>(std::floor(spec.lo() * n_d));
  std::int64_t last = static_cast<std::int64_t>(std::ceil(spec.hi() * n_d));
  if (last <= axis.first) last = axis.first + 1;
  const std::int64_t count = last - axis.first;
  axis.masses.resize(static_cast<std::size_t>(count));
  for (std::int64_t r = 0; r < count; ++r) {
    const double a = static_cast<double>(axis.first + r) / n_d;
    const double b = static_cast<double>(axis.first + r + 1) / n_d;
    axis.masses[static_cast<std::size_t>(r)] =
        std::max(spec.mass_between(a, b), 0.0);
  }
  return axis;
}

MarginalDistribution axis_marginal(std::vector<double> masses) {
  CompensatedSum sum;
  for (double m : masses) sum.add(m);
  return make_truncated_marginal(std::move(masses),
                                 std::max(0.0, 1.0 - sum.value()));
}

double extrapolate_limit(const std::vector<int>& resolutions,
                         const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values.back();
  const double n1 = resolutions[resolutions.size() - 2];
  const double n2 = resolutions[resolutions.size() - 1];
  const double v1 = values[values.size() - 2];
  const double v2 = values[values.size() - 1];
  const double ratio = (n2 / n1) * (n2 / n1);
  if (ratio <= 1.0) return v2;
  // One Richardson step assuming the error decays like 1/n^2.
  return v2 + (v2 - v1) / (ratio - 1.0);
}

void check_n_list(const std::vector<int>& n_list) {
  if (n_list.empty()) throw OutOfRange("resolution list must not be empty");
  for (int n : n_list) {
    if (n < 1) throw OutOfRange("resolutions must be >= 1");
  }
}

}  // namespace

DiscretizationGrid discretize(const DensitySpec& spec_x,
                              const DensitySpec& spec_y, int n,
                              bool with_product_joint) {
  if (n < 1) throw OutOfRange("discretize: resolution must be >= 1");
  Axis ax = discretize_axis(spec_x, n);
  Axis ay = discretize_axis(spec_y, n);

  DiscretizationGrid grid;
  grid.resolution = n;
  grid.x_first = ax.first;
  grid.y_first = ay.first;

  if (with_product_joint) {
    const std::size_t rows = ax.masses.size();
    const std::size_t cols = ay.masses.size();
    if (rows * cols > (std::size_t{1} << 27)) {
      throw TooLarge("discretize: joint grid would exceed 2^27 cells");
    }
    grid.joint.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const double px = ax.masses[r];
      for (std::size_t s = 0; s < cols; ++s) {
        grid.joint[r * cols + s] = px * ay.masses[s];
      }
    }
  }
  grid.row_masses = axis_marginal(std::move(ax.masses));
  grid.col_masses = axis_marginal(std::move(ay.masses));
  return grid;
}

double shifted_joint_entropy(const DiscretizationGrid& grid) {
  if (!grid.has_joint()) {
    throw MissingJoint("shifted_joint_entropy: grid has no joint masses");
  }
  const double n2 = static_cast<double>(grid.resolution) *
                    static_cast<double>(grid.resolution);
  CompensatedSum sum;
  for (double p : grid.joint) {
    if (p > 0.0) sum.add(-p * std::log(n2 * p));
  }
  return sum.value();
}

ConvergenceSeries theorem41_series(const DensitySpec& spec_x,
                                   const DensitySpec& spec_y,
                                   const std::vector<int>& n_list) {
  check_n_list(n_list);
  ConvergenceSeries out;
  for (int n : n_list) {
    const DiscretizationGrid grid = discretize(spec_x, spec_y, n, true);
    const double shifted = shifted_joint_entropy(grid);
    out.resolutions.push_back(n);
    out.shifted_values.push_back(shifted);
    out.raw_values.push_back(shifted + 2.0 * std::log(static_cast<double>(n)));
    const double tail =
        grid.row_masses.tail_mass() + grid.col_masses.tail_mass();
    out.tail_bounds.push_back(tail_entropy_bound(tail, grid.joint.size()));
  }
  out.extrapolated_limit = extrapolate_limit(out.resolutions, out.shifted_values);
  return out;
}

MinCouplingSeries min_coupling_series(const DensitySpec& spec_x,
                                      const DensitySpec& spec_y,
                                      const std::vector<int>& n_list) {
  check_n_list(n_list);
  MinCouplingSeries out;
  for (int n : n_list) {
    const DiscretizationGrid grid = discretize(spec_x, spec_y, n, false);
    auto [table, trace] = greedy_min_coupling(grid.row_masses, grid.col_masses);
    const double raw = joint_entropy(table);
    out.series.resolutions.push_back(n);
    out.series.raw_values.push_back(raw);
    out.series.shifted_values.push_back(raw -
                                        std::log(static_cast<double>(n)));
    const double tail =
        grid.row_masses.tail_mass() + grid.col_masses.tail_mass();
    out.series.tail_bounds.push_back(
        tail_entropy_bound(tail, table.support_size() + 1));
    if (n == n_list.back()) {
      out.final_decomposition = string_decomposition(table, trace);
    }
  }
  out.series.extrapolated_limit =
      extrapolate_limit(out.series.resolutions, out.series.shifted_values);
  return out;
}

std::vector<int> default_resolutions() {
  return {2, 4, 8, 16, 32, 64, 128, 256};
}

}  // namespace entwb
