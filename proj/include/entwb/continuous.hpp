#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "entwb/coupling.hpp"
#include "entwb/marginal.hpp"

namespace entwb {

enum class DensityFamily { uniform, normal, exponential, piecewise_linear };

struct Knot {
  double x = 0.0;
  double f = 0.0;
};

/// A one-dimensional absolutely continuous marginal: density, CDF, quantile
/// and a support window [lo, hi] leaving at most window_tol mass outside
/// each tail. Piecewise-linear densities may carry jump discontinuities as
/// repeated knot abscissae.
class DensitySpec {
 public:
  static DensitySpec uniform(double a, double b, double window_tol = 0.0);
  static DensitySpec normal(double mu, double sigma, double window_tol);
  static DensitySpec exponential(double lambda, double window_tol);
  static DensitySpec piecewise_linear(std::vector<Knot> knots,
                                      double window_tol = 0.0);

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
  /// Integral of the density over [a, b]; exact for piecewise-linear,
  /// adaptive quadrature otherwise.
  double mass_between(double a, double b) const;

  DensityFamily family() const { return family_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double window_tol() const { return window_tol_; }
  const std::vector<Knot>& knots() const { return knots_; }
  double param1() const { return p1_; }
  double param2() const { return p2_; }

 private:
  DensitySpec() = default;

  DensityFamily family_ = DensityFamily::uniform;
  double p1_ = 0.0;  // a / mu / lambda
  double p2_ = 0.0;  // b / sigma
  std::vector<Knot> knots_;
  std::vector<double> knot_cdf_;  // cumulative mass up to each knot
  double lo_ = 0.0;
  double hi_ = 0.0;
  double window_tol_ = 0.0;
};

/// Family dispatch used by the CLI; BadParams on invalid parameters.
/// params: uniform {a, b}, normal {mu, sigma}, exponential {lambda},
/// piecewise_linear {x0, f0, x1, f1, ...}.
DensitySpec make_density_spec(DensityFamily family,
                              const std::vector<double>& params,
                              double window_tol);

/// Monotone map t with t(X) ~ spec_y when X ~ spec_x: the quantile of
/// spec_y composed with the CDF of spec_x. The maximal coupling of the two
/// marginals concentrates on the curve y = t(x).
double transport_map(const DensitySpec& spec_x, const DensitySpec& spec_y,
                     double x);

/// Removes zero-density gaps (x_r, x_r + d_r) by splicing the CDF: each gap
/// is excised and the support to its right shifts left by d_r. Entropy is
/// unchanged. NotZeroOnInterval if the density is not zero on some gap.
DensitySpec strictify(const DensitySpec& spec,
                      const std::vector<std::pair<double, double>>& zero_intervals);

/// Width-1/n quantization grid of one or two marginals over their windows
/// (snapped outward to multiples of 1/n). Cell masses come from per-cell
/// quadrature; the mass outside the window is recorded as the marginals'
/// tail, never rescaled away.
struct DiscretizationGrid {
  int resolution = 1;
  // First cell of the X (row) grid starts at x_first / n, similarly for Y.
  std::int64_t x_first = 0;
  std::int64_t y_first = 0;
  MarginalDistribution row_masses;
  MarginalDistribution col_masses;
  // Optional joint cell masses, row-major (rows x cols); empty when absent.
  std::vector<double> joint;
  bool has_joint() const { return !joint.empty(); }
};

/// Product joints only: p_{n,r,s} = p_{n,r,.} p_{n,.,s} cell by cell.
DiscretizationGrid discretize(const DensitySpec& spec_x,
                              const DensitySpec& spec_y, int n,
                              bool with_product_joint = false);

/// H(X_n, Y_n) - 2 log n = -sum p log(n^2 p); MissingJoint without a joint.
double shifted_joint_entropy(const DiscretizationGrid& grid);

/// A sequence of resolutions with shifted entropies and an extrapolated
/// limit (assuming an error term proportional to 1/n^2 between the last
/// two points).
struct ConvergenceSeries {
  std::vector<int> resolutions;
  std::vector<double> raw_values;      // unshifted H at each n
  std::vector<double> shifted_values;  // H - 2 log n, or H - log n
  std::vector<double> tail_bounds;     // entropy uncertainty from window tails
  double extrapolated_limit = 0.0;
};

/// Shifted joint entropies H(X_n,Y_n) - 2 log n of the product joint,
/// converging to the two-dimensional differential entropy.
ConvergenceSeries theorem41_series(const DensitySpec& spec_x,
                                   const DensitySpec& spec_y,
                                   const std::vector<int>& n_list);

/// Greedy-coupled discretized marginals per resolution, centered by log n
/// (the raw values diverge like log n; the centered ones stabilize at the
/// shift constant c). Also returns the string decomposition of the final
/// table for inspection of the A'_n / B'_n structure.
struct MinCouplingSeries {
  ConvergenceSeries series;
  StringDecomposition final_decomposition;
};

MinCouplingSeries min_coupling_series(const DensitySpec& spec_x,
                                      const DensitySpec& spec_y,
                                      const std::vector<int>& n_list);

/// Default resolution ladder 2, 4, ..., 256.
std::vector<int> default_resolutions();

}  // namespace entwb
