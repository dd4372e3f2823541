#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "entwb/marginal.hpp"

namespace entwb {

enum class Provenance {
  independence,
  cograduation,
  contrograduation,
  greedy,
  oracle,
  explicit_table,
};

const char* provenance_name(Provenance p);

struct Cell {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// An m x n coupling of two marginals, stored sparsely (zero cells omitted,
/// row-major order). Construction validates nonnegativity, marginal
/// conservation within tol, and the cell bounds
///   max{p_r + p_s - 1, 0} <= p_{r,s} <= min{p_r, p_s}.
class CouplingTable {
 public:
  static CouplingTable from_cells(int rows, int cols, std::vector<Cell> cells,
                                  MarginalDistribution row_marginal,
                                  MarginalDistribution col_marginal,
                                  Provenance provenance, double tol = kMassTol);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<Cell>& cells() const { return cells_; }
  double cell(int r, int c) const;
  std::vector<std::vector<double>> dense() const;
  const MarginalDistribution& row_marginal() const { return row_marginal_; }
  const MarginalDistribution& col_marginal() const { return col_marginal_; }
  Provenance provenance() const { return provenance_; }
  std::size_t support_size() const { return cells_.size(); }

 private:
  CouplingTable() = default;

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Cell> cells_;
  MarginalDistribution row_marginal_;
  MarginalDistribution col_marginal_;
  Provenance provenance_ = Provenance::explicit_table;
};

/// Cell bounds for a coupling with row mass p_row and column mass p_col:
/// lo = max(p_row + p_col - 1, 0), hi = min(p_row, p_col).
std::pair<double, double> frechet_cell_bounds(double p_row, double p_col);

/// Product table p_{r,s} = p_r * p_s; the entropy maximizer.
CouplingTable independence_table(const MarginalDistribution& x,
                                 const MarginalDistribution& y);

/// NW corner rule in the stored index order (no sorting); realizes the
/// maximum distribution function M of the Frechet class.
CouplingTable cograduation_table(const MarginalDistribution& x,
                                 const MarginalDistribution& y);

/// NE corner analogue realizing the minimum distribution function W: the NW
/// rule applied after reversing the column order, then reversed back.
CouplingTable contrograduation_table(const MarginalDistribution& x,
                                     const MarginalDistribution& y);

/// H(X,Y) = -sum_{r,s} p_{r,s} log p_{r,s} in nats.
double joint_entropy(const CouplingTable& t);

/// Marginal and joint entropies with the standard bound diagnostics:
///   H(X,Y) <= H(X) + H(Y)   (slack = upper_bound_slack)
///   H(X,Y) >= H(X), H(Y)    (slack = lower_bound_slack)
/// mutual_information = h_x + h_y - h_xy exactly by construction.
struct EntropyReport {
  double h_x = 0.0;
  double h_y = 0.0;
  double h_xy = 0.0;
  double mutual_information = 0.0;
  double upper_bound_slack = 0.0;
  double lower_bound_slack = 0.0;
};

EntropyReport entropy_report(const CouplingTable& t);

}  // namespace entwb
