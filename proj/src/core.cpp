#include "entwb/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entwb/errors.hpp"
#include "entwb/numeric.hpp"

namespace entwb {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::independence: return "independence";
    case Provenance::cograduation: return "cograduation";
    case Provenance::contrograduation: return "contrograduation";
    case Provenance::greedy: return "greedy";
    case Provenance::oracle: return "oracle";
    case Provenance::explicit_table: return "explicit";
  }
  return "unknown";
}

std::pair<double, double> frechet_cell_bounds(double p_row, double p_col) {
  if (!(p_row >= 0.0 && p_row <= 1.0 + 1e-12) ||
      !(p_col >= 0.0 && p_col <= 1.0 + 1e-12)) {
    throw OutOfRange("frechet_cell_bounds: masses must lie in [0, 1]");
  }
  p_row = std::min(p_row, 1.0);
  p_col = std::min(p_col, 1.0);
  const double lo = std::max(p_row + p_col - 1.0, 0.0);
  const double hi = std::min(p_row, p_col);
  return {std::min(lo, hi), hi};
}

CouplingTable CouplingTable::from_cells(int rows, int cols,
                                        std::vector<Cell> cells,
                                        MarginalDistribution row_marginal,
                                        MarginalDistribution col_marginal,
                                        Provenance provenance, double tol) {
  if (rows <= 0 || cols <= 0 ||
      row_marginal.size() != static_cast<std::size_t>(rows) ||
      col_marginal.size() != static_cast<std::size_t>(cols)) {
    throw DimensionMismatch("coupling table: marginal sizes do not match " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }

  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<Cell> kept;
  kept.reserve(cells.size());
  for (const Cell& c : cells) {
    if (c.row < 0 || c.row >= rows || c.col < 0 || c.col >= cols) {
      throw OutOfRange("coupling table: cell index out of range");
    }
    if (!kept.empty() && kept.back().row == c.row && kept.back().col == c.col) {
      throw InvalidTable("coupling table: duplicate cell (" +
                         std::to_string(c.row) + ", " + std::to_string(c.col) +
                         ")");
    }
    if (c.value < -tol) {
      throw InvalidTable("coupling table: negative cell (" +
                         std::to_string(c.row) + ", " + std::to_string(c.col) +
                         ") = " + std::to_string(c.value));
    }
    if (c.value > 0.0) kept.push_back(c);
  }

  // Marginal conservation, rows then columns.
  std::vector<CompensatedSum> row_sums(rows), col_sums(cols);
  for (const Cell& c : kept) {
    row_sums[c.row].add(c.value);
    col_sums[c.col].add(c.value);
  }
  for (int r = 0; r < rows; ++r) {
    if (std::abs(row_sums[r].value() - row_marginal[r]) > tol) {
      throw InvalidTable("coupling table: row " + std::to_string(r) +
                         " sums to " + std::to_string(row_sums[r].value()) +
                         ", marginal is " + std::to_string(row_marginal[r]));
    }
  }
  for (int s = 0; s < cols; ++s) {
    if (std::abs(col_sums[s].value() - col_marginal[s]) > tol) {
      throw InvalidTable("coupling table: column " + std::to_string(s) +
                         " sums to " + std::to_string(col_sums[s].value()) +
                         ", marginal is " + std::to_string(col_marginal[s]));
    }
  }

  // Upper cell bound per stored cell.
  for (const Cell& c : kept) {
    if (c.value > std::min(row_marginal[c.row], col_marginal[c.col]) + tol) {
      throw InvalidTable("coupling table: cell above min of its marginals");
    }
  }
  // Lower cell bound: only rows with p_r + max p_s > 1 can force cells
  // positive, so scan those rows densely.
  double max_col = 0.0;
  for (std::size_t s = 0; s < col_marginal.size(); ++s) {
    max_col = std::max(max_col, col_marginal[s]);
  }
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    const std::size_t row_begin = k;
    while (k < kept.size() && kept[k].row == r) ++k;
    if (row_marginal[r] + max_col <= 1.0 + tol) continue;
    for (int s = 0; s < cols; ++s) {
      const double lo = row_marginal[r] + col_marginal[s] - 1.0;
      if (lo <= tol) continue;
      double value = 0.0;
      for (std::size_t i = row_begin; i < k; ++i) {
        if (kept[i].col == s) {
          value = kept[i].value;
          break;
        }
      }
      if (value < lo - tol) {
        throw InvalidTable("coupling table: cell below its forced minimum");
      }
    }
  }

  CouplingTable t;
  t.rows_ = rows;
  t.cols_ = cols;
  t.cells_ = std::move(kept);
  t.row_marginal_ = std::move(row_marginal);
  t.col_marginal_ = std::move(col_marginal);
  t.provenance_ = provenance;
  return t;
}

double CouplingTable::cell(int r, int c) const {
  const Cell probe{r, c, 0.0};
  auto it = std::lower_bound(cells_.begin(), cells_.end(), probe,
                             [](const Cell& a, const Cell& b) {
                               return a.row != b.row ? a.row < b.row
                                                     : a.col < b.col;
                             });
  if (it != cells_.end() && it->row == r && it->col == c) return it->value;
  return 0.0;
}

std::vector<std::vector<double>> CouplingTable::dense() const {
  std::vector<std::vector<double>> out(
      static_cast<std::size_t>(rows_),
      std::vector<double>(static_cast<std::size_t>(cols_), 0.0));
  for (const Cell& c : cells_) {
    out[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] =
        c.value;
  }
  return out;
}

CouplingTable independence_table(const MarginalDistribution& x,
                                 const MarginalDistribution& y) {
  const int m = static_cast<int>(x.size());
  const int n = static_cast<int>(y.size());
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
  for (int r = 0; r < m; ++r) {
    for (int s = 0; s < n; ++s) {
      const double v = x[static_cast<std::size_t>(r)] *
                       y[static_cast<std::size_t>(s)];
      if (v > 0.0) cells.push_back({r, s, v});
    }
  }
  return CouplingTable::from_cells(m, n, std::move(cells), x, y,
                                   Provenance::independence);
}

namespace {

// Residuals at or below this fraction of the line's original mass count as
// exhausted: subtraction noise from an exact tie, not real mass.
constexpr double kDustRel = 1e-12;

// NW corner fill; cells come out in visit order. Each step kills at least
// one line, so the support stays an acyclic staircase.
std::vector<Cell> nw_fill(const std::vector<double>& x,
                          const std::vector<double>& y) {
  std::vector<double> rx = x, ry = y;
  const std::size_t m = rx.size(), n = ry.size();
  std::vector<Cell> cells;
  std::size_t i = 0, j = 0;
  while (i < m && rx[i] <= 0.0) ++i;
  while (j < n && ry[j] <= 0.0) ++j;
  while (i < m && j < n) {
    const double p = std::min(rx[i], ry[j]);
    cells.push_back({static_cast<int>(i), static_cast<int>(j), p});
    rx[i] -= p;
    ry[j] -= p;
    const bool row_done = rx[i] <= kDustRel * x[i];
    const bool col_done = ry[j] <= kDustRel * y[j];
    if (row_done) {
      ++i;
      while (i < m && rx[i] <= 0.0) ++i;
    }
    if (col_done) {
      ++j;
      while (j < n && ry[j] <= 0.0) ++j;
    }
    if (!row_done && !col_done) break;  // unreachable: p equals one residual
  }
  return cells;
}

}  // namespace

CouplingTable cograduation_table(const MarginalDistribution& x,
                                 const MarginalDistribution& y) {
  std::vector<Cell> cells = nw_fill(x.probs(), y.probs());
  return CouplingTable::from_cells(static_cast<int>(x.size()),
                                   static_cast<int>(y.size()),
                                   std::move(cells), x, y,
                                   Provenance::cograduation);
}

CouplingTable contrograduation_table(const MarginalDistribution& x,
                                     const MarginalDistribution& y) {
  const std::vector<double> reversed(y.probs().rbegin(), y.probs().rend());
  std::vector<Cell> cells = nw_fill(x.probs(), reversed);
  const int n = static_cast<int>(y.size());
  for (Cell& c : cells) c.col = n - 1 - c.col;
  return CouplingTable::from_cells(static_cast<int>(x.size()), n,
                                   std::move(cells), x, y,
                                   Provenance::contrograduation);
}

double joint_entropy(const CouplingTable& t) {
  CompensatedSum s;
  for (const Cell& c : t.cells()) s.add(neg_p_log_p(c.value));
  return s.value();
}

EntropyReport entropy_report(const CouplingTable& t) {
  EntropyReport r;
  r.h_x = entropy(t.row_marginal());
  r.h_y = entropy(t.col_marginal());
  r.h_xy = joint_entropy(t);
  r.mutual_information = r.h_x + r.h_y - r.h_xy;
  r.upper_bound_slack = r.h_x + r.h_y - r.h_xy;
  r.lower_bound_slack = r.h_xy - std::max(r.h_x, r.h_y);
  return r;
}

}  // namespace entwb
