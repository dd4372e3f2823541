#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "entwb/core.hpp"

namespace entwb {

enum class Exhausted { row, col, both };

struct GreedyStep {
  int row = 0;
  int col = 0;
  double mass = 0.0;
  Exhausted exhausted = Exhausted::both;
  // Number of lines tied for the maximum when this step chose; 1 = no tie.
  int rows_tied = 1;
  int cols_tied = 1;
};

/// Execution record of the greedy construction. row_order / col_order list
/// the indices in the order each line was first chosen; lines never chosen
/// (zero mass, or left as terminal rounding dust) follow in index order, so
/// both are full permutations.
struct GreedyTrace {
  std::vector<GreedyStep> steps;
  std::vector<int> row_order;
  std::vector<int> col_order;
};

/// Greedy minimizing construction: repeatedly pair a maximal residual row
/// mass with a maximal residual column mass, place their minimum there, and
/// drop the exhausted line(s). Ties choose the lowest index; equal masses
/// drop both lines. Residuals are used unnormalized throughout. The result
/// has at most m + n - 1 nonzero cells and exact marginals.
std::pair<CouplingTable, GreedyTrace> greedy_min_coupling(
    const MarginalDistribution& x, const MarginalDistribution& y);

/// Closed form for two binary marginals: the argmax row u and argmax column
/// v share min{p_u, p_v}, the rest follows from the marginals. Equals
/// greedy_min_coupling on the same input up to permutation.
CouplingTable min_entropy_2x2(const MarginalDistribution& x,
                              const MarginalDistribution& y);

/// Geometric law P(r) = p (1-p)^(r-1), r = 1, 2, ...
struct GeometricFamily {
  double p = 0.5;
};

/// Atom masses of a denumerable law by 0-based index.
using AtomGenerator = std::function<double(std::size_t)>;

/// Shortest prefix whose discarded mass is <= tail_tol; the discarded mass
/// is recorded on the result. NonSummable if the prefix sums fail to reach
/// 1 - tail_tol within max_atoms.
MarginalDistribution truncate_denumerable(const GeometricFamily& family,
                                          double tail_tol);
MarginalDistribution truncate_denumerable(const AtomGenerator& atoms,
                                          double tail_tol,
                                          std::size_t max_atoms = 1000000);
/// Finite input: identity, tail 0.
MarginalDistribution truncate_denumerable(const MarginalDistribution& d,
                                          double tail_tol);

/// Bound on the entropy contribution of the discarded tail of a truncated
/// coupling: tail |log tail| + tail log(table_size).
double tail_entropy_bound(double tail_mass, std::size_t table_size);

/// Partition {I_1, I_2, ...} of the row index set with
/// sum_{r in I_s} p_r = p_col[target_s]. When the roles of the marginals had
/// to be swapped (H(Y) > H(X)), the witness applies to (y, x) and is marked
/// transposed.
struct PartitionWitness {
  std::vector<std::vector<int>> blocks;
  std::vector<int> targets;
  bool transposed = false;
};

/// Searches for an exact partition (within tol): first the greedy
/// consecutive partition on descending masses, then exhaustive block
/// assignment for at most 20 rows. Absent means "not found", which is a
/// proof of nonexistence only within the exhaustive regime.
std::optional<PartitionWitness> exact_partition_check(
    const MarginalDistribution& x, const MarginalDistribution& y,
    double tol = kMassTol);

/// Table with p_{r,s} = p_r on block cells and 0 elsewhere; its joint
/// entropy equals H(X) (H(Y) for transposed witnesses). InvalidWitness if
/// the witness does not fit the marginals.
CouplingTable partition_coupling(const MarginalDistribution& x,
                                 const MarginalDistribution& y,
                                 const PartitionWitness& w);

/// K_k = -(1/k) log(1/k) - ((k-1)/k) log((k-1)/k): the max-min entropy gap
/// of the geometric x uniform pair. Positive, decreasing to 0 as k grows.
double example4_gap(int k);

/// Decomposition of a greedy table into maximal strings: a vertical string
/// is a row absorbing whole columns, a horizontal string a column absorbing
/// whole rows. Every placed cell lands in exactly one string; cells in
/// neither type would be reported as residual_cells.
struct StringDecomposition {
  struct VerticalString {
    int row = 0;
    int col_lo = 0;
    int col_hi = 0;
    std::vector<int> cols;  // in placement order
  };
  struct HorizontalString {
    int col = 0;
    int row_lo = 0;
    int row_hi = 0;
    std::vector<int> rows;  // in placement order
  };
  std::vector<VerticalString> vertical;
  std::vector<HorizontalString> horizontal;
  std::vector<Cell> residual_cells;
};

/// Requires the trace that produced the table (ties make the choice order
/// non-recoverable from the cells alone); TraceMismatch if they disagree.
StringDecomposition string_decomposition(const CouplingTable& t,
                                         const GreedyTrace& trace);

/// Audit of the rearrangement remark: permute rows/columns by the trace
/// orders and compare against the NW table of the permuted marginals.
/// Known to fail on instances where the greedy support is not a staircase;
/// reported rather than assumed.
struct RearrangementCheck {
  bool matches = false;
  double max_cell_deviation = 0.0;
};

RearrangementCheck nw_rearrangement_check(const CouplingTable& greedy_table,
                                          const GreedyTrace& trace,
                                          double tol = 1e-12);

}  // namespace entwb
