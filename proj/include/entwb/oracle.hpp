#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "entwb/core.hpp"

namespace entwb {

// Ground-truth minimization at desk scale.
//
// Joint entropy is concave on the transportation polytope (each term
// -t log t is concave and the sum of concave functions is concave), and the
// minimum of a concave function over a bounded polytope is attained at an
// extreme point. Extreme points of the transportation polytope are exactly
// the basic feasible solutions: supports are spanning forests of the
// complete bipartite row/column graph, and the cell values on a forest are
// forced by the marginals (eliminate a leaf line, repeat). Enumerating all
// spanning trees of K_{m,n} and keeping the nonnegative solutions therefore
// visits every vertex; deduplicating by support removes the degenerate
// multiplicity. The entropy minimum over that finite set is the exact
// minimum over the whole Frechet class of the pair.

struct VertexSet {
  std::vector<CouplingTable> vertices;
  std::size_t count() const { return vertices.size(); }
};

/// All vertices of the transportation polytope of (x, y), deduplicated by
/// support and sorted canonically. Requires m*n <= 36 (TooLarge otherwise)
/// and strictly positive marginals (OutOfRange).
///
/// Candidate trees are partitioned into independent batches that may be
/// evaluated concurrently; ENTROPY_WB_THREADS caps the worker count and the
/// returned set is identical to the sequential result.
VertexSet enumerate_vertices(const MarginalDistribution& x,
                             const MarginalDistribution& y);

/// Vertex of minimal joint entropy; exact-entropy ties are broken by the
/// lexicographically smallest support so repeated runs agree.
std::pair<CouplingTable, double> oracle_min_entropy(
    const MarginalDistribution& x, const MarginalDistribution& y);

/// 1-D scan of the free cell p_{1,1} over its feasible interval at the
/// given step (both endpoints always included); returns the minimal
/// entropy seen. DimensionMismatch unless both marginals are binary.
double grid_min_2x2(const MarginalDistribution& x,
                    const MarginalDistribution& y, double step);

/// Empirical test of the greedy-optimality claim on one instance.
struct GreedyOracleComparison {
  double greedy_h = 0.0;
  double oracle_h = 0.0;
  double gap = 0.0;  // greedy_h - oracle_h, >= 0 up to rounding
  std::optional<CouplingTable> certificate;  // oracle table when gap > 1e-9
};

GreedyOracleComparison compare_greedy_oracle(const MarginalDistribution& x,
                                             const MarginalDistribution& y);

}  // namespace entwb
