#include "entwb/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "entwb/errors.hpp"
#include "entwb/numeric.hpp"

namespace entwb {

namespace {

// Residuals at or below this fraction of the line's original mass are
// treated as exhausted: subtraction noise from an exact tie, not mass.
constexpr double kDustRel = 1e-12;

// Lowest index attaining the maximal residual among active lines, plus the
// tie count for the trace log.
std::pair<int, int> argmax_line(const std::vector<int>& active,
                                const std::vector<double>& residual) {
  int best = active.front();
  for (int i : active) {
    if (residual[static_cast<std::size_t>(i)] >
        residual[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }
  int ties = 0;
  for (int i : active) {
    if (residual[static_cast<std::size_t>(i)] ==
        residual[static_cast<std::size_t>(best)]) {
      ++ties;
    }
  }
  return {best, ties};
}

void erase_value(std::vector<int>& v, int x) {
  v.erase(std::find(v.begin(), v.end(), x));
}

}  // namespace

std::pair<CouplingTable, GreedyTrace> greedy_min_coupling(
    const MarginalDistribution& x, const MarginalDistribution& y) {
  std::vector<double> rx = x.probs();
  std::vector<double> ry = y.probs();
  std::vector<int> arows, acols;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    if (rx[i] > 0.0) arows.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < ry.size(); ++j) {
    if (ry[j] > 0.0) acols.push_back(static_cast<int>(j));
  }

  GreedyTrace trace;
  std::vector<Cell> cells;
  std::vector<char> row_seen(rx.size(), 0), col_seen(ry.size(), 0);

  while (!arows.empty() && !acols.empty()) {
    const auto [u, rt] = argmax_line(arows, rx);
    const auto [v, ct] = argmax_line(acols, ry);
    const double p = std::min(rx[static_cast<std::size_t>(u)],
                              ry[static_cast<std::size_t>(v)]);
    cells.push_back({u, v, p});
    if (!row_seen[static_cast<std::size_t>(u)]) {
      row_seen[static_cast<std::size_t>(u)] = 1;
      trace.row_order.push_back(u);
    }
    if (!col_seen[static_cast<std::size_t>(v)]) {
      col_seen[static_cast<std::size_t>(v)] = 1;
      trace.col_order.push_back(v);
    }
    rx[static_cast<std::size_t>(u)] -= p;
    ry[static_cast<std::size_t>(v)] -= p;
    const bool row_done =
        rx[static_cast<std::size_t>(u)] <=
        kDustRel * x[static_cast<std::size_t>(u)];
    const bool col_done =
        ry[static_cast<std::size_t>(v)] <=
        kDustRel * y[static_cast<std::size_t>(v)];
    if (row_done) rx[static_cast<std::size_t>(u)] = 0.0;
    if (col_done) ry[static_cast<std::size_t>(v)] = 0.0;
    const Exhausted e = row_done && col_done ? Exhausted::both
                        : row_done           ? Exhausted::row
                                             : Exhausted::col;
    trace.steps.push_back({u, v, p, e, rt, ct});
    if (row_done) erase_value(arows, u);
    if (col_done) erase_value(acols, v);
  }

  // Zero-mass lines and terminal rounding dust were never chosen; append
  // them so the trace orders are full permutations.
  for (std::size_t i = 0; i < rx.size(); ++i) {
    if (!row_seen[i]) trace.row_order.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < ry.size(); ++j) {
    if (!col_seen[j]) trace.col_order.push_back(static_cast<int>(j));
  }

  CouplingTable table = CouplingTable::from_cells(
      static_cast<int>(x.size()), static_cast<int>(y.size()), std::move(cells),
      x, y, Provenance::greedy);
  return {std::move(table), std::move(trace)};
}

CouplingTable min_entropy_2x2(const MarginalDistribution& x,
                              const MarginalDistribution& y) {
  if (x.size() != 2 || y.size() != 2) {
    throw DimensionMismatch("min_entropy_2x2: both marginals must be binary");
  }
  const int u = x[0] >= x[1] ? 0 : 1;
  const int v = y[0] >= y[1] ? 0 : 1;
  const double top = std::min(x[static_cast<std::size_t>(u)],
                              y[static_cast<std::size_t>(v)]);
  std::vector<Cell> cells;
  cells.push_back({u, v, top});
  cells.push_back({u, 1 - v, x[static_cast<std::size_t>(u)] - top});
  cells.push_back({1 - u, v, y[static_cast<std::size_t>(v)] - top});
  cells.push_back({1 - u, 1 - v,
                   x[static_cast<std::size_t>(1 - u)] -
                       (y[static_cast<std::size_t>(v)] - top)});
  return CouplingTable::from_cells(2, 2, std::move(cells), x, y,
                                   Provenance::greedy);
}

MarginalDistribution truncate_denumerable(const GeometricFamily& family,
                                          double tail_tol) {
  if (!(family.p > 0.0 && family.p < 1.0)) {
    throw BadParams("geometric: p must lie in (0, 1)");
  }
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw OutOfRange("truncate_denumerable: tail_tol must lie in (0, 1)");
  }
  const double q = 1.0 - family.p;
  // Remaining mass after N atoms is q^N; smallest N with q^N <= tail_tol.
  std::size_t count =
      static_cast<std::size_t>(std::ceil(std::log(tail_tol) / std::log(q)));
  if (count == 0) count = 1;
  while (std::pow(q, static_cast<double>(count)) > tail_tol) ++count;
  while (count > 1 &&
         std::pow(q, static_cast<double>(count - 1)) <= tail_tol) {
    --count;
  }
  std::vector<double> probs(count);
  double atom = family.p;
  CompensatedSum sum;
  for (std::size_t r = 0; r < count; ++r) {
    probs[r] = atom;
    sum.add(atom);
    atom *= q;
  }
  return make_truncated_marginal(std::move(probs),
                                 std::max(0.0, 1.0 - sum.value()));
}

MarginalDistribution truncate_denumerable(const AtomGenerator& atoms,
                                          double tail_tol,
                                          std::size_t max_atoms) {
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw OutOfRange("truncate_denumerable: tail_tol must lie in (0, 1)");
  }
  std::vector<double> probs;
  CompensatedSum sum;
  for (std::size_t r = 0; r < max_atoms; ++r) {
    const double p = atoms(r);
    if (p < -kMassTol) {
      throw NegativeMass("truncate_denumerable: generator produced " +
                         std::to_string(p) + " at index " + std::to_string(r));
    }
    probs.push_back(std::max(p, 0.0));
    sum.add(probs.back());
    if (1.0 - sum.value() <= tail_tol) {
      return make_truncated_marginal(std::move(probs),
                                     std::max(0.0, 1.0 - sum.value()));
    }
  }
  throw NonSummable("truncate_denumerable: prefix sums reached only " +
                    std::to_string(sum.value()) + " after " +
                    std::to_string(max_atoms) + " atoms");
}

MarginalDistribution truncate_denumerable(const MarginalDistribution& d,
                                          double /*tail_tol*/) {
  return d;
}

double tail_entropy_bound(double tail_mass, std::size_t table_size) {
  if (tail_mass <= 0.0) return 0.0;
  return tail_mass * std::abs(std::log(tail_mass)) +
         tail_mass * std::log(static_cast<double>(std::max<std::size_t>(
                          table_size, 2)));
}

namespace {

struct PartitionProblem {
  std::vector<double> fine;    // masses to be grouped
  std::vector<double> coarse;  // target block sums
};

// Greedy consecutive partition on descending masses: pour sorted fine
// masses into the currently largest unfilled coarse mass; succeeds only if
// every block closes exactly (within tol).
std::optional<std::vector<std::vector<int>>> consecutive_partition(
    const std::vector<int>& fine_desc, const std::vector<int>& coarse_desc,
    const PartitionProblem& pb, double tol) {
  std::vector<std::vector<int>> blocks(pb.coarse.size());
  std::size_t next = 0;
  for (int s : coarse_desc) {
    CompensatedSum acc;
    const double target = pb.coarse[static_cast<std::size_t>(s)];
    if (std::abs(target) <= tol) continue;
    while (true) {
      if (std::abs(acc.value() - target) <= tol) break;
      if (next >= fine_desc.size() || acc.value() > target + tol) {
        return std::nullopt;
      }
      const int r = fine_desc[next++];
      blocks[static_cast<std::size_t>(s)].push_back(r);
      acc.add(pb.fine[static_cast<std::size_t>(r)]);
    }
    if (std::abs(acc.value() - target) > tol) return std::nullopt;
  }
  if (next != fine_desc.size()) return std::nullopt;
  return blocks;
}

// Exhaustive block assignment, rows in descending mass order with
// capacity pruning; capped by the caller at 20 rows.
bool assign_rows(std::size_t pos, const std::vector<int>& fine_desc,
                 const PartitionProblem& pb, std::vector<double>& capacity,
                 std::vector<std::vector<int>>& blocks, double tol) {
  if (pos == fine_desc.size()) {
    for (double c : capacity) {
      if (std::abs(c) > tol * static_cast<double>(fine_desc.size() + 1)) {
        return false;
      }
    }
    return true;
  }
  const int r = fine_desc[pos];
  const double mass = pb.fine[static_cast<std::size_t>(r)];
  for (std::size_t s = 0; s < capacity.size(); ++s) {
    // Equal residual capacities are interchangeable; try only the first.
    bool duplicate = false;
    for (std::size_t t = 0; t < s; ++t) {
      if (capacity[t] == capacity[s]) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    if (capacity[s] < mass - tol) continue;
    capacity[s] -= mass;
    blocks[s].push_back(r);
    if (assign_rows(pos + 1, fine_desc, pb, capacity, blocks, tol)) {
      return true;
    }
    blocks[s].pop_back();
    capacity[s] += mass;
  }
  return false;
}

std::optional<PartitionWitness> search_partition(const MarginalDistribution& fine,
                                                 const MarginalDistribution& coarse,
                                                 bool transposed, double tol) {
  PartitionProblem pb{fine.probs(), coarse.probs()};
  std::vector<int> fine_idx, coarse_idx;
  for (std::size_t i = 0; i < pb.fine.size(); ++i) {
    if (pb.fine[i] > tol) fine_idx.push_back(static_cast<int>(i));
  }
  for (std::size_t s = 0; s < pb.coarse.size(); ++s) {
    coarse_idx.push_back(static_cast<int>(s));
  }
  auto desc = [](const std::vector<double>& w) {
    return [&w](int a, int b) {
      const double wa = w[static_cast<std::size_t>(a)];
      const double wb = w[static_cast<std::size_t>(b)];
      return wa != wb ? wa > wb : a < b;
    };
  };
  std::sort(fine_idx.begin(), fine_idx.end(), desc(pb.fine));
  std::sort(coarse_idx.begin(), coarse_idx.end(), desc(pb.coarse));

  auto blocks = consecutive_partition(fine_idx, coarse_idx, pb, tol);
  if (!blocks && fine_idx.size() <= 20) {
    std::vector<double> capacity = pb.coarse;
    std::vector<std::vector<int>> assigned(pb.coarse.size());
    if (assign_rows(0, fine_idx, pb, capacity, assigned, tol)) {
      blocks = std::move(assigned);
    }
  }
  if (!blocks) return std::nullopt;

  PartitionWitness w;
  w.transposed = transposed;
  for (std::size_t s = 0; s < blocks->size(); ++s) {
    auto& block = (*blocks)[s];
    if (block.empty() && pb.coarse[s] <= tol) continue;
    std::sort(block.begin(), block.end());
    w.blocks.push_back(std::move(block));
    w.targets.push_back(static_cast<int>(s));
  }
  return w;
}

}  // namespace

std::optional<PartitionWitness> exact_partition_check(
    const MarginalDistribution& x, const MarginalDistribution& y, double tol) {
  const double hx = entropy(x);
  const double hy = entropy(y);
  // A partition groups atoms of the finer marginal, which requires
  // H(fine) >= H(coarse); swap roles when Y is the finer one.
  if (hx >= hy) {
    auto w = search_partition(x, y, false, tol);
    if (w) return w;
    if (std::abs(hx - hy) <= 1e-12) return search_partition(y, x, true, tol);
    return std::nullopt;
  }
  return search_partition(y, x, true, tol);
}

CouplingTable partition_coupling(const MarginalDistribution& x,
                                 const MarginalDistribution& y,
                                 const PartitionWitness& w) {
  const MarginalDistribution& fine = w.transposed ? y : x;
  const MarginalDistribution& coarse = w.transposed ? x : y;
  if (w.blocks.size() != w.targets.size()) {
    throw InvalidWitness("partition witness: blocks and targets differ");
  }
  std::vector<char> used(fine.size(), 0);
  CompensatedSum covered;
  for (std::size_t b = 0; b < w.blocks.size(); ++b) {
    const int s = w.targets[b];
    if (s < 0 || static_cast<std::size_t>(s) >= coarse.size()) {
      throw InvalidWitness("partition witness: target out of range");
    }
    CompensatedSum block_sum;
    for (int r : w.blocks[b]) {
      if (r < 0 || static_cast<std::size_t>(r) >= fine.size()) {
        throw InvalidWitness("partition witness: row index out of range");
      }
      if (used[static_cast<std::size_t>(r)]) {
        throw InvalidWitness("partition witness: blocks are not disjoint");
      }
      used[static_cast<std::size_t>(r)] = 1;
      block_sum.add(fine[static_cast<std::size_t>(r)]);
    }
    if (std::abs(block_sum.value() - coarse[static_cast<std::size_t>(s)]) >
        kMassTol) {
      throw InvalidWitness("partition witness: block sum misses its column");
    }
    covered.add(block_sum.value());
  }
  for (std::size_t r = 0; r < fine.size(); ++r) {
    if (!used[r] && fine[r] > kMassTol) {
      throw InvalidWitness("partition witness: row " + std::to_string(r) +
                           " with positive mass is not covered");
    }
  }

  std::vector<Cell> cells;
  for (std::size_t b = 0; b < w.blocks.size(); ++b) {
    for (int r : w.blocks[b]) {
      const double v = fine[static_cast<std::size_t>(r)];
      if (v <= 0.0) continue;
      if (w.transposed) {
        cells.push_back({w.targets[b], r, v});
      } else {
        cells.push_back({r, w.targets[b], v});
      }
    }
  }
  return CouplingTable::from_cells(static_cast<int>(x.size()),
                                   static_cast<int>(y.size()), std::move(cells),
                                   x, y, Provenance::explicit_table);
}

double example4_gap(int k) {
  if (k < 2) throw OutOfRange("example4_gap: k must be at least 2");
  const double inv = 1.0 / static_cast<double>(k);
  return neg_p_log_p(inv) + neg_p_log_p(1.0 - inv);
}

StringDecomposition string_decomposition(const CouplingTable& t,
                                         const GreedyTrace& trace) {
  // The trace must describe exactly this table.
  if (trace.steps.size() != t.cells().size()) {
    throw TraceMismatch("string_decomposition: step count differs from support");
  }
  for (const GreedyStep& s : trace.steps) {
    if (std::abs(t.cell(s.row, s.col) - s.mass) > 1e-12) {
      throw TraceMismatch("string_decomposition: trace mass differs at (" +
                          std::to_string(s.row) + ", " + std::to_string(s.col) +
                          ")");
    }
  }

  StringDecomposition out;
  std::map<int, std::size_t> vertical_of_row;
  std::map<int, std::size_t> horizontal_of_col;

  auto add_to_vertical = [&](int row, int col) {
    auto it = vertical_of_row.find(row);
    if (it == vertical_of_row.end()) {
      out.vertical.push_back({row, col, col, {col}});
      vertical_of_row[row] = out.vertical.size() - 1;
    } else {
      auto& v = out.vertical[it->second];
      v.col_lo = std::min(v.col_lo, col);
      v.col_hi = std::max(v.col_hi, col);
      v.cols.push_back(col);
    }
  };
  auto add_to_horizontal = [&](int col, int row) {
    auto it = horizontal_of_col.find(col);
    if (it == horizontal_of_col.end()) {
      out.horizontal.push_back({col, row, row, {row}});
      horizontal_of_col[col] = out.horizontal.size() - 1;
    } else {
      auto& h = out.horizontal[it->second];
      h.row_lo = std::min(h.row_lo, row);
      h.row_hi = std::max(h.row_hi, row);
      h.rows.push_back(row);
    }
  };

  for (const GreedyStep& s : trace.steps) {
    switch (s.exhausted) {
      case Exhausted::col:
        // The cell swallowed a whole column: it extends row's string.
        add_to_vertical(s.row, s.col);
        break;
      case Exhausted::row:
        add_to_horizontal(s.col, s.row);
        break;
      case Exhausted::both:
        // Terminal cell of two lines at once: it closes whichever string
        // is already standing; isolated cells become vertical singletons.
        if (horizontal_of_col.count(s.col)) {
          add_to_horizontal(s.col, s.row);
        } else if (vertical_of_row.count(s.row)) {
          add_to_vertical(s.row, s.col);
        } else {
          add_to_vertical(s.row, s.col);
        }
        break;
    }
  }
  return out;
}

RearrangementCheck nw_rearrangement_check(const CouplingTable& greedy_table,
                                          const GreedyTrace& trace,
                                          double tol) {
  const int m = greedy_table.rows();
  const int n = greedy_table.cols();
  if (trace.row_order.size() != static_cast<std::size_t>(m) ||
      trace.col_order.size() != static_cast<std::size_t>(n)) {
    throw TraceMismatch("nw_rearrangement_check: trace orders are not full");
  }
  std::vector<double> px(static_cast<std::size_t>(m)),
      py(static_cast<std::size_t>(n));
  std::vector<int> row_pos(static_cast<std::size_t>(m)),
      col_pos(static_cast<std::size_t>(n));
  for (int a = 0; a < m; ++a) {
    const int r = trace.row_order[static_cast<std::size_t>(a)];
    px[static_cast<std::size_t>(a)] =
        greedy_table.row_marginal()[static_cast<std::size_t>(r)];
    row_pos[static_cast<std::size_t>(r)] = a;
  }
  for (int b = 0; b < n; ++b) {
    const int s = trace.col_order[static_cast<std::size_t>(b)];
    py[static_cast<std::size_t>(b)] =
        greedy_table.col_marginal()[static_cast<std::size_t>(s)];
    col_pos[static_cast<std::size_t>(s)] = b;
  }

  // NW table of the permuted marginals, as a cell map keyed row-major.
  const CouplingTable nw_table = cograduation_table(
      make_truncated_marginal(px, greedy_table.row_marginal().tail_mass()),
      make_truncated_marginal(py, greedy_table.col_marginal().tail_mass()));
  std::map<std::pair<int, int>, double> nw;
  for (const Cell& c : nw_table.cells()) nw[{c.row, c.col}] = c.value;

  std::map<std::pair<int, int>, double> permuted;
  for (const Cell& c : greedy_table.cells()) {
    permuted[{row_pos[static_cast<std::size_t>(c.row)],
              col_pos[static_cast<std::size_t>(c.col)]}] = c.value;
  }

  double max_dev = 0.0;
  for (const auto& [key, value] : permuted) {
    const auto it = nw.find(key);
    const double other = it == nw.end() ? 0.0 : it->second;
    max_dev = std::max(max_dev, std::abs(value - other));
  }
  for (const auto& [key, value] : nw) {
    if (!permuted.count(key)) max_dev = std::max(max_dev, std::abs(value));
  }
  return {max_dev <= tol, max_dev};
}

}  // namespace entwb
