#include "entwb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include "entwb/coupling.hpp"
#include "entwb/errors.hpp"
#include "entwb/numeric.hpp"

namespace entwb {

namespace {

constexpr double kFeasibilityTol = 1e-12;  // basic solutions this negative pass
constexpr int kDimensionCap = 36;          // m*n above this refuses to enumerate

int worker_count() {
  const char* env = std::getenv("ENTROPY_WB_THREADS");
  if (env == nullptr) return 1;
  const long v = std::strtol(env, nullptr, 10);
  if (v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 64));
}

// Union-find by size, no path compression, so a union undoes with two
// parent writes.
struct UnionFind {
  explicit UnionFind(int count) : parent(static_cast<std::size_t>(count), -1) {}

  int find(int v) const {
    while (parent[static_cast<std::size_t>(v)] >= 0) {
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  }

  struct Undo {
    int kept;
    int absorbed;
    int kept_old;
  };

  // Preconditions: a and b lie in distinct components.
  Undo unite(int a, int b) {
    int ra = find(a), rb = find(b);
    if (parent[static_cast<std::size_t>(ra)] >
        parent[static_cast<std::size_t>(rb)]) {
      std::swap(ra, rb);  // ra keeps the larger component
    }
    const Undo u{ra, rb, parent[static_cast<std::size_t>(ra)]};
    parent[static_cast<std::size_t>(ra)] +=
        parent[static_cast<std::size_t>(rb)];
    parent[static_cast<std::size_t>(rb)] = ra;
    return u;
  }

  void undo(const Undo& u) {
    parent[static_cast<std::size_t>(u.absorbed)] =
        parent[static_cast<std::size_t>(u.kept)] - u.kept_old;
    parent[static_cast<std::size_t>(u.kept)] = u.kept_old;
  }

  std::vector<int> parent;  // negative component size at roots
};

using SupportSet = std::set<std::uint64_t>;

// Spanning trees of the complete bipartite row/column graph, generated as
// sorted edge subsets so each tree appears exactly once. Complete trees are
// solved by leaf elimination; nonnegative basic solutions are recorded by
// support.
class VertexEnumerator {
 public:
  VertexEnumerator(const std::vector<double>& x, const std::vector<double>& y)
      : m_(static_cast<int>(x.size())),
        n_(static_cast<int>(y.size())),
        need_(m_ + n_ - 1),
        total_(m_ * n_),
        x_(x),
        y_(y),
        uf_(m_ + n_),
        degree_(static_cast<std::size_t>(m_ + n_), 0) {}

  // Enumerates completions of a prefix: edges before `idx` are decided and
  // `included` lists the chosen ones.
  void run(int idx, const std::vector<int>& included, SupportSet& out) {
    uf_ = UnionFind(m_ + n_);
    std::fill(degree_.begin(), degree_.end(), 0);
    chosen_.clear();
    for (int e : included) apply(e);
    out_ = &out;
    recurse(idx);
  }

  // Feasible include/exclude prefixes of the first `depth` edges, used to
  // split the search into independent batches.
  std::vector<std::vector<int>> prefixes(int depth) {
    uf_ = UnionFind(m_ + n_);
    std::fill(degree_.begin(), degree_.end(), 0);
    chosen_.clear();
    std::vector<std::vector<int>> states;
    collect(0, depth, states);
    return states;
  }

 private:
  int row_of(int e) const { return e / n_; }
  int col_vertex(int e) const { return m_ + e % n_; }

  void apply(int e) {
    uf_.unite(row_of(e), col_vertex(e));
    ++degree_[static_cast<std::size_t>(row_of(e))];
    ++degree_[static_cast<std::size_t>(col_vertex(e))];
    chosen_.push_back(e);
  }

  // Skipping the last edge of a still-isolated line strands that line.
  bool exclude_is_dead(int idx) const {
    const int r = idx / n_;
    const int s = idx % n_;
    if (s == n_ - 1 && degree_[static_cast<std::size_t>(r)] == 0) return true;
    if (r == m_ - 1 && degree_[static_cast<std::size_t>(m_ + s)] == 0) {
      return true;
    }
    return false;
  }

  template <typename OnBoundary>
  void branch(int idx, const OnBoundary& descend) {
    const int a = row_of(idx);
    const int b = col_vertex(idx);
    if (uf_.find(a) != uf_.find(b)) {
      const UnionFind::Undo u = uf_.unite(a, b);
      ++degree_[static_cast<std::size_t>(a)];
      ++degree_[static_cast<std::size_t>(b)];
      chosen_.push_back(idx);
      descend();
      chosen_.pop_back();
      --degree_[static_cast<std::size_t>(a)];
      --degree_[static_cast<std::size_t>(b)];
      uf_.undo(u);
    }
  }

  void recurse(int idx) {
    if (static_cast<int>(chosen_.size()) == need_) {
      solve_tree();
      return;
    }
    if (idx == total_ ||
        static_cast<int>(chosen_.size()) + (total_ - idx) < need_) {
      return;
    }
    branch(idx, [&] { recurse(idx + 1); });
    if (!exclude_is_dead(idx)) recurse(idx + 1);
  }

  void collect(int idx, int depth, std::vector<std::vector<int>>& states) {
    if (idx == depth || static_cast<int>(chosen_.size()) == need_ ||
        idx == total_) {
      states.push_back(chosen_);
      return;
    }
    if (static_cast<int>(chosen_.size()) + (total_ - idx) < need_) return;
    branch(idx, [&] { collect(idx + 1, depth, states); });
    if (!exclude_is_dead(idx)) collect(idx + 1, depth, states);
  }

  // A leaf line's residual is forced into its single incident cell; reject
  // once any forced value dips below -kFeasibilityTol. Each vertex keeps
  // the xor of its unresolved incident edge indices, so the one edge left
  // at a leaf pops out without adjacency lists.
  void solve_tree() {
    const std::size_t v_count = static_cast<std::size_t>(m_ + n_);
    deg_.assign(v_count, 0);
    xor_edge_.assign(v_count, 0);
    residual_.resize(v_count);
    for (int i = 0; i < m_; ++i) {
      residual_[static_cast<std::size_t>(i)] = x_[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < n_; ++j) {
      residual_[static_cast<std::size_t>(m_ + j)] =
          y_[static_cast<std::size_t>(j)];
    }
    for (std::size_t e = 0; e < chosen_.size(); ++e) {
      const auto a = static_cast<std::size_t>(row_of(chosen_[e]));
      const auto b = static_cast<std::size_t>(col_vertex(chosen_[e]));
      ++deg_[a];
      ++deg_[b];
      xor_edge_[a] ^= static_cast<int>(e);
      xor_edge_[b] ^= static_cast<int>(e);
    }
    value_.resize(chosen_.size());
    leaves_.clear();
    for (std::size_t v = 0; v < v_count; ++v) {
      if (deg_[v] == 1) leaves_.push_back(static_cast<int>(v));
    }
    std::size_t solved = 0;
    while (!leaves_.empty()) {
      const auto v = static_cast<std::size_t>(leaves_.back());
      leaves_.pop_back();
      if (deg_[v] != 1) continue;
      const auto e = static_cast<std::size_t>(xor_edge_[v]);
      const auto a = static_cast<std::size_t>(row_of(chosen_[e]));
      const auto b = static_cast<std::size_t>(col_vertex(chosen_[e]));
      const std::size_t other = v == a ? b : a;
      const double val = residual_[v];
      if (val < -kFeasibilityTol) return;
      value_[e] = std::max(val, 0.0);
      residual_[other] -= val;
      deg_[v] = 0;
      --deg_[other];
      xor_edge_[other] ^= static_cast<int>(e);
      if (deg_[other] == 1) leaves_.push_back(static_cast<int>(other));
      ++solved;
    }
    if (solved != chosen_.size()) return;

    std::uint64_t mask = 0;
    for (std::size_t e = 0; e < chosen_.size(); ++e) {
      if (value_[e] > 0.0) mask |= std::uint64_t{1} << chosen_[e];
    }
    out_->insert(mask);  // degenerate trees collapse onto one support
  }

  const int m_, n_, need_, total_;
  const std::vector<double>& x_;
  const std::vector<double>& y_;
  UnionFind uf_;
  std::vector<int> degree_;
  std::vector<int> chosen_;
  SupportSet* out_ = nullptr;

  // solve_tree scratch
  std::vector<int> deg_;
  std::vector<int> xor_edge_;
  std::vector<double> residual_;
  std::vector<double> value_;
  std::vector<int> leaves_;
};

// Forced cell values on a forest support, by leaf-line elimination. The
// result depends only on the support, never on the spanning tree that
// discovered it.
std::vector<Cell> solve_support(std::uint64_t mask,
                                const std::vector<double>& x,
                                const std::vector<double>& y) {
  const int m = static_cast<int>(x.size());
  const int n = static_cast<int>(y.size());
  std::vector<int> edges;
  for (int e = 0; e < m * n; ++e) {
    if (mask & (std::uint64_t{1} << e)) edges.push_back(e);
  }
  const std::size_t v_count = static_cast<std::size_t>(m + n);
  std::vector<int> deg(v_count, 0), xe(v_count, 0);
  std::vector<double> residual(v_count);
  for (int i = 0; i < m; ++i) residual[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
  for (int j = 0; j < n; ++j) {
    residual[static_cast<std::size_t>(m + j)] = y[static_cast<std::size_t>(j)];
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto a = static_cast<std::size_t>(edges[e] / n);
    const auto b = static_cast<std::size_t>(m + edges[e] % n);
    ++deg[a];
    ++deg[b];
    xe[a] ^= static_cast<int>(e);
    xe[b] ^= static_cast<int>(e);
  }
  std::vector<double> value(edges.size(), 0.0);
  std::vector<int> leaves;
  for (std::size_t v = 0; v < v_count; ++v) {
    if (deg[v] == 1) leaves.push_back(static_cast<int>(v));
  }
  while (!leaves.empty()) {
    const auto v = static_cast<std::size_t>(leaves.back());
    leaves.pop_back();
    if (deg[v] != 1) continue;
    const auto e = static_cast<std::size_t>(xe[v]);
    const auto a = static_cast<std::size_t>(edges[e] / n);
    const auto b = static_cast<std::size_t>(m + edges[e] % n);
    const std::size_t other = v == a ? b : a;
    value[e] = std::max(residual[v], 0.0);
    residual[other] -= residual[v];
    deg[v] = 0;
    --deg[other];
    xe[other] ^= static_cast<int>(e);
    if (deg[other] == 1) leaves.push_back(static_cast<int>(other));
  }
  std::vector<Cell> cells;
  cells.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (value[e] > 0.0) {
      cells.push_back({edges[e] / n, edges[e] % n, value[e]});
    }
  }
  return cells;
}

}  // namespace

VertexSet enumerate_vertices(const MarginalDistribution& x,
                             const MarginalDistribution& y) {
  const int m = static_cast<int>(x.size());
  const int n = static_cast<int>(y.size());
  if (m * n > kDimensionCap) {
    throw TooLarge("enumerate_vertices: " + std::to_string(m) + "x" +
                   std::to_string(n) + " exceeds the m*n <= 36 cap");
  }
  for (double p : x.probs()) {
    if (p <= 0.0) {
      throw OutOfRange("enumerate_vertices: row marginal not strictly positive");
    }
  }
  for (double p : y.probs()) {
    if (p <= 0.0) {
      throw OutOfRange(
          "enumerate_vertices: column marginal not strictly positive");
    }
  }

  SupportSet found;
  const int threads = worker_count();
  if (threads <= 1 || m * n <= 8) {
    VertexEnumerator en(x.probs(), y.probs());
    en.run(0, {}, found);
  } else {
    // Workers enumerate completions of disjoint prefixes; the merged set
    // equals the sequential one because vertices are keyed by support, not
    // by discovery order.
    VertexEnumerator splitter(x.probs(), y.probs());
    const int depth = std::min(m * n, 8);
    const std::vector<std::vector<int>> states = splitter.prefixes(depth);
    std::vector<SupportSet> partial(states.size());
    std::mutex take;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        VertexEnumerator en(x.probs(), y.probs());
        while (true) {
          std::size_t mine;
          {
            std::lock_guard<std::mutex> lock(take);
            if (next >= states.size()) return;
            mine = next++;
          }
          en.run(depth, states[mine], partial[mine]);
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& p : partial) found.insert(p.begin(), p.end());
  }

  // Re-solve each deduplicated support canonically so the values do not
  // depend on which spanning tree discovered it, then order vertices by
  // lexicographically smallest support.
  std::vector<std::vector<Cell>> solved;
  solved.reserve(found.size());
  for (std::uint64_t mask : found) {
    solved.push_back(solve_support(mask, x.probs(), y.probs()));
  }
  std::sort(solved.begin(), solved.end(),
            [](const std::vector<Cell>& a, const std::vector<Cell>& b) {
              const std::size_t k = std::min(a.size(), b.size());
              for (std::size_t i = 0; i < k; ++i) {
                if (a[i].row != b[i].row) return a[i].row < b[i].row;
                if (a[i].col != b[i].col) return a[i].col < b[i].col;
              }
              return a.size() < b.size();
            });

  VertexSet out;
  out.vertices.reserve(solved.size());
  for (auto& cells : solved) {
    out.vertices.push_back(CouplingTable::from_cells(m, n, std::move(cells), x,
                                                     y, Provenance::oracle));
  }
  return out;
}

std::pair<CouplingTable, double> oracle_min_entropy(
    const MarginalDistribution& x, const MarginalDistribution& y) {
  VertexSet vertices = enumerate_vertices(x, y);
  const CouplingTable* best = nullptr;
  double best_h = 0.0;
  for (const CouplingTable& v : vertices.vertices) {
    const double h = joint_entropy(v);
    // Strict comparison keeps the lexicographically first support on ties.
    if (best == nullptr || h < best_h) {
      best = &v;
      best_h = h;
    }
  }
  if (best == nullptr) {
    throw InvalidTable("oracle_min_entropy: no feasible vertex found");
  }
  return {*best, best_h};
}

double grid_min_2x2(const MarginalDistribution& x,
                    const MarginalDistribution& y, double step) {
  if (x.size() != 2 || y.size() != 2) {
    throw DimensionMismatch("grid_min_2x2: both marginals must be binary");
  }
  if (!(step > 0.0 && step <= 0.01)) {
    throw OutOfRange("grid_min_2x2: step must lie in (0, 0.01]");
  }
  const auto [lo, hi] = frechet_cell_bounds(x[0], y[0]);
  const auto h_at = [&](double p) {
    return neg_p_log_p(p) + neg_p_log_p(x[0] - p) + neg_p_log_p(y[0] - p) +
           neg_p_log_p(x[1] - (y[0] - p));
  };
  double best = std::min(h_at(lo), h_at(hi));
  for (double p = lo + step; p < hi; p += step) {
    best = std::min(best, h_at(p));
  }
  return best;
}

GreedyOracleComparison compare_greedy_oracle(const MarginalDistribution& x,
                                             const MarginalDistribution& y) {
  GreedyOracleComparison out;
  const auto greedy = greedy_min_coupling(x, y);
  out.greedy_h = joint_entropy(greedy.first);
  auto [oracle_table, oracle_h] = oracle_min_entropy(x, y);
  out.oracle_h = oracle_h;
  out.gap = out.greedy_h - out.oracle_h;
  if (out.gap > 1e-9) out.certificate = std::move(oracle_table);
  return out;
}

}  // namespace entwb
