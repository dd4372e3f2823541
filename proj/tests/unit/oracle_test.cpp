#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "entwb/coupling.hpp"
#include "entwb/errors.hpp"
#include "entwb/oracle.hpp"
#include "helpers.hpp"

using namespace entwb;

namespace {

std::vector<std::vector<std::pair<int, int>>> supports(const VertexSet& v) {
  std::vector<std::vector<std::pair<int, int>>> out;
  for (const auto& t : v.vertices) {
    std::vector<std::pair<int, int>> s;
    for (const Cell& c : t.cells()) s.emplace_back(c.row, c.col);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("vertex enumeration on the 2x2 fixture") {
  const auto x = validate_marginal({0.6, 0.4});
  const auto y = validate_marginal({0.7, 0.3});
  const auto v = enumerate_vertices(x, y);
  REQUIRE(v.count() == 2);
  // The polytope is the segment p_{1,1} in [0.3, 0.6]; its endpoints.
  std::vector<double> corners;
  for (const auto& t : v.vertices) corners.push_back(t.cell(0, 0));
  std::sort(corners.begin(), corners.end());
  CHECK(corners[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(corners[1] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("vertex enumeration degenerate and symmetric cases") {
  const auto y = validate_marginal({0.5, 0.3, 0.2});
  const auto one = enumerate_vertices(validate_marginal({1.0}), y);
  CHECK(one.count() == 1);
  CHECK(one.vertices[0].cell(0, 1) == 0.3);

  const auto u = validate_marginal({0.5, 0.5});
  const auto two = enumerate_vertices(u, u);
  CHECK(two.count() == 2);  // diagonal and anti-diagonal
}

TEST_CASE("vertex enumeration preconditions") {
  const auto big = validate_marginal(std::vector<double>(7, 1.0 / 7));
  const auto six = validate_marginal(std::vector<double>(6, 1.0 / 6));
  CHECK_THROWS_AS(enumerate_vertices(big, six), TooLarge);
  CHECK_THROWS_AS(enumerate_vertices(validate_marginal({1.0, 0.0}),
                                     validate_marginal({0.5, 0.5})),
                  OutOfRange);
}

TEST_CASE("every enumerated vertex is feasible and extreme") {
  test::Rng rng(1001);
  for (int it = 0; it < 25; ++it) {
    const auto x = rng.marginal(rng.uniform_int(2, 4));
    const auto y = rng.marginal(rng.uniform_int(2, 4));
    const auto v = enumerate_vertices(x, y);
    CHECK(v.count() >= 1);
    auto sup = supports(v);
    std::sort(sup.begin(), sup.end());
    CHECK(std::adjacent_find(sup.begin(), sup.end()) == sup.end());
    for (const auto& t : v.vertices) {
      CHECK(t.support_size() <= x.size() + y.size() - 1);
    }
  }
}

TEST_CASE("oracle minimum fixtures") {
  const auto x = validate_marginal({0.6, 0.4});
  const auto y = validate_marginal({0.7, 0.3});
  const auto [t, h] = oracle_min_entropy(x, y);
  CHECK(h == doctest::Approx(0.897946).epsilon(1e-6));
  CHECK(h == doctest::Approx(joint_entropy(greedy_min_coupling(x, y).first))
                 .epsilon(1e-12));

  // The partition coupling is itself a vertex, so the oracle reaches H(X).
  const auto px = validate_marginal({0.3, 0.3, 0.2, 0.2});
  const auto py = validate_marginal({0.6, 0.4});
  const auto [pt, ph] = oracle_min_entropy(px, py);
  CHECK(ph <= 1.366159 + 1e-6);
  CHECK(ph >= std::max(entropy(px), entropy(py)) - 1e-9);
  CHECK(ph == doctest::Approx(entropy(px)).epsilon(1e-9));

  const auto u = validate_marginal({0.5, 0.5});
  CHECK(oracle_min_entropy(u, u).second ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("oracle dominates every vertex and respects the floor") {
  test::Rng rng(321);
  for (int it = 0; it < 20; ++it) {
    const auto x = rng.marginal(rng.uniform_int(2, 4));
    const auto y = rng.marginal(rng.uniform_int(2, 4));
    const auto v = enumerate_vertices(x, y);
    const auto [t, h] = oracle_min_entropy(x, y);
    for (const auto& vert : v.vertices) {
      CHECK(h <= joint_entropy(vert) + 1e-9);
    }
    CHECK(h >= std::max(entropy(x), entropy(y)) - 1e-9);
    CHECK(h <= joint_entropy(greedy_min_coupling(x, y).first) + 1e-9);
    CHECK(h <= joint_entropy(cograduation_table(x, y)) + 1e-9);
    CHECK(h <= joint_entropy(contrograduation_table(x, y)) + 1e-9);
  }
}

TEST_CASE("oracle is deterministic") {
  const auto x = validate_marginal({0.4, 0.35, 0.25});
  const auto y = validate_marginal({0.5, 0.3, 0.2});
  const auto a = oracle_min_entropy(x, y);
  const auto b = oracle_min_entropy(x, y);
  REQUIRE(a.first.support_size() == b.first.support_size());
  for (std::size_t i = 0; i < a.first.cells().size(); ++i) {
    CHECK(a.first.cells()[i].row == b.first.cells()[i].row);
    CHECK(a.first.cells()[i].col == b.first.cells()[i].col);
    CHECK(a.first.cells()[i].value == b.first.cells()[i].value);
  }
}

TEST_CASE("parallel enumeration matches the sequential result") {
  test::Rng rng(5005);
  for (int it = 0; it < 5; ++it) {
    const auto x = rng.marginal(4);
    const auto y = rng.marginal(4);
    const auto seq = enumerate_vertices(x, y);
    setenv("ENTROPY_WB_THREADS", "3", 1);
    const auto par = enumerate_vertices(x, y);
    unsetenv("ENTROPY_WB_THREADS");
    REQUIRE(par.count() == seq.count());
    const auto ss = supports(seq);
    const auto sp = supports(par);
    CHECK(ss == sp);
    for (std::size_t i = 0; i < seq.vertices.size(); ++i) {
      for (std::size_t k = 0; k < seq.vertices[i].cells().size(); ++k) {
        CHECK(seq.vertices[i].cells()[k].value ==
              par.vertices[i].cells()[k].value);
      }
    }
  }
}

TEST_CASE("grid_min_2x2 agrees with the endpoint minimum") {
  const auto x = validate_marginal({0.6, 0.4});
  const auto y = validate_marginal({0.7, 0.3});
  CHECK(grid_min_2x2(x, y, 1e-4) == doctest::Approx(0.897946).epsilon(1e-6));

  const auto u = validate_marginal({0.5, 0.5});
  CHECK(grid_min_2x2(u, u, 1e-4) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-9));

  // Single feasible table: H(Y).
  const auto deg = validate_marginal({1.0, 0.0});
  CHECK(grid_min_2x2(deg, y, 1e-4) ==
        doctest::Approx(0.610864).epsilon(1e-6));

  CHECK_THROWS_AS(grid_min_2x2(validate_marginal({0.5, 0.3, 0.2}), y, 1e-4),
                  DimensionMismatch);
  CHECK_THROWS_AS(grid_min_2x2(x, y, 0.5), OutOfRange);

  test::Rng rng(77);
  for (int it = 0; it < 100; ++it) {
    const auto a = rng.marginal(2);
    const auto b = rng.marginal(2);
    CHECK(grid_min_2x2(a, b, 1e-3) ==
          doctest::Approx(oracle_min_entropy(a, b).second).epsilon(1e-9));
  }
}

TEST_CASE("compare_greedy_oracle fixtures") {
  const auto x = validate_marginal({0.6, 0.4});
  const auto y = validate_marginal({0.7, 0.3});
  const auto c = compare_greedy_oracle(x, y);
  CHECK(std::abs(c.gap) <= 1e-9);
  CHECK_FALSE(c.certificate.has_value());

  test::Rng rng(11);
  for (int it = 0; it < 10; ++it) {
    const auto z = rng.marginal(rng.uniform_int(2, 4));
    const auto cz = compare_greedy_oracle(z, z);
    CHECK(std::abs(cz.gap) <= 1e-9);
  }

  const auto px = validate_marginal({0.3, 0.3, 0.2, 0.2});
  const auto py = validate_marginal({0.6, 0.4});
  const auto cp = compare_greedy_oracle(px, py);
  CHECK(cp.gap >= 0.138629 - 1e-6);
  REQUIRE(cp.certificate.has_value());
  CHECK(joint_entropy(*cp.certificate) ==
        doctest::Approx(cp.oracle_h).epsilon(1e-12));
}
