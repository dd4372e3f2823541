#include <doctest.h>

#include <cmath>

#include "entwb/errors.hpp"
#include "entwb/marginal.hpp"
#include "helpers.hpp"

using namespace entwb;

TEST_CASE("validate_marginal accepts exact simplex points") {
  const auto d = validate_marginal({0.6, 0.4}, 1e-9);
  CHECK(d.size() == 2);
  CHECK(d[0] == 0.6);
  CHECK(d.tail_mass() == 0.0);
}

TEST_CASE("validate_marginal rejects bad mass") {
  CHECK_THROWS_AS(validate_marginal({0.6, 0.5}), MassNotOne);
  CHECK_THROWS_AS(validate_marginal({0.7, -0.3, 0.6}), NegativeMass);
  CHECK_THROWS_AS(validate_marginal({}), OutOfRange);
}

TEST_CASE("tiny negatives clamp to zero") {
  const auto d = validate_marginal({1.0 - 1e-12, 0.0, 1e-12 - 1e-13, 1e-13});
  for (double p : d.probs()) CHECK(p >= 0.0);
}

TEST_CASE("labels must match length") {
  CHECK_NOTHROW(validate_marginal({0.5, 0.5}, {"a", "b"}, 1e-9));
  CHECK_THROWS_AS(validate_marginal({0.5, 0.5}, {"a"}, 1e-9),
                  DimensionMismatch);
}

TEST_CASE("entropy of uniform and degenerate distributions") {
  const auto uniform4 = validate_marginal({0.25, 0.25, 0.25, 0.25});
  CHECK(entropy(uniform4) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(entropy(uniform4) == doctest::Approx(1.386294).epsilon(1e-6));

  const auto sure = validate_marginal({1.0});
  CHECK(entropy(sure) == 0.0);
}

TEST_CASE("entropy matches the direct-summation oracle") {
  const std::vector<double> probs{0.5, 0.25, 0.25};
  const auto d = validate_marginal(probs);
  CHECK(entropy(d) ==
        doctest::Approx(test::entropy_oracle(probs)).epsilon(1e-14));
  CHECK(entropy(d) == doctest::Approx(1.039721).epsilon(1e-6));

  test::Rng rng(1234);
  for (int it = 0; it < 200; ++it) {
    const auto w = rng.simplex(rng.uniform_int(1, 24));
    const auto m = validate_marginal(w);
    CHECK(entropy(m) ==
          doctest::Approx(test::entropy_oracle(w)).epsilon(1e-13));
    CHECK(entropy(m) >= 0.0);
  }
}

TEST_CASE("truncated marginals carry their tail") {
  const auto d = make_truncated_marginal({0.5, 0.25}, 0.25);
  CHECK(d.tail_mass() == 0.25);
  CHECK_THROWS_AS(make_truncated_marginal({0.5, 0.25}, 0.1), MassNotOne);
  CHECK_THROWS_AS(make_truncated_marginal({0.5, 0.25}, -0.25), NegativeMass);
}
