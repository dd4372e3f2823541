#include "entwb/marginal.hpp"

#include <cstddef>
#include <string>
#include <utility>

#include "entwb/errors.hpp"

namespace entwb {

namespace {

// Clamps entries in [-tol, 0] to zero, rejects anything more negative.
void clean_entries(std::vector<double>& probs, double tol) {
  if (probs.empty()) throw OutOfRange("marginal: empty probability vector");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < -tol) {
      throw NegativeMass("marginal: negative mass " + std::to_string(probs[i]) +
                         " at index " + std::to_string(i));
    }
    if (probs[i] < 0.0) probs[i] = 0.0;
  }
}

double total_mass(const std::vector<double>& probs) {
  CompensatedSum s;
  for (double p : probs) s.add(p);
  return s.value();
}

}  // namespace

MarginalDistribution validate_marginal(std::vector<double> probs,
                                       std::vector<std::string> labels,
                                       double tol) {
  clean_entries(probs, tol);
  if (!labels.empty() && labels.size() != probs.size()) {
    throw DimensionMismatch("marginal: " + std::to_string(labels.size()) +
                            " labels for " + std::to_string(probs.size()) +
                            " probabilities");
  }
  const double total = total_mass(probs);
  if (std::abs(total - 1.0) > tol) {
    throw MassNotOne("marginal: probabilities sum to " + std::to_string(total));
  }
  MarginalDistribution d;
  d.probs_ = std::move(probs);
  d.labels_ = std::move(labels);
  d.tail_mass_ = 0.0;
  return d;
}

MarginalDistribution validate_marginal(std::vector<double> probs, double tol) {
  return validate_marginal(std::move(probs), {}, tol);
}

MarginalDistribution make_truncated_marginal(std::vector<double> probs,
                                             double tail_mass, double tol) {
  clean_entries(probs, tol);
  if (tail_mass < -tol) {
    throw NegativeMass("marginal: negative tail mass " +
                       std::to_string(tail_mass));
  }
  if (tail_mass < 0.0) tail_mass = 0.0;
  const double total = total_mass(probs) + tail_mass;
  if (std::abs(total - 1.0) > tol) {
    throw MassNotOne("marginal: probabilities plus tail sum to " +
                     std::to_string(total));
  }
  MarginalDistribution d;
  d.probs_ = std::move(probs);
  d.tail_mass_ = tail_mass;
  return d;
}

double entropy(const MarginalDistribution& d) {
  CompensatedSum s;
  for (double p : d.probs()) s.add(neg_p_log_p(p));
  return s.value();
}

}  // namespace entwb
