#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "entwb/numeric.hpp"

namespace entwb {

/// A finite (possibly truncated-denumerable) probability vector.
///
/// tail_mass records the mass discarded when a denumerable law was cut to a
/// finite prefix; it is zero for exact finite distributions. Entries plus
/// tail sum to one within the validation tolerance. Labels are optional
/// value tags and are never consulted by entropy computations.
class MarginalDistribution {
 public:
  // Empty placeholder; real instances come from the validating factories.
  MarginalDistribution() = default;

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<std::string>& labels() const { return labels_; }
  double tail_mass() const { return tail_mass_; }

  friend MarginalDistribution validate_marginal(std::vector<double> probs,
                                                std::vector<std::string> labels,
                                                double tol);
  friend MarginalDistribution make_truncated_marginal(std::vector<double> probs,
                                                      double tail_mass,
                                                      double tol);

 private:
  std::vector<double> probs_;
  std::vector<std::string> labels_;
  double tail_mass_ = 0.0;
};

/// Validates a probability vector: entries below -tol raise NegativeMass,
/// tiny negatives in [-tol, 0] are clamped to zero, and a total further than
/// tol from one raises MassNotOne.
MarginalDistribution validate_marginal(std::vector<double> probs,
                                       std::vector<std::string> labels,
                                       double tol = kMassTol);
MarginalDistribution validate_marginal(std::vector<double> probs,
                                       double tol = kMassTol);

/// Accepts the prefix of a denumerable law whose discarded tail mass is
/// already known; entries + tail_mass must reach one within tol.
MarginalDistribution make_truncated_marginal(std::vector<double> probs,
                                             double tail_mass,
                                             double tol = kMassTol);

/// H(X) = -sum_r p_r log p_r in nats, with 0 log 0 = 0. The tail mass does
/// not contribute; its bounded entropy contribution is reported separately
/// (see tail_entropy_bound).
double entropy(const MarginalDistribution& d);

}  // namespace entwb
