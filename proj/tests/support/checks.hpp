#ifndef KGAT_TESTS_CHECKS_HPP_
#define KGAT_TESTS_CHECKS_HPP_

#include <cstddef>
#include <vector>

#include "kgat/dataset.hpp"
#include "kgat/metrics.hpp"

// Whole-suite checks shared by the acceptance runner. Each returns numbers
// rather than asserting so the caller can report them.
namespace kgat::checks {

// Max |vectorized - triple loop| over `trials` random matrices up to 20x20,
// K = 21, for both the plain and the taped kernel pooling.
double kernel_pool_oracle_gap(int trials, std::uint64_t seed);

// Claim with two short evidence sentences over the random-instance vocabulary.
ClaimInstance two_node_instance();

// Max gap between the model forward and the scalar oracle on the two-node
// instance, over K in {5, 21} and all four modes (probs, loss, selection, beta).
double two_node_oracle_gap();

struct PropertyReport {
  int instances = 0;
  double normalization_gap = 0.0;  // worst |sum - 1| over P(y), P(n), alpha, beta
  std::size_t pad_violations = 0;  // nonzero weight on a PAD position or node
  double equivariance_gap = 0.0;   // worst change under evidence permutation
};

PropertyReport property_suite(int instances);

// Six claims covering every counting branch of LA, FEVER and P/R/F1.
struct MetricsFixture {
  std::vector<GoldClaim> gold;
  std::vector<Prediction> preds;
  double la = 0.0, fever = 0.0, gfever = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};
MetricsFixture metrics_fixture();
bool metrics_fixture_exact();

}  // namespace kgat::checks

#endif  // KGAT_TESTS_CHECKS_HPP_
