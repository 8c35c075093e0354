#pragma once

#include <iosfwd>

#include "seqleak/posterior.hpp"
#include "seqleak/types.hpp"

namespace seqleak::verify {

// Independent re-simulation of the assumed k-NN recommender over the test
// prefix for one full label hypothesis. Coded separately from the production
// likelihood path (full sorts, direct formula evaluation) so it can serve as
// a brute-force oracle against it.
double hypothesis_likelihood(int k, double exploration, const std::vector<Vec>& catalog,
                             const TestFeatures& x, const LabelVector& hypothesis);

// Normalized joint over all 2^n hypotheses (bit m of the index is position
// m's label). n must be small enough to enumerate.
std::vector<double> brute_force_posterior_table(int k, double exploration,
                                                const std::vector<Vec>& catalog,
                                                const TestFeatures& x);

// Random planted instance generator shared by the oracle checks.
struct PlantedInstance {
  AttackerRsModel model;
  TestFeatures x;
};
PlantedInstance random_planted_instance(std::size_t n_test, RngStream& rng);

// Oracle suites behind the `verify` CLI verb. Each prints one line per check
// and returns false on any failure.
bool check_posterior_oracle(std::size_t instances, std::uint64_t seed, double tolerance,
                            std::ostream& out);
bool check_sampling_identity(std::size_t instances, std::uint64_t seed, std::ostream& out);
bool check_cluster_partition(std::size_t instances, std::uint64_t seed, std::ostream& out);
bool check_mechanism_properties(std::size_t streams, std::uint64_t seed, std::ostream& out);

bool run_verification(std::uint64_t seed, std::ostream& out);

}  // namespace seqleak::verify
