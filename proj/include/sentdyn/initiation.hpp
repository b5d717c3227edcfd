#pragma once

#include <cstddef>
#include <vector>

#include "sentdyn/corpus.hpp"

namespace sentdyn {

// Position of the first initiation when n_I initiations and n_P
// participations are ordered uniformly at random.
struct FirstInitiationPmf {
    std::size_t n_initiations = 0;
    std::size_t n_participations = 0;
    std::vector<double> pmf; // pmf[k] = P(first initiation at position k + 1)
    std::vector<double> cumulative; // cumulative[k] = P(first initiation at position <= k + 1)

    // P(first initiation at position <= i); 0 for i == 0.
    double cdf(std::size_t i) const;
};

// P(i) = C(n_I + n_P - i, n_I - 1) / C(n_I + n_P, n_I), i = 1..n_P + 1,
// evaluated as exact rationals and rounded once.
FirstInitiationPmf first_initiation_pmf(std::size_t n_initiations, std::size_t n_participations);

struct RhoCurves {
    std::vector<double> observed; // index i - 1
    std::vector<double> expected;
};

// Fraction of users with an initiation among their first i discussions,
// observed and under the order-randomising null, for i = 1..max_i.
RhoCurves rho_curves(const std::vector<DiscussionSequence>& sequences, std::size_t max_i);

} // namespace sentdyn
