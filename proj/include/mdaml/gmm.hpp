#pragma once

#include <cstdint>

#include "mdaml/data.hpp"
#include "mdaml/model.hpp"

namespace mdaml {

/// Initial anchors from a diagonal-covariance Gaussian mixture fitted with
/// EM: centers are component means, weights the posterior responsibilities
/// (clamped to ≥ 1e-8 and renormalized). k-means++ seeding, at most 100 EM
/// iterations, relative log-likelihood tolerance 1e-6, variance
/// regularization 1e-6. A component that loses all responsibility mass is
/// re-seeded at the point farthest from the surviving centers; repeated
/// failure raises DataError.
AnchorModel gmm_init(const Dataset& data, int num_components,
                     std::uint64_t seed);

}  // namespace mdaml
