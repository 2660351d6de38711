#pragma once

#include <string>

#include "sscnn/network.hpp"
#include "sscnn/train.hpp"

namespace sscnn {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_tensor;
    long entries_checked = 0;
};

/// Compares every analytic parameter gradient of one train-mode forward
/// (task loss plus weighted orthogonality penalty when synchronized layers
/// exist) against central finite differences. Relative error is
/// |a - b| / max(|a|, |b|, 1). Batch-norm state is restored afterwards.
GradCheckReport finite_difference_check(Network& net, const TrainingShape& shape,
                                        double ortho_weight = 1e-2, double step = 1e-5,
                                        std::uint64_t dropout_seed = 3);

}  // namespace sscnn
