#pragma once

#include <map>
#include <string>

#include "sscnn/autodiff.hpp"
#include "sscnn/types.hpp"

namespace sscnn {

/// Named trainable tensors. std::map keeps iteration deterministic.
using ParamStore = std::map<std::string, Matrix>;

struct SgdOptions {
    double learning_rate = 1e-3;
};

struct AdamOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// params -= lr * grads. Parameters without a gradient entry are untouched.
/// Throws NonFiniteGradient (naming the tensor) and leaves all parameters
/// unchanged if any gradient is non-finite.
void sgd_step(ParamStore& params, const ad::GradMap& grads, const SgdOptions& opts);

class AdamOptimizer {
public:
    explicit AdamOptimizer(AdamOptions opts = {}) : opts_(opts) {}

    /// One bias-corrected Adam update. Same non-finite contract as sgd_step.
    void step(ParamStore& params, const ad::GradMap& grads);

    int steps_taken() const { return t_; }

private:
    AdamOptions opts_;
    std::map<std::string, Matrix> m_;
    std::map<std::string, Matrix> v_;
    int t_ = 0;
};

}  // namespace sscnn
