#include "sscnn/optim.hpp"

#include <cmath>

#include "sscnn/errors.hpp"

namespace sscnn {

NonFiniteGradient::NonFiniteGradient(const std::string& name)
    : Error("non-finite gradient for tensor '" + name + "'"), tensor_name(name) {}

namespace {

void check_finite(const ad::GradMap& grads) {
    for (const auto& [name, g] : grads)
        if (!g.allFinite()) throw NonFiniteGradient(name);
}

}  // namespace

void sgd_step(ParamStore& params, const ad::GradMap& grads, const SgdOptions& opts) {
    check_finite(grads);
    for (auto& [name, value] : params) {
        auto it = grads.find(name);
        if (it == grads.end()) continue;
        value -= opts.learning_rate * it->second;
    }
}

void AdamOptimizer::step(ParamStore& params, const ad::GradMap& grads) {
    check_finite(grads);
    ++t_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, t_);
    const double bc2 = 1.0 - std::pow(opts_.beta2, t_);
    for (auto& [name, value] : params) {
        auto it = grads.find(name);
        if (it == grads.end()) continue;
        const Matrix& g = it->second;
        auto [mit, inserted_m] = m_.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
        auto [vit, inserted_v] = v_.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
        Matrix& m = mit->second;
        Matrix& v = vit->second;
        m = opts_.beta1 * m + (1.0 - opts_.beta1) * g;
        v = opts_.beta2 * v + (1.0 - opts_.beta2) * g.cwiseProduct(g);
        const Matrix m_hat = m / bc1;
        const Matrix v_hat = v / bc2;
        value -= opts_.learning_rate *
                 (m_hat.array() / (v_hat.array().sqrt() + opts_.eps)).matrix();
    }
}

}  // namespace sscnn
