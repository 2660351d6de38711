#include "sscnn/gradcheck.hpp"

#include <cmath>

#include "sscnn/errors.hpp"

namespace sscnn {

namespace {

double loss_value(Network& net, const TrainingShape& shape, double ortho_weight,
                  std::uint64_t dropout_seed, ad::GradMap* grads_out) {
    FmapContext ctx;
    if (shape.voxel_values) ctx.voxel_values = &*shape.voxel_values;

    ad::Tape tape;
    ForwardResult fwd =
        net.forward(tape, shape.basis, ctx, shape.features, RunMode::Train, dropout_seed);
    ad::Var loss;
    if (net.config().head.kind == HeadKind::Normals) {
        loss = tape.l2_loss(fwd.output, *shape.normals);
    } else {
        loss = tape.softmax_cross_entropy(fwd.output, *shape.labels);
    }
    if (fwd.fmap.valid() && ortho_weight > 0.0) {
        const Matrix& c = tape.value(fwd.fmap);
        ad::Var gram = c.rows() <= c.cols()
                           ? tape.matmul(fwd.fmap, tape.transpose(fwd.fmap))
                           : tape.matmul(tape.transpose(fwd.fmap), fwd.fmap);
        const int k = static_cast<int>(std::min(c.rows(), c.cols()));
        ad::Var penalty =
            tape.frobenius_sq(tape.sub(gram, tape.constant(Matrix::Identity(k, k))));
        loss = tape.add(loss, tape.scale(penalty, ortho_weight));
    }
    if (grads_out) *grads_out = tape.backward(loss);
    return tape.value(loss)(0, 0);
}

}  // namespace

GradCheckReport finite_difference_check(Network& net, const TrainingShape& shape,
                                        double ortho_weight, double step,
                                        std::uint64_t dropout_seed) {
    const auto saved_bn = net.bn_states();

    ad::GradMap analytic;
    loss_value(net, shape, ortho_weight, dropout_seed, &analytic);

    GradCheckReport report;
    for (auto& [name, param] : net.params()) {
        const Matrix& grad = analytic.at(name);
        for (int i = 0; i < param.rows(); ++i) {
            for (int j = 0; j < param.cols(); ++j) {
                const double saved = param(i, j);
                param(i, j) = saved + step;
                const double up = loss_value(net, shape, ortho_weight, dropout_seed, nullptr);
                param(i, j) = saved - step;
                const double down = loss_value(net, shape, ortho_weight, dropout_seed, nullptr);
                param(i, j) = saved;

                const double numeric = (up - down) / (2.0 * step);
                const double analytic_ij = grad(i, j);
                const double rel = std::abs(analytic_ij - numeric) /
                                   std::max({std::abs(analytic_ij), std::abs(numeric), 1.0});
                ++report.entries_checked;
                if (rel > report.max_rel_error) {
                    report.max_rel_error = rel;
                    report.worst_tensor = name;
                }
            }
        }
    }

    net.bn_states() = saved_bn;
    return report;
}

}  // namespace sscnn
