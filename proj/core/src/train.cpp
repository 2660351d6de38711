#include "sscnn/train.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "sscnn/errors.hpp"
#include "sscnn/io.hpp"

namespace sscnn {

namespace {

ad::Var task_loss(ad::Tape& tape, const Network& net, const ForwardResult& fwd,
                  const TrainingShape& shape) {
    switch (net.config().head.kind) {
        case HeadKind::Segmentation:
        case HeadKind::Keypoint:
            if (!shape.labels)
                throw MissingPrerequisite("labels for shape " + shape.key, "the dataset");
            return tape.softmax_cross_entropy(fwd.output, *shape.labels);
        case HeadKind::Normals:
            if (!shape.normals)
                throw MissingPrerequisite("normals for shape " + shape.key, "the dataset");
            return tape.l2_loss(fwd.output, *shape.normals);
    }
    throw BadSpecError("unhandled head kind");
}

ad::Var ortho_penalty(ad::Tape& tape, ad::Var map) {
    const auto& c = tape.value(map);
    if (c.rows() <= c.cols()) {
        ad::Var gram = tape.matmul(map, tape.transpose(map));
        ad::Var eye = tape.constant(Matrix::Identity(c.rows(), c.rows()));
        return tape.frobenius_sq(tape.sub(gram, eye));
    }
    ad::Var gram = tape.matmul(tape.transpose(map), map);
    ad::Var eye = tape.constant(Matrix::Identity(c.cols(), c.cols()));
    return tape.frobenius_sq(tape.sub(gram, eye));
}

FmapContext context_of(const TrainingShape& shape) {
    FmapContext ctx;
    if (shape.voxel_values) ctx.voxel_values = &*shape.voxel_values;
    return ctx;
}

}  // namespace

double evaluate_loss(const Network& net, const TrainingShape& shape) {
    ad::Tape tape;
    ForwardResult fwd =
        net.forward(tape, shape.basis, context_of(shape), shape.features, RunMode::Eval);
    return tape.value(task_loss(tape, net, fwd, shape))(0, 0);
}

std::vector<LossRecord> train_network(Network& net, std::vector<TrainingShape>& shapes,
                                      const TrainOptions& opts) {
    if (shapes.empty()) throw BadSpecError("train_network: empty dataset");

    AdamOptimizer adam(AdamOptions{opts.learning_rate});
    SgdOptions sgd{opts.learning_rate};
    const bool use_adam = opts.optimizer == "adam";
    if (!use_adam && opts.optimizer != "sgd")
        throw BadSpecError("optimizer must be adam or sgd");

    std::vector<LossRecord> history;
    std::vector<int> order(shapes.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        std::mt19937_64 epoch_rng(opts.seed ^ (0x9e3779b97f4a7c15ULL * epoch));
        std::shuffle(order.begin(), order.end(), epoch_rng);

        double epoch_loss = 0.0;
        for (int idx : order) {
            TrainingShape& shape = shapes[idx];
            ad::Tape tape;
            // Masks are seeded per shape, not per step, so a zero learning
            // rate yields a constant loss history.
            const RunMode mode =
                opts.freeze_batch_norm ? RunMode::TrainFrozenNorm : RunMode::Train;
            ForwardResult fwd = net.forward(tape, shape.basis, context_of(shape),
                                            shape.features, mode,
                                            opts.seed + 7919ULL * (idx + 1));
            ad::Var loss = task_loss(tape, net, fwd, shape);
            if (fwd.fmap.valid() && opts.ortho_weight > 0.0)
                loss = tape.add(loss, tape.scale(ortho_penalty(tape, fwd.fmap),
                                                 opts.ortho_weight));
            epoch_loss += tape.value(loss)(0, 0);
            ad::GradMap grads = tape.backward(loss);
            if (use_adam)
                adam.step(net.params(), grads);
            else
                sgd_step(net.params(), grads, sgd);
            ++net.step();
        }
        epoch_loss /= static_cast<double>(shapes.size());
        history.push_back(LossRecord{epoch, "train", epoch_loss});
        if (opts.on_epoch && !opts.on_epoch(epoch, epoch_loss)) break;
    }
    return history;
}

std::vector<LossRecord> pretrain_spectn(const SpecTNConfig& config, ParamStore& params,
                                        const std::vector<TrainingShape>& shapes,
                                        const TrainOptions& opts) {
    if (shapes.empty()) throw BadSpecError("pretrain_spectn: empty dataset");
    for (const TrainingShape& shape : shapes) {
        if (!shape.voxel_values || !shape.fmap_target)
            throw MissingPrerequisite("voxelized basis and precomputed map for " + shape.key,
                                      "precompute-fmap");
    }

    SpecTN spectn(config);
    AdamOptimizer adam(AdamOptions{opts.learning_rate});
    SgdOptions sgd{opts.learning_rate};
    const bool use_adam = opts.optimizer == "adam";

    std::vector<LossRecord> history;
    std::vector<int> order(shapes.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        std::mt19937_64 epoch_rng(opts.seed ^ (0xbf58476d1ce4e5b9ULL * epoch));
        std::shuffle(order.begin(), order.end(), epoch_rng);

        double epoch_loss = 0.0;
        for (int idx : order) {
            const TrainingShape& shape = shapes[idx];
            ad::Tape tape;
            ad::Var map = spectn.forward(tape, params, *shape.voxel_values);
            ad::Var fit = tape.frobenius_sq(tape.sub(map, tape.constant(*shape.fmap_target)));
            ad::Var loss = opts.ortho_weight > 0.0
                               ? tape.add(fit, tape.scale(ortho_penalty(tape, map),
                                                          opts.ortho_weight))
                               : fit;
            epoch_loss += tape.value(loss)(0, 0);
            ad::GradMap grads = tape.backward(loss);
            if (use_adam)
                adam.step(params, grads);
            else
                sgd_step(params, grads, sgd);
        }
        epoch_loss /= static_cast<double>(shapes.size());
        history.push_back(LossRecord{epoch, "pretrain", epoch_loss});
        if (opts.on_epoch && !opts.on_epoch(epoch, epoch_loss)) break;
    }
    return history;
}

void write_loss_history(const std::string& path, const std::vector<LossRecord>& history) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << "epoch,phase,loss\n";
    for (const LossRecord& r : history)
        os << r.epoch << "," << r.phase << "," << format_double(r.loss) << "\n";
}

}  // namespace sscnn
