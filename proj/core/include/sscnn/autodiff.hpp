#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sscnn/types.hpp"

namespace sscnn::ad {

using Matrix = Eigen::MatrixXd;
using GradMap = std::map<std::string, Matrix>;

class Tape;

/// Handle to a node on the tape that created it.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Running batch-norm statistics, persisted across forward passes and saved
/// into checkpoints. Updated during train-mode forwards only.
struct BatchNormState {
    Vector running_mean;
    Vector running_var;
    bool initialized = false;
};

struct Conv3dSpec {
    int in_res = 0;   // input voxels per axis
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 3;
    int stride = 2;

    int out_res() const { return (in_res - kernel) / stride + 1; }
    int patch_size() const { return kernel * kernel * kernel * in_channels; }
};

/// Reverse-mode tape over dense matrices. Nodes are appended in evaluation
/// order, so a single reverse sweep is a valid topological order. One tape
/// records one forward pass; parameters re-enter each pass as named leaves.
class Tape {
public:
    /// Leaf that never needs a gradient (inputs, fixed bases).
    Var constant(Matrix value);
    /// Leaf with gradient tracking but no name (used by tests).
    Var input(Matrix value);
    /// Named trainable leaf; gradients are returned under this name.
    Var param(const std::string& name, const Matrix& value);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double s);
    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var cwise_mul(Var a, Var b);
    Var relu(Var a);
    /// Inverted dropout: train-time scaling by 1/(1-rate); mask drawn from
    /// `seed` so a rebuilt tape reproduces it exactly.
    Var dropout(Var a, double rate, std::uint64_t seed);
    Var concat_rows(const std::vector<Var>& parts);
    Var concat_cols(const std::vector<Var>& parts);
    Var top_rows(Var a, int count);
    Var bottom_rows(Var a, int count);
    /// Broadcasts a 1 x d bias over all rows.
    Var add_rowvec(Var a, Var bias);
    /// Per-channel normalization over the vertex (row) dimension.
    Var batch_norm(Var a, Var gamma, Var beta, BatchNormState* state, bool training,
                   double eps = 1e-5, double momentum = 0.1);
    /// Input (in_res^3 x in_channels), weights (kernel^3*in_channels x
    /// out_channels), bias (1 x out_channels). Voxel v = x + R*(y + R*z).
    Var conv3d(Var x, Var weights, Var bias, const Conv3dSpec& spec);
    /// Row-major reshape.
    Var reshape(Var a, int rows, int cols);

    Var sum(Var a);                                   // 1x1
    Var frobenius_sq(Var a);                          // ||A||_F^2, 1x1
    Var dot_const(Var a, const Matrix& u);            // sum(A .* u), 1x1
    /// Mean over rows of the softmax cross-entropy against integer labels.
    Var softmax_cross_entropy(Var logits, const std::vector<int>& labels);
    /// Mean over rows of the squared distance to a fixed target.
    Var l2_loss(Var pred, const Matrix& target);

    const Matrix& value(Var v) const;
    /// Gradient of the last backward()'s loss w.r.t. this node. Zero matrix
    /// if the node did not influence the loss.
    const Matrix& grad(Var v) const;

    /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. Returns the
    /// gradients of all named parameters (zeros included for untouched ones).
    /// Throws DisconnectedLoss if no trainable leaf can influence the loss.
    GradMap backward(Var loss);

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        bool grad_seeded = false;
        std::string param_name;
        std::vector<int> parents;
        // Propagates this node's grad into its parents' grads.
        std::function<void(Tape&, const Node&)> backward;
    };

    Var emplace(Matrix value, std::vector<int> parents,
                std::function<void(Tape&, const Node&)> backward);
    Node& node(Var v);
    const Node& node(Var v) const;
    void accumulate(int id, const Matrix& g);

    std::vector<Node> nodes_;
    mutable Matrix zero_;  // returned by grad() for untouched nodes
};

}  // namespace sscnn::ad
