#include "sscnn/autodiff.hpp"

#include <cmath>
#include <random>

#include "sscnn/errors.hpp"

namespace sscnn::ad {

Var Tape::emplace(Matrix value, std::vector<int> parents,
                  std::function<void(Tape&, const Node&)> backward) {
    Node n;
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.backward = std::move(backward);
    for (int p : n.parents)
        if (nodes_[p].requires_grad) n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) { return nodes_.at(v.id); }
const Tape::Node& Tape::node(Var v) const { return nodes_.at(v.id); }

void Tape::accumulate(int id, const Matrix& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (!n.grad_seeded) {
        n.grad = g;
        n.grad_seeded = true;
    } else {
        n.grad += g;
    }
}

Var Tape::constant(Matrix value) { return emplace(std::move(value), {}, nullptr); }

Var Tape::input(Matrix value) {
    Var v = emplace(std::move(value), {}, nullptr);
    nodes_[v.id].requires_grad = true;
    return v;
}

Var Tape::param(const std::string& name, const Matrix& value) {
    Var v = input(value);
    nodes_[v.id].param_name = name;
    return v;
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

const Matrix& Tape::grad(Var v) const {
    const Node& n = node(v);
    if (!n.grad_seeded) {
        zero_ = Matrix::Zero(n.value.rows(), n.value.cols());
        return zero_;
    }
    return n.grad;
}

Var Tape::add(Var a, Var b) {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
        throw DimensionMismatch("add: shape mismatch");
    const int ia = a.id, ib = b.id;
    return emplace(value(a) + value(b), {ia, ib}, [ia, ib](Tape& t, const Node& self) {
        t.accumulate(ia, self.grad);
        t.accumulate(ib, self.grad);
    });
}

Var Tape::sub(Var a, Var b) {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
        throw DimensionMismatch("sub: shape mismatch");
    const int ia = a.id, ib = b.id;
    return emplace(value(a) - value(b), {ia, ib}, [ia, ib](Tape& t, const Node& self) {
        t.accumulate(ia, self.grad);
        t.accumulate(ib, -self.grad);
    });
}

Var Tape::scale(Var a, double s) {
    const int ia = a.id;
    return emplace(s * value(a), {ia}, [ia, s](Tape& t, const Node& self) {
        t.accumulate(ia, (s * self.grad).eval());
    });
}

Var Tape::matmul(Var a, Var b) {
    if (value(a).cols() != value(b).rows())
        throw DimensionMismatch("matmul: inner dimensions disagree");
    const int ia = a.id, ib = b.id;
    return emplace(value(a) * value(b), {ia, ib}, [ia, ib](Tape& t, const Node& self) {
        t.accumulate(ia, (self.grad * t.nodes_[ib].value.transpose()).eval());
        t.accumulate(ib, (t.nodes_[ia].value.transpose() * self.grad).eval());
    });
}

Var Tape::transpose(Var a) {
    const int ia = a.id;
    return emplace(value(a).transpose(), {ia}, [ia](Tape& t, const Node& self) {
        t.accumulate(ia, self.grad.transpose().eval());
    });
}

Var Tape::cwise_mul(Var a, Var b) {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
        throw DimensionMismatch("cwise_mul: shape mismatch");
    const int ia = a.id, ib = b.id;
    return emplace(value(a).cwiseProduct(value(b)), {ia, ib},
                   [ia, ib](Tape& t, const Node& self) {
                       t.accumulate(ia, self.grad.cwiseProduct(t.nodes_[ib].value).eval());
                       t.accumulate(ib, self.grad.cwiseProduct(t.nodes_[ia].value).eval());
                   });
}

Var Tape::relu(Var a) {
    const int ia = a.id;
    Matrix mask = (value(a).array() > 0.0).cast<double>();
    Matrix out = value(a).cwiseProduct(mask);
    return emplace(std::move(out), {ia}, [ia, mask](Tape& t, const Node& self) {
        t.accumulate(ia, self.grad.cwiseProduct(mask).eval());
    });
}

Var Tape::dropout(Var a, double rate, std::uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0) throw BadSpecError("dropout rate must be in [0, 1)");
    const int ia = a.id;
    if (rate == 0.0) {
        return emplace(value(a), {ia}, [ia](Tape& t, const Node& self) {
            t.accumulate(ia, self.grad);
        });
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - rate);
    Matrix mask(value(a).rows(), value(a).cols());
    for (int i = 0; i < mask.rows(); ++i)
        for (int j = 0; j < mask.cols(); ++j)
            mask(i, j) = unit(rng) >= rate ? keep_scale : 0.0;
    return emplace(value(a).cwiseProduct(mask), {ia}, [ia, mask](Tape& t, const Node& self) {
        t.accumulate(ia, self.grad.cwiseProduct(mask).eval());
    });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw DimensionMismatch("concat_rows: no parts");
    int rows = 0;
    const int cols = static_cast<int>(value(parts[0]).cols());
    std::vector<int> ids;
    std::vector<int> heights;
    for (Var p : parts) {
        if (value(p).cols() != cols) throw DimensionMismatch("concat_rows: column mismatch");
        rows += static_cast<int>(value(p).rows());
        ids.push_back(p.id);
        heights.push_back(static_cast<int>(value(p).rows()));
    }
    Matrix out(rows, cols);
    int at = 0;
    for (size_t i = 0; i < ids.size(); ++i) {
        out.middleRows(at, heights[i]) = nodes_[ids[i]].value;
        at += heights[i];
    }
    return emplace(std::move(out), ids, [ids, heights](Tape& t, const Node& self) {
        int offset = 0;
        for (size_t i = 0; i < ids.size(); ++i) {
            t.accumulate(ids[i], self.grad.middleRows(offset, heights[i]).eval());
            offset += heights[i];
        }
    });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw DimensionMismatch("concat_cols: no parts");
    const int rows = static_cast<int>(value(parts[0]).rows());
    int cols = 0;
    std::vector<int> ids;
    std::vector<int> widths;
    for (Var p : parts) {
        if (value(p).rows() != rows) throw DimensionMismatch("concat_cols: row mismatch");
        cols += static_cast<int>(value(p).cols());
        ids.push_back(p.id);
        widths.push_back(static_cast<int>(value(p).cols()));
    }
    Matrix out(rows, cols);
    int at = 0;
    for (size_t i = 0; i < ids.size(); ++i) {
        out.middleCols(at, widths[i]) = nodes_[ids[i]].value;
        at += widths[i];
    }
    return emplace(std::move(out), ids, [ids, widths](Tape& t, const Node& self) {
        int offset = 0;
        for (size_t i = 0; i < ids.size(); ++i) {
            t.accumulate(ids[i], self.grad.middleCols(offset, widths[i]).eval());
            offset += widths[i];
        }
    });
}

Var Tape::top_rows(Var a, int count) {
    if (count < 0 || count > value(a).rows()) throw DimensionMismatch("top_rows: bad count");
    const int ia = a.id;
    const int rows = static_cast<int>(value(a).rows());
    const int cols = static_cast<int>(value(a).cols());
    return emplace(value(a).topRows(count), {ia},
                   [ia, rows, cols, count](Tape& t, const Node& self) {
                       Matrix g = Matrix::Zero(rows, cols);
                       g.topRows(count) = self.grad;
                       t.accumulate(ia, g);
                   });
}

Var Tape::bottom_rows(Var a, int count) {
    if (count < 0 || count > value(a).rows())
        throw DimensionMismatch("bottom_rows: bad count");
    const int ia = a.id;
    const int rows = static_cast<int>(value(a).rows());
    const int cols = static_cast<int>(value(a).cols());
    return emplace(value(a).bottomRows(count), {ia},
                   [ia, rows, cols, count](Tape& t, const Node& self) {
                       Matrix g = Matrix::Zero(rows, cols);
                       g.bottomRows(count) = self.grad;
                       t.accumulate(ia, g);
                   });
}

Var Tape::add_rowvec(Var a, Var bias) {
    if (value(bias).rows() != 1 || value(bias).cols() != value(a).cols())
        throw DimensionMismatch("add_rowvec: bias must be 1 x cols(a)");
    const int ia = a.id, ibias = bias.id;
    Matrix out = value(a);
    out.rowwise() += value(bias).row(0);
    return emplace(std::move(out), {ia, ibias}, [ia, ibias](Tape& t, const Node& self) {
        t.accumulate(ia, self.grad);
        t.accumulate(ibias, self.grad.colwise().sum().eval());
    });
}

Var Tape::batch_norm(Var a, Var gamma, Var beta, BatchNormState* state, bool training,
                     double eps, double momentum) {
    const Matrix& x = value(a);
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    if (value(gamma).rows() != 1 || value(gamma).cols() != d ||
        value(beta).rows() != 1 || value(beta).cols() != d)
        throw DimensionMismatch("batch_norm: gamma/beta must be 1 x channels");
    if (state == nullptr) throw BadSpecError("batch_norm: missing running state");

    Vector mean(d), var(d);
    if (training) {
        mean = x.colwise().mean();
        var = (x.rowwise() - mean.transpose()).array().square().colwise().mean();
        if (!state->initialized) {
            state->running_mean = mean;
            state->running_var = var;
            state->initialized = true;
        } else {
            state->running_mean = (1.0 - momentum) * state->running_mean + momentum * mean;
            state->running_var = (1.0 - momentum) * state->running_var + momentum * var;
        }
    } else {
        if (!state->initialized) {
            // Eval before any training step: normalize with identity stats.
            state->running_mean = Vector::Zero(d);
            state->running_var = Vector::Ones(d);
            state->initialized = true;
        }
        mean = state->running_mean;
        var = state->running_var;
    }

    Vector inv_std = (var.array() + eps).rsqrt();
    Matrix normalized = ((x.rowwise() - mean.transpose()).array().rowwise() *
                         inv_std.transpose().array())
                            .matrix();
    Matrix out = (normalized.array().rowwise() * value(gamma).row(0).array()).matrix();
    out.rowwise() += value(beta).row(0);

    const int ia = a.id, ig = gamma.id, ib = beta.id;
    if (training) {
        return emplace(std::move(out), {ia, ig, ib},
                       [ia, ig, ib, normalized, inv_std, n](Tape& t, const Node& self) {
                           const Matrix& delta = self.grad;
                           const Eigen::RowVectorXd g = t.nodes_[ig].value.row(0);
                           t.accumulate(ig, delta.cwiseProduct(normalized).colwise().sum().eval());
                           t.accumulate(ib, delta.colwise().sum().eval());
                           // d_xhat = delta .* gamma (broadcast over rows)
                           Matrix d_xhat = (delta.array().rowwise() * g.array()).matrix();
                           const Eigen::RowVectorXd sum_d = d_xhat.colwise().sum();
                           const Eigen::RowVectorXd sum_dx =
                               d_xhat.cwiseProduct(normalized).colwise().sum();
                           Matrix dx = (d_xhat * static_cast<double>(n)).rowwise() - sum_d;
                           dx -= (normalized.array().rowwise() * sum_dx.array()).matrix();
                           dx = (dx.array().rowwise() *
                                 (inv_std.transpose().array() / static_cast<double>(n)))
                                    .matrix();
                           t.accumulate(ia, dx);
                       });
    }
    return emplace(std::move(out), {ia, ig, ib},
                   [ia, ig, ib, normalized, inv_std](Tape& t, const Node& self) {
                       const Matrix& delta = self.grad;
                       const Eigen::RowVectorXd g = t.nodes_[ig].value.row(0);
                       t.accumulate(ig, delta.cwiseProduct(normalized).colwise().sum().eval());
                       t.accumulate(ib, delta.colwise().sum().eval());
                       Matrix dx = (delta.array().rowwise() *
                                    (g.array() * inv_std.transpose().array()))
                                       .matrix();
                       t.accumulate(ia, dx);
                   });
}

namespace {

// Patch column layout: offset-major, channel-minor. Offsets enumerate as
// dx + k*(dy + k*dz); voxels as x + R*(y + R*z).
void for_each_patch_entry(const Conv3dSpec& spec,
                          const std::function<void(int out_voxel, int in_voxel, int col)>& fn) {
    const int r = spec.in_res;
    const int ro = spec.out_res();
    const int k = spec.kernel;
    for (int oz = 0; oz < ro; ++oz)
        for (int oy = 0; oy < ro; ++oy)
            for (int ox = 0; ox < ro; ++ox) {
                const int out_voxel = ox + ro * (oy + ro * oz);
                for (int dz = 0; dz < k; ++dz)
                    for (int dy = 0; dy < k; ++dy)
                        for (int dx = 0; dx < k; ++dx) {
                            const int ix = ox * spec.stride + dx;
                            const int iy = oy * spec.stride + dy;
                            const int iz = oz * spec.stride + dz;
                            const int in_voxel = ix + r * (iy + r * iz);
                            const int offset = dx + k * (dy + k * dz);
                            fn(out_voxel, in_voxel, offset);
                        }
            }
}

}  // namespace

Var Tape::conv3d(Var x, Var weights, Var bias, const Conv3dSpec& spec) {
    const int r3 = spec.in_res * spec.in_res * spec.in_res;
    const int ro = spec.out_res();
    if (ro < 1) throw BadSpecError("conv3d: kernel larger than input grid");
    const int out_vox = ro * ro * ro;
    if (value(x).rows() != r3 || value(x).cols() != spec.in_channels)
        throw ShapeMismatch("conv3d: input must be in_res^3 x in_channels");
    if (value(weights).rows() != spec.patch_size() ||
        value(weights).cols() != spec.out_channels)
        throw ShapeMismatch("conv3d: weights must be kernel^3*in_channels x out_channels");
    if (value(bias).rows() != 1 || value(bias).cols() != spec.out_channels)
        throw ShapeMismatch("conv3d: bias must be 1 x out_channels");

    const int cin = spec.in_channels;
    Matrix patches(out_vox, spec.patch_size());
    {
        const Matrix& in = value(x);
        for_each_patch_entry(spec, [&](int out_voxel, int in_voxel, int offset) {
            for (int c = 0; c < cin; ++c)
                patches(out_voxel, offset * cin + c) = in(in_voxel, c);
        });
    }
    Matrix out = patches * value(weights);
    out.rowwise() += value(bias).row(0);

    const int ix = x.id, iw = weights.id, ib = bias.id;
    return emplace(std::move(out), {ix, iw, ib},
                   [ix, iw, ib, patches, spec, r3, cin](Tape& t, const Node& self) {
                       const Matrix& delta = self.grad;
                       t.accumulate(iw, (patches.transpose() * delta).eval());
                       t.accumulate(ib, delta.colwise().sum().eval());
                       Matrix d_patches = delta * t.nodes_[iw].value.transpose();
                       Matrix dx = Matrix::Zero(r3, cin);
                       for_each_patch_entry(spec, [&](int out_voxel, int in_voxel, int offset) {
                           for (int c = 0; c < cin; ++c)
                               dx(in_voxel, c) += d_patches(out_voxel, offset * cin + c);
                       });
                       t.accumulate(ix, dx);
                   });
}

Var Tape::reshape(Var a, int rows, int cols) {
    const Matrix& in = value(a);
    const int in_rows = static_cast<int>(in.rows());
    const int in_cols = static_cast<int>(in.cols());
    if (rows * cols != in_rows * in_cols) throw DimensionMismatch("reshape: size mismatch");
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const int flat = i * cols + j;
            out(i, j) = in(flat / in_cols, flat % in_cols);
        }
    const int ia = a.id;
    return emplace(std::move(out), {ia},
                   [ia, in_rows, in_cols, cols](Tape& t, const Node& self) {
                       Matrix g(in_rows, in_cols);
                       for (int i = 0; i < self.grad.rows(); ++i)
                           for (int j = 0; j < cols; ++j) {
                               const int flat = i * cols + j;
                               g(flat / in_cols, flat % in_cols) = self.grad(i, j);
                           }
                       t.accumulate(ia, g);
                   });
}

Var Tape::sum(Var a) {
    const int ia = a.id;
    const int rows = static_cast<int>(value(a).rows());
    const int cols = static_cast<int>(value(a).cols());
    Matrix out(1, 1);
    out(0, 0) = value(a).sum();
    return emplace(std::move(out), {ia}, [ia, rows, cols](Tape& t, const Node& self) {
        t.accumulate(ia, Matrix::Constant(rows, cols, self.grad(0, 0)));
    });
}

Var Tape::frobenius_sq(Var a) {
    const int ia = a.id;
    Matrix out(1, 1);
    out(0, 0) = value(a).squaredNorm();
    return emplace(std::move(out), {ia}, [ia](Tape& t, const Node& self) {
        t.accumulate(ia, (2.0 * self.grad(0, 0) * t.nodes_[ia].value).eval());
    });
}

Var Tape::dot_const(Var a, const Matrix& u) {
    if (u.rows() != value(a).rows() || u.cols() != value(a).cols())
        throw DimensionMismatch("dot_const: shape mismatch");
    const int ia = a.id;
    Matrix out(1, 1);
    out(0, 0) = value(a).cwiseProduct(u).sum();
    return emplace(std::move(out), {ia}, [ia, u](Tape& t, const Node& self) {
        t.accumulate(ia, (self.grad(0, 0) * u).eval());
    });
}

Var Tape::softmax_cross_entropy(Var logits, const std::vector<int>& labels) {
    const Matrix& z = value(logits);
    const int n = static_cast<int>(z.rows());
    const int classes = static_cast<int>(z.cols());
    if (static_cast<int>(labels.size()) != n)
        throw DimensionMismatch("softmax_cross_entropy: one label per row required");

    Matrix softmax(n, classes);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= classes)
            throw DimensionMismatch("softmax_cross_entropy: label out of range");
        const double zmax = z.row(i).maxCoeff();
        const Eigen::RowVectorXd shifted = z.row(i).array() - zmax;
        const Eigen::RowVectorXd expz = shifted.array().exp();
        const double denom = expz.sum();
        softmax.row(i) = expz / denom;
        loss += std::log(denom) - shifted[labels[i]];
    }
    loss /= n;

    const int ia = logits.id;
    Matrix out(1, 1);
    out(0, 0) = loss;
    return emplace(std::move(out), {ia}, [ia, softmax, labels, n](Tape& t, const Node& self) {
        Matrix g = softmax;
        for (int i = 0; i < n; ++i) g(i, labels[i]) -= 1.0;
        t.accumulate(ia, (self.grad(0, 0) / n * g).eval());
    });
}

Var Tape::l2_loss(Var pred, const Matrix& target) {
    const Matrix& p = value(pred);
    if (p.rows() != target.rows() || p.cols() != target.cols())
        throw DimensionMismatch("l2_loss: shape mismatch");
    const int n = static_cast<int>(p.rows());
    Matrix diff = p - target;
    Matrix out(1, 1);
    out(0, 0) = diff.squaredNorm() / n;
    const int ia = pred.id;
    return emplace(std::move(out), {ia}, [ia, diff, n](Tape& t, const Node& self) {
        t.accumulate(ia, (self.grad(0, 0) * 2.0 / n * diff).eval());
    });
}

GradMap Tape::backward(Var loss) {
    Node& top = node(loss);
    if (top.value.rows() != 1 || top.value.cols() != 1)
        throw DimensionMismatch("backward: loss must be a 1x1 scalar");
    if (!top.requires_grad)
        throw DisconnectedLoss("loss does not depend on any trainable tensor");

    top.grad = Matrix::Ones(1, 1);
    top.grad_seeded = true;
    // Nodes are appended in evaluation order; reverse order is topological.
    for (int i = loss.id; i >= 0; --i) {
        Node& n = nodes_[i];
        if (!n.grad_seeded || !n.requires_grad || !n.backward) continue;
        n.backward(*this, n);
    }

    GradMap grads;
    for (const Node& n : nodes_) {
        if (n.param_name.empty()) continue;
        auto [it, inserted] =
            grads.try_emplace(n.param_name, Matrix::Zero(n.value.rows(), n.value.cols()));
        if (n.grad_seeded) {
            if (inserted)
                it->second = n.grad;
            else
                it->second += n.grad;  // parameter re-registered on this tape
        }
    }
    return grads;
}

}  // namespace sscnn::ad
