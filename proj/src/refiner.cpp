// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/refiner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "wgs/adam.hpp"
#include "wgs/error.hpp"
#include "wgs/random.hpp"

namespace wgs {
namespace {

using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows are (channel, ky, kx); columns are pixels.
Mat im2col(const Mat& x, int h, int w) {
    const int c = static_cast<int>(x.rows());
    Mat col = Mat::Zero(c * 9, static_cast<Eigen::Index>(h) * w);
    for (int ci = 0; ci < c; ++ci)
        for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
                const int row = ci * 9 + ky * 3 + kx;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= h) continue;
                    for (int x0 = 0; x0 < w; ++x0) {
                        const int sx = x0 + kx - 1;
                        if (sx < 0 || sx >= w) continue;
                        col(row, y * w + x0) = x(ci, sy * w + sx);
                    }
                }
            }
    return col;
}

Mat col2im(const Mat& col, int c, int h, int w) {
    Mat x = Mat::Zero(c, static_cast<Eigen::Index>(h) * w);
    for (int ci = 0; ci < c; ++ci)
        for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
                const int row = ci * 9 + ky * 3 + kx;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= h) continue;
                    for (int x0 = 0; x0 < w; ++x0) {
                        const int sx = x0 + kx - 1;
                        if (sx < 0 || sx >= w) continue;
                        x(ci, sy * w + sx) += col(row, y * w + x0);
                    }
                }
            }
    return x;
}

Mat to_matrix(const Image& img) {
    Mat m(img.channels, static_cast<Eigen::Index>(img.plane_size()));
    for (int c = 0; c < img.channels; ++c)
        for (std::size_t p = 0; p < img.plane_size(); ++p) m(c, p) = img.data[c * img.plane_size() + p];
    return m;
}

Image to_image(const Mat& m, int h, int w) {
    Image img(h, w, static_cast<int>(m.rows()));
    for (int c = 0; c < img.channels; ++c)
        for (std::size_t p = 0; p < img.plane_size(); ++p) img.data[c * img.plane_size() + p] = m(c, p);
    return img;
}

double leaky(double v) { return v > 0.0 ? v : RefinerNet::kLeak * v; }

struct Activations {
    std::array<Mat, 3> cols;  // layer inputs in im2col form
    std::array<Mat, 2> pre;   // pre-activations of the hidden layers
    Mat out;
};

void check_input(const Image& img) {
    if (img.channels != RefinerNet::kChannels)
        throw InvalidInput("refiner expects " + std::to_string(RefinerNet::kChannels) +
                           " HF channels, got " + std::to_string(img.channels));
    if (img.empty()) throw InvalidInput("refiner: empty input");
}

Activations run(const std::vector<double>& params, const Image& input) {
    const int h = input.height, w = input.width;
    Activations act;
    Mat x = to_matrix(input);
    const Mat residual = x;
    for (int l = 0; l < 3; ++l) {
        const auto [in, out] = RefinerNet::kLayers[l];
        const double* base = params.data() + RefinerNet::layer_offset(l);
        Eigen::Map<const RowMat> weights(base, out, in * 9);
        Eigen::Map<const Eigen::VectorXd> bias(base + out * in * 9, out);
        act.cols[l] = im2col(x, h, w);
        Mat z = weights * act.cols[l];
        z.colwise() += bias;
        if (l < 2) {
            act.pre[l] = z;
            x = z.unaryExpr(&leaky);
        } else {
            act.out = z + residual;
        }
    }
    return act;
}

}  // namespace

std::size_t RefinerNet::layer_offset(int layer) {
    std::size_t off = 0;
    for (int l = 0; l < layer; ++l) off += static_cast<std::size_t>(kLayers[l].out) * (kLayers[l].in * 9 + 1);
    return off;
}

std::size_t RefinerNet::parameter_count() { return layer_offset(3); }

RefinerNet::RefinerNet(std::uint64_t seed) : params_(parameter_count(), 0.0) {
    Rng rng(mix_seed(seed, 0x726566));
    for (int l = 0; l < 2; ++l) {
        const auto [in, out] = kLayers[l];
        const double sd = std::sqrt(2.0 / (in * 9));
        double* base = params_.data() + layer_offset(l);
        for (int i = 0; i < out * in * 9; ++i) base[i] = sd * rng.normal();
    }
}

void RefinerNet::set_parameters(std::vector<double> params) {
    if (params.size() != parameter_count())
        throw InvalidInput("RefinerNet: expected " + std::to_string(parameter_count()) + " parameters, got " +
                           std::to_string(params.size()));
    params_ = std::move(params);
}

Image RefinerNet::forward(const Image& input) const {
    check_input(input);
    return to_image(run(params_, input).out, input.height, input.width);
}

double RefinerNet::loss_and_gradient(const Image& input, const Image& target,
                                     std::vector<double>* grad) const {
    check_input(input);
    if (!input.same_shape(target)) throw InvalidInput("refiner: input/target shape mismatch");
    const int h = input.height, w = input.width;
    const Activations act = run(params_, input);
    const Mat diff = act.out - to_matrix(target);
    const double n = static_cast<double>(diff.size());
    const double loss = diff.squaredNorm() / n;
    if (!grad) return loss;

    grad->assign(params_.size(), 0.0);
    Mat d = (2.0 / n) * diff;  // dL/d(layer-3 output); the residual path ends at the input
    for (int l = 2; l >= 0; --l) {
        const auto [in, out] = kLayers[l];
        if (l < 2) d = d.cwiseProduct(act.pre[l].unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeak; }));
        double* gbase = grad->data() + layer_offset(l);
        Eigen::Map<RowMat> gw(gbase, out, in * 9);
        Eigen::Map<Eigen::VectorXd> gb(gbase + out * in * 9, out);
        gw = d * act.cols[l].transpose();
        gb = d.rowwise().sum();
        if (l > 0) {
            Eigen::Map<const RowMat> weights(params_.data() + layer_offset(l), out, in * 9);
            d = col2im(weights.transpose() * d, in, h, w);
        }
    }
    return loss;
}

RefinerNet train_refiner(RefinerNet net, const SubbandPairDataset& data, const RefinerTrainConfig& cfg,
                         RefinerTrainReport* report) {
    if (data.domain != DatasetDomain::hf) throw InvalidInput("train_refiner: dataset must be HF-domain");
    if (data.samples.size() < 4)
        throw InsufficientData("train_refiner: need at least 4 samples, got " +
                               std::to_string(data.samples.size()));
    if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
        throw InvalidInput("train_refiner: val_fraction must lie in (0, 1)");
    data.validate();

    const std::size_t total = data.samples.size();
    const std::size_t n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(cfg.val_fraction * static_cast<double>(total))), 1, total - 1);
    const std::size_t n_train = total - n_val;

    auto val_loss = [&](const RefinerNet& m) {
        double s = 0.0;
        for (std::size_t i = n_train; i < total; ++i)
            s += m.loss_and_gradient(data.samples[i].corrupted, data.samples[i].clean, nullptr);
        return s / static_cast<double>(n_val);
    };

    RefinerTrainReport rep;
    rep.initial_val_loss = val_loss(net);
    rep.best_val_loss = rep.initial_val_loss;
    rep.val_losses.push_back(rep.initial_val_loss);
    std::vector<double> best = net.parameters();
    std::vector<double> params = net.parameters();
    std::vector<double> grad;
    Adam adam(params.size(), AdamConfig{});
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(cfg.seed, 0x74726e));

    int since_best = 0;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            net.loss_and_gradient(data.samples[i].corrupted, data.samples[i].clean, &grad);
            adam.step(params, grad, [&](std::size_t) { return cfg.learning_rate; });
            net.set_parameters(params);
        }
        const double v = val_loss(net);
        rep.val_losses.push_back(v);
        rep.epochs_run = epoch;
        if (!std::isfinite(v))
            throw NumericalFailure("train_refiner: non-finite validation loss at epoch " + std::to_string(epoch));
        if (v < rep.best_val_loss) {
            rep.best_val_loss = v;
            rep.best_epoch = epoch;
            best = params;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    net.set_parameters(std::move(best));
    if (report) *report = std::move(rep);
    return net;
}

RefinerNet rounded_f32(RefinerNet net) {
    std::vector<double> p = net.parameters();
    for (double& v : p) v = static_cast<float>(v);
    net.set_parameters(std::move(p));
    return net;
}

Image repair_hf(const RefinerNet& net, const Image& corrupted_hf) { return net.forward(corrupted_hf); }

}  // namespace wgs
