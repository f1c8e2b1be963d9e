// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/metrics.hpp"

#include <cmath>

#include "wgs/error.hpp"

namespace wgs {
namespace {

constexpr double kPsnrCap = 99.0;

void check_pair(const Image& a, const Image& b, const char* who) {
    if (!a.same_shape(b))
        throw InvalidInput(std::string(who) + ": shape mismatch " + std::to_string(a.height) +
                           "x" + std::to_string(a.width) + "x" + std::to_string(a.channels) +
                           " vs " + std::to_string(b.height) + "x" + std::to_string(b.width) +
                           "x" + std::to_string(b.channels));
    if (a.empty()) throw InvalidInput(std::string(who) + ": empty image");
}

// Separable correlation keeping only windows fully inside the plane.
std::vector<double> filter_valid(const double* in, int h, int w, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    const int oh = h - n + 1, ow = w - n + 1;
    std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int t = 0; t < n; ++t) s += k[t] * in[y * w + x + t];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int t = 0; t < n; ++t) s += k[t] * tmp[static_cast<std::size_t>(y + t) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

// Adjoint of filter_valid: scatters an (h-n+1)x(w-n+1) map back to h x w.
std::vector<double> filter_valid_adjoint(const std::vector<double>& g, int h, int w,
                                         const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    const int oh = h - n + 1, ow = w - n + 1;
    std::vector<double> tmp(static_cast<std::size_t>(h) * ow, 0.0);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            const double v = g[static_cast<std::size_t>(y) * ow + x];
            for (int t = 0; t < n; ++t) tmp[static_cast<std::size_t>(y + t) * ow + x] += k[t] * v;
        }
    std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            const double v = tmp[static_cast<std::size_t>(y) * ow + x];
            for (int t = 0; t < n; ++t) out[static_cast<std::size_t>(y) * w + x + t] += k[t] * v;
        }
    return out;
}

SsimGradient ssim_impl(const Image& a, const Image& b, const SsimConfig& cfg, bool want_grad) {
    check_pair(a, b, "ssim");
    if (a.height < cfg.window || a.width < cfg.window)
        throw InvalidInput("ssim: image " + std::to_string(a.height) + "x" +
                           std::to_string(a.width) + " smaller than the " +
                           std::to_string(cfg.window) + "x" + std::to_string(cfg.window) +
                           " window");
    const auto k = gaussian_window(cfg.window, cfg.sigma);
    const int h = a.height, w = a.width;
    const std::size_t n = a.plane_size();
    const std::size_t nmap =
        static_cast<std::size_t>(h - cfg.window + 1) * static_cast<std::size_t>(w - cfg.window + 1);
    const double norm = 1.0 / (static_cast<double>(nmap) * a.channels);

    SsimGradient out;
    if (want_grad) out.grad = Image(h, w, a.channels);
    double total = 0.0;
    std::vector<double> aa(n), bb(n), ab(n);
    for (int c = 0; c < a.channels; ++c) {
        const double* pa = a.data.data() + c * n;
        const double* pb = b.data.data() + c * n;
        for (std::size_t i = 0; i < n; ++i) {
            aa[i] = pa[i] * pa[i];
            bb[i] = pb[i] * pb[i];
            ab[i] = pa[i] * pb[i];
        }
        const auto mu_a = filter_valid(pa, h, w, k);
        const auto mu_b = filter_valid(pb, h, w, k);
        const auto e_aa = filter_valid(aa.data(), h, w, k);
        const auto e_bb = filter_valid(bb.data(), h, w, k);
        const auto e_ab = filter_valid(ab.data(), h, w, k);

        std::vector<double> d_mu, d_eaa, d_eab;
        if (want_grad) {
            d_mu.resize(nmap);
            d_eaa.resize(nmap);
            d_eab.resize(nmap);
        }
        for (std::size_t i = 0; i < nmap; ++i) {
            const double ma = mu_a[i], mb = mu_b[i];
            const double va = e_aa[i] - ma * ma;
            const double vb = e_bb[i] - mb * mb;
            const double cov = e_ab[i] - ma * mb;
            const double a1 = 2.0 * ma * mb + cfg.c1;
            const double a2 = 2.0 * cov + cfg.c2;
            const double b1 = ma * ma + mb * mb + cfg.c1;
            const double b2 = va + vb + cfg.c2;
            const double s = (a1 * a2) / (b1 * b2);
            total += s;
            if (want_grad) {
                const double denom = b1 * b2;
                d_mu[i] = norm * ((2.0 * mb * a2 - 2.0 * mb * a1) / denom -
                                  s * (2.0 * ma / b1 - 2.0 * ma / b2));
                d_eaa[i] = norm * (-s / b2);
                d_eab[i] = norm * (2.0 * a1 / denom);
            }
        }
        if (want_grad) {
            const auto g_mu = filter_valid_adjoint(d_mu, h, w, k);
            const auto g_aa = filter_valid_adjoint(d_eaa, h, w, k);
            const auto g_ab = filter_valid_adjoint(d_eab, h, w, k);
            double* g = out.grad.data.data() + c * n;
            for (std::size_t i = 0; i < n; ++i)
                g[i] = g_mu[i] + 2.0 * pa[i] * g_aa[i] + pb[i] * g_ab[i];
        }
    }
    out.value = total * norm;
    return out;
}

}  // namespace

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> k(size);
    const double center = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - center;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

double psnr(const Image& a, const Image& b, const BinaryPlane* object_mask) {
    check_pair(a, b, "psnr");
    const std::size_t n = a.plane_size();
    if (object_mask && (object_mask->height != a.height || object_mask->width != a.width))
        throw InvalidInput("psnr: object mask size mismatch");
    double sum = 0.0;
    std::size_t count = 0;
    for (int c = 0; c < a.channels; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            if (object_mask && !object_mask->values[i]) continue;
            const double d = a.data[c * n + i] - b.data[c * n + i];
            sum += d * d;
            ++count;
        }
    if (count == 0) throw InvalidInput("psnr: object mask selects no pixels");
    const double mse = sum / static_cast<double>(count);
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b, const SsimConfig& cfg) {
    return ssim_impl(a, b, cfg, false).value;
}

SsimGradient ssim_with_gradient(const Image& a, const Image& b, const SsimConfig& cfg) {
    return ssim_impl(a, b, cfg, true);
}

MetricReport summarize(std::vector<ViewMetric> per_view) {
    MetricReport r;
    for (const auto& v : per_view) {
        r.psnr += v.psnr;
        r.ssim += v.ssim;
    }
    if (!per_view.empty()) {
        r.psnr /= static_cast<double>(per_view.size());
        r.ssim /= static_cast<double>(per_view.size());
    }
    r.per_view = std::move(per_view);
    return r;
}

}  // namespace wgs
