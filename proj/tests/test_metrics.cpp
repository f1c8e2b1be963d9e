// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"
#include "wgs/error.hpp"
#include "wgs/loss.hpp"
#include "wgs/metrics.hpp"

using namespace wgs;
using wgs::testing::gradient_close;
using wgs::testing::random_image;

namespace {

// Direct-summation SSIM: explicit 2-D Gaussian weights, one window at a time.
double naive_ssim(const Image& a, const Image& b) {
    const int win = 11;
    const double sigma = 1.5, c1 = 1e-4, c2 = 9e-4;
    double w2[11][11];
    double wsum = 0.0;
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double di = i - 5.0, dj = j - 5.0;
            w2[i][j] = std::exp(-(di * di + dj * dj) / (2 * sigma * sigma));
            wsum += w2[i][j];
        }
    double total = 0.0;
    int count = 0;
    for (int c = 0; c < a.channels; ++c)
        for (int y = 0; y + win <= a.height; ++y)
            for (int x = 0; x + win <= a.width; ++x) {
                double ma = 0, mb = 0;
                for (int i = 0; i < win; ++i)
                    for (int j = 0; j < win; ++j) {
                        ma += w2[i][j] / wsum * a.at(c, y + i, x + j);
                        mb += w2[i][j] / wsum * b.at(c, y + i, x + j);
                    }
                double va = 0, vb = 0, cov = 0;
                for (int i = 0; i < win; ++i)
                    for (int j = 0; j < win; ++j) {
                        const double da = a.at(c, y + i, x + j) - ma;
                        const double db = b.at(c, y + i, x + j) - mb;
                        va += w2[i][j] / wsum * da * da;
                        vb += w2[i][j] / wsum * db * db;
                        cov += w2[i][j] / wsum * da * db;
                    }
                total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                         ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
    return total / count;
}

}  // namespace

TEST_CASE("psnr closed forms") {
    const Image zero(8, 8, 3, 0.0);
    CHECK(psnr(zero, zero) == 99.0);
    CHECK(psnr(zero, Image(8, 8, 3, 0.1)) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr(zero, Image(8, 8, 3, 0.5)) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
    CHECK_THROWS_AS(psnr(zero, Image(8, 7, 3)), InvalidInput);

    const Image a = random_image(12, 12, 3, 1), b = random_image(12, 12, 3, 2);
    CHECK(psnr(a, b) == psnr(b, a));
    CHECK(psnr(a, b) >= 0.0);
}

TEST_CASE("psnr with an object mask counts only object pixels") {
    Image a(4, 4, 1, 0.0), b(4, 4, 1, 0.0);
    BinaryPlane obj(4, 4, 0);
    obj.at(1, 1) = 1;
    b.at(0, 1, 1) = 0.1;
    b.at(0, 3, 3) = 0.9;  // outside the object
    CHECK(psnr(a, b, &obj) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("ssim basics") {
    const Image a = random_image(16, 16, 3, 11);
    CHECK(ssim(a, a) == 1.0);
    Image inv = a;
    for (double& v : inv.data) v = 1.0 - v;
    CHECK(ssim(a, inv) < 1.0);
    CHECK_THROWS_AS(ssim(Image(10, 16, 1), Image(10, 16, 1)), InvalidInput);
    CHECK_THROWS_AS(ssim(a, Image(16, 16, 1)), InvalidInput);
}

TEST_CASE("ssim matches the direct-summation oracle") {
    const Image a = random_image(16, 16, 3, 21);
    Image b = random_image(16, 16, 3, 22);
    for (std::size_t i = 0; i < b.data.size(); ++i) b.data[i] = 0.6 * a.data[i] + 0.4 * b.data[i];
    CHECK(std::abs(ssim(a, b) - naive_ssim(a, b)) <= 1e-9);
    const Image c = random_image(23, 19, 1, 23), d = random_image(23, 19, 1, 24);
    CHECK(std::abs(ssim(c, d) - naive_ssim(c, d)) <= 1e-9);
}

TEST_CASE("ssim symmetry") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Image a = random_image(16, 16, 3, 100 + s), b = random_image(16, 16, 3, 200 + s);
        CHECK(std::abs(ssim(a, b) - ssim(b, a)) <= 1e-12);
    }
}

// The luminance term drifts by O(eps * (mu_a - mu_b)^2) under a common offset,
// so the 1e-6 bound applies to pairs with matching local means: a distorted
// copy of an image, as compared during training.
TEST_CASE("ssim common-offset stability on distorted pairs") {
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(300 + s);
        Image a(16, 16, 3), b(16, 16, 3);
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            a.data[i] = rng.uniform();
            b.data[i] = a.data[i] + 0.01 * rng.normal();
        }
        const double base = ssim(a, b);
        for (double eps : {0.001, 0.005, 0.01}) {
            Image a2 = a, b2 = b;
            for (double& v : a2.data) v += eps;
            for (double& v : b2.data) v += eps;
            worst = std::max(worst, std::abs(ssim(a2, b2) - base));
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("ssim gradient matches central differences") {
    const Image a = random_image(13, 14, 2, 31), b = random_image(13, 14, 2, 32);
    const auto g = ssim_with_gradient(a, b);
    CHECK(g.value == doctest::Approx(ssim(a, b)).epsilon(1e-15));
    const double h = 1e-5;
    for (std::size_t i = 0; i < a.data.size(); i += 7) {
        Image p = a, m = a;
        p.data[i] += h;
        m.data[i] -= h;
        const double num = (ssim(p, b) - ssim(m, b)) / (2 * h);
        CHECK(gradient_close(g.grad.data[i], num, 1e-5, 1e-6, 1e-9));
    }
}

TEST_CASE("loss_3dgs examples") {
    LossConfig cfg;
    const Image a = random_image(16, 16, 3, 41);
    SUBCASE("identical images") {
        auto r = loss_3dgs(a, a, cfg);
        CHECK(r.value == 0.0);
        CHECK(r.ssim == 1.0);
    }
    SUBCASE("pure L1 of a constant offset") {
        cfg.lambda = 0.0;
        auto r = loss_3dgs(Image(16, 16, 3, 0.5), Image(16, 16, 3, 0.0), cfg);
        CHECK(r.value == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("pure D-SSIM agrees with the oracle") {
        cfg.lambda = 1.0;
        const Image b = random_image(16, 16, 3, 42);
        auto r = loss_3dgs(a, b, cfg);
        CHECK(std::abs(r.value - (1.0 - naive_ssim(a, b)) / 2.0) <= 1e-9);
        CHECK(std::abs(loss_3dgs(a, b, cfg).value - loss_3dgs(b, a, cfg).value) <= 1e-12);
    }
    SUBCASE("shape mismatch") { CHECK_THROWS_AS(loss_3dgs(a, Image(16, 15, 3), cfg), InvalidInput); }
    SUBCASE("lambda out of range") {
        cfg.lambda = 1.5;
        CHECK_THROWS_AS(loss_3dgs(a, a, cfg), InvalidInput);
    }
}

TEST_CASE("masked loss ignores masked pixels") {
    LossConfig cfg;
    const Image r = random_image(16, 16, 3, 51), g = random_image(16, 16, 3, 52);
    Mask mask(16, 16, 1);
    for (int y = 4; y < 9; ++y)
        for (int x = 3; x < 12; ++x) mask.at(y, x) = 0;
    const auto base = loss_3dgs(r, g, cfg, &mask);
    Image r2 = r, g2 = g;
    for (int c = 0; c < 3; ++c)
        for (int y = 4; y < 9; ++y)
            for (int x = 3; x < 12; ++x) {
                r2.at(c, y, x) = 0.123;
                g2.at(c, y, x) = 0.987;
            }
    const auto changed = loss_3dgs(r2, g2, cfg, &mask);
    CHECK(changed.value == doctest::Approx(base.value).epsilon(1e-14));
    for (int c = 0; c < 3; ++c)
        for (int y = 4; y < 9; ++y)
            for (int x = 3; x < 12; ++x) CHECK(base.grad.at(c, y, x) == 0.0);
}

TEST_CASE("loss gradient matches central differences") {
    LossConfig cfg;
    const Image r = random_image(14, 14, 3, 61), g = random_image(14, 14, 3, 62);
    Mask mask(14, 14, 1);
    mask.at(3, 3) = mask.at(7, 8) = 0;
    for (const Mask* m : std::initializer_list<const Mask*>{nullptr, &mask}) {
        const auto res = loss_3dgs(r, g, cfg, m);
        const double h = 1e-6;
        for (std::size_t i = 0; i < r.data.size(); i += 5) {
            Image p = r, q = r;
            p.data[i] += h;
            q.data[i] -= h;
            const double num = (loss_3dgs(p, g, cfg, m).value - loss_3dgs(q, g, cfg, m).value) / (2 * h);
            CHECK(gradient_close(res.grad.data[i], num, 1e-5, 1e-6, 1e-9));
        }
    }
}
