// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "test_helpers.hpp"
#include "wgs/error.hpp"
#include "wgs/io.hpp"
#include "wgs/random.hpp"

using namespace wgs;
using wgs::testing::max_abs_diff;
using wgs::testing::random_image;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("wgs_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::size_t parse_offset(const std::string& bytes) {
    try {
        decode_netpbm(bytes);
    } catch (const ParseError& e) {
        return e.offset();
    }
    FAIL("expected a parse error");
    return 0;
}

}  // namespace

TEST_CASE("netpbm decoding") {
    const Image ones = decode_netpbm(std::string("P6\n2 2\n255\n") + std::string(12, '\xff'));
    CHECK(ones.channels == 3);
    CHECK(ones.height == 2);
    for (double v : ones.data) CHECK(v == 1.0);

    const Image gray = decode_netpbm(std::string("P5 # comment\n3 1\n255\n") + std::string("\x00\x80\xff", 3));
    CHECK(gray.channels == 1);
    CHECK(gray.width == 3);
    CHECK(gray.data[1] == doctest::Approx(128.0 / 255.0));

    // Interleaved bytes land in planar channels.
    const Image rgb = decode_netpbm(std::string("P6 1 1 255\n") + "\x0a\x14\x1e");
    CHECK(rgb.at(0, 0, 0) == doctest::Approx(10 / 255.0));
    CHECK(rgb.at(2, 0, 0) == doctest::Approx(30 / 255.0));
}

TEST_CASE("netpbm errors name the byte offset") {
    CHECK(parse_offset("P3\n1 1\n255\n") == 0);
    const std::string wide = "P6\n2 2\n65535\n" + std::string(24, '\0');
    CHECK(parse_offset(wide) == 7);
    CHECK_THROWS_WITH_AS(decode_netpbm(wide), doctest::Contains("unsupported maxval 65535"), ParseError);
    const std::string truncated = "P6\n2 2\n255\n" + std::string(5, '\0');
    CHECK(parse_offset(truncated) == truncated.size());
    CHECK(parse_offset("P5\nx 2\n255\n") == 3);
    CHECK(parse_offset("P5\n0 2\n255\n") == 3);
}

TEST_CASE("image save and load round trip within 8-bit quantization") {
    TempDir dir;
    for (int c : {1, 3}) {
        const Image img = random_image(7, 5, c, 40 + c);
        const fs::path p = dir.path / ("img" + std::to_string(c) + ".pnm");
        save_image(img, p);
        const Image back = load_image(p);
        CHECK(back.same_shape(img));
        CHECK(max_abs_diff(back, img) <= 1.0 / 510.0 + 1e-12);
        CHECK(read_file(p).substr(0, 2) == (c == 1 ? "P5" : "P6"));
    }
    save_image(Image(3, 3, 3, 1.0), dir.path / "ones.ppm");
    for (double v : load_image(dir.path / "ones.ppm").data) CHECK(v == 1.0);
    // Out-of-range samples are clamped on write.
    save_image(Image(2, 2, 1, 1.7), dir.path / "hot.pgm");
    CHECK(load_image(dir.path / "hot.pgm").data[0] == 1.0);

    CHECK_THROWS_AS(save_image(Image(2, 2, 2), dir.path / "two.pnm"), InvalidInput);
    CHECK_THROWS_AS(save_image(Image(2, 2, 3), dir.path / "missing" / "x.ppm"), IoError);
    CHECK_THROWS_AS(load_image(dir.path / "absent.ppm"), IoError);
}

TEST_CASE("masks round trip through PGM") {
    TempDir dir;
    BinaryPlane m(4, 6);
    Rng rng(3);
    for (auto& v : m.values) v = rng.uniform() < 0.4;
    save_mask(m, dir.path / "m.pgm");
    CHECK(load_mask(dir.path / "m.pgm").values == m.values);
    save_image(Image(2, 2, 3), dir.path / "rgb.ppm");
    CHECK_THROWS_AS(load_mask(dir.path / "rgb.ppm"), InvalidInput);
}

TEST_CASE("binary containers round trip at single precision") {
    TempDir dir;
    Rng rng(17);
    auto as_f32 = [](double v) { return static_cast<double>(static_cast<float>(v)); };

    SUBCASE("subbands") {
        const SubbandSet sb = forward_dwt(random_image(9, 6, 3, 2));
        save_subbands(sb, dir.path / "s.wsb");
        const SubbandSet back = load_subbands(dir.path / "s.wsb");
        CHECK(back.original_height == 9);
        CHECK(back.original_width == 6);
        for (auto [a, b] : {std::pair{&sb.ll, &back.ll}, {&sb.lh, &back.lh}, {&sb.hl, &back.hl}, {&sb.hh, &back.hh}}) {
            REQUIRE(a->same_shape(*b));
            for (std::size_t i = 0; i < a->data.size(); ++i) CHECK(b->data[i] == as_f32(a->data[i]));
        }
    }
    SUBCASE("cloud") {
        GaussianCloud cloud;
        for (int i = 0; i < 5; ++i) {
            GaussianPrimitive g;
            g.center = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
            g.rotation = Eigen::Vector4d(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
            g.opacity_logit = rng.normal();
            cloud.primitives.push_back(g);
        }
        save_cloud(cloud, dir.path / "c.wgsc");
        const auto bytes = read_file(dir.path / "c.wgsc");
        CHECK(bytes.substr(0, 4) == "WGSC");
        CHECK(bytes.size() == 8 + 5 * 14 * 4);
        CHECK(load_cloud(dir.path / "c.wgsc").pack() == rounded_f32(cloud).pack());
    }
    SUBCASE("refiner") {
        RefinerNet net(9);
        auto p = net.parameters();
        for (double& v : p) v += 0.01 * rng.normal();
        net.set_parameters(p);
        save_refiner(net, dir.path / "r.wgrn");
        CHECK(load_refiner(dir.path / "r.wgrn").parameters() == rounded_f32(net).parameters());
        CHECK(read_file(dir.path / "r.wgrn").size() == 4 + 4 + 3 * 8 + 4 * RefinerNet::parameter_count());
    }
    SUBCASE("dataset") {
        SubbandPairDataset ds;
        ds.domain = DatasetDomain::ll;
        for (int i = 0; i < 3; ++i) {
            Image conf = random_image(4, 5, 1, 80 + i);
            ds.samples.push_back({random_image(4, 5, 3, 60 + i), random_image(4, 5, 3, 70 + i), conf});
        }
        save_dataset(ds, dir.path / "d.wspd");
        const auto back = load_dataset(dir.path / "d.wspd");
        CHECK(back.domain == DatasetDomain::ll);
        REQUIRE(back.samples.size() == 3);
        CHECK(back.samples[2].clean.data == rounded_f32(ds.samples[2].clean).data);
        CHECK(back.samples[1].confidence.data == rounded_f32(ds.samples[1].confidence).data);
    }
    SUBCASE("raw image keeps alpha") {
        Image img = random_image(3, 4, 3, 5);
        img.alpha.assign(12, 0.25);
        save_raw_image(img, dir.path / "i.wgsi");
        const Image back = load_raw_image(dir.path / "i.wgsi");
        CHECK(back.alpha == img.alpha);
        CHECK(back.data == rounded_f32(img).data);
    }
}

TEST_CASE("corrupt binary containers are rejected") {
    TempDir dir;
    save_cloud(GaussianCloud{{GaussianPrimitive{}}}, dir.path / "c.wgsc");
    std::string bytes = read_file(dir.path / "c.wgsc");
    write_file_atomic(dir.path / "short.wgsc", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_cloud(dir.path / "short.wgsc"), ParseError);
    bytes[0] = 'X';
    write_file_atomic(dir.path / "magic.wgsc", bytes);
    CHECK_THROWS_AS(load_cloud(dir.path / "magic.wgsc"), ParseError);

    save_refiner(RefinerNet(), dir.path / "r.wgrn");
    std::string net = read_file(dir.path / "r.wgrn");
    net[8] = 8;  // first layer in-channels
    write_file_atomic(dir.path / "bad.wgrn", net);
    CHECK_THROWS_AS(load_refiner(dir.path / "bad.wgrn"), ParseError);
    write_file_atomic(dir.path / "long.wgrn", read_file(dir.path / "r.wgrn") + "x");
    CHECK_THROWS_AS(load_refiner(dir.path / "long.wgrn"), ParseError);
}

TEST_CASE("atomic writes leave no temporary behind") {
    TempDir dir;
    write_file_atomic(dir.path / "a.txt", "one");
    write_file_atomic(dir.path / "a.txt", "two");
    CHECK(read_file(dir.path / "a.txt") == "two");
    CHECK_FALSE(fs::exists(dir.path / "a.txt.tmp"));
}

TEST_CASE("key-value text") {
    const auto kv = parse_key_values("# header\n a = 1 \n\nb=two words # trailing\n");
    REQUIRE(kv.size() == 2);
    CHECK(kv[0].key == "a");
    CHECK(kv[0].value == "1");
    CHECK(kv[1].value == "two words");
    CHECK(kv[1].line == 4);
    CHECK(format_key_values({{"x", "1"}, {"y", "z"}}) == "x = 1\ny = z\n");
    try {
        parse_key_values("a = 1\nnonsense\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_key_values("= 3"), ConfigError);
    CHECK_THROWS_AS(parse_key_values("k ="), ConfigError);
}
