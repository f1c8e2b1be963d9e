// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "wgs/error.hpp"

namespace wgs {
namespace {

// ---- byte-level helpers ----------------------------------------------------

class Writer {
public:
    void bytes(const char* p, std::size_t n) { out_.append(p, n); }
    void magic(const char (&m)[5]) { bytes(m, 4); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
    const std::string& str() const { return out_; }

private:
    std::string out_;
};

class Reader {
public:
    Reader(const std::string& data, std::string what) : data_(data), what_(std::move(what)) {}

    void magic(const char (&m)[5]) {
        need(4);
        if (std::memcmp(data_.data() + pos_, m, 4) != 0)
            throw ParseError(what_ + ": bad magic, expected " + std::string(m, 4), pos_);
        pos_ += 4;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
    void finish() const {
        if (pos_ != data_.size()) throw ParseError(what_ + ": trailing bytes", pos_);
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw ParseError(what_ + ": truncated", data_.size());
    }
    const std::string& data_;
    std::string what_;
    std::size_t pos_ = 0;
};

constexpr std::uint32_t kMaxDim = 1u << 15;

void write_raw(Writer& w, const Image& img) {
    w.u32(img.height);
    w.u32(img.width);
    w.u32(img.channels);
    w.u32(img.has_alpha() ? 1 : 0);
    for (double v : img.data) w.f32(v);
    for (double v : img.alpha) w.f32(v);
}

Image read_raw(Reader& r) {
    const std::size_t at = r.pos();
    const std::uint32_t h = r.u32(), w = r.u32(), c = r.u32(), a = r.u32();
    if (h > kMaxDim || w > kMaxDim || c > 64 || a > 1 || (h * w == 0) != (c == 0))
        throw ParseError("raw image: implausible header", at);
    Image img(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    for (double& v : img.data) v = r.f32();
    if (a) {
        img.alpha.resize(img.plane_size());
        for (double& v : img.alpha) v = r.f32();
    }
    return img;
}

void read_plane_into(Reader& r, Image& img) {
    for (double& v : img.data) v = r.f32();
}

// ---- netpbm ----------------------------------------------------------------

struct HeaderScanner {
    const std::string& s;
    std::size_t pos = 0;
    std::size_t token_start = 0;

    void skip_space() {
        while (pos < s.size()) {
            if (s[pos] == '#') {
                while (pos < s.size() && s[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    }
    long number(const char* field) {
        skip_space();
        const std::size_t start = pos;
        token_start = start;
        long v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + (s[pos] - '0');
            if (v > 1L << 30) throw ParseError(std::string("netpbm: ") + field + " too large", start);
            ++pos;
        }
        if (pos == start) throw ParseError(std::string("netpbm: expected ") + field, start);
        return v;
    }
};

}  // namespace

Image decode_netpbm(const std::string& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw ParseError("netpbm: expected P5 or P6 magic", 0);
    const int channels = bytes[1] == '6' ? 3 : 1;
    HeaderScanner sc{bytes, 2};
    const long width = sc.number("width");
    const std::size_t dims_at = sc.token_start;
    const long height = sc.number("height");
    const long maxval = sc.number("maxval");
    const std::size_t maxval_at = sc.token_start;
    if (width < 1 || height < 1 || width > kMaxDim || height > kMaxDim)
        throw ParseError("netpbm: invalid dimensions", dims_at);
    if (maxval != 255) throw ParseError("netpbm: unsupported maxval " + std::to_string(maxval), maxval_at);
    if (sc.pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[sc.pos])))
        throw ParseError("netpbm: missing whitespace after header", sc.pos);
    const std::size_t start = sc.pos + 1;
    const std::size_t need = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() - start < need)
        throw ParseError("netpbm: truncated payload, expected " + std::to_string(need) + " bytes", bytes.size());
    Image img(static_cast<int>(height), static_cast<int>(width), channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < channels; ++c) {
                const std::size_t off = start + (static_cast<std::size_t>(y) * width + x) * channels + c;
                img.at(c, y, x) = static_cast<unsigned char>(bytes[off]) / 255.0;
            }
    return img;
}

std::string encode_netpbm(const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw InvalidInput("save_image: only 1- or 3-channel images can be written, got " +
                           std::to_string(img.channels));
    std::string out = (img.channels == 3 ? "P6\n" : "P5\n") + std::to_string(img.width) + " " +
                      std::to_string(img.height) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + img.plane_size() * img.channels);
    std::size_t k = header;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
                out[k++] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
            }
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("write failed: " + path.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Image load_image(const fs::path& path) {
    try {
        return decode_netpbm(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.offset());
    }
}

void save_image(const Image& img, const fs::path& path) { write_file_atomic(path, encode_netpbm(img)); }

BinaryPlane load_mask(const fs::path& path) {
    const Image img = load_image(path);
    if (img.channels != 1) throw InvalidInput(path.string() + ": mask must be a PGM (P5) file");
    BinaryPlane m(img.height, img.width);
    for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = img.data[i] > 0.0;
    return m;
}

void save_mask(const BinaryPlane& mask, const fs::path& path) {
    Image img(mask.height, mask.width, 1);
    for (std::size_t i = 0; i < mask.values.size(); ++i) img.data[i] = mask.values[i] ? 1.0 : 0.0;
    save_image(img, path);
}

void save_raw_image(const Image& img, const fs::path& path) {
    Writer w;
    w.magic("WGSI");
    write_raw(w, img);
    write_file_atomic(path, w.str());
}

Image load_raw_image(const fs::path& path) {
    const std::string data = read_file(path);
    Reader r(data, path.string());
    r.magic("WGSI");
    Image img = read_raw(r);
    r.finish();
    return img;
}

void save_subbands(const SubbandSet& sb, const fs::path& path) {
    Writer w;
    w.magic("WSB1");
    w.u32(sb.original_height);
    w.u32(sb.original_width);
    w.u32(sb.ll.channels);
    for (const Image* band : {&sb.ll, &sb.lh, &sb.hl, &sb.hh})
        for (double v : band->data) w.f32(v);
    write_file_atomic(path, w.str());
}

SubbandSet load_subbands(const fs::path& path) {
    const std::string data = read_file(path);
    Reader r(data, path.string());
    r.magic("WSB1");
    const std::uint32_t h = r.u32(), w = r.u32(), c = r.u32();
    if (h == 0 || w == 0 || c == 0 || h > kMaxDim || w > kMaxDim || c > 64)
        throw ParseError(path.string() + ": implausible subband header", 4);
    SubbandSet sb;
    sb.original_height = static_cast<int>(h);
    sb.original_width = static_cast<int>(w);
    for (Image* band : {&sb.ll, &sb.lh, &sb.hl, &sb.hh}) {
        *band = Image(static_cast<int>((h + 1) / 2), static_cast<int>((w + 1) / 2), static_cast<int>(c));
        read_plane_into(r, *band);
    }
    r.finish();
    return sb;
}

void save_cloud(const GaussianCloud& cloud, const fs::path& path) {
    Writer w;
    w.magic("WGSC");
    w.u32(static_cast<std::uint32_t>(cloud.count()));
    for (double v : cloud.pack()) w.f32(v);
    write_file_atomic(path, w.str());
}

GaussianCloud load_cloud(const fs::path& path) {
    const std::string data = read_file(path);
    Reader r(data, path.string());
    r.magic("WGSC");
    const std::uint32_t n = r.u32();
    if (static_cast<std::size_t>(n) * kParamsPerPrimitive * 4 + 8 != data.size())
        throw ParseError(path.string() + ": primitive count does not match file size", 4);
    std::vector<double> params(static_cast<std::size_t>(n) * kParamsPerPrimitive);
    for (double& v : params) v = r.f32();
    GaussianCloud cloud;
    cloud.primitives.resize(n);
    cloud.unpack(params);
    return cloud;
}

void save_refiner(const RefinerNet& net, const fs::path& path) {
    Writer w;
    w.magic("WGRN");
    w.u32(static_cast<std::uint32_t>(RefinerNet::kLayers.size()));
    for (const auto& l : RefinerNet::kLayers) {
        w.u32(l.in);
        w.u32(l.out);
    }
    for (double v : net.parameters()) w.f32(v);
    write_file_atomic(path, w.str());
}

RefinerNet load_refiner(const fs::path& path) {
    const std::string data = read_file(path);
    Reader r(data, path.string());
    r.magic("WGRN");
    const std::size_t at = r.pos();
    if (r.u32() != RefinerNet::kLayers.size()) throw ParseError(path.string() + ": unexpected layer count", at);
    for (const auto& l : RefinerNet::kLayers) {
        const std::size_t shape_at = r.pos();
        const std::uint32_t in = r.u32(), out = r.u32();
        if (in != static_cast<std::uint32_t>(l.in) || out != static_cast<std::uint32_t>(l.out))
            throw ParseError(path.string() + ": layer shape mismatch", shape_at);
    }
    std::vector<double> params(RefinerNet::parameter_count());
    for (double& v : params) v = r.f32();
    r.finish();
    RefinerNet net;
    net.set_parameters(std::move(params));
    return net;
}

void save_dataset(const SubbandPairDataset& ds, const fs::path& path) {
    Writer w;
    w.magic("WSPD");
    w.u32(ds.domain == DatasetDomain::ll ? 0 : 1);
    w.u32(static_cast<std::uint32_t>(ds.samples.size()));
    for (const auto& s : ds.samples) {
        write_raw(w, s.corrupted);
        write_raw(w, s.clean);
        write_raw(w, s.confidence);
    }
    write_file_atomic(path, w.str());
}

SubbandPairDataset load_dataset(const fs::path& path) {
    const std::string data = read_file(path);
    Reader r(data, path.string());
    r.magic("WSPD");
    const std::size_t at = r.pos();
    const std::uint32_t domain = r.u32();
    if (domain > 1) throw ParseError(path.string() + ": unknown dataset domain", at);
    SubbandPairDataset ds;
    ds.domain = domain == 0 ? DatasetDomain::ll : DatasetDomain::hf;
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        SubbandPair p;
        p.corrupted = read_raw(r);
        p.clean = read_raw(r);
        p.confidence = read_raw(r);
        ds.samples.push_back(std::move(p));
    }
    r.finish();
    ds.validate();
    return ds;
}

std::string format_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::vector<KeyValueLine> parse_key_values(const std::string& text) {
    std::vector<KeyValueLine> out;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++n;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected `key = value`", n);
        KeyValueLine kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), n};
        if (kv.key.empty()) throw ConfigError("missing key", n);
        if (kv.value.empty()) throw ConfigError("missing value for `" + kv.key + "`", n);
        out.push_back(std::move(kv));
    }
    return out;
}

}  // namespace wgs
