#include "seqcert/tensor.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "seqcert/errors.hpp"

namespace seqcert {

namespace {

constexpr char kMagic[4] = {'P', 'T', 'E', 'N'};

// The format is little-endian on disk; every platform this builds on is
// little-endian, but keep the byte handling explicit anyway.
std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw ParseError("load_tensor: truncated header in " + path);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

Tensor::Tensor(std::vector<std::uint32_t> d, std::vector<float> v)
    : dims(std::move(d)), data(std::move(v)) {
    if (data.size() != count(dims))
        throw ShapeError("Tensor: payload size does not match dims product");
}

std::size_t Tensor::count(const std::vector<std::uint32_t>& dims) {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

double IntervalBox::max_width() const {
    double w = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) w = std::max(w, hi[i] - lo[i]);
    return w;
}

bool IntervalBox::contains(const std::vector<double>& x, double slack) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    return true;
}

Tensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_tensor: cannot open " + path);

    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("load_tensor: bad magic in " + path);

    std::uint32_t rank = read_u32(in, path);
    if (rank > 8) throw ParseError("load_tensor: implausible rank in " + path);

    Tensor t;
    t.dims.resize(rank);
    for (auto& d : t.dims) d = read_u32(in, path);

    std::size_t n = Tensor::count(t.dims);
    if (n > (std::size_t(1) << 28)) throw SizeError("load_tensor: payload too large in " + path);
    t.data.resize(n);
    if (n && !in.read(reinterpret_cast<char*>(t.data.data()),
                      static_cast<std::streamsize>(n * sizeof(float))))
        throw ParseError("load_tensor: truncated payload in " + path);
    return t;
}

void save_tensor(const std::string& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("save_tensor: cannot open " + path);
    out.write(kMagic, 4);
    write_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) write_u32(out, d);
    if (!t.data.empty())
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!out) throw IoError("save_tensor: write failed for " + path);
}

IntervalBox input_region(const Tensor& image, double eps, double clip_lo, double clip_hi) {
    return input_region(std::vector<double>(image.data.begin(), image.data.end()), eps, clip_lo,
                        clip_hi);
}

IntervalBox input_region(const std::vector<double>& image, double eps, double clip_lo,
                         double clip_hi) {
    if (eps < 0.0) throw SizeError("input_region: eps must be >= 0");
    if (clip_lo > clip_hi) throw SizeError("input_region: clip_lo > clip_hi");
    IntervalBox box;
    box.lo.resize(image.size());
    box.hi.resize(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) {
        double v = image[i];
        box.lo[i] = std::max(v - eps, clip_lo);
        box.hi[i] = std::min(v + eps, clip_hi);
        if (box.lo[i] > box.hi[i]) {
            // Pixel outside the clip range: the intersection is the nearest
            // clip endpoint, a single point.
            double p = std::clamp(v, clip_lo, clip_hi);
            box.lo[i] = box.hi[i] = p;
        }
    }
    return box;
}

}  // namespace seqcert
