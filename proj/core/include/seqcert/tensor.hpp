#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace seqcert {

// Dense row-major tensor of 32-bit floats. This is the on-disk and
// model-parameter representation; bound arithmetic happens in double.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<std::uint32_t> d, std::vector<float> v);

    std::size_t size() const { return data.size(); }
    static std::size_t count(const std::vector<std::uint32_t>& dims);
};

// Per-pixel interval region around an input image.
struct IntervalBox {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t size() const { return lo.size(); }
    double width(std::size_t i) const { return hi[i] - lo[i]; }
    double max_width() const;
    bool contains(const std::vector<double>& x, double slack = 0.0) const;
};

// Reads/writes the binary tensor format: magic "PTEN", u32 rank,
// u32 dims[rank], little-endian float32 payload.
Tensor load_tensor(const std::string& path);
void save_tensor(const std::string& path, const Tensor& t);

// L-inf ball of radius eps around image, intersected per pixel with
// [clip_lo, clip_hi]. eps must be >= 0 and clip_lo <= clip_hi.
IntervalBox input_region(const Tensor& image, double eps, double clip_lo, double clip_hi);
IntervalBox input_region(const std::vector<double>& image, double eps, double clip_lo,
                         double clip_hi);

}  // namespace seqcert
