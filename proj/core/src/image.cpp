#include "demorph/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "demorph/error.hpp"

namespace demorph {

namespace {

std::uint8_t quantize(double v) noexcept {
    // std::round is half-away-from-zero.
    const double r = std::round(v);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

// std::normal_distribution is implementation-defined; Box-Muller over mt19937_64 is not.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;          // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

ImageBuffer add_noise(const ImageBuffer& img, double sigma, std::uint64_t seed) {
    NormalSampler normal(seed);
    std::vector<std::uint8_t> out(img.size());
    const auto in = img.samples();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = quantize(static_cast<double>(in[i]) + sigma * normal.next());
    }
    return {img.width(), img.height(), img.channels(), std::move(out)};
}

ImageBuffer blur(const ImageBuffer& img, double sigma) {
    const auto taps = gaussian_kernel_1d(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = img.width();
    const int h = img.height();
    const int ch = img.channels();
    const auto in = img.samples();

    std::vector<double> horizontal(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int sx = reflect_index(x + k, w);
                    acc += taps[k + radius] * in[(static_cast<std::size_t>(y) * w + sx) * ch + c];
                }
                horizontal[(static_cast<std::size_t>(y) * w + x) * ch + c] = acc;
            }
        }
    }

    std::vector<std::uint8_t> out(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int sy = reflect_index(y + k, h);
                    acc += taps[k + radius] * horizontal[(static_cast<std::size_t>(sy) * w + x) * ch + c];
                }
                out[(static_cast<std::size_t>(y) * w + x) * ch + c] = quantize(acc);
            }
        }
    }
    return {w, h, ch, std::move(out)};
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
    }
    if (channels != 1 && channels != 3) {
        throw Error(ErrorCode::InvalidArgument, "channels must be 1 or 3, got " + std::to_string(channels));
    }
    const auto expected = static_cast<std::size_t>(width) * height * channels;
    if (samples_.size() != expected) {
        throw Error(ErrorCode::InvalidArgument, "sample count " + std::to_string(samples_.size()) +
                                                    " != width*height*channels " + std::to_string(expected));
    }
}

ImageBuffer ImageBuffer::filled(int width, int height, int channels, std::uint8_t value) {
    std::vector<std::uint8_t> s(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) *
                                    std::max(channels, 0),
                                value);
    return {width, height, channels, std::move(s)};
}

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(a.width()) + "x" + std::to_string(a.height()) + "x" + std::to_string(a.channels()) +
                        " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()) + "x" +
                        std::to_string(b.channels()));
    }
}

ImageBuffer to_luma(const ImageBuffer& img) {
    if (img.channels() == 1) return img;
    const auto in = img.samples();
    std::vector<std::uint8_t> out(static_cast<std::size_t>(img.width()) * img.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double r = in[3 * i];
        const double g = in[3 * i + 1];
        const double b = in[3 * i + 2];
        out[i] = quantize(0.299 * r + 0.587 * g + 0.114 * b);
    }
    return {img.width(), img.height(), 1, std::move(out)};
}

ImageBuffer alpha_blend_morph(const ImageBuffer& i1, const ImageBuffer& i2, double alpha) {
    require_same_shape(i1, i2);
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
    }
    const double beta = 1.0 - alpha;
    const auto a = i1.samples();
    const auto b = i2.samples();
    std::vector<std::uint8_t> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = quantize(alpha * a[i] + beta * b[i]);
    }
    return {i1.width(), i1.height(), i1.channels(), std::move(out)};
}

ImageBuffer degrade(const ImageBuffer& img, const DegradationSpec& spec) {
    if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
        throw Error(ErrorCode::InvalidArgument, "degradation sigma must be finite and >= 0");
    }
    if (spec.sigma == 0.0) return img;
    switch (spec.kind) {
        case DegradationKind::GaussianNoise: return add_noise(img, spec.sigma, spec.seed);
        case DegradationKind::GaussianBlur: return blur(img, spec.sigma);
    }
    return img;
}

std::vector<double> gaussian_kernel_1d(double sigma) {
    if (!(sigma > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "gaussian sigma must be > 0");
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        taps[k + radius] = v;
        sum += v;
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

int reflect_index(int i, int n) noexcept {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

}  // namespace demorph
