#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace demorph {

/// 8-bit raster image, row-major and channel-interleaved. Channels are 1 (luma) or 3 (RGB).
/// Values are immutable once constructed.
class ImageBuffer {
public:
    ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> samples);

    static ImageBuffer filled(int width, int height, int channels, std::uint8_t value);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] int channels() const noexcept { return channels_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] std::span<const std::uint8_t> samples() const noexcept { return samples_; }

    [[nodiscard]] std::uint8_t at(int x, int y, int c = 0) const noexcept {
        return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    [[nodiscard]] bool same_shape(const ImageBuffer& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    int width_;
    int height_;
    int channels_;
    std::vector<std::uint8_t> samples_;
};

/// Throws DimensionMismatch unless `a` and `b` have identical width, height and channels.
void require_same_shape(const ImageBuffer& a, const ImageBuffer& b);

// --- codecs -----------------------------------------------------------------

/// Decodes PNG or BMP by magic bytes. 4-channel / gray+alpha inputs drop alpha.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);
ImageBuffer load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
void save_png(const ImageBuffer& img, const std::filesystem::path& path);

/// RGB images are written as 24-bit BI_RGB; luma images as 8-bit with a gray palette.
std::vector<std::uint8_t> encode_bmp(const ImageBuffer& img);
void save_bmp(const ImageBuffer& img, const std::filesystem::path& path);

// --- pixel operators --------------------------------------------------------

/// BT.601 luma, round(0.299 R + 0.587 G + 0.114 B). Luma input is returned unchanged.
ImageBuffer to_luma(const ImageBuffer& img);

/// Per-sample round(alpha * i1 + (1 - alpha) * i2), clamped to [0, 255].
ImageBuffer alpha_blend_morph(const ImageBuffer& i1, const ImageBuffer& i2, double alpha);

enum class DegradationKind { GaussianNoise, GaussianBlur };

struct DegradationSpec {
    DegradationKind kind = DegradationKind::GaussianNoise;
    double sigma = 0.0;  // intensity units for noise, pixels for blur
    std::uint64_t seed = 0;
};

/// Additive N(0, sigma^2) noise per sample, or a separable Gaussian blur of radius ceil(3 sigma)
/// with reflect-101 borders. sigma == 0 is the identity.
ImageBuffer degrade(const ImageBuffer& img, const DegradationSpec& spec);

/// Normalized 1-D Gaussian taps of radius ceil(3 sigma); the 2-D kernel is its outer product.
std::vector<double> gaussian_kernel_1d(double sigma);

/// Reflect-101 index folding (…2 1 | 0 1 2 … n-1 | n-2 …).
int reflect_index(int i, int n) noexcept;

}  // namespace demorph
