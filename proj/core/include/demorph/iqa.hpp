#pragma once

#include <limits>
#include <string_view>
#include <vector>

#include "demorph/image.hpp"

namespace demorph::iqa {

enum class IqaKind { Ssim, Psnr };

std::string_view to_string(IqaKind kind) noexcept;

/// Standard single-scale SSIM configuration (11x11 Gaussian window, sigma 1.5).
struct SsimParams {
    int window_size = 11;
    double gaussian_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;

    [[nodiscard]] double c1() const noexcept { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    [[nodiscard]] double c2() const noexcept { return (k2 * dynamic_range) * (k2 * dynamic_range); }

    /// Throws InvalidArgument if the window is even or < 3, or a constant is not positive.
    void validate() const;

    friend bool operator==(const SsimParams&, const SsimParams&) = default;
};

/// In-memory value of psnr() for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();
/// What kPsnrIdentical (and anything above it) becomes in reports and pairing formulas.
inline constexpr double kPsnrCapDb = 100.0;

[[nodiscard]] inline double cap_psnr(double db) noexcept { return db > kPsnrCapDb ? kPsnrCapDb : db; }

/// PSNR over all samples of all channels, 20 log10(255 / sqrt(MSE)).
/// Returns kPsnrIdentical when MSE is zero.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// Mean SSIM over every valid window position (no padding, stride 1), computed on luma.
/// Throws DimensionMismatch or ImageTooSmall.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params = {});

/// Normalized 1-D window taps of length params.window_size.
std::vector<double> ssim_window_taps(const SsimParams& params);

/// Dispatch by kind. PSNR is returned uncapped.
double compute(IqaKind kind, const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params = {});

}  // namespace demorph::iqa
