#include "demorph/iqa.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "demorph/error.hpp"

namespace demorph::iqa {

std::string_view to_string(IqaKind kind) noexcept {
    return kind == IqaKind::Ssim ? "SSIM" : "PSNR";
}

void SsimParams::validate() const {
    if (window_size < 3 || window_size % 2 == 0) {
        throw Error(ErrorCode::InvalidArgument, "SSIM window size must be odd and >= 3");
    }
    if (!(gaussian_sigma > 0.0) || !(k1 > 0.0) || !(k2 > 0.0) || !(dynamic_range > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "SSIM sigma, k1, k2 and dynamic range must be positive");
    }
}

std::vector<double> ssim_window_taps(const SsimParams& params) {
    params.validate();
    const int r = params.window_size / 2;
    std::vector<double> taps(params.window_size);
    double sum = 0.0;
    for (int k = -r; k <= r; ++k) {
        taps[k + r] = std::exp(-(static_cast<double>(k) * k) / (2.0 * params.gaussian_sigma * params.gaussian_sigma));
        sum += taps[k + r];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_shape(a, b);
    const auto sa = a.samples();
    const auto sb = b.samples();
    std::uint64_t sse = 0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const int d = static_cast<int>(sa[i]) - static_cast<int>(sb[i]);
        sse += static_cast<std::uint64_t>(d * d);
    }
    if (sse == 0) return kPsnrIdentical;
    const double mse = static_cast<double>(sse) / static_cast<double>(sa.size());
    return 20.0 * std::log10(255.0 / std::sqrt(mse));
}

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params) {
    if (a.width() != b.width() || a.height() != b.height()) {
        require_same_shape(a, b);  // throws with both shapes in the message
    }
    const auto taps = ssim_window_taps(params);
    const int ws = params.window_size;
    const int w = a.width();
    const int h = a.height();
    if (std::min(w, h) < ws) {
        throw Error(ErrorCode::ImageTooSmall, std::to_string(w) + "x" + std::to_string(h) +
                                                  " is smaller than the " + std::to_string(ws) + " px window");
    }
    const auto la = to_luma(a);
    const auto lb = to_luma(b);
    const auto pa = la.samples();
    const auto pb = lb.samples();

    // Moments: a, b, a^2, b^2, ab. Horizontal valid pass, then vertical valid pass.
    const int ow = w - ws + 1;
    const int oh = h - ws + 1;
    constexpr int kMaps = 5;
    std::vector<double> horiz(static_cast<std::size_t>(kMaps) * ow * h);
    auto hidx = [&](int m, int y, int x) { return (static_cast<std::size_t>(m) * h + y) * ow + x; };
    for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        for (int x = 0; x < ow; ++x) {
            double s[kMaps] = {};
            for (int k = 0; k < ws; ++k) {
                const double t = taps[k];
                const double va = pa[row + x + k];
                const double vb = pb[row + x + k];
                s[0] += t * va;
                s[1] += t * vb;
                s[2] += t * (va * va);
                s[3] += t * (vb * vb);
                s[4] += t * (va * vb);
            }
            for (int m = 0; m < kMaps; ++m) horiz[hidx(m, y, x)] = s[m];
        }
    }

    const double c1 = params.c1();
    const double c2 = params.c2();
    double total = 0.0;
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s[kMaps] = {};
            for (int k = 0; k < ws; ++k) {
                const double t = taps[k];
                for (int m = 0; m < kMaps; ++m) s[m] += t * horiz[hidx(m, y + k, x)];
            }
            const double mu_a = s[0];
            const double mu_b = s[1];
            const double var_a = s[2] - mu_a * mu_a;
            const double var_b = s[3] - mu_b * mu_b;
            const double cov = s[4] - mu_a * mu_b;
            const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
        }
    }
    return total / (static_cast<double>(ow) * oh);
}

double compute(IqaKind kind, const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params) {
    return kind == IqaKind::Ssim ? ssim(a, b, params) : psnr(a, b);
}

}  // namespace demorph::iqa
