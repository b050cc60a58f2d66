#include <png.h>

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "demorph/error.hpp"
#include "demorph/image.hpp"

namespace demorph {

namespace {

constexpr std::array<std::uint8_t, 8> kPngMagic = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

// RAII owner for libpng's simplified-API control structure.
struct PngImage {
    png_image image{};
    PngImage() {
        image.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&image); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
    PngImage png;
    if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
        throw Error(ErrorCode::CorruptImage, std::string("png header: ") + png.image.message);
    }
    const bool color = (png.image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool alpha = (png.image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    // Read with alpha kept, then strip it ourselves: libpng would otherwise composite.
    png.image.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB)
                             : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
    const int width = static_cast<int>(png.image.width);
    const int height = static_cast<int>(png.image.height);
    std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(png.image));
    if (!png_image_finish_read(&png.image, nullptr, raw.data(), 0, nullptr)) {
        throw Error(ErrorCode::CorruptImage, std::string("png data: ") + png.image.message);
    }
    const int out_channels = color ? 3 : 1;
    if (!alpha) return {width, height, out_channels, std::move(raw)};

    const int in_channels = out_channels + 1;
    const std::size_t pixels = static_cast<std::size_t>(width) * height;
    std::vector<std::uint8_t> out(pixels * out_channels);
    for (std::size_t p = 0; p < pixels; ++p) {
        std::memcpy(&out[p * out_channels], &raw[p * in_channels], out_channels);
    }
    return {width, height, out_channels, std::move(out)};
}

ImageBuffer decode_bmp(std::span<const std::uint8_t> b) {
    constexpr std::size_t kFileHeader = 14;
    if (b.size() < kFileHeader + 40) throw Error(ErrorCode::CorruptImage, "bmp shorter than its headers");
    const std::uint32_t pixel_offset = read_u32(b, 10);
    const std::uint32_t dib_size = read_u32(b, 14);
    if (dib_size < 40) throw Error(ErrorCode::UnsupportedFormat, "bmp core headers are not supported");
    const auto width = static_cast<std::int32_t>(read_u32(b, 18));
    const auto raw_height = static_cast<std::int32_t>(read_u32(b, 22));
    const std::uint16_t bit_count = read_u16(b, 28);
    const std::uint32_t compression = read_u32(b, 30);
    std::uint32_t colors_used = read_u32(b, 46);

    if (compression != 0) throw Error(ErrorCode::UnsupportedFormat, "compressed bmp");
    if (bit_count != 8 && bit_count != 24 && bit_count != 32) {
        throw Error(ErrorCode::UnsupportedFormat, "bmp bit depth " + std::to_string(bit_count));
    }
    if (width <= 0 || raw_height == 0 || raw_height == INT32_MIN) {
        throw Error(ErrorCode::CorruptImage, "bmp dimensions");
    }
    const bool top_down = raw_height < 0;
    const int height = top_down ? -raw_height : raw_height;

    std::vector<std::array<std::uint8_t, 3>> palette;
    bool gray_palette = true;
    if (bit_count == 8) {
        if (colors_used == 0) colors_used = 256;
        if (colors_used > 256) throw Error(ErrorCode::CorruptImage, "bmp palette too large");
        const std::size_t pal_off = kFileHeader + dib_size;
        if (pal_off + 4ULL * colors_used > b.size()) throw Error(ErrorCode::CorruptImage, "bmp palette truncated");
        for (std::uint32_t i = 0; i < colors_used; ++i) {
            const std::size_t o = pal_off + 4ULL * i;
            palette.push_back({b[o + 2], b[o + 1], b[o]});
            gray_palette = gray_palette && b[o] == b[o + 1] && b[o + 1] == b[o + 2];
        }
    }

    const std::size_t bytes_per_pixel = bit_count / 8;
    const std::size_t stride = (static_cast<std::size_t>(width) * bytes_per_pixel + 3) & ~std::size_t{3};
    if (pixel_offset > b.size() || stride * height > b.size() - pixel_offset) {
        throw Error(ErrorCode::CorruptImage, "bmp pixel data truncated");
    }

    const int channels = (bit_count == 8 && gray_palette) ? 1 : 3;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height * channels);
    for (int y = 0; y < height; ++y) {
        const int src_row = top_down ? y : height - 1 - y;
        const std::uint8_t* row = b.data() + pixel_offset + stride * src_row;
        for (int x = 0; x < width; ++x) {
            std::uint8_t* dst = &out[(static_cast<std::size_t>(y) * width + x) * channels];
            if (bit_count == 8) {
                const std::uint8_t index = row[x];
                if (index >= palette.size()) throw Error(ErrorCode::CorruptImage, "bmp palette index out of range");
                if (channels == 1) {
                    dst[0] = palette[index][0];
                } else {
                    std::memcpy(dst, palette[index].data(), 3);
                }
            } else {
                const std::uint8_t* px = row + x * bytes_per_pixel;
                dst[0] = px[2];
                dst[1] = px[1];
                dst[2] = px[0];
            }
        }
    }
    return {width, height, channels, std::move(out)};
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= kPngMagic.size() && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
        return decode_png(bytes);
    }
    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') {
        return decode_bmp(bytes);
    }
    throw Error(ErrorCode::UnsupportedFormat, "not a PNG or BMP stream");
}

ImageBuffer load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_image(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
    PngImage png;
    png.image.width = static_cast<png_uint_32>(img.width());
    png.image.height = static_cast<png_uint_32>(img.height());
    png.image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, img.samples().data(), 0, nullptr)) {
        throw Error(ErrorCode::IoError, std::string("png sizing: ") + png.image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, img.samples().data(), 0, nullptr)) {
        throw Error(ErrorCode::IoError, std::string("png encode: ") + png.image.message);
    }
    out.resize(size);
    return out;
}

void save_png(const ImageBuffer& img, const std::filesystem::path& path) { write_file(path, encode_png(img)); }

std::vector<std::uint8_t> encode_bmp(const ImageBuffer& img) {
    const bool gray = img.channels() == 1;
    const std::uint32_t bytes_per_pixel = gray ? 1 : 3;
    const std::uint32_t stride = (static_cast<std::uint32_t>(img.width()) * bytes_per_pixel + 3) & ~3U;
    const std::uint32_t palette_bytes = gray ? 256 * 4 : 0;
    const std::uint32_t offset = 14 + 40 + palette_bytes;
    const std::uint32_t image_bytes = stride * static_cast<std::uint32_t>(img.height());

    std::vector<std::uint8_t> out;
    out.reserve(offset + image_bytes);
    out.push_back('B');
    out.push_back('M');
    put_u32(out, offset + image_bytes);
    put_u32(out, 0);
    put_u32(out, offset);
    put_u32(out, 40);
    put_u32(out, static_cast<std::uint32_t>(img.width()));
    put_u32(out, static_cast<std::uint32_t>(img.height()));  // bottom-up
    put_u16(out, 1);
    put_u16(out, static_cast<std::uint16_t>(bytes_per_pixel * 8));
    put_u32(out, 0);
    put_u32(out, image_bytes);
    put_u32(out, 2835);
    put_u32(out, 2835);
    put_u32(out, gray ? 256 : 0);
    put_u32(out, 0);
    if (gray) {
        for (int i = 0; i < 256; ++i) {
            const auto v = static_cast<std::uint8_t>(i);
            out.insert(out.end(), {v, v, v, 0});
        }
    }
    for (int y = img.height() - 1; y >= 0; --y) {
        const std::size_t row_start = out.size();
        for (int x = 0; x < img.width(); ++x) {
            if (gray) {
                out.push_back(img.at(x, y));
            } else {
                out.push_back(img.at(x, y, 2));
                out.push_back(img.at(x, y, 1));
                out.push_back(img.at(x, y, 0));
            }
        }
        out.resize(row_start + stride, 0);
    }
    return out;
}

void save_bmp(const ImageBuffer& img, const std::filesystem::path& path) { write_file(path, encode_bmp(img)); }

}  // namespace demorph
