#include "healthyplate/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "healthyplate/error.hpp"

namespace hplate {

namespace {

constexpr std::array<unsigned char, 8> kPngSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::vector<unsigned char> read_prefix(const std::filesystem::path& path, std::size_t n) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    buf.resize(static_cast<std::size_t>(in.gcount()));
    return buf;
}

std::uint32_t be32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

ImageBuffer load_png(const std::filesystem::path& path, const std::vector<unsigned char>& header) {
    // IHDR is always the first chunk: width at byte 16, height at byte 20.
    if (header.size() >= 24 && (be32(&header[16]) == 0 || be32(&header[20]) == 0))
        fail(ErrorKind::Io, "empty image: " + path.string());

    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        fail(ErrorKind::Io, "cannot decode PNG " + path.string() + ": " + image.message);
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        fail(ErrorKind::Io, "empty image: " + path.string());
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
    png_color white{255, 255, 255};
    if (!png_image_finish_read(&image, &white, pixels.data(), 0, nullptr))
        fail(ErrorKind::Io, "cannot decode PNG " + path.string() + ": " + image.message);

    std::vector<double> data(pixels.begin(), pixels.end());
    return ImageBuffer(static_cast<int>(image.width), static_cast<int>(image.height), ColorSpace::RGB,
                       std::move(data));
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// Plain C-style decode: no objects with destructors live across setjmp.
bool decode_jpeg(std::FILE* file, std::vector<unsigned char>* pixels, JDIMENSION* width, JDIMENSION* height,
                 JpegErrorManager* err) {
    jpeg_decompress_struct cinfo;
    cinfo.err = jpeg_std_error(&err->base);
    err->base.error_exit = jpeg_error_exit;
    if (setjmp(err->jump)) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    *width = cinfo.output_width;
    *height = cinfo.output_height;
    pixels->resize(static_cast<std::size_t>(*width) * *height * 3);
    while (cinfo.output_scanline < *height) {
        JSAMPROW row = pixels->data() + static_cast<std::size_t>(cinfo.output_scanline) * *width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

ImageBuffer load_jpeg(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) fail(ErrorKind::Io, "cannot open " + path.string());
    std::vector<unsigned char> pixels;
    JDIMENSION width = 0, height = 0;
    JpegErrorManager err{};
    if (!decode_jpeg(file.get(), &pixels, &width, &height, &err))
        fail(ErrorKind::Io, "cannot decode JPEG " + path.string() + ": " + err.message);
    if (width == 0 || height == 0) fail(ErrorKind::Io, "empty image: " + path.string());
    std::vector<double> data(pixels.begin(), pixels.end());
    return ImageBuffer(static_cast<int>(width), static_cast<int>(height), ColorSpace::RGB, std::move(data));
}

// Thin RAII wrapper over the libpng write structs.
class PngWriter {
public:
    explicit PngWriter(const std::filesystem::path& path) : path_(path), file_(std::fopen(path.c_str(), "wb")) {
        if (!file_) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (!png_) fail(ErrorKind::Io, "png_create_write_struct failed");
        info_ = png_create_info_struct(png_);
        if (!info_) {
            png_destroy_write_struct(&png_, nullptr);
            fail(ErrorKind::Io, "png_create_info_struct failed");
        }
    }
    ~PngWriter() { png_destroy_write_struct(&png_, &info_); }
    PngWriter(const PngWriter&) = delete;
    PngWriter& operator=(const PngWriter&) = delete;

    // `rows` are packed per libpng's expectations for the declared bit depth.
    void write(int width, int height, int bit_depth, int color_type, const std::vector<std::vector<png_byte>>& rows,
               const std::vector<png_color>* palette = nullptr) {
        if (setjmp(png_jmpbuf(png_))) fail(ErrorKind::Io, "failed writing PNG " + path_.string());
        png_init_io(png_, file_.get());
        png_set_IHDR(png_, info_, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                     color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        if (palette) png_set_PLTE(png_, info_, palette->data(), static_cast<int>(palette->size()));
        png_write_info(png_, info_);
        for (const auto& row : rows) png_write_row(png_, row.data());
        png_write_end(png_, nullptr);
    }

private:
    std::filesystem::path path_;
    FilePtr file_;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

png_byte to_byte(double v) {
    const double r = std::round(v);
    return static_cast<png_byte>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

} // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) fail(ErrorKind::Io, "file not found: " + path.string());
    if (!std::filesystem::is_regular_file(path, ec)) fail(ErrorKind::Io, "not a regular file: " + path.string());

    const auto header = read_prefix(path, 24);
    if (header.empty()) fail(ErrorKind::Io, "empty image: " + path.string());
    if (header.size() >= kPngSignature.size() && std::equal(kPngSignature.begin(), kPngSignature.end(), header.begin()))
        return load_png(path, header);
    if (header.size() >= 3 && header[0] == 0xFF && header[1] == 0xD8 && header[2] == 0xFF) return load_jpeg(path);
    fail(ErrorKind::Io, "unsupported format: " + path.string());
}

void save_png(const std::filesystem::path& path, const ImageBuffer& img) {
    if (img.empty()) fail(ErrorKind::InvalidArgument, "cannot save an empty image");
    const bool gray = img.color_space() == ColorSpace::GRAY;
    const ImageBuffer& src = (gray || img.color_space() == ColorSpace::RGB) ? img : convert_color(img, ColorSpace::RGB);
    const std::size_t ch = src.channels();
    std::vector<std::vector<png_byte>> rows(static_cast<std::size_t>(src.height()));
    for (int y = 0; y < src.height(); ++y) {
        auto& row = rows[static_cast<std::size_t>(y)];
        row.reserve(static_cast<std::size_t>(src.width()) * ch);
        for (int x = 0; x < src.width(); ++x)
            for (double v : src.pixel(x, y)) row.push_back(to_byte(v));
    }
    PngWriter writer(path);
    writer.write(src.width(), src.height(), 8, gray ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, rows);
}

void save_bilevel_png(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& bits) {
    if (width <= 0 || height <= 0) fail(ErrorKind::InvalidArgument, "cannot save an empty mask");
    if (bits.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        fail(ErrorKind::InvalidArgument, "mask size does not match dimensions");
    std::vector<std::vector<png_byte>> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        auto& row = rows[static_cast<std::size_t>(y)];
        row.assign(static_cast<std::size_t>((width + 7) / 8), 0);
        for (int x = 0; x < width; ++x)
            if (bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)])
                row[static_cast<std::size_t>(x / 8)] |= static_cast<png_byte>(0x80 >> (x % 8));
    }
    PngWriter writer(path);
    writer.write(width, height, 1, PNG_COLOR_TYPE_GRAY, rows);
}

void save_indexed_png(const std::filesystem::path& path, int width, int height,
                      const std::vector<std::uint8_t>& indices, const std::vector<std::array<std::uint8_t, 3>>& palette) {
    if (width <= 0 || height <= 0) fail(ErrorKind::InvalidArgument, "cannot save an empty label image");
    if (palette.empty() || palette.size() > 256) fail(ErrorKind::InvalidArgument, "palette must hold 1..256 colors");
    if (indices.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        fail(ErrorKind::InvalidArgument, "index data size does not match dimensions");
    std::vector<png_color> pal;
    pal.reserve(palette.size());
    for (const auto& c : palette) pal.push_back({c[0], c[1], c[2]});
    std::vector<std::vector<png_byte>> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        auto first = indices.begin() + static_cast<std::ptrdiff_t>(y) * width;
        rows[static_cast<std::size_t>(y)].assign(first, first + width);
        for (png_byte idx : rows[static_cast<std::size_t>(y)])
            if (idx >= palette.size()) fail(ErrorKind::InvalidArgument, "palette index out of range");
    }
    PngWriter writer(path);
    writer.write(width, height, 8, PNG_COLOR_TYPE_PALETTE, rows, &pal);
}

} // namespace hplate
