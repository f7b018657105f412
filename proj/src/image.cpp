#include "naim/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace naim {

Tensor images_to_batch(const std::vector<Image>& images, size_t from, int count) {
    if (count < 1 || from + count > images.size())
        throw std::invalid_argument("images_to_batch: range out of bounds");
    const Image& first = images[from];
    Tensor batch({count, first.c * first.h * first.w});
    for (int i = 0; i < count; ++i) {
        const Image& im = images[from + i];
        if (im.h != first.h || im.w != first.w || im.c != first.c)
            throw std::invalid_argument("images_to_batch: inconsistent image shapes");
        std::copy(im.px.begin(), im.px.end(), batch.v.begin() + static_cast<size_t>(i) * im.size());
    }
    return batch;
}

Image batch_row_to_image(const Tensor& batch, int row, int h, int w, int c) {
    if (batch.ndim() != 2 || batch.cols() != c * h * w || row < 0 || row >= batch.rows())
        throw std::invalid_argument("batch_row_to_image: shape mismatch");
    Image im(h, w, c);
    const double* src = batch.v.data() + static_cast<size_t>(row) * batch.cols();
    std::copy(src, src + im.size(), im.px.begin());
    return im;
}

void write_png(const std::string& path, const Image& img) {
    if (img.c != 1 && img.c != 3) throw std::invalid_argument("write_png: channels must be 1 or 3");
    png_image pi{};
    pi.version = PNG_IMAGE_VERSION;
    pi.width = static_cast<png_uint_32>(img.w);
    pi.height = static_cast<png_uint_32>(img.h);
    pi.format = img.c == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    // interleave channels and quantize, round half up
    std::vector<uint8_t> buf(static_cast<size_t>(img.h) * img.w * img.c);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < img.c; ++ch) {
                double v = img.at(ch, y, x);
                v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                buf[(static_cast<size_t>(y) * img.w + x) * img.c + ch] =
                    static_cast<uint8_t>(std::floor(v * 255.0 + 0.5));
            }
    if (!png_image_write_to_file(&pi, path.c_str(), 0, buf.data(), 0, nullptr))
        throw std::runtime_error("write_png: " + path + ": " + pi.message);
}

Image read_png(const std::string& path) {
    png_image pi{};
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pi, path.c_str()))
        throw std::runtime_error("read_png: " + path + ": " + pi.message);
    const int c = PNG_IMAGE_PIXEL_CHANNELS(pi.format) >= 3 ? 3 : 1;
    pi.format = c == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<uint8_t> buf(PNG_IMAGE_SIZE(pi));
    if (!png_image_finish_read(&pi, nullptr, buf.data(), 0, nullptr))
        throw std::runtime_error("read_png: " + path + ": " + pi.message);
    Image img(static_cast<int>(pi.height), static_cast<int>(pi.width), c);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < c; ++ch)
                img.at(ch, y, x) =
                    buf[(static_cast<size_t>(y) * img.w + x) * c + ch] / 255.0;
    return img;
}

}  // namespace naim
