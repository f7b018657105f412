#pragma once

#include <string>
#include <vector>

#include "naim/tensor.hpp"

namespace naim {

// Pixel values in [0,1], stored channel-major [c][h][w] to match the conv
// layout used by the codec. c is 1 (grayscale) or 3 (RGB).
struct Image {
    int h = 0, w = 0, c = 1;
    std::vector<double> px;

    Image() = default;
    Image(int h_, int w_, int c_, double fill = 0.0)
        : h(h_), w(w_), c(c_), px(static_cast<size_t>(h_) * w_ * c_, fill) {}

    double& at(int ch, int y, int x) { return px[(static_cast<size_t>(ch) * h + y) * w + x]; }
    double at(int ch, int y, int x) const { return px[(static_cast<size_t>(ch) * h + y) * w + x]; }
    int64_t size() const { return static_cast<int64_t>(px.size()); }
};

// Stacks images[from .. from+count) into a [count x c*h*w] batch tensor.
Tensor images_to_batch(const std::vector<Image>& images, size_t from, int count);

// Reinterprets one batch row as an image (values are copied, not clamped).
Image batch_row_to_image(const Tensor& batch, int row, int h, int w, int c);

// 8-bit PNG I/O. Floats are quantized with round-half-up on write and
// divided by 255 on read. Grayscale for c=1, RGB for c=3.
void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);

}  // namespace naim
