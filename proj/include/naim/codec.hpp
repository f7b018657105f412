#pragma once

#include <cstdint>
#include <vector>

#include "naim/image.hpp"
#include "naim/tape.hpp"
#include "naim/tensor.hpp"

namespace naim {

struct LatentCode {
    std::vector<double> z;
    int dim() const { return static_cast<int>(z.size()); }
};

struct AeConfig {
    int image_size = 32;
    int channels = 1;      // 1 for squares, 3 for colors
    int latent_dim = 16;
    int c1 = 16, c2 = 32;  // conv channel widths (32 -> 16 -> 8 spatial)
    int epochs = 40;
    int batch = 64;
    double lr = 1e-3;
    double weight_decay = 0.0;
    uint64_t seed = 1;
};

// Deterministic autoencoder standing in for the semantic encoder/decoder
// pair: two strided 4x4 convs down to an 8x8 grid, a linear bottleneck to
// latent_dim, and the mirrored transposed-conv decoder. decode clamps to
// [0,1]; there is no stochastic subcode, so decode is a function of z alone.
struct AutoencoderModel {
    AeConfig cfg;
    // encoder
    Tensor ew1, eb1;  // conv  [c1, channels*4*4]
    Tensor ew2, eb2;  // conv  [c2, c1*4*4]
    Tensor ewf, ebf;  // fc    [c2*(s/4)^2, latent_dim]
    // decoder
    Tensor dwf, dbf;  // fc    [latent_dim, c2*(s/4)^2]
    Tensor dw1, db1;  // convT [c2, c1*4*4]
    Tensor dw2, db2;  // convT [c1, channels*4*4]

    std::vector<Tensor*> params();
    std::vector<const Tensor*> params() const;
};

// Fresh model with uniform +/- 1/sqrt(fan_in) init from the config seed.
AutoencoderModel make_autoencoder(const AeConfig& cfg);

// Minimizes pixel MSE with Adam over shuffled minibatches. Requires at
// least 1000 images of identical shape. Per-epoch mean training loss is
// appended to *loss_log when given.
AutoencoderModel train_autoencoder(const std::vector<Image>& images, const AeConfig& cfg,
                                   std::vector<double>* loss_log = nullptr);

// Batch forms used by training and benchmarking: rows of [B x c*h*w] in,
// rows of [B x latent_dim] / [B x c*h*w] out. decode_batch clamps to [0,1].
Tensor encode_batch(const AutoencoderModel& ae, const Tensor& images);
Tensor decode_batch(const AutoencoderModel& ae, const Tensor& codes);

LatentCode encode(const AutoencoderModel& ae, const Image& img);
Image decode(const AutoencoderModel& ae, const LatentCode& code);

// Codes for a whole image set as [n x latent_dim], computed in row chunks.
Tensor encode_images(const AutoencoderModel& ae, const std::vector<Image>& images);

// Weight vector of an L2-regularized logistic regression (Newton iterations)
// separating label-1 codes from label-0 codes, normalized to unit length.
// The positive direction points toward label 1.
std::vector<double> attribute_direction(const std::vector<LatentCode>& codes,
                                        const std::vector<int>& labels);

}  // namespace naim
