#pragma once

#include <functional>
#include <string>
#include <vector>

#include "naim/codec.hpp"
#include "naim/image.hpp"
#include "naim/nam.hpp"

namespace naim {

enum class SequenceKind { interpolation, manipulation };

// Ordered latent codes z^(1)..z^(k) produced by interpolation between two
// endpoint codes or by attribute manipulation from a base code.
struct LatentSequence {
    SequenceKind kind = SequenceKind::interpolation;
    std::vector<LatentCode> codes;
    // Manipulation provenance (empty / 0 for plain interpolation).
    std::vector<double> v_attr;
    double alpha = 0.0;

    int k() const { return static_cast<int>(codes.size()); }
    int dim() const { return codes.empty() ? 0 : codes.front().dim(); }
};

// (decoded image, centered image-head prediction) per sequence element, with
// the interpolation weight / shift fraction t in [0, 1]. `reference` holds
// optional ground-truth effect values; empty when no reference is attached.
struct EffectCurve {
    std::vector<double> t;
    std::vector<Image> images;
    std::vector<double> prediction;
    std::vector<double> reference;

    int k() const { return static_cast<int>(prediction.size()); }
};

// Straight-line path in latent space: z^(i) = (1-t_i) z + t_i z' with
// t_i = (i-1)/(k-1), i = 1..k.
LatentSequence interpolate_latents(const LatentCode& z, const LatentCode& zp, int k);

// Norm-scaled attribute walk: z^(i) = z + alpha * t_i * (||z||/||v||) * v.
// Equivalent to interpolating from z to the walk's endpoint.
LatentSequence manipulate_latents(const LatentCode& z, const std::vector<double>& v_attr,
                                  double alpha, int k);

// Decodes every code and evaluates the model's centered image effect on it.
EffectCurve effect_curve(const NaimModel& m, const AutoencoderModel& ae,
                         const LatentSequence& seq);

// Prediction distribution before/after shifting every code by the k=2
// manipulation endpoint z + alpha * (||z||/||v||) * v. Tabular features are
// held fixed per sample, so the distribution moves only through the image term.
struct GlobalShift {
    std::vector<double> base;
    std::vector<double> shifted;
    double base_mean = 0.0;
    double shifted_mean = 0.0;
};
GlobalShift global_shift(const NaimModel& m, const AutoencoderModel& ae,
                         const std::vector<Image>& images, const Tensor& x,
                         const std::vector<double>& v_attr, double alpha);

// Interpolation residual R = (h(l*z + (1-l)*zt) - l*h(z) - (1-l)*h(zt)) / (1-l)
// for l < 1; identically zero at l = 1 where the scaled residual vanishes.
// Affine h gives R = 0; smooth h gives ||R|| = o(||z - zt||).
std::vector<double> convexity_residual(
    const std::function<std::vector<double>(const std::vector<double>&)>& h,
    const std::vector<double>& z, const std::vector<double>& zt, double lambda);

// CSV rows "index,t,prediction[,reference]" with a header line.
void write_effect_curve_csv(const EffectCurve& curve, const std::string& path);

// All decoded images side by side in sequence order as one PNG.
void write_sequence_strip(const EffectCurve& curve, const std::string& path);

}  // namespace naim
