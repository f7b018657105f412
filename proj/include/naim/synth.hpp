#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "naim/image.hpp"
#include "naim/rng.hpp"
#include "naim/tensor.hpp"

namespace naim {

// Closed set of image-effect shapes. `none` is the zero effect used by
// control runs where the images carry no signal.
enum class ImageEffect { linear, quartic, sine, none };

const char* image_effect_tag(ImageEffect e);        // "2x", "2x^4", "sin2pix", "none"
ImageEffect image_effect_from_tag(const std::string& tag);

// The numeric effects are fixed by the protocol: f1(x)=2x, f2(x)=x^2,
// f3(x)=sin(2*pi*x). Only the image effect and the noise level vary.
struct EffectSpec {
    ImageEffect img = ImageEffect::linear;
    double sigma = 0.1;  // noise std dev; variance 0.01
};

double numeric_effect(int j, double x);             // j in 0..2
double image_effect(ImageEffect e, double x);

enum class ImageDomain { squares, colors };

const char* domain_tag(ImageDomain d);              // "squares", "colors"
ImageDomain domain_from_tag(const std::string& tag);

struct SyntheticDataset {
    ImageDomain domain = ImageDomain::squares;
    EffectSpec spec;
    uint64_t seed = 0;
    int image_size = 0;
    Tensor x;                   // [n x 3], uniform on [0,1]
    std::vector<Image> images;
    std::vector<double> phi;    // ground-truth image feature per sample
    std::vector<double> y;      // empty until apply_effects
    std::vector<double> noise;  // recorded draws, same length as y

    int n() const { return static_cast<int>(images.size()); }
};

// Grey background (0.5) with a white (1.0) square of side image_size/2. The
// square's center is drawn uniformly over the region of full containment;
// Phi is the x-center affinely normalized to [0,1], recorded from the
// continuous draw before the square is rendered on the pixel grid.
SyntheticDataset gen_squares(int n, int image_size, uint64_t seed);

// Monochromatic RGB images; the three channel values are iid uniform on
// [0,1]. Phi is the red value.
SyntheticDataset gen_colors(int n, int image_size, uint64_t seed);

// Ground-truth feature extractors.
double phi_xval(const Image& img);  // centroid column of white pixels, normalized
double phi_red(const Image& img);   // mean of the red channel

// y = f1(x1) + f2(x2) + f3(x3) + f_img(phi) + eps for one sample. eps is the
// caller-supplied noise draw so the dataset can record it.
double assemble_response(const std::array<double, 3>& x, double phi_img, const EffectSpec& spec,
                         double eps);

// Fills spec, noise (~ N(0, sigma^2) from the dataset's derived noise
// stream) and y for every sample.
void apply_effects(SyntheticDataset& ds, const EffectSpec& spec);

// Ground-truth semantic interpolation between two images of the same
// domain: the underlying features (square center / channel values) are
// interpolated linearly and re-rendered. Element 1 is a, element k is b.
std::vector<Image> reference_interpolation(const Image& a, const Image& b, int k, ImageDomain domain);

// One-line description of a dataset's generating configuration, stored in
// manifests: "<domain>:<effect>:sigma=<s>".
std::string spec_tag(const SyntheticDataset& ds);

}  // namespace naim
