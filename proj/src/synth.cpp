#include "naim/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace naim {

namespace {

constexpr double kWhiteThreshold = 0.75;  // separates the 1.0 square from the 0.5 background

// Renders the canonical squares-domain image: grey background, white square
// of side h/2 with its top-left corner at (row, col).
Image render_square(int image_size, int row, int col) {
    const int s = image_size / 2;
    Image im(image_size, image_size, 1, 0.5);
    for (int y = row; y < row + s; ++y)
        for (int x = col; x < col + s; ++x) im.at(0, y, x) = 1.0;
    return im;
}

int quantize_offset(double frac, int range) {
    int off = static_cast<int>(std::floor(frac * range + 0.5));
    return off < 0 ? 0 : (off > range ? range : off);
}

Image render_color(int image_size, double r, double g, double b) {
    Image im(image_size, image_size, 3);
    for (int y = 0; y < image_size; ++y)
        for (int x = 0; x < image_size; ++x) {
            im.at(0, y, x) = r;
            im.at(1, y, x) = g;
            im.at(2, y, x) = b;
        }
    return im;
}

// Mean white-pixel row and column, normalized to [0,1] over the feasible
// center range. Throws if the image has no white pixels.
void white_centroid(const Image& img, double& row_frac, double& col_frac) {
    double sy = 0.0, sx = 0.0;
    int64_t count = 0;
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            if (img.at(0, y, x) > kWhiteThreshold) {
                sy += y;
                sx += x;
                ++count;
            }
    if (count == 0) throw std::invalid_argument("phi_xval: image contains no white pixels");
    const int s = img.w / 2;
    const double half = (s - 1) / 2.0;
    col_frac = (sx / count - half) / (img.w - s);
    row_frac = (sy / count - half) / (img.h - s);
}

}  // namespace

const char* image_effect_tag(ImageEffect e) {
    switch (e) {
        case ImageEffect::linear: return "2x";
        case ImageEffect::quartic: return "2x^4";
        case ImageEffect::sine: return "sin2pix";
        case ImageEffect::none: return "none";
    }
    throw std::invalid_argument("image_effect_tag: unknown effect");
}

ImageEffect image_effect_from_tag(const std::string& tag) {
    if (tag == "2x") return ImageEffect::linear;
    if (tag == "2x^4") return ImageEffect::quartic;
    if (tag == "sin2pix") return ImageEffect::sine;
    if (tag == "none") return ImageEffect::none;
    throw std::invalid_argument("image_effect_from_tag: unknown tag '" + tag + "'");
}

const char* domain_tag(ImageDomain d) { return d == ImageDomain::squares ? "squares" : "colors"; }

ImageDomain domain_from_tag(const std::string& tag) {
    if (tag == "squares") return ImageDomain::squares;
    if (tag == "colors") return ImageDomain::colors;
    throw std::invalid_argument("domain_from_tag: unknown tag '" + tag + "'");
}

double numeric_effect(int j, double x) {
    switch (j) {
        case 0: return 2.0 * x;
        case 1: return x * x;
        case 2: return std::sin(2.0 * std::numbers::pi * x);
    }
    throw std::invalid_argument("numeric_effect: index out of range");
}

double image_effect(ImageEffect e, double x) {
    switch (e) {
        case ImageEffect::linear: return 2.0 * x;
        case ImageEffect::quartic: return 2.0 * x * x * x * x;
        case ImageEffect::sine: return std::sin(2.0 * std::numbers::pi * x);
        case ImageEffect::none: return 0.0;
    }
    throw std::invalid_argument("image_effect: unknown effect");
}

static SyntheticDataset gen_common(int n, int image_size, uint64_t seed, ImageDomain domain) {
    if (n < 1) throw std::invalid_argument("dataset generation: n must be >= 1");
    if (image_size < 4 || image_size % 2 != 0)
        throw std::invalid_argument("dataset generation: image_size must be even and >= 4");
    SyntheticDataset ds;
    ds.domain = domain;
    ds.seed = seed;
    ds.image_size = image_size;
    Rng tab(derive_seed(seed, "tabular"));
    ds.x = Tensor({n, 3});
    for (auto& e : ds.x.v) e = tab.uniform();
    ds.images.reserve(n);
    ds.phi.reserve(n);
    return ds;
}

SyntheticDataset gen_squares(int n, int image_size, uint64_t seed) {
    SyntheticDataset ds = gen_common(n, image_size, seed, ImageDomain::squares);
    Rng img_rng(derive_seed(seed, "images"));
    const int range = image_size - image_size / 2;
    for (int i = 0; i < n; ++i) {
        // Phi is recorded from the continuous draw; rendering rounds to the
        // pixel grid, so extractors recover it only up to 0.5/range.
        const double ux = img_rng.uniform();
        const double uy = img_rng.uniform();
        ds.phi.push_back(ux);
        ds.images.push_back(
            render_square(image_size, quantize_offset(uy, range), quantize_offset(ux, range)));
    }
    return ds;
}

SyntheticDataset gen_colors(int n, int image_size, uint64_t seed) {
    SyntheticDataset ds = gen_common(n, image_size, seed, ImageDomain::colors);
    Rng img_rng(derive_seed(seed, "images"));
    for (int i = 0; i < n; ++i) {
        const double r = img_rng.uniform();
        const double g = img_rng.uniform();
        const double b = img_rng.uniform();
        ds.phi.push_back(r);
        ds.images.push_back(render_color(image_size, r, g, b));
    }
    return ds;
}

double phi_xval(const Image& img) {
    if (img.c != 1) throw std::invalid_argument("phi_xval: expects a 1-channel image");
    double row_frac, col_frac;
    white_centroid(img, row_frac, col_frac);
    return col_frac;
}

double phi_red(const Image& img) {
    if (img.c != 3) throw std::invalid_argument("phi_red: expects a 3-channel image");
    double acc = 0.0;
    const int64_t plane = static_cast<int64_t>(img.h) * img.w;
    for (int64_t i = 0; i < plane; ++i) acc += img.px[i];
    return acc / plane;
}

double assemble_response(const std::array<double, 3>& x, double phi_img, const EffectSpec& spec,
                         double eps) {
    for (double xi : x)
        if (xi < 0.0 || xi > 1.0)
            throw std::invalid_argument("assemble_response: features must lie in [0,1]");
    if (phi_img < 0.0 || phi_img > 1.0)
        throw std::invalid_argument("assemble_response: phi must lie in [0,1]");
    double y = eps;
    for (int j = 0; j < 3; ++j) y += numeric_effect(j, x[j]);
    return y + image_effect(spec.img, phi_img);
}

void apply_effects(SyntheticDataset& ds, const EffectSpec& spec) {
    if (spec.sigma < 0.0) throw std::invalid_argument("apply_effects: sigma must be >= 0");
    ds.spec = spec;
    ds.y.assign(ds.n(), 0.0);
    ds.noise.assign(ds.n(), 0.0);
    Rng noise_rng(derive_seed(ds.seed, "noise"));
    for (int i = 0; i < ds.n(); ++i) {
        // sigma scales a draw that is always consumed, so sigma=0 changes
        // values (exactly zero noise) but not the stream position
        ds.noise[i] = spec.sigma * noise_rng.normal();
        ds.y[i] = assemble_response({ds.x.at(i, 0), ds.x.at(i, 1), ds.x.at(i, 2)}, ds.phi[i], spec,
                                    ds.noise[i]);
    }
}

std::vector<Image> reference_interpolation(const Image& a, const Image& b, int k,
                                           ImageDomain domain) {
    if (k < 2) throw std::invalid_argument("reference_interpolation: k must be >= 2");
    if (a.h != b.h || a.w != b.w || a.c != b.c)
        throw std::invalid_argument("reference_interpolation: image shapes differ");
    std::vector<Image> out;
    out.reserve(k);
    if (domain == ImageDomain::squares) {
        if (a.c != 1)
            throw std::invalid_argument("reference_interpolation: squares domain expects 1 channel");
        double ra, ca, rb, cb;
        white_centroid(a, ra, ca);
        white_centroid(b, rb, cb);
        const int range = a.w - a.w / 2;
        for (int i = 0; i < k; ++i) {
            if (i == 0) {
                out.push_back(a);
                continue;
            }
            if (i == k - 1) {
                out.push_back(b);
                continue;
            }
            const double t = static_cast<double>(i) / (k - 1);
            out.push_back(render_square(a.w, quantize_offset(ra + t * (rb - ra), range),
                                        quantize_offset(ca + t * (cb - ca), range)));
        }
    } else {
        if (a.c != 3)
            throw std::invalid_argument("reference_interpolation: colors domain expects 3 channels");
        const int64_t plane = static_cast<int64_t>(a.h) * a.w;
        double cha[3], chb[3];
        for (int ch = 0; ch < 3; ++ch) {
            double sa = 0.0, sb = 0.0;
            for (int64_t p = 0; p < plane; ++p) {
                sa += a.px[ch * plane + p];
                sb += b.px[ch * plane + p];
            }
            cha[ch] = sa / plane;
            chb[ch] = sb / plane;
        }
        for (int i = 0; i < k; ++i) {
            if (i == 0) {
                out.push_back(a);
                continue;
            }
            if (i == k - 1) {
                out.push_back(b);
                continue;
            }
            const double t = static_cast<double>(i) / (k - 1);
            out.push_back(render_color(a.w, cha[0] + t * (chb[0] - cha[0]),
                                       cha[1] + t * (chb[1] - cha[1]),
                                       cha[2] + t * (chb[2] - cha[2])));
        }
    }
    return out;
}

std::string spec_tag(const SyntheticDataset& ds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s:%s:sigma=%g", domain_tag(ds.domain),
                  image_effect_tag(ds.spec.img), ds.spec.sigma);
    return buf;
}

}  // namespace naim
