#include "naim/lens.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace naim {

namespace {

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

LatentSequence interpolate_latents(const LatentCode& z, const LatentCode& zp, int k) {
    if (k < 2) throw std::invalid_argument("interpolate_latents: k must be >= 2");
    if (z.dim() != zp.dim())
        throw std::invalid_argument("interpolate_latents: endpoint dimensions differ (" +
                                    std::to_string(z.dim()) + " vs " + std::to_string(zp.dim()) +
                                    ")");
    LatentSequence seq;
    seq.kind = SequenceKind::interpolation;
    seq.codes.reserve(k);
    const int d = z.dim();
    for (int i = 0; i < k; ++i) {
        const double t = static_cast<double>(i) / (k - 1);
        LatentCode c;
        c.z.resize(d);
        for (int j = 0; j < d; ++j) c.z[j] = (1.0 - t) * z.z[j] + t * zp.z[j];
        seq.codes.push_back(std::move(c));
    }
    return seq;
}

LatentSequence manipulate_latents(const LatentCode& z, const std::vector<double>& v_attr,
                                  double alpha, int k) {
    if (k < 2) throw std::invalid_argument("manipulate_latents: k must be >= 2");
    if (v_attr.size() != static_cast<size_t>(z.dim()))
        throw std::invalid_argument("manipulate_latents: direction dimension differs from code");
    const double vn = l2_norm(v_attr);
    if (vn <= 0.0) throw std::invalid_argument("manipulate_latents: v_attr must be nonzero");
    const double scale = alpha * l2_norm(z.z) / vn;

    LatentSequence seq;
    seq.kind = SequenceKind::manipulation;
    seq.v_attr = v_attr;
    seq.alpha = alpha;
    seq.codes.reserve(k);
    const int d = z.dim();
    for (int i = 0; i < k; ++i) {
        const double t = static_cast<double>(i) / (k - 1);
        LatentCode c;
        c.z.resize(d);
        for (int j = 0; j < d; ++j) c.z[j] = z.z[j] + scale * t * v_attr[j];
        seq.codes.push_back(std::move(c));
    }
    return seq;
}

EffectCurve effect_curve(const NaimModel& m, const AutoencoderModel& ae,
                         const LatentSequence& seq) {
    if (!m.has_image_head) throw std::invalid_argument("effect_curve: model has no image head");
    if (seq.k() < 2) throw std::invalid_argument("effect_curve: sequence must have k >= 2");
    if (seq.dim() != m.latent_dim)
        throw std::invalid_argument("effect_curve: code dimension " + std::to_string(seq.dim()) +
                                    " does not match image head input " +
                                    std::to_string(m.latent_dim));
    if (seq.dim() != ae.cfg.latent_dim)
        throw std::invalid_argument("effect_curve: code dimension does not match decoder");

    EffectCurve curve;
    const int k = seq.k();
    curve.t.reserve(k);
    curve.images.reserve(k);
    curve.prediction.reserve(k);
    for (int i = 0; i < k; ++i) {
        curve.t.push_back(static_cast<double>(i) / (k - 1));
        curve.images.push_back(decode(ae, seq.codes[i]));
        curve.prediction.push_back(image_term(m, seq.codes[i].z) - m.image_mean);
    }
    return curve;
}

GlobalShift global_shift(const NaimModel& m, const AutoencoderModel& ae,
                         const std::vector<Image>& images, const Tensor& x,
                         const std::vector<double>& v_attr, double alpha) {
    if (images.empty()) throw std::invalid_argument("global_shift: empty image set");
    const int n = static_cast<int>(images.size());
    if (x.rows() != n)
        throw std::invalid_argument("global_shift: design rows do not match image count");
    if (!m.has_image_head) throw std::invalid_argument("global_shift: model has no image head");
    if (v_attr.size() != static_cast<size_t>(m.latent_dim))
        throw std::invalid_argument("global_shift: direction dimension differs from latent dim");
    const double vn = l2_norm(v_attr);
    if (vn <= 0.0) throw std::invalid_argument("global_shift: v_attr must be nonzero");

    Tensor codes = encode_images(ae, images);
    Tensor shifted_codes = codes;
    for (int i = 0; i < n; ++i) {
        double zn = 0.0;
        for (int j = 0; j < m.latent_dim; ++j) {
            const double v = codes.at(i, j);
            zn += v * v;
        }
        const double scale = alpha * std::sqrt(zn) / vn;
        for (int j = 0; j < m.latent_dim; ++j) shifted_codes.at(i, j) += scale * v_attr[j];
    }

    GlobalShift out;
    out.base = predict_batch(m, x, codes);
    out.shifted = predict_batch(m, x, shifted_codes);
    for (int i = 0; i < n; ++i) {
        out.base_mean += out.base[i];
        out.shifted_mean += out.shifted[i];
    }
    out.base_mean /= n;
    out.shifted_mean /= n;
    return out;
}

std::vector<double> convexity_residual(
    const std::function<std::vector<double>(const std::vector<double>&)>& h,
    const std::vector<double>& z, const std::vector<double>& zt, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("convexity_residual: lambda must lie in [0, 1]");
    if (z.size() != zt.size())
        throw std::invalid_argument("convexity_residual: point dimensions differ");

    const std::vector<double> hz = h(z);
    if (lambda == 1.0) return std::vector<double>(hz.size(), 0.0);

    std::vector<double> mix(z.size());
    for (size_t j = 0; j < z.size(); ++j) mix[j] = lambda * z[j] + (1.0 - lambda) * zt[j];
    const std::vector<double> hmix = h(mix);
    const std::vector<double> hzt = h(zt);
    if (hmix.size() != hz.size() || hzt.size() != hz.size())
        throw std::invalid_argument("convexity_residual: h output dimension varies");

    std::vector<double> r(hz.size());
    for (size_t j = 0; j < hz.size(); ++j)
        r[j] = (hmix[j] - lambda * hz[j] - (1.0 - lambda) * hzt[j]) / (1.0 - lambda);
    return r;
}

void write_effect_curve_csv(const EffectCurve& curve, const std::string& path) {
    const bool with_ref = !curve.reference.empty();
    if (with_ref && curve.reference.size() != curve.prediction.size())
        throw std::invalid_argument("write_effect_curve_csv: reference length mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_effect_curve_csv: cannot open " + path);
    out << (with_ref ? "index,t,prediction,reference\n" : "index,t,prediction\n");
    for (int i = 0; i < curve.k(); ++i) {
        out << i << ',' << format_g17(curve.t[i]) << ',' << format_g17(curve.prediction[i]);
        if (with_ref) out << ',' << format_g17(curve.reference[i]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_effect_curve_csv: write failed for " + path);
}

void write_sequence_strip(const EffectCurve& curve, const std::string& path) {
    if (curve.images.empty()) throw std::invalid_argument("write_sequence_strip: empty curve");
    const Image& first = curve.images.front();
    for (const Image& im : curve.images)
        if (im.h != first.h || im.w != first.w || im.c != first.c)
            throw std::invalid_argument("write_sequence_strip: image shapes differ");

    const int k = static_cast<int>(curve.images.size());
    Image strip(first.h, first.w * k, first.c);
    for (int i = 0; i < k; ++i)
        for (int ch = 0; ch < strip.c; ++ch)
            for (int y = 0; y < strip.h; ++y)
                for (int xcol = 0; xcol < first.w; ++xcol)
                    strip.at(ch, y, i * first.w + xcol) = curve.images[i].at(ch, y, xcol);
    write_png(path, strip);
}

}  // namespace naim
