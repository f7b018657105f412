#include "naim/codec.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "naim/adam.hpp"
#include "naim/rng.hpp"

namespace naim {

namespace {

struct AeGeom {
    ConvGeom g1, g2;    // encoder convs
    ConvGeom og1, og2;  // decoder transposed convs, described by their outputs
    int flat;           // c2 * (s/4)^2
};

AeGeom geometry(const AeConfig& c) {
    if (c.image_size % 4 != 0 || c.image_size < 8)
        throw std::invalid_argument("autoencoder: image_size must be a multiple of 4 and >= 8");
    const int s = c.image_size;
    AeGeom g;
    g.g1 = {c.channels, s, s, 4, 4, 2, 1};
    g.g2 = {c.c1, s / 2, s / 2, 4, 4, 2, 1};
    g.og1 = {c.c1, s / 2, s / 2, 4, 4, 2, 1};  // convT output c1 x s/2 x s/2
    g.og2 = {c.channels, s, s, 4, 4, 2, 1};    // convT output channels x s x s
    g.flat = c.c2 * (s / 4) * (s / 4);
    return g;
}

Tensor init_weight(std::vector<int> shape, Rng& rng) {
    Tensor t(std::move(shape));
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.ndim() == 2 ? t.cols() : t.size()));
    for (auto& e : t.v) e = rng.uniform(-bound, bound);
    return t;
}

Tensor init_bias(int n, int fan_in, Rng& rng) {
    Tensor t({n});
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& e : t.v) e = rng.uniform(-bound, bound);
    return t;
}

struct AeTapeIds {
    Tape::NodeId ew1, eb1, ew2, eb2, ewf, ebf, dwf, dbf, dw1, db1, dw2, db2;
};

AeTapeIds leaf_params(Tape& t, const AutoencoderModel& ae) {
    return {t.leaf(ae.ew1), t.leaf(ae.eb1), t.leaf(ae.ew2), t.leaf(ae.eb2),
            t.leaf(ae.ewf), t.leaf(ae.ebf), t.leaf(ae.dwf), t.leaf(ae.dbf),
            t.leaf(ae.dw1), t.leaf(ae.db1), t.leaf(ae.dw2), t.leaf(ae.db2)};
}

Tape::NodeId encode_tape(Tape& t, const AeTapeIds& p, Tape::NodeId x, const AeGeom& g) {
    auto h1 = t.relu(t.conv2d(x, p.ew1, p.eb1, g.g1));
    auto h2 = t.relu(t.conv2d(h1, p.ew2, p.eb2, g.g2));
    return t.add_rowvec(t.matmul(h2, p.ewf), p.ebf);
}

// Raw decoder output, not clamped; training regresses the linear output so
// gradients never die outside [0,1].
Tape::NodeId decode_tape(Tape& t, const AutoencoderModel& ae, const AeTapeIds& p, Tape::NodeId z,
                         const AeGeom& g) {
    auto d0 = t.relu(t.add_rowvec(t.matmul(z, p.dwf), p.dbf));
    auto d1 = t.relu(t.conv_transpose2d(d0, p.dw1, p.db1, ae.cfg.c1, g.og1));
    return t.conv_transpose2d(d1, p.dw2, p.db2, ae.cfg.channels, g.og2);
}

void check_image_batch(const AutoencoderModel& ae, const Tensor& images) {
    const AeConfig& c = ae.cfg;
    const int want = c.channels * c.image_size * c.image_size;
    if (images.ndim() != 2 || images.cols() != want)
        throw std::invalid_argument("autoencoder: image batch " + images.shape_str() +
                                    " does not match trained dimensions [n x " +
                                    std::to_string(want) + "]");
}

// Gaussian elimination with partial pivoting for the small Newton systems.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (std::fabs(a[piv * n + col]) < 1e-12)
            throw std::runtime_error("attribute_direction: singular Newton system");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int j = r + 1; j < n; ++j) acc -= a[r * n + j] * x[j];
        x[r] = acc / a[r * n + r];
    }
    return x;
}

}  // namespace

std::vector<Tensor*> AutoencoderModel::params() {
    return {&ew1, &eb1, &ew2, &eb2, &ewf, &ebf, &dwf, &dbf, &dw1, &db1, &dw2, &db2};
}

std::vector<const Tensor*> AutoencoderModel::params() const {
    return {&ew1, &eb1, &ew2, &eb2, &ewf, &ebf, &dwf, &dbf, &dw1, &db1, &dw2, &db2};
}

AutoencoderModel make_autoencoder(const AeConfig& cfg) {
    const AeGeom g = geometry(cfg);
    Rng rng(derive_seed(cfg.seed, "ae-init"));
    AutoencoderModel ae;
    ae.cfg = cfg;
    ae.ew1 = init_weight({cfg.c1, cfg.channels * 16}, rng);
    ae.eb1 = init_bias(cfg.c1, cfg.channels * 16, rng);
    ae.ew2 = init_weight({cfg.c2, cfg.c1 * 16}, rng);
    ae.eb2 = init_bias(cfg.c2, cfg.c1 * 16, rng);
    ae.ewf = init_weight({g.flat, cfg.latent_dim}, rng);
    ae.ebf = init_bias(cfg.latent_dim, g.flat, rng);
    ae.dwf = init_weight({cfg.latent_dim, g.flat}, rng);
    ae.dbf = init_bias(g.flat, cfg.latent_dim, rng);
    ae.dw1 = init_weight({cfg.c2, cfg.c1 * 16}, rng);
    ae.db1 = init_bias(cfg.c1, cfg.c2 * 16, rng);
    ae.dw2 = init_weight({cfg.c1, cfg.channels * 16}, rng);
    ae.db2 = init_bias(cfg.channels, cfg.c1 * 16, rng);
    return ae;
}

AutoencoderModel train_autoencoder(const std::vector<Image>& images, const AeConfig& cfg,
                                   std::vector<double>* loss_log) {
    if (images.size() < 1000)
        throw std::invalid_argument("train_autoencoder: need at least 1000 images, got " +
                                    std::to_string(images.size()));
    for (const Image& im : images)
        if (im.h != cfg.image_size || im.w != cfg.image_size || im.c != cfg.channels)
            throw std::invalid_argument("train_autoencoder: image shapes are inconsistent with config");

    AutoencoderModel ae = make_autoencoder(cfg);
    const AeGeom g = geometry(cfg);
    Rng shuffle_rng(derive_seed(cfg.seed, "ae-shuffle"));
    auto params = ae.params();
    AdamState opt = make_adam({.lr = cfg.lr, .weight_decay = cfg.weight_decay}, params);
    const int n = static_cast<int>(images.size());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order = shuffle_rng.permutation(n);
        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += cfg.batch) {
            const int bsz = std::min(cfg.batch, n - start);
            Tensor batch({bsz, cfg.channels * cfg.image_size * cfg.image_size});
            for (int i = 0; i < bsz; ++i) {
                const Image& im = images[order[start + i]];
                std::copy(im.px.begin(), im.px.end(),
                          batch.v.begin() + static_cast<size_t>(i) * im.size());
            }
            Tape t;
            AeTapeIds p = leaf_params(t, ae);
            auto x = t.leaf(batch);
            auto out = decode_tape(t, ae, p, encode_tape(t, p, x, g), g);
            auto loss = t.mse_loss(out, batch);
            const double lv = t.value(loss).v[0];
            if (!std::isfinite(lv))
                throw std::runtime_error("train_autoencoder: non-finite loss at epoch " +
                                         std::to_string(epoch));
            epoch_loss += lv * bsz;
            t.backward(loss);
            std::vector<const Tensor*> grads = {
                &t.grad(p.ew1), &t.grad(p.eb1), &t.grad(p.ew2), &t.grad(p.eb2),
                &t.grad(p.ewf), &t.grad(p.ebf), &t.grad(p.dwf), &t.grad(p.dbf),
                &t.grad(p.dw1), &t.grad(p.db1), &t.grad(p.dw2), &t.grad(p.db2)};
            adam_step(opt, params, grads);
        }
        if (loss_log) loss_log->push_back(epoch_loss / n);
    }
    return ae;
}

Tensor encode_batch(const AutoencoderModel& ae, const Tensor& images) {
    check_image_batch(ae, images);
    const AeGeom g = geometry(ae.cfg);
    Tape t;
    AeTapeIds p = leaf_params(t, ae);
    return t.value(encode_tape(t, p, t.leaf(images), g));
}

Tensor decode_batch(const AutoencoderModel& ae, const Tensor& codes) {
    if (codes.ndim() != 2 || codes.cols() != ae.cfg.latent_dim)
        throw std::invalid_argument("decode_batch: codes " + codes.shape_str() +
                                    " do not match latent_dim " +
                                    std::to_string(ae.cfg.latent_dim));
    const AeGeom g = geometry(ae.cfg);
    Tape t;
    AeTapeIds p = leaf_params(t, ae);
    auto out = t.clamp01(decode_tape(t, ae, p, t.leaf(codes), g));
    return t.value(out);
}

LatentCode encode(const AutoencoderModel& ae, const Image& img) {
    Tensor batch = images_to_batch({img}, 0, 1);
    Tensor z = encode_batch(ae, batch);
    return {std::vector<double>(z.v.begin(), z.v.end())};
}

Image decode(const AutoencoderModel& ae, const LatentCode& code) {
    if (code.dim() != ae.cfg.latent_dim)
        throw std::invalid_argument("decode: code dimension " + std::to_string(code.dim()) +
                                    " does not match latent_dim " +
                                    std::to_string(ae.cfg.latent_dim));
    Tensor codes = Tensor::from({1, code.dim()}, code.z);
    Tensor out = decode_batch(ae, codes);
    return batch_row_to_image(out, 0, ae.cfg.image_size, ae.cfg.image_size, ae.cfg.channels);
}

Tensor encode_images(const AutoencoderModel& ae, const std::vector<Image>& images) {
    if (images.empty()) throw std::invalid_argument("encode_images: empty image set");
    const int n = static_cast<int>(images.size());
    const int l = ae.cfg.latent_dim;
    Tensor codes({n, l});
    const int chunk = 256;
    for (int start = 0; start < n; start += chunk) {
        const int cnt = std::min(chunk, n - start);
        Tensor zb = encode_batch(ae, images_to_batch(images, start, cnt));
        std::copy(zb.v.begin(), zb.v.end(), codes.v.begin() + static_cast<size_t>(start) * l);
    }
    return codes;
}

std::vector<double> attribute_direction(const std::vector<LatentCode>& codes,
                                        const std::vector<int>& labels) {
    if (codes.empty() || codes.size() != labels.size())
        throw std::invalid_argument("attribute_direction: codes and labels must align and be nonempty");
    const int l = codes[0].dim();
    int pos = 0;
    for (size_t i = 0; i < codes.size(); ++i) {
        if (codes[i].dim() != l)
            throw std::invalid_argument("attribute_direction: inconsistent code dimensions");
        if (labels[i] != 0 && labels[i] != 1)
            throw std::invalid_argument("attribute_direction: labels must be 0/1");
        pos += labels[i];
    }
    if (pos == 0 || pos == static_cast<int>(codes.size()))
        throw std::invalid_argument("attribute_direction: both classes must be nonempty");

    // Newton iterations on L2-regularized logistic loss; the last coordinate
    // is the intercept, which is dropped from the returned direction.
    const int d = l + 1;
    const double lambda = 1e-2;
    std::vector<double> w(d, 0.0);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> grad(d, 0.0), hess(static_cast<size_t>(d) * d, 0.0);
        for (int j = 0; j < d; ++j) {
            grad[j] = lambda * w[j];
            hess[j * d + j] = lambda;
        }
        std::vector<double> xt(d);
        for (size_t i = 0; i < codes.size(); ++i) {
            for (int j = 0; j < l; ++j) xt[j] = codes[i].z[j];
            xt[l] = 1.0;
            double m = 0.0;
            for (int j = 0; j < d; ++j) m += w[j] * xt[j];
            const double p = 1.0 / (1.0 + std::exp(-m));
            const double r = p - labels[i];
            const double s = p * (1.0 - p);
            for (int j = 0; j < d; ++j) {
                grad[j] += r * xt[j];
                for (int k2 = 0; k2 <= j; ++k2) hess[j * d + k2] += s * xt[j] * xt[k2];
            }
        }
        for (int j = 0; j < d; ++j)
            for (int k2 = j + 1; k2 < d; ++k2) hess[j * d + k2] = hess[k2 * d + j];
        std::vector<double> delta = solve_linear(std::move(hess), grad);
        double dmax = 0.0;
        for (int j = 0; j < d; ++j) {
            w[j] -= delta[j];
            dmax = std::max(dmax, std::fabs(delta[j]));
        }
        if (dmax < 1e-10) break;
    }
    double norm = 0.0;
    for (int j = 0; j < l; ++j) norm += w[j] * w[j];
    norm = std::sqrt(norm);
    if (norm < 1e-12)
        throw std::runtime_error("attribute_direction: degenerate direction (codes carry no signal)");
    std::vector<double> v(l);
    for (int j = 0; j < l; ++j) v[j] = w[j] / norm;
    return v;
}

}  // namespace naim
