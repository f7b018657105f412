#include "naim/nam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "naim/adam.hpp"
#include "naim/rng.hpp"

namespace naim {

namespace {

MlpConfig shape_net_cfg(const TrainConfig& cfg) {
    MlpConfig mc;
    mc.in_dim = 1;
    mc.out_dim = 1;
    mc.hidden = cfg.shape_hidden;
    mc.n_hidden = cfg.shape_layers;
    mc.skip = true;
    mc.dropout = cfg.dropout;
    return mc;
}

MlpConfig interaction_net_cfg(const TrainConfig& cfg) {
    MlpConfig mc = shape_net_cfg(cfg);
    mc.in_dim = 2;
    return mc;
}

MlpConfig image_net_cfg(const TrainConfig& cfg, int latent_dim) {
    MlpConfig mc;
    mc.in_dim = latent_dim;
    mc.out_dim = 1;
    mc.hidden = cfg.image_hidden;
    mc.n_hidden = cfg.image_layers;
    mc.skip = true;
    mc.dropout = cfg.dropout;
    return mc;
}

// Rows `rows` of `src`, restricted to the listed columns.
Tensor take(const Tensor& src, const std::vector<int>& rows, const std::vector<int>& cols) {
    Tensor out({static_cast<int>(rows.size()), static_cast<int>(cols.size())});
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            out.at(static_cast<int>(i), static_cast<int>(j)) = src.at(rows[i], cols[j]);
    return out;
}

Tensor single_column(const Tensor& src, int j) {
    Tensor out({src.rows(), 1});
    for (int i = 0; i < src.rows(); ++i) out.v[i] = src.at(i, j);
    return out;
}

void validate_train_config(const TrainConfig& cfg, int n_features) {
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (cfg.batch < 1) throw std::invalid_argument("train: batch must be >= 1");
    if (!(cfg.lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
    if (cfg.weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be >= 0");
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
        throw std::invalid_argument("train: dropout must lie in [0, 1)");
    if (cfg.feature_dropout < 0.0 || cfg.feature_dropout >= 1.0)
        throw std::invalid_argument("train: feature_dropout must lie in [0, 1)");
    if (cfg.shape_hidden < 1 || cfg.image_hidden < 1)
        throw std::invalid_argument("train: hidden widths must be >= 1");
    for (const auto& [a, b] : cfg.interactions) {
        if (a < 0 || a >= n_features || b < 0 || b >= n_features || a == b)
            throw std::invalid_argument("train: invalid interaction pair (" + std::to_string(a) +
                                        ", " + std::to_string(b) + ")");
    }
}

double mean_of(const Tensor& column) {
    double s = 0.0;
    for (double v : column.v) s += v;
    return column.v.empty() ? 0.0 : s / static_cast<double>(column.v.size());
}

// Evaluates one net over the full design in row chunks (keeps activations small).
Tensor eval_net_chunked(const Mlp& net, const Tensor& input) {
    const int n = input.rows();
    const int chunk = 2048;
    Tensor out({n, 1});
    for (int start = 0; start < n; start += chunk) {
        const int cnt = std::min(chunk, n - start);
        Tensor part({cnt, input.cols()});
        std::copy(input.v.begin() + static_cast<size_t>(start) * input.cols(),
                  input.v.begin() + static_cast<size_t>(start + cnt) * input.cols(),
                  part.v.begin());
        Tensor y = mlp_forward(net, part);
        std::copy(y.v.begin(), y.v.end(), out.v.begin() + start);
    }
    return out;
}

}  // namespace

double shape_term(const NaimModel& m, int j, double xj) {
    if (j < 0 || j >= static_cast<int>(m.shape_nets.size()))
        throw std::invalid_argument("shape_term: feature index " + std::to_string(j) +
                                    " out of range");
    Tensor in({1, 1});
    in.v[0] = xj;
    return mlp_forward(m.shape_nets[j], in).v[0];
}

double interaction_term(const NaimModel& m, int idx, double xa, double xb) {
    if (idx < 0 || idx >= static_cast<int>(m.interaction_nets.size()))
        throw std::invalid_argument("interaction_term: index out of range");
    Tensor in({1, 2});
    in.v[0] = xa;
    in.v[1] = xb;
    return mlp_forward(m.interaction_nets[idx], in).v[0];
}

double image_term(const NaimModel& m, const std::vector<double>& z) {
    if (!m.has_image_head) throw std::invalid_argument("image_term: model has no image head");
    if (static_cast<int>(z.size()) != m.latent_dim)
        throw std::invalid_argument("image_term: latent has dim " + std::to_string(z.size()) +
                                    ", expected " + std::to_string(m.latent_dim));
    Tensor in({1, m.latent_dim});
    std::copy(z.begin(), z.end(), in.v.begin());
    return mlp_forward(m.image_head, in).v[0];
}

double predict_tabular(const NaimModel& m, const std::vector<double>& x) {
    if (x.size() != m.shape_nets.size())
        throw std::invalid_argument("predict_tabular: expected " +
                                    std::to_string(m.shape_nets.size()) + " features, got " +
                                    std::to_string(x.size()));
    double s = m.beta0;
    for (size_t j = 0; j < m.shape_nets.size(); ++j) s += shape_term(m, static_cast<int>(j), x[j]);
    for (size_t i = 0; i < m.interaction_nets.size(); ++i) {
        const auto& [a, b] = m.interaction_pairs[i];
        s += interaction_term(m, static_cast<int>(i), x[a], x[b]);
    }
    return s;
}

double predict(const NaimModel& m, const std::vector<double>& x, const std::vector<double>& z) {
    double s = predict_tabular(m, x);
    if (m.has_image_head) s += image_term(m, z);
    return s;
}

std::vector<double> predict_batch(const NaimModel& m, const Tensor& x, const Tensor& codes) {
    const int n = x.rows();
    if (x.cols() != static_cast<int>(m.shape_nets.size()))
        throw std::invalid_argument("predict_batch: design has " + std::to_string(x.cols()) +
                                    " columns, expected " + std::to_string(m.shape_nets.size()));
    if (m.has_image_head && (codes.rows() != n || codes.cols() != m.latent_dim))
        throw std::invalid_argument("predict_batch: latent codes must be [n x latent_dim]");

    std::vector<double> out(n, m.beta0);
    for (size_t j = 0; j < m.shape_nets.size(); ++j) {
        Tensor f = eval_net_chunked(m.shape_nets[j], single_column(x, static_cast<int>(j)));
        for (int i = 0; i < n; ++i) out[i] += f.v[i];
    }
    for (size_t k = 0; k < m.interaction_nets.size(); ++k) {
        const auto& [a, b] = m.interaction_pairs[k];
        Tensor in({n, 2});
        for (int i = 0; i < n; ++i) {
            in.at(i, 0) = x.at(i, a);
            in.at(i, 1) = x.at(i, b);
        }
        Tensor f = eval_net_chunked(m.interaction_nets[k], in);
        for (int i = 0; i < n; ++i) out[i] += f.v[i];
    }
    if (m.has_image_head) {
        Tensor f = eval_net_chunked(m.image_head, codes);
        for (int i = 0; i < n; ++i) out[i] += f.v[i];
    }
    return out;
}

NaimModel train(const SyntheticDataset& ds, const AutoencoderModel* ae, const TrainConfig& cfg,
                std::vector<double>* loss_log) {
    const int n = ds.n();
    if (n == 0) throw std::invalid_argument("train: empty dataset");
    if (ds.x.rows() != n) throw std::invalid_argument("train: design rows do not match dataset size");
    if (static_cast<int>(ds.y.size()) != n)
        throw std::invalid_argument("train: response length does not match dataset size");
    const int n_features = ds.x.cols();
    validate_train_config(cfg, n_features);
    if (cfg.use_image && ae == nullptr)
        throw std::invalid_argument("train: image term requested without an encoder");
    if (cfg.use_image && static_cast<int>(ds.images.size()) != n)
        throw std::invalid_argument("train: image count does not match dataset size");

    // The encoder stays frozen, so every code can be computed once up front.
    Tensor codes;
    if (cfg.use_image) codes = encode_images(*ae, ds.images);

    NaimModel m;
    m.interaction_pairs = cfg.interactions;
    Rng init_rng(derive_seed(cfg.seed, "nam-init"));
    for (int j = 0; j < n_features; ++j)
        m.shape_nets.push_back(make_mlp(shape_net_cfg(cfg), init_rng));
    for (size_t k = 0; k < cfg.interactions.size(); ++k)
        m.interaction_nets.push_back(make_mlp(interaction_net_cfg(cfg), init_rng));
    if (cfg.use_image) {
        m.image_head = make_mlp(image_net_cfg(cfg, ae->cfg.latent_dim), init_rng);
        m.has_image_head = true;
        m.latent_dim = ae->cfg.latent_dim;
    }

    Tensor beta0_t({1, 1}, 0.0);
    std::vector<Tensor*> params{&beta0_t};
    std::vector<Mlp*> nets;
    for (Mlp& net : m.shape_nets) nets.push_back(&net);
    for (Mlp& net : m.interaction_nets) nets.push_back(&net);
    if (m.has_image_head) nets.push_back(&m.image_head);
    for (Mlp* net : nets)
        for (Tensor* p : mlp_params(*net)) params.push_back(p);

    AdamState opt = make_adam({.lr = cfg.lr, .weight_decay = cfg.weight_decay}, params);
    Rng shuffle_rng(derive_seed(cfg.seed, "nam-shuffle"));
    Rng drop_rng(derive_seed(cfg.seed, "nam-dropout"));
    Rng fd_rng(derive_seed(cfg.seed, "nam-fd"));

    std::vector<int> latent_cols(m.latent_dim);
    for (int c = 0; c < m.latent_dim; ++c) latent_cols[c] = c;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order = shuffle_rng.permutation(n);
        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += cfg.batch) {
            const int bsz = std::min(cfg.batch, n - start);
            std::vector<int> rows(order.begin() + start, order.begin() + start + bsz);

            Tensor target({bsz, 1});
            for (int i = 0; i < bsz; ++i) target.v[i] = ds.y[rows[i]];

            Tape tape;
            auto b0 = tape.leaf(beta0_t);
            std::vector<MlpTapeIds> ids(nets.size());
            for (size_t k = 0; k < nets.size(); ++k) ids[k] = mlp_leaf_params(tape, *nets[k]);

            // Feature dropout: each sample of the batch independently zeroes
            // each additive term with probability feature_dropout, without
            // rescaling the survivors.
            auto fd_mask = [&]() {
                Tensor mask({bsz, 1}, 1.0);
                for (int i = 0; i < bsz; ++i)
                    if (fd_rng.bernoulli(cfg.feature_dropout)) mask.v[i] = 0.0;
                return mask;
            };

            Tape::NodeId sum = -1;
            int term = 0;
            auto add_term = [&](Tape::NodeId out) {
                out = tape.mul_mask(out, fd_mask());
                sum = sum < 0 ? out : tape.add(sum, out);
            };
            for (int j = 0; j < n_features; ++j, ++term) {
                auto in = tape.leaf(take(ds.x, rows, {j}));
                add_term(mlp_tape_forward(tape, *nets[term], ids[term], in, true, &drop_rng));
            }
            for (size_t k = 0; k < m.interaction_nets.size(); ++k, ++term) {
                const auto& [a, b] = m.interaction_pairs[k];
                auto in = tape.leaf(take(ds.x, rows, {a, b}));
                add_term(mlp_tape_forward(tape, *nets[term], ids[term], in, true, &drop_rng));
            }
            if (m.has_image_head) {
                auto in = tape.leaf(take(codes, rows, latent_cols));
                add_term(mlp_tape_forward(tape, *nets[term], ids[term], in, true, &drop_rng));
                ++term;
            }

            Tape::NodeId pred;
            if (sum < 0) {
                // No additive terms at all: the prediction is the bare intercept.
                auto zeros = tape.leaf(Tensor({bsz, 1}, 0.0));
                pred = tape.add_scalar(zeros, b0);
            } else {
                pred = tape.add_scalar(sum, b0);
            }
            auto loss = tape.mse_loss(pred, target);
            const double lv = tape.value(loss).v[0];
            if (!std::isfinite(lv))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch));
            epoch_loss += lv * bsz;
            tape.backward(loss);

            std::vector<const Tensor*> grads{&tape.grad(b0)};
            for (const MlpTapeIds& id : ids) {
                for (size_t li = 0; li < id.W.size(); ++li) {
                    grads.push_back(&tape.grad(id.W[li]));
                    grads.push_back(&tape.grad(id.b[li]));
                }
            }
            adam_step(opt, params, grads);
        }
        if (loss_log) loss_log->push_back(epoch_loss / n);
    }

    m.beta0 = beta0_t.v[0];

    // Training-set means of every raw term, stored for centered effect queries.
    m.shape_means.resize(m.shape_nets.size(), 0.0);
    for (size_t j = 0; j < m.shape_nets.size(); ++j)
        m.shape_means[j] =
            mean_of(eval_net_chunked(m.shape_nets[j], single_column(ds.x, static_cast<int>(j))));
    m.interaction_means.resize(m.interaction_nets.size(), 0.0);
    for (size_t k = 0; k < m.interaction_nets.size(); ++k) {
        const auto& [a, b] = m.interaction_pairs[k];
        Tensor in({n, 2});
        for (int i = 0; i < n; ++i) {
            in.at(i, 0) = ds.x.at(i, a);
            in.at(i, 1) = ds.x.at(i, b);
        }
        m.interaction_means[k] = mean_of(eval_net_chunked(m.interaction_nets[k], in));
    }
    if (m.has_image_head) m.image_mean = mean_of(eval_net_chunked(m.image_head, codes));
    return m;
}

std::vector<std::pair<double, double>> effect_curve_numeric(const NaimModel& m, int j,
                                                            const std::vector<double>& grid) {
    if (j < 0 || j >= static_cast<int>(m.shape_nets.size()))
        throw std::invalid_argument("effect_curve_numeric: feature index " + std::to_string(j) +
                                    " out of range");
    std::vector<std::pair<double, double>> curve;
    curve.reserve(grid.size());
    for (double x : grid) curve.emplace_back(x, shape_term(m, j, x) - m.shape_means[j]);
    return curve;
}

}  // namespace naim
