#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "naim/codec.hpp"
#include "naim/mlp.hpp"
#include "naim/synth.hpp"
#include "naim/tensor.hpp"

namespace naim {

struct TrainConfig {
    int epochs = 60;
    int batch = 64;
    double lr = 1e-3;
    double weight_decay = 1e-3;
    double dropout = 0.2;        // unit dropout inside every net
    double feature_dropout = 0.5;  // per-sample whole-term dropout probability
    int shape_hidden = 100;
    int shape_layers = 4;
    int image_hidden = 500;
    int image_layers = 4;
    uint64_t seed = 1;
    bool use_image = true;  // false trains the "w/o image" ablation arm
    std::vector<std::pair<int, int>> interactions;  // pairwise (j,k), j != k
};

// Additive predictor: intercept + univariate shape nets + optional pairwise
// interaction nets + an image head over the frozen encoder's latent codes.
// The link is the identity; every experiment here is a Gaussian regression.
struct NaimModel {
    double beta0 = 0.0;
    std::vector<Mlp> shape_nets;                    // f_j: R -> R
    std::vector<std::pair<int, int>> interaction_pairs;
    std::vector<Mlp> interaction_nets;              // f_jk: R^2 -> R
    bool has_image_head = false;
    Mlp image_head;                                 // f_img: R^l -> R
    int latent_dim = 0;

    // Training-set means of each term's raw output, used to zero-center
    // queried effects; predictions are unaffected (means cancel with beta0).
    std::vector<double> shape_means;
    std::vector<double> interaction_means;
    double image_mean = 0.0;
};

// Individually queried effect terms (raw, uncentered).
double shape_term(const NaimModel& m, int j, double xj);
double interaction_term(const NaimModel& m, int idx, double xa, double xb);
double image_term(const NaimModel& m, const std::vector<double>& z);

// y_hat = beta0 + sum_j f_j(x_j) + sum f_jk + f_img(z), identity link.
double predict(const NaimModel& m, const std::vector<double>& x, const std::vector<double>& z);

// The "w/o image" ablation arm of the same model.
double predict_tabular(const NaimModel& m, const std::vector<double>& x);

// Batch prediction over dataset rows; codes may be empty for tabular-only
// models. x: [n x J], codes: [n x l].
std::vector<double> predict_batch(const NaimModel& m, const Tensor& x, const Tensor& codes);

// Fits the model by minibatch Adam on MSE. Latent codes are computed once
// with the frozen encoder before training; the encoder itself is never
// updated. With cfg.use_image == false the image head is absent entirely.
NaimModel train(const SyntheticDataset& ds, const AutoencoderModel* ae, const TrainConfig& cfg,
                std::vector<double>* loss_log = nullptr);

// (x, f_j(x) - training mean of f_j) per grid point.
std::vector<std::pair<double, double>> effect_curve_numeric(const NaimModel& m, int j,
                                                            const std::vector<double>& grid);

}  // namespace naim
