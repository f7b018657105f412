#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "naim/bench.hpp"
#include "naim/codec.hpp"
#include "naim/nam.hpp"
#include "naim/synth.hpp"

namespace naim {

// One flat configuration drives every experiment command. Values may come
// from an INI file, command-line flags, or both (flags win). All randomness
// fans out from `seed` via derive_seed with a fixed tag per module:
//   "train-split" / "test-split"  dataset generation
//   "autoencoder"                 codec training
//   "naim"                        additive-model training
//   "bench"                       benchmark pair sampling
struct ExperimentConfig {
    std::string domain = "squares";  // "squares" | "colors"
    std::string effect = "2x";       // "2x" | "2x^4" | "sin2pix" | "none"
    double sigma = 0.1;
    int n_train = 10000;
    int n_test = 2000;
    int image_size = 32;
    uint64_t seed = 1;
    std::string out_dir = "out";
    // autoencoder
    int latent_dim = 16;
    int ae_c1 = 16;
    int ae_c2 = 32;
    int ae_epochs = 20;
    int ae_batch = 64;
    double ae_lr = 1e-3;
    double ae_weight_decay = 0.0;
    // additive model
    int nam_epochs = 40;
    int nam_batch = 64;
    double nam_lr = 1e-3;
    double nam_weight_decay = 1e-3;
    double dropout = 0.2;
    double feature_dropout = 0.5;
    int shape_hidden = 100;
    int shape_layers = 4;
    int image_hidden = 500;
    int image_layers = 4;
    std::string interactions;  // optional pairs "0-1,1-2"; empty = none
    // benchmark scale
    int n_pairs = 50;
    int n_steps = 50;
    // effect-lens parameters
    double alpha = 1.0;
    int k = 11;
};

void validate_config(const ExperimentConfig& cfg);

// Module configs derived from the experiment config (seeds included).
AeConfig make_ae_config(const ExperimentConfig& cfg);
TrainConfig make_train_config(const ExperimentConfig& cfg);

// Dataset persistence: a directory of img_XXXXX.png files plus manifest.csv
// with columns id,x1,x2,x3,phi,y,noise,spec_tag,seed (floats as %.17g).
void save_dataset(const SyntheticDataset& ds, const std::string& dir);
SyntheticDataset load_dataset(const std::string& dir);

// FNV-1a over a file's bytes; used to pin a bundle to its datasets.
uint64_t fnv64_file(const std::string& path);

inline constexpr const char* kBundleVersion = "naim-bundle-v1";

// Everything needed to reuse a trained pipeline: both models, the exact
// config, the manifest hashes of the data they were fitted on, and the test
// MSE recorded at training time (reloading must reproduce it to 1e-9).
struct ModelBundle {
    std::string version = kBundleVersion;
    ExperimentConfig config;
    uint64_t train_manifest_hash = 0;
    uint64_t test_manifest_hash = 0;
    double val_mse = 0.0;
    AutoencoderModel ae;
    NaimModel model;
};

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);  // wrong version -> error

// Command bodies behind the CLI subcommands. All paths live under
// cfg.out_dir; errors surface as exceptions for the frontend to report.
void cmd_generate(const ExperimentConfig& cfg);
void cmd_train(const ExperimentConfig& cfg);
void cmd_bench(const ExperimentConfig& cfg);
void cmd_interpolate(const ExperimentConfig& cfg, int index_a, int index_b);
void cmd_manipulate(const ExperimentConfig& cfg, int index, const std::string& label_csv);
void cmd_global_shift(const ExperimentConfig& cfg, const std::string& label_csv);

}  // namespace naim
