#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "naim/codec.hpp"
#include "naim/nam.hpp"
#include "naim/synth.hpp"

namespace naim {

// Mean of squared differences. Lengths must match and be nonzero.
double mse(const std::vector<double>& pred, const std::vector<double>& truth);

// 1 - SS_res / SS_tot. Needs length >= 2 and non-constant truth.
double r2(const std::vector<double>& pred, const std::vector<double>& truth);

struct BenchRow {
    std::string label;
    double mse = 0.0;
    double r2 = 0.0;
};

// One benchmark protocol's result: labeled (MSE, R^2) rows plus the
// descriptors needed to audit the run (dataset, effect spec, seed, scale).
struct BenchReport {
    std::string protocol;
    std::string dataset;
    std::string spec;
    uint64_t seed = 0;
    int n_pairs = 0;
    int n_steps = 0;
    int skipped_pairs = 0;
    std::vector<BenchRow> rows;

    const BenchRow& row(const std::string& label) const;  // throws if absent
};

// Trains both ablation arms (with and without the image term) on the train
// split with the given config and scores them on the test split.
BenchReport ablation_run(const SyntheticDataset& train_split, const SyntheticDataset& test_split,
                         const AutoencoderModel& ae, const TrainConfig& cfg);

// Samples n_pairs random test-image pairs; per pair, walks the model's latent
// interpolation in n_steps steps and scores the image effect along it against
// the true effect of the feature-space interpolation, both curves
// zero-centered over the path (effects are identified only up to constants).
// Ground-truth features are the extractor outputs (phi_xval / phi_red) of the
// endpoint images; self-paired or Phi-equal pairs are skipped and counted.
// Rows hold pair-averaged metrics.
BenchReport image_effect_benchmark(const NaimModel& m, const AutoencoderModel& ae,
                                   const SyntheticDataset& test_split, int n_pairs, int n_steps,
                                   uint64_t seed);

// Per numeric feature, scores the learned shape function against the true
// effect on the test split's feature values, both zero-centered over those
// values. Rows f1, f2, f3.
BenchReport numeric_effect_benchmark(const NaimModel& m, const SyntheticDataset& test_split);

// CSV rows "protocol,dataset,spec,seed,n_pairs,n_steps,skipped_pairs,label,mse,r2".
void write_bench_csv(const std::vector<BenchReport>& reports, const std::string& path);

// Human-readable block for logs and reports.
std::string bench_summary(const BenchReport& report);

}  // namespace naim
