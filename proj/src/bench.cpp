#include "naim/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "naim/mlp.hpp"
#include "naim/rng.hpp"

namespace naim {

namespace {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double mse(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.empty()) throw std::invalid_argument("mse: empty input");
    if (pred.size() != truth.size())
        throw std::invalid_argument("mse: length mismatch (" + std::to_string(pred.size()) +
                                    " vs " + std::to_string(truth.size()) + ")");
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

double r2(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("r2: length mismatch (" + std::to_string(pred.size()) +
                                    " vs " + std::to_string(truth.size()) + ")");
    if (pred.size() < 2) throw std::invalid_argument("r2: need at least 2 values");
    const double mean = mean_of(truth);
    double ss_res = 0.0, ss_tot = 0.0;
    for (size_t i = 0; i < truth.size(); ++i) {
        const double r = truth[i] - pred[i];
        const double d = truth[i] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot == 0.0) throw std::invalid_argument("r2: truth is constant");
    return 1.0 - ss_res / ss_tot;
}

const BenchRow& BenchReport::row(const std::string& label) const {
    for (const BenchRow& r : rows)
        if (r.label == label) return r;
    throw std::invalid_argument("BenchReport: no row labeled '" + label + "'");
}

BenchReport ablation_run(const SyntheticDataset& train_split, const SyntheticDataset& test_split,
                         const AutoencoderModel& ae, const TrainConfig& cfg) {
    if (test_split.n() == 0) throw std::invalid_argument("ablation_run: empty test split");
    if (test_split.y.size() != static_cast<size_t>(test_split.n()))
        throw std::invalid_argument("ablation_run: test split has no response");

    BenchReport rep;
    rep.protocol = "ablation";
    rep.dataset = domain_tag(train_split.domain);
    rep.spec = spec_tag(train_split);
    rep.seed = cfg.seed;

    TrainConfig with_cfg = cfg;
    with_cfg.use_image = true;
    NaimModel with_model = train(train_split, &ae, with_cfg);
    Tensor test_codes = encode_images(ae, test_split.images);
    std::vector<double> pred_with = predict_batch(with_model, test_split.x, test_codes);
    rep.rows.push_back({"with_image", mse(pred_with, test_split.y), r2(pred_with, test_split.y)});

    TrainConfig wo_cfg = cfg;
    wo_cfg.use_image = false;
    NaimModel wo_model = train(train_split, nullptr, wo_cfg);
    std::vector<double> pred_wo = predict_batch(wo_model, test_split.x, Tensor{});
    rep.rows.push_back({"without_image", mse(pred_wo, test_split.y), r2(pred_wo, test_split.y)});
    return rep;
}

BenchReport image_effect_benchmark(const NaimModel& m, const AutoencoderModel& ae,
                                   const SyntheticDataset& test_split, int n_pairs, int n_steps,
                                   uint64_t seed) {
    if (n_pairs < 1) throw std::invalid_argument("image_effect_benchmark: n_pairs must be >= 1");
    if (n_steps < 2) throw std::invalid_argument("image_effect_benchmark: n_steps must be >= 2");
    if (test_split.n() < 2)
        throw std::invalid_argument("image_effect_benchmark: need at least 2 test images");
    if (!m.has_image_head)
        throw std::invalid_argument("image_effect_benchmark: model has no image head");

    const int n = test_split.n();
    const int l = m.latent_dim;
    Tensor codes = encode_images(ae, test_split.images);
    const ImageEffect eff = test_split.spec.img;

    // Ground-truth features come from the extractor applied to the actual
    // images, not from the generator's latent parameter: the image carries no
    // information below its own quantization, so two images with equal
    // extracted features are Phi-equal and the pair is skipped.
    const bool squares = test_split.domain == ImageDomain::squares;
    std::vector<double> phi_of(n);
    for (int i = 0; i < n; ++i)
        phi_of[i] = squares ? phi_xval(test_split.images[i]) : phi_red(test_split.images[i]);

    Rng rng(derive_seed(seed, "bench-pairs"));
    double sum_mse = 0.0, sum_r2 = 0.0;
    int scored = 0, skipped = 0;
    for (int p = 0; p < n_pairs; ++p) {
        const int a = rng.uniform_int(0, n - 1);
        const int b = rng.uniform_int(0, n - 1);
        if (a == b || phi_of[a] == phi_of[b]) {
            ++skipped;
            continue;
        }

        std::vector<double> truth(n_steps);
        bool constant = true;
        for (int s = 0; s < n_steps; ++s) {
            const double lam = static_cast<double>(s) / (n_steps - 1);
            const double phi = (1.0 - lam) * phi_of[a] + lam * phi_of[b];
            truth[s] = image_effect(eff, phi);
            if (truth[s] != truth[0]) constant = false;
        }
        if (constant) {
            ++skipped;
            continue;
        }

        Tensor path({n_steps, l});
        for (int s = 0; s < n_steps; ++s) {
            const double lam = static_cast<double>(s) / (n_steps - 1);
            for (int j = 0; j < l; ++j)
                path.at(s, j) = (1.0 - lam) * codes.at(a, j) + lam * codes.at(b, j);
        }
        Tensor out = mlp_forward(m.image_head, path);
        std::vector<double> pred(out.v.begin(), out.v.begin() + n_steps);

        // Additive models identify effects only up to constants, so each
        // comparison is between zero-centered curves: both sides lose their
        // own mean over the path before mse/r2.
        const double tmean = mean_of(truth), pmean = mean_of(pred);
        for (int s = 0; s < n_steps; ++s) {
            truth[s] -= tmean;
            pred[s] -= pmean;
        }

        sum_mse += mse(pred, truth);
        sum_r2 += r2(pred, truth);
        ++scored;
    }
    if (scored == 0)
        throw std::runtime_error("image_effect_benchmark: no scorable pairs (all " +
                                 std::to_string(skipped) + " skipped)");

    BenchReport rep;
    rep.protocol = "image_effect";
    rep.dataset = domain_tag(test_split.domain);
    rep.spec = spec_tag(test_split);
    rep.seed = seed;
    rep.n_pairs = n_pairs;
    rep.n_steps = n_steps;
    rep.skipped_pairs = skipped;
    rep.rows.push_back({"image_effect", sum_mse / scored, sum_r2 / scored});
    return rep;
}

BenchReport numeric_effect_benchmark(const NaimModel& m, const SyntheticDataset& test_split) {
    const int n = test_split.n() > 0 ? test_split.n() : test_split.x.rows();
    if (n < 2) throw std::invalid_argument("numeric_effect_benchmark: need at least 2 samples");
    if (m.shape_nets.size() != 3)
        throw std::invalid_argument("numeric_effect_benchmark: model must have 3 shape nets");
    if (test_split.x.rows() != n)
        throw std::invalid_argument("numeric_effect_benchmark: design rows mismatch");

    BenchReport rep;
    rep.protocol = "numeric_effect";
    rep.dataset = domain_tag(test_split.domain);
    rep.spec = spec_tag(test_split);
    rep.seed = test_split.seed;
    for (int j = 0; j < 3; ++j) {
        std::vector<double> truth(n), pred(n);
        for (int i = 0; i < n; ++i) {
            truth[i] = numeric_effect(j, test_split.x.at(i, j));
            pred[i] = shape_term(m, j, test_split.x.at(i, j));
        }
        // Shape functions are identified only up to constants; both sides are
        // zero-centered over the same evaluation points before comparison.
        const double tmean = mean_of(truth), pmean = mean_of(pred);
        for (int i = 0; i < n; ++i) {
            truth[i] -= tmean;
            pred[i] -= pmean;
        }
        rep.rows.push_back({"f" + std::to_string(j + 1), mse(pred, truth), r2(pred, truth)});
    }
    return rep;
}

void write_bench_csv(const std::vector<BenchReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_bench_csv: cannot open " + path);
    out << "protocol,dataset,spec,seed,n_pairs,n_steps,skipped_pairs,label,mse,r2\n";
    for (const BenchReport& rep : reports)
        for (const BenchRow& row : rep.rows)
            out << rep.protocol << ',' << rep.dataset << ',' << rep.spec << ',' << rep.seed << ','
                << rep.n_pairs << ',' << rep.n_steps << ',' << rep.skipped_pairs << ','
                << row.label << ',' << format_g17(row.mse) << ',' << format_g17(row.r2) << '\n';
    if (!out) throw std::runtime_error("write_bench_csv: write failed for " + path);
}

std::string bench_summary(const BenchReport& report) {
    std::string s = "[" + report.protocol + "] dataset=" + report.dataset +
                    " spec=" + report.spec + " seed=" + std::to_string(report.seed);
    if (report.n_pairs > 0)
        s += " pairs=" + std::to_string(report.n_pairs) + "x" + std::to_string(report.n_steps) +
             " skipped=" + std::to_string(report.skipped_pairs);
    s += "\n";
    for (const BenchRow& row : report.rows) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "  %-14s mse=%-12.6g r2=%.6g\n", row.label.c_str(),
                      row.mse, row.r2);
        s += buf;
    }
    return s;
}

}  // namespace naim
