#include "naim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "naim/lens.hpp"
#include "naim/rng.hpp"

namespace naim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string image_path(const std::string& dir, int id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "img_%05d.png", id);
    return dir + "/" + buf;
}

// "<domain>:<effect>:sigma=<s>" as written by spec_tag.
void parse_spec_tag(const std::string& tag, ImageDomain& domain, EffectSpec& spec) {
    std::vector<std::string> parts = split(tag, ':');
    if (parts.size() != 3 || parts[2].rfind("sigma=", 0) != 0)
        throw std::runtime_error("parse_spec_tag: malformed tag '" + tag + "'");
    domain = domain_from_tag(parts[0]);
    spec.img = image_effect_from_tag(parts[1]);
    spec.sigma = std::stod(parts[2].substr(6));
}

std::vector<std::pair<int, int>> parse_interactions(const std::string& text) {
    std::vector<std::pair<int, int>> out;
    if (text.empty()) return out;
    for (const std::string& item : split(text, ',')) {
        std::vector<std::string> ends = split(item, '-');
        if (ends.size() != 2)
            throw std::invalid_argument("interactions: expected 'a-b' pairs, got '" + item + "'");
        out.emplace_back(std::stoi(ends[0]), std::stoi(ends[1]));
    }
    return out;
}

void write_loss_csv(const std::vector<double>& losses, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_loss_csv: cannot open " + path);
    out << "epoch,loss\n";
    for (size_t i = 0; i < losses.size(); ++i)
        out << i << ',' << format_g17(losses[i]) << '\n';
    if (!out) throw std::runtime_error("write_loss_csv: write failed for " + path);
}

SyntheticDataset generate_split(const ExperimentConfig& cfg, bool train_split) {
    const uint64_t seed = derive_seed(cfg.seed, train_split ? "train-split" : "test-split");
    const int n = train_split ? cfg.n_train : cfg.n_test;
    SyntheticDataset ds = domain_from_tag(cfg.domain) == ImageDomain::squares
                              ? gen_squares(n, cfg.image_size, seed)
                              : gen_colors(n, cfg.image_size, seed);
    EffectSpec spec;
    spec.img = image_effect_from_tag(cfg.effect);
    spec.sigma = cfg.sigma;
    apply_effects(ds, spec);
    return ds;
}

std::string train_dir(const ExperimentConfig& cfg) { return cfg.out_dir + "/data/train"; }
std::string test_dir(const ExperimentConfig& cfg) { return cfg.out_dir + "/data/test"; }
std::string bundle_path(const ExperimentConfig& cfg) { return cfg.out_dir + "/bundle.json"; }

// Loads "id,label" rows (labels 0/1) indexing into the test split.
void read_labels(const std::string& path, int n, std::vector<int>& ids,
                 std::vector<int>& labels) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("labels: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "id,label")
        throw std::runtime_error("labels: expected header 'id,label' in " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells = split(line, ',');
        if (cells.size() != 2) throw std::runtime_error("labels: malformed row '" + line + "'");
        const int id = std::stoi(cells[0]);
        const int label = std::stoi(cells[1]);
        if (id < 0 || id >= n)
            throw std::runtime_error("labels: id " + std::to_string(id) + " out of range");
        if (label != 0 && label != 1)
            throw std::runtime_error("labels: label must be 0 or 1, got '" + cells[1] + "'");
        ids.push_back(id);
        labels.push_back(label);
    }
    if (ids.empty()) throw std::runtime_error("labels: no rows in " + path);
}

std::vector<double> direction_from_labels(const AutoencoderModel& ae,
                                          const SyntheticDataset& test_split,
                                          const std::string& label_csv) {
    std::vector<int> ids, labels;
    read_labels(label_csv, test_split.n(), ids, labels);
    std::vector<LatentCode> codes;
    codes.reserve(ids.size());
    for (int id : ids) codes.push_back(encode(ae, test_split.images[id]));
    return attribute_direction(codes, labels);
}

// Centered true image effect along the feature-space path between two test
// samples, matching the benchmark's centering convention.
std::vector<double> reference_effect(const SyntheticDataset& test_split, int a, int b, int k) {
    double effect_mean = 0.0;
    for (double p : test_split.phi) effect_mean += image_effect(test_split.spec.img, p);
    effect_mean /= test_split.n();
    std::vector<double> ref(k);
    for (int i = 0; i < k; ++i) {
        const double t = static_cast<double>(i) / (k - 1);
        const double phi = (1.0 - t) * test_split.phi[a] + t * test_split.phi[b];
        ref[i] = image_effect(test_split.spec.img, phi) - effect_mean;
    }
    return ref;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
    domain_from_tag(cfg.domain);          // throws on unknown tag
    image_effect_from_tag(cfg.effect);    // throws on unknown tag
    if (cfg.sigma < 0.0) throw std::invalid_argument("config: sigma must be >= 0");
    if (cfg.n_train < 1 || cfg.n_test < 1)
        throw std::invalid_argument("config: split sizes must be >= 1");
    if (cfg.image_size < 8 || cfg.image_size % 4 != 0)
        throw std::invalid_argument("config: image_size must be a multiple of 4, >= 8");
    if (cfg.out_dir.empty()) throw std::invalid_argument("config: out_dir must be set");
    if (cfg.latent_dim < 1) throw std::invalid_argument("config: latent_dim must be >= 1");
    if (cfg.ae_epochs < 1 || cfg.nam_epochs < 1)
        throw std::invalid_argument("config: epochs must be >= 1");
    if (cfg.n_pairs < 1 || cfg.n_steps < 2)
        throw std::invalid_argument("config: need n_pairs >= 1 and n_steps >= 2");
    if (cfg.k < 2) throw std::invalid_argument("config: k must be >= 2");
    parse_interactions(cfg.interactions);
}

AeConfig make_ae_config(const ExperimentConfig& cfg) {
    AeConfig ae;
    ae.image_size = cfg.image_size;
    ae.channels = domain_from_tag(cfg.domain) == ImageDomain::squares ? 1 : 3;
    ae.latent_dim = cfg.latent_dim;
    ae.c1 = cfg.ae_c1;
    ae.c2 = cfg.ae_c2;
    ae.epochs = cfg.ae_epochs;
    ae.batch = cfg.ae_batch;
    ae.lr = cfg.ae_lr;
    ae.weight_decay = cfg.ae_weight_decay;
    ae.seed = derive_seed(cfg.seed, "autoencoder");
    return ae;
}

TrainConfig make_train_config(const ExperimentConfig& cfg) {
    TrainConfig tc;
    tc.epochs = cfg.nam_epochs;
    tc.batch = cfg.nam_batch;
    tc.lr = cfg.nam_lr;
    tc.weight_decay = cfg.nam_weight_decay;
    tc.dropout = cfg.dropout;
    tc.feature_dropout = cfg.feature_dropout;
    tc.shape_hidden = cfg.shape_hidden;
    tc.shape_layers = cfg.shape_layers;
    tc.image_hidden = cfg.image_hidden;
    tc.image_layers = cfg.image_layers;
    tc.seed = derive_seed(cfg.seed, "naim");
    tc.interactions = parse_interactions(cfg.interactions);
    return tc;
}

void save_dataset(const SyntheticDataset& ds, const std::string& dir) {
    if (ds.n() == 0) throw std::invalid_argument("save_dataset: empty dataset");
    if (ds.y.size() != static_cast<size_t>(ds.n()))
        throw std::invalid_argument("save_dataset: dataset has no response (apply_effects first)");
    fs::create_directories(dir);
    const std::string tag = spec_tag(ds);
    std::ofstream out(dir + "/manifest.csv");
    if (!out) throw std::runtime_error("save_dataset: cannot open manifest in " + dir);
    out << "id,x1,x2,x3,phi,y,noise,spec_tag,seed\n";
    for (int i = 0; i < ds.n(); ++i) {
        out << i;
        for (int j = 0; j < 3; ++j) out << ',' << format_g17(ds.x.at(i, j));
        out << ',' << format_g17(ds.phi[i]) << ',' << format_g17(ds.y[i]) << ','
            << format_g17(ds.noise[i]) << ',' << tag << ',' << ds.seed << '\n';
        write_png(image_path(dir, i), ds.images[i]);
    }
    if (!out) throw std::runtime_error("save_dataset: manifest write failed in " + dir);
}

SyntheticDataset load_dataset(const std::string& dir) {
    std::ifstream in(dir + "/manifest.csv");
    if (!in) throw std::runtime_error("load_dataset: cannot open " + dir + "/manifest.csv");
    std::string line;
    if (!std::getline(in, line) || line != "id,x1,x2,x3,phi,y,noise,spec_tag,seed")
        throw std::runtime_error("load_dataset: unexpected manifest header in " + dir);

    SyntheticDataset ds;
    std::vector<std::array<double, 3>> xs;
    std::string tag;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells = split(line, ',');
        if (cells.size() != 9)
            throw std::runtime_error("load_dataset: malformed manifest row '" + line + "'");
        const int id = std::stoi(cells[0]);
        if (id != static_cast<int>(xs.size()))
            throw std::runtime_error("load_dataset: non-contiguous ids in manifest");
        xs.push_back({std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3])});
        ds.phi.push_back(std::stod(cells[4]));
        ds.y.push_back(std::stod(cells[5]));
        ds.noise.push_back(std::stod(cells[6]));
        if (first) {
            tag = cells[7];
            ds.seed = std::stoull(cells[8]);
            first = false;
        } else if (cells[7] != tag) {
            throw std::runtime_error("load_dataset: inconsistent spec_tag in manifest");
        }
    }
    if (xs.empty()) throw std::runtime_error("load_dataset: manifest has no rows");
    parse_spec_tag(tag, ds.domain, ds.spec);

    const int n = static_cast<int>(xs.size());
    ds.x = Tensor({n, 3});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 3; ++j) ds.x.at(i, j) = xs[i][j];
    ds.images.reserve(n);
    for (int i = 0; i < n; ++i) ds.images.push_back(read_png(image_path(dir, i)));

    const Image& front = ds.images.front();
    if (front.h != front.w) throw std::runtime_error("load_dataset: images are not square");
    const int want_c = ds.domain == ImageDomain::squares ? 1 : 3;
    for (const Image& im : ds.images)
        if (im.h != front.h || im.w != front.w || im.c != want_c)
            throw std::runtime_error("load_dataset: inconsistent image shapes in " + dir);
    ds.image_size = front.h;
    return ds;
}

uint64_t fnv64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("fnv64_file: cannot open " + path);
    uint64_t hash = 14695981039346656037ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
        if (!in) break;
    }
    return hash;
}

// --- JSON mappings -----------------------------------------------------------

void to_json(json& j, const Tensor& t) { j = json{{"shape", t.shape}, {"data", t.v}}; }
void from_json(const json& j, Tensor& t) {
    t = Tensor::from(j.at("shape").get<std::vector<int>>(),
                     j.at("data").get<std::vector<double>>());
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MlpConfig, in_dim, out_dim, hidden, n_hidden, skip, dropout)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Mlp, cfg, W, b)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AeConfig, image_size, channels, latent_dim, c1, c2, epochs,
                                   batch, lr, weight_decay, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AutoencoderModel, cfg, ew1, eb1, ew2, eb2, ewf, ebf, dwf, dbf,
                                   dw1, db1, dw2, db2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(NaimModel, beta0, shape_nets, interaction_pairs,
                                   interaction_nets, has_image_head, image_head, latent_dim,
                                   shape_means, interaction_means, image_mean)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ExperimentConfig, domain, effect, sigma, n_train, n_test,
                                   image_size, seed, out_dir, latent_dim, ae_c1, ae_c2, ae_epochs,
                                   ae_batch, ae_lr, ae_weight_decay, nam_epochs, nam_batch, nam_lr,
                                   nam_weight_decay, dropout, feature_dropout, shape_hidden,
                                   shape_layers, image_hidden, image_layers, interactions, n_pairs,
                                   n_steps, alpha, k)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ModelBundle, version, config, train_manifest_hash,
                                   test_manifest_hash, val_mse, ae, model)

void save_bundle(const ModelBundle& bundle, const std::string& path) {
    json j = bundle;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_bundle: cannot open " + path);
    out << j.dump();
    if (!out) throw std::runtime_error("save_bundle: write failed for " + path);
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_bundle: cannot open " + path);
    json j;
    in >> j;
    const std::string version = j.at("version").get<std::string>();
    if (version != kBundleVersion)
        throw std::runtime_error("load_bundle: format version '" + version + "' in " + path +
                                 " does not match supported '" + kBundleVersion + "'");
    return j.get<ModelBundle>();
}

// --- commands ----------------------------------------------------------------

void cmd_generate(const ExperimentConfig& cfg) {
    validate_config(cfg);
    SyntheticDataset train_ds = generate_split(cfg, true);
    SyntheticDataset test_ds = generate_split(cfg, false);
    save_dataset(train_ds, train_dir(cfg));
    save_dataset(test_ds, test_dir(cfg));
    std::printf("[generate] %s: %d train / %d test samples at %dx%d -> %s/data\n",
                spec_tag(train_ds).c_str(), train_ds.n(), test_ds.n(), cfg.image_size,
                cfg.image_size, cfg.out_dir.c_str());
}

void cmd_train(const ExperimentConfig& cfg) {
    validate_config(cfg);
    SyntheticDataset train_ds = load_dataset(train_dir(cfg));
    SyntheticDataset test_ds = load_dataset(test_dir(cfg));
    if (domain_tag(train_ds.domain) != cfg.domain)
        throw std::runtime_error("cmd_train: dataset domain '" +
                                 std::string(domain_tag(train_ds.domain)) +
                                 "' does not match config domain '" + cfg.domain + "'");

    ModelBundle bundle;
    bundle.config = cfg;
    bundle.train_manifest_hash = fnv64_file(train_dir(cfg) + "/manifest.csv");
    bundle.test_manifest_hash = fnv64_file(test_dir(cfg) + "/manifest.csv");

    // Loss logs are flushed even when training aborts, so a non-finite-loss
    // failure still leaves a usable partial record.
    std::vector<double> ae_log;
    try {
        bundle.ae = train_autoencoder(train_ds.images, make_ae_config(cfg), &ae_log);
    } catch (...) {
        write_loss_csv(ae_log, cfg.out_dir + "/ae_loss.csv");
        throw;
    }
    write_loss_csv(ae_log, cfg.out_dir + "/ae_loss.csv");

    std::vector<double> nam_log;
    try {
        bundle.model = train(train_ds, &bundle.ae, make_train_config(cfg), &nam_log);
    } catch (...) {
        write_loss_csv(nam_log, cfg.out_dir + "/nam_loss.csv");
        throw;
    }
    write_loss_csv(nam_log, cfg.out_dir + "/nam_loss.csv");

    Tensor test_codes = encode_images(bundle.ae, test_ds.images);
    std::vector<double> pred = predict_batch(bundle.model, test_ds.x, test_codes);
    bundle.val_mse = mse(pred, test_ds.y);
    save_bundle(bundle, bundle_path(cfg));
    std::printf("[train] ae loss %.6g -> %.6g | nam loss %.6g -> %.6g | val mse %.6g -> %s\n",
                ae_log.front(), ae_log.back(), nam_log.front(), nam_log.back(), bundle.val_mse,
                bundle_path(cfg).c_str());
}

void cmd_bench(const ExperimentConfig& cfg) {
    ModelBundle bundle = load_bundle(bundle_path(cfg));
    SyntheticDataset train_ds = load_dataset(train_dir(cfg));
    SyntheticDataset test_ds = load_dataset(test_dir(cfg));
    if (fnv64_file(train_dir(cfg) + "/manifest.csv") != bundle.train_manifest_hash ||
        fnv64_file(test_dir(cfg) + "/manifest.csv") != bundle.test_manifest_hash)
        throw std::runtime_error("cmd_bench: dataset manifests changed since the bundle was "
                                 "trained; regenerate or retrain");

    std::vector<BenchReport> reports;
    reports.push_back(ablation_run(train_ds, test_ds, bundle.ae,
                                   make_train_config(bundle.config)));
    reports.push_back(image_effect_benchmark(bundle.model, bundle.ae, test_ds, cfg.n_pairs,
                                             cfg.n_steps, derive_seed(cfg.seed, "bench")));
    reports.push_back(numeric_effect_benchmark(bundle.model, test_ds));
    write_bench_csv(reports, cfg.out_dir + "/bench.csv");
    for (const BenchReport& rep : reports) std::printf("%s", bench_summary(rep).c_str());
    std::printf("[bench] wrote %s/bench.csv\n", cfg.out_dir.c_str());
}

void cmd_interpolate(const ExperimentConfig& cfg, int index_a, int index_b) {
    ModelBundle bundle = load_bundle(bundle_path(cfg));
    SyntheticDataset test_ds = load_dataset(test_dir(cfg));
    if (index_a < 0 || index_a >= test_ds.n() || index_b < 0 || index_b >= test_ds.n())
        throw std::invalid_argument("cmd_interpolate: image index out of range [0, " +
                                    std::to_string(test_ds.n()) + ")");

    LatentCode za = encode(bundle.ae, test_ds.images[index_a]);
    LatentCode zb = encode(bundle.ae, test_ds.images[index_b]);
    LatentSequence seq = interpolate_latents(za, zb, cfg.k);
    EffectCurve curve = effect_curve(bundle.model, bundle.ae, seq);
    curve.reference = reference_effect(test_ds, index_a, index_b, cfg.k);

    write_effect_curve_csv(curve, cfg.out_dir + "/interpolate_curve.csv");
    write_sequence_strip(curve, cfg.out_dir + "/interpolate_strip.png");
    const bool constant_ref =
        std::all_of(curve.reference.begin(), curve.reference.end(),
                    [&](double v) { return v == curve.reference.front(); });
    if (constant_ref)
        std::printf("[interpolate] %d -> %d, k=%d (constant reference) -> %s\n", index_a, index_b,
                    cfg.k, cfg.out_dir.c_str());
    else
        std::printf("[interpolate] %d -> %d, k=%d, r2 vs reference %.6g -> %s\n", index_a,
                    index_b, cfg.k, r2(curve.prediction, curve.reference), cfg.out_dir.c_str());
}

void cmd_manipulate(const ExperimentConfig& cfg, int index, const std::string& label_csv) {
    ModelBundle bundle = load_bundle(bundle_path(cfg));
    SyntheticDataset test_ds = load_dataset(test_dir(cfg));
    if (index < 0 || index >= test_ds.n())
        throw std::invalid_argument("cmd_manipulate: image index out of range");

    std::vector<double> v = direction_from_labels(bundle.ae, test_ds, label_csv);
    LatentCode base = encode(bundle.ae, test_ds.images[index]);
    LatentSequence seq = manipulate_latents(base, v, cfg.alpha, cfg.k);
    EffectCurve curve = effect_curve(bundle.model, bundle.ae, seq);
    write_effect_curve_csv(curve, cfg.out_dir + "/manipulate_curve.csv");
    write_sequence_strip(curve, cfg.out_dir + "/manipulate_strip.png");
    std::printf("[manipulate] image %d, alpha=%g, k=%d -> %s\n", index, cfg.alpha, cfg.k,
                cfg.out_dir.c_str());
}

void cmd_global_shift(const ExperimentConfig& cfg, const std::string& label_csv) {
    ModelBundle bundle = load_bundle(bundle_path(cfg));
    SyntheticDataset test_ds = load_dataset(test_dir(cfg));
    std::vector<double> v = direction_from_labels(bundle.ae, test_ds, label_csv);
    GlobalShift gs = global_shift(bundle.model, bundle.ae, test_ds.images, test_ds.x, v,
                                  cfg.alpha);

    const std::string path = cfg.out_dir + "/shift.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cmd_global_shift: cannot open " + path);
    out << "id,base,shifted\n";
    for (size_t i = 0; i < gs.base.size(); ++i)
        out << i << ',' << format_g17(gs.base[i]) << ',' << format_g17(gs.shifted[i]) << '\n';
    if (!out) throw std::runtime_error("cmd_global_shift: write failed for " + path);
    std::printf("[global-shift] alpha=%g base mean %.6g -> shifted mean %.6g (%zu rows) -> %s\n",
                cfg.alpha, gs.base_mean, gs.shifted_mean, gs.base.size(), path.c_str());
}

}  // namespace naim
