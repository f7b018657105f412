// Experiment front end: dataset generation, training, benchmarking, and the
// latent-space interpretation commands. Every option can come from an INI
// config file (--config) with command-line flags taking precedence.
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "naim/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Neural additive image model experiment runner"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file (flags override file values)");

    naim::ExperimentConfig cfg;
    app.add_option("--domain", cfg.domain, "Image domain: squares | colors");
    app.add_option("--effect", cfg.effect, "Image effect: 2x | 2x^4 | sin2pix | none");
    app.add_option("--sigma", cfg.sigma, "Response noise standard deviation");
    app.add_option("--n-train", cfg.n_train, "Training split size");
    app.add_option("--n-test", cfg.n_test, "Test split size");
    app.add_option("--image-size", cfg.image_size, "Image side length (multiple of 4, >= 8)");
    app.add_option("--seed", cfg.seed, "Master seed; all randomness derives from it");
    app.add_option("--out-dir", cfg.out_dir, "Artifact directory");
    app.add_option("--latent-dim", cfg.latent_dim, "Autoencoder bottleneck width");
    app.add_option("--ae-c1", cfg.ae_c1, "First conv channel count");
    app.add_option("--ae-c2", cfg.ae_c2, "Second conv channel count");
    app.add_option("--ae-epochs", cfg.ae_epochs, "Autoencoder training epochs");
    app.add_option("--ae-batch", cfg.ae_batch, "Autoencoder batch size");
    app.add_option("--ae-lr", cfg.ae_lr, "Autoencoder Adam learning rate");
    app.add_option("--ae-weight-decay", cfg.ae_weight_decay, "Autoencoder weight decay");
    app.add_option("--nam-epochs", cfg.nam_epochs, "Additive-model training epochs");
    app.add_option("--nam-batch", cfg.nam_batch, "Additive-model batch size");
    app.add_option("--nam-lr", cfg.nam_lr, "Additive-model Adam learning rate");
    app.add_option("--nam-weight-decay", cfg.nam_weight_decay, "Additive-model weight decay");
    app.add_option("--dropout", cfg.dropout, "Unit dropout inside every net");
    app.add_option("--feature-dropout", cfg.feature_dropout, "Whole-term dropout probability");
    app.add_option("--shape-hidden", cfg.shape_hidden, "Shape-net hidden width");
    app.add_option("--shape-layers", cfg.shape_layers, "Shape-net hidden layer count");
    app.add_option("--image-hidden", cfg.image_hidden, "Image-head hidden width");
    app.add_option("--image-layers", cfg.image_layers, "Image-head hidden layer count");
    app.add_option("--interactions", cfg.interactions, "Pairwise terms, e.g. '0-1,1-2'");
    app.add_option("--n-pairs", cfg.n_pairs, "Benchmark image pairs");
    app.add_option("--n-steps", cfg.n_steps, "Benchmark interpolation steps");
    app.add_option("--alpha", cfg.alpha, "Manipulation strength");
    app.add_option("--k", cfg.k, "Sequence length for interpolation/manipulation");

    app.add_subcommand("generate", "Generate and persist the train/test datasets");
    app.add_subcommand("train", "Train autoencoder + additive model, write the bundle");
    app.add_subcommand("bench", "Run the ablation, image-effect, and numeric-effect protocols");

    int index_a = 0, index_b = 0, index = 0;
    std::string label_csv;
    CLI::App* interp = app.add_subcommand("interpolate", "Effect curve between two test images");
    interp->add_option("--a", index_a, "First test-image index")->required();
    interp->add_option("--b", index_b, "Second test-image index")->required();
    CLI::App* manip = app.add_subcommand("manipulate", "Effect curve along an attribute walk");
    manip->add_option("--image", index, "Base test-image index")->required();
    manip->add_option("--labels", label_csv, "CSV 'id,label' defining the attribute")->required();
    CLI::App* shift = app.add_subcommand("global-shift", "Distribution shift under manipulation");
    shift->add_option("--labels", label_csv, "CSV 'id,label' defining the attribute")->required();

    // Shared options may appear after the subcommand name; let them resolve
    // against the parent parser.
    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("generate")) {
            naim::cmd_generate(cfg);
        } else if (app.got_subcommand("train")) {
            naim::cmd_train(cfg);
        } else if (app.got_subcommand("bench")) {
            naim::cmd_bench(cfg);
        } else if (app.got_subcommand("interpolate")) {
            naim::cmd_interpolate(cfg, index_a, index_b);
        } else if (app.got_subcommand("manipulate")) {
            naim::cmd_manipulate(cfg, index, label_csv);
        } else if (app.got_subcommand("global-shift")) {
            naim::cmd_global_shift(cfg, label_csv);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
