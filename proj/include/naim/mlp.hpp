#pragma once

#include <vector>

#include "naim/rng.hpp"
#include "naim/tape.hpp"
#include "naim/tensor.hpp"

namespace naim {

// Fully connected net with optional skip connections: the module input is
// concatenated onto the input of every hidden layer after the first, and onto
// the output layer's input. n_hidden == 0 degenerates to a single affine map.
struct MlpConfig {
    int in_dim = 1;
    int out_dim = 1;
    int hidden = 100;
    int n_hidden = 4;
    bool skip = true;
    double dropout = 0.0;  // applied after each hidden ReLU, train mode only
};

struct Mlp {
    MlpConfig cfg;
    std::vector<Tensor> W;  // W[l]: [fan_in_l x fan_out_l]
    std::vector<Tensor> b;  // b[l]: [fan_out_l]
};

// Tape leaf ids for one net's parameters, aligned with Mlp::W / Mlp::b.
struct MlpTapeIds {
    std::vector<Tape::NodeId> W;
    std::vector<Tape::NodeId> b;
};

// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
Mlp make_mlp(const MlpConfig& cfg, Rng& rng);

// Plain evaluation (no tape, no dropout). input: [batch x in_dim].
Tensor mlp_forward(const Mlp& net, const Tensor& input);

// Registers every parameter as a tape leaf.
MlpTapeIds mlp_leaf_params(Tape& tape, const Mlp& net);

// Records the forward pass on the tape. In train mode with cfg.dropout > 0 an
// inverted-dropout mask is drawn from rng after each hidden activation.
Tape::NodeId mlp_tape_forward(Tape& tape, const Mlp& net, const MlpTapeIds& ids,
                              Tape::NodeId input, bool train = false, Rng* rng = nullptr);

// Pointers to all parameter tensors in a fixed order (W0, b0, W1, b1, ...).
std::vector<Tensor*> mlp_params(Mlp& net);
std::vector<const Tensor*> mlp_params(const Mlp& net);

}  // namespace naim
