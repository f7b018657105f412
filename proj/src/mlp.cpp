#include "naim/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace naim {

namespace {

// Input width of layer l given the skip-connection wiring.
int layer_in(const MlpConfig& c, int l) {
    if (l == 0) return c.in_dim;
    return c.hidden + (c.skip ? c.in_dim : 0);
}

int layer_out(const MlpConfig& c, int l) { return l == c.n_hidden ? c.out_dim : c.hidden; }

}  // namespace

Mlp make_mlp(const MlpConfig& cfg, Rng& rng) {
    if (cfg.in_dim < 1 || cfg.out_dim < 1 || cfg.n_hidden < 0 ||
        (cfg.n_hidden > 0 && cfg.hidden < 1))
        throw std::invalid_argument("make_mlp: bad dimensions");
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
        throw std::invalid_argument("make_mlp: dropout must be in [0,1)");
    Mlp net;
    net.cfg = cfg;
    for (int l = 0; l <= cfg.n_hidden; ++l) {
        const int fin = layer_in(cfg, l), fout = layer_out(cfg, l);
        const double bound = 1.0 / std::sqrt(static_cast<double>(fin));
        Tensor W({fin, fout});
        for (auto& e : W.v) e = rng.uniform(-bound, bound);
        Tensor b({fout});
        for (auto& e : b.v) e = rng.uniform(-bound, bound);
        net.W.push_back(std::move(W));
        net.b.push_back(std::move(b));
    }
    return net;
}

Tensor mlp_forward(const Mlp& net, const Tensor& input) {
    const MlpConfig& c = net.cfg;
    if (input.ndim() != 2 || input.cols() != c.in_dim)
        throw std::invalid_argument("mlp_forward: input " + input.shape_str() + " expected [batch x " +
                                    std::to_string(c.in_dim) + "]");
    const int batch = input.rows();
    Tensor h = input;
    for (int l = 0; l <= c.n_hidden; ++l) {
        Tensor in = (l == 0 || !c.skip) ? h : [&] {
            Tensor cat({batch, h.cols() + c.in_dim});
            for (int i = 0; i < batch; ++i) {
                for (int j = 0; j < h.cols(); ++j) cat.at(i, j) = h.at(i, j);
                for (int j = 0; j < c.in_dim; ++j) cat.at(i, h.cols() + j) = input.at(i, j);
            }
            return cat;
        }();
        Tensor out({batch, net.W[l].cols()});
        matmul_nn(in, net.W[l], out, false);
        for (int i = 0; i < batch; ++i)
            for (int j = 0; j < out.cols(); ++j) out.at(i, j) += net.b[l].v[j];
        if (l < c.n_hidden)
            for (auto& e : out.v) e = e > 0.0 ? e : 0.0;
        h = std::move(out);
    }
    return h;
}

MlpTapeIds mlp_leaf_params(Tape& tape, const Mlp& net) {
    MlpTapeIds ids;
    for (size_t l = 0; l < net.W.size(); ++l) {
        ids.W.push_back(tape.leaf(net.W[l]));
        ids.b.push_back(tape.leaf(net.b[l]));
    }
    return ids;
}

Tape::NodeId mlp_tape_forward(Tape& tape, const Mlp& net, const MlpTapeIds& ids,
                              Tape::NodeId input, bool train, Rng* rng) {
    const MlpConfig& c = net.cfg;
    if (ids.W.size() != net.W.size())
        throw std::invalid_argument("mlp_tape_forward: stale parameter ids");
    const bool drop = train && c.dropout > 0.0;
    if (drop && !rng) throw std::invalid_argument("mlp_tape_forward: dropout requires an rng");
    Tape::NodeId h = input;
    for (int l = 0; l <= c.n_hidden; ++l) {
        Tape::NodeId in = (l == 0 || !c.skip) ? h : tape.concat_cols(h, input);
        h = tape.add_rowvec(tape.matmul(in, ids.W[l]), ids.b[l]);
        if (l < c.n_hidden) {
            h = tape.relu(h);
            if (drop) {
                const Tensor& hv = tape.value(h);
                Tensor mask(hv.shape);
                const double keep = 1.0 - c.dropout;
                for (auto& e : mask.v) e = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
                h = tape.mul_mask(h, std::move(mask));
            }
        }
    }
    return h;
}

std::vector<Tensor*> mlp_params(Mlp& net) {
    std::vector<Tensor*> out;
    for (size_t l = 0; l < net.W.size(); ++l) {
        out.push_back(&net.W[l]);
        out.push_back(&net.b[l]);
    }
    return out;
}

std::vector<const Tensor*> mlp_params(const Mlp& net) {
    std::vector<const Tensor*> out;
    for (size_t l = 0; l < net.W.size(); ++l) {
        out.push_back(&net.W[l]);
        out.push_back(&net.b[l]);
    }
    return out;
}

}  // namespace naim
