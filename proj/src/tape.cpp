#include "naim/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace naim {

int Tape::check(NodeId id) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("Tape: unknown node id (no forward pass recorded?)");
    return id;
}

Tape::NodeId Tape::push(Tensor val, std::function<void(Tape&)> back) {
    Node n;
    n.grad = Tensor(val.shape, 0.0);
    n.val = std::move(val);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::NodeId Tape::leaf(Tensor value) { return push(std::move(value), nullptr); }

void Tape::backward(NodeId loss) {
    check(loss);
    if (nodes_[loss].val.size() != 1)
        throw std::invalid_argument("Tape::backward: loss must be a scalar, got " +
                                    nodes_[loss].val.shape_str());
    nodes_[loss].grad.v[0] = 1.0;
    for (int id = loss; id >= 0; --id) {
        if (nodes_[id].back) nodes_[id].back(*this);
    }
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    Tensor out({av.rows(), bv.cols()});
    matmul_nn(av, bv, out, false);
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, b, id](Tape& t) {
        const Tensor& g = t.grad(id);
        // dA += dC * B^T,  dB += A^T * dC
        matmul_nt(g, t.value(b), t.grad_mut(a), true);
        matmul_tn(t.value(a), g, t.grad_mut(b), true);
    };
    return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (!av.same_shape(bv))
        throw std::invalid_argument("Tape::add: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
    Tensor out = av;
    for (int64_t i = 0; i < out.size(); ++i) out.v[i] += bv.v[i];
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, b, id](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (int64_t i = 0; i < g.size(); ++i) {
            ga.v[i] += g.v[i];
            gb.v[i] += g.v[i];
        }
    };
    return id;
}

Tape::NodeId Tape::add_rowvec(NodeId a, NodeId bias) {
    const Tensor& av = value(a);
    const Tensor& bv = value(bias);
    if (av.ndim() != 2 || bv.size() != av.cols())
        throw std::invalid_argument("Tape::add_rowvec: shape mismatch " + av.shape_str() + " + " + bv.shape_str());
    Tensor out = av;
    const int n = av.cols();
    for (int i = 0; i < av.rows(); ++i)
        for (int j = 0; j < n; ++j) out.v[static_cast<size_t>(i) * n + j] += bv.v[j];
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, bias, id](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(bias);
        const int rows = g.rows(), n = g.cols();
        for (int64_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < n; ++j) gb.v[j] += g.v[static_cast<size_t>(i) * n + j];
    };
    return id;
}

Tape::NodeId Tape::add_scalar(NodeId a, NodeId s) {
    const Tensor& av = value(a);
    const Tensor& sv = value(s);
    if (sv.size() != 1) throw std::invalid_argument("Tape::add_scalar: second operand must be scalar");
    Tensor out = av;
    for (auto& e : out.v) e += sv.v[0];
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, s, id](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        Tensor& gs = t.grad_mut(s);
        double acc = 0.0;
        for (int64_t i = 0; i < g.size(); ++i) {
            ga.v[i] += g.v[i];
            acc += g.v[i];
        }
        gs.v[0] += acc;
    };
    return id;
}

Tape::NodeId Tape::relu(NodeId a) {
    Tensor out = value(a);
    for (auto& e : out.v) e = e > 0.0 ? e : 0.0;
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, id](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& x = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (int64_t i = 0; i < g.size(); ++i)
            if (x.v[i] > 0.0) ga.v[i] += g.v[i];
    };
    return id;
}

Tape::NodeId Tape::clamp01(NodeId a) {
    Tensor out = value(a);
    for (auto& e : out.v) e = e < 0.0 ? 0.0 : (e > 1.0 ? 1.0 : e);
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, id](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& x = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (int64_t i = 0; i < g.size(); ++i)
            if (x.v[i] >= 0.0 && x.v[i] <= 1.0) ga.v[i] += g.v[i];
    };
    return id;
}

Tape::NodeId Tape::mul_mask(NodeId a, Tensor mask) {
    const Tensor& av = value(a);
    if (!av.same_shape(mask))
        throw std::invalid_argument("Tape::mul_mask: shape mismatch");
    Tensor out = av;
    for (int64_t i = 0; i < out.size(); ++i) out.v[i] *= mask.v[i];
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, id, m = std::move(mask)](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        for (int64_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * m.v[i];
    };
    return id;
}

Tape::NodeId Tape::scale(NodeId a, double s) {
    Tensor out = value(a);
    for (auto& e : out.v) e *= s;
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, id, s](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        for (int64_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * s;
    };
    return id;
}

Tape::NodeId Tape::concat_cols(NodeId a, NodeId b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (av.ndim() != 2 || bv.ndim() != 2 || av.rows() != bv.rows())
        throw std::invalid_argument("Tape::concat_cols: row mismatch");
    const int rows = av.rows(), n1 = av.cols(), n2 = bv.cols();
    Tensor out({rows, n1 + n2});
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < n1; ++j) out.at(i, j) = av.at(i, j);
        for (int j = 0; j < n2; ++j) out.at(i, n1 + j) = bv.at(i, j);
    }
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, b, id, n1, n2](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (int i = 0; i < g.rows(); ++i) {
            for (int j = 0; j < n1; ++j) ga.at(i, j) += g.at(i, j);
            for (int j = 0; j < n2; ++j) gb.at(i, j) += g.at(i, n1 + j);
        }
    };
    return id;
}

Tape::NodeId Tape::reshape(NodeId a, std::vector<int> shape) {
    const Tensor& av = value(a);
    if (shape_product(shape) != av.size())
        throw std::invalid_argument("Tape::reshape: element count mismatch");
    Tensor out = Tensor::from(std::move(shape), av.v);
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [a, id](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        for (int64_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
    };
    return id;
}

Tape::NodeId Tape::mse_loss(NodeId pred, Tensor target) {
    const Tensor& pv = value(pred);
    if (!pv.same_shape(target))
        throw std::invalid_argument("Tape::mse_loss: shape mismatch " + pv.shape_str() + " vs " +
                                    target.shape_str());
    const double inv_n = 1.0 / static_cast<double>(pv.size());
    double acc = 0.0;
    for (int64_t i = 0; i < pv.size(); ++i) {
        const double d = pv.v[i] - target.v[i];
        acc += d * d;
    }
    NodeId id = push(Tensor::scalar(acc * inv_n), nullptr);
    nodes_[id].back = [pred, id, inv_n, tg = std::move(target)](Tape& t) {
        const double go = t.grad(id).v[0];
        const Tensor& pv2 = t.value(pred);
        Tensor& gp = t.grad_mut(pred);
        const double c = 2.0 * inv_n * go;
        for (int64_t i = 0; i < pv2.size(); ++i) gp.v[i] += c * (pv2.v[i] - tg.v[i]);
    };
    return id;
}

Tape::NodeId Tape::conv2d(NodeId x, NodeId w, NodeId b, const ConvGeom& g) {
    const Tensor& xv = value(x);
    const Tensor& wv = value(w);
    const Tensor& bv = value(b);
    const int patch = g.c_in * g.kh * g.kw;
    if (xv.ndim() != 2 || xv.cols() != g.c_in * g.h * g.w)
        throw std::invalid_argument("conv2d: input shape " + xv.shape_str() + " does not match geometry");
    if (wv.ndim() != 2 || wv.cols() != patch)
        throw std::invalid_argument("conv2d: weight shape " + wv.shape_str() + " does not match geometry");
    const int c_out = wv.rows();
    if (bv.size() != c_out) throw std::invalid_argument("conv2d: bias size mismatch");
    const int batch = xv.rows();
    const int spatial = g.oh() * g.ow();

    Tensor out({batch, c_out * spatial});
    Tensor cols({patch, spatial});
    Tensor ymat({c_out, spatial});
    for (int i = 0; i < batch; ++i) {
        im2col(xv.v.data() + static_cast<size_t>(i) * xv.cols(), g, cols.v.data());
        matmul_nn(wv, cols, ymat, false);
        double* orow = out.v.data() + static_cast<size_t>(i) * out.cols();
        for (int c = 0; c < c_out; ++c) {
            const double bias = bv.v[c];
            for (int s = 0; s < spatial; ++s) orow[static_cast<size_t>(c) * spatial + s] = ymat.at(c, s) + bias;
        }
    }
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [x, w, b, id, g, patch, spatial, c_out](Tape& t) {
        const Tensor& xv2 = t.value(x);
        const Tensor& wv2 = t.value(w);
        const Tensor& gout = t.grad(id);
        Tensor& gx = t.grad_mut(x);
        Tensor& gw = t.grad_mut(w);
        Tensor& gb2 = t.grad_mut(b);
        const int batch = xv2.rows();
        Tensor cols({patch, spatial});
        Tensor dcols({patch, spatial});
        Tensor dy({c_out, spatial});
        for (int i = 0; i < batch; ++i) {
            const double* grow = gout.v.data() + static_cast<size_t>(i) * gout.cols();
            std::copy(grow, grow + static_cast<size_t>(c_out) * spatial, dy.v.begin());
            im2col(xv2.v.data() + static_cast<size_t>(i) * xv2.cols(), g, cols.v.data());
            matmul_nt(dy, cols, gw, true);
            matmul_tn(wv2, dy, dcols, false);
            col2im(dcols.v.data(), g, gx.v.data() + static_cast<size_t>(i) * gx.cols());
            for (int c = 0; c < c_out; ++c) {
                double acc = 0.0;
                for (int s = 0; s < spatial; ++s) acc += dy.at(c, s);
                gb2.v[c] += acc;
            }
        }
    };
    return id;
}

Tape::NodeId Tape::conv_transpose2d(NodeId x, NodeId w, NodeId b, int c_out, const ConvGeom& og) {
    // og describes the *output* as a conv input: og.c_in == c_out, og.h/w are
    // the output spatial dims, and og.oh()/ow() must equal the input dims.
    const Tensor& xv = value(x);
    const Tensor& wv = value(w);
    const Tensor& bv = value(b);
    if (og.c_in != c_out) throw std::invalid_argument("conv_transpose2d: geometry channel mismatch");
    const int patch = c_out * og.kh * og.kw;
    const int in_spatial = og.oh() * og.ow();
    const int c_in = wv.rows();
    if (wv.ndim() != 2 || wv.cols() != patch)
        throw std::invalid_argument("conv_transpose2d: weight shape mismatch");
    if (xv.ndim() != 2 || xv.cols() != c_in * in_spatial)
        throw std::invalid_argument("conv_transpose2d: input shape " + xv.shape_str() +
                                    " does not match geometry");
    if (bv.size() != c_out) throw std::invalid_argument("conv_transpose2d: bias size mismatch");
    const int batch = xv.rows();
    const int out_spatial = og.h * og.w;

    Tensor out({batch, c_out * out_spatial});
    Tensor xmat({c_in, in_spatial});
    Tensor cols({patch, in_spatial});
    for (int i = 0; i < batch; ++i) {
        const double* xrow = xv.v.data() + static_cast<size_t>(i) * xv.cols();
        std::copy(xrow, xrow + xmat.size(), xmat.v.begin());
        matmul_tn(wv, xmat, cols, false);
        double* orow = out.v.data() + static_cast<size_t>(i) * out.cols();
        col2im(cols.v.data(), og, orow);
        for (int c = 0; c < c_out; ++c) {
            const double bias = bv.v[c];
            for (int s = 0; s < out_spatial; ++s) orow[static_cast<size_t>(c) * out_spatial + s] += bias;
        }
    }
    NodeId id = push(std::move(out), nullptr);
    nodes_[id].back = [x, w, b, id, og, patch, in_spatial, out_spatial, c_out, c_in](Tape& t) {
        const Tensor& xv2 = t.value(x);
        const Tensor& wv2 = t.value(w);
        const Tensor& gout = t.grad(id);
        Tensor& gx = t.grad_mut(x);
        Tensor& gw = t.grad_mut(w);
        Tensor& gb2 = t.grad_mut(b);
        const int batch = xv2.rows();
        Tensor dcols({patch, in_spatial});
        Tensor xmat({c_in, in_spatial});
        Tensor dxmat({c_in, in_spatial});
        for (int i = 0; i < batch; ++i) {
            const double* grow = gout.v.data() + static_cast<size_t>(i) * gout.cols();
            im2col(grow, og, dcols.v.data());
            // dX = W * im2col(dY)
            matmul_nn(wv2, dcols, dxmat, false);
            double* gxrow = gx.v.data() + static_cast<size_t>(i) * gx.cols();
            for (int64_t e = 0; e < dxmat.size(); ++e) gxrow[e] += dxmat.v[e];
            // dW += X * im2col(dY)^T
            const double* xrow = xv2.v.data() + static_cast<size_t>(i) * xv2.cols();
            std::copy(xrow, xrow + xmat.size(), xmat.v.begin());
            matmul_nt(xmat, dcols, gw, true);
            for (int c = 0; c < c_out; ++c) {
                double acc = 0.0;
                const double* gch = grow + static_cast<size_t>(c) * out_spatial;
                for (int s = 0; s < out_spatial; ++s) acc += gch[s];
                gb2.v[c] += acc;
            }
        }
    };
    return id;
}

}  // namespace naim
