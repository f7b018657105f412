#pragma once

#include <functional>
#include <vector>

#include "naim/tensor.hpp"

namespace naim {

// Reverse-mode tape over whole-batch tensors. A fresh Tape is built per
// training step; nodes are stored in construction order, which is already
// topological, so backward() is a single reverse sweep.
//
// Node ids index into the tape. Backward closures capture ids (never
// references) because the node vector may reallocate while recording.
class Tape {
public:
    using NodeId = int;

    // Leaf with externally owned meaning (parameter or constant input).
    NodeId leaf(Tensor value);

    const Tensor& value(NodeId id) const { return nodes_[check(id)].val; }
    const Tensor& grad(NodeId id) const { return nodes_[check(id)].grad; }

    // Accumulates d(loss)/d(node) into every node's grad. `loss` must be a
    // scalar produced by a recorded forward pass.
    void backward(NodeId loss);

    // --- recorded operations ---------------------------------------------
    NodeId matmul(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);                 // same shape
    NodeId add_rowvec(NodeId a, NodeId bias);       // [B x n] + [n]
    NodeId add_scalar(NodeId a, NodeId s);          // any shape + scalar, broadcast
    NodeId relu(NodeId a);
    NodeId clamp01(NodeId a);
    NodeId mul_mask(NodeId a, Tensor mask);         // elementwise, mask is constant
    NodeId scale(NodeId a, double s);
    NodeId concat_cols(NodeId a, NodeId b);         // [B x n1],[B x n2] -> [B x (n1+n2)]
    NodeId reshape(NodeId a, std::vector<int> shape);
    NodeId mse_loss(NodeId pred, Tensor target);    // mean of squared residuals
    // x [B, Cin*H*W] viewed channel-major; w [Cout, Cin*kh*kw]; b [Cout].
    NodeId conv2d(NodeId x, NodeId w, NodeId b, const ConvGeom& g);
    // Transposed conv: x [B, Cin*H*W]; w [Cin, Cout*kh*kw]; b [Cout].
    // Output spatial size is (H-1)*stride - 2*pad + kh.
    NodeId conv_transpose2d(NodeId x, NodeId w, NodeId b, int c_out, const ConvGeom& out_geom);

    int node_count() const { return static_cast<int>(nodes_.size()); }

    // Mutable gradient access, used by the backward closures.
    Tensor& grad_mut(NodeId id) { return nodes_[check(id)].grad; }

private:
    struct Node {
        Tensor val;
        Tensor grad;
        std::function<void(Tape&)> back;  // null for leaves/constants
    };

    NodeId push(Tensor val, std::function<void(Tape&)> back);
    int check(NodeId id) const;

    std::vector<Node> nodes_;
};

}  // namespace naim
