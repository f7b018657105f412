#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace naim {

// Dense n-dimensional array of doubles, row-major. The carrier for
// parameters, activations and gradients. 64-bit floats throughout: the
// benchmark tolerances leave no room for float32 rounding noise.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s, double fill = 0.0);
    static Tensor scalar(double x);
    static Tensor from(std::vector<int> s, std::vector<double> vals);

    int64_t size() const { return static_cast<int64_t>(v.size()); }
    int ndim() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }

    // 2-d accessors; only valid for matrices.
    int rows() const { return shape[0]; }
    int cols() const { return shape[1]; }
    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols() + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols() + c]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;

    void fill(double x);
    // Throws if any entry is NaN/Inf. `what` names the tensor in the message.
    void check_finite(const char* what) const;
};

int64_t shape_product(const std::vector<int>& s);

// --- dense kernels -------------------------------------------------------
//
// All matmuls use an i-k-j loop so the inner loop vectorizes without
// reassociation; every output element is accumulated in a fixed order,
// which keeps results bit-identical run to run.

// C (+)= A[m x k] * B[k x n]
void matmul_nn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate);
// C (+)= A[m x k] * B[n x k]^T
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate);
// C (+)= A[k x m]^T * B[k x n]
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate);

Tensor transpose2d(const Tensor& a);

// --- conv lowering --------------------------------------------------------
//
// Patch extraction for one sample in channel-major [C,H,W] layout.
// cols is [C*kh*kw, oh*ow]; out-of-bounds taps read as zero.
struct ConvGeom {
    int c_in, h, w;       // input
    int kh, kw;           // kernel
    int stride, pad;
    int oh() const { return (h + 2 * pad - kh) / stride + 1; }
    int ow() const { return (w + 2 * pad - kw) / stride + 1; }
};

void im2col(const double* x, const ConvGeom& g, double* cols);
// Adjoint of im2col: scatter-adds cols back into x (x must be pre-zeroed
// or hold a running gradient).
void col2im(const double* cols, const ConvGeom& g, double* x);

}  // namespace naim
