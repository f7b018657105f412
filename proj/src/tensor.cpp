#include "naim/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace naim {

int64_t shape_product(const std::vector<int>& s) {
    int64_t p = 1;
    for (int d : s) p *= d;
    return p;
}

Tensor::Tensor(std::vector<int> s, double fill) : shape(std::move(s)) {
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
    }
    v.assign(static_cast<size_t>(shape_product(shape)), fill);
}

Tensor Tensor::scalar(double x) {
    Tensor t({1});
    t.v[0] = x;
    return t;
}

Tensor Tensor::from(std::vector<int> s, std::vector<double> vals) {
    if (shape_product(s) != static_cast<int64_t>(vals.size()))
        throw std::invalid_argument("Tensor::from: shape does not match value count");
    Tensor t;
    t.shape = std::move(s);
    t.v = std::move(vals);
    return t;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << "]";
    return os.str();
}

void Tensor::fill(double x) {
    for (auto& e : v) e = x;
}

void Tensor::check_finite(const char* what) const {
    for (double e : v) {
        if (!std::isfinite(e))
            throw std::runtime_error(std::string("non-finite value in ") + what);
    }
}

namespace {
void check_mm(int ar, int ac, int br, int bc, const Tensor& c, int m, int n, const char* op) {
    (void)ar;
    (void)ac;
    (void)br;
    (void)bc;
    if (c.ndim() != 2 || c.rows() != m || c.cols() != n)
        throw std::invalid_argument(std::string(op) + ": bad output shape " + c.shape_str());
}
}  // namespace

void matmul_nn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.cols() != b.rows())
        throw std::invalid_argument("matmul_nn: shape mismatch " + a.shape_str() + " * " + b.shape_str());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    check_mm(m, k, k, n, c, m, n, "matmul_nn");
    if (!accumulate) c.fill(0.0);
    const double* ap = a.v.data();
    const double* bp = b.v.data();
    double* cp = c.v.data();
    for (int i = 0; i < m; ++i) {
        const double* arow = ap + static_cast<size_t>(i) * k;
        double* crow = cp + static_cast<size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = bp + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void matmul_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.cols() != b.cols())
        throw std::invalid_argument("matmul_nt: shape mismatch " + a.shape_str() + " * " + b.shape_str() + "^T");
    const int m = a.rows(), k = a.cols(), n = b.rows();
    check_mm(m, k, n, k, c, m, n, "matmul_nt");
    if (!accumulate) c.fill(0.0);
    const double* ap = a.v.data();
    const double* bp = b.v.data();
    double* cp = c.v.data();
    for (int i = 0; i < m; ++i) {
        const double* arow = ap + static_cast<size_t>(i) * k;
        double* crow = cp + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* brow = bp + static_cast<size_t>(j) * k;
            // Four fixed-order accumulators so the dot product pipelines
            // without changing the summation order between runs.
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            int p = 0;
            for (; p + 4 <= k; p += 4) {
                s0 += arow[p] * brow[p];
                s1 += arow[p + 1] * brow[p + 1];
                s2 += arow[p + 2] * brow[p + 2];
                s3 += arow[p + 3] * brow[p + 3];
            }
            double s = (s0 + s1) + (s2 + s3);
            for (; p < k; ++p) s += arow[p] * brow[p];
            crow[j] += s;
        }
    }
}

void matmul_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.rows() != b.rows())
        throw std::invalid_argument("matmul_tn: shape mismatch " + a.shape_str() + "^T * " + b.shape_str());
    const int k = a.rows(), m = a.cols(), n = b.cols();
    check_mm(k, m, k, n, c, m, n, "matmul_tn");
    if (!accumulate) c.fill(0.0);
    const double* ap = a.v.data();
    const double* bp = b.v.data();
    double* cp = c.v.data();
    for (int p = 0; p < k; ++p) {
        const double* arow = ap + static_cast<size_t>(p) * m;
        const double* brow = bp + static_cast<size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* crow = cp + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

Tensor transpose2d(const Tensor& a) {
    if (a.ndim() != 2) throw std::invalid_argument("transpose2d: need a matrix");
    Tensor t({a.cols(), a.rows()});
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
    return t;
}

void im2col(const double* x, const ConvGeom& g, double* cols) {
    const int oh = g.oh(), ow = g.ow();
    const int plane = g.h * g.w;
    size_t idx = 0;
    for (int c = 0; c < g.c_in; ++c) {
        const double* xc = x + static_cast<size_t>(c) * plane;
        for (int ki = 0; ki < g.kh; ++ki) {
            for (int kj = 0; kj < g.kw; ++kj) {
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * g.stride - g.pad + ki;
                    if (iy < 0 || iy >= g.h) {
                        for (int ox = 0; ox < ow; ++ox) cols[idx++] = 0.0;
                        continue;
                    }
                    const double* xrow = xc + static_cast<size_t>(iy) * g.w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * g.stride - g.pad + kj;
                        cols[idx++] = (ix >= 0 && ix < g.w) ? xrow[ix] : 0.0;
                    }
                }
            }
        }
    }
}

void col2im(const double* cols, const ConvGeom& g, double* x) {
    const int oh = g.oh(), ow = g.ow();
    const int plane = g.h * g.w;
    size_t idx = 0;
    for (int c = 0; c < g.c_in; ++c) {
        double* xc = x + static_cast<size_t>(c) * plane;
        for (int ki = 0; ki < g.kh; ++ki) {
            for (int kj = 0; kj < g.kw; ++kj) {
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * g.stride - g.pad + ki;
                    if (iy < 0 || iy >= g.h) {
                        idx += static_cast<size_t>(ow);
                        continue;
                    }
                    double* xrow = xc + static_cast<size_t>(iy) * g.w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * g.stride - g.pad + kj;
                        if (ix >= 0 && ix < g.w) xrow[ix] += cols[idx];
                        ++idx;
                    }
                }
            }
        }
    }
}

}  // namespace naim
