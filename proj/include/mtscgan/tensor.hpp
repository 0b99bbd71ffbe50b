#pragma once

// Dense double-precision tensors with reverse-mode automatic differentiation.
//
// Every op's backward rule is itself expressed through these ops, so when
// backward() is run with create_graph=true the returned gradients are graph
// tensors and expressions built from them (e.g. a gradient-norm penalty)
// can be differentiated again.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mtscgan {

using Shape = std::vector<std::size_t>;

class TensorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

class Tensor;

struct GradNode {
    // Per-input gradients for an upstream gradient; an undefined Tensor
    // marks an input that needs no gradient (e.g. integer-like metadata).
    std::function<std::vector<Tensor>(const Tensor& grad)> vjp;
    std::vector<Tensor> inputs;
    const char* op_name = "?";
};

struct TensorImpl {
    Shape shape;
    std::vector<double> values;
    bool requires_grad = false;
    std::shared_ptr<GradNode> node;
    std::uint64_t id;

    TensorImpl(Shape s, std::vector<double> v);
};

class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> values);

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::size_t numel() const { return impl_->values.size(); }
    std::size_t dim(std::size_t i) const { return impl_->shape[i]; }
    std::size_t rank() const { return impl_->shape.size(); }

    std::span<const double> data() const { return impl_->values; }
    std::span<double> mutable_data() { return impl_->values; }
    double item() const;

    bool requires_grad() const { return impl_->requires_grad; }
    Tensor& set_requires_grad(bool v);
    bool in_graph() const { return impl_->node != nullptr; }
    std::uint64_t id() const { return impl_->id; }

    // Value copy cut loose from any graph.
    Tensor detach() const;

    TensorImpl* impl() const { return impl_.get(); }

private:
    std::shared_ptr<TensorImpl> impl_;
};

// Thread-local recording switch.
bool grad_enabled();
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// ---- primitive ops ----

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

Tensor matmul(const Tensor& a, const Tensor& b);            // [m,k]x[k,n]
Tensor bmm(const Tensor& a, const Tensor& b);               // [B,m,k]x[B,k,n]
Tensor transpose(const Tensor& a);                          // [m,n]->[n,m]
Tensor transpose_last2(const Tensor& a);                    // [B,m,n]->[B,n,m]
Tensor reshape(const Tensor& a, Shape shape);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t start,
             std::size_t len);

Tensor sum_all(const Tensor& a);                            // -> [1]
Tensor tile_all(const Tensor& s, Shape shape);              // [1] -> shape
Tensor row_sum_bcast(const Tensor& a);   // fill each last-axis row with its sum
Tensor row_mean_bcast(const Tensor& a);  // ... with its mean
Tensor sum_last(const Tensor& a);        // [...,n] -> [...]
Tensor tile_last(const Tensor& a, std::size_t n);
Tensor sum_leading(const Tensor& a);     // [...,n] -> [n]
Tensor tile_leading(const Tensor& v, Shape lead);
Tensor tile_axis0(const Tensor& a, std::size_t b);  // [..] -> [b,..]
Tensor sum_axis0(const Tensor& a);
Tensor sum_axis2(const Tensor& a);       // [B,C,T] -> [B,C]
Tensor tile_axis2(const Tensor& a, std::size_t t);
Tensor bn_mean_bcast(const Tensor& a);   // per-channel mean over axes {0,2}

Tensor log(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor gelu(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor softmax_last(const Tensor& a);

// 1-D unfold with zero padding: [B,C,T] -> [B, C*k, T+pl+pr-k+1],
// column t holding the window [t-pl, t-pl+k) of every channel.
Tensor unfold1d(const Tensor& a, std::size_t k, std::size_t pad_l,
                std::size_t pad_r);
// [B,C,T] -> [B, T/p, C*p], patch j = channel-major flatten of columns
// [j*p, (j+1)*p).
Tensor extract_patches(const Tensor& a, std::size_t p);

// ---- composed helpers ----

Tensor mean_all(const Tensor& a);
Tensor mean_axis2(const Tensor& a);
// (x - mean) / sqrt(var + eps) along the last axis, no affine
Tensor layernorm_last(const Tensor& a, double eps = 1e-5);
Tensor softplus(const Tensor& a);
Tensor l2norm(const Tensor& a);          // scalar
Tensor l2norm_rows(const Tensor& a);     // [B,n] -> [B], sqrt(sumsq + 1e-12)

// ---- backward ----

using GradMap = std::unordered_map<std::uint64_t, Tensor>;

// Gradients of a scalar loss with respect to every requires_grad leaf it
// depends on, keyed by leaf tensor id. With create_graph the returned
// gradients are themselves differentiable.
GradMap backward(const Tensor& loss, bool create_graph = false);
// Gradient for `leaf` out of a backward() result; zeros-like when absent.
Tensor grad_of(const GradMap& grads, const Tensor& leaf);

// Max over coordinates of |analytic - central difference| / max(1, |analytic|)
// for a scalar-valued f.
double grad_check(const std::function<Tensor(const Tensor&)>& f,
                  const Tensor& x, double eps = 1e-5);

}  // namespace mtscgan
