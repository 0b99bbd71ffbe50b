#include "mtscgan/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "mtscgan/kernels.hpp"

namespace mtscgan {

namespace {

std::atomic<std::uint64_t> g_next_id{1};
thread_local bool g_grad_enabled = true;

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

const kernels::Backend& K() { return kernels::active(); }

}  // namespace

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

TensorImpl::TensorImpl(Shape s, std::vector<double> v)
    : shape(std::move(s)), values(std::move(v)),
      id(g_next_id.fetch_add(1, std::memory_order_relaxed)) {}

Tensor::Tensor(Shape shape, std::vector<double> values) {
    if (shape_numel(shape) != values.size())
        throw TensorError("tensor: shape " + shape_str(shape) + " needs " +
                          std::to_string(shape_numel(shape)) + " values, got " +
                          std::to_string(values.size()));
    for (auto d : shape)
        if (d == 0) throw TensorError("tensor: zero dimension in " + shape_str(shape));
    impl_ = std::make_shared<TensorImpl>(std::move(shape), std::move(values));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
    std::vector<double> v(shape_numel(shape), value);
    return Tensor(std::move(shape), std::move(v));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

double Tensor::item() const {
    if (numel() != 1)
        throw TensorError("item: tensor has " + std::to_string(numel()) +
                          " elements");
    return impl_->values[0];
}

Tensor& Tensor::set_requires_grad(bool v) {
    impl_->requires_grad = v;
    return *this;
}

Tensor Tensor::detach() const {
    return Tensor(impl_->shape, impl_->values);
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

namespace {

using VjpFn = std::function<std::vector<Tensor>(const Tensor&)>;

bool needs_graph(const std::vector<Tensor>& inputs) {
    if (!g_grad_enabled) return false;
    for (const auto& t : inputs)
        if (t.requires_grad() || t.in_graph()) return true;
    return false;
}

Tensor make_op(const char* name, Shape shape, std::vector<double> values,
               std::vector<Tensor> inputs, VjpFn vjp) {
    Tensor out(std::move(shape), std::move(values));
    if (needs_graph(inputs)) {
        auto node = std::make_shared<GradNode>();
        node->vjp = std::move(vjp);
        node->inputs = std::move(inputs);
        node->op_name = name;
        out.impl()->node = std::move(node);
        out.set_requires_grad(true);
    }
    return out;
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw TensorError(std::string(op) + ": shape mismatch " +
                          shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

void check_rank(const char* op, const Tensor& a, std::size_t r) {
    if (a.rank() != r)
        throw TensorError(std::string(op) + ": expected rank " +
                          std::to_string(r) + ", got " + shape_str(a.shape()));
}

Tensor unary_vals(const char* name, const Tensor& a,
                  const std::function<double(double)>& f, VjpFn vjp,
                  std::vector<Tensor> inputs) {
    std::vector<double> v(a.numel());
    auto in = a.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(in[i]);
    return make_op(name, a.shape(), std::move(v), std::move(inputs),
                   std::move(vjp));
}

double sigmoid_val(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double Phi(double x) { return 0.5 * (1.0 + std::erf(x * kInvSqrt2)); }

Tensor gelu_dxx(const Tensor& a);

// d/dx gelu(x) = Phi(x) + x*phi(x)
Tensor gelu_dx(const Tensor& a) {
    return unary_vals(
        "gelu_dx", a, [](double x) { return Phi(x) + x * phi(x); },
        [a](const Tensor& g) -> std::vector<Tensor> {
            return {mul(g, gelu_dxx(a))};
        },
        {a});
}

Tensor gelu_dxx(const Tensor& a) {
    return unary_vals(
        "gelu_dxx", a, [](double x) { return phi(x) * (2.0 - x * x); },
        [](const Tensor&) -> std::vector<Tensor> {
            throw TensorError(
                "gelu: differentiation beyond second order is not supported");
        },
        {a});
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape("add", a, b);
    std::vector<double> v(a.numel());
    K().add(a.data().data(), b.data().data(), v.data(), v.size());
    return make_op("add", a.shape(), std::move(v), {a, b},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {g, g};
                   });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape("sub", a, b);
    std::vector<double> v(a.numel());
    K().sub(a.data().data(), b.data().data(), v.data(), v.size());
    return make_op("sub", a.shape(), std::move(v), {a, b},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {g, neg(g)};
                   });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape("mul", a, b);
    std::vector<double> v(a.numel());
    K().mul(a.data().data(), b.data().data(), v.data(), v.size());
    return make_op("mul", a.shape(), std::move(v), {a, b},
                   [a, b](const Tensor& g) -> std::vector<Tensor> {
                       return {mul(g, b), mul(g, a)};
                   });
}

Tensor div(const Tensor& a, const Tensor& b) {
    check_same_shape("div", a, b);
    std::vector<double> v(a.numel());
    K().div(a.data().data(), b.data().data(), v.data(), v.size());
    return make_op("div", a.shape(), std::move(v), {a, b},
                   [a, b](const Tensor& g) -> std::vector<Tensor> {
                       return {div(g, b), neg(div(mul(g, a), mul(b, b)))};
                   });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor scale(const Tensor& a, double s) {
    std::vector<double> v(a.numel());
    K().scale(a.data().data(), s, v.data(), v.size());
    return make_op("scale", a.shape(), std::move(v), {a},
                   [s](const Tensor& g) -> std::vector<Tensor> {
                       return {scale(g, s)};
                   });
}

Tensor add_scalar(const Tensor& a, double s) {
    std::vector<double> v(a.numel());
    auto in = a.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = in[i] + s;
    return make_op("add_scalar", a.shape(), std::move(v), {a},
                   [](const Tensor& g) -> std::vector<Tensor> { return {g}; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_rank("matmul", a, 2);
    check_rank("matmul", b, 2);
    if (a.dim(1) != b.dim(0))
        throw TensorError("matmul: shape mismatch " + shape_str(a.shape()) +
                          " vs " + shape_str(b.shape()));
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> v(m * n, 0.0);
    K().matmul_acc(a.data().data(), b.data().data(), v.data(), m, k, n);
    return make_op("matmul", {m, n}, std::move(v), {a, b},
                   [a, b](const Tensor& g) -> std::vector<Tensor> {
                       return {matmul(g, transpose(b)), matmul(transpose(a), g)};
                   });
}

Tensor bmm(const Tensor& a, const Tensor& b) {
    check_rank("bmm", a, 3);
    check_rank("bmm", b, 3);
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1))
        throw TensorError("bmm: shape mismatch " + shape_str(a.shape()) +
                          " vs " + shape_str(b.shape()));
    const std::size_t nb = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
    std::vector<double> v(nb * m * n, 0.0);
    for (std::size_t i = 0; i < nb; ++i)
        K().matmul_acc(a.data().data() + i * m * k, b.data().data() + i * k * n,
                       v.data() + i * m * n, m, k, n);
    return make_op("bmm", {nb, m, n}, std::move(v), {a, b},
                   [a, b](const Tensor& g) -> std::vector<Tensor> {
                       return {bmm(g, transpose_last2(b)),
                               bmm(transpose_last2(a), g)};
                   });
}

Tensor transpose(const Tensor& a) {
    check_rank("transpose", a, 2);
    const std::size_t m = a.dim(0), n = a.dim(1);
    std::vector<double> v(m * n);
    auto in = a.data();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) v[j * m + i] = in[i * n + j];
    return make_op("transpose", {n, m}, std::move(v), {a},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {transpose(g)};
                   });
}

Tensor transpose_last2(const Tensor& a) {
    check_rank("transpose_last2", a, 3);
    const std::size_t nb = a.dim(0), m = a.dim(1), n = a.dim(2);
    std::vector<double> v(nb * m * n);
    auto in = a.data();
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                v[(b * n + j) * m + i] = in[(b * m + i) * n + j];
    return make_op("transpose_last2", {nb, n, m}, std::move(v), {a},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {transpose_last2(g)};
                   });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel())
        throw TensorError("reshape: " + shape_str(a.shape()) + " to " +
                          shape_str(shape) + " changes element count");
    Shape orig = a.shape();
    return make_op("reshape", std::move(shape),
                   std::vector<double>(a.data().begin(), a.data().end()), {a},
                   [orig](const Tensor& g) -> std::vector<Tensor> {
                       return {reshape(g, orig)};
                   });
}

namespace {

// outer/inner strides around `axis`
void axis_extents(const Shape& s, std::size_t axis, std::size_t& outer,
                  std::size_t& inner) {
    outer = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    inner = 1;
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
}

}  // namespace

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw TensorError("concat: no inputs");
    const Shape& s0 = parts[0].shape();
    if (axis >= s0.size())
        throw TensorError("concat: axis " + std::to_string(axis) +
                          " out of range for " + shape_str(s0));
    std::size_t total_axis = 0;
    for (const auto& p : parts) {
        if (p.rank() != s0.size())
            throw TensorError("concat: rank mismatch " + shape_str(s0) +
                              " vs " + shape_str(p.shape()));
        for (std::size_t i = 0; i < s0.size(); ++i)
            if (i != axis && p.dim(i) != s0[i])
                throw TensorError("concat: shape mismatch " + shape_str(s0) +
                                  " vs " + shape_str(p.shape()));
        total_axis += p.dim(axis);
    }
    Shape out_shape = s0;
    out_shape[axis] = total_axis;
    std::size_t outer, inner;
    axis_extents(out_shape, axis, outer, inner);
    std::vector<double> v(shape_numel(out_shape));
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const std::size_t pa = p.dim(axis);
        auto in = p.data();
        for (std::size_t o = 0; o < outer; ++o)
            std::copy_n(in.data() + o * pa * inner, pa * inner,
                        v.data() + (o * total_axis + offset) * inner);
        offset += pa;
    }
    std::vector<std::size_t> lens;
    for (const auto& p : parts) lens.push_back(p.dim(axis));
    return make_op("concat", std::move(out_shape), std::move(v), parts,
                   [axis, lens](const Tensor& g) -> std::vector<Tensor> {
                       std::vector<Tensor> out;
                       std::size_t start = 0;
                       for (auto len : lens) {
                           out.push_back(slice(g, axis, start, len));
                           start += len;
                       }
                       return out;
                   });
}

namespace {

// zero tensor with `part` embedded at [start, start+len) along `axis`
Tensor slice_adjoint(const Tensor& part, std::size_t axis, std::size_t start,
                     std::size_t full_len) {
    Shape out_shape = part.shape();
    out_shape[axis] = full_len;
    std::size_t outer, inner;
    axis_extents(out_shape, axis, outer, inner);
    const std::size_t len = part.dim(axis);
    std::vector<double> v(shape_numel(out_shape), 0.0);
    auto in = part.data();
    for (std::size_t o = 0; o < outer; ++o)
        std::copy_n(in.data() + o * len * inner, len * inner,
                    v.data() + (o * full_len + start) * inner);
    std::size_t plen = len;
    return make_op("slice_adjoint", std::move(out_shape), std::move(v), {part},
                   [axis, start, plen](const Tensor& g) -> std::vector<Tensor> {
                       return {slice(g, axis, start, plen)};
                   });
}

}  // namespace

Tensor slice(const Tensor& a, std::size_t axis, std::size_t start,
             std::size_t len) {
    if (axis >= a.rank() || start + len > a.dim(axis) || len == 0)
        throw TensorError("slice: range [" + std::to_string(start) + "," +
                          std::to_string(start + len) + ") invalid for axis " +
                          std::to_string(axis) + " of " + shape_str(a.shape()));
    Shape out_shape = a.shape();
    out_shape[axis] = len;
    std::size_t outer, inner;
    axis_extents(a.shape(), axis, outer, inner);
    const std::size_t full = a.dim(axis);
    std::vector<double> v(shape_numel(out_shape));
    auto in = a.data();
    for (std::size_t o = 0; o < outer; ++o)
        std::copy_n(in.data() + (o * full + start) * inner, len * inner,
                    v.data() + o * len * inner);
    return make_op("slice", std::move(out_shape), std::move(v), {a},
                   [axis, start, full](const Tensor& g) -> std::vector<Tensor> {
                       return {slice_adjoint(g, axis, start, full)};
                   });
}

Tensor sum_all(const Tensor& a) {
    double s = K().sum(a.data().data(), a.numel());
    Shape orig = a.shape();
    return make_op("sum_all", {1}, {s}, {a},
                   [orig](const Tensor& g) -> std::vector<Tensor> {
                       return {tile_all(g, orig)};
                   });
}

Tensor tile_all(const Tensor& s, Shape shape) {
    if (s.numel() != 1) throw TensorError("tile_all: source is not scalar");
    std::vector<double> v(shape_numel(shape), s.data()[0]);
    return make_op("tile_all", std::move(shape), std::move(v), {s},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {sum_all(g)};
                   });
}

namespace {

Tensor row_bcast(const char* name, const Tensor& a, bool mean) {
    const std::size_t n = a.dim(a.rank() - 1);
    const std::size_t rows = a.numel() / n;
    std::vector<double> v(a.numel());
    auto in = a.data();
    for (std::size_t r = 0; r < rows; ++r) {
        double s = K().sum(in.data() + r * n, n);
        if (mean) s /= static_cast<double>(n);
        std::fill_n(v.data() + r * n, n, s);
    }
    VjpFn vjp = mean ? VjpFn([](const Tensor& g) -> std::vector<Tensor> {
        return {row_mean_bcast(g)};
    })
                     : VjpFn([](const Tensor& g) -> std::vector<Tensor> {
                           return {row_sum_bcast(g)};
                       });
    return make_op(name, a.shape(), std::move(v), {a}, std::move(vjp));
}

}  // namespace

Tensor row_sum_bcast(const Tensor& a) { return row_bcast("row_sum_bcast", a, false); }
Tensor row_mean_bcast(const Tensor& a) { return row_bcast("row_mean_bcast", a, true); }

Tensor sum_last(const Tensor& a) {
    const std::size_t n = a.dim(a.rank() - 1);
    const std::size_t rows = a.numel() / n;
    Shape out_shape(a.shape().begin(), a.shape().end() - 1);
    if (out_shape.empty()) out_shape = {1};
    std::vector<double> v(rows);
    auto in = a.data();
    for (std::size_t r = 0; r < rows; ++r)
        v[r] = K().sum(in.data() + r * n, n);
    Shape orig = a.shape();
    return make_op("sum_last", std::move(out_shape), std::move(v), {a},
                   [orig, n](const Tensor& g) -> std::vector<Tensor> {
                       if (orig.size() == 1) return {tile_all(g, orig)};
                       return {tile_last(g, n)};
                   });
}

Tensor tile_last(const Tensor& a, std::size_t n) {
    Shape out_shape = a.shape();
    out_shape.push_back(n);
    std::vector<double> v(a.numel() * n);
    auto in = a.data();
    for (std::size_t r = 0; r < a.numel(); ++r)
        std::fill_n(v.data() + r * n, n, in[r]);
    return make_op("tile_last", std::move(out_shape), std::move(v), {a},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {sum_last(g)};
                   });
}

Tensor sum_leading(const Tensor& a) {
    const std::size_t n = a.dim(a.rank() - 1);
    const std::size_t rows = a.numel() / n;
    std::vector<double> v(n, 0.0);
    auto in = a.data();
    for (std::size_t r = 0; r < rows; ++r)
        K().axpy(1.0, in.data() + r * n, v.data(), n);
    Shape lead(a.shape().begin(), a.shape().end() - 1);
    return make_op("sum_leading", {n}, std::move(v), {a},
                   [lead](const Tensor& g) -> std::vector<Tensor> {
                       return {tile_leading(g, lead)};
                   });
}

Tensor tile_leading(const Tensor& v, Shape lead) {
    check_rank("tile_leading", v, 1);
    const std::size_t n = v.dim(0);
    const std::size_t rows = shape_numel(lead);
    Shape out_shape = lead;
    out_shape.push_back(n);
    std::vector<double> out(rows * n);
    auto in = v.data();
    for (std::size_t r = 0; r < rows; ++r)
        std::copy_n(in.data(), n, out.data() + r * n);
    return make_op("tile_leading", std::move(out_shape), std::move(out), {v},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {sum_leading(g)};
                   });
}

Tensor tile_axis0(const Tensor& a, std::size_t b) {
    Shape out_shape = a.shape();
    out_shape.insert(out_shape.begin(), b);
    std::vector<double> v(a.numel() * b);
    for (std::size_t i = 0; i < b; ++i)
        std::copy_n(a.data().data(), a.numel(), v.data() + i * a.numel());
    return make_op("tile_axis0", std::move(out_shape), std::move(v), {a},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {sum_axis0(g)};
                   });
}

Tensor sum_axis0(const Tensor& a) {
    if (a.rank() < 2) throw TensorError("sum_axis0: rank must be >= 2");
    const std::size_t b = a.dim(0);
    const std::size_t rest = a.numel() / b;
    Shape out_shape(a.shape().begin() + 1, a.shape().end());
    std::vector<double> v(rest, 0.0);
    for (std::size_t i = 0; i < b; ++i)
        K().axpy(1.0, a.data().data() + i * rest, v.data(), rest);
    return make_op("sum_axis0", std::move(out_shape), std::move(v), {a},
                   [b](const Tensor& g) -> std::vector<Tensor> {
                       return {tile_axis0(g, b)};
                   });
}

Tensor sum_axis2(const Tensor& a) {
    check_rank("sum_axis2", a, 3);
    const std::size_t b = a.dim(0), c = a.dim(1), t = a.dim(2);
    std::vector<double> v(b * c);
    auto in = a.data();
    for (std::size_t i = 0; i < b * c; ++i)
        v[i] = K().sum(in.data() + i * t, t);
    return make_op("sum_axis2", {b, c}, std::move(v), {a},
                   [t](const Tensor& g) -> std::vector<Tensor> {
                       return {tile_axis2(g, t)};
                   });
}

Tensor tile_axis2(const Tensor& a, std::size_t t) {
    check_rank("tile_axis2", a, 2);
    const std::size_t b = a.dim(0), c = a.dim(1);
    std::vector<double> v(b * c * t);
    auto in = a.data();
    for (std::size_t i = 0; i < b * c; ++i)
        std::fill_n(v.data() + i * t, t, in[i]);
    return make_op("tile_axis2", {b, c, t}, std::move(v), {a},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {sum_axis2(g)};
                   });
}

Tensor bn_mean_bcast(const Tensor& a) {
    check_rank("bn_mean_bcast", a, 3);
    const std::size_t b = a.dim(0), c = a.dim(1), t = a.dim(2);
    std::vector<double> means(c, 0.0);
    auto in = a.data();
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < c; ++j)
            means[j] += K().sum(in.data() + (i * c + j) * t, t);
    const double denom = static_cast<double>(b * t);
    std::vector<double> v(a.numel());
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < c; ++j)
            std::fill_n(v.data() + (i * c + j) * t, t, means[j] / denom);
    return make_op("bn_mean_bcast", a.shape(), std::move(v), {a},
                   [](const Tensor& g) -> std::vector<Tensor> {
                       return {bn_mean_bcast(g)};
                   });
}

Tensor log(const Tensor& a) {
    return unary_vals(
        "log", a, [](double x) { return std::log(x); },
        [a](const Tensor& g) -> std::vector<Tensor> { return {div(g, a)}; },
        {a});
}

Tensor exp(const Tensor& a) {
    return unary_vals(
        "exp", a, [](double x) { return std::exp(x); },
        [a](const Tensor& g) -> std::vector<Tensor> {
            return {mul(g, exp(a))};
        },
        {a});
}

Tensor sqrt(const Tensor& a) {
    return unary_vals(
        "sqrt", a, [](double x) { return std::sqrt(x); },
        [a](const Tensor& g) -> std::vector<Tensor> {
            return {scale(div(g, sqrt(a)), 0.5)};
        },
        {a});
}

Tensor square(const Tensor& a) {
    return unary_vals(
        "square", a, [](double x) { return x * x; },
        [a](const Tensor& g) -> std::vector<Tensor> {
            return {scale(mul(g, a), 2.0)};
        },
        {a});
}

Tensor sigmoid(const Tensor& a) {
    return unary_vals(
        "sigmoid", a, sigmoid_val,
        [a](const Tensor& g) -> std::vector<Tensor> {
            Tensor s = sigmoid(a);
            return {mul(g, mul(s, add_scalar(neg(s), 1.0)))};
        },
        {a});
}

Tensor gelu(const Tensor& a) {
    return unary_vals(
        "gelu", a, [](double x) { return x * Phi(x); },
        [a](const Tensor& g) -> std::vector<Tensor> {
            return {mul(g, gelu_dx(a))};
        },
        {a});
}

Tensor relu(const Tensor& a) {
    return unary_vals(
        "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
        [a](const Tensor& g) -> std::vector<Tensor> {
            std::vector<double> m(a.numel());
            auto in = a.data();
            for (std::size_t i = 0; i < m.size(); ++i)
                m[i] = in[i] > 0.0 ? 1.0 : 0.0;
            return {mul(g, Tensor(a.shape(), std::move(m)))};
        },
        {a});
}

Tensor abs(const Tensor& a) {
    return unary_vals(
        "abs", a, [](double x) { return std::abs(x); },
        [a](const Tensor& g) -> std::vector<Tensor> {
            std::vector<double> m(a.numel());
            auto in = a.data();
            for (std::size_t i = 0; i < m.size(); ++i)
                m[i] = in[i] > 0.0 ? 1.0 : (in[i] < 0.0 ? -1.0 : 0.0);
            return {mul(g, Tensor(a.shape(), std::move(m)))};
        },
        {a});
}

Tensor softmax_last(const Tensor& a) {
    const std::size_t n = a.dim(a.rank() - 1);
    const std::size_t rows = a.numel() / n;
    std::vector<double> v(a.numel());
    auto in = a.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = in.data() + r * n;
        double* y = v.data() + r * n;
        double mx = x[0];
        for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = std::exp(x[i] - mx);
            s += y[i];
        }
        for (std::size_t i = 0; i < n; ++i) y[i] /= s;
    }
    return make_op("softmax_last", a.shape(), std::move(v), {a},
                   [a](const Tensor& g) -> std::vector<Tensor> {
                       Tensor y = softmax_last(a);
                       return {mul(y, sub(g, row_sum_bcast(mul(g, y))))};
                   });
}

namespace {

Tensor fold1d(const Tensor& a, std::size_t channels, std::size_t t_orig,
              std::size_t k, std::size_t pad_l, std::size_t pad_r);

}  // namespace

Tensor unfold1d(const Tensor& a, std::size_t k, std::size_t pad_l,
                std::size_t pad_r) {
    check_rank("unfold1d", a, 3);
    const std::size_t b = a.dim(0), c = a.dim(1), t = a.dim(2);
    if (t + pad_l + pad_r < k)
        throw TensorError("unfold1d: kernel " + std::to_string(k) +
                          " exceeds padded length");
    const std::size_t to = t + pad_l + pad_r - k + 1;
    std::vector<double> v(b * c * k * to, 0.0);
    auto in = a.data();
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t j = 0; j < k; ++j) {
                double* dst = v.data() + ((bi * c + ci) * k + j) * to;
                const double* src = in.data() + (bi * c + ci) * t;
                for (std::size_t ti = 0; ti < to; ++ti) {
                    const std::ptrdiff_t s =
                        static_cast<std::ptrdiff_t>(ti + j) -
                        static_cast<std::ptrdiff_t>(pad_l);
                    if (s >= 0 && s < static_cast<std::ptrdiff_t>(t))
                        dst[ti] = src[s];
                }
            }
    return make_op("unfold1d", {b, c * k, to}, std::move(v), {a},
                   [c, t, k, pad_l, pad_r](const Tensor& g)
                       -> std::vector<Tensor> {
                       return {fold1d(g, c, t, k, pad_l, pad_r)};
                   });
}

namespace {

Tensor fold1d(const Tensor& a, std::size_t channels, std::size_t t_orig,
              std::size_t k, std::size_t pad_l, std::size_t pad_r) {
    check_rank("fold1d", a, 3);
    const std::size_t b = a.dim(0), to = a.dim(2);
    std::vector<double> v(b * channels * t_orig, 0.0);
    auto in = a.data();
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t ci = 0; ci < channels; ++ci)
            for (std::size_t j = 0; j < k; ++j) {
                const double* src =
                    in.data() + ((bi * channels + ci) * k + j) * to;
                double* dst = v.data() + (bi * channels + ci) * t_orig;
                for (std::size_t ti = 0; ti < to; ++ti) {
                    const std::ptrdiff_t s =
                        static_cast<std::ptrdiff_t>(ti + j) -
                        static_cast<std::ptrdiff_t>(pad_l);
                    if (s >= 0 && s < static_cast<std::ptrdiff_t>(t_orig))
                        dst[s] += src[ti];
                }
            }
    return make_op("fold1d", {b, channels, t_orig}, std::move(v), {a},
                   [k, pad_l, pad_r](const Tensor& g) -> std::vector<Tensor> {
                       return {unfold1d(g, k, pad_l, pad_r)};
                   });
}

Tensor patches_adjoint(const Tensor& a, std::size_t channels, std::size_t p);

}  // namespace

Tensor extract_patches(const Tensor& a, std::size_t p) {
    check_rank("extract_patches", a, 3);
    const std::size_t b = a.dim(0), c = a.dim(1), t = a.dim(2);
    if (p == 0 || t % p != 0)
        throw TensorError("extract_patches: length " + std::to_string(t) +
                          " not divisible by patch " + std::to_string(p));
    const std::size_t np = t / p;
    std::vector<double> v(a.numel());
    auto in = a.data();
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t j = 0; j < np; ++j)
            for (std::size_t ci = 0; ci < c; ++ci)
                for (std::size_t q = 0; q < p; ++q)
                    v[((bi * np + j) * c + ci) * p + q] =
                        in[(bi * c + ci) * t + j * p + q];
    return make_op("extract_patches", {b, np, c * p}, std::move(v), {a},
                   [c, p](const Tensor& g) -> std::vector<Tensor> {
                       return {patches_adjoint(g, c, p)};
                   });
}

namespace {

Tensor patches_adjoint(const Tensor& a, std::size_t channels, std::size_t p) {
    check_rank("patches_adjoint", a, 3);
    const std::size_t b = a.dim(0), np = a.dim(1);
    const std::size_t t = np * p;
    std::vector<double> v(b * channels * t);
    auto in = a.data();
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t j = 0; j < np; ++j)
            for (std::size_t ci = 0; ci < channels; ++ci)
                for (std::size_t q = 0; q < p; ++q)
                    v[(bi * channels + ci) * t + j * p + q] =
                        in[((bi * np + j) * channels + ci) * p + q];
    return make_op("patches_adjoint", {b, channels, t}, std::move(v), {a},
                   [p](const Tensor& g) -> std::vector<Tensor> {
                       return {extract_patches(g, p)};
                   });
}

}  // namespace

Tensor mean_all(const Tensor& a) {
    return scale(sum_all(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor mean_axis2(const Tensor& a) {
    return scale(sum_axis2(a), 1.0 / static_cast<double>(a.dim(2)));
}

Tensor layernorm_last(const Tensor& a, double eps) {
    Tensor centered = sub(a, row_mean_bcast(a));
    Tensor var = row_mean_bcast(square(centered));
    return div(centered, sqrt(add_scalar(var, eps)));
}

Tensor softplus(const Tensor& a) {
    return add(relu(a), log(add_scalar(exp(neg(abs(a))), 1.0)));
}

Tensor l2norm(const Tensor& a) { return sqrt(sum_all(square(a))); }

Tensor l2norm_rows(const Tensor& a) {
    check_rank("l2norm_rows", a, 2);
    return sqrt(add_scalar(sum_last(square(a)), 1e-12));
}

GradMap backward(const Tensor& loss, bool create_graph) {
    if (!loss.defined() || loss.numel() != 1)
        throw TensorError("backward: loss must be scalar-shaped");
    if (!loss.in_graph())
        throw TensorError("backward: loss does not belong to a graph");

    std::optional<NoGradGuard> guard;
    if (!create_graph) guard.emplace();

    auto cmp = [](const Tensor& a, const Tensor& b) { return a.id() < b.id(); };
    std::priority_queue<Tensor, std::vector<Tensor>, decltype(cmp)> pq(cmp);
    std::unordered_set<std::uint64_t> queued;
    std::unordered_map<const TensorImpl*, Tensor> acc;

    acc.emplace(loss.impl(), Tensor::full(loss.shape(), 1.0));
    pq.push(loss);
    queued.insert(loss.id());

    GradMap result;
    while (!pq.empty()) {
        Tensor t = pq.top();
        pq.pop();
        Tensor g = acc.at(t.impl());
        acc.erase(t.impl());
        auto node = t.impl()->node;
        if (!node) {
            if (t.requires_grad()) {
                auto it = result.find(t.id());
                if (it == result.end())
                    result.emplace(t.id(), g);
                else
                    it->second = add(it->second, g);
            }
            continue;
        }
        std::vector<Tensor> igrads = node->vjp(g);
        if (igrads.size() != node->inputs.size())
            throw TensorError(std::string("backward: bad vjp arity in op ") +
                              node->op_name);
        for (std::size_t i = 0; i < igrads.size(); ++i) {
            const Tensor& in = node->inputs[i];
            Tensor& ig = igrads[i];
            if (!ig.defined()) continue;
            if (!in.in_graph() && !in.requires_grad()) continue;
            auto it = acc.find(in.impl());
            if (it == acc.end())
                acc.emplace(in.impl(), ig);
            else
                it->second = add(it->second, ig);
            if (queued.insert(in.id()).second) pq.push(in);
        }
    }
    return result;
}

Tensor grad_of(const GradMap& grads, const Tensor& leaf) {
    auto it = grads.find(leaf.id());
    if (it != grads.end()) return it->second;
    return Tensor::zeros(leaf.shape());
}

double grad_check(const std::function<Tensor(const Tensor&)>& f,
                  const Tensor& x, double eps) {
    Tensor xg = x.detach().set_requires_grad(true);
    Tensor y = f(xg);
    if (y.numel() != 1)
        throw TensorError("grad_check: f must be scalar-valued");
    Tensor analytic = grad_of(backward(y), xg);

    Tensor xp = x.detach();
    auto vals = xp.mutable_data();
    auto gv = analytic.data();
    double max_err = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double orig = vals[i];
        vals[i] = orig + eps;
        const double fp = f(xp).item();
        vals[i] = orig - eps;
        const double fm = f(xp).item();
        vals[i] = orig;
        const double fd = (fp - fm) / (2.0 * eps);
        const double err =
            std::abs(gv[i] - fd) / std::max(1.0, std::abs(gv[i]));
        max_err = std::max(max_err, err);
    }
    return max_err;
}

}  // namespace mtscgan
