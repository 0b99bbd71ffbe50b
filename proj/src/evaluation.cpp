#include "mtscgan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mtscgan/adam.hpp"

namespace mtscgan::eval {

void FcnConfig::validate() const {
    if (channels == 0 || n_classes == 0)
        throw TensorError("fcn config: zero channels or classes");
    for (std::size_t f : filters)
        if (f == 0) throw TensorError("fcn config: zero filter count");
    for (std::size_t k : kernels)
        if (k == 0) throw TensorError("fcn config: zero kernel width");
}

FcnClassifierParams make_fcn(const FcnConfig& cfg, Rng& rng) {
    cfg.validate();
    FcnClassifierParams p;
    p.cfg = cfg;
    std::size_t in = cfg.channels;
    for (std::size_t i = 0; i < 3; ++i) {
        ConvBlock& b = p.blocks[i];
        b.kernel = cfg.kernels[i];
        b.conv = nn::make_linear(in * b.kernel, cfg.filters[i], rng);
        b.bn.gamma = Tensor::full({cfg.filters[i]}, 1.0).set_requires_grad(true);
        b.bn.beta = Tensor::zeros({cfg.filters[i]}).set_requires_grad(true);
        b.bn.run_mean.assign(cfg.filters[i], 0.0);
        b.bn.run_var.assign(cfg.filters[i], 1.0);
        in = cfg.filters[i];
    }
    p.head = nn::make_linear(cfg.feature_dim(), cfg.n_classes, rng);
    return p;
}

void visit(FcnClassifierParams& p, const std::string& prefix,
           const nn::ParamVisitor& fn) {
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string bs = prefix + "block" + std::to_string(i);
        nn::visit(p.blocks[i].conv, bs + ".conv", fn);
        fn(bs + ".bn.gamma", p.blocks[i].bn.gamma);
        fn(bs + ".bn.beta", p.blocks[i].bn.beta);
    }
    nn::visit(p.head, prefix + "head", fn);
}

namespace {

// same-length conv: unfold with pad summing to k-1, per-timestep linear mix
Tensor conv1d_same(const Tensor& x, const nn::Linear& w, std::size_t k) {
    const std::size_t pl = (k - 1) / 2, pr = k - 1 - pl;
    Tensor cols = unfold1d(x, k, pl, pr);  // [B, C*k, T]
    return transpose_last2(nn::apply3(w, transpose_last2(cols)));
}

Tensor bcast_channel(const std::vector<double>& v, std::size_t b,
                     std::size_t t) {
    Tensor row(Shape{v.size()}, std::vector<double>(v));
    return tile_axis2(tile_axis0(row, b), t);
}

Tensor batchnorm(const Tensor& x, BnParams& bn, double eps, double momentum,
                 bool training) {
    const std::size_t B = x.dim(0), C = x.dim(1), T = x.dim(2);
    Tensor normed;
    if (training) {
        Tensor m = bn_mean_bcast(x);
        Tensor v = bn_mean_bcast(square(sub(x, m)));
        normed = div(sub(x, m), sqrt(add_scalar(v, eps)));
        // refresh running statistics from the detached batch moments
        const double n = static_cast<double>(B * T);
        const double bessel = n > 1.0 ? n / (n - 1.0) : 1.0;
        for (std::size_t c = 0; c < C; ++c) {
            const double bm = m.data()[c * T];
            const double bv = v.data()[c * T] * bessel;
            bn.run_mean[c] = (1.0 - momentum) * bn.run_mean[c] + momentum * bm;
            bn.run_var[c] = (1.0 - momentum) * bn.run_var[c] + momentum * bv;
        }
    } else {
        std::vector<double> inv_sd(C);
        for (std::size_t c = 0; c < C; ++c)
            inv_sd[c] = 1.0 / std::sqrt(bn.run_var[c] + eps);
        normed = mul(sub(x, bcast_channel(bn.run_mean, B, T)),
                     bcast_channel(inv_sd, B, T));
    }
    return add(mul(normed, tile_axis2(tile_axis0(bn.gamma, B), T)),
               tile_axis2(tile_axis0(bn.beta, B), T));
}

}  // namespace

Tensor fcn_features(const Tensor& x, FcnClassifierParams& p, bool training) {
    if (x.rank() != 3 || x.dim(1) != p.cfg.channels)
        throw TensorError("fcn: input " + shape_str(x.shape()) +
                          " does not match " + std::to_string(p.cfg.channels) +
                          " channels");
    Tensor h = x;
    for (auto& b : p.blocks) {
        h = conv1d_same(h, b.conv, b.kernel);
        h = batchnorm(h, b.bn, p.cfg.bn_eps, p.cfg.bn_momentum, training);
        h = relu(h);
    }
    return mean_axis2(h);  // global average pooling -> [B, feature_dim]
}

Tensor fcn_logits(const Tensor& x, FcnClassifierParams& p, bool training) {
    return nn::apply(p.head, fcn_features(x, p, training));
}

Tensor cross_entropy(const Tensor& logits,
                     const std::vector<std::size_t>& labels) {
    if (logits.rank() != 2 || logits.dim(0) != labels.size())
        throw TensorError("cross_entropy: logits " + shape_str(logits.shape()) +
                          " vs " + std::to_string(labels.size()) + " labels");
    const std::size_t B = logits.dim(0), K = logits.dim(1);
    // detached per-row max keeps the log-sum-exp stable without changing
    // the gradient of the softmax
    std::vector<double> mx(B), pick(B * K, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < K; ++j)
            m = std::max(m, logits.data()[i * K + j]);
        mx[i] = m;
        if (labels[i] >= K)
            throw TensorError("cross_entropy: label " +
                              std::to_string(labels[i]) + " out of range");
        pick[i * K + labels[i]] = 1.0;
    }
    Tensor shifted = sub(logits, tile_last(Tensor({B}, std::move(mx)), K));
    Tensor lse = log(sum_last(exp(shifted)));
    Tensor picked = sum_last(mul(shifted, Tensor({B, K}, std::move(pick))));
    return mean_all(sub(lse, picked));
}

std::vector<std::size_t> fcn_predict(const Tensor& x, FcnClassifierParams& p) {
    NoGradGuard ng;
    Tensor logits = fcn_logits(x, p, /*training=*/false);
    const std::size_t B = logits.dim(0), K = logits.dim(1);
    std::vector<std::size_t> out(B);
    for (std::size_t i = 0; i < B; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < K; ++j)
            if (logits.data()[i * K + j] > logits.data()[i * K + best])
                best = j;
        out[i] = best;
    }
    return out;
}

double fcn_accuracy(const data::Dataset& ds, FcnClassifierParams& p,
                    std::size_t batch) {
    std::size_t hit = 0;
    for (std::size_t start = 0; start < ds.size(); start += batch) {
        const std::size_t n = std::min(batch, ds.size() - start);
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = start + i;
        auto pred = fcn_predict(data::batch_tensor(ds, idx), p);
        for (std::size_t i = 0; i < n; ++i)
            hit += pred[i] == ds.samples[start + i].class_id;
    }
    return static_cast<double>(hit) / static_cast<double>(ds.size());
}

namespace {

FcnClassifierParams clone_fcn(FcnClassifierParams& p) {
    FcnClassifierParams out = p;
    visit(out, "", [](const std::string&, Tensor& t) {
        t = t.detach().set_requires_grad(true);
    });
    return out;
}

}  // namespace

FcnClassifierParams train_fcn(const data::Dataset& train,
                              const data::Dataset& val, const FcnConfig& cfg,
                              const FcnTrainConfig& tcfg, Rng& rng) {
    if (train.channels != cfg.channels)
        throw TensorError("train_fcn: dataset channels do not match config");
    const auto counts = train.class_counts();
    std::size_t present = 0;
    for (std::size_t c : counts) present += c > 0;
    if (present < 2)
        throw TensorError("train_fcn: need at least 2 classes, found " +
                          std::to_string(present));

    FcnClassifierParams p = make_fcn(cfg, rng);
    std::vector<Tensor> params;
    visit(p, "", [&params](const std::string&, Tensor& t) {
        params.push_back(t);
    });
    Adam opt({.lr = tcfg.lr, .beta1 = 0.9}, params);

    FcnClassifierParams best = clone_fcn(p);
    double best_acc = -1.0;
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += tcfg.batch) {
            const std::size_t n = std::min(tcfg.batch, order.size() - start);
            if (n < 2) continue;  // batch norm needs more than one row
            std::vector<std::size_t> idx(order.begin() + start,
                                         order.begin() + start + n);
            std::vector<std::size_t> labels(n);
            for (std::size_t i = 0; i < n; ++i)
                labels[i] = train.samples[idx[i]].class_id;
            Tensor loss = cross_entropy(
                fcn_logits(data::batch_tensor(train, idx), p, true), labels);
            GradMap grads = backward(loss);
            std::vector<Tensor> g;
            for (Tensor& t : params) g.push_back(grad_of(grads, t));
            opt.step(params, g);
        }
        const double acc = fcn_accuracy(val, p);
        if (acc > best_acc) {
            best_acc = acc;
            best = clone_fcn(p);
        }
    }
    return best;
}

Tensor extract_features(const Tensor& x, FcnClassifierParams& p) {
    NoGradGuard ng;
    return fcn_features(x, p, /*training=*/false);
}

GaussianStats gaussian_stats(const Tensor& features) {
    if (features.rank() != 2)
        throw TensorError("gaussian_stats: expected [n, d], got " +
                          shape_str(features.shape()));
    const std::size_t n = features.dim(0), d = features.dim(1);
    if (n < 2)
        throw TensorError("gaussian_stats: need n >= 2, got " +
                          std::to_string(n));
    GaussianStats s;
    s.n = n;
    s.mu.assign(d, 0.0);
    auto v = features.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) s.mu[j] += v[i * d + j];
    for (double& m : s.mu) m /= static_cast<double>(n);
    s.sigma.assign(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a) {
            const double da = v[i * d + a] - s.mu[a];
            for (std::size_t b = a; b < d; ++b)
                s.sigma[a * d + b] += da * (v[i * d + b] - s.mu[b]);
        }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            const double c = s.sigma[a * d + b] / static_cast<double>(n - 1);
            s.sigma[a * d + b] = c;
            s.sigma[b * d + a] = c;
        }
    return s;
}

double frechet_distance(const GaussianStats& s1, const GaussianStats& s2) {
    const std::size_t d = s1.dim();
    if (d != s2.dim())
        throw TensorError("frechet: dims " + std::to_string(d) + " vs " +
                          std::to_string(s2.dim()));
    for (const auto* s : {&s1, &s2}) {
        for (double x : s->mu)
            if (!std::isfinite(x))
                throw TensorError("frechet: non-finite mean");
        for (double x : s->sigma)
            if (!std::isfinite(x))
                throw TensorError("frechet: non-finite covariance");
    }
    if (s1.mu == s2.mu && s1.sigma == s2.sigma) return 0.0;
    using Mat = Eigen::MatrixXd;
    const auto n = static_cast<Eigen::Index>(d);
    Mat sig1 = Eigen::Map<const Mat>(s1.sigma.data(), n, n);
    Mat sig2 = Eigen::Map<const Mat>(s2.sigma.data(), n, n);
    // row-major storage maps transposed; both are symmetric so it is moot
    Eigen::SelfAdjointEigenSolver<Mat> es1(sig1);
    Mat half = es1.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Mat s1h = es1.eigenvectors() * half * es1.eigenvectors().transpose();
    Mat prod = s1h * sig2 * s1h;
    prod = 0.5 * (prod + prod.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es2(prod);
    double tr_sqrt = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        tr_sqrt += std::sqrt(std::max(0.0, es2.eigenvalues()[i]));
    double mean_term = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double dm = s1.mu[j] - s2.mu[j];
        mean_term += dm * dm;
    }
    const double fid =
        mean_term + sig1.trace() + sig2.trace() - 2.0 * tr_sqrt;
    return std::max(0.0, fid);
}

double mts_fid(const Tensor& real, const Tensor& generated,
               FcnClassifierParams& extractor) {
    if (real.dim(0) < 2 || generated.dim(0) < 2)
        throw TensorError("mts_fid: both collections need >= 2 samples");
    auto features = [&](const Tensor& x) {
        std::vector<Tensor> parts;
        const std::size_t chunk = 64;
        for (std::size_t s = 0; s < x.dim(0); s += chunk) {
            const std::size_t n = std::min(chunk, x.dim(0) - s);
            parts.push_back(extract_features(slice(x, 0, s, n), extractor));
        }
        return parts.size() == 1 ? parts[0] : concat(parts, 0);
    };
    return frechet_distance(gaussian_stats(features(real)),
                            gaussian_stats(features(generated)));
}

DtwResult dtw(const Tensor& a, const Tensor& b, std::ptrdiff_t band) {
    if (!a.defined() || !b.defined() || a.numel() == 0 || b.numel() == 0)
        throw TensorError("dtw: empty sequence");
    const std::size_t n = a.dim(0), m = b.dim(0);
    const std::size_t d = a.rank() == 1 ? 1 : a.dim(1);
    const std::size_t db = b.rank() == 1 ? 1 : b.dim(1);
    if (d != db)
        throw TensorError("dtw: vector dims " + std::to_string(d) + " vs " +
                          std::to_string(db));
    const std::ptrdiff_t diff =
        static_cast<std::ptrdiff_t>(n) - static_cast<std::ptrdiff_t>(m);
    if (band >= 0 && band < std::abs(diff))
        throw TensorError("dtw: band " + std::to_string(band) +
                          " admits no path for lengths " + std::to_string(n) +
                          " and " + std::to_string(m));
    const double inf = std::numeric_limits<double>::infinity();
    auto dist = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double dv = a.data()[i * d + k] - b.data()[j * d + k];
            s += dv * dv;
        }
        return std::sqrt(s);
    };
    std::vector<double> cost(n * m, inf);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (band >= 0 &&
                std::abs(static_cast<std::ptrdiff_t>(i) -
                         static_cast<std::ptrdiff_t>(j)) > band)
                continue;
            double prev;
            if (i == 0 && j == 0)
                prev = 0.0;
            else if (i == 0)
                prev = cost[j - 1];
            else if (j == 0)
                prev = cost[(i - 1) * m];
            else
                prev = std::min({cost[(i - 1) * m + j - 1],
                                 cost[(i - 1) * m + j], cost[i * m + j - 1]});
            cost[i * m + j] = prev + dist(i, j);
        }
    }
    DtwResult res;
    res.cost = cost[n * m - 1];
    // backtrack, preferring the diagonal on ties
    std::size_t i = n - 1, j = m - 1;
    res.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0)
            --j;
        else if (j == 0)
            --i;
        else {
            const double diag = cost[(i - 1) * m + j - 1];
            const double up = cost[(i - 1) * m + j];
            const double left = cost[i * m + j - 1];
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left)
                --i;
            else
                --j;
        }
        res.path.emplace_back(i, j);
    }
    std::reverse(res.path.begin(), res.path.end());
    return res;
}

PcaModel pca_fit(const Tensor& x) {
    if (x.rank() != 2 || x.dim(0) < 2)
        throw TensorError("pca: expected [n >= 2, d], got " +
                          shape_str(x.shape()));
    const std::size_t n = x.dim(0), d = x.dim(1);
    PcaModel m;
    m.mean.assign(d, 0.0);
    auto v = x.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m.mean[j] += v[i * d + j];
    for (double& mm : m.mean) mm /= static_cast<double>(n);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                    (v[i * d + a] - m.mean[a]) * (v[i * d + b] - m.mean[b]);
    cov /= static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    // ascending eigenvalues; emit components in descending order
    const double total = std::max(es.eigenvalues().cwiseMax(0.0).sum(),
                                  std::numeric_limits<double>::min());
    m.components.assign(d * d, 0.0);
    m.ratios.assign(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        const auto src = static_cast<Eigen::Index>(d - 1 - r);
        m.ratios[r] = std::max(0.0, es.eigenvalues()[src]) / total;
        for (std::size_t c = 0; c < d; ++c)
            m.components[r * d + c] =
                es.eigenvectors()(static_cast<Eigen::Index>(c), src);
    }
    return m;
}

Tensor pca_project(const PcaModel& m, const Tensor& x, std::size_t k) {
    const std::size_t d = m.mean.size();
    if (x.rank() != 2 || x.dim(1) != d)
        throw TensorError("pca: data " + shape_str(x.shape()) +
                          " does not match model dim " + std::to_string(d));
    if (k > d)
        throw TensorError("pca: k " + std::to_string(k) + " exceeds dim " +
                          std::to_string(d));
    const std::size_t n = x.dim(0);
    std::vector<double> out(n * k, 0.0);
    auto v = x.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < k; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c)
                s += (v[i * d + c] - m.mean[c]) * m.components[r * d + c];
            out[i * k + r] = s;
        }
    return Tensor({n, k}, std::move(out));
}

Tensor stat_features(const Tensor& x) {
    if (x.rank() != 3 || x.numel() == 0)
        throw TensorError("stat_features: expected non-empty [B, C, T]");
    const std::size_t B = x.dim(0), C = x.dim(1), T = x.dim(2);
    std::vector<double> out(B * C * 3);
    std::vector<double> row(T);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) {
            const double* p = x.data().data() + (b * C + c) * T;
            double mean = 0.0;
            for (std::size_t t = 0; t < T; ++t) mean += p[t];
            mean /= static_cast<double>(T);
            double var = 0.0;
            for (std::size_t t = 0; t < T; ++t)
                var += (p[t] - mean) * (p[t] - mean);
            var /= static_cast<double>(T);
            std::copy(p, p + T, row.begin());
            std::nth_element(row.begin(), row.begin() + T / 2, row.end());
            double median = row[T / 2];
            if (T % 2 == 0) {
                const double lower =
                    *std::max_element(row.begin(), row.begin() + T / 2);
                median = 0.5 * (median + lower);
            }
            double* o = out.data() + (b * C + c) * 3;
            o[0] = mean;
            o[1] = median;
            o[2] = std::sqrt(var);
        }
    return Tensor({B, C, 3}, std::move(out));
}

Histogram histogram(std::span<const double> values, std::size_t bins,
                    double lo, double hi) {
    if (bins == 0 || !(hi > lo))
        throw TensorError("histogram: need bins > 0 and hi > lo");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(bins, 0);
    const double w = (hi - lo) / static_cast<double>(bins);
    for (double v : values) {
        if (v < lo || v > hi) continue;
        std::size_t b = static_cast<std::size_t>((v - lo) / w);
        if (b >= bins) b = bins - 1;
        ++h.counts[b];
    }
    return h;
}

}  // namespace mtscgan::eval
