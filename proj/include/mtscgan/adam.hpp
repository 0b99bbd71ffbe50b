#pragma once

#include <cstdint>
#include <vector>

#include "mtscgan/tensor.hpp"

namespace mtscgan {

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers mirror the parameter shapes;
// parameters are updated in place between graph constructions.
class Adam {
public:
    Adam(AdamConfig cfg, const std::vector<Tensor>& params);

    void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads);

    std::uint64_t t() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace mtscgan
