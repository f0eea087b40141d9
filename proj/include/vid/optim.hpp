#pragma once

#include <string>
#include <vector>

#include "vid/tensor.hpp"

namespace vid {

// SGD with momentum; weight decay is coupled into the gradient:
//   v <- momentum * v + grad + weight_decay * param
//   param <- param - lr * v
struct SgdConfig {
    double lr = 0.001;
    double momentum = 0.9;
    double weight_decay = 0.005;
    // Divide the learning rate by 10 every this many epochs; 0 disables decay.
    int lr_decay_epochs = 0;

    void validate() const;
};

double scheduled_lr(const SgdConfig& cfg, int epoch);

void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, const SgdConfig& cfg, double lr);

// Ordered, named parameter table with per-parameter momentum state.
class ParamStore {
public:
    int add(std::string name, Tensor init);

    int size() const { return static_cast<int>(values_.size()); }
    const std::string& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
    Tensor& value(int i) { return values_[static_cast<std::size_t>(i)]; }
    const Tensor& value(int i) const { return values_[static_cast<std::size_t>(i)]; }
    Tensor& velocity(int i) { return velocity_[static_cast<std::size_t>(i)]; }
    const Tensor& velocity(int i) const { return velocity_[static_cast<std::size_t>(i)]; }
    int index_of(const std::string& name) const;  // -1 when absent

    void step(const std::vector<Tensor>& grads, const SgdConfig& cfg, double lr);

    std::int64_t total_parameters() const;

private:
    std::vector<std::string> names_;
    std::vector<Tensor> values_;
    std::vector<Tensor> velocity_;
};

}  // namespace vid
