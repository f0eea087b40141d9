#include "vid/optim.hpp"

#include <cmath>

#include "vid/errors.hpp"

namespace vid {

void SgdConfig::validate() const {
    if (lr < 0.0 || momentum < 0.0 || weight_decay < 0.0 || lr_decay_epochs < 0)
        throw ConfigError("sgd: lr, momentum, weight_decay and lr_decay_epochs must be non-negative");
}

double scheduled_lr(const SgdConfig& cfg, int epoch) {
    if (cfg.lr_decay_epochs <= 0) return cfg.lr;
    return cfg.lr * std::pow(10.0, -(epoch / cfg.lr_decay_epochs));
}

void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, const SgdConfig& cfg, double lr) {
    if (!param.same_shape(grad) || !param.same_shape(velocity))
        throw ShapeError("sgd_step: param/grad/velocity shape mismatch");
    for (std::int64_t i = 0; i < param.numel(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] + grad[i] + cfg.weight_decay * param[i];
        param[i] -= lr * velocity[i];
    }
}

int ParamStore::add(std::string name, Tensor init) {
    if (index_of(name) >= 0) throw ConfigError("param store: duplicate name " + name);
    names_.push_back(std::move(name));
    velocity_.push_back(Tensor::zeros(init.shape));
    values_.push_back(std::move(init));
    return static_cast<int>(values_.size()) - 1;
}

int ParamStore::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

void ParamStore::step(const std::vector<Tensor>& grads, const SgdConfig& cfg, double lr) {
    if (static_cast<int>(grads.size()) != size()) throw ShapeError("param store: gradient count mismatch");
    for (int i = 0; i < size(); ++i) sgd_step(values_[static_cast<std::size_t>(i)], grads[static_cast<std::size_t>(i)], velocity_[static_cast<std::size_t>(i)], cfg, lr);
}

std::int64_t ParamStore::total_parameters() const {
    std::int64_t n = 0;
    for (const auto& v : values_) n += v.numel();
    return n;
}

}  // namespace vid
