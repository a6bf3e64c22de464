#include "graphmlp/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace graphmlp {

namespace {
bool is_norm_or_bias(const std::string& name) {
    return name.ends_with(".b") || name.find("ln.") != std::string::npos;
}
}  // namespace

Adam::Adam(std::vector<ParamRef> params, double lr, double weight_decay,
           double beta1, double beta2, double eps,
           bool decay_norms_and_biases)
    : params_(std::move(params)),
      t_box_(1, 0.0),
      lr_(lr),
      wd_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
    for (const auto& p : params_) {
        m_.emplace_back(p.value->size(), 0.0);
        v_.emplace_back(p.value->size(), 0.0);
        decayed_.push_back(decay_norms_and_biases || !is_norm_or_bias(p.name));
    }
}

void Adam::step() {
    // t lives in a checkpointable buffer so resumed runs continue exactly
    t_ = static_cast<long>(t_box_[0]) + 1;
    t_box_[0] = static_cast<double>(t_);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& theta = *params_[k].value;
        const auto& grad = *params_[k].grad;
        if (theta.size() != grad.size())
            throw std::invalid_argument("adam_step: grad shape mismatch at '" +
                                        params_[k].name + "'");
        auto& m = m_[k];
        auto& v = v_[k];
        const double wd = decayed_[k] ? wd_ : 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (!std::isfinite(grad[i]))
                throw std::runtime_error("adam_step: non-finite gradient in '" +
                                         params_[k].name + "'");
            const double g = grad[i] + wd * theta[i];
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

std::vector<ParamRef> Adam::state_refs() {
    std::vector<ParamRef> refs;
    for (std::size_t k = 0; k < params_.size(); ++k) {
        refs.push_back({"adam.m." + params_[k].name, &m_[k], nullptr});
        refs.push_back({"adam.v." + params_[k].name, &v_[k], nullptr});
    }
    refs.push_back({"adam.t", &t_box_, nullptr});
    return refs;
}

}  // namespace graphmlp
