#pragma once

#include <vector>

#include "graphmlp/nn.hpp"

namespace graphmlp {

// Adam with coupled L2 weight decay (decay added to the gradient).
class Adam {
  public:
    Adam(std::vector<ParamRef> params, double lr, double weight_decay = 0.0,
         double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
         bool decay_norms_and_biases = true);

    // One update: g' = g + wd*theta, moments, bias correction, step.
    // Throws on a non-finite gradient, naming the parameter.
    void step();

    long step_count() const { return t_; }

    // Moment buffers exposed for checkpointing (exact resumption).
    std::vector<ParamRef> state_refs();

  private:
    std::vector<ParamRef> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::vector<bool> decayed_;
    std::vector<double> t_box_;  // step count as a checkpointable buffer
    double lr_;
    double wd_;
    double beta1_;
    double beta2_;
    double eps_;
    long t_ = 0;
};

}  // namespace graphmlp
