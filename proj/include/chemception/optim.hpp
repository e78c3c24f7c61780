#pragma once

#include <cmath>
#include <vector>

#include "chemception/autodiff.hpp"
#include "chemception/errors.hpp"

namespace chemception {

// Stage 1: RMSprop with the standard settings
// (lr 1e-3, rho 0.9, eps 1e-8). acc <- rho*acc + (1-rho)*g^2;
// p <- p - lr * g / (sqrt(acc) + eps).
template <typename T>
class RmsProp {
 public:
  explicit RmsProp(const std::vector<NodeRef<T>>& params, double lr = 1e-3,
                   double rho = 0.9, double eps = 1e-8)
      : lr_(lr), rho_(rho), eps_(eps) {
    for (const auto& p : params) acc_.emplace_back(p->value.shape);
  }

  void step(const std::vector<NodeRef<T>>& params) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i]->value;
      const auto& g = params[i]->grad;
      auto& acc = acc_[i];
      for (std::int64_t k = 0; k < p.size(); ++k) {
        acc[k] = static_cast<T>(rho_) * acc[k] +
                 static_cast<T>(1.0 - rho_) * g[k] * g[k];
        p[k] -= static_cast<T>(lr_) * g[k] /
                (std::sqrt(acc[k]) + static_cast<T>(eps_));
      }
      if (!p.all_finite())
        throw NumericalFault("non-finite parameter after rmsprop step");
    }
  }

  double lr() const { return lr_; }

 private:
  double lr_, rho_, eps_;
  std::vector<Tensor<T>> acc_;
};

// Stage 2: SGD with momentum and the exponential decay
// lr(epoch) = lr_ini * gamma^epoch; v <- mu*v - lr*g; p <- p + v.
template <typename T>
class SgdMomentum {
 public:
  explicit SgdMomentum(const std::vector<NodeRef<T>>& params,
                       double lr_ini = 1e-3, double gamma = 0.92,
                       double momentum = 0.9)
      : lr_ini_(lr_ini), gamma_(gamma), mu_(momentum) {
    for (const auto& p : params) vel_.emplace_back(p->value.shape);
  }

  double lr(int epoch) const { return lr_ini_ * std::pow(gamma_, epoch); }

  void step(const std::vector<NodeRef<T>>& params, int epoch) {
    const T lr_now = static_cast<T>(lr(epoch));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i]->value;
      const auto& g = params[i]->grad;
      auto& v = vel_[i];
      for (std::int64_t k = 0; k < p.size(); ++k) {
        v[k] = static_cast<T>(mu_) * v[k] - lr_now * g[k];
        p[k] += v[k];
      }
      if (!p.all_finite())
        throw NumericalFault("non-finite parameter after sgd step");
    }
  }

 private:
  double lr_ini_, gamma_, mu_;
  std::vector<Tensor<T>> vel_;
};

}  // namespace chemception
