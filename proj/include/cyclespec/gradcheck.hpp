// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cyclespec/tensor.hpp"

namespace cyclespec::gradcheck {

// Builds a scalar loss from tape-bound inputs (one Var per input tensor,
// in order).
using GraphBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

// Central finite differences (step h) against the tape's reverse-mode
// gradients, over every element of every input with requires_grad. Returns
// the worst relative error, with a small floor in the denominator so that
// near-zero gradients are compared absolutely.
inline double max_fd_error(const GraphBuilder& build,
                           const std::vector<Tensor>& inputs,
                           double h = 1e-5) {
  const auto eval = [&](const std::vector<Tensor>& points) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(points.size());
    for (const Tensor& p : points) vars.push_back(tape.constant(p));
    Var loss = build(tape, vars);
    return tape.value(loss).scalar_value();
  };

  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& p : inputs) vars.push_back(tape.leaf(p));
  Var loss = build(tape, vars);
  backward(tape, loss);

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].requires_grad) continue;
    const Eigen::ArrayXd analytic = tape.has_grad(vars[i])
                                        ? tape.grad(vars[i])
                                        : Eigen::ArrayXd::Zero(
                                              inputs[i].numel());
    for (Index e = 0; e < inputs[i].numel(); ++e) {
      std::vector<Tensor> bumped = inputs;
      bumped[i].values()[e] += h;
      const double up = eval(bumped);
      bumped[i].values()[e] -= 2.0 * h;
      const double down = eval(bumped);
      const double fd = (up - down) / (2.0 * h);
      const double a = analytic[e];
      const double denom =
          std::max({std::abs(a), std::abs(fd), 1e-3});
      worst = std::max(worst, std::abs(a - fd) / denom);
    }
  }
  return worst;
}

struct OpCheck {
  std::string name;
  double max_rel_err = 0.0;
  bool ok = false;
};

struct Options {
  int seeds = 20;
  double tolerance = 1e-4;
};

// Finite-difference validation of every differentiable primitive and of the
// full loss family, across `seeds` random draws each.
std::vector<OpCheck> run(const Options& options);

bool all_ok(const std::vector<OpCheck>& checks);

}  // namespace cyclespec::gradcheck
