// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cyclespec/errors.hpp"

namespace cyclespec {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

// Dense n-dimensional array of 64-bit floats, flat row-major storage.
// Immutable by convention once handed to a tape.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, Eigen::ArrayXd values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values, bool requires_grad = false);

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index extent(Index axis) const { return shape_.at(axis); }
  Index numel() const { return values_.size(); }
  bool is_scalar() const { return values_.size() == 1; }

  const Eigen::ArrayXd& values() const { return values_; }
  Eigen::ArrayXd& values() { return values_; }
  double scalar_value() const;

  // Row-major element access for rank 1..3.
  double operator()(Index i) const { return values_[i]; }
  double operator()(Index i, Index j) const {
    return values_[i * shape_[1] + j];
  }
  double operator()(Index i, Index j, Index k) const {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double& operator()(Index i) { return values_[i]; }
  double& operator()(Index i, Index j) { return values_[i * shape_[1] + j]; }
  double& operator()(Index i, Index j, Index k) {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }

  bool requires_grad = false;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_string() const;

 private:
  Shape shape_;
  Eigen::ArrayXd values_;
};

Index shape_numel(const Shape& shape);
void ensure_finite(const Eigen::ArrayXd& values, const char* op);

class Tape;

// Handle to a node on a tape. Cheap to copy; invalid when default-built.
struct Var {
  Tape* tape = nullptr;
  std::int32_t id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Ordered record of primitive ops. Nodes are appended in evaluation order,
// so node inputs always precede the node itself; one reverse sweep from the
// loss populates every reachable gradient. Single-writer.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf carrying the tensor's requires_grad flag (parameters, inputs).
  Var leaf(Tensor value);
  // Leaf that never requires grad (targets, noise draws).
  Var constant(Tensor value);

  const Tensor& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Gradient of the last backward()'s loss w.r.t. node v.
  // TapeError if backward has not touched v.
  const Eigen::ArrayXd& grad(Var v) const;
  bool has_grad(Var v) const;

  friend void backward(Tape& tape, Var loss);

  // -- primitive ops ------------------------------------------------------
  friend Var add(Var a, Var b);
  friend Var sub(Var a, Var b);
  friend Var mul(Var a, Var b);
  friend Var affine(Var a, double scale, double shift);
  friend Var exp(Var a);
  friend Var log1p(Var a);
  friend Var softplus(Var a);
  friend Var leaky_relu(Var a, double slope);
  friend Var sum(Var a);
  friend Var sq_sum(Var a);
  friend Var conv1d(Var input, Var kernels, Var bias, Index stride,
                    Index padding);
  friend Var resample_rows(Var a, Index out_rows);
  friend Var concat_rows(Var a, Var b);

 private:
  struct Node {
    Tensor value;
    std::array<std::int32_t, 3> inputs{-1, -1, -1};
    std::function<void(Tape&, std::int32_t)> backward;
    bool requires_grad = false;
  };

  Var push(Tensor value, std::array<std::int32_t, 3> inputs,
           std::function<void(Tape&, std::int32_t)> back);
  const Node& node(Var v) const;
  void check_owned(Var v, const char* op) const;

  Eigen::ArrayXd& grad_slot(std::int32_t id);
  void accumulate(std::int32_t id, const Eigen::ArrayXd& g);

  std::vector<Node> nodes_;
  std::vector<Eigen::ArrayXd> grads_;  // empty array == not yet touched
};

// Elementwise and structural primitives (also declared as tape friends).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var affine(Var a, double scale, double shift);
Var exp(Var a);
Var log1p(Var a);
Var softplus(Var a);
Var leaky_relu(Var a, double slope);
Var sum(Var a);
Var sq_sum(Var a);
Var conv1d(Var input, Var kernels, Var bias, Index stride, Index padding);
Var resample_rows(Var a, Index out_rows);
Var concat_rows(Var a, Var b);

inline Var scale(Var a, double c) { return affine(a, c, 0.0); }

// Reverse accumulation from a scalar loss node. Gradients are then readable
// via Tape::grad for every requires_grad node the loss depends on.
void backward(Tape& tape, Var loss);

// -- Adam -----------------------------------------------------------------

// Moments are stored flat, index-aligned with the parameter list given at
// construction.
struct AdamState {
  std::vector<Eigen::ArrayXd> first_moment;
  std::vector<Eigen::ArrayXd> second_moment;
  std::int64_t step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState create(const std::vector<Tensor*>& params, double lr,
                          double beta1 = 0.9, double beta2 = 0.999,
                          double epsilon = 1e-8);
};

// One bias-corrected Adam update. Gradients must be index-aligned and
// shape-matched with params; ShapeError otherwise.
void adam_step(const std::vector<Tensor*>& params,
               const std::vector<Eigen::ArrayXd>& grads, AdamState& state);

// Scales gradients in place so their global L2 norm is at most max_norm.
void clip_global_norm(std::vector<Eigen::ArrayXd>& grads, double max_norm);

}  // namespace cyclespec
