// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace cyclespec {

namespace {

using RowMajorMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;

std::string shape_to_string(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << "x";
    os << s[i];
  }
  os << "]";
  return os.str();
}

// Patch matrix for conv1d: column t' holds the padded input window feeding
// output frame t', rows ordered (channel, tap).
Eigen::MatrixXd im2col(const Tensor& input, Index kernel, Index stride,
                       Index padding, Index out_len) {
  const Index channels = input.extent(0);
  const Index len = input.extent(1);
  Eigen::MatrixXd patches(channels * kernel, out_len);
  for (Index t = 0; t < out_len; ++t) {
    const Index base = t * stride - padding;
    for (Index c = 0; c < channels; ++c) {
      for (Index k = 0; k < kernel; ++k) {
        const Index src = base + k;
        patches(c * kernel + k, t) =
            (src >= 0 && src < len) ? input(c, src) : 0.0;
      }
    }
  }
  return patches;
}

}  // namespace

Tensor::Tensor(Shape shape, Eigen::ArrayXd values, bool requires_grad_flag)
    : requires_grad(requires_grad_flag),
      shape_(std::move(shape)),
      values_(std::move(values)) {
  if (shape_numel(shape_) != values_.size()) {
    throw ShapeError("tensor shape " + shape_to_string(shape_) +
                     " does not match data length " +
                     std::to_string(values_.size()));
  }
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const Index n = shape_numel(shape);
  return Tensor(std::move(shape), Eigen::ArrayXd::Zero(n), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const Index n = shape_numel(shape);
  return Tensor(std::move(shape), Eigen::ArrayXd::Constant(n, value),
                requires_grad);
}

Tensor Tensor::scalar(double value) {
  return Tensor({1}, Eigen::ArrayXd::Constant(1, value));
}

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
  Eigen::ArrayXd data(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) data[i] = values[i];
  return Tensor({static_cast<Index>(values.size())}, std::move(data),
                requires_grad);
}

double Tensor::scalar_value() const {
  if (!is_scalar()) {
    throw ShapeError("expected scalar tensor, got shape " + shape_string());
  }
  return values_[0];
}

std::string Tensor::shape_string() const { return shape_to_string(shape_); }

Index shape_numel(const Shape& shape) {
  Index n = 1;
  for (const Index e : shape) {
    if (e <= 0) throw ShapeError("non-positive extent in tensor shape");
    n *= e;
  }
  return n;
}

void ensure_finite(const Eigen::ArrayXd& values, const char* op) {
  if (!values.allFinite()) {
    throw NumericsError(std::string("non-finite value produced by ") + op);
  }
}

// -- Tape ------------------------------------------------------------------

Var Tape::push(Tensor value, std::array<std::int32_t, 3> inputs,
               std::function<void(Tape&, std::int32_t)> back) {
  Node n;
  n.value = std::move(value);
  n.inputs = inputs;
  n.backward = std::move(back);
  for (const auto in : inputs) {
    if (in >= 0 && nodes_[in].requires_grad) n.requires_grad = true;
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::leaf(Tensor value) {
  ensure_finite(value.values(), "leaf");
  const bool rg = value.requires_grad;
  Var v = push(std::move(value), {-1, -1, -1}, nullptr);
  nodes_[v.id].requires_grad = rg;
  return v;
}

Var Tape::constant(Tensor value) {
  ensure_finite(value.values(), "constant");
  value.requires_grad = false;
  return push(std::move(value), {-1, -1, -1}, nullptr);
}

const Tape::Node& Tape::node(Var v) const {
  check_owned(v, "value");
  return nodes_[v.id];
}

void Tape::check_owned(Var v, const char* op) const {
  if (v.tape != this || v.id < 0 ||
      v.id >= static_cast<std::int32_t>(nodes_.size())) {
    throw TapeError(std::string(op) + ": value does not live on this tape");
  }
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

bool Tape::has_grad(Var v) const {
  check_owned(v, "grad");
  return grads_.size() == nodes_.size() && grads_[v.id].size() > 0;
}

const Eigen::ArrayXd& Tape::grad(Var v) const {
  check_owned(v, "grad");
  if (grads_.size() != nodes_.size() || grads_[v.id].size() == 0) {
    throw TapeError("gradient not populated for node; run backward first");
  }
  return grads_[v.id];
}

Eigen::ArrayXd& Tape::grad_slot(std::int32_t id) {
  if (grads_[id].size() == 0) {
    grads_[id] = Eigen::ArrayXd::Zero(nodes_[id].value.numel());
  }
  return grads_[id];
}

void Tape::accumulate(std::int32_t id, const Eigen::ArrayXd& g) {
  grad_slot(id) += g;
}

void backward(Tape& tape, Var loss) {
  tape.check_owned(loss, "backward");
  const Tensor& lv = tape.nodes_[loss.id].value;
  if (!lv.is_scalar()) {
    throw ShapeError("backward requires a scalar loss, got shape " +
                     lv.shape_string());
  }
  tape.grads_.assign(tape.nodes_.size(), Eigen::ArrayXd());
  tape.grad_slot(loss.id)[0] = 1.0;
  for (std::int32_t id = loss.id; id >= 0; --id) {
    const auto& n = tape.nodes_[id];
    if (!n.backward || !n.requires_grad) continue;
    if (tape.grads_[id].size() == 0) continue;  // not reached from the loss
    n.backward(tape, id);
  }
}

// -- elementwise ops --------------------------------------------------------

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() +
                     " vs " + b.shape_string());
  }
}

void require_same_tape(Var a, Var b, const char* op) {
  if (a.tape != b.tape) {
    throw TapeError(std::string(op) + ": operands live on different tapes");
  }
}

}  // namespace

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same_shape(av, bv, "add");
  Tensor out(av.shape(), av.values() + bv.values());
  ensure_finite(out.values(), "add");
  const auto ia = a.id, ib = b.id;
  return t.push(std::move(out), {ia, ib, -1},
                [ia, ib](Tape& tp, std::int32_t id) {
                  const Eigen::ArrayXd& g = tp.grads_[id];
                  if (tp.nodes_[ia].requires_grad) tp.accumulate(ia, g);
                  if (tp.nodes_[ib].requires_grad) tp.accumulate(ib, g);
                });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same_shape(av, bv, "sub");
  Tensor out(av.shape(), av.values() - bv.values());
  ensure_finite(out.values(), "sub");
  const auto ia = a.id, ib = b.id;
  return t.push(std::move(out), {ia, ib, -1},
                [ia, ib](Tape& tp, std::int32_t id) {
                  const Eigen::ArrayXd& g = tp.grads_[id];
                  if (tp.nodes_[ia].requires_grad) tp.accumulate(ia, g);
                  if (tp.nodes_[ib].requires_grad) tp.grad_slot(ib) -= g;
                });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same_shape(av, bv, "mul");
  Tensor out(av.shape(), av.values() * bv.values());
  ensure_finite(out.values(), "mul");
  const auto ia = a.id, ib = b.id;
  return t.push(std::move(out), {ia, ib, -1},
                [ia, ib](Tape& tp, std::int32_t id) {
                  const Eigen::ArrayXd& g = tp.grads_[id];
                  if (tp.nodes_[ia].requires_grad) {
                    tp.grad_slot(ia) += g * tp.nodes_[ib].value.values();
                  }
                  if (tp.nodes_[ib].requires_grad) {
                    tp.grad_slot(ib) += g * tp.nodes_[ia].value.values();
                  }
                });
}

Var affine(Var a, double scale, double shift) {
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  Tensor out(av.shape(), scale * av.values() + shift);
  ensure_finite(out.values(), "affine");
  const auto ia = a.id;
  return t.push(std::move(out), {ia, -1, -1},
                [ia, scale](Tape& tp, std::int32_t id) {
                  tp.grad_slot(ia) += scale * tp.grads_[id];
                });
}

Var exp(Var a) {
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  Tensor out(av.shape(), av.values().exp());
  ensure_finite(out.values(), "exp");
  const auto ia = a.id;
  return t.push(std::move(out), {ia, -1, -1},
                [ia](Tape& tp, std::int32_t id) {
                  tp.grad_slot(ia) +=
                      tp.grads_[id] * tp.nodes_[id].value.values();
                });
}

Var log1p(Var a) {
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  Tensor out(av.shape(), av.values().log1p());
  ensure_finite(out.values(), "log1p");
  const auto ia = a.id;
  return t.push(std::move(out), {ia, -1, -1},
                [ia](Tape& tp, std::int32_t id) {
                  tp.grad_slot(ia) +=
                      tp.grads_[id] / (1.0 + tp.nodes_[ia].value.values());
                });
}

Var softplus(Var a) {
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  Eigen::ArrayXd y(av.numel());
  for (Index i = 0; i < av.numel(); ++i) {
    const double x = av.values()[i];
    y[i] = x > 30.0 ? x : (x < -30.0 ? std::exp(x) : std::log1p(std::exp(x)));
  }
  Tensor out(av.shape(), std::move(y));
  ensure_finite(out.values(), "softplus");
  const auto ia = a.id;
  return t.push(std::move(out), {ia, -1, -1},
                [ia](Tape& tp, std::int32_t id) {
                  const Eigen::ArrayXd& x = tp.nodes_[ia].value.values();
                  tp.grad_slot(ia) +=
                      tp.grads_[id] / (1.0 + (-x).exp());
                });
}

Var leaky_relu(Var a, double slope) {
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  Tensor out(av.shape(),
             (av.values() >= 0.0).select(av.values(), slope * av.values()));
  ensure_finite(out.values(), "leaky_relu");
  const auto ia = a.id;
  return t.push(std::move(out), {ia, -1, -1},
                [ia, slope](Tape& tp, std::int32_t id) {
                  const Eigen::ArrayXd& x = tp.nodes_[ia].value.values();
                  const Eigen::ArrayXd& g = tp.grads_[id];
                  tp.grad_slot(ia) += (x >= 0.0).select(g, slope * g);
                });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  Tensor out = Tensor::scalar(av.values().sum());
  ensure_finite(out.values(), "sum");
  const auto ia = a.id;
  return t.push(std::move(out), {ia, -1, -1},
                [ia](Tape& tp, std::int32_t id) {
                  tp.grad_slot(ia) += tp.grads_[id][0];
                });
}

Var sq_sum(Var a) {
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  Tensor out = Tensor::scalar(av.values().square().sum());
  ensure_finite(out.values(), "sq_sum");
  const auto ia = a.id;
  return t.push(std::move(out), {ia, -1, -1},
                [ia](Tape& tp, std::int32_t id) {
                  tp.grad_slot(ia) +=
                      (2.0 * tp.grads_[id][0]) * tp.nodes_[ia].value.values();
                });
}

// -- conv1d -----------------------------------------------------------------

Var conv1d(Var input, Var kernels, Var bias, Index stride, Index padding) {
  require_same_tape(input, kernels, "conv1d");
  require_same_tape(input, bias, "conv1d");
  Tape& t = *input.tape;
  const Tensor& in = t.value(input);
  const Tensor& w = t.value(kernels);
  const Tensor& b = t.value(bias);

  if (in.rank() != 2 || w.rank() != 3 || b.rank() != 1) {
    throw ShapeError("conv1d expects input [C_in x T], kernels "
                     "[C_out x C_in x K], bias [C_out]");
  }
  const Index c_in = in.extent(0);
  const Index len = in.extent(1);
  const Index c_out = w.extent(0);
  const Index kernel = w.extent(2);
  if (w.extent(1) != c_in) {
    throw ShapeError("conv1d: kernel input channels " +
                     std::to_string(w.extent(1)) + " != input channels " +
                     std::to_string(c_in));
  }
  if (b.extent(0) != c_out) {
    throw ShapeError("conv1d: bias length does not match output channels");
  }
  if (stride < 1) throw ConfigError("conv1d: stride must be >= 1");
  if (padding < 0) throw ConfigError("conv1d: padding must be >= 0");
  if (kernel > len + 2 * padding) {
    throw ShapeError("conv1d: kernel longer than padded input");
  }

  const Index out_len = (len + 2 * padding - kernel) / stride + 1;
  const Eigen::MatrixXd patches = im2col(in, kernel, stride, padding, out_len);
  ConstRowMajorMap wmap(w.values().data(), c_out, c_in * kernel);

  Tensor out = Tensor::zeros({c_out, out_len});
  RowMajorMap omap(out.values().data(), c_out, out_len);
  omap.noalias() = wmap * patches;
  for (Index c = 0; c < c_out; ++c) omap.row(c).array() += b(c);
  ensure_finite(out.values(), "conv1d");

  const auto ii = input.id, iw = kernels.id, ib = bias.id;
  return t.push(
      std::move(out), {ii, iw, ib},
      [ii, iw, ib, stride, padding, kernel, out_len](Tape& tp,
                                                     std::int32_t id) {
        const Tensor& in_v = tp.nodes_[ii].value;
        const Tensor& w_v = tp.nodes_[iw].value;
        const Index c_in_b = in_v.extent(0);
        const Index len_b = in_v.extent(1);
        const Index c_out_b = w_v.extent(0);
        ConstRowMajorMap gmap(tp.grads_[id].data(), c_out_b, out_len);

        if (tp.nodes_[iw].requires_grad || tp.nodes_[ii].requires_grad) {
          const Eigen::MatrixXd patches_b =
              im2col(in_v, kernel, stride, padding, out_len);
          if (tp.nodes_[iw].requires_grad) {
            RowMajorMap dw(tp.grad_slot(iw).data(), c_out_b, c_in_b * kernel);
            dw.noalias() += gmap * patches_b.transpose();
          }
          if (tp.nodes_[ii].requires_grad) {
            ConstRowMajorMap wmap_b(w_v.values().data(), c_out_b,
                                    c_in_b * kernel);
            const Eigen::MatrixXd dpatches = wmap_b.transpose() * gmap;
            Eigen::ArrayXd& din = tp.grad_slot(ii);
            for (Index tcol = 0; tcol < out_len; ++tcol) {
              const Index base = tcol * stride - padding;
              for (Index c = 0; c < c_in_b; ++c) {
                for (Index k = 0; k < kernel; ++k) {
                  const Index src = base + k;
                  if (src >= 0 && src < len_b) {
                    din[c * len_b + src] += dpatches(c * kernel + k, tcol);
                  }
                }
              }
            }
          }
        }
        if (tp.nodes_[ib].requires_grad) {
          Eigen::ArrayXd& db = tp.grad_slot(ib);
          for (Index c = 0; c < c_out_b; ++c) db[c] += gmap.row(c).sum();
        }
      });
}

// -- structural ops ----------------------------------------------------------

// Linear interpolation along the row (frequency) axis with endpoint
// alignment: row r' reads source position r' * (R-1) / (R'-1).
Var resample_rows(Var a, Index out_rows) {
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  if (av.rank() != 2) throw ShapeError("resample_rows expects a rank-2 tensor");
  if (out_rows < 1) throw ShapeError("resample_rows: out_rows must be >= 1");
  const Index rows = av.extent(0);
  const Index cols = av.extent(1);
  if (rows == out_rows) {
    Tensor out(av.shape(), av.values());
    const auto ia = a.id;
    return t.push(std::move(out), {ia, -1, -1},
                  [ia](Tape& tp, std::int32_t id) {
                    tp.grad_slot(ia) += tp.grads_[id];
                  });
  }
  Tensor out = Tensor::zeros({out_rows, cols});
  std::vector<Index> lo(out_rows), hi(out_rows);
  std::vector<double> frac(out_rows);
  for (Index r = 0; r < out_rows; ++r) {
    const double pos = (out_rows == 1)
                           ? 0.0
                           : static_cast<double>(r) * (rows - 1) /
                                 static_cast<double>(out_rows - 1);
    lo[r] = static_cast<Index>(pos);
    hi[r] = lo[r] + 1 < rows ? lo[r] + 1 : rows - 1;
    frac[r] = pos - static_cast<double>(lo[r]);
  }
  for (Index r = 0; r < out_rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      out(r, c) = (1.0 - frac[r]) * av(lo[r], c) + frac[r] * av(hi[r], c);
    }
  }
  ensure_finite(out.values(), "resample_rows");
  const auto ia = a.id;
  return t.push(std::move(out), {ia, -1, -1},
                [ia, lo, hi, frac, cols](Tape& tp, std::int32_t id) {
                  Eigen::ArrayXd& din = tp.grad_slot(ia);
                  const Eigen::ArrayXd& g = tp.grads_[id];
                  for (std::size_t r = 0; r < lo.size(); ++r) {
                    for (Index c = 0; c < cols; ++c) {
                      const double gv = g[static_cast<Index>(r) * cols + c];
                      din[lo[r] * cols + c] += (1.0 - frac[r]) * gv;
                      din[hi[r] * cols + c] += frac[r] * gv;
                    }
                  }
                });
}

Var concat_rows(Var a, Var b) {
  require_same_tape(a, b, "concat_rows");
  Tape& t = *a.tape;
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.extent(1) != bv.extent(1)) {
    throw ShapeError("concat_rows expects rank-2 tensors with equal columns");
  }
  const Index ra = av.extent(0), rb = bv.extent(0), cols = av.extent(1);
  Tensor out = Tensor::zeros({ra + rb, cols});
  out.values().head(ra * cols) = av.values();
  out.values().tail(rb * cols) = bv.values();
  const auto ia = a.id, ib = b.id;
  return t.push(std::move(out), {ia, ib, -1},
                [ia, ib, ra, rb, cols](Tape& tp, std::int32_t id) {
                  const Eigen::ArrayXd& g = tp.grads_[id];
                  if (tp.nodes_[ia].requires_grad) {
                    tp.grad_slot(ia) += g.head(ra * cols);
                  }
                  if (tp.nodes_[ib].requires_grad) {
                    tp.grad_slot(ib) += g.tail(rb * cols);
                  }
                });
}

// -- Adam --------------------------------------------------------------------

AdamState AdamState::create(const std::vector<Tensor*>& params, double lr,
                            double beta1, double beta2, double epsilon) {
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  for (const Tensor* p : params) {
    s.first_moment.push_back(Eigen::ArrayXd::Zero(p->numel()));
    s.second_moment.push_back(Eigen::ArrayXd::Zero(p->numel()));
  }
  return s;
}

void adam_step(const std::vector<Tensor*>& params,
               const std::vector<Eigen::ArrayXd>& grads, AdamState& state) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: parameter/gradient/moment count mismatch");
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Eigen::ArrayXd& g = grads[i];
    if (g.size() != p.numel() ||
        state.first_moment[i].size() != p.numel()) {
      throw ShapeError("adam_step: gradient/moment shape mismatch at index " +
                       std::to_string(i));
    }
    Eigen::ArrayXd& m = state.first_moment[i];
    Eigen::ArrayXd& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.square();
    p.values() -=
        state.lr * (m / bc1) / ((v / bc2).sqrt() + state.epsilon);
  }
}

void clip_global_norm(std::vector<Eigen::ArrayXd>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.square().sum();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& g : grads) g *= s;
  }
}

}  // namespace cyclespec
