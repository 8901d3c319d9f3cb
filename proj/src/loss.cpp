// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/loss.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace cyclespec::loss {

namespace {

void require_nonnegative(double v, const char* name) {
  if (v < 0.0) {
    throw InputError(std::string("loss term ") + name + " is negative");
  }
}

void require_bank_match(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": bank resolution count mismatch");
  }
}

}  // namespace

void write_loss_csv(const std::filesystem::path& path,
                    const std::vector<LossReport>& reports) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write loss report: " + path.string());
  os << "epoch,term,value\n";
  os << std::setprecision(17);
  for (const auto& r : reports) {
    os << r.epoch << ",J_Sa," << r.j_sa << "\n";
    os << r.epoch << ",J_Sp," << r.j_sp << "\n";
    os << r.epoch << ",J_Ma," << r.j_ma << "\n";
    os << r.epoch << ",J_Mp," << r.j_mp << "\n";
    os << r.epoch << ",J_a2p," << r.j_a2p << "\n";
    os << r.epoch << ",J_p2a," << r.j_p2a << "\n";
    os << r.epoch << ",J_KL," << r.j_kl << "\n";
    os << r.epoch << ",J_cyc," << r.j_cyc << "\n";
    os << r.epoch << ",J_total," << r.j_total << "\n";
  }
}

double bank_sq_loss(const std::vector<Tensor>& target,
                    const std::vector<Tensor>& estimate) {
  require_bank_match(target.size(), estimate.size(), "bank_sq_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!target[i].same_shape(estimate[i])) {
      throw ShapeError("bank_sq_loss: plane shape mismatch at resolution " +
                       std::to_string(i + 1));
    }
    acc += (target[i].values() - estimate[i].values()).square().sum();
  }
  if (!std::isfinite(acc)) throw NumericsError("bank_sq_loss: non-finite");
  return acc;
}

double combined_phase_loss(double j_sp, double j_a2p, double theta1) {
  require_nonnegative(j_sp, "J_Sp");
  require_nonnegative(j_a2p, "J_a2p");
  return j_sp + theta1 * j_a2p;
}

double combined_amplitude_loss(double j_sa, double j_p2a, double theta1) {
  require_nonnegative(j_sa, "J_Sa");
  require_nonnegative(j_p2a, "J_p2a");
  return j_sa + theta1 * j_p2a;
}

double kl_loss(const Tensor& mean, const Tensor& log_variance) {
  if (!mean.same_shape(log_variance)) {
    throw ShapeError("kl_loss: mean/log_variance shape mismatch");
  }
  const double v = 0.5 * (log_variance.values().exp() +
                          mean.values().square() - 1.0 -
                          log_variance.values())
                             .sum();
  if (!std::isfinite(v)) throw NumericsError("kl_loss: non-finite");
  return v;
}

double spectra_loss(double j_sa, double j_sp) {
  require_nonnegative(j_sa, "J_Sa");
  require_nonnegative(j_sp, "J_Sp");
  return j_sa + j_sp;
}

double cycle_loss(double j_s, const std::vector<Tensor>& latents,
                  const std::vector<Tensor>& latents_hat, double theta3) {
  require_nonnegative(j_s, "J_S");
  return j_s + theta3 * bank_sq_loss(latents, latents_hat);
}

double fae_total(double j_kl, double j_s, double j_cyc, double theta2) {
  require_nonnegative(j_kl, "J_KL");
  require_nonnegative(j_s, "J_S");
  require_nonnegative(j_cyc, "J_cyc");
  return theta2 * j_kl + j_s + j_cyc;
}

Var bank_sq_loss(Tape& tape, const std::vector<Var>& target,
                 const std::vector<Var>& estimate) {
  require_bank_match(target.size(), estimate.size(), "bank_sq_loss");
  Var acc;
  for (std::size_t i = 0; i < target.size(); ++i) {
    Var term = sq_sum(sub(target[i], estimate[i]));
    acc = i == 0 ? term : add(acc, term);
  }
  (void)tape;
  return acc;
}

Var combined_loss(Tape& tape, Var base, Var bc_term, double theta1) {
  (void)tape;
  return add(base, scale(bc_term, theta1));
}

Var kl_loss(Tape& tape, Var mean, Var log_variance) {
  const Index n = tape.value(mean).numel();
  Var term = add(exp(log_variance), mul(mean, mean));
  Var sum_term = sum(term);
  Var sum_lv = sum(log_variance);
  // 0.5 * (sum(exp(lv) + mean^2) - numel - sum(lv))
  Var inner = sub(affine(sum_term, 1.0, -static_cast<double>(n)), sum_lv);
  return scale(inner, 0.5);
}

Var latent_sq_loss(Tape& tape, const std::vector<Var>& latents,
                   const std::vector<Var>& latents_hat) {
  return bank_sq_loss(tape, latents, latents_hat);
}

}  // namespace cyclespec::loss
