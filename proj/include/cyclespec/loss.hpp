// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cyclespec/tensor.hpp"

// The loss family: squared-L2 reconstruction losses over the spectra bank
// (amplitude, phase, mixture variants), the backward-cycle combinations,
// the KL term, the spectra sum and the cycle loss with its latent term.
// Each loss exists twice: on plain tensors (reporting, contract checks) and
// on tape variables (the training graph). Norms are sums of squared
// elements over the full plane; no size normalization.
namespace cyclespec::loss {

struct LossWeights {
  double theta1 = 0.001;  // backward-cycle weight
  double theta2 = 0.001;  // KL weight
  double theta3 = 0.001;  // latent-cycle weight
};

// Per-term scalar values for one epoch (speech terms for the FAE phase,
// mixture terms for the DAE phase; unused terms stay 0).
struct LossReport {
  std::int64_t epoch = 0;
  double j_sa = 0, j_sp = 0;    // running (combined) amplitude/phase losses
  double j_ma = 0, j_mp = 0;
  double j_a2p = 0, j_p2a = 0;  // backward-cycle terms
  double j_kl = 0;
  double j_cyc = 0;
  double j_total = 0;
};

// Rows "epoch,term,value", one file per training phase.
void write_loss_csv(const std::filesystem::path& path,
                    const std::vector<LossReport>& reports);

// -- plain (reporting) versions ----------------------------------------------

double bank_sq_loss(const std::vector<Tensor>& target,
                    const std::vector<Tensor>& estimate);

inline double amplitude_loss(const std::vector<Tensor>& target_amp,
                             const std::vector<Tensor>& estimate_amp) {
  return bank_sq_loss(target_amp, estimate_amp);
}
inline double phase_loss(const std::vector<Tensor>& target_phase,
                         const std::vector<Tensor>& estimate_phase) {
  return bank_sq_loss(target_phase, estimate_phase);
}
inline std::pair<double, double> mixture_losses(
    const std::vector<Tensor>& target_amp,
    const std::vector<Tensor>& estimate_amp,
    const std::vector<Tensor>& target_phase,
    const std::vector<Tensor>& estimate_phase) {
  return {bank_sq_loss(target_amp, estimate_amp),
          bank_sq_loss(target_phase, estimate_phase)};
}
inline double bc_phase_loss(const std::vector<Tensor>& target_phase,
                            const std::vector<Tensor>& bc_phase) {
  return bank_sq_loss(target_phase, bc_phase);
}
inline double bc_amplitude_loss(const std::vector<Tensor>& target_amp,
                                const std::vector<Tensor>& bc_amp) {
  return bank_sq_loss(target_amp, bc_amp);
}

// J_Sp + theta1 * J_{a->p}; InputError on negative inputs.
double combined_phase_loss(double j_sp, double j_a2p, double theta1);
// J_Sa + theta1 * J_{p->a}.
double combined_amplitude_loss(double j_sa, double j_p2a, double theta1);

// 0.5 * sum(exp(log_var) + mean^2 - 1 - log_var).
double kl_loss(const Tensor& mean, const Tensor& log_variance);

// J_S = amplitude term + phase term.
double spectra_loss(double j_sa, double j_sp);

// J_cyc = J_S + theta3 * sum_i ||Z^i - Zhat^i||^2.
double cycle_loss(double j_s, const std::vector<Tensor>& latents,
                  const std::vector<Tensor>& latents_hat, double theta3);

// J_FAE = theta2 * J_KL + J_S + J_cyc.
double fae_total(double j_kl, double j_s, double j_cyc, double theta2);

// -- tape (training graph) versions -------------------------------------------

Var bank_sq_loss(Tape& tape, const std::vector<Var>& target,
                 const std::vector<Var>& estimate);
Var combined_loss(Tape& tape, Var base, Var bc_term, double theta1);
Var kl_loss(Tape& tape, Var mean, Var log_variance);
Var latent_sq_loss(Tape& tape, const std::vector<Var>& latents,
                   const std::vector<Var>& latents_hat);

}  // namespace cyclespec::loss
