// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/gradcheck.hpp"

#include <algorithm>

#include "cyclespec/loss.hpp"
#include "cyclespec/model.hpp"
#include "cyclespec/rng.hpp"

namespace cyclespec::gradcheck {

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo, double hi,
                     bool requires_grad = true) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (Index i = 0; i < t.numel(); ++i) {
    t.values()[i] = rng.uniform(lo, hi);
  }
  return t;
}

// Values bounded away from zero so kinked activations see no crossing
// within the finite-difference step.
Tensor random_signed_tensor(Shape shape, Rng& rng, bool requires_grad = true) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (Index i = 0; i < t.numel(); ++i) {
    const double mag = rng.uniform(0.3, 1.5);
    t.values()[i] = rng.uniform() < 0.5 ? -mag : mag;
  }
  return t;
}

// Reduces any output to a scalar through fixed random weights so every
// output element influences the loss.
Var weighted_probe(Tape& tape, Var x, Rng& rng) {
  Tensor w = Tensor::zeros(tape.value(x).shape());
  for (Index i = 0; i < w.numel(); ++i) w.values()[i] = rng.uniform(-1, 1);
  return sum(mul(x, tape.constant(w)));
}

struct Case {
  std::string name;
  std::function<double(std::uint64_t seed)> max_err;  // one seed's worst error
};

std::vector<Case> make_cases() {
  std::vector<Case> cases;
  const auto add_case = [&](std::string name,
                            std::function<double(std::uint64_t)> fn) {
    cases.push_back(Case{std::move(name), std::move(fn)});
  };

  const auto binary_case = [&](const std::string& name, auto op) {
    add_case(name, [op](std::uint64_t seed) {
      Rng rng(seed);
      std::vector<Tensor> inputs{random_tensor({3, 4}, rng, -2, 2),
                                 random_tensor({3, 4}, rng, -2, 2)};
      Rng probe_rng(derive_seed(seed, "probe"));
      Tensor w = random_tensor({3, 4}, probe_rng, -1, 1, false);
      return max_fd_error(
          [op, w](Tape& t, const std::vector<Var>& v) {
            return sum(mul(op(v[0], v[1]), t.constant(w)));
          },
          inputs);
    });
  };
  binary_case("add", [](Var a, Var b) { return add(a, b); });
  binary_case("sub", [](Var a, Var b) { return sub(a, b); });
  binary_case("mul", [](Var a, Var b) { return mul(a, b); });

  const auto unary_case = [&](const std::string& name, auto op, double lo,
                              double hi, bool signed_inputs = false) {
    add_case(name, [op, lo, hi, signed_inputs](std::uint64_t seed) {
      Rng rng(seed);
      std::vector<Tensor> inputs{signed_inputs
                                     ? random_signed_tensor({4, 3}, rng)
                                     : random_tensor({4, 3}, rng, lo, hi)};
      Rng probe_rng(derive_seed(seed, "probe"));
      Tensor w = random_tensor({4, 3}, probe_rng, -1, 1, false);
      return max_fd_error(
          [op, w](Tape& t, const std::vector<Var>& v) {
            return sum(mul(op(v[0]), t.constant(w)));
          },
          inputs);
    });
  };
  unary_case("affine", [](Var a) { return affine(a, 1.7, -0.3); }, -2, 2);
  unary_case("exp", [](Var a) { return exp(a); }, -1.5, 1.5);
  unary_case("log1p", [](Var a) { return log1p(a); }, 0.05, 2.0);
  unary_case("softplus", [](Var a) { return softplus(a); }, -2, 2);
  unary_case("leaky_relu", [](Var a) { return leaky_relu(a, 0.2); }, 0, 0,
             /*signed_inputs=*/true);

  const auto reduction_case = [&](const std::string& name, auto op) {
    add_case(name, [op](std::uint64_t seed) {
      Rng rng(seed);
      std::vector<Tensor> inputs{random_tensor({4, 3}, rng, -2, 2)};
      return max_fd_error(
          [op](Tape& t, const std::vector<Var>& v) {
            (void)t;
            return op(v[0]);
          },
          inputs);
    });
  };
  reduction_case("sum", [](Var a) { return sum(a); });
  reduction_case("sq_sum", [](Var a) { return sq_sum(a); });

  add_case("conv1d", [](std::uint64_t seed) {
    Rng rng(seed);
    const Index stride = 1 + static_cast<Index>(rng.integer(2));
    const Index padding = static_cast<Index>(rng.integer(3));
    std::vector<Tensor> inputs{random_tensor({2, 6}, rng, -1.5, 1.5),
                               random_tensor({3, 2, 3}, rng, -1, 1),
                               random_tensor({3}, rng, -0.5, 0.5)};
    Rng probe_rng(derive_seed(seed, "probe"));
    const Index out_len = (6 + 2 * padding - 3) / stride + 1;
    Tensor w = random_tensor({3, out_len}, probe_rng, -1, 1, false);
    return max_fd_error(
        [w, stride, padding](Tape& t, const std::vector<Var>& v) {
          return sum(mul(conv1d(v[0], v[1], v[2], stride, padding),
                         t.constant(w)));
        },
        inputs);
  });

  add_case("resample_rows", [](std::uint64_t seed) {
    Rng rng(seed);
    const Index out_rows = 2 + static_cast<Index>(rng.integer(7));
    std::vector<Tensor> inputs{random_tensor({5, 3}, rng, -2, 2)};
    Rng probe_rng(derive_seed(seed, "probe"));
    Tensor w = random_tensor({out_rows, 3}, probe_rng, -1, 1, false);
    return max_fd_error(
        [w, out_rows](Tape& t, const std::vector<Var>& v) {
          return sum(mul(resample_rows(v[0], out_rows), t.constant(w)));
        },
        inputs);
  });

  add_case("concat_rows", [](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Tensor> inputs{random_tensor({2, 3}, rng, -2, 2),
                               random_tensor({4, 3}, rng, -2, 2)};
    Rng probe_rng(derive_seed(seed, "probe"));
    Tensor w = random_tensor({6, 3}, probe_rng, -1, 1, false);
    return max_fd_error(
        [w](Tape& t, const std::vector<Var>& v) {
          return sum(mul(concat_rows(v[0], v[1]), t.constant(w)));
        },
        inputs);
  });

  add_case("sample_latent", [](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Tensor> inputs{random_tensor({4, 3}, rng, -1, 1),
                               random_tensor({4, 3}, rng, -1, 1)};
    Tensor noise = random_tensor({4, 3}, rng, -1, 1, false);
    Rng probe_rng(derive_seed(seed, "probe"));
    Tensor w = random_tensor({4, 3}, probe_rng, -1, 1, false);
    return max_fd_error(
        [noise, w](Tape& t, const std::vector<Var>& v) {
          Var z = model::sample_latent(t, v[0], v[1], noise);
          return sum(mul(z, t.constant(w)));
        },
        inputs);
  });

  // Eq. 3-7/9 pattern: squared-L2 bank losses against fixed targets.
  const auto bank_case = [&](const std::string& name) {
    add_case(name, [](std::uint64_t seed) {
      Rng rng(seed);
      std::vector<Tensor> inputs{random_tensor({4, 3}, rng, -2, 2),
                                 random_tensor({3, 2}, rng, -2, 2)};
      Rng target_rng(derive_seed(seed, "target"));
      Tensor t1 = random_tensor({4, 3}, target_rng, -2, 2, false);
      Tensor t2 = random_tensor({3, 2}, target_rng, -2, 2, false);
      return max_fd_error(
          [t1, t2](Tape& t, const std::vector<Var>& v) {
            return loss::bank_sq_loss(t, {t.constant(t1), t.constant(t2)},
                                      {v[0], v[1]});
          },
          inputs);
    });
  };
  bank_case("amplitude_loss");
  bank_case("phase_loss");
  bank_case("mixture_losses");
  bank_case("bc_losses");

  // Eq. 8/10: base + theta1 * bc, both differentiable operands.
  add_case("combined_losses", [](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Tensor> inputs{random_tensor({3, 3}, rng, -2, 2),
                               random_tensor({3, 3}, rng, -2, 2)};
    Rng target_rng(derive_seed(seed, "target"));
    Tensor tgt = random_tensor({3, 3}, target_rng, -2, 2, false);
    return max_fd_error(
        [tgt](Tape& t, const std::vector<Var>& v) {
          Var base = sq_sum(sub(t.constant(tgt), v[0]));
          Var bc = sq_sum(sub(t.constant(tgt), v[1]));
          return loss::combined_loss(t, base, bc, 0.001);
        },
        inputs);
  });

  add_case("kl_loss", [](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Tensor> inputs{random_tensor({4, 3}, rng, -1, 1),
                               random_tensor({4, 3}, rng, -1, 1)};
    return max_fd_error(
        [](Tape& t, const std::vector<Var>& v) {
          return loss::kl_loss(t, v[0], v[1]);
        },
        inputs);
  });

  // Eq. 11-13 composition: theta2*KL + J_S + (J_S + theta3*latent).
  add_case("fae_total", [](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Tensor> inputs{
        random_tensor({3, 2}, rng, -2, 2), random_tensor({3, 2}, rng, -2, 2),
        random_tensor({2, 2}, rng, -1, 1), random_tensor({2, 2}, rng, -1, 1)};
    Rng target_rng(derive_seed(seed, "target"));
    Tensor amp_t = random_tensor({3, 2}, target_rng, -2, 2, false);
    Tensor ph_t = random_tensor({3, 2}, target_rng, -2, 2, false);
    Tensor z_t = random_tensor({2, 2}, target_rng, -1, 1, false);
    return max_fd_error(
        [amp_t, ph_t, z_t](Tape& t, const std::vector<Var>& v) {
          Var j_sa = sq_sum(sub(t.constant(amp_t), v[0]));
          Var j_sp = sq_sum(sub(t.constant(ph_t), v[1]));
          Var j_s = add(j_sa, j_sp);
          Var latent =
              loss::latent_sq_loss(t, {t.constant(z_t)}, {v[2]});
          Var j_cyc = add(j_s, scale(latent, 0.001));
          Var j_kl = loss::kl_loss(t, v[3], v[2]);
          return add(add(scale(j_kl, 0.001), j_s), j_cyc);
        },
        inputs);
  });

  return cases;
}

}  // namespace

std::vector<OpCheck> run(const Options& options) {
  std::vector<OpCheck> out;
  for (const auto& c : make_cases()) {
    OpCheck check;
    check.name = c.name;
    for (int s = 0; s < options.seeds; ++s) {
      check.max_rel_err = std::max(
          check.max_rel_err,
          c.max_err(derive_seed(0xC05C5EC, c.name,
                                {static_cast<std::uint64_t>(s)})));
    }
    check.ok = check.max_rel_err <= options.tolerance;
    out.push_back(std::move(check));
  }
  return out;
}

bool all_ok(const std::vector<OpCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const OpCheck& c) { return c.ok; });
}

}  // namespace cyclespec::gradcheck
