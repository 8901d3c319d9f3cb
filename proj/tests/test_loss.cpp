// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <fstream>

#include "cyclespec/loss.hpp"
#include "cyclespec/rng.hpp"
#include "oracles.hpp"

using namespace cyclespec;

namespace {

std::vector<Tensor> random_bank(std::uint64_t seed) {
  // Up to 4 x 16 x 8 as exercised by the oracle-equivalence contract.
  std::vector<Tensor> bank;
  Rng rng(seed);
  const Index sizes[4][2] = {{16, 8}, {9, 7}, {5, 8}, {3, 4}};
  for (int i = 0; i < 4; ++i) {
    Tensor t = Tensor::zeros({sizes[i][0], sizes[i][1]});
    for (Index e = 0; e < t.numel(); ++e) t.values()[e] = rng.uniform(-3, 3);
    bank.push_back(std::move(t));
  }
  return bank;
}

}  // namespace

TEST_CASE("amplitude loss of identical banks is zero") {
  const auto bank = random_bank(1);
  CHECK(loss::amplitude_loss(bank, bank) == 0.0);
}

TEST_CASE("amplitude loss single resolution hand value") {
  std::vector<Tensor> target{Tensor::row({1, 2})};
  std::vector<Tensor> estimate{Tensor::row({0, 0})};
  CHECK(loss::amplitude_loss(target, estimate) == doctest::Approx(5.0));
}

TEST_CASE("phase loss of constant offset is n*c^2") {
  const double c = 0.75;
  std::vector<Tensor> target{Tensor::zeros({4, 5})};
  std::vector<Tensor> estimate{Tensor::full({4, 5}, c)};
  CHECK(loss::phase_loss(target, estimate) ==
        doctest::Approx(20.0 * c * c).epsilon(1e-15));
}

TEST_CASE("bank losses match the scalar-loop oracle to 1e-12") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto a = random_bank(seed * 2 + 1);
    const auto b = random_bank(seed * 2 + 2);
    const double got = loss::amplitude_loss(a, b);
    const double want = oracles::bank_sq_loss(a, b);
    CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("bank losses are symmetric in their arguments") {
  const auto a = random_bank(5);
  const auto b = random_bank(6);
  CHECK(loss::amplitude_loss(a, b) == loss::amplitude_loss(b, a));
}

TEST_CASE("bank losses reject mismatched shapes") {
  auto a = random_bank(7);
  auto b = random_bank(8);
  b[2] = Tensor::zeros({4, 4});
  CHECK_THROWS_AS(loss::amplitude_loss(a, b), ShapeError);
  b = random_bank(8);
  b.pop_back();
  CHECK_THROWS_AS(loss::amplitude_loss(a, b), ShapeError);
}

TEST_CASE("mixture losses split amplitude and phase errors") {
  const auto bank = random_bank(9);
  auto amp_est = bank;
  amp_est[0].values()[0] += 2.0;
  const auto [j_ma, j_mp] = loss::mixture_losses(bank, amp_est, bank, bank);
  CHECK(j_ma == doctest::Approx(4.0));
  CHECK(j_mp == 0.0);
  const auto [z_ma, z_mp] = loss::mixture_losses(bank, bank, bank, bank);
  CHECK(z_ma == 0.0);
  CHECK(z_mp == 0.0);
}

TEST_CASE("backward-cycle losses: zero when equal, d^2 for one element") {
  const auto bank = random_bank(10);
  CHECK(loss::bc_phase_loss(bank, bank) == 0.0);
  auto bc = bank;
  bc[1].values()[3] += 1.5;
  CHECK(loss::bc_phase_loss(bank, bc) == doctest::Approx(2.25));
}

TEST_CASE("combined losses follow the theta1-weighted update") {
  CHECK(loss::combined_phase_loss(1.0, 2.0, 0.001) ==
        doctest::Approx(1.002).epsilon(1e-15));
  CHECK(loss::combined_phase_loss(3.25, 17.0, 0.0) == 3.25);  // exact
  CHECK(loss::combined_amplitude_loss(0.0, 4.0, 0.25) == doctest::Approx(1.0));
  CHECK_THROWS_AS(loss::combined_phase_loss(-0.1, 1.0, 0.001), InputError);
  CHECK_THROWS_AS(loss::combined_amplitude_loss(1.0, -0.1, 0.001), InputError);
}

TEST_CASE("KL loss closed forms") {
  CHECK(loss::kl_loss(Tensor::zeros({4, 3}), Tensor::zeros({4, 3})) == 0.0);
  CHECK(loss::kl_loss(Tensor::full({1}, 1.0), Tensor::zeros({1})) ==
        doctest::Approx(0.5));
  Rng rng(11);
  Tensor mean = Tensor::zeros({6, 4});
  Tensor log_var = Tensor::zeros({6, 4});
  for (Index i = 0; i < mean.numel(); ++i) {
    mean.values()[i] = rng.uniform(-1, 1);
    log_var.values()[i] = rng.uniform(-1, 1);
  }
  CHECK(loss::kl_loss(mean, log_var) ==
        doctest::Approx(oracles::kl(mean, log_var)).epsilon(1e-14));
  CHECK_THROWS_AS(loss::kl_loss(mean, Tensor::zeros({2, 2})), ShapeError);
}

TEST_CASE("spectra loss is the exact sum of amplitude and phase terms") {
  const auto t_amp = random_bank(12);
  const auto e_amp = random_bank(13);
  const auto t_ph = random_bank(14);
  const auto e_ph = random_bank(15);
  const double j_sa = loss::amplitude_loss(t_amp, e_amp);
  const double j_sp = loss::phase_loss(t_ph, e_ph);
  CHECK(loss::spectra_loss(j_sa, j_sp) == j_sa + j_sp);
  CHECK(loss::spectra_loss(0.0, 0.0) == 0.0);
}

TEST_CASE("cycle loss degenerates to J_S when latents match or theta3=0") {
  const auto z = random_bank(16);
  auto z_hat = random_bank(17);
  CHECK(loss::cycle_loss(3.5, z, z, 0.001) == 3.5);
  CHECK(loss::cycle_loss(3.5, z, z_hat, 0.0) == 3.5);
  const double want = 3.5 + 0.25 * oracles::bank_sq_loss(z, z_hat);
  CHECK(loss::cycle_loss(3.5, z, z_hat, 0.25) ==
        doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("fae total combination") {
  CHECK(loss::fae_total(1.0, 2.0, 3.0, 0.001) ==
        doctest::Approx(5.001).epsilon(1e-15));
  CHECK(loss::fae_total(0, 0, 0, 0.001) == 0.0);
  CHECK(loss::fae_total(123.0, 2.0, 3.0, 0.0) == 5.0);  // theta2=0 drops KL
  CHECK_THROWS_AS(loss::fae_total(-1.0, 2.0, 3.0, 0.001), InputError);
}

TEST_CASE("tape losses equal the plain versions") {
  const auto target = random_bank(18);
  const auto estimate = random_bank(19);
  Tape tape;
  std::vector<Var> tv, ev;
  for (const auto& t : target) tv.push_back(tape.constant(t));
  for (const auto& e : estimate) ev.push_back(tape.constant(e));
  const double via_tape =
      tape.value(loss::bank_sq_loss(tape, tv, ev)).scalar_value();
  CHECK(via_tape == loss::bank_sq_loss(target, estimate));

  Rng rng(20);
  Tensor mean = Tensor::zeros({3, 5});
  Tensor log_var = Tensor::zeros({3, 5});
  for (Index i = 0; i < mean.numel(); ++i) {
    mean.values()[i] = rng.uniform(-1, 1);
    log_var.values()[i] = rng.uniform(-1, 1);
  }
  const double kl_tape =
      tape.value(loss::kl_loss(tape, tape.constant(mean),
                               tape.constant(log_var)))
          .scalar_value();
  CHECK(kl_tape == doctest::Approx(loss::kl_loss(mean, log_var))
                       .epsilon(1e-14));
}

TEST_CASE("losses are zero only for identical operands") {
  auto a = random_bank(21);
  auto b = a;
  CHECK(loss::amplitude_loss(a, b) == 0.0);
  b[3].values()[1] += 1e-6;
  CHECK(loss::amplitude_loss(a, b) > 1e-15);
}

TEST_CASE("loss CSV report round trips through disk") {
  std::vector<loss::LossReport> reports(2);
  reports[0].epoch = 1;
  reports[0].j_sa = 1.5;
  reports[0].j_total = 2.25;
  reports[1].epoch = 2;
  reports[1].j_total = 1.0;
  const auto path = std::filesystem::temp_directory_path() /
                    "cyclespec_loss_test.csv";
  loss::write_loss_csv(path, reports);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "epoch,term,value");
  std::size_t lines = 0;
  std::string line;
  while (std::getline(is, line)) ++lines;
  CHECK(lines == 18);  // 9 terms x 2 epochs
  std::filesystem::remove(path);
}
