#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "tcgen/circular/circular.hpp"
#include "tcgen/eof/eof.hpp"
#include "tcgen/regrid/regrid.hpp"
#include "tcgen/rng.hpp"

using namespace tcgen;

namespace {

const core::PolarGridSpec kSpec{8, 100, 400.0};

std::vector<double> theta_grid(const core::PolarGridSpec& s) {
  std::vector<double> th(static_cast<std::size_t>(s.n_theta));
  for (int j = 0; j < s.n_theta; ++j) th[j] = s.theta(j);
  return th;
}

}  // namespace

TEST_CASE("residual fields subtract the trend reconstruction") {
  Rng rng(3);
  std::vector<std::vector<core::PolarField>> events(1);
  for (int t = 0; t < 12; ++t) {
    core::PolarField pf(kSpec);
    for (auto& v : pf.values) v = rng.normal();
    events[0].push_back(std::move(pf));
  }
  const auto P = eof::assemble_matrix(events);
  const int L = 4;
  const auto res = eof::compute_eofs(P, L, kSpec);
  const int T = res.T;

  // mu_hat = 0: residual equals the input.
  std::vector<double> zeros(static_cast<std::size_t>(L) * T, 0.0);
  const auto same = circular::residual_fields(events[0], res.basis, zeros);
  for (int t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < same[t].values.size(); ++k) {
      CHECK(same[t].values[k] == events[0][t].values[k]);
    }
  }

  // mu_hat = exact PCs: residual energy equals the SVD truncation remainder.
  const auto resid = circular::residual_fields(events[0], res.basis, res.pcs);
  double energy = 0.0;
  for (const auto& pf : resid) {
    for (double v : pf.values) energy += v * v;
  }
  const auto full = eof::compute_eofs(P, static_cast<int>(std::min(P.rows(), P.cols())), kSpec);
  double tail = 0.0;
  for (int l = L; l < full.basis.L; ++l) {
    tail += full.basis.singular_values[l] * full.basis.singular_values[l];
  }
  CHECK(energy == doctest::Approx(tail).epsilon(1e-8));

  // Residual of the pure reconstruction is zero.
  std::vector<std::vector<core::PolarField>> recon(1);
  for (int t = 0; t < T; ++t) {
    std::vector<double> c(L);
    for (int l = 0; l < L; ++l) c[l] = res.pcs[static_cast<std::size_t>(l) * T + t];
    recon[0].push_back(eof::reconstruct(res.basis, c));
  }
  const auto zero_res = circular::residual_fields(recon[0], res.basis, res.pcs);
  for (const auto& pf : zero_res) {
    for (double v : pf.values) CHECK(std::abs(v) < 1e-10);
  }
}

TEST_CASE("harmonic regression on the uniform angular grid") {
  const auto th = theta_grid(kSpec);

  // Constant band.
  std::vector<double> flat(th.size(), 3.5);
  const auto f = circular::fit_harmonics(flat, th, 5);
  CHECK(f.d0 == doctest::Approx(3.5).epsilon(1e-12));
  for (int m = 0; m < 5; ++m) {
    CHECK(std::abs(f.d1[m]) < 1e-12);
    CHECK(std::abs(f.d2[m]) < 1e-12);
  }

  // Pure third cosine tone.
  std::vector<double> tone(th.size());
  for (std::size_t j = 0; j < th.size(); ++j) tone[j] = 2.0 * std::cos(3.0 * th[j]);
  const auto g = circular::fit_harmonics(tone, th, 5);
  CHECK(std::abs(g.d0) < 1e-10);
  for (int m = 1; m <= 5; ++m) {
    CHECK(g.d1[m - 1] == doctest::Approx(m == 3 ? 2.0 : 0.0).epsilon(1e-10));
    CHECK(std::abs(g.d2[m - 1]) < 1e-10);
  }
}

TEST_CASE("harmonic fit matches a dense least-squares solve at M = 49") {
  const auto th = theta_grid(kSpec);
  const int M = 49;
  Rng rng(7);
  std::vector<double> band(th.size());
  for (auto& v : band) v = rng.normal();

  const auto fit = circular::fit_harmonics(band, th, M);

  // Dense normal-equations oracle.
  const int n = static_cast<int>(th.size());
  Eigen::MatrixXd A(n, 2 * M + 1);
  Eigen::VectorXd y(n);
  for (int j = 0; j < n; ++j) {
    y(j) = band[j];
    A(j, 0) = 1.0;
    for (int m = 1; m <= M; ++m) {
      A(j, 2 * m - 1) = std::cos(m * th[j]);
      A(j, 2 * m) = std::sin(m * th[j]);
    }
  }
  const Eigen::VectorXd beta = (A.transpose() * A).ldlt().solve(A.transpose() * y);
  CHECK(fit.d0 == doctest::Approx(beta(0)).epsilon(1e-8));
  for (int m = 1; m <= M; ++m) {
    CHECK(fit.d1[m - 1] == doctest::Approx(beta(2 * m - 1)).epsilon(1e-8));
    CHECK(fit.d2[m - 1] == doctest::Approx(beta(2 * m)).epsilon(1e-8));
  }
}

TEST_CASE("second-moment matrices match a naive double loop") {
  const int M = 2, n_r = 6, T = 15;
  circular::HarmonicCoeffs coeffs;
  coeffs.M = M;
  coeffs.n_r = n_r;
  coeffs.T = T;
  Rng rng(11);
  auto rand_mat = [&] {
    Eigen::MatrixXd m(n_r, T);
    for (int i = 0; i < n_r; ++i) {
      for (int t = 0; t < T; ++t) m(i, t) = rng.normal();
    }
    return m;
  };
  coeffs.d0 = rand_mat();
  for (int m = 0; m < M; ++m) {
    coeffs.d1.push_back(rand_mat());
    coeffs.d2.push_back(rand_mat());
  }
  const auto model = circular::estimate_residual_model(coeffs, {T});

  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(n_r, n_r);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n_r; ++i) {
      for (int j = 0; j < n_r; ++j) oracle(i, j) += coeffs.d0(i, t) * coeffs.d0(j, t);
    }
  }
  oracle /= static_cast<double>(T);
  for (int i = 0; i < n_r; ++i) {
    for (int j = 0; j < n_r; ++j) {
      CHECK(model.cov0(i, j) == doctest::Approx(oracle(i, j)).epsilon(1e-10));
    }
  }
  // Symmetry and positive definiteness after jitter.
  CHECK((model.cov0 - model.cov0.transpose()).norm() < 1e-12);
  Eigen::LLT<Eigen::MatrixXd> llt(model.cov0);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("single-hour coefficients give the rank-1 outer product") {
  const int n_r = 4;
  circular::HarmonicCoeffs coeffs;
  coeffs.M = 1;
  coeffs.n_r = n_r;
  coeffs.T = 1;
  coeffs.d0 = Eigen::MatrixXd(n_r, 1);
  coeffs.d0 << 1.0, -2.0, 0.5, 3.0;
  coeffs.d1.push_back(Eigen::MatrixXd::Zero(n_r, 1));
  coeffs.d2.push_back(Eigen::MatrixXd::Zero(n_r, 1));
  const auto model = circular::estimate_residual_model(coeffs, {1});
  for (int i = 0; i < n_r; ++i) {
    for (int j = 0; j < n_r; ++j) {
      const double expect = coeffs.d0(i, 0) * coeffs.d0(j, 0) +
                            (i == j ? model.jitter_used : 0.0);
      CHECK(model.cov0(i, j) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  CHECK(model.jitter_used > 0.0);  // rank-1 needs jitter to become PD
}

TEST_CASE("empirical covariance of white coefficients approaches identity") {
  const int n_r = 10, T = 10000;
  circular::HarmonicCoeffs coeffs;
  coeffs.M = 1;
  coeffs.n_r = n_r;
  coeffs.T = T;
  Rng rng(13);
  coeffs.d0 = Eigen::MatrixXd(n_r, T);
  for (int i = 0; i < n_r; ++i) {
    for (int t = 0; t < T; ++t) coeffs.d0(i, t) = rng.normal();
  }
  coeffs.d1.push_back(Eigen::MatrixXd::Zero(n_r, T));
  coeffs.d2.push_back(Eigen::MatrixXd::Zero(n_r, T));
  const auto model = circular::estimate_residual_model(coeffs, {T});
  for (int i = 0; i < n_r; ++i) {
    for (int j = 0; j < n_r; ++j) {
      CHECK(std::abs(model.cov0(i, j) - (i == j ? 1.0 : 0.0)) < 0.1);
    }
  }
}

TEST_CASE("zero covariances simulate an identically zero residual process") {
  circular::ResidualModel model;
  model.M = 1;
  model.n_r = kSpec.n_r;
  model.cov0 = Eigen::MatrixXd::Zero(kSpec.n_r, kSpec.n_r);
  model.cov1.push_back(model.cov0);
  model.cov2.push_back(model.cov0);
  model.phi_bar = 0.5;
  Rng rng(17);
  const auto z = circular::simulate_residual(model, 10, rng, kSpec);
  REQUIRE(z.size() == 10);
  for (const auto& pf : z) {
    for (double v : pf.values) CHECK(v == 0.0);
  }
}

TEST_CASE("simulated coefficient process has the stationary moments") {
  // Diagonal covariances so per-band coefficient series are scalar AR(1).
  const int n_r = 3;
  circular::ResidualModel model;
  model.M = 1;
  model.n_r = n_r;
  model.cov0 = Eigen::MatrixXd::Identity(n_r, n_r) * 2.0;
  model.cov1.push_back(Eigen::MatrixXd::Zero(n_r, n_r));
  model.cov2.push_back(Eigen::MatrixXd::Zero(n_r, n_r));
  model.phi_bar = 0.7;

  const int T = 100000;
  core::PolarGridSpec spec{n_r, 4, 100.0};
  Rng rng(19);
  const auto z = circular::simulate_residual(model, T, rng, spec);

  // With only d0 active, every angular cell in a band equals d0[band](t).
  std::vector<double> series(T);
  for (int t = 0; t < T; ++t) series[t] = z[t].at(1, 0);
  for (int t = 0; t < T; ++t) CHECK(z[t].at(1, 2) == doctest::Approx(series[t]).epsilon(1e-12));

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= T;
  double var = 0.0, lag1 = 0.0;
  for (int t = 0; t < T; ++t) var += (series[t] - mean) * (series[t] - mean);
  var /= T;
  for (int t = 1; t < T; ++t) lag1 += (series[t] - mean) * (series[t - 1] - mean);
  lag1 /= (T - 1) * var;
  CHECK(std::abs(var - 2.0) / 2.0 < 0.05);
  CHECK(std::abs(lag1 - 0.7) < 0.02);
}

TEST_CASE("simulated residual fields are periodic in the angle") {
  const int n_r = 5;
  circular::ResidualModel model;
  model.M = 2;
  model.n_r = n_r;
  model.cov0 = Eigen::MatrixXd::Identity(n_r, n_r);
  for (int m = 0; m < 2; ++m) {
    model.cov1.push_back(Eigen::MatrixXd::Identity(n_r, n_r) * 0.5);
    model.cov2.push_back(Eigen::MatrixXd::Identity(n_r, n_r) * 0.5);
  }
  model.phi_bar = 0.3;
  core::PolarGridSpec spec{n_r, 16, 200.0};
  Rng rng(23);
  const auto z = circular::simulate_residual(model, 5, rng, spec);
  for (const auto& pf : z) {
    for (double r : {30.0, 90.0, 150.0}) {
      for (double th : {-2.0, 0.4, 3.0}) {
        CHECK(regrid::bilinear_polar_eval(pf, r, th) ==
              doctest::Approx(regrid::bilinear_polar_eval(pf, r, th + 2.0 * core::kPi))
                  .epsilon(1e-12));
      }
    }
  }
}
