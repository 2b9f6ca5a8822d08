#include "tcgen/eof/eof.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "tcgen/common.hpp"

namespace tcgen::eof {

using core::PolarField;
using core::PolarGridSpec;

Eigen::MatrixXd assemble_matrix(const std::vector<std::vector<PolarField>>& events) {
  if (events.empty()) throw InputError("assemble_matrix: no events");
  const PolarGridSpec spec = events.front().front().spec;
  std::size_t T = 0;
  for (const auto& ev : events) {
    if (ev.empty()) throw InputError("assemble_matrix: empty event");
    for (const auto& pf : ev) {
      if (!(pf.spec == spec)) throw InputError("assemble_matrix: polar spec mismatch");
      ++T;
    }
  }
  const int K = spec.n_cells();
  Eigen::MatrixXd P(K, static_cast<Eigen::Index>(T));
  Eigen::Index col = 0;
  for (const auto& ev : events) {
    for (const auto& pf : ev) {
      P.col(col++) = Eigen::Map<const Eigen::VectorXd>(pf.values.data(), K);
    }
  }
  return P;
}

EofResult compute_eofs(const Eigen::MatrixXd& P, int L, const PolarGridSpec& spec) {
  const int K = static_cast<int>(P.rows());
  const int T = static_cast<int>(P.cols());
  if (L < 1 || L > std::min(K, T)) {
    throw InputError("compute_eofs: L must be in [1, min(K, T)]");
  }
  if (spec.n_cells() != K) {
    throw InputError("compute_eofs: polar spec does not match matrix row count");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("compute_eofs: SVD failed");

  EofResult res;
  res.T = T;
  res.basis.spec = spec;
  res.basis.L = L;
  res.basis.K = K;
  res.basis.total_variance = P.squaredNorm();
  res.basis.patterns.resize(static_cast<std::size_t>(L) * K);
  res.basis.singular_values.resize(L);
  res.pcs.resize(static_cast<std::size_t>(L) * T);

  const Eigen::MatrixXd& U = svd.matrixU();
  const Eigen::MatrixXd& V = svd.matrixV();
  const Eigen::VectorXd& d = svd.singularValues();
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd u = U.col(l);
    // Deterministic sign: the largest-magnitude element is positive.
    int arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    const double sign = u(arg) < 0.0 ? -1.0 : 1.0;
    u *= sign;
    for (int k = 0; k < K; ++k) res.basis.patterns[static_cast<std::size_t>(l) * K + k] = u(k);
    res.basis.singular_values[l] = d(l);
    for (int t = 0; t < T; ++t) {
      res.pcs[static_cast<std::size_t>(l) * T + t] = sign * d(l) * V(t, l);
    }
  }
  return res;
}

std::vector<double> project(const PolarField& pf, const EofBasis& basis) {
  if (!(pf.spec == basis.spec)) throw InputError("project: polar spec mismatch");
  std::vector<double> coeffs(basis.L, 0.0);
  for (int l = 0; l < basis.L; ++l) {
    const double* pat = basis.pattern(l);
    double acc = 0.0;
    for (int k = 0; k < basis.K; ++k) acc += pat[k] * pf.values[k];
    coeffs[l] = acc;
  }
  return coeffs;
}

PolarField reconstruct(const EofBasis& basis, const std::vector<double>& coeffs) {
  if (static_cast<int>(coeffs.size()) != basis.L) {
    throw InputError("reconstruct: coefficient count != L");
  }
  PolarField out(basis.spec);
  for (int l = 0; l < basis.L; ++l) {
    const double* pat = basis.pattern(l);
    const double c = coeffs[l];
    for (int k = 0; k < basis.K; ++k) out.values[k] += c * pat[k];
  }
  return out;
}

}  // namespace tcgen::eof
