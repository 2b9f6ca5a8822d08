#pragma once

#include <vector>

#include <Eigen/Core>

#include "tcgen/core/types.hpp"

namespace tcgen::eof {

/// Ordered orthonormal spatial patterns on the polar grid.
///
/// Patterns are flattened r-major then theta, matching PolarField storage.
struct EofBasis {
  core::PolarGridSpec spec;
  int L = 0;
  int K = 0;
  std::vector<double> patterns;         // L x K row-major
  std::vector<double> singular_values;  // length L, non-increasing
  double total_variance = 0.0;          // squared Frobenius norm of the data matrix

  const double* pattern(int l) const { return patterns.data() + static_cast<std::size_t>(l) * K; }
};

struct EofResult {
  EofBasis basis;
  std::vector<double> pcs;  // L x T row-major: pcs[l*T + t] = c_l(t)
  int T = 0;
};

/// Stacks per-event polar field sequences into a K x T matrix; column order
/// is event order then hour order.
Eigen::MatrixXd assemble_matrix(const std::vector<std::vector<core::PolarField>>& events);

/// Thin SVD of the data matrix; the first L left singular vectors become the
/// basis and rows of D V^T the principal components. Each pattern is signed
/// so its largest-magnitude element is positive.
EofResult compute_eofs(const Eigen::MatrixXd& P, int L, const core::PolarGridSpec& spec = {});

/// Orthonormal projection of a field onto the basis.
std::vector<double> project(const core::PolarField& pf, const EofBasis& basis);

/// Weighted sum of patterns.
core::PolarField reconstruct(const EofBasis& basis, const std::vector<double>& coeffs);

}  // namespace tcgen::eof
