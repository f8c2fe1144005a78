#include "pcat/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pcat {

double informative_gap(const Projector& P_k, const Projector& P0_shared) {
  if (P_k.dim() != P0_shared.dim())
    throw DataError("informative_gap: dimension mismatch");
  const double trace = (P_k.matrix.array() * P0_shared.matrix.array()).sum();
  const double r_s = static_cast<double>(P0_shared.rank);
  return std::clamp(r_s - trace, 0.0, r_s);
}

double identifiability_margin(const WeightedProjectorSet& private_projectors) {
  validate_weighted_set(private_projectors);
  const int p = private_projectors.projectors.front().dim();
  Matrix sum = Matrix::Zero(p, p);
  double total = 0.0;
  for (std::size_t k = 0; k < private_projectors.projectors.size(); ++k) {
    sum += private_projectors.weights[k] * private_projectors.projectors[k].matrix;
    total += private_projectors.weights[k];
  }
  const double spectral_norm = sym_eigenvalues(sum)[0];
  return std::clamp(1.0 - spectral_norm / total, 0.0, 1.0);
}

void validate_bilinear_spec(const BilinearSpec& spec) {
  const auto p = spec.u.size();
  if (spec.v.size() != p)
    throw DataError("bilinear spec: u and v dimension mismatch");
  if (std::abs(spec.u.norm() - 1.0) > 1e-10 || std::abs(spec.v.norm() - 1.0) > 1e-10)
    throw DataError("bilinear spec: u and v must be unit vectors");
  if (spec.private_pairs.empty() || spec.tail_pairs.empty())
    throw DataError("bilinear spec: need at least one private and one tail pair");

  std::vector<const Vector*> all;
  for (const auto& [value, vec] : spec.private_pairs) {
    (void)value;
    all.push_back(&vec);
  }
  for (const auto& [value, vec] : spec.tail_pairs) {
    (void)value;
    all.push_back(&vec);
  }
  for (std::size_t a = 0; a < all.size(); ++a) {
    if (all[a]->size() != p)
      throw DataError("bilinear spec: eigenvector dimension mismatch");
    for (std::size_t b = a; b < all.size(); ++b) {
      const double dot = all[a]->dot(*all[b]);
      const double expected = a == b ? 1.0 : 0.0;
      if (std::abs(dot - expected) > 1e-8)
        throw DataError("bilinear spec: listed eigenvectors are not orthonormal");
    }
  }
  for (const auto& [lam_p, upv] : spec.private_pairs) {
    (void)upv;
    for (const auto& [lam_t, utv] : spec.tail_pairs) {
      (void)utv;
      if (!(lam_p - lam_t > 1e-12))
        throw NumericalError("bilinear spec: degenerate denominator lambda_p = " +
                             std::to_string(lam_p) + ", lambda_tail = " +
                             std::to_string(lam_t));
    }
  }
}

double bilinear_variance(const BilinearSpec& spec) {
  validate_bilinear_spec(spec);
  const auto p = spec.u.size();
  const std::size_t n_priv = spec.private_pairs.size();
  const std::size_t n_tail = spec.tail_pairs.size();

  double sum_sq = 0.0;
  Vector kurtosis_profile = Vector::Zero(p);
  for (std::size_t i = 0; i < n_priv; ++i) {
    const auto& [lam_i, u_i] = spec.private_pairs[i];
    const double au = u_i.dot(spec.u);
    const double av = u_i.dot(spec.v);
    for (std::size_t j = 0; j < n_tail; ++j) {
      const auto& [lam_j, u_j] = spec.tail_pairs[j];
      const double bu = u_j.dot(spec.u);
      const double bv = u_j.dot(spec.v);
      const double rho = au * bv + bu * av;
      const double omega = rho * std::sqrt(lam_i * lam_j) / (lam_i - lam_j);
      sum_sq += omega * omega;
      if (spec.nu4 != 3.0)
        kurtosis_profile += omega * u_i.cwiseProduct(u_j);
    }
  }
  double variance = sum_sq;
  if (spec.nu4 != 3.0)
    variance += (spec.nu4 - 3.0) * kurtosis_profile.squaredNorm();
  return variance;
}

double ar_ratio(const Projector& transfer_P, const Projector& baseline_P,
                const Dataset& test_rows) {
  const int p = transfer_P.dim();
  if (baseline_P.dim() != p)
    throw DataError("ar_ratio: projector dimension mismatch");
  if (test_rows.p() != p)
    throw DataError("ar_ratio: test data dimension mismatch");
  const long n = test_rows.n();
  if (n < 1) throw DataError("ar_ratio: empty test dataset");

  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    const Vector y = test_rows.rows.row(i);
    const double denom = (baseline_P.matrix * y).squaredNorm();
    if (denom <= 1e-24)  // ||P~ y|| <= 1e-12
      throw DataError("ar_ratio: baseline projection degenerate at row " +
                      std::to_string(i));
    sum += (transfer_P.matrix * y).squaredNorm() / denom;
  }
  return sum / static_cast<double>(n);
}

}  // namespace pcat
