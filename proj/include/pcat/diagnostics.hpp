#pragma once

#include <utility>
#include <vector>

#include "pcat/estimators.hpp"

namespace pcat {

// Informative gap d_k = r_s - tr(P_k P_0^s), in [0, r_s]; zero exactly when
// the shared span is contained in the study's span.
double informative_gap(const Projector& P_k, const Projector& P0_shared);

// Identifiability margin of the shared subspace:
// 1 - || sum_k w_k P_k^p ||_2 / sum_k w_k. Zero means some direction lives in
// every private subspace and the barycenter cannot separate it.
double identifiability_margin(const WeightedProjectorSet& private_projectors);

// Inputs of the asymptotic variance of the bilinear form <u, P_hat v>:
// the fine-tuning signal eigenpairs above the tail, the tail eigenpairs, and
// the fourth moment of the standardized innovations.
struct BilinearSpec {
  Vector u;
  Vector v;
  std::vector<std::pair<double, Vector>> private_pairs;  // (lambda_i^p, u_i^p)
  std::vector<std::pair<double, Vector>> tail_pairs;     // (lambda_j, u_j)
  double nu4 = 3.0;
};

void validate_bilinear_spec(const BilinearSpec& spec);

// sigma_p^2 = sum_ij w_ij^2
//           + (nu4 - 3) sum_m ( sum_ij w_ij (u_i^p)_m (u_j)_m )^2,
// w_ij = rho_ij sqrt(lambda_i^p lambda_j) / (lambda_i^p - lambda_j) and
// rho_ij the symmetrized coordinate product of u and v in the listed basis.
double bilinear_variance(const BilinearSpec& spec);

// Average relative information preservation ratio: mean over test rows of
// ||P_transfer y||^2 / ||P_baseline y||^2.
double ar_ratio(const Projector& transfer_P, const Projector& baseline_P,
                const Dataset& test_rows);

}  // namespace pcat
