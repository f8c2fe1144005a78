#include "pcat/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "pcat/rng.hpp"
#include "pcat/simulation.hpp"

namespace pcat {

namespace {

double trace_product(const Matrix& a, const Matrix& b) {
  // tr(AB) for symmetric A, B.
  return (a.array() * b.array()).sum();
}

Projector combine(const Projector& shared, const Projector& private_part) {
  if ((shared.matrix * private_part.matrix).cwiseAbs().maxCoeff() > 1e-8)
    throw NumericalError("transfer: shared and private subspaces overlap");
  Projector out;
  out.matrix = shared.matrix + private_part.matrix;
  out.rank = shared.rank + private_part.rank;
  if (shared.basis && private_part.basis) {
    Matrix basis(shared.dim(), out.rank);
    basis.leftCols(shared.rank) = *shared.basis;
    basis.rightCols(private_part.rank) = *private_part.basis;
    out.basis = std::move(basis);
  }
  validate_projector(out);
  return out;
}

}  // namespace

void TransferConfig::validate() const {
  if (r_s < 1) throw DataError("transfer config: r_s must be at least 1");
  if (r_0 < r_s) throw DataError("transfer config: r_0 must be at least r_s");
  const double t = effective_tau();
  if (t < 0.0 || t > static_cast<double>(r_s))
    throw DataError("transfer config: tau must lie in [0, r_s]");
  if (max_iter < 1) throw DataError("transfer config: max_iter must be at least 1");
  if (!(tol > 0.0)) throw DataError("transfer config: tol must be positive");
  if (!(alpha > 0.0)) throw DataError("transfer config: alpha must be positive");
  if (multi_starts < 0) throw DataError("transfer config: multi_starts must be >= 0");
  if (init == Init::explicit_projector && !init_projector)
    throw DataError("transfer config: explicit init requires a projector");
}

double study_weight(const StudySummary& study, Weighting weighting) {
  const double w = weighting == Weighting::raw_n ? static_cast<double>(study.n)
                                                 : study.n_eff;
  if (!(w > 0.0))
    throw DataError("study '" + study.study_id + "': non-positive weight");
  return w;
}

StudySummary individual_pca(const CovarianceEstimate& cov, int r,
                            std::string study_id) {
  const int p = cov.p();
  if (r < 1 || r > p)
    throw DataError("individual_pca: r out of range for p = " + std::to_string(p));

  const EigPairs top = top_r_eig(cov.matrix, r);
  StudySummary summary;
  summary.projector = projector_from_basis(top.vectors);
  summary.n = cov.n;
  summary.study_id = std::move(study_id);
  summary.degenerate_gap = top.degenerate_gap;

  if (r == p || top.degenerate_gap) {
    // No meaningful gap to deflate by; keep the raw sample size.
    summary.n_eff = static_cast<double>(cov.n);
  } else {
    const SizeMode mode = cov.kind == CovarianceKind::kendall_tau
                              ? SizeMode::elliptical
                              : SizeMode::classical;
    summary.n_eff = effective_sample_size(sym_eigenvalues(cov.matrix),
                                          static_cast<double>(cov.n), r, mode)
                        .n_eff;
  }
  return summary;
}

Projector fine_tune(const Projector& shared, const CovarianceEstimate& target_cov,
                    int r_p) {
  const int p = shared.dim();
  if (target_cov.p() != p)
    throw DataError("fine_tune: covariance dimension mismatch");
  if (r_p < 0 || r_p > p - shared.rank)
    throw DataError("fine_tune: r_p = " + std::to_string(r_p) +
                    " exceeds complement dimension " + std::to_string(p - shared.rank));
  if (r_p == 0) return zero_projector(p);

  // Eigenpairs of (I-P) Sigma (I-P) restricted to the complement of the
  // shared span, so the result is orthogonal to it by construction.
  const Matrix complement = split_projector(shared).complement;
  const Matrix projected = complement.transpose() * target_cov.matrix * complement;
  const EigPairs top = top_r_eig(0.5 * (projected + projected.transpose()), r_p);
  return projector_from_basis(complement * top.vectors);
}

TransferResult oracle_transfer(const std::vector<StudySummary>& studies,
                               const CovarianceEstimate& target_cov,
                               const TransferConfig& cfg) {
  cfg.validate();
  if (studies.empty()) throw DataError("oracle_transfer: no studies");

  WeightedProjectorSet set;
  for (const auto& study : studies) {
    set.projectors.push_back(study.projector);
    set.weights.push_back(study_weight(study, cfg.weighting));
  }
  const BarycenterResult bc = barycenter(set, cfg.r_s);

  TransferResult result;
  result.shared = bc.projector;
  if (cfg.r_0 > cfg.r_s) {
    result.private_subspace = fine_tune(result.shared, target_cov, cfg.r_0 - cfg.r_s);
    result.combined = combine(result.shared, *result.private_subspace);
  } else {
    result.combined = result.shared;
  }
  for (const auto& study : studies) result.selected.push_back(study.study_id);

  const std::vector<StudySummary> sources(studies.begin() + 1, studies.end());
  IterationRecord record;
  record.iteration = 1;
  record.objective =
      rectified_objective(result.shared, studies.front(), sources, 0.0, cfg.weighting);
  record.selected = result.selected;
  result.trace.push_back(std::move(record));
  result.converged = true;
  return result;
}

std::vector<std::string> select_sources(const Projector& P,
                                        const std::vector<StudySummary>& candidates,
                                        double tau) {
  std::vector<std::string> selected;
  for (const auto& candidate : candidates) {
    if (candidate.projector.dim() != P.dim())
      throw DataError("select_sources: dimension mismatch for study '" +
                      candidate.study_id + "'");
    if (trace_product(P.matrix, candidate.projector.matrix) >= tau)
      selected.push_back(candidate.study_id);
  }
  return selected;
}

double rectified_objective(const Projector& P, const StudySummary& target,
                           const std::vector<StudySummary>& candidates,
                           double tau, Weighting weighting) {
  double total_weight = study_weight(target, weighting);
  double value = total_weight * trace_product(P.matrix, target.projector.matrix);
  for (const auto& candidate : candidates) {
    const double w = study_weight(candidate, weighting);
    value += w * std::max(trace_product(P.matrix, candidate.projector.matrix), tau);
    total_weight += w;
  }
  return value / total_weight;
}

namespace {

struct IterateState {
  Projector shared;
  double objective = 0.0;
  std::vector<IterationRecord> trace;
  bool converged = false;
};

// One full run of the rectified iteration from a given starting point.
IterateState run_iteration(const Projector& start, const StudySummary& target,
                           const std::vector<StudySummary>& candidates,
                           const TransferConfig& cfg) {
  const double tau = cfg.effective_tau();
  const double w0 = study_weight(target, cfg.weighting);
  double total_weight = w0;
  for (const auto& candidate : candidates)
    total_weight += study_weight(candidate, cfg.weighting);

  const auto objective_of = [&](const Projector& P) {
    return rectified_objective(P, target, candidates, tau, cfg.weighting);
  };
  const auto selected_average = [&](const std::vector<std::string>& ids) {
    Matrix avg = w0 * target.projector.matrix;
    for (const auto& candidate : candidates)
      if (std::find(ids.begin(), ids.end(), candidate.study_id) != ids.end())
        avg += study_weight(candidate, cfg.weighting) * candidate.projector.matrix;
    return Matrix(avg / total_weight);
  };
  // Gradient ascent with halving until the rectified objective increases.
  const auto backtracked_gradient = [&](const Projector& P, const Matrix& pbar,
                                        double base_objective) {
    double step = cfg.alpha;
    for (int halving = 0; halving <= 20; ++halving, step *= 0.5) {
      Projector trial = gradient_step(P, pbar, step);
      if (objective_of(trial) > base_objective) return trial;
    }
    return P;  // no ascent step found: already at a local maximum
  };

  IterateState state;
  state.shared = start;
  state.objective = objective_of(start);

  Projector best = start;
  double best_objective = state.objective;
  std::vector<std::string> previous_selected;
  bool have_previous_selected = false;

  for (int t = 1; t <= cfg.max_iter; ++t) {
    const std::vector<std::string> selected =
        select_sources(state.shared, candidates, tau);

    Projector next = state.shared;
    bool fixed_point = false;
    switch (cfg.variant) {
      case Variant::kmeans: {
        if (have_previous_selected && selected == previous_selected) {
          // Same set, same barycenter: the iteration is at a fixed point.
          fixed_point = true;
          break;
        }
        WeightedProjectorSet set;
        set.projectors.push_back(target.projector);
        set.weights.push_back(w0);
        for (const auto& candidate : candidates)
          if (std::find(selected.begin(), selected.end(), candidate.study_id) !=
              selected.end()) {
            set.projectors.push_back(candidate.projector);
            set.weights.push_back(study_weight(candidate, cfg.weighting));
          }
        next = barycenter(set, cfg.r_s).projector;
        break;
      }
      case Variant::gradient:
        next = backtracked_gradient(state.shared, selected_average(selected),
                                    state.objective);
        break;
      case Variant::newton: {
        const Matrix pbar = selected_average(selected);
        try {
          next = newton_step(state.shared, pbar);
        } catch (const NumericalError&) {
          next = backtracked_gradient(state.shared, pbar, state.objective);
        }
        break;
      }
    }

    const double step_norm = fixed_point ? 0.0 : frobenius_distance(next, state.shared);
    const double next_objective = fixed_point ? state.objective : objective_of(next);
    if (cfg.variant == Variant::kmeans && next_objective < state.objective - 1e-10)
      throw NumericalError("non_oracle_transfer: k-means objective decreased from " +
                           std::to_string(state.objective) + " to " +
                           std::to_string(next_objective));

    IterationRecord record;
    record.iteration = t;
    record.objective = next_objective;
    record.selected = selected;
    record.step_norm = step_norm;
    state.trace.push_back(std::move(record));

    state.shared = next;
    state.objective = next_objective;
    if (next_objective > best_objective) {
      best_objective = next_objective;
      best = next;
    }
    previous_selected = selected;
    have_previous_selected = true;

    if (step_norm < cfg.tol) {
      state.converged = true;
      break;
    }
  }

  if (!state.converged) {
    state.shared = best;
    state.objective = best_objective;
  }
  return state;
}

Projector resolve_init(const StudySummary& target,
                       const CovarianceEstimate& target_cov,
                       const std::vector<StudySummary>& candidates,
                       const TransferConfig& cfg) {
  switch (cfg.init) {
    case Init::target_top:
      // Ties inside the target projector are broken by the covariance spectrum.
      return projector_from_basis(top_r_eig(target_cov.matrix, cfg.r_s).vectors);
    case Init::explicit_projector: {
      Projector P = *cfg.init_projector;
      validate_projector(P);
      if (P.rank != cfg.r_s || P.dim() != target.projector.dim())
        throw DataError("transfer init: explicit projector shape mismatch");
      return P;
    }
    case Init::blind_barycenter:
    case Init::multi_start:
    default: {
      WeightedProjectorSet set;
      set.projectors.push_back(target.projector);
      set.weights.push_back(study_weight(target, cfg.weighting));
      for (const auto& candidate : candidates) {
        set.projectors.push_back(candidate.projector);
        set.weights.push_back(study_weight(candidate, cfg.weighting));
      }
      return barycenter(set, cfg.r_s).projector;
    }
  }
}

}  // namespace

TransferResult non_oracle_transfer(const StudySummary& target,
                                   const CovarianceEstimate& target_cov,
                                   const std::vector<StudySummary>& candidates,
                                   const TransferConfig& cfg) {
  cfg.validate();
  const int p = target.projector.dim();
  if (target_cov.p() != p)
    throw DataError("non_oracle_transfer: target covariance dimension mismatch");
  if (cfg.r_0 > p) throw DataError("non_oracle_transfer: r_0 exceeds dimension");
  if (target.projector.rank < cfg.r_s)
    throw DataError("non_oracle_transfer: target projector rank below r_s");
  for (const auto& candidate : candidates) {
    if (candidate.projector.dim() != p)
      throw DataError("non_oracle_transfer: dimension mismatch for study '" +
                      candidate.study_id + "'");
    if (candidate.projector.rank < cfg.r_s)
      throw DataError("non_oracle_transfer: study '" + candidate.study_id +
                      "' has rank below r_s");
  }

  std::vector<Projector> starts;
  starts.push_back(resolve_init(target, target_cov, candidates, cfg));
  if (cfg.init == Init::multi_start) {
    Rng rng(cfg.init_seed);
    for (int i = 0; i < cfg.multi_starts; ++i)
      starts.push_back(projector_from_basis(haar_basis(p, cfg.r_s, rng)));
  }

  IterateState best;
  bool have_best = false;
  for (const auto& start : starts) {
    IterateState state = run_iteration(start, target, candidates, cfg);
    if (!have_best || state.objective > best.objective) {
      best = std::move(state);
      have_best = true;
    }
  }

  TransferResult result;
  result.shared = best.shared;
  if (cfg.r_0 > cfg.r_s) {
    result.private_subspace = fine_tune(result.shared, target_cov, cfg.r_0 - cfg.r_s);
    result.combined = combine(result.shared, *result.private_subspace);
  } else {
    result.combined = result.shared;
  }
  result.selected = select_sources(result.shared, candidates, cfg.effective_tau());
  result.trace = std::move(best.trace);
  result.converged = best.converged;
  return result;
}

}  // namespace pcat
