#include "compois/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "compois/cmp.hpp"
#include "compois/error.hpp"
#include "compois/estimator.hpp"
#include "compois/kernels.hpp"
#include "compois/rng.hpp"

namespace compois {

namespace {

std::vector<double> row_of(const Eigen::MatrixXd& draws, Eigen::Index i) {
  std::vector<double> beta(static_cast<std::size_t>(draws.cols()));
  for (Eigen::Index j = 0; j < draws.cols(); ++j) beta[static_cast<std::size_t>(j)] = draws(i, j);
  return beta;
}

double truncated_loglik_at(const Design& design, std::span<const double> beta) {
  std::vector<CmpParams> params;
  try {
    params = design.params(beta);
  } catch (const DivergentLink&) {
    return -std::numeric_limits<double>::infinity();
  } catch (const InvalidParameter&) {
    return -std::numeric_limits<double>::infinity();
  }
  return truncated_loglik(design.y(), params);
}

}  // namespace

std::size_t argmax_truncated_loglik(const Design& design, const Eigen::MatrixXd& draws,
                                    ExecPolicy exec) {
  if (draws.rows() == 0) throw InvalidParameter("BIC estimate needs a non-empty chain");
  if (static_cast<std::size_t>(draws.cols()) != design.k()) {
    throw InvalidParameter("chain width does not match the model");
  }
  std::vector<double> values(static_cast<std::size_t>(draws.rows()));
  kernels::map_index(
      [&](std::size_t i) {
        return truncated_loglik_at(design, row_of(draws, static_cast<Eigen::Index>(i)));
      },
      values, exec);
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

BicEstimate bic_estimate(const Design& design, const Eigen::MatrixXd& draws, std::uint64_t r,
                         std::uint64_t seed, ExecPolicy exec) {
  if (r == 0) throw InvalidParameter("r must be positive");
  const std::size_t best = argmax_truncated_loglik(design, draws, exec);
  BicEstimate out;
  out.model = design.spec().name;
  out.k = design.k();
  out.n = design.n();
  out.r = r;
  out.theta_hat = row_of(draws, static_cast<Eigen::Index>(best));
  const auto params = design.params(out.theta_hat);
  out.truncated_loglik = truncated_loglik(design.y(), params);
  RngStream rng(seed);
  out.loglik_hat = unbiased_loglik(design.y(), params, r, rng, exec).log_value;
  out.bic_hat = bic(out.k, out.n, out.loglik_hat);
  return out;
}

void rank_models(std::span<BicEstimate> rows) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a].bic_hat < rows[b].bic_hat; });
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    rows[order[pos]].rank = static_cast<int>(pos + 1);
  }
}

void write_bic_csv(std::ostream& out, std::span<const BicEstimate> rows) {
  out << "model,k,n,r,loglik_hat,bic_hat,rank\n" << std::setprecision(17);
  for (const auto& row : rows) {
    out << row.model << ',' << row.k << ',' << row.n << ',' << row.r << ',' << row.loglik_hat
        << ',' << row.bic_hat << ',' << row.rank << '\n';
  }
}

}  // namespace compois
