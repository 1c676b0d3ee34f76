#pragma once

// Dual-link COM-Poisson regression:
//   log mu_i = beta_mu . [1, x_i],   log nu_i = beta_nu . [1, x_i]
// with beta = (beta_mu, beta_nu) stored in that order. The Poisson family
// fixes nu_i = 1. The identity ("direct") parameterisation models (mu, nu)
// themselves with Gamma priors and no covariates.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compois/cmp.hpp"

namespace compois {

/// Linear predictors beyond this magnitude are treated as divergent.
inline constexpr double kMaxLinearPredictor = 700.0;

class Dataset {
 public:
  /// Strict CSV: header row, comma separated, numeric cells, no ragged rows.
  /// Surrounding double quotes on header names are stripped.
  static Dataset from_csv(std::istream& in);
  static Dataset from_csv_file(const std::filesystem::path& path);

  Dataset() = default;
  Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns);

  std::size_t rows() const noexcept { return rows_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  bool has_column(std::string_view name) const;
  /// Throws FormulaError naming the column when absent.
  std::span<const double> column(std::string_view name) const;
  /// Non-negative integer column; throws DataError naming column and row.
  std::vector<Count> counts(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::size_t rows_ = 0;
};

enum class Family { Poisson, Cmp };
enum class Parameterization { LogLinear, Direct };

struct PriorSpec {
  double normal_sd = 5.0;  ///< N(0, sd^2) on each log-linear coefficient
  double mu_shape = 1.0;   ///< Gamma(shape, rate) on mu, direct parameterisation
  double mu_rate = 1.0;
  double nu_shape = 0.0625;
  double nu_rate = 0.25;
};

struct ModelSpec {
  std::string name;
  std::string response = "NUMBIDS";
  std::vector<std::string> mu_terms;  ///< covariates besides the intercept
  std::vector<std::string> nu_terms;
  Family family = Family::Cmp;
  Parameterization parameterization = Parameterization::LogLinear;
  PriorSpec priors;

  std::size_t mu_size() const noexcept { return 1 + mu_terms.size(); }
  std::size_t nu_size() const noexcept {
    return family == Family::Poisson ? 0 : 1 + nu_terms.size();
  }
  std::size_t k() const noexcept { return mu_size() + nu_size(); }
  std::vector<std::string> coefficient_names() const;
  std::string formula() const;
};

/// Parses `mu ~ A + B ; nu ~ C`. Other clauses: `nu ~ 1` (intercept only),
/// `family = poisson|cmp`, `response = NAME`, `link = log|identity`. A
/// formula without a nu clause is Poisson unless `family = cmp` is given.
ModelSpec parse_formula(std::string_view text, std::string name = {});

/// Models 1-5 of the takeover-bids study (k = 3, 4, 5, 4, 6).
std::vector<ModelSpec> builtin_models();

/// "model1" .. "model5", plus "model5r": Model 5 without BIDPREM (k = 5),
/// the variant whose coefficients appear in the published posterior tables.
ModelSpec builtin_model(std::string_view name);

/// theta for one covariate record. Throws DivergentLink when a linear
/// predictor exceeds kMaxLinearPredictor in magnitude.
CmpParams link_eval(const ModelSpec& spec, std::span<const double> beta,
                    const std::map<std::string, double, std::less<>>& row);

/// Log prior density (normalised). -inf outside the support.
double log_prior(const ModelSpec& spec, std::span<const double> beta);

/// Model bound to data: response vector plus design columns, with the
/// intercept as column 0 of each block.
class Design {
 public:
  Design(ModelSpec spec, const Dataset& data, bool standardize = false);
  /// Direct-parameterisation design over a bare response vector.
  Design(ModelSpec spec, std::vector<Count> y);

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t n() const noexcept { return y_.size(); }
  std::size_t k() const noexcept { return spec_.k(); }
  std::span<const Count> y() const noexcept { return y_; }
  bool is_mu_coefficient(std::size_t j) const noexcept { return j < spec_.mu_size(); }
  std::span<const double> column(std::size_t j) const { return columns_.at(j); }

  /// Fills eta_mu = log mu_i and eta_nu = log nu_i (0 for Poisson). Direct
  /// parameterisation requires beta > 0 elementwise.
  void linear_predictors(std::span<const double> beta, std::span<double> eta_mu,
                         std::span<double> eta_nu) const;

  /// Predictor block after changing coefficient j from old_value to
  /// new_value, written into `out` (the block of j: mu or nu).
  void shifted_predictors(std::size_t j, double old_value, double new_value,
                          std::span<const double> eta_in, std::span<double> out) const;

  /// Converts predictors to parameters; false if any is divergent.
  static bool to_params(std::span<const double> eta_mu, std::span<const double> eta_nu,
                        std::span<CmpParams> out) noexcept;

  /// Throws DivergentLink instead of returning false.
  std::vector<CmpParams> params(std::span<const double> beta) const;

  std::span<const double> column_means() const noexcept { return means_; }
  std::span<const double> column_sds() const noexcept { return sds_; }

 private:
  ModelSpec spec_;
  std::vector<Count> y_;
  std::vector<std::vector<double>> columns_;  ///< k columns, mu block then nu block
  std::vector<double> means_;
  std::vector<double> sds_;
};

}  // namespace compois
