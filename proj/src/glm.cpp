#include "compois/glm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "compois/error.hpp"

namespace compois {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.';
  });
}

// "1", "A + B", "1 + A" -> covariate list; "1" alone yields an empty list.
std::vector<std::string> parse_terms(std::string_view rhs, std::string_view clause) {
  std::vector<std::string> terms;
  for (auto part : split(rhs, '+')) {
    part = trim(part);
    if (part == "1") continue;
    if (!is_identifier(part)) {
      throw FormulaError("formula: bad term '" + std::string(part) + "' in clause '" +
                         std::string(clause) + "'");
    }
    if (std::find(terms.begin(), terms.end(), part) != terms.end()) {
      throw FormulaError("formula: duplicate term '" + std::string(part) + "'");
    }
    terms.emplace_back(part);
  }
  return terms;
}

double normal_log_density(double x, double sd) {
  return -0.5 * (x / sd) * (x / sd) - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double gamma_log_density(double x, double shape, double rate) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns)
    : names_(std::move(names)), columns_(std::move(columns)) {
  if (names_.size() != columns_.size()) throw DataError("dataset: names/columns mismatch");
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (const auto& c : columns_) {
    if (c.size() != rows_) throw DataError("dataset: ragged columns");
  }
}

Dataset Dataset::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty input");
  std::vector<std::string> names;
  for (auto cell : split(line, ',')) {
    const auto name = unquote(trim(cell));
    if (name.empty()) throw DataError("csv: empty column name in header");
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw DataError("csv: duplicate column '" + std::string(name) + "'");
    }
    names.emplace_back(name);
  }
  std::vector<std::vector<double>> columns(names.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != names.size()) {
      throw DataError("csv: line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " fields, expected " +
                      std::to_string(names.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto cell = trim(cells[j]);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        throw DataError("csv: line " + std::to_string(line_no) + ", column '" + names[j] +
                        "': not a number: '" + std::string(cell) + "'");
      }
      columns[j].push_back(value);
    }
  }
  return Dataset(std::move(names), std::move(columns));
}

Dataset Dataset::from_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path.string());
  return from_csv(in);
}

bool Dataset::has_column(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::span<const double> Dataset::column(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw FormulaError("unknown column '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

std::vector<Count> Dataset::counts(std::string_view name) const {
  const auto col = column(name);
  std::vector<Count> out;
  out.reserve(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    const double v = col[i];
    if (!(v >= 0.0) || v != std::floor(v) || v > 0x1.0p53) {
      throw DataError("response '" + std::string(name) + "' row " + std::to_string(i + 1) +
                      " is not a non-negative integer");
    }
    out.push_back(static_cast<Count>(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ModelSpec

std::vector<std::string> ModelSpec::coefficient_names() const {
  std::vector<std::string> names;
  if (parameterization == Parameterization::Direct) {
    names.emplace_back("mu");
    if (family == Family::Cmp) names.emplace_back("nu");
    return names;
  }
  names.emplace_back("mu:Intercept");
  for (const auto& t : mu_terms) names.push_back("mu:" + t);
  if (family == Family::Cmp) {
    names.emplace_back("nu:Intercept");
    for (const auto& t : nu_terms) names.push_back("nu:" + t);
  }
  return names;
}

std::string ModelSpec::formula() const {
  auto rhs = [](const std::vector<std::string>& terms) {
    if (terms.empty()) return std::string("1");
    std::string s;
    for (const auto& t : terms) s += (s.empty() ? "" : " + ") + t;
    return s;
  };
  std::string f = "mu ~ " + rhs(mu_terms);
  if (family == Family::Cmp) f += " ; nu ~ " + rhs(nu_terms);
  if (parameterization == Parameterization::Direct) f += " ; link = identity";
  if (response != "NUMBIDS") f += " ; response = " + response;
  return f;
}

ModelSpec parse_formula(std::string_view text, std::string name) {
  ModelSpec spec;
  spec.name = std::move(name);
  bool have_mu = false;
  bool have_nu = false;
  bool family_given = false;
  for (auto raw : split(text, ';')) {
    const auto clause = trim(raw);
    if (clause.empty()) continue;
    if (const auto tilde = clause.find('~'); tilde != std::string_view::npos) {
      const auto lhs = lower(trim(clause.substr(0, tilde)));
      const auto rhs = trim(clause.substr(tilde + 1));
      if (rhs.empty()) throw FormulaError("formula: empty right-hand side in '" + std::string(clause) + "'");
      if (lhs == "mu") {
        if (have_mu) throw FormulaError("formula: repeated mu clause");
        spec.mu_terms = parse_terms(rhs, clause);
        have_mu = true;
      } else if (lhs == "nu") {
        if (have_nu) throw FormulaError("formula: repeated nu clause");
        spec.nu_terms = parse_terms(rhs, clause);
        have_nu = true;
      } else {
        throw FormulaError("formula: unknown link '" + lhs + "' (expected mu or nu)");
      }
    } else if (const auto eq = clause.find('='); eq != std::string_view::npos) {
      const auto key = lower(trim(clause.substr(0, eq)));
      const auto value = trim(clause.substr(eq + 1));
      if (key == "family") {
        const auto v = lower(value);
        if (v == "poisson") {
          spec.family = Family::Poisson;
        } else if (v == "cmp" || v == "com-poisson") {
          spec.family = Family::Cmp;
        } else {
          throw FormulaError("formula: unknown family '" + std::string(value) + "'");
        }
        family_given = true;
      } else if (key == "response") {
        if (!is_identifier(value)) throw FormulaError("formula: bad response name");
        spec.response = std::string(value);
      } else if (key == "link") {
        const auto v = lower(value);
        if (v == "log") {
          spec.parameterization = Parameterization::LogLinear;
        } else if (v == "identity") {
          spec.parameterization = Parameterization::Direct;
        } else {
          throw FormulaError("formula: unknown link '" + std::string(value) + "'");
        }
      } else {
        throw FormulaError("formula: unknown setting '" + key + "'");
      }
    } else {
      throw FormulaError("formula: cannot parse clause '" + std::string(clause) + "'");
    }
  }
  if (!have_mu) throw FormulaError("formula: missing 'mu ~ ...' clause");
  if (!family_given) spec.family = have_nu ? Family::Cmp : Family::Poisson;
  if (spec.family == Family::Poisson && have_nu && !spec.nu_terms.empty()) {
    throw FormulaError("formula: Poisson family cannot have nu covariates");
  }
  if (spec.family == Family::Poisson) spec.nu_terms.clear();
  if (spec.parameterization == Parameterization::Direct &&
      (!spec.mu_terms.empty() || !spec.nu_terms.empty())) {
    throw FormulaError("formula: identity link takes no covariates");
  }
  return spec;
}

std::vector<ModelSpec> builtin_models() {
  return {builtin_model("model1"), builtin_model("model2"), builtin_model("model3"),
          builtin_model("model4"), builtin_model("model5")};
}

ModelSpec builtin_model(std::string_view name) {
  const auto key = lower(name);
  std::string formula;
  if (key == "model1") {
    formula = "mu ~ BIDPREM + WHTKNGHT";
  } else if (key == "model2") {
    formula = "mu ~ BIDPREM + WHTKNGHT + SIZE";
  } else if (key == "model3") {
    formula = "mu ~ BIDPREM + WHTKNGHT ; nu ~ SIZE";
  } else if (key == "model4") {
    formula = "mu ~ WHTKNGHT ; nu ~ SIZE";
  } else if (key == "model5") {
    formula = "mu ~ BIDPREM + WHTKNGHT ; nu ~ SIZE + FINREST";
  } else if (key == "model5r") {
    formula = "mu ~ WHTKNGHT ; nu ~ SIZE + FINREST";
  } else {
    throw FormulaError("unknown built-in model '" + std::string(name) + "'");
  }
  return parse_formula(formula, key);
}

CmpParams link_eval(const ModelSpec& spec, std::span<const double> beta,
                    const std::map<std::string, double, std::less<>>& row) {
  if (beta.size() != spec.k()) throw InvalidParameter("link_eval: beta has wrong length");
  if (spec.parameterization == Parameterization::Direct) {
    return CmpParams(beta[0], spec.family == Family::Cmp ? beta[1] : 1.0);
  }
  auto value = [&](const std::string& term) {
    const auto it = row.find(term);
    if (it == row.end()) throw FormulaError("unknown column '" + term + "'");
    return it->second;
  };
  double eta_mu = beta[0];
  for (std::size_t j = 0; j < spec.mu_terms.size(); ++j) {
    eta_mu += beta[1 + j] * value(spec.mu_terms[j]);
  }
  double eta_nu = 0.0;
  if (spec.family == Family::Cmp) {
    const std::size_t off = spec.mu_size();
    eta_nu = beta[off];
    for (std::size_t j = 0; j < spec.nu_terms.size(); ++j) {
      eta_nu += beta[off + 1 + j] * value(spec.nu_terms[j]);
    }
  }
  if (!(std::fabs(eta_mu) <= kMaxLinearPredictor) || !(std::fabs(eta_nu) <= kMaxLinearPredictor)) {
    throw DivergentLink("linear predictor outside [-700, 700]");
  }
  return CmpParams::from_log(eta_mu, eta_nu);
}

double log_prior(const ModelSpec& spec, std::span<const double> beta) {
  if (beta.size() != spec.k()) throw InvalidParameter("log_prior: beta has wrong length");
  const auto& p = spec.priors;
  if (spec.parameterization == Parameterization::Direct) {
    double lp = gamma_log_density(beta[0], p.mu_shape, p.mu_rate);
    if (spec.family == Family::Cmp) lp += gamma_log_density(beta[1], p.nu_shape, p.nu_rate);
    return lp;
  }
  double lp = 0.0;
  for (double b : beta) lp += normal_log_density(b, p.normal_sd);
  return lp;
}

// ---------------------------------------------------------------------------
// Design

Design::Design(ModelSpec spec, const Dataset& data, bool standardize)
    : spec_(std::move(spec)), y_(data.counts(spec_.response)) {
  if (spec_.parameterization == Parameterization::Direct) return;
  const std::size_t n = y_.size();
  auto add_block = [&](const std::vector<std::string>& terms) {
    columns_.emplace_back(n, 1.0);
    means_.push_back(0.0);
    sds_.push_back(1.0);
    for (const auto& t : terms) {
      const auto src = data.column(t);
      std::vector<double> col(src.begin(), src.end());
      double mean = 0.0;
      double sd = 1.0;
      if (standardize && n > 1) {
        for (double v : col) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0.0)) throw DataError("cannot standardise constant column '" + t + "'");
        for (double& v : col) v = (v - mean) / sd;
      }
      columns_.push_back(std::move(col));
      means_.push_back(mean);
      sds_.push_back(sd);
    }
  };
  add_block(spec_.mu_terms);
  if (spec_.family == Family::Cmp) add_block(spec_.nu_terms);
}

Design::Design(ModelSpec spec, std::vector<Count> y) : spec_(std::move(spec)), y_(std::move(y)) {
  if (spec_.parameterization != Parameterization::Direct) {
    throw InvalidParameter("bare-response design requires the identity link");
  }
}

void Design::linear_predictors(std::span<const double> beta, std::span<double> eta_mu,
                               std::span<double> eta_nu) const {
  if (beta.size() != k()) throw InvalidParameter("beta has wrong length");
  const std::size_t nobs = n();
  if (spec_.parameterization == Parameterization::Direct) {
    if (!(beta[0] > 0.0) || (spec_.family == Family::Cmp && !(beta[1] > 0.0))) {
      throw InvalidParameter("direct parameterisation needs mu, nu > 0");
    }
    const double lm = std::log(beta[0]);
    const double ln = spec_.family == Family::Cmp ? std::log(beta[1]) : 0.0;
    std::fill_n(eta_mu.begin(), nobs, lm);
    std::fill_n(eta_nu.begin(), nobs, ln);
    return;
  }
  std::fill_n(eta_mu.begin(), nobs, 0.0);
  std::fill_n(eta_nu.begin(), nobs, 0.0);
  for (std::size_t j = 0; j < k(); ++j) {
    auto& eta = is_mu_coefficient(j) ? eta_mu : eta_nu;
    const auto& col = columns_[j];
    for (std::size_t i = 0; i < nobs; ++i) eta[i] += beta[j] * col[i];
  }
}

void Design::shifted_predictors(std::size_t j, double old_value, double new_value,
                                std::span<const double> eta_in, std::span<double> out) const {
  const std::size_t nobs = n();
  if (spec_.parameterization == Parameterization::Direct) {
    std::fill_n(out.begin(), nobs, std::log(new_value));
    return;
  }
  const double delta = new_value - old_value;
  const auto& col = columns_[j];
  for (std::size_t i = 0; i < nobs; ++i) out[i] = eta_in[i] + delta * col[i];
}

bool Design::to_params(std::span<const double> eta_mu, std::span<const double> eta_nu,
                       std::span<CmpParams> out) noexcept {
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(std::fabs(eta_mu[i]) <= kMaxLinearPredictor) ||
        !(std::fabs(eta_nu[i]) <= kMaxLinearPredictor)) {
      return false;
    }
    const auto p = CmpParams::try_from_log(eta_mu[i], eta_nu[i]);
    if (!p) return false;
    out[i] = *p;
  }
  return true;
}

std::vector<CmpParams> Design::params(std::span<const double> beta) const {
  std::vector<double> eta_mu(n());
  std::vector<double> eta_nu(n());
  linear_predictors(beta, eta_mu, eta_nu);
  std::vector<CmpParams> out(n(), CmpParams(1.0, 1.0));
  if (!to_params(eta_mu, eta_nu, out)) throw DivergentLink("linear predictor outside [-700, 700]");
  return out;
}

}  // namespace compois
