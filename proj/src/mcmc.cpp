#include "compois/mcmc.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "compois/error.hpp"
#include "compois/kernels.hpp"

namespace compois {

namespace {

constexpr double kDefaultStep = 0.1;

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double exact_log_term(Count y, const CmpParams& params) {
  return log_unnormalized_mass(params, y) - adaptive_log_z(params).log_z;
}

}  // namespace

Algorithm parse_algorithm(std::string_view text) {
  if (text == "exchange") return Algorithm::Exchange;
  if (text == "gimh") return Algorithm::Gimh;
  if (text == "mcwm") return Algorithm::Mcwm;
  if (text == "exact-truncated") return Algorithm::ExactTruncatedMh;
  throw InvalidParameter("unknown algorithm '" + std::string(text) +
                         "' (expected exchange, gimh, mcwm or exact-truncated)");
}

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::Exchange: return "exchange";
    case Algorithm::Gimh: return "gimh";
    case Algorithm::Mcwm: return "mcwm";
    case Algorithm::ExactTruncatedMh: return "exact-truncated";
  }
  return "unknown";
}

void McmcConfig::validate(std::size_t k) const {
  if (iterations == 0) throw InvalidParameter("iterations must be positive");
  if (burn_in >= iterations) throw InvalidParameter("burn-in must be smaller than iterations");
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw InvalidParameter("target acceptance must lie in (0, 1)");
  }
  if (r == 0) throw InvalidParameter("r must be positive");
  if (adapt_batch == 0) throw InvalidParameter("adaptation batch must be positive");
  if (!initial_steps.empty()) {
    if (initial_steps.size() != k) throw InvalidParameter("one step size per coefficient required");
    for (double s : initial_steps) {
      if (!(s > 0.0) || !std::isfinite(s)) throw InvalidParameter("step sizes must be positive");
    }
  }
  if (!initial.empty() && initial.size() != k) {
    throw InvalidParameter("initial state has wrong length");
  }
}

std::vector<double> default_start(const Design& design) {
  const auto y = design.y();
  double mean = 0.0;
  for (Count v : y) mean += static_cast<double>(v);
  mean = y.empty() ? 0.0 : mean / static_cast<double>(y.size());
  std::vector<double> beta(design.k(), 0.0);
  if (design.spec().parameterization == Parameterization::Direct) {
    beta[0] = mean + 0.5;
    if (design.k() > 1) beta[1] = 1.0;
  } else {
    beta[0] = std::log(mean + 0.5);
  }
  return beta;
}

double exchange_log_ratio(std::span<const Count> y, std::span<const CmpParams> current,
                          std::span<const CmpParams> proposed, std::span<const Count> aux) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += log_unnormalized_mass(proposed[i], y[i]) - log_unnormalized_mass(current[i], y[i]);
    total += log_unnormalized_mass(current[i], aux[i]) - log_unnormalized_mass(proposed[i], aux[i]);
  }
  return total;
}

void adapt_steps(std::span<const double> rates, double target, std::uint64_t batch_index,
                 std::span<double> steps) {
  const double c = 1.0 / std::sqrt(static_cast<double>(batch_index));
  for (std::size_t j = 0; j < steps.size(); ++j) {
    steps[j] *= std::exp(c * (rates[j] - target));
  }
}

// ---------------------------------------------------------------------------
// ChainKernel

ChainKernel::ChainKernel(const Design& design, const McmcConfig& config)
    : design_(design),
      config_(config),
      eta_scratch_(design.n()),
      params_scratch_(design.n(), CmpParams(1.0, 1.0)),
      aux_(design.n()),
      terms_(design.n()),
      beta_scratch_(design.k()) {}

double ChainKernel::log_lik(std::span<const CmpParams> params, std::uint64_t key) const {
  const auto y = design_.y();
  if (config_.algorithm == Algorithm::ExactTruncatedMh) {
    kernels::map_index([&](std::size_t i) { return exact_log_term(y[i], params[i]); }, terms_,
                       config_.exec);
  } else {
    kernels::loglik_terms(y, params, config_.r, key, terms_, config_.exec);
  }
  return sum(terms_);
}

ChainState ChainKernel::initial_state(std::span<const double> beta, RngStream& rng) const {
  ChainState s;
  s.beta.assign(beta.begin(), beta.end());
  s.log_prior = log_prior(design_.spec(), s.beta);
  if (!std::isfinite(s.log_prior)) throw InvalidParameter("initial state outside the prior support");
  s.eta_mu.resize(design_.n());
  s.eta_nu.resize(design_.n());
  design_.linear_predictors(s.beta, s.eta_mu, s.eta_nu);
  s.params.assign(design_.n(), CmpParams(1.0, 1.0));
  if (!Design::to_params(s.eta_mu, s.eta_nu, s.params)) {
    throw DivergentLink("initial state has a linear predictor outside [-700, 700]");
  }
  if (config_.algorithm != Algorithm::Exchange) s.log_lik = log_lik(s.params, rng.next());
  return s;
}

bool ChainKernel::update(std::size_t j, double step, ChainState& s, RngStream& rng) {
  const double old = s.beta[j];
  const double proposal = old + step * rng.normal();
  const std::uint64_t key = rng.next();
  const double log_u = std::log(rng.uniform_pos());
  if (config_.algorithm == Algorithm::Mcwm) s.log_lik = log_lik(s.params, rng.next());

  std::copy(s.beta.begin(), s.beta.end(), beta_scratch_.begin());
  beta_scratch_[j] = proposal;
  const double prior = log_prior(design_.spec(), beta_scratch_);
  if (!std::isfinite(prior)) return false;

  const bool mu_block = design_.is_mu_coefficient(j);
  auto& block = mu_block ? s.eta_mu : s.eta_nu;
  design_.shifted_predictors(j, old, proposal, block, eta_scratch_);
  const bool ok = mu_block ? Design::to_params(eta_scratch_, s.eta_nu, params_scratch_)
                           : Design::to_params(s.eta_mu, eta_scratch_, params_scratch_);
  if (!ok) {
    ++divergent_;
    return false;
  }

  double log_ratio = prior - s.log_prior;
  double proposed_lik = 0.0;
  try {
    if (config_.algorithm == Algorithm::Exchange) {
      if (config_.auxiliary) {
        config_.auxiliary(params_scratch_, key, aux_);
      } else {
        kernels::draw_auxiliary(params_scratch_, key, aux_, config_.exec);
      }
      log_ratio += exchange_log_ratio(design_.y(), s.params, params_scratch_, aux_);
    } else {
      proposed_lik = log_lik(params_scratch_, key);
      log_ratio += proposed_lik - s.log_lik;
    }
  } catch (const InvalidParameter&) {
    ++divergent_;
    return false;
  } catch (const NumericalError&) {
    ++divergent_;
    return false;
  }
  if (std::isnan(log_ratio) || log_ratio == std::numeric_limits<double>::infinity()) {
    ++nonfinite_;
    return false;
  }
  if (!(log_u <= log_ratio)) return false;

  s.beta[j] = proposal;
  s.log_prior = prior;
  s.log_lik = proposed_lik;
  block.swap(eta_scratch_);
  s.params.swap(params_scratch_);
  return true;
}

void ChainKernel::sweep(std::span<const double> steps, ChainState& state, RngStream& rng,
                        std::span<bool> accepted) {
  for (std::size_t j = 0; j < state.beta.size(); ++j) accepted[j] = update(j, steps[j], state, rng);
}

// ---------------------------------------------------------------------------
// Chains

ChainResult run_chain(const Design& design, const McmcConfig& config) {
  const std::size_t k = design.k();
  config.validate(k);
  const auto wall_start = std::chrono::steady_clock::now();
  const std::clock_t cpu_start = std::clock();

  ChainResult result;
  result.config = config;
  result.config.auxiliary = nullptr;
  result.model = design.spec().name;
  result.formula = design.spec().formula();
  result.n = design.n();
  result.names = design.spec().coefficient_names();
  result.retained = config.iterations - config.burn_in;
  result.draws.resize(static_cast<Eigen::Index>(result.retained), static_cast<Eigen::Index>(k));
  result.accept_counts.assign(k, 0);

  std::vector<double> steps =
      config.initial_steps.empty() ? std::vector<double>(k, kDefaultStep) : config.initial_steps;
  const std::vector<double> start = config.initial.empty() ? default_start(design) : config.initial;

  RngStream rng(config.seed);
  ChainKernel kernel(design, config);
  ChainState state = kernel.initial_state(start, rng);

  std::unique_ptr<bool[]> accepted(new bool[k]);
  std::vector<std::uint64_t> batch_accepts(k, 0);
  std::vector<double> rates(k);
  std::uint64_t batch_index = 0;

  for (std::uint64_t it = 0; it < config.iterations; ++it) {
    kernel.sweep(steps, state, rng, std::span<bool>(accepted.get(), k));
    if (it < config.burn_in) {
      for (std::size_t j = 0; j < k; ++j) batch_accepts[j] += accepted[j] ? 1 : 0;
      if (config.adapt && (it + 1) % config.adapt_batch == 0) {
        ++batch_index;
        for (std::size_t j = 0; j < k; ++j) {
          rates[j] = static_cast<double>(batch_accepts[j]) / static_cast<double>(config.adapt_batch);
        }
        adapt_steps(rates, config.target_accept, batch_index, steps);
        result.tuning.push_back(steps);
        std::fill(batch_accepts.begin(), batch_accepts.end(), 0);
      }
    } else {
      const auto row = static_cast<Eigen::Index>(it - config.burn_in);
      for (std::size_t j = 0; j < k; ++j) {
        result.accept_counts[j] += accepted[j] ? 1 : 0;
        result.draws(row, static_cast<Eigen::Index>(j)) = state.beta[j];
      }
    }
  }

  result.cpu_seconds = static_cast<double>(std::clock() - cpu_start) / CLOCKS_PER_SEC;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  result.draws_per_second =
      result.wall_seconds > 0.0 ? static_cast<double>(config.iterations) / result.wall_seconds : 0.0;
  result.divergent_proposals = kernel.divergent_proposals();
  result.nonfinite_ratios = kernel.nonfinite_ratios();

  const Eigen::RowVectorXd mean = result.draws.colwise().mean();
  const double denom = result.retained > 1 ? static_cast<double>(result.retained - 1) : 1.0;
  std::vector<double> mcse(k, std::numeric_limits<double>::quiet_NaN());
  try {
    mcse = mcse_per_column(result.draws);
  } catch (const SingularCovariance&) {
  }
  try {
    result.mess = mess(result.draws);
  } catch (const SingularCovariance&) {
    result.mess.reset();
  }
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double sd = std::sqrt((result.draws.col(jj).array() - mean[jj]).square().sum() / denom);
    result.summaries.push_back({result.names[j], mean[jj], sd, mcse[j],
                                static_cast<double>(result.accept_counts[j]) /
                                    static_cast<double>(result.retained),
                                steps[j]});
  }
  return result;
}

std::vector<ChainResult> run_chains(const Design& design, std::span<const McmcConfig> configs,
                                    ExecPolicy exec) {
  std::vector<std::optional<ChainResult>> slots(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  const auto count = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(exec.threads) if (exec.threads > 1)
  for (std::ptrdiff_t c = 0; c < count; ++c) {
    try {
      McmcConfig local = configs[static_cast<std::size_t>(c)];
      local.exec.threads = 1;
      slots[static_cast<std::size_t>(c)] = run_chain(design, local);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ChainResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

void write_chain_csv(std::ostream& out, const ChainResult& result) {
  for (std::size_t j = 0; j < result.names.size(); ++j) {
    out << (j ? "," : "") << result.names[j];
  }
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < result.draws.rows(); ++i) {
    for (Eigen::Index j = 0; j < result.draws.cols(); ++j) {
      out << (j ? "," : "") << result.draws(i, j);
    }
    out << '\n';
  }
}

void write_summary_json(std::ostream& out, const ChainResult& result) {
  using nlohmann::json;
  const auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json coefficients = json::array();
  for (const auto& s : result.summaries) {
    coefficients.push_back({{"name", s.name},
                            {"mean", s.mean},
                            {"sd", s.sd},
                            {"mcse", finite_or_null(s.mcse)},
                            {"accept_rate", s.accept_rate},
                            {"step", s.step}});
  }
  const auto& c = result.config;
  json doc = {
      {"schema", 1},
      {"model", result.model},
      {"formula", result.formula},
      {"n", result.n},
      {"k", result.names.size()},
      {"algorithm", std::string(to_string(c.algorithm))},
      {"seed", c.seed},
      {"config",
       {{"iterations", c.iterations},
        {"burn_in", c.burn_in},
        {"target_accept", c.target_accept},
        {"r", c.r},
        {"adapt_batch", c.adapt_batch},
        {"adapt", c.adapt},
        {"threads", c.exec.threads}}},
      {"retained", result.retained},
      {"coefficients", coefficients},
      {"mess", result.mess ? json(result.mess->value) : json(nullptr)},
      {"mess_regularized", result.mess ? result.mess->regularized : false},
      {"divergent_proposals", result.divergent_proposals},
      {"timing",
       {{"cpu_seconds", result.cpu_seconds},
        {"wall_seconds", result.wall_seconds},
        {"draws_per_second", result.draws_per_second}}},
  };
  out << doc.dump(2) << '\n';
}

}  // namespace compois
