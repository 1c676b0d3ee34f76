#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "compois/cmp.hpp"
#include "compois/envelope.hpp"
#include "compois/error.hpp"
#include "compois/glm.hpp"
#include "compois/mcmc.hpp"
#include "compois/model_selection.hpp"
#include "compois/rejection.hpp"
#include "compois/rng.hpp"

#ifndef COMPOIS_DATA_DIR
#define COMPOIS_DATA_DIR "data"
#endif

namespace compois::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct IoError : DataError {
  using DataError::DataError;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Summary JSON digests ignore the "timing" object; everything else is
// compared byte for byte.
std::string digest_of(const fs::path& path, bool skip_timing) {
  if (!skip_timing) return hex64(fnv1a64_file(path));
  json doc = json::parse(read_file(path));
  doc.erase("timing");
  return hex64(fnv1a64(doc.dump(2)));
}

struct Output {
  std::string role;
  fs::path path;
  bool skip_timing = false;
};

class Manifest {
 public:
  Manifest(const std::vector<std::string>& args, std::uint64_t seed)
      : started_(utc_now()), seed_(seed) {
    command_ = json::array();
    for (std::size_t i = 1; i < args.size(); ++i) command_.push_back(args[i]);
  }
  void set_input(const fs::path& path) {
    input_ = {{"path", path.string()}, {"fnv1a64", hex64(fnv1a64_file(path))}};
  }
  void set_config(json config) { config_ = std::move(config); }
  void add_output(Output o) { outputs_.push_back(std::move(o)); }

  void write(const fs::path& path) const {
    json outs = json::array();
    for (const auto& o : outputs_) {
      outs.push_back({{"role", o.role},
                      {"path", o.path.string()},
                      {"fnv1a64", digest_of(o.path, o.skip_timing)},
                      {"excludes", o.skip_timing ? json::array({"timing"}) : json::array()}});
    }
    json doc = {{"schema", 1},
                {"tool", "compois"},
                {"version", kVersion},
                {"command", command_},
                {"seed", seed_},
                {"config", config_},
                {"input", input_},
                {"outputs", outs},
                {"started", started_},
                {"finished", utc_now()}};
    auto f = open_out(path);
    f << doc.dump(2) << '\n';
  }

 private:
  std::string started_;
  std::uint64_t seed_;
  json command_;
  json config_ = json::object();
  json input_ = nullptr;
  std::vector<Output> outputs_;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("COMPOIS_SEED")) {
    try {
      std::size_t used = 0;
      const std::string text(env);
      const auto v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidParameter("COMPOIS_SEED is not an unsigned integer: '" + std::string(env) + "'");
  }
  return 1;
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  return fs::path(prefix.string() + suffix);
}

// -------------------------------------------------------------------------
// Options

struct SampleOpts {
  std::optional<double> mu;
  std::optional<double> nu;
  std::uint64_t n = 1000;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct FitOpts {
  std::string data;
  std::string formula;
  std::string model;
  std::string response;
  std::string algorithm = "exchange";
  std::uint64_t iterations = 100'000;
  std::uint64_t burnin = 10'000;
  std::uint64_t r = 100;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  bool standardize = false;
  bool no_adapt = false;
  std::vector<double> steps;
};

struct BicOpts {
  std::string data;
  std::string formulas;
  std::vector<std::string> models;
  std::uint64_t r = 5000;
  std::uint64_t iterations = 100'000;
  std::uint64_t burnin = 10'000;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  bool standardize = false;
};

struct BenchOpts {
  std::vector<double> mu_grid{0.1, 0.5, 1, 2, 5, 10, 30};
  std::vector<double> nu_grid{0.1, 0.3, 0.7, 1, 1.5, 3, 10};
  std::uint64_t draws = 10'000;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  std::string data = std::string(COMPOIS_DATA_DIR) + "/takeover_bids.csv";
  std::uint64_t iterations = 2000;
};

struct RerunOpts {
  std::string manifest;
  std::string out;
};

// -------------------------------------------------------------------------
// Commands

int cmd_sample(const SampleOpts& o, const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  const std::uint64_t seed = resolve_seed(o.seed);
  if (o.n == 0) throw InvalidParameter("--n must be positive");
  const CmpParams params(*o.mu, *o.nu);
  const Envelope env = build_envelope(params);
  RngStream rng(seed);

  std::ofstream file;
  if (!o.out.empty()) file = open_out(o.out);
  std::ostream& csv = o.out.empty() ? out : file;
  csv << "value,trials\n";
  std::uint64_t trials = 0;
  double sum = 0.0;
  for (std::uint64_t i = 0; i < o.n; ++i) {
    const DrawWithCost d = sample_one(params, env, rng);
    trials += d.trials;
    sum += static_cast<double>(d.value);
    csv << d.value << ',' << d.trials << '\n';
  }
  const double rate = static_cast<double>(o.n) / static_cast<double>(trials);
  std::ostream& info = o.out.empty() ? err : out;
  info << std::setprecision(6) << "draws=" << o.n << " proposals=" << trials
       << " acceptance_rate=" << rate << " mean=" << sum / static_cast<double>(o.n)
       << " envelope=" << (env.kind == EnvelopeKind::Poisson ? "poisson" : "geometric")
       << " log_B=" << env.log_b << '\n';
  if (!o.out.empty()) {
    file.close();
    Manifest m(args, seed);
    m.set_config({{"mu", *o.mu}, {"nu", *o.nu}, {"n", o.n}});
    m.add_output({"draws", o.out});
    m.write(with_suffix(o.out, ".manifest.json"));
  }
  return kExitOk;
}

ModelSpec resolve_model(const std::string& formula, const std::string& model,
                        const std::string& response) {
  if (!formula.empty() && !model.empty()) {
    throw InvalidParameter("give either --formula or --model, not both");
  }
  ModelSpec spec = formula.empty() ? builtin_model(model.empty() ? "model5r" : model)
                                   : parse_formula(formula, "custom");
  if (!response.empty()) spec.response = response;
  return spec;
}

void print_chain_summary(std::ostream& out, const ChainResult& res) {
  out << "model " << res.model << " (" << res.formula << "), n=" << res.n
      << ", algorithm=" << to_string(res.config.algorithm) << ", retained=" << res.retained
      << '\n';
  out << std::left << std::setw(18) << "coefficient" << std::right << std::setw(11) << "mean"
      << std::setw(11) << "sd" << std::setw(11) << "mcse" << std::setw(9) << "accept" << '\n';
  out << std::fixed;
  for (const auto& s : res.summaries) {
    out << std::left << std::setw(18) << s.name << std::right << std::setprecision(4)
        << std::setw(11) << s.mean << std::setw(11) << s.sd << std::setw(11) << s.mcse
        << std::setprecision(3) << std::setw(9) << s.accept_rate << '\n';
  }
  out << std::defaultfloat << std::setprecision(6);
  if (res.mess) {
    out << "mESS " << res.mess->value << (res.mess->regularized ? " (ridge-regularised)" : "")
        << '\n';
  } else {
    out << "mESS unavailable (singular covariance)\n";
  }
  out << "cpu_seconds " << res.cpu_seconds << ", draws_per_second " << res.draws_per_second
      << '\n';
}

int cmd_fit(const FitOpts& o, const std::vector<std::string>& args, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(o.seed);
  const ModelSpec spec = resolve_model(o.formula, o.model, o.response);
  const Dataset data = Dataset::from_csv_file(o.data);
  const Design design(spec, data, o.standardize);

  McmcConfig config;
  config.algorithm = parse_algorithm(o.algorithm);
  config.iterations = o.iterations;
  config.burn_in = o.burnin;
  config.r = o.r;
  config.seed = seed;
  config.exec.threads = o.threads;
  config.adapt = !o.no_adapt;
  config.initial_steps = o.steps;
  const ChainResult res = run_chain(design, config);
  print_chain_summary(out, res);

  if (!o.out.empty()) {
    const fs::path chain = with_suffix(o.out, "_chain.csv");
    const fs::path summary = with_suffix(o.out, "_summary.json");
    {
      auto f = open_out(chain);
      write_chain_csv(f, res);
    }
    {
      auto f = open_out(summary);
      write_summary_json(f, res);
    }
    Manifest m(args, seed);
    m.set_input(o.data);
    m.set_config({{"model", spec.name},
                  {"formula", spec.formula()},
                  {"algorithm", o.algorithm},
                  {"iterations", o.iterations},
                  {"burnin", o.burnin},
                  {"r", o.r},
                  {"threads", o.threads},
                  {"standardize", o.standardize},
                  {"adapt", !o.no_adapt}});
    m.add_output({"chain", chain});
    m.add_output({"summary", summary, true});
    m.write(with_suffix(o.out, "_manifest.json"));
    out << "wrote " << chain.string() << ", " << summary.string() << '\n';
  }
  return kExitOk;
}

std::vector<ModelSpec> read_formulas(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<ModelSpec> specs;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    ++index;
    std::string name = "model" + std::to_string(index);
    std::string text = line.substr(first);
    const auto colon = text.find(':');
    if (colon != std::string::npos && text.find('~') > colon) {
      name = text.substr(0, colon);
      while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
      text = text.substr(colon + 1);
    }
    specs.push_back(parse_formula(text, name));
  }
  if (specs.empty()) throw FormulaError("no formulas in " + path.string());
  return specs;
}

int cmd_bic(const BicOpts& o, const std::vector<std::string>& args, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(o.seed);
  std::vector<ModelSpec> specs;
  if (!o.formulas.empty()) {
    specs = read_formulas(o.formulas);
  } else {
    const std::vector<std::string> names =
        o.models.empty()
            ? std::vector<std::string>{"model1", "model2", "model3", "model4", "model5"}
            : o.models;
    for (const auto& n : names) specs.push_back(builtin_model(n));
  }
  const Dataset data = Dataset::from_csv_file(o.data);
  const ExecPolicy exec{o.threads};

  std::vector<BicEstimate> rows;
  for (std::size_t m = 0; m < specs.size(); ++m) {
    const auto& spec = specs[m];
    try {
      const Design design(spec, data, o.standardize);
      RngStream seeds = RngStream::derive(seed, m);
      McmcConfig config;
      config.iterations = o.iterations;
      config.burn_in = o.burnin;
      config.seed = seeds.next();
      config.exec = exec;
      const ChainResult res = run_chain(design, config);
      rows.push_back(bic_estimate(design, res.draws, o.r, seeds.next(), exec));
    } catch (const DataError& e) {
      throw DataError("model " + spec.name + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("model " + spec.name + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw InvalidParameter("model " + spec.name + ": " + e.what());
    }
  }
  rank_models(rows);

  std::ofstream file;
  if (!o.out.empty()) file = open_out(o.out);
  write_bic_csv(o.out.empty() ? out : static_cast<std::ostream&>(file), rows);
  if (!o.out.empty()) {
    file.close();
    for (const auto& row : rows) {
      out << std::left << std::setw(10) << row.model << " k=" << row.k << std::fixed
          << std::setprecision(2) << " bic_hat=" << row.bic_hat << " rank=" << row.rank << '\n'
          << std::defaultfloat;
    }
    Manifest m(args, seed);
    m.set_input(o.data);
    json models = json::array();
    for (const auto& s : specs) models.push_back({{"name", s.name}, {"formula", s.formula()}});
    m.set_config({{"models", models},
                  {"r", o.r},
                  {"iterations", o.iterations},
                  {"burnin", o.burnin},
                  {"threads", o.threads}});
    m.add_output({"bic", o.out});
    m.write(with_suffix(o.out, ".manifest.json"));
  }
  return kExitOk;
}

int cmd_bench(const BenchOpts& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  const std::uint64_t seed = resolve_seed(o.seed);
  const ExecPolicy exec{o.threads};
  const auto cells = acceptance_grid(o.mu_grid, o.nu_grid, o.draws, seed, exec);

  std::ofstream file;
  if (!o.out.empty()) file = open_out(o.out);
  write_acceptance_csv(o.out.empty() ? out : static_cast<std::ostream&>(file), cells);
  std::ostream& info = o.out.empty() ? err : out;

  double lo_over = 1.0, hi_over = 0.0, lo_under = 1.0, hi_under = 0.0;
  for (const auto& c : cells) {
    if (c.nu > 1.0) {
      lo_over = std::min(lo_over, c.rate());
      hi_over = std::max(hi_over, c.rate());
    } else if (c.nu < 1.0) {
      lo_under = std::min(lo_under, c.rate());
      hi_under = std::max(hi_under, c.rate());
    }
  }
  info << std::setprecision(4) << "acceptance nu>1: [" << lo_over << ", " << hi_over
       << "], nu<1: [" << lo_under << ", " << hi_under << "]\n";

  double throughput = 0.0;
  if (o.iterations > 0) {
    const Dataset data = Dataset::from_csv_file(o.data);
    const Design design(builtin_model("model5r"), data);
    McmcConfig config;
    config.iterations = o.iterations;
    config.burn_in = o.iterations / 10;
    config.seed = seed;
    config.exec = exec;
    throughput = run_chain(design, config).draws_per_second;
    info << std::setprecision(6) << "exchange sweeps/sec (model5r, n=" << design.n()
         << ", threads=" << o.threads << "): " << throughput << '\n';
  }
  if (!o.out.empty()) {
    file.close();
    Manifest m(args, seed);
    if (o.iterations > 0) m.set_input(o.data);
    m.set_config({{"mu_grid", o.mu_grid},
                  {"nu_grid", o.nu_grid},
                  {"draws", o.draws},
                  {"iterations", o.iterations},
                  {"threads", o.threads}});
    m.add_output({"acceptance", o.out});
    m.write(with_suffix(o.out, ".manifest.json"));
  }
  return kExitOk;
}

int cmd_rerun(const RerunOpts& o, std::ostream& out, std::ostream& err, bool& all_match) {
  const json manifest = json::parse(read_file(o.manifest));
  std::vector<std::string> args{"compois"};
  for (const auto& a : manifest.at("command")) args.push_back(a.get<std::string>());
  if (args.size() < 2) throw DataError("manifest has no command");

  const std::string& command = args[1];
  fs::path new_manifest;
  for (std::size_t i = 2; i + 1 < args.size(); ++i) {
    if (args[i] == "--out") {
      args[i + 1] = o.out;
      new_manifest = command == "fit" ? with_suffix(o.out, "_manifest.json")
                                      : with_suffix(o.out, ".manifest.json");
    }
  }
  if (new_manifest.empty()) throw DataError("manifest command wrote no files (no --out)");
  if (manifest.contains("seed") &&
      std::find(args.begin(), args.end(), "--seed") == args.end()) {
    args.push_back("--seed");
    args.push_back(std::to_string(manifest.at("seed").get<std::uint64_t>()));
  }
  std::ostringstream sink;
  const int code = run(args, sink, err);
  if (code != kExitOk) return code;

  const json fresh = json::parse(read_file(new_manifest));
  all_match = true;
  for (const auto& old_out : manifest.at("outputs")) {
    const std::string role = old_out.at("role");
    const std::string old_digest = old_out.at("fnv1a64");
    std::string new_digest = "missing";
    for (const auto& n : fresh.at("outputs")) {
      if (n.at("role") == role) new_digest = n.at("fnv1a64");
    }
    const bool same = new_digest == old_digest;
    all_match = all_match && same;
    out << role << ": " << (same ? "identical" : "DIFFERENT") << " (" << old_digest << " vs "
        << new_digest << ")\n";
  }
  return kExitOk;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const fs::path& path) { return fnv1a64(read_file(path)); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact COM-Poisson sampling, likelihood estimation and regression"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SampleOpts so;
  auto* sample = app.add_subcommand("sample", "Draw exact COM-Poisson variates");
  sample->add_option("--mu", so.mu, "Location mu > 0")->required();
  sample->add_option("--nu", so.nu, "Dispersion nu > 0")->required();
  sample->add_option("--n", so.n, "Number of draws")->capture_default_str();
  sample->add_option("--seed", so.seed, "Seed (default: $COMPOIS_SEED, else 1)");
  sample->add_option("--out", so.out, "Output CSV (default: stdout)");

  FitOpts fo;
  auto* fit = app.add_subcommand("fit", "Fit a COM-Poisson regression by MCMC");
  fit->add_option("--data", fo.data, "Input CSV")->required();
  fit->add_option("--formula", fo.formula, "e.g. 'mu ~ WHTKNGHT ; nu ~ SIZE + FINREST'");
  fit->add_option("--model", fo.model, "Built-in model: model1..model5, model5r");
  fit->add_option("--response", fo.response, "Response column (overrides the formula)");
  fit->add_option("--algorithm", fo.algorithm, "exchange | gimh | mcwm | exact-truncated")
      ->capture_default_str();
  fit->add_option("--iterations", fo.iterations, "Total sweeps, burn-in included")
      ->capture_default_str();
  fit->add_option("--burnin", fo.burnin, "Burn-in sweeps")->capture_default_str();
  fit->add_option("--r", fo.r, "Acceptances per likelihood estimate")->capture_default_str();
  fit->add_option("--seed", fo.seed, "Seed (default: $COMPOIS_SEED, else 1)");
  fit->add_option("--out", fo.out, "Output prefix for _chain.csv, _summary.json, _manifest.json");
  fit->add_option("--threads", fo.threads, "Worker threads")->capture_default_str();
  fit->add_flag("--standardize", fo.standardize, "z-score covariates");
  fit->add_flag("--no-adapt", fo.no_adapt, "Keep step sizes fixed during burn-in");
  fit->add_option("--steps", fo.steps, "Initial step sizes, one per coefficient")->delimiter(',');

  BicOpts bo;
  auto* bicc = app.add_subcommand("bic", "Estimate BIC for candidate models");
  bicc->add_option("--data", bo.data, "Input CSV")->required();
  bicc->add_option("--formulas", bo.formulas, "File with one 'name: formula' per line");
  bicc->add_option("--models", bo.models, "Built-in models (default model1..model5)")
      ->delimiter(',');
  bicc->add_option("--r", bo.r, "Acceptances per likelihood estimate")->capture_default_str();
  bicc->add_option("--iterations", bo.iterations, "Exchange sweeps per model")
      ->capture_default_str();
  bicc->add_option("--burnin", bo.burnin, "Burn-in sweeps")->capture_default_str();
  bicc->add_option("--seed", bo.seed, "Seed (default: $COMPOIS_SEED, else 1)");
  bicc->add_option("--out", bo.out, "Output CSV (default: stdout)");
  bicc->add_option("--threads", bo.threads, "Worker threads")->capture_default_str();
  bicc->add_flag("--standardize", bo.standardize, "z-score covariates");

  BenchOpts ko;
  auto* bench = app.add_subcommand("bench", "Acceptance-rate grid and sampler throughput");
  bench->add_option("--mu-grid", ko.mu_grid, "Comma-separated mu values")->delimiter(',');
  bench->add_option("--nu-grid", ko.nu_grid, "Comma-separated nu values")->delimiter(',');
  bench->add_option("--draws", ko.draws, "Acceptances per cell (>= 10000)")
      ->capture_default_str();
  bench->add_option("--seed", ko.seed, "Seed (default: $COMPOIS_SEED, else 1)");
  bench->add_option("--out", ko.out, "Output CSV (default: stdout)");
  bench->add_option("--threads", ko.threads, "Worker threads")->capture_default_str();
  bench->add_option("--data", ko.data, "Data for the throughput run")->capture_default_str();
  bench->add_option("--iterations", ko.iterations, "Exchange sweeps for throughput (0 skips)")
      ->capture_default_str();

  RerunOpts ro;
  auto* rerun = app.add_subcommand("rerun", "Re-execute a manifest and compare outputs");
  rerun->add_option("--manifest", ro.manifest, "Manifest JSON")->required();
  rerun->add_option("--out", ro.out, "Output path or prefix for the rerun")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    const auto selected = app.get_subcommands();
    err << (selected.empty() ? app.help() : selected.front()->help());
    return kExitUsage;
  }

  try {
    if (*sample) return cmd_sample(so, args, out, err);
    if (*fit) return cmd_fit(fo, args, out);
    if (*bicc) return cmd_bic(bo, args, out);
    if (*bench) return cmd_bench(ko, args, out, err);
    if (*rerun) {
      bool all_match = false;
      const int code = cmd_rerun(ro, out, err, all_match);
      if (code != kExitOk) return code;
      return all_match ? kExitOk : kExitNumerical;
    }
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const json::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace compois::cli
