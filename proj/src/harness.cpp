#include "mmcgp/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mmcgp/benchmarks.hpp"
#include "mmcgp/errors.hpp"
#include "mmcgp/poisson_kl.hpp"

namespace mmcgp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0.0 || d != std::floor(d) || d > 1e18) {
    throw ConfigError("'" + key + "': expected a nonnegative integer, got '" + v + "'");
  }
  return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(to_double(key, trim(tok)));
  if (out.empty()) throw ConfigError("'" + key + "': empty list");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::string* find(const std::map<std::string, std::string>& m, const std::string& k) {
  auto it = m.find(k);
  return it == m.end() ? nullptr : &it->second;
}

ordered_json moments_to_json(const Moments& m) {
  ordered_json j;
  j["mean"] = m.mean;
  j["variance"] = m.variance;
  j["central3"] = m.central3;
  j["central4"] = m.central4;
  j["central5"] = m.central5;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::kMonteCarlo: return "mc";
    case Method::kMmc: return "mmc";
    case Method::kGpMmc: return "gpmmc";
  }
  return "?";
}

// --- configuration -----------------------------------------------------------

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));

    if (key.rfind("model.", 0) == 0) {
      cfg.model_params[key.substr(6)] = value;
    } else if (key == "model") {
      cfg.model = value;
    } else if (key == "method") {
      if (value == "mc") cfg.method = Method::kMonteCarlo;
      else if (value == "mmc") cfg.method = Method::kMmc;
      else if (value == "gpmmc") cfg.method = Method::kGpMmc;
      else throw ConfigError("unknown method '" + value + "'");
    } else if (key == "seed") {
      cfg.seed = to_count(key, value);
    } else if (key == "range.lo") {
      cfg.range_lo = to_double(key, value);
    } else if (key == "range.hi") {
      cfg.range_hi = to_double(key, value);
    } else if (key == "range.bins") {
      cfg.bins = static_cast<int>(to_count(key, value));
    } else if (key == "iterations") {
      cfg.mmc.iterations = static_cast<int>(to_count(key, value));
    } else if (key == "samples") {
      cfg.mmc.samples_per_iteration = to_count(key, value);
    } else if (key == "burn_in") {
      cfg.mmc.burn_in = to_count(key, value);
    } else if (key == "proposal_scale") {
      cfg.mmc.proposal_scale = to_list(key, value);
    } else if (key == "gamma") {
      cfg.gamma = to_double(key, value);
    } else if (key == "beta_max") {
      cfg.beta_max = to_double(key, value);
    } else if (key == "kernel_p") {
      cfg.kernel_p = static_cast<int>(to_count(key, value));
    } else if (key == "initial_design") {
      cfg.initial_design = to_count(key, value);
    } else if (key == "mc_samples") {
      cfg.mc_samples = to_count(key, value);
    } else if (key == "pilot_samples") {
      cfg.pilot_samples = to_count(key, value);
    } else if (key == "output") {
      cfg.output_dir = value;
    } else if (key == "log_steps") {
      cfg.log_steps = to_bool(key, value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse(in);
}

void RunConfig::validate() const {
  if (model.empty()) throw ConfigError("config: 'model' is required");
  if (!seed) throw ConfigError("config: 'seed' is required");
  if (bins <= 0) throw ConfigError("config: 'range.bins' must be positive");
  if (range_lo.has_value() != range_hi.has_value()) {
    throw ConfigError("config: give both range.lo and range.hi, or neither");
  }
  if (range_lo && !(*range_lo < *range_hi)) throw ConfigError("config: range.lo must be < range.hi");
  if (method == Method::kMonteCarlo) {
    if (mc_samples == 0) throw ConfigError("config: 'mc_samples' must be positive");
    return;
  }
  if (mmc.iterations <= 0 || mmc.samples_per_iteration == 0) {
    throw ConfigError("config: 'iterations' and 'samples' must be positive");
  }
  if (mmc.effective_burn_in() >= mmc.samples_per_iteration) {
    throw ConfigError("config: burn_in must be smaller than samples");
  }
  if (method == Method::kGpMmc) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("config: gamma must lie in [0, 1]");
    if (!(beta_max > 0.0 && beta_max < 1.0)) throw ConfigError("config: beta_max must lie in (0, 1)");
    if (kernel_p != 1 && kernel_p != 2) throw ConfigError("config: kernel_p must be 1 or 2");
  }
}

std::unique_ptr<PerformanceModel> make_model(const std::string& name,
                                             const std::map<std::string, std::string>& params) {
  auto known = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : params) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; })) {
        throw ConfigError("model '" + name + "' has no parameter '" + k + "'");
      }
    }
  };
  auto number = [&](const char* key, double fallback) {
    const std::string* v = find(params, key);
    return v ? to_double(std::string("model.") + key, *v) : fallback;
  };

  if (name == "min_distance") {
    known({"metric", "dim", "center1", "center2"});
    DistanceMetric metric = DistanceMetric::kEuclidean;
    if (const auto* m = find(params, "metric")) {
      if (*m == "squared") metric = DistanceMetric::kSquaredEuclidean;
      else if (*m != "euclidean") throw ConfigError("model.metric must be euclidean or squared");
    }
    MinDistanceSpec spec;
    const auto* c1 = find(params, "center1");
    const auto* c2 = find(params, "center2");
    if (c1 || c2) {
      if (!c1 || !c2) throw ConfigError("min_distance: give both center1 and center2");
      const auto a = to_list("model.center1", *c1);
      const auto b = to_list("model.center2", *c2);
      spec = {Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())),
              Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())),
              metric};
    } else if (const auto* d = find(params, "dim")) {
      spec = MinDistanceSpec::diagonal(static_cast<int>(to_count("model.dim", *d)), metric);
    } else {
      spec = MinDistanceSpec::planar(metric);
    }
    try {
      return std::make_unique<MinDistanceModel>(std::move(spec));
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
  }
  if (name == "beam") {
    known({"E_mean", "E_var", "length"});
    BeamSpec spec;
    spec.means[4] = number("E_mean", spec.means[4]);
    spec.variances[4] = number("E_var", spec.variances[4]);
    spec.length = number("length", spec.length);
    return std::make_unique<BeamModel>(spec);
  }
  if (name == "poisson_kl") {
    known({"grid", "modes", "corr", "a0", "kl_cache"});
    PoissonKLSpec spec;
    spec.grid = static_cast<int>(number("grid", spec.grid));
    spec.modes = static_cast<int>(number("modes", spec.modes));
    spec.corr = number("corr", spec.corr);
    spec.a0 = number("a0", spec.a0);
    const auto* cache = find(params, "kl_cache");
    try {
      spec.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
    auto basis = std::make_shared<const KLBasis>(
        kl_basis_cached(spec, cache ? std::filesystem::path(*cache) : std::filesystem::path()));
    return std::make_unique<PoissonKLModel>(spec, std::move(basis));
  }
  if (name == "identity") {
    known({"dim"});
    return std::make_unique<IdentityModel>(static_cast<int>(number("dim", 1)));
  }
  throw ConfigError("unknown model '" + name + "'");
}

// --- PDF files ---------------------------------------------------------------

Binning PdfTable::binning() const {
  if (pdf.empty()) throw ArgumentError("empty pdf table");
  return Binning(lo.front(), hi.back(), static_cast<int>(pdf.size()));
}

PdfTable PdfTable::from(const Binning& b, const std::vector<double>& pdf) {
  PdfTable t;
  for (int i = 0; i < b.bins(); ++i) {
    t.lo.push_back(b.lower_edge(i));
    t.hi.push_back(b.upper_edge(i));
  }
  t.pdf = pdf;
  return t;
}

void PdfTable::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  out << "bin,center,lo,hi,pdf\n";
  for (std::size_t i = 0; i < pdf.size(); ++i) {
    out << i << ',' << fmt(0.5 * (lo[i] + hi[i])) << ',' << fmt(lo[i]) << ',' << fmt(hi[i]) << ','
        << fmt(pdf[i]) << '\n';
  }
  write_text(path, out.str());
}

PdfTable PdfTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty pdf file " + path.string());
  std::vector<std::string> header;
  {
    std::stringstream ss(trim(line));
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(trim(tok));
  }
  auto column = [&](const char* name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t clo = column("lo"), chi = column("hi"), cpdf = column("pdf");
  const std::size_t citer = std::find(header.begin(), header.end(), "iter") != header.end()
                                ? column("iter")
                                : header.size();
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      row.push_back(tok.empty() ? 0.0 : to_double(path.string(), tok));
    }
    if (row.size() != header.size()) throw IoError(path.string() + ": ragged row");
    rows.push_back(std::move(row));
  }
  // A histograms.csv file holds every iteration; keep the last one.
  if (citer < header.size() && !rows.empty()) {
    const double last = rows.back()[citer];
    std::erase_if(rows, [&](const auto& r) { return r[citer] != last; });
  }
  PdfTable t;
  for (const auto& r : rows) {
    t.lo.push_back(r[clo]);
    t.hi.push_back(r[chi]);
    t.pdf.push_back(r[cpdf]);
  }
  if (t.pdf.empty()) throw IoError(path.string() + ": no bins");
  return t;
}

ComparisonReport compare_pdfs(const PdfTable& baseline, const PdfTable& candidate) {
  if (baseline.pdf.size() != candidate.pdf.size()) {
    throw ArgumentError("compare_pdfs: bin counts differ");
  }
  for (std::size_t i = 0; i < baseline.pdf.size(); ++i) {
    const double tol = 1e-12 * std::max({1.0, std::abs(baseline.lo[i]), std::abs(baseline.hi[i])});
    if (std::abs(baseline.lo[i] - candidate.lo[i]) > tol ||
        std::abs(baseline.hi[i] - candidate.hi[i]) > tol) {
      throw ArgumentError("compare_pdfs: bin edges differ at bin " + std::to_string(i));
    }
  }
  ComparisonReport rep;
  rep.rel_err.resize(baseline.pdf.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < baseline.pdf.size(); ++i) {
    if (!(baseline.pdf[i] > 0.0)) continue;
    const double e = std::abs(candidate.pdf[i] - baseline.pdf[i]) / baseline.pdf[i];
    rep.rel_err[i] = e;
    rep.max_rel_err = std::max(rep.max_rel_err, e);
    sum += e;
    ++rep.compared_bins;
  }
  if (rep.compared_bins > 0) rep.avg_rel_err = sum / static_cast<double>(rep.compared_bins);
  const Binning b = baseline.binning();
  rep.baseline_moments = estimate_moments(baseline.pdf, b);
  rep.candidate_moments = estimate_moments(candidate.pdf, b);
  return rep;
}

std::string report_json(const ComparisonReport& report) {
  ordered_json j;
  j["compared_bins"] = report.compared_bins;
  j["max_rel_err"] = report.max_rel_err;
  j["avg_rel_err"] = report.avg_rel_err;
  ordered_json per_bin = ordered_json::array();
  for (const auto& e : report.rel_err) per_bin.push_back(e ? ordered_json(*e) : ordered_json());
  j["rel_err"] = per_bin;
  j["moments"]["baseline"] = moments_to_json(report.baseline_moments);
  j["moments"]["candidate"] = moments_to_json(report.candidate_moments);
  return j.dump(2) + "\n";
}

std::string moments_json(const Moments& m) { return moments_to_json(m).dump(2) + "\n"; }

// --- experiment runner -------------------------------------------------------

namespace {

std::string histogram_rows(int iter, const Binning& b, const Histogram& h,
                           const std::vector<double>& theta) {
  std::vector<double> pdf(static_cast<std::size_t>(b.bins()), 0.0);
  if (h.total > 0) {
    bool any = std::any_of(h.counts.begin(), h.counts.end(), [](auto c) { return c > 0; });
    if (any) pdf = estimate_pdf(WeightTable{theta, iter}, h, b);
  }
  std::ostringstream out;
  for (int i = 0; i < b.bins(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double hhat = h.total ? static_cast<double>(h.counts[ui]) / static_cast<double>(h.total) : 0.0;
    out << iter << ',' << i << ',' << fmt(b.center(i)) << ',' << fmt(b.lower_edge(i)) << ','
        << fmt(b.upper_edge(i)) << ',' << h.counts[ui] << ',' << fmt(hhat) << ',' << fmt(theta[ui])
        << ',' << fmt(pdf[ui] * b.width()) << ',' << fmt(pdf[ui]) << '\n';
  }
  return out.str();
}

constexpr const char* kHistogramHeader = "iter,bin,center,lo,hi,count,H_hat,theta,P_i,pdf\n";

}  // namespace

ExperimentResult run_experiment(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto model = make_model(config.model, config.model_params);
  const std::uint64_t seed = *config.seed;

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.output_dir.string());

  EvalLedger ledger;
  ExperimentResult res;
  res.method = config.method;

  // Output range: given, or from a padded pilot prior sample.
  double lo = 0.0, hi = 0.0;
  if (config.range_lo) {
    lo = *config.range_lo;
    hi = *config.range_hi;
  } else {
    Rng pilot(seed ^ 0x9e3779b97f4a7c15ULL);
    double mn = INFINITY, mx = -INFINITY;
    for (std::size_t i = 0; i < std::max<std::size_t>(config.pilot_samples, 2); ++i) {
      const double y = evaluate(*model, model->sample_prior(pilot), ledger);
      mn = std::min(mn, y);
      mx = std::max(mx, y);
    }
    const double pad = 0.1 * std::max(mx - mn, 1e-12);
    lo = mn - pad;
    hi = mx + pad;
    res.pilot_evals = ledger.true_evals();
  }
  res.binning = Binning(lo, hi, config.bins);
  const Binning& binning = res.binning;

  std::ostringstream hist;
  hist << kHistogramHeader;
  ordered_json summary;
  summary["method"] = to_string(config.method);
  summary["model"] = config.model;
  summary["seed"] = seed;
  summary["range"] = {{"lo", lo}, {"hi", hi}, {"bins", config.bins}};

  if (config.method == Method::kMonteCarlo) {
    ChainRng rng(seed);
    Histogram h(binning.bins());
    for (std::size_t i = 0; i < config.mc_samples; ++i) {
      h.add(binning, evaluate(*model, model->sample_prior(rng.init), ledger));
    }
    res.pdf.resize(static_cast<std::size_t>(binning.bins()));
    for (std::size_t i = 0; i < res.pdf.size(); ++i) {
      res.pdf[i] = static_cast<double>(h.counts[i]) /
                   (static_cast<double>(h.total) * binning.width());
    }
    hist << histogram_rows(0, binning, h, std::vector<double>(res.pdf.size(), 1.0));
    summary["samples"] = config.mc_samples;
    summary["rho"] = 1.0 - static_cast<double>(h.overflow_low + h.overflow_high) /
                               static_cast<double>(h.total);
  } else {
    const Proposal proposal = make_proposal(*model, config.mmc.proposal_scale);
    MmcConfig mmc = config.mmc;
    mmc.seed = seed;
    std::unique_ptr<StepKernel> kernel;
    SurrogateKernel* surrogate = nullptr;
    if (config.method == Method::kMmc) {
      kernel = std::make_unique<ExactKernel>(*model, proposal, ledger);
    } else {
      SurrogateKernelConfig sk;
      sk.gamma = config.gamma;
      sk.beta_max = config.beta_max;
      sk.kernel = KernelParams{1.0, {}, config.kernel_p};
      sk.proposal = proposal;
      sk.initial_design = config.initial_design;
      auto k = std::make_unique<SurrogateKernel>(*model, binning, sk, ledger, config.log_steps);
      surrogate = k.get();
      kernel = std::move(k);
    }
    MmcResult mr = run_mmc(*model, binning, mmc, *kernel);
    for (std::size_t k = 0; k < mr.iterations.size(); ++k) {
      hist << histogram_rows(static_cast<int>(k), binning, mr.iterations[k].histogram,
                             mr.iterations[k].weights.theta);
    }
    res.pdf = mr.pdf;
    summary["iterations"] = mmc.iterations;
    summary["samples_per_iteration"] = mmc.samples_per_iteration;
    summary["burn_in"] = mmc.effective_burn_in();
    summary["proposal_scale"] = std::vector<double>(proposal.scale.data(),
                                                    proposal.scale.data() + proposal.scale.size());
    ordered_json flat = ordered_json::array(), acc = ordered_json::array();
    for (const auto& it : mr.iterations) {
      flat.push_back(it.flatness);
      acc.push_back(it.acceptance_rate);
    }
    summary["flatness"] = flat;
    summary["acceptance_rate"] = acc;
    summary["rho"] = mr.rho;
    summary["initial_state_evals"] = mr.initial_state_evals;
    if (surrogate) {
      const auto& c = surrogate->counters();
      ordered_json g;
      g["gamma"] = config.gamma;
      g["beta_max"] = config.beta_max;
      g["kernel_p"] = config.kernel_p;
      const auto& l = surrogate->config().kernel.lengths;
      g["lengths"] = std::vector<double>(l.data(), l.data() + l.size());
      g["initial_design"] = c.design_evals;
      g["start_evals"] = c.start_evals;
      g["random_refinements"] = c.random_refinements;
      g["misassignment_refinements"] = c.misassignment_refinements;
      g["fallbacks"] = c.fallbacks;
      g["surrogate_steps"] = c.surrogate_steps;
      g["store_size"] = surrogate->store().size();
      summary["gpmmc"] = g;
      surrogate->store().save_csv(config.output_dir / "store.csv");
      if (config.log_steps) {
        write_step_log(config.output_dir / "steps.csv", surrogate->records());
        res.steps = surrogate->records();
      }
      res.surrogate = c;
    }
    if (!mr.warnings.empty()) summary["warnings"] = mr.warnings;
    res.mmc = std::move(mr);
  }

  res.moments = estimate_moments(res.pdf, binning);
  res.ledger = ledger.snapshot();
  summary["pilot_evals"] = res.pilot_evals;
  summary["total_true_evals"] = res.ledger.true_evals;
  summary["surrogate_evals"] = res.ledger.surrogate_evals;
  summary["moments"] = moments_to_json(res.moments);

  write_text(config.output_dir / "histograms.csv", hist.str());
  PdfTable::from(binning, res.pdf).save(config.output_dir / "pdf.csv");
  write_text(config.output_dir / "summary.json", summary.dump(2) + "\n");

  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ordered_json timing;
  timing["runtime_seconds"] = res.runtime_seconds;
  write_text(config.output_dir / "timing.json", timing.dump(2) + "\n");
  return res;
}

}  // namespace mmcgp
