#include "zib/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace zib {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

json config_json(const SamplerConfig& c) {
  return json{{"iterations", c.iterations}, {"burn_in", c.burn_in},
              {"thin", c.thin},             {"seed", c.seed},
              {"scale_gamma", c.scale_gamma}, {"scale_delta", c.scale_delta},
              {"scale_log_psi", c.scale_log_psi}, {"scale_log_phi", c.scale_log_phi},
              {"adapt_window", c.adapt_window}, {"target_accept", c.target_accept}};
}

SamplerConfig config_from_json(const json& j) {
  SamplerConfig c;
  c.iterations = j.at("iterations");
  c.burn_in = j.at("burn_in");
  c.thin = j.at("thin");
  c.seed = j.at("seed");
  return c;
}

json input_json(const std::string& path) {
  return json{{"path", path}, {"fnv1a", file_hash(path)}};
}

void write_manifest(const std::string& dir, json manifest, const Timer& timer) {
  manifest["wall_seconds"] = timer.seconds();
  atomic_write_text((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IngestionError("cannot create directory '" + dir + "': " + ec.message());
}

json read_manifest(const std::string& dir) {
  const std::string path = (fs::path(dir) / "manifest.json").string();
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IngestionError(path + ": invalid manifest: " + e.what());
  }
  return j;
}

/// Runs tasks [0, n) on up to `jobs` threads; rethrows the first failure.
void parallel_for(int n, int jobs, const std::function<void(int)>& task) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) task(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next.store(n);
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_labeled_pair(const std::string& dir, const LabeledDataset& train,
                        const LabeledDataset& test) {
  const std::vector<std::string> xn{"intercept", "x_1"};
  const std::vector<std::string> gn{"intercept", "g_1"};
  write_dataset_csv((fs::path(dir) / "train.csv").string(), train.data, xn, gn);
  write_dataset_csv((fs::path(dir) / "test.csv").string(), test.data, xn, gn);

  const int nt = train.data.n();
  const int n = nt + test.data.n();
  Eigen::MatrixXd truth(n, 4);
  auto fill = [&](const LabeledDataset& d, int offset, double set) {
    for (int i = 0; i < d.data.n(); ++i) {
      truth(offset + i, 0) = set;
      truth(offset + i, 1) = d.label[i];
      truth(offset + i, 2) = d.w_true[i];
      truth(offset + i, 3) =
          d.effects_true ? (*d.effects_true)[i] : std::numeric_limits<double>::quiet_NaN();
    }
  };
  fill(train, 0, 0.0);
  fill(test, nt, 1.0);
  write_csv((fs::path(dir) / "truth.csv").string(), {"set", "label", "w_true", "effect_true"},
            truth);
}

PriorSpec build_priors(const FitArgs& args, const IngestResult& ing, ModelKind kind) {
  PriorSpec priors = PriorSpec::diffuse(static_cast<int>(ing.x_names.size()),
                                        static_cast<int>(ing.g_names.size()));
  if (args.gamma0_prior) priors.gamma[0] = *args.gamma0_prior;
  if (args.delta0_prior) priors.delta[0] = *args.delta0_prior;
  if (is_spatial(kind)) {
    if (!ing.data.coords)
      throw SpecificationError("model " + model_name(kind) +
                               " needs coordinate columns s1,s2 in the data");
    const auto bounds = args.phi_bounds ? *args.phi_bounds : default_phi_bounds(*ing.data.coords);
    priors.phi_lo = bounds.first;
    priors.phi_hi = bounds.second;
  }
  return priors;
}

ChainOutput pool_chains(const std::vector<ChainOutput>& chains) {
  ChainOutput pooled = chains[0];
  if (chains.size() == 1) return pooled;
  const int per = chains[0].n_kept();
  pooled.samples.resize(per * static_cast<int>(chains.size()), chains[0].samples.cols());
  pooled.z_draws.resize(per * static_cast<int>(chains.size()), chains[0].z_draws.cols());
  for (size_t c = 0; c < chains.size(); ++c) {
    pooled.samples.middleRows(static_cast<int>(c) * per, per) = chains[c].samples;
    pooled.z_draws.middleRows(static_cast<int>(c) * per, per) = chains[c].z_draws;
  }
  return pooled;
}

struct LoadedPredictions {
  ModelKind kind = ModelKind::M1;
  std::vector<PredictiveDist> preds;
};

LoadedPredictions load_predictions(const std::string& pred_dir) {
  const json man = read_manifest(pred_dir);
  if (man.value("command", "") != "predict")
    throw SpecificationError(pred_dir + ": manifest is not from a predict run");
  LoadedPredictions out;
  out.kind = model_from_name(man.at("model"));
  const int m = man.at("n_sites");

  const CsvTable comps = read_csv((fs::path(pred_dir) / "components.csv").string());
  const CsvTable ens = read_csv((fs::path(pred_dir) / "ensemble.csv").string());
  std::vector<std::vector<PredComponent>> site_comps(m);
  std::vector<std::vector<double>> site_ens(m);
  const int sc = comps.col("site"), pc = comps.col("pi"), mc = comps.col("mu"),
            yc = comps.col("psi");
  for (int r = 0; r < comps.n_rows(); ++r) {
    const int s = static_cast<int>(comps.values(r, sc));
    if (s < 0 || s >= m) throw IngestionError("components.csv: site index out of range");
    site_comps[s].push_back(PredComponent::make(comps.values(r, pc), comps.values(r, mc),
                                                comps.values(r, yc), out.kind));
  }
  const int es = ens.col("site"), ev = ens.col("value");
  for (int r = 0; r < ens.n_rows(); ++r) {
    const int s = static_cast<int>(ens.values(r, es));
    if (s < 0 || s >= m) throw IngestionError("ensemble.csv: site index out of range");
    site_ens[s].push_back(ens.values(r, ev));
  }
  for (int s = 0; s < m; ++s)
    out.preds.push_back(PredictiveDist::from_components(out.kind, std::move(site_comps[s]),
                                                        std::move(site_ens[s])));
  return out;
}

std::optional<std::vector<int>> load_zero_source_truth(const std::string& truth_path, int n_test) {
  if (truth_path.empty()) return std::nullopt;
  const CsvTable t = read_csv(truth_path);
  const int lc = t.col("label");
  std::vector<int> labels;
  if (t.has("set")) {
    const int sc = t.col("set");
    for (int r = 0; r < t.n_rows(); ++r)
      if (t.values(r, sc) == 1.0) labels.push_back(static_cast<int>(t.values(r, lc)));
  } else {
    for (int r = 0; r < t.n_rows(); ++r) labels.push_back(static_cast<int>(t.values(r, lc)));
  }
  if (static_cast<int>(labels.size()) != n_test)
    throw IngestionError("truth labels count (" + std::to_string(labels.size()) +
                         ") does not match test set size (" + std::to_string(n_test) + ")");
  // 1 = unsuitable zero, 0 = censored zero; positives (label 0) ignored.
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] == 1 ? 1 : 0;
  return out;
}

std::string score_aggregate_text(const ScoreReport& rep) {
  std::ostringstream out;
  out << "metric,value\n";
  out << "n_zero," << rep.n_zero << "\n";
  out << "n_pos," << rep.n_pos << "\n";
  out << "mean_crps_f," << fmt(rep.mean_crps_f) << "\n";
  out << "mean_crps_f_latent," << fmt(rep.mean_crps_f_latent) << "\n";
  out << "mean_crps_h," << fmt(rep.mean_crps_h) << "\n";
  out << "tjur_r2," << fmt(rep.tjur) << "\n";
  out << "auc_zero," << fmt(rep.auc_zero) << "\n";
  out << "auc_source," << fmt(rep.auc_source) << "\n";
  return out.str();
}

}  // namespace

void cmd_simulate(const SimulateArgs& args) {
  Timer timer;
  if (args.scenario.empty() == args.grid.empty())
    throw UsageError("simulate: give exactly one of --scenario or --grid");
  if (args.reps < 1) throw UsageError("simulate: --reps must be >= 1");

  std::vector<ScenarioSpec> specs;
  if (!args.scenario.empty())
    specs.push_back(named_scenario(args.scenario));
  else
    specs = scenario_grid(args.grid);
  for (auto& s : specs) {
    if (args.n_train > 0) s.n_train = args.n_train;
    if (args.n_test > 0) s.n_test = args.n_test;
    if (args.region > 0.0) s.region = args.region;
  }

  Rng master(args.seed);
  json cells = json::array();
  for (size_t c = 0; c < specs.size(); ++c) {
    for (int rep = 0; rep < args.reps; ++rep) {
      fs::path dir(args.out_dir);
      if (specs.size() > 1) dir /= specs[c].name;
      if (args.reps > 1) dir /= "rep" + std::to_string(rep + 1);
      ensure_dir(dir.string());
      Rng rng(args.seed ^ (0x9e3779b97f4a7c15ULL * (c * 100003 + rep + 1)));
      const auto [train, test] = generate(specs[c], rng);
      write_labeled_pair(dir.string(), train, test);
      if (rep == 0) {
        const auto [fu, fc] = expected_zero_fractions(specs[c]);
        json cell{{"name", specs[c].name},
                  {"model", model_name(specs[c].kind)},
                  {"gamma", std::vector<double>(specs[c].truth.gamma.begin(),
                                                specs[c].truth.gamma.end())},
                  {"delta", std::vector<double>(specs[c].truth.delta.begin(),
                                                specs[c].truth.delta.end())},
                  {"psi", specs[c].truth.psi},
                  {"expected_unsuitable_frac", fu},
                  {"expected_censored_frac", fc}};
        if (specs[c].truth.phi) cell["phi"] = *specs[c].truth.phi;
        cells.push_back(cell);
      }
    }
  }

  ensure_dir(args.out_dir);
  json man{{"command", "simulate"},
           {"scenario", args.scenario},
           {"grid", args.grid},
           {"reps", args.reps},
           {"seed", args.seed},
           {"cells", cells}};
  write_manifest(args.out_dir, man, timer);
}

void cmd_fit(const FitArgs& args) {
  Timer timer;
  if (args.data.empty()) throw UsageError("fit: --data is required");
  if (args.chains < 1) throw UsageError("fit: --chains must be >= 1");
  args.config.validate();
  const ModelKind kind = model_from_name(args.model);

  const CsvTable table = read_csv(args.data);
  const IngestResult ing = ingest_dataset(table, args.standardize);
  const PriorSpec priors = build_priors(args, ing, kind);

  const auto chains = run_chains(ing.data, kind, priors, args.config, args.chains, args.jobs);
  ensure_dir(args.out_dir);
  const fs::path dir(args.out_dir);

  // chain.csv: leading chain id, then the named parameter columns.
  {
    const int per = chains[0].n_kept();
    const int p = static_cast<int>(chains[0].names.size());
    std::vector<std::string> header{"chain"};
    header.insert(header.end(), chains[0].names.begin(), chains[0].names.end());
    Eigen::MatrixXd vals(per * args.chains, p + 1);
    for (int c = 0; c < args.chains; ++c) {
      vals.block(c * per, 0, per, 1).setConstant(c + 1);
      vals.block(c * per, 1, per, p) = chains[c].samples;
    }
    write_csv((dir / "chain.csv").string(), header, vals);
  }

  // zdraws.csv: retained source indicators for the zero observations.
  {
    const int per = chains[0].n_kept();
    const int nz = static_cast<int>(chains[0].zero_indices.size());
    std::vector<std::string> header{"chain"};
    for (int idx : chains[0].zero_indices) header.push_back("z_" + std::to_string(idx));
    Eigen::MatrixXd vals(per * args.chains, nz + 1);
    for (int c = 0; c < args.chains; ++c) {
      vals.block(c * per, 0, per, 1).setConstant(c + 1);
      vals.block(c * per, 1, per, nz) = chains[c].z_draws.cast<double>();
    }
    write_csv((dir / "zdraws.csv").string(), header, vals);
  }

  const ChainOutput pooled = pool_chains(chains);
  const PosteriorSummary sum = summarize(pooled);
  {
    std::ostringstream out;
    out << "param,mean,q2.5,q97.5\n";
    for (size_t j = 0; j < sum.names.size(); ++j) {
      out << sum.names[j] << ',' << fmt(sum.mean[j]) << ',' << fmt(sum.q025[j]) << ','
          << fmt(sum.q975[j]) << '\n';
      // Report psi on its natural scale next to the sampled log scale.
      if (sum.names[j] == "log_psi") {
        const Eigen::VectorXd psi = pooled.column("log_psi").array().exp();
        Eigen::VectorXd s = psi;
        out << "psi," << fmt(psi.mean()) << ',' << fmt(quantile(s, 0.025)) << ','
            << fmt(quantile(s, 0.975)) << '\n';
      }
    }
    atomic_write_text((dir / "summary.csv").string(), out.str());
  }
  {
    std::ostringstream out;
    out << "chain,block,accept_rate,final_scale\n";
    for (int c = 0; c < args.chains; ++c)
      for (const auto& [block, rate] : chains[c].accept_rate)
        out << c + 1 << ',' << block << ',' << fmt(rate) << ','
            << fmt(chains[c].final_scale.at(block)) << '\n';
    atomic_write_text((dir / "acceptance.csv").string(), out.str());
  }
  if (ing.data.coords) {
    write_csv((dir / "train_coords.csv").string(), {"s1", "s2"}, *ing.data.coords);
  }

  json man{{"command", "fit"},
           {"model", model_name(kind)},
           {"data", input_json(args.data)},
           {"config", config_json(args.config)},
           {"chains", args.chains},
           {"standardize", args.standardize},
           {"x_names", ing.x_names},
           {"g_names", ing.g_names},
           {"n_obs", ing.data.n()},
           {"outputs", {"chain.csv", "zdraws.csv", "summary.csv", "acceptance.csv"}}};
  json pr;
  pr["coefficient"] = {{"mean", 0.0}, {"sd", 100.0}};
  if (args.gamma0_prior)
    pr["gamma0"] = {{"mean", args.gamma0_prior->mean}, {"sd", args.gamma0_prior->sd}};
  if (args.delta0_prior)
    pr["delta0"] = {{"mean", args.delta0_prior->mean}, {"sd", args.delta0_prior->sd}};
  pr["log_psi"] = {{"mean", priors.log_psi.mean}, {"sd", priors.log_psi.sd}};
  if (is_spatial(kind)) pr["phi_bounds"] = {priors.phi_lo, priors.phi_hi};
  man["priors"] = pr;
  if (ing.standardization) {
    man["standardization"] = {
        {"names", ing.standardization->names},
        {"mean", std::vector<double>(ing.standardization->mean.begin(),
                                     ing.standardization->mean.end())},
        {"sd",
         std::vector<double>(ing.standardization->sd.begin(), ing.standardization->sd.end())}};
  }
  write_manifest(args.out_dir, man, timer);
}

void cmd_predict(const PredictArgs& args) {
  Timer timer;
  if (args.fit_dir.empty() || args.data.empty())
    throw UsageError("predict: --fit and --data are required");
  const json man = read_manifest(args.fit_dir);
  if (man.value("command", "") != "fit")
    throw SpecificationError(args.fit_dir + ": manifest is not from a fit run");
  const ModelKind kind = model_from_name(man.at("model"));

  std::optional<Standardization> st;
  if (man.value("standardize", false)) {
    Standardization s;
    s.names = man.at("standardization").at("names").get<std::vector<std::string>>();
    const auto mv = man.at("standardization").at("mean").get<std::vector<double>>();
    const auto sv = man.at("standardization").at("sd").get<std::vector<double>>();
    s.mean = Eigen::Map<const Eigen::VectorXd>(mv.data(), static_cast<int>(mv.size()));
    s.sd = Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<int>(sv.size()));
    st = std::move(s);
  }
  const CsvTable table = read_csv(args.data);
  const IngestResult ing = ingest_dataset(table, st.has_value(), st);
  if (ing.x_names != man.at("x_names").get<std::vector<std::string>>() ||
      ing.g_names != man.at("g_names").get<std::vector<std::string>>())
    throw SpecificationError("predict: design columns do not match the fitted chain");

  // Rebuild the chain from its CSV form.
  ChainOutput chain;
  chain.kind = kind;
  chain.config = config_from_json(man.at("config"));
  {
    const CsvTable cc = read_csv((fs::path(args.fit_dir) / "chain.csv").string());
    const int cid = cc.col("chain");
    for (size_t j = 0; j < cc.header.size(); ++j)
      if (static_cast<int>(j) != cid) chain.names.push_back(cc.header[j]);
    chain.samples.resize(cc.n_rows(), static_cast<int>(chain.names.size()));
    int k = 0;
    for (size_t j = 0; j < cc.header.size(); ++j)
      if (static_cast<int>(j) != cid) chain.samples.col(k++) = cc.values.col(static_cast<int>(j));
  }

  std::optional<Eigen::MatrixXd> train_coords;
  if (is_spatial(kind)) {
    const CsvTable tc = read_csv((fs::path(args.fit_dir) / "train_coords.csv").string());
    train_coords = tc.values;
    if (!ing.data.coords)
      throw SpecificationError("predict: spatial model needs s1,s2 columns in the new sites");
  } else if (ing.data.coords) {
    std::cerr << "warning: model " << model_name(kind)
              << " is not spatial; coordinate columns ignored\n";
  }

  PredictOptions opts;
  opts.max_samples = args.max_samples;
  opts.ensemble_per_sample = args.ensemble_per_sample;
  opts.seed = args.seed;
  const auto preds = predictive_at_sites(
      chain, ing.data.X, ing.data.G, is_spatial(kind) ? ing.data.coords : std::nullopt,
      train_coords, opts);

  ensure_dir(args.out_dir);
  const fs::path dir(args.out_dir);
  const int m = static_cast<int>(preds.size());

  Eigen::MatrixXd ptab(m, 6);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(
        preds[j].ensemble.data(), static_cast<int>(preds[j].ensemble.size()));
    ptab(j, 0) = j;
    ptab(j, 1) = preds[j].p0;
    ptab(j, 2) = preds[j].mean();
    ptab(j, 3) = quantile(e, 0.025);
    ptab(j, 4) = quantile(e, 0.5);
    ptab(j, 5) = quantile(e, 0.975);
  }
  write_csv((dir / "predictions.csv").string(), {"site", "p0", "mean", "q2.5", "q50", "q97.5"},
            ptab);

  {
    int rows = 0;
    for (const auto& p : preds) rows += static_cast<int>(p.comps.size());
    Eigen::MatrixXd ctab(rows, 5);
    int r = 0;
    for (int j = 0; j < m; ++j)
      for (size_t s = 0; s < preds[j].comps.size(); ++s, ++r) {
        ctab(r, 0) = j;
        ctab(r, 1) = static_cast<double>(s);
        ctab(r, 2) = preds[j].comps[s].pi;
        ctab(r, 3) = preds[j].comps[s].mu;
        ctab(r, 4) = preds[j].comps[s].psi;
      }
    write_csv((dir / "components.csv").string(), {"site", "sample", "pi", "mu", "psi"}, ctab);
  }
  {
    int rows = 0;
    for (const auto& p : preds) rows += static_cast<int>(p.ensemble.size());
    Eigen::MatrixXd etab(rows, 3);
    int r = 0;
    for (int j = 0; j < m; ++j)
      for (size_t d = 0; d < preds[j].ensemble.size(); ++d, ++r) {
        etab(r, 0) = j;
        etab(r, 1) = static_cast<double>(d);
        etab(r, 2) = preds[j].ensemble[d];
      }
    write_csv((dir / "ensemble.csv").string(), {"site", "draw", "value"}, etab);
  }

  json out_man{{"command", "predict"},
               {"model", model_name(kind)},
               {"fit_dir", args.fit_dir},
               {"data", input_json(args.data)},
               {"n_sites", m},
               {"samples_per_site", static_cast<int>(preds.empty() ? 0 : preds[0].comps.size())},
               {"options",
                {{"max_samples", args.max_samples},
                 {"ensemble_per_sample", args.ensemble_per_sample},
                 {"seed", args.seed}}},
               {"outputs", {"predictions.csv", "components.csv", "ensemble.csv"}}};
  write_manifest(args.out_dir, out_man, timer);
}

void cmd_evaluate(const EvaluateArgs& args) {
  Timer timer;
  if (args.pred_dir.empty() || args.data.empty())
    throw UsageError("evaluate: --predictions and --data are required");

  LoadedPredictions loaded = load_predictions(args.pred_dir);
  const CsvTable table = read_csv(args.data);
  const Eigen::VectorXd y = table.column("y");
  if (y.size() != static_cast<Eigen::Index>(loaded.preds.size()))
    throw SpecificationError("evaluate: test rows do not match predicted sites");
  const auto truth = load_zero_source_truth(args.truth, static_cast<int>(y.size()));

  ScoreOptions opts;
  opts.crps_mc_samples = args.crps_mc_samples;
  opts.seed = args.seed;
  const ScoreReport rep = score_predictions(loaded.preds, y, truth, opts);

  if (loaded.kind == ModelKind::BEZI)
    std::cerr << "warning: crps_f for the hurdle family is not comparable with crps_f "
                 "from censored-zero models; compare families with crps_h\n";

  ensure_dir(args.out_dir);
  const fs::path dir(args.out_dir);
  const int m = static_cast<int>(rep.rows.size());
  Eigen::MatrixXd stab(m, 9);
  for (int j = 0; j < m; ++j) {
    const ObsScore& s = rep.rows[j];
    stab.row(j) << j, s.y, s.p0, s.crps_f, s.crps_f_se, s.crps_f_latent, s.crps_h, s.crps_oracle,
        s.source_prob;
  }
  write_csv((dir / "scores.csv").string(),
            {"site", "y", "p0", "crps_f", "crps_f_se", "crps_f_latent", "crps_h", "crps_oracle",
             "source_prob"},
            stab);
  atomic_write_text((dir / "aggregate.csv").string(), score_aggregate_text(rep));

  json man{{"command", "evaluate"},
           {"model", model_name(loaded.kind)},
           {"predictions", args.pred_dir},
           {"data", input_json(args.data)},
           {"crps_mc_samples", args.crps_mc_samples},
           {"seed", args.seed},
           {"outputs", {"scores.csv", "aggregate.csv"}}};
  if (!args.truth.empty()) man["truth"] = input_json(args.truth);
  write_manifest(args.out_dir, man, timer);
}

SplitResult fit_score_split(const Dataset& train, const Dataset& test, ModelKind kind,
                            const PriorSpec& priors, const SamplerConfig& config,
                            const std::optional<std::vector<int>>& zero_source_truth,
                            int max_samples, int crps_mc_samples, std::uint64_t score_seed) {
  const ChainOutput chain = run_chain(train, kind, priors, config);
  PredictOptions popts;
  popts.max_samples = max_samples;
  popts.ensemble_per_sample = 4;
  popts.seed = score_seed;
  const auto preds = predictive_at_sites(chain, test.X, test.G,
                                         is_spatial(kind) ? test.coords : std::nullopt,
                                         is_spatial(kind) ? train.coords : std::nullopt, popts);
  ScoreOptions sopts;
  sopts.crps_mc_samples = crps_mc_samples;
  sopts.seed = score_seed + 1;
  SplitResult out;
  out.model = model_name(kind);
  out.report = score_predictions(preds, test.y, zero_source_truth, sopts);
  return out;
}

void cmd_compare(const CompareArgs& args) {
  Timer timer;
  if (args.reps < 1) throw UsageError("compare: --reps must be >= 1");
  if (args.data.empty()) throw UsageError("compare: --data is required");
  if (args.models.empty()) throw UsageError("compare: --models must list at least one model");
  args.config.validate();

  const CsvTable table = read_csv(args.data);
  const IngestResult ing = ingest_dataset(table, args.standardize);
  const int n = ing.data.n();
  if (args.train_n < 2 || args.test_n < 1 || args.train_n + args.test_n > n)
    throw UsageError("compare: need train+test <= " + std::to_string(n) + " rows");

  std::vector<ModelKind> kinds;
  bool any_bezi = false, any_censored = false;
  for (const auto& mstr : args.models) {
    kinds.push_back(model_from_name(mstr));
    (kinds.back() == ModelKind::BEZI ? any_bezi : any_censored) = true;
    if (is_spatial(kinds.back()) && !ing.data.coords)
      throw SpecificationError("compare: model " + mstr + " needs s1,s2 columns");
  }
  if (any_bezi && any_censored)
    std::cerr << "warning: crps_f is not comparable across the hurdle and censored-zero "
                 "families; compare them with crps_h\n";

  // Pre-draw the split permutations so results do not depend on --jobs.
  Rng master(args.seed);
  std::vector<std::vector<int>> perms(args.reps);
  for (int r = 0; r < args.reps; ++r) {
    std::vector<int>& p = perms[r];
    p.resize(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i)
      std::swap(p[i], p[static_cast<int>(master.integer(static_cast<std::uint64_t>(i + 1)))]);
  }

  auto subset = [&](const std::vector<int>& idx, int begin, int count) {
    Dataset d;
    d.y.resize(count);
    d.X.resize(count, ing.data.X.cols());
    d.G.resize(count, ing.data.G.cols());
    if (ing.data.coords) d.coords = Eigen::MatrixXd(count, 2);
    for (int i = 0; i < count; ++i) {
      const int src = idx[begin + i];
      d.y[i] = ing.data.y[src];
      d.X.row(i) = ing.data.X.row(src);
      d.G.row(i) = ing.data.G.row(src);
      if (d.coords) d.coords->row(i) = ing.data.coords->row(src);
    }
    return d;
  };

  const int n_models = static_cast<int>(kinds.size());
  const int n_tasks = args.reps * n_models;
  std::vector<ScoreReport> reports(n_tasks);
  parallel_for(n_tasks, args.jobs, [&](int t) {
    const int rep = t / n_models;
    const int mi = t % n_models;
    const Dataset train = subset(perms[rep], 0, args.train_n);
    const Dataset test = subset(perms[rep], args.train_n, args.test_n);
    PriorSpec priors =
        PriorSpec::diffuse(static_cast<int>(ing.x_names.size()),
                           static_cast<int>(ing.g_names.size()));
    if (is_spatial(kinds[mi])) {
      const auto b = default_phi_bounds(*train.coords);
      priors.phi_lo = b.first;
      priors.phi_hi = b.second;
    }
    SamplerConfig cfg = args.config;
    cfg.seed = args.seed + 7919ULL * static_cast<std::uint64_t>(t) + 1;
    reports[t] = fit_score_split(train, test, kinds[mi], priors, cfg, std::nullopt,
                                 args.max_samples, args.crps_mc_samples,
                                 args.seed + 104729ULL * static_cast<std::uint64_t>(t))
                     .report;
  });

  ensure_dir(args.out_dir);
  std::ostringstream out;
  out << "model,tjur_r2,auc,crps_h,crps_f,crps_f_latent\n";
  for (int mi = 0; mi < n_models; ++mi) {
    double tjur = 0.0, auc = 0.0, ch = 0.0, cf = 0.0, cfl = 0.0;
    for (int rep = 0; rep < args.reps; ++rep) {
      const ScoreReport& r = reports[rep * n_models + mi];
      tjur += r.tjur;
      auc += r.auc_zero;
      ch += r.mean_crps_h;
      cf += r.mean_crps_f;
      cfl += r.mean_crps_f_latent;
    }
    const double k = args.reps;
    out << args.models[mi] << ',' << fmt(tjur / k) << ',' << fmt(auc / k) << ','
        << fmt(ch / k) << ',';
    // The full-mixture score is family-specific; omit it for the hurdle model.
    if (kinds[mi] == ModelKind::BEZI)
      out << "nan,nan\n";
    else
      out << fmt(cf / k) << ',' << fmt(cfl / k) << '\n';
  }
  atomic_write_text((fs::path(args.out_dir) / "table.csv").string(), out.str());

  json man{{"command", "compare"},
           {"data", input_json(args.data)},
           {"models", args.models},
           {"reps", args.reps},
           {"train_n", args.train_n},
           {"test_n", args.test_n},
           {"seed", args.seed},
           {"standardize", args.standardize},
           {"config", config_json(args.config)},
           {"max_samples", args.max_samples},
           {"crps_mc_samples", args.crps_mc_samples},
           {"outputs", {"table.csv"}}};
  write_manifest(args.out_dir, man, timer);
}

}  // namespace zib
