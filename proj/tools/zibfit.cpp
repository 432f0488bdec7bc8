// Command-line front end: simulate, fit, predict, evaluate, compare.
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "zib/commands.hpp"

namespace {

int default_jobs() {
  if (const char* env = std::getenv("ZIB_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  return 1;
}

zib::NormalPrior parse_prior(const std::string& text, const std::string& flag) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw zib::UsageError(flag + ": expected 'mean,sd', got '" + text + "'");
  try {
    zib::NormalPrior p;
    p.mean = std::stod(text.substr(0, comma));
    p.sd = std::stod(text.substr(comma + 1));
    if (!(p.sd > 0.0)) throw zib::UsageError(flag + ": sd must be positive");
    return p;
  } catch (const zib::Error&) {
    throw;
  } catch (const std::exception&) {
    throw zib::UsageError(flag + ": expected 'mean,sd', got '" + text + "'");
  }
}

void add_sampler_flags(CLI::App* cmd, zib::SamplerConfig& cfg) {
  cmd->add_option("--iters", cfg.iterations, "MCMC iterations");
  cmd->add_option("--burnin", cfg.burn_in, "Burn-in iterations");
  cmd->add_option("--thin", cfg.thin, "Thinning interval");
  cmd->add_option("--adapt-window", cfg.adapt_window, "Proposal adaptation window");
  cmd->add_option("--target-accept", cfg.target_accept, "Adaptation target acceptance rate");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian zero-inflated Beta regression with censored and unsuitability zeros"};
  app.require_subcommand(1);

  zib::SimulateArgs sim;
  auto* csim = app.add_subcommand("simulate", "Generate synthetic train/test datasets");
  csim->add_option("--scenario", sim.scenario, "Named scenario (sim1.1 ... sim3.3)");
  csim->add_option("--grid", sim.grid, "Scenario grid family: table2, m2 or m3");
  csim->add_option("--reps", sim.reps, "Replicates per scenario");
  csim->add_option("--seed", sim.seed, "Master seed");
  csim->add_option("--out", sim.out_dir, "Output directory");
  csim->add_option("--n-train", sim.n_train, "Training sites (0 = scenario default)");
  csim->add_option("--n-test", sim.n_test, "Test sites (0 = scenario default)");
  csim->add_option("--region", sim.region, "Square region side length");

  zib::FitArgs fit;
  std::string g0prior, d0prior, phib;
  auto* cfit = app.add_subcommand("fit", "Fit a model by MCMC");
  cfit->add_option("--model", fit.model, "Model: m0, m1, m2, m3 or bezi");
  cfit->add_option("--data", fit.data, "Training data CSV")->required();
  cfit->add_option("--out", fit.out_dir, "Output directory");
  cfit->add_option("--seed", fit.config.seed, "Sampler seed");
  cfit->add_option("--chains", fit.chains, "Independent chains");
  cfit->add_option("--jobs", fit.jobs, "Worker threads")->default_val(default_jobs());
  cfit->add_flag("--standardize", fit.standardize, "Center and scale covariates");
  cfit->add_option("--gamma0-prior", g0prior, "Zero-model intercept prior as 'mean,sd'");
  cfit->add_option("--delta0-prior", d0prior, "Beta-mean intercept prior as 'mean,sd'");
  cfit->add_option("--phi-bounds", phib, "Uniform decay-prior bounds as 'lo,hi'");
  add_sampler_flags(cfit, fit.config);

  zib::PredictArgs pred;
  auto* cpred = app.add_subcommand("predict", "Posterior predictive distributions at new sites");
  cpred->add_option("--fit", pred.fit_dir, "Directory written by fit")->required();
  cpred->add_option("--data", pred.data, "New-site CSV")->required();
  cpred->add_option("--out", pred.out_dir, "Output directory");
  cpred->add_option("--max-samples", pred.max_samples, "Posterior samples to use (0 = all)");
  cpred->add_option("--ensemble-per-sample", pred.ensemble_per_sample,
                    "Predictive draws per posterior sample");
  cpred->add_option("--seed", pred.seed, "Prediction seed");

  zib::EvaluateArgs ev;
  auto* cev = app.add_subcommand("evaluate", "Score predictions against held-out data");
  cev->add_option("--predictions", ev.pred_dir, "Directory written by predict")->required();
  cev->add_option("--data", ev.data, "Held-out data CSV")->required();
  cev->add_option("--truth", ev.truth, "Zero-source truth CSV (enables source AUC)");
  cev->add_option("--out", ev.out_dir, "Output directory");
  cev->add_option("--crps-mc", ev.crps_mc_samples, "Monte Carlo points per CRPS integral");
  cev->add_option("--seed", ev.seed, "Scoring seed");

  zib::CompareArgs cmp;
  std::string model_list;
  auto* ccmp = app.add_subcommand("compare", "Cross-validated model comparison table");
  ccmp->add_option("--data", cmp.data, "Full dataset CSV")->required();
  ccmp->add_option("--models", model_list, "Comma-separated models (default bezi,m1)");
  ccmp->add_option("--reps", cmp.reps, "Random train/test splits");
  ccmp->add_option("--train", cmp.train_n, "Training sites per split");
  ccmp->add_option("--test", cmp.test_n, "Test sites per split");
  ccmp->add_option("--seed", cmp.seed, "Master seed");
  ccmp->add_option("--jobs", cmp.jobs, "Worker threads")->default_val(default_jobs());
  ccmp->add_option("--out", cmp.out_dir, "Output directory");
  ccmp->add_flag("--standardize", cmp.standardize, "Center and scale covariates");
  ccmp->add_option("--max-samples", cmp.max_samples, "Posterior samples used for prediction");
  ccmp->add_option("--crps-mc", cmp.crps_mc_samples, "Monte Carlo points per CRPS integral");
  add_sampler_flags(ccmp, cmp.config);

  try {
    app.parse(argc, argv);
    if (csim->parsed()) zib::cmd_simulate(sim);
    if (cfit->parsed()) {
      if (!g0prior.empty()) fit.gamma0_prior = parse_prior(g0prior, "--gamma0-prior");
      if (!d0prior.empty()) fit.delta0_prior = parse_prior(d0prior, "--delta0-prior");
      if (!phib.empty()) {
        const auto p = parse_prior(phib, "--phi-bounds");
        if (!(p.mean > 0.0 && p.sd > p.mean))
          throw zib::UsageError("--phi-bounds: require 0 < lo < hi");
        fit.phi_bounds = {p.mean, p.sd};
      }
      zib::cmd_fit(fit);
    }
    if (cpred->parsed()) zib::cmd_predict(pred);
    if (cev->parsed()) zib::cmd_evaluate(ev);
    if (ccmp->parsed()) {
      if (!model_list.empty()) {
        cmp.models.clear();
        std::string cur;
        for (char c : model_list + ",") {
          if (c == ',') {
            if (!cur.empty()) cmp.models.push_back(cur);
            cur.clear();
          } else {
            cur += c;
          }
        }
      }
      zib::cmd_compare(cmp);
    }
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(zib::Errc::usage);
  } catch (const zib::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
