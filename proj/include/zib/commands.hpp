#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zib/io.hpp"
#include "zib/mcmc.hpp"
#include "zib/metrics.hpp"
#include "zib/simgen.hpp"

namespace zib {

struct SimulateArgs {
  std::string scenario;  // named scenario, or
  std::string grid;      // grid family (table2|m2|m3)
  int reps = 1;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int n_train = 0;  // 0 = scenario default
  int n_test = 0;
  double region = 0.0;
};

struct FitArgs {
  std::string model = "m1";
  std::string data;
  std::string out_dir = ".";
  SamplerConfig config;
  bool standardize = false;
  int chains = 1;
  int jobs = 1;
  std::optional<NormalPrior> gamma0_prior;
  std::optional<NormalPrior> delta0_prior;
  std::optional<std::pair<double, double>> phi_bounds;
};

struct PredictArgs {
  std::string fit_dir;
  std::string data;
  std::string out_dir = ".";
  int max_samples = 0;
  int ensemble_per_sample = 1;
  std::uint64_t seed = 20240817;
};

struct EvaluateArgs {
  std::string pred_dir;
  std::string data;
  std::string truth;  // optional truth-label sidecar
  std::string out_dir = ".";
  int crps_mc_samples = 10000;
  std::uint64_t seed = 987654321;
};

struct CompareArgs {
  std::string data;
  std::vector<std::string> models{"bezi", "m1"};
  int reps = 30;
  int train_n = 99;
  int test_n = 20;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir = ".";
  bool standardize = false;
  SamplerConfig config;
  int max_samples = 250;  // posterior samples retained for prediction
  int crps_mc_samples = 2000;
};

void cmd_simulate(const SimulateArgs& args);
void cmd_fit(const FitArgs& args);
void cmd_predict(const PredictArgs& args);
void cmd_evaluate(const EvaluateArgs& args);
void cmd_compare(const CompareArgs& args);

/// Fit + predict + evaluate in memory; shared by cmd_compare and the
/// simulation-study harness.
struct SplitResult {
  std::string model;
  ScoreReport report;
};
SplitResult fit_score_split(const Dataset& train, const Dataset& test, ModelKind kind,
                            const PriorSpec& priors, const SamplerConfig& config,
                            const std::optional<std::vector<int>>& zero_source_truth,
                            int max_samples, int crps_mc_samples, std::uint64_t score_seed);

}  // namespace zib
