#include "gdm/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gdm/bench.hpp"
#include "gdm/corr.hpp"
#include "gdm/data.hpp"
#include "gdm/errors.hpp"
#include "gdm/file_util.hpp"
#include "gdm/gdm.hpp"
#include "gdm/model_io.hpp"
#include "gdm/synth.hpp"

namespace gdm::cli {

namespace {

struct GdmFlags {
  GdmConfig config;
  std::optional<std::size_t> target;
};

void add_gdm_flags(CLI::App& cmd, GdmFlags& f) {
  cmd.add_option("--budget,-B", f.config.budget, "Supports per constraint")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--iterations,-T", f.config.iterations, "Max outer iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--tau", f.config.tau, "Correlation slack; |rho| >= 1 - tau is correlated")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--C", f.config.C, "SVM trade-off")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--tol-sub", f.config.eps_sub, "Subproblem tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--tol-cut", f.config.eps_cut, "Relative violation tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_synth_flags(CLI::App& cmd, synth::SynthConfig& s) {
  cmd.add_option("--samples", s.n_samples, "Training samples")->capture_default_str();
  cmd.add_option("--test-samples", s.n_test_samples, "Test samples")->capture_default_str();
  cmd.add_option("--features", s.n_features, "Total features")->capture_default_str();
  cmd.add_option("--groups", s.n_groups, "Informative groups")->capture_default_str();
  cmd.add_option("--correlated-groups", s.n_correlated_groups, "Groups with several members")
      ->capture_default_str();
  cmd.add_option("--group-size-min", s.group_size_range.first)->capture_default_str();
  cmd.add_option("--group-size-max", s.group_size_range.second)->capture_default_str();
  cmd.add_option("--within-corr", s.within_group_corr, "Target within-group |rho|")
      ->capture_default_str();
  cmd.add_option("--noise", s.noise_level, "Representative noise std")->capture_default_str();
  cmd.add_option("--label-noise", s.label_noise, "Label logit noise, relative")
      ->capture_default_str();
  cmd.add_option("--min-abs-weight", s.min_abs_weight, "Lower bound on |group weight|")
      ->capture_default_str();
}

std::vector<FeatureIndex> to_zero_based(const std::vector<std::size_t>& v) {
  std::vector<FeatureIndex> out;
  for (auto j : v) {
    if (j == 0) throw std::invalid_argument("feature indices are 1-based");
    out.push_back(j - 1);
  }
  return out;
}

std::string dump(const io::Json& j) { return j.dump(2) + "\n"; }

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_atomic(path, text);
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correlation-constrained feature selection with group discovery", "gdm"};
  app.set_config("--config", "", "TOML/INI file with option values; flags win");
  app.set_version_flag("--version", std::string(io::kModelVersion));
  app.require_subcommand(1);

  int threads = 0;
  std::uint64_t seed = 0;
  bool verbose = false;
  app.add_option("--threads", threads, "Thread cap (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Seed for every stochastic step")->capture_default_str();
  app.add_flag("--verbose,-v", verbose, "Progress on stderr");

  // select
  auto* select = app.add_subcommand("select", "Fit a model and write it as JSON");
  GdmFlags sel;
  std::string sel_data, sel_out, sel_trace;
  std::optional<std::size_t> sel_dims, sel_target;
  bool sel_no_timing = false;
  select->add_option("--data", sel_data, "Training data (LIBSVM, optionally gzipped)")
      ->required()
      ->check(CLI::ExistingFile);
  select->add_option("--dimensions,--dims", sel_dims, "Feature dimension (default: max index)");
  select->add_option("--out", sel_out, "Model JSON path")->required();
  add_gdm_flags(*select, sel);
  select->add_option("--target-features", sel_target,
                     "Select k supports: sets the budget to k and stops once reached");
  select->add_flag("--with-affiliated", sel.config.with_affiliated,
                   "Train the stored classifier on supports and affiliated features");
  select->add_option("--trace-crm", sel_trace, "Write per-iteration matching traces (JSON)");
  select->add_flag("--no-timing", sel_no_timing, "Omit wall times from the model file");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Label data with a fitted model");
  std::string pr_model, pr_data, pr_out;
  predict_cmd->add_option("--model", pr_model, "Model JSON")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", pr_data, "LIBSVM data")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", pr_out, "CSV path (default stdout)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic train/test pair");
  synth::SynthConfig sc;
  std::string sy_train, sy_test, sy_truth;
  add_synth_flags(*synth_cmd, sc);
  synth_cmd->add_option("--out-train", sy_train)->required();
  synth_cmd->add_option("--out-test", sy_test)->required();
  synth_cmd->add_option("--out-truth", sy_truth)->required();

  // eval-recovery
  auto* recovery = app.add_subcommand("eval-recovery", "Score a model against ground truth");
  std::string er_model, er_truth, er_out, er_format = "json";
  recovery->add_option("--model", er_model)->required()->check(CLI::ExistingFile);
  recovery->add_option("--truth", er_truth)->required()->check(CLI::ExistingFile);
  recovery->add_option("--format", er_format)->check(CLI::IsMember({"json", "csv"}));
  recovery->add_option("--out", er_out, "Output path (default stdout)");

  // redundancy
  auto* red = app.add_subcommand("redundancy", "Redundancy rate of a feature set");
  std::string rd_data, rd_model;
  std::optional<std::size_t> rd_dims;
  std::vector<std::size_t> rd_features;
  bool rd_aff = false, rd_mean_pairs = false;
  red->add_option("--data", rd_data)->required()->check(CLI::ExistingFile);
  red->add_option("--dimensions,--dims", rd_dims);
  auto* rd_feat_opt = red->add_option("--features", rd_features, "1-based indices")->delimiter(',');
  auto* rd_model_opt = red->add_option("--model", rd_model, "Use the model's support")
                           ->check(CLI::ExistingFile);
  rd_feat_opt->excludes(rd_model_opt);
  red->add_flag("--with-affiliated", rd_aff, "With --model: include affiliated features");
  red->add_flag("--red-mean-pairs", rd_mean_pairs,
                "Mean over unordered pairs instead of sum / (m(m-1))");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Accuracy/redundancy/time over feature counts");
  GdmFlags sw;
  synth::SynthConfig sw_synth;
  std::string sw_data, sw_test, sw_out, sw_summary;
  std::optional<std::size_t> sw_dims;
  std::vector<std::size_t> sw_ks;
  std::vector<std::uint64_t> sw_seeds;
  std::size_t sw_jobs = 1;
  bool sw_use_synth = false, sw_time_std = false;
  auto* sw_data_opt = sweep->add_option("--data", sw_data, "Training data")->check(CLI::ExistingFile);
  auto* sw_test_opt = sweep->add_option("--test", sw_test, "Test data")->check(CLI::ExistingFile);
  sw_data_opt->needs(sw_test_opt);
  sw_test_opt->needs(sw_data_opt);
  sweep->add_option("--dimensions,--dims", sw_dims);
  auto* sw_synth_opt =
      sweep->add_flag("--synth", sw_use_synth, "Generate data per seed instead of --data/--test");
  sw_synth_opt->excludes(sw_data_opt);
  add_synth_flags(*sweep, sw_synth);
  add_gdm_flags(*sweep, sw);
  sweep->add_option("--ks", sw_ks, "Feature counts, ascending")->required()->delimiter(',');
  sweep->add_option("--seeds", sw_seeds, "Seeds (default: --seed)")->delimiter(',');
  sweep->add_option("--jobs", sw_jobs, "Parallel cells")->check(CLI::PositiveNumber);
  sweep->add_flag("--time-standardization", sw_time_std, "Include statistics in wall time");
  sweep->add_option("--out", sw_out, "CSV path (default stdout)");
  sweep->add_option("--summary", sw_summary, "JSON summary path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  auto log = [&](const std::string& msg) {
    if (verbose) err << msg << '\n';
  };

  try {
    if (*select) {
      if (sel_target) sel.config.target_features = sel_target;
      sel.config.seed = seed;
      sel.config.validate();
      const auto ds = data::load_libsvm(sel_data, sel_dims);
      log("loaded " + std::to_string(ds.n_samples()) + " samples x " +
          std::to_string(ds.n_features()) + " features");
      auto fitted = fit(ds, sel.config);
      fitted.model.classifier = final_classifier(ds, fitted.model, sel.config);
      io::write_atomic(sel_out, dump(io::to_json(fitted.model, !sel_no_timing)));
      if (!sel_trace.empty()) {
        io::Json traces = io::Json::array();
        for (const auto& t : fitted.state.crm_traces) traces.push_back(io::to_json(t));
        io::write_atomic(sel_trace, dump(traces));
      }
      err << "selected " << fitted.model.support.size() << " supports in "
          << fitted.model.trace.size() << " iterations (" << fitted.model.stop_reason << ")\n";
      return kOk;
    }

    if (*predict_cmd) {
      const auto model = io::model_from_json(io::read_json_file(pr_model));
      if (!model.classifier) throw DataError("model file carries no classifier");
      const auto ds = data::load_libsvm(pr_data, model.n_features);
      const auto d = solver::decision_values(*model.classifier, ds);
      std::ostringstream csv;
      csv << "sample,label,prediction,decision\n";
      std::size_t right = 0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const int p = d[i] >= 0.0 ? 1 : -1;
        right += p == ds.label(i) ? 1 : 0;
        csv << (i + 1) << ',' << static_cast<int>(ds.label(i)) << ',' << p << ',' << d[i] << '\n';
      }
      emit(pr_out, csv.str(), out);
      err << "accuracy " << static_cast<double>(right) / static_cast<double>(d.size()) << '\n';
      return kOk;
    }

    if (*synth_cmd) {
      sc.seed = seed;
      const auto gen = synth::generate(sc);
      io::write_atomic(sy_train, [&](std::ostream& o) { data::write_libsvm(gen.train, o); });
      io::write_atomic(sy_test, [&](std::ostream& o) { data::write_libsvm(gen.test, o); });
      io::write_atomic(sy_truth, dump(io::to_json(gen.truth)));
      return kOk;
    }

    if (*recovery) {
      const auto model = io::model_from_json(io::read_json_file(er_model));
      const auto truth = io::truth_from_json(io::read_json_file(er_truth));
      if (truth.n_features != model.n_features) {
        throw DataError("model and ground truth disagree on the feature dimension");
      }
      const auto rep = synth::recovery_score(model, truth, model.config.tau);
      if (er_format == "json") {
        emit(er_out, dump(io::to_json(rep)), out);
      } else {
        std::ostringstream csv;
        csv << "hit_rate,purity,coverage,exclusivity_violations,n_supports\n"
            << rep.hit_rate << ',' << rep.purity << ','
            << (rep.coverage ? std::to_string(*rep.coverage) : std::string("NA")) << ','
            << rep.exclusivity_violations << ',' << rep.n_supports << '\n';
        emit(er_out, csv.str(), out);
      }
      return kOk;
    }

    if (*red) {
      if (rd_features.empty() && rd_model.empty()) {
        throw CLI::RequiredError("--features or --model");
      }
      std::vector<FeatureIndex> features;
      std::optional<std::size_t> dims = rd_dims;
      if (!rd_model.empty()) {
        const auto model = io::model_from_json(io::read_json_file(rd_model));
        features = rd_aff ? model.selected_with_affiliated() : model.support;
        dims = model.n_features;
      } else {
        features = to_zero_based(rd_features);
      }
      const auto ds = data::load_libsvm(rd_data, dims);
      const auto norm = rd_mean_pairs ? corr::RedundancyNormalizer::kMeanPairs
                                      : corr::RedundancyNormalizer::kOrderedPairs;
      io::Json j;
      j["n_features"] = features.size();
      j["normalizer"] = rd_mean_pairs ? "mean_pairs" : "ordered_pairs";
      j["red"] = corr::redundancy_rate(ds, features, norm);
      out << dump(j);
      return kOk;
    }

    if (*sweep) {
      if (sw_data.empty() && !sw_use_synth) {
        throw CLI::RequiredError("--data/--test or --synth");
      }
      bench::SweepSpec spec;
      spec.feature_counts = sw_ks;
      spec.seeds = sw_seeds.empty() ? std::vector<std::uint64_t>{seed} : sw_seeds;
      spec.jobs = sw_jobs;
      spec.time_standardization = sw_time_std;
      std::vector<bench::SweepRow> rows;
      if (sw_use_synth) {
        const bench::SplitSource source = [&sw_synth](std::uint64_t s) {
          auto cfg = sw_synth;
          cfg.seed = s;
          auto gen = synth::generate(cfg);
          return bench::Split{std::move(gen.train), std::move(gen.test), std::move(gen.truth)};
        };
        rows = bench::run_sweep(source, spec, sw.config);
      } else {
        const auto train = data::load_libsvm(sw_data, sw_dims);
        const auto test = data::load_libsvm(sw_test, train.n_features());
        rows = bench::run_sweep(train, test, spec, sw.config);
      }
      std::ostringstream csv;
      bench::write_csv(rows, csv);
      emit(sw_out, csv.str(), out);
      if (!sw_summary.empty()) io::write_atomic(sw_summary, dump(bench::summary_json(rows)));
      return kOk;
    }
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kNonConvergence;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace gdm::cli
