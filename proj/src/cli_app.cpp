#include "cuq/cli_app.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <memory>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>

#include "cuq/error.hpp"
#include "cuq/study_config.hpp"
#include "cuq/text_io.hpp"
#include "cuq/uq_pipeline.hpp"

namespace cuq {

using nlohmann::json;

std::vector<Eigen::Index> parse_sizes(std::string_view text) {
  std::vector<Eigen::Index> sizes;
  for (const auto& field : split_csv_line(text)) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || value < 2) {
      throw ConfigError("--sizes: '" + field + "' is not an integer >= 2");
    }
    sizes.push_back(static_cast<Eigen::Index>(value));
  }
  if (sizes.empty()) throw ConfigError("--sizes: empty list");
  return sizes;
}

namespace {

StudyConfig load_resolved(const CliOptions& options) {
  StudyConfig config = load_config(options.config);
  if (options.seed_override) apply_seed_override(config, *options.seed_override);
  validate_config(config);
  return config;
}

ModelFunction build_true_model(const StudyConfig& config) {
  switch (config.true_model->kind) {
    case TrueModelKind::Shaft: return shaft_model;
    case TrueModelKind::PlateSynthetic: return plate_synthetic_model;
    case TrueModelKind::GridFile: {
      std::shared_ptr<const GridSurrogate> grid =
          GridSurrogate::load_csv(resolve_path(config, config.true_model->path));
      return [grid](const Eigen::Ref<const Eigen::VectorXd>& x) { return grid->predict(x).mean; };
    }
  }
  throw ConfigError("true_model.kind: unsupported");
}

struct BuiltSurrogate {
  std::shared_ptr<const ProbabilisticSurrogate> surrogate;
  std::shared_ptr<const GpModel> gp;
};

BuiltSurrogate build_surrogate(const StudyConfig& config, const InputSpace& inputs) {
  BuiltSurrogate built;
  if (config.surrogate.kind == SurrogateKind::GridFile) {
    auto grid = GridSurrogate::load_csv(resolve_path(config, config.surrogate.path));
    if (grid->dimension() != inputs.size()) {
      throw ConfigError("surrogate.path: grid has " + std::to_string(grid->dimension()) + " inputs, config has " +
                        std::to_string(inputs.size()));
    }
    built.surrogate = std::move(grid);
    return built;
  }
  auto gp = std::make_shared<GpModel>(train_gp_on_model(build_true_model(config), inputs, config.surrogate.plan));
  built.gp = gp;
  built.surrogate = gp;
  return built;
}

std::string sobol_csv(const SobolReport& report) {
  std::string out = "variable,first_order,total_order\n";
  for (const auto& e : report.entries) {
    out += e.label + "," + format_double(e.first_order) + "," + format_double(e.total_order) + "\n";
  }
  return out;
}

json sobol_json(const SobolReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"variable", e.label}, {"first_order", e.first_order}, {"total_order", e.total_order}});
  }
  return entries;
}

json design_json(const UqResult& result) {
  const auto& d = result.design_config;
  json out = {{"method", std::string(to_string(d.method))},
              {"points", result.design_points},
              {"fit_method", std::string(to_string(result.pce.diagnostics().method))},
              {"residual_norm", result.pce.diagnostics().residual_norm},
              {"condition", result.pce.diagnostics().condition},
              {"ill_conditioned", result.pce.diagnostics().ill_conditioned}};
  if (d.method == DesignMethod::Lhs) out["seed"] = d.seed;
  if (d.method == DesignMethod::Smolyak) out["level"] = d.level;
  return out;
}

std::filesystem::path output_path(const CliOptions& options, const std::string& name) {
  const std::filesystem::path p(name);
  return p.is_absolute() ? p : options.out_dir / p;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << "\n";
  } catch (const StageError& e) {
    err << "error: stage " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace

int cmd_run(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const StudyConfig config = load_resolved(options);
    const InputSpace inputs(config.inputs);
    const BuiltSurrogate built = [&] {
      try {
        return build_surrogate(config, inputs);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw StageError("surrogate", e.what());
      }
    }();
    const UqProblem problem{inputs, built.surrogate, config.pce};
    UqResult result = run_uq(problem);

    std::optional<McsResult> oracle;
    if (config.mcs) {
      try {
        oracle = mcs_oracle(problem, config.mcs->n_samples, config.mcs->seed);
      } catch (const std::exception& e) {
        throw StageError("mcs", e.what());
      }
      result.mcs = compare_with_oracle(result, *oracle);
    }

    json report;
    report["config"] = to_json(config);
    report["dimension"] = problem.dimension();
    report["basis_size"] = result.pce.basis().size();
    report["design"] = design_json(result);
    report["surrogate"] = {{"description", result.surrogate_description}};
    if (built.gp) {
      const Eigen::VectorXd loo = built.gp->loo_residuals();
      const Eigen::VectorXd& y = built.gp->outputs();
      const double y_std = std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(y.size()));
      report["surrogate"]["training_points"] = built.gp->inputs().rows();
      report["surrogate"]["seed"] = config.surrogate.plan.seed;
      report["surrogate"]["loo_rmse"] = std::sqrt(loo.squaredNorm() / static_cast<double>(loo.size()));
      report["surrogate"]["output_std"] = y_std;
    }
    report["pce"] = {{"mean", result.moments.mean}, {"std", result.moments.std}, {"variance", result.moments.variance}};
    if (result.mcs) {
      const auto& m = *result.mcs;
      report["mcs"] = {{"mean", m.oracle_mean},
                       {"std", m.oracle_std},
                       {"n_samples", m.n_samples},
                       {"seed", m.seed},
                       {"mean_relative_error", m.mean_relative_error},
                       {"std_relative_error", m.std_relative_error}};
    }
    report["sobol"] = sobol_json(result.sobol);
    report["sobol_first_order_sum"] = result.sobol.first_order_sum();
    report["interaction_share"] = result.sobol.interaction_share;

    write_file_atomic(output_path(options, config.outputs.report), report.dump(2) + "\n");
    write_file_atomic(output_path(options, config.outputs.sobol_csv), sobol_csv(result.sobol));
    if (!config.outputs.pce.empty()) {
      write_file_atomic(output_path(options, config.outputs.pce), serialize(result.pce));
    }
    if (!config.outputs.training_csv.empty() && built.gp) {
      write_training_csv(output_path(options, config.outputs.training_csv), built.gp->inputs(), built.gp->outputs(),
                         inputs.names());
    }
    if (!config.outputs.cdf_csv.empty()) {
      const std::size_t n = config.mcs ? config.mcs->n_samples : 10000;
      const std::uint64_t seed = config.mcs ? config.mcs->seed : 0;
      const CdfTable pce_cdf = empirical_cdf(result.pce, n, seed);
      std::string csv = oracle ? "probability,pce,mcs\n" : "probability,pce\n";
      for (std::size_t i = 0; i < n; ++i) {
        csv += format_double(pce_cdf.probabilities[i]) + "," + format_double(pce_cdf.values[i]);
        if (oracle) csv += "," + format_double(oracle->cdf.values[i]);
        csv += "\n";
      }
      write_file_atomic(output_path(options, config.outputs.cdf_csv), csv);
    }

    out << "mean " << format_double(result.moments.mean) << "\n";
    out << "std " << format_double(result.moments.std) << "\n";
    if (result.mcs) {
      out << "mcs_mean " << format_double(result.mcs->oracle_mean) << " (rel. error "
          << format_double(result.mcs->mean_relative_error) << ")\n";
      out << "mcs_std " << format_double(result.mcs->oracle_std) << " (rel. error "
          << format_double(result.mcs->std_relative_error) << ")\n";
    }
    for (const auto& e : result.sobol.entries) {
      out << "sobol " << e.label << " " << format_double(e.first_order) << " " << format_double(e.total_order) << "\n";
    }
    return 0;
  });
}

int cmd_sensitivity_study(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const StudyConfig config = load_resolved(options);
    if (config.surrogate.kind != SurrogateKind::GpTrain) {
      throw ConfigError("surrogate.kind: the training-size study needs gp_train");
    }
    const InputSpace inputs(config.inputs);
    const UqProblem problem{inputs, nullptr, config.pce};
    const auto rows = training_size_study(build_true_model(config), options.sizes, problem, config.surrogate.plan);

    std::string combined = "size,variable,first_order,total_order\n";
    bool failed = false;
    for (const auto& row : rows) {
      if (!row.result) {
        err << "error: size " << row.training_points << ": " << row.error << "\n";
        failed = true;
        continue;
      }
      const auto& sobol = row.result->sobol;
      write_file_atomic(output_path(options, "sobol_size_" + std::to_string(row.training_points) + ".csv"),
                        sobol_csv(sobol));
      for (const auto& e : sobol.entries) {
        combined += std::to_string(row.training_points) + "," + e.label + "," + format_double(e.first_order) + "," +
                    format_double(e.total_order) + "\n";
      }
      const auto& mu = sobol.at(kModelUncertaintyLabel);
      out << "size " << row.training_points << " model_uncertainty first_order " << format_double(mu.first_order)
          << " total_order " << format_double(mu.total_order) << "\n";
    }
    write_file_atomic(output_path(options, "sobol_study.csv"), combined);
    return failed ? 1 : 0;
  });
}

int cmd_validate(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const StudyConfig config = load_resolved(options);
    const auto dimension = static_cast<Eigen::Index>(config.inputs.size()) + 1;
    const auto basis = basis_size(static_cast<int>(dimension), config.pce.order);
    const Eigen::Index points = design_point_count(config.pce.design, dimension, config.pce.order);
    out << "D=" << dimension << "\n";
    out << "basis " << basis << "\n";
    out << to_string(config.pce.design.method) << " points " << points << "\n";
    if (config.pce.design.method == DesignMethod::Lhs && points < static_cast<Eigen::Index>(basis)) {
      err << "warning: lhs with n=" << points << " < basis size " << basis
          << "; least squares will be underdetermined\n";
    }
    return 0;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coupled input/model uncertainty propagation with polynomial chaos"};
  app.require_subcommand(1);

  CliOptions options;
  std::uint64_t seed = 0;
  std::string sizes = "30,100,500";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", options.config, "Study config (JSON)")->required();
    sub->add_option("--seed-override", seed, "Replace every seed in the config (design, GP, MCS)");
    sub->add_option("--out-dir", options.out_dir, "Directory for output files");
  };
  CLI::App* run = app.add_subcommand("run", "Run the pipeline and write reports");
  add_common(run);
  CLI::App* study = app.add_subcommand("study", "Training-size study of the model-uncertainty index");
  add_common(study);
  study->add_option("--sizes", sizes, "Comma-separated GP training sizes");
  CLI::App* validate = app.add_subcommand("validate", "Check a config without running it");
  add_common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  for (CLI::App* sub : {run, study, validate}) {
    if (sub->parsed() && sub->count("--seed-override") > 0) options.seed_override = seed;
  }

  if (run->parsed()) return cmd_run(options, out, err);
  if (validate->parsed()) return cmd_validate(options, out, err);
  try {
    options.sizes = parse_sizes(sizes);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return cmd_sensitivity_study(options, out, err);
}

}  // namespace cuq
