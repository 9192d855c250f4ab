#include "cuq/study_config.hpp"

#include <set>

#include "cuq/error.hpp"
#include "cuq/text_io.hpp"

namespace cuq {

using nlohmann::json;

bool SurrogateConfig::operator==(const SurrogateConfig& o) const {
  return kind == o.kind && path == o.path && plan.points == o.plan.points && plan.seed == o.plan.seed &&
         plan.box_width == o.plan.box_width && plan.gp.jitter == o.plan.gp.jitter &&
         plan.gp.restarts == o.plan.gp.restarts && plan.gp.seed == o.plan.gp.seed &&
         plan.gp.max_iterations == o.plan.gp.max_iterations;
}

bool StudyConfig::operator==(const StudyConfig& o) const {
  const auto& a = pce.design;
  const auto& b = o.pce.design;
  return inputs == o.inputs && surrogate == o.surrogate && true_model == o.true_model && pce.order == o.pce.order &&
         a.method == b.method && a.n == b.n && a.seed == b.seed && a.level == b.level &&
         a.points_per_axis == b.points_per_axis && mcs == o.mcs && outputs == o.outputs;
}

namespace {

// Typed field access with key paths in every error message.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : node_.items()) {
      if (!allowed.contains(key)) throw ConfigError(key_path(key) + ": unknown key");
    }
  }

  bool has(const char* key) const { return node_.contains(key); }

  const json& child(const char* key) const {
    if (!node_.contains(key)) throw ConfigError(key_path(key) + ": missing required key");
    return node_.at(key);
  }

  std::string string(const char* key) const {
    const json& v = child(key);
    if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::string string_or(const char* key, std::string fallback) const { return has(key) ? string(key) : fallback; }

  double number(const char* key) const {
    const json& v = child(key);
    if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number");
    return v.get<double>();
  }

  double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_int(const char* key) const {
    const json& v = child(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(key_path(key) + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::uint64_t unsigned_or(const char* key, std::uint64_t fallback) const {
    return has(key) ? unsigned_int(key) : fallback;
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& node_;
  std::string path_;
};

DistributionSpec parse_input(const json& node, const std::string& path) {
  Reader r(node, path);
  r.allow_only({"name", "family", "mean", "std"});
  DistributionSpec spec;
  spec.name = r.string("name");
  const std::string family = r.string("family");
  const auto parsed = parse_family(family);
  if (!parsed) {
    throw ConfigError(r.key_path("family") + ": unknown family '" + family +
                      "' (expected normal, lognormal, uniform, gumbel_max)");
  }
  spec.family = *parsed;
  spec.mean = r.number("mean");
  spec.std = r.number("std");
  try {
    native_params(spec);
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return spec;
}

SurrogateConfig parse_surrogate(const json& node) {
  Reader r(node, "surrogate");
  r.allow_only({"kind", "path", "training_points", "seed", "box_width", "restarts", "jitter", "max_iterations"});
  SurrogateConfig s;
  const std::string kind = r.string("kind");
  if (kind == "gp_train") {
    s.kind = SurrogateKind::GpTrain;
    s.plan.points = static_cast<Eigen::Index>(r.unsigned_or("training_points", 100));
    s.plan.seed = r.unsigned_or("seed", 0);
    s.plan.gp.seed = s.plan.seed;
    s.plan.box_width = r.number_or("box_width", 4.0);
    s.plan.gp.restarts = static_cast<int>(r.unsigned_or("restarts", 8));
    s.plan.gp.jitter = r.number_or("jitter", 1e-10);
    s.plan.gp.max_iterations = static_cast<int>(r.unsigned_or("max_iterations", 200));
    if (s.plan.points < 2) throw ConfigError("surrogate.training_points: must be >= 2");
    if (!(s.plan.box_width > 0.0)) throw ConfigError("surrogate.box_width: must be > 0");
    if (s.plan.gp.restarts < 1) throw ConfigError("surrogate.restarts: must be >= 1");
    if (!(s.plan.gp.jitter > 0.0)) throw ConfigError("surrogate.jitter: must be > 0");
  } else if (kind == "grid_file") {
    s.kind = SurrogateKind::GridFile;
    s.path = r.string("path");
  } else {
    throw ConfigError("surrogate.kind: unknown kind '" + kind + "' (expected gp_train, grid_file)");
  }
  return s;
}

TrueModelConfig parse_true_model(const json& node) {
  Reader r(node, "true_model");
  r.allow_only({"kind", "path"});
  TrueModelConfig t;
  const std::string kind = r.string("kind");
  if (kind == "shaft") {
    t.kind = TrueModelKind::Shaft;
  } else if (kind == "plate_synthetic") {
    t.kind = TrueModelKind::PlateSynthetic;
  } else if (kind == "grid_file") {
    t.kind = TrueModelKind::GridFile;
    t.path = r.string("path");
  } else {
    throw ConfigError("true_model.kind: unknown kind '" + kind + "' (expected shaft, plate_synthetic, grid_file)");
  }
  return t;
}

PceConfig parse_pce(const json& node) {
  Reader r(node, "pce");
  r.allow_only({"order", "design"});
  PceConfig p;
  p.order = static_cast<int>(r.unsigned_or("order", 2));
  if (p.order < 1 || p.order > 4) throw ConfigError("pce.order: must be in [1, 4]");
  Reader d(r.child("design"), "pce.design");
  d.allow_only({"method", "n", "seed", "level", "points_per_axis"});
  const std::string method = d.string("method");
  const auto parsed = parse_design_method(method);
  if (!parsed) throw ConfigError("pce.design.method: unknown method '" + method + "' (expected lhs, tensor, smolyak)");
  p.design.method = *parsed;
  p.design.n = static_cast<Eigen::Index>(d.unsigned_or("n", 80));
  p.design.seed = d.unsigned_or("seed", 0);
  p.design.level = static_cast<int>(d.unsigned_or("level", 1));
  p.design.points_per_axis = static_cast<int>(d.unsigned_or("points_per_axis", 0));
  if (p.design.method == DesignMethod::Lhs && p.design.n < 1) throw ConfigError("pce.design.n: must be >= 1");
  if (p.design.method == DesignMethod::Smolyak && p.design.level > 2) {
    throw ConfigError("pce.design.level: unsupported level " + std::to_string(p.design.level) + " (0, 1, 2)");
  }
  return p;
}

}  // namespace

StudyConfig parse_config(const json& root, const std::filesystem::path& base_dir) {
  Reader r(root, "");
  r.allow_only({"inputs", "surrogate", "true_model", "pce", "mcs", "outputs"});
  StudyConfig c;
  c.base_dir = base_dir;

  const json& inputs = r.child("inputs");
  if (!inputs.is_array()) throw ConfigError("inputs: expected an array");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    c.inputs.push_back(parse_input(inputs[i], "inputs[" + std::to_string(i) + "]"));
  }
  c.surrogate = parse_surrogate(r.child("surrogate"));
  if (r.has("true_model")) c.true_model = parse_true_model(r.child("true_model"));
  c.pce = parse_pce(r.child("pce"));
  if (r.has("mcs")) {
    Reader m(r.child("mcs"), "mcs");
    m.allow_only({"n_samples", "seed"});
    McsConfig mcs;
    mcs.n_samples = m.unsigned_or("n_samples", 100000);
    mcs.seed = m.unsigned_or("seed", 0);
    if (mcs.n_samples < 2) throw ConfigError("mcs.n_samples: must be >= 2");
    c.mcs = mcs;
  }
  if (r.has("outputs")) {
    Reader o(r.child("outputs"), "outputs");
    o.allow_only({"report", "sobol_csv", "cdf_csv", "pce", "training_csv"});
    c.outputs.report = o.string_or("report", c.outputs.report);
    c.outputs.sobol_csv = o.string_or("sobol_csv", c.outputs.sobol_csv);
    c.outputs.cdf_csv = o.string_or("cdf_csv", "");
    c.outputs.pce = o.string_or("pce", "");
    c.outputs.training_csv = o.string_or("training_csv", "");
  }
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  json root;
  try {
    root = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(root, path.parent_path());
}

json to_json(const StudyConfig& c) {
  json root;
  root["inputs"] = json::array();
  for (const auto& s : c.inputs) {
    root["inputs"].push_back(
        {{"name", s.name}, {"family", std::string(to_string(s.family))}, {"mean", s.mean}, {"std", s.std}});
  }
  json sur;
  if (c.surrogate.kind == SurrogateKind::GpTrain) {
    const auto& p = c.surrogate.plan;
    sur = {{"kind", "gp_train"}, {"training_points", p.points}, {"seed", p.seed}, {"box_width", p.box_width},
           {"restarts", p.gp.restarts}, {"jitter", p.gp.jitter}, {"max_iterations", p.gp.max_iterations}};
  } else {
    sur = {{"kind", "grid_file"}, {"path", c.surrogate.path}};
  }
  root["surrogate"] = sur;
  if (c.true_model) {
    switch (c.true_model->kind) {
      case TrueModelKind::Shaft: root["true_model"] = {{"kind", "shaft"}}; break;
      case TrueModelKind::PlateSynthetic: root["true_model"] = {{"kind", "plate_synthetic"}}; break;
      case TrueModelKind::GridFile: root["true_model"] = {{"kind", "grid_file"}, {"path", c.true_model->path}}; break;
    }
  }
  const auto& d = c.pce.design;
  root["pce"] = {{"order", c.pce.order},
                 {"design",
                  {{"method", std::string(to_string(d.method))},
                   {"n", d.n},
                   {"seed", d.seed},
                   {"level", d.level},
                   {"points_per_axis", d.points_per_axis}}}};
  if (c.mcs) root["mcs"] = {{"n_samples", c.mcs->n_samples}, {"seed", c.mcs->seed}};
  json out = {{"report", c.outputs.report}, {"sobol_csv", c.outputs.sobol_csv}};
  if (!c.outputs.cdf_csv.empty()) out["cdf_csv"] = c.outputs.cdf_csv;
  if (!c.outputs.pce.empty()) out["pce"] = c.outputs.pce;
  if (!c.outputs.training_csv.empty()) out["training_csv"] = c.outputs.training_csv;
  root["outputs"] = out;
  return root;
}

std::filesystem::path resolve_path(const StudyConfig& config, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : config.base_dir / p;
}

void validate_config(const StudyConfig& c) {
  if (c.inputs.empty()) throw ConfigError("inputs: at least one input distribution is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    if (!names.insert(c.inputs[i].name).second) {
      throw ConfigError("inputs[" + std::to_string(i) + "].name: duplicate name '" + c.inputs[i].name + "'");
    }
  }
  if (names.contains(kModelUncertaintyLabel)) {
    throw ConfigError(std::string("inputs: the name '") + kModelUncertaintyLabel + "' is reserved");
  }
  if (c.surrogate.kind == SurrogateKind::GpTrain && !c.true_model) {
    throw ConfigError("true_model: required when surrogate.kind is gp_train");
  }
  if (c.surrogate.kind == SurrogateKind::GridFile && !std::filesystem::exists(resolve_path(c, c.surrogate.path))) {
    throw ConfigError("surrogate.path: file '" + c.surrogate.path + "' does not exist");
  }
  if (c.true_model) {
    if (c.true_model->kind == TrueModelKind::GridFile &&
        !std::filesystem::exists(resolve_path(c, c.true_model->path))) {
      throw ConfigError("true_model.path: file '" + c.true_model->path + "' does not exist");
    }
    if ((c.true_model->kind == TrueModelKind::Shaft || c.true_model->kind == TrueModelKind::PlateSynthetic) &&
        c.inputs.size() != 5) {
      throw ConfigError("true_model.kind: built-in models take exactly 5 inputs");
    }
  }
}

void apply_seed_override(StudyConfig& config, std::uint64_t seed) {
  config.pce.design.seed = seed;
  config.surrogate.plan.seed = seed + 1;
  config.surrogate.plan.gp.seed = seed + 1;
  if (config.mcs) config.mcs->seed = seed + 2;
}

}  // namespace cuq
