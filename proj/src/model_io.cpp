#include "gdm/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gdm/errors.hpp"

namespace gdm::io {

namespace {

Json one_based(const std::vector<FeatureIndex>& v) {
  Json a = Json::array();
  for (const FeatureIndex j : v) a.push_back(j + 1);
  return a;
}

std::vector<FeatureIndex> zero_based(const Json& a) {
  std::vector<FeatureIndex> out;
  for (const auto& x : a) {
    const auto j = x.get<std::size_t>();
    if (j == 0) throw DataError("feature indices in documents are 1-based; got 0");
    out.push_back(j - 1);
  }
  return out;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

Json to_json(const GdmConfig& c) {
  Json j;
  j["budget"] = c.budget;
  j["iterations"] = c.iterations;
  j["tau"] = c.tau;
  j["C"] = c.C;
  j["eps_cut"] = c.eps_cut;
  j["eps_sub"] = c.eps_sub;
  j["seed"] = c.seed;
  j["target_features"] = c.target_features ? Json(*c.target_features) : Json(nullptr);
  j["with_affiliated"] = c.with_affiliated;
  return j;
}

GdmConfig config_from_json(const Json& j) {
  return guarded("config", [&] {
    GdmConfig c;
    c.budget = j.at("budget").get<std::size_t>();
    c.iterations = j.at("iterations").get<std::size_t>();
    c.tau = j.at("tau").get<double>();
    c.C = j.at("C").get<double>();
    c.eps_cut = j.at("eps_cut").get<double>();
    c.eps_sub = j.at("eps_sub").get<double>();
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("target_features") && !j["target_features"].is_null()) {
      c.target_features = j["target_features"].get<std::size_t>();
    }
    c.with_affiliated = j.value("with_affiliated", false);
    return c;
  });
}

Json to_json(const solver::SvmModel& s) {
  Json j;
  j["n_features"] = s.n_features;
  j["features"] = one_based(s.features);
  j["weights"] = s.weights;
  j["means"] = s.means;
  j["norms"] = s.norms;
  j["gamma"] = s.gamma;
  j["primal_objective"] = s.primal_objective;
  return j;
}

solver::SvmModel svm_from_json(const Json& j) {
  return guarded("classifier", [&] {
    solver::SvmModel s;
    s.n_features = j.at("n_features").get<std::size_t>();
    s.features = zero_based(j.at("features"));
    s.weights = j.at("weights").get<std::vector<double>>();
    s.means = j.at("means").get<std::vector<double>>();
    s.norms = j.at("norms").get<std::vector<double>>();
    s.gamma = j.value("gamma", 0.0);
    s.primal_objective = j.value("primal_objective", 0.0);
    const auto k = s.features.size();
    if (s.weights.size() != k || s.means.size() != k || s.norms.size() != k) {
      throw DataError("classifier arrays differ in length");
    }
    for (const FeatureIndex f : s.features) {
      if (f >= s.n_features) throw DataError("classifier feature index out of range");
    }
    return s;
  });
}

Json to_json(const SelectionModel& m, bool include_timing) {
  Json j;
  j["version"] = kModelVersion;
  j["config"] = to_json(m.config);
  j["n_features"] = m.n_features;
  j["support"] = one_based(m.support);
  Json groups = Json::object();
  for (const auto& [s, members] : m.groups) groups[std::to_string(s + 1)] = one_based(members);
  j["groups"] = std::move(groups);
  Json constraints = Json::array();
  for (const auto& mask : m.per_constraint) {
    Json c;
    c["support"] = one_based(mask.support);
    Json g = Json::array();
    for (const auto& members : mask.groups) g.push_back(one_based(members));
    c["groups"] = std::move(g);
    constraints.push_back(std::move(c));
  }
  j["per_constraint"] = std::move(constraints);
  Json trace = Json::array();
  for (std::size_t t = 0; t < m.trace.size(); ++t) {
    const auto& e = m.trace[t];
    Json r;
    r["iteration"] = t + 1;
    r["theta"] = e.theta;
    r["violation"] = e.violation;
    r["support_size"] = e.support_size;
    r["added"] = e.added;
    if (include_timing) r["wall_time_s"] = e.wall_time_s;
    trace.push_back(std::move(r));
  }
  j["trace"] = std::move(trace);
  j["converged"] = m.converged;
  j["stop_reason"] = m.stop_reason;
  j["scores_final"] = m.scores_final;
  j["classifier"] = m.classifier ? to_json(*m.classifier) : Json(nullptr);
  return j;
}

SelectionModel model_from_json(const Json& j) {
  return guarded("model", [&] {
    if (j.value("version", std::string()) != kModelVersion) {
      throw DataError(std::string("unsupported model version; expected ") + kModelVersion);
    }
    SelectionModel m;
    m.config = config_from_json(j.at("config"));
    m.n_features = j.at("n_features").get<std::size_t>();
    m.support = zero_based(j.at("support"));
    for (const auto& [key, members] : j.at("groups").items()) {
      std::size_t s = 0;
      const auto res = std::from_chars(key.data(), key.data() + key.size(), s);
      if (res.ec != std::errc() || s == 0) throw DataError("bad group key '" + key + "'");
      m.groups[s - 1] = zero_based(members);
    }
    for (const auto& c : j.at("per_constraint")) {
      crm::ConstraintMask mask;
      mask.support = zero_based(c.at("support"));
      for (const auto& g : c.at("groups")) mask.groups.push_back(zero_based(g));
      m.per_constraint.push_back(std::move(mask));
    }
    for (const auto& r : j.at("trace")) {
      TraceEntry e;
      e.theta = r.at("theta").get<double>();
      e.violation = r.at("violation").get<double>();
      e.support_size = r.at("support_size").get<std::size_t>();
      e.added = r.value("added", false);
      e.wall_time_s = r.value("wall_time_s", 0.0);
      m.trace.push_back(e);
    }
    m.converged = j.value("converged", false);
    m.stop_reason = j.value("stop_reason", std::string());
    m.scores_final = j.value("scores_final", std::vector<double>{});
    if (j.contains("classifier") && !j["classifier"].is_null()) {
      m.classifier = svm_from_json(j["classifier"]);
    }
    for (const FeatureIndex s : m.support) {
      if (s >= m.n_features) throw DataError("support index out of range");
    }
    return m;
  });
}

Json to_json(const crm::MatchTrace& t) {
  Json j;
  Json prefix = Json::array();
  for (const auto& [f, c] : t.ranking_prefix) prefix.push_back(Json::array({f + 1, c}));
  j["ranking_prefix"] = std::move(prefix);
  j["window_floor"] = t.window_floor;
  j["scanned"] = t.scanned;
  j["correlation_checks"] = t.correlation_checks;
  Json groups = Json::array();
  for (const auto& g : t.groups) groups.push_back(one_based(g));
  j["groups"] = std::move(groups);
  return j;
}

Json to_json(const synth::GroundTruth& t) {
  Json j;
  j["version"] = kTruthVersion;
  j["n_features"] = t.n_features;
  Json groups = Json::array();
  for (const auto& g : t.groups) groups.push_back(one_based(g));
  j["groups"] = std::move(groups);
  j["group_weights"] = t.group_weights;
  j["noise_indices"] = one_based(t.noise_indices);
  return j;
}

synth::GroundTruth truth_from_json(const Json& j) {
  return guarded("ground truth", [&] {
    if (j.value("version", std::string()) != kTruthVersion) {
      throw DataError(std::string("unsupported ground-truth version; expected ") + kTruthVersion);
    }
    synth::GroundTruth t;
    t.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& g : j.at("groups")) t.groups.push_back(zero_based(g));
    t.group_weights = j.at("group_weights").get<std::vector<double>>();
    t.noise_indices = zero_based(j.at("noise_indices"));
    if (t.group_weights.size() != t.groups.size()) {
      throw DataError("group_weights and groups differ in length");
    }
    return t;
  });
}

Json to_json(const synth::RecoveryReport& r) {
  Json j;
  j["hit_rate"] = r.hit_rate;
  j["purity"] = r.purity;
  j["coverage"] = r.coverage ? Json(*r.coverage) : Json(nullptr);
  j["exclusivity_violations"] = r.exclusivity_violations;
  j["n_supports"] = r.n_supports;
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace gdm::io
