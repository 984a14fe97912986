#include "gdm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gdm/corr.hpp"
#include "gdm/errors.hpp"

namespace gdm::bench {

double accuracy(const solver::SvmModel& svm, const data::SparseDataset& dataset) {
  if (dataset.n_samples() == 0) throw DataError("accuracy on an empty dataset");
  const auto pred = predict(dataset, svm);
  std::size_t right = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) right += pred[i] == dataset.label(i) ? 1 : 0;
  return static_cast<double>(right) / static_cast<double>(pred.size());
}

void SweepSpec::validate() const {
  if (feature_counts.empty()) throw std::invalid_argument("no feature counts");
  for (std::size_t i = 0; i < feature_counts.size(); ++i) {
    if (feature_counts[i] == 0) throw std::invalid_argument("feature counts must be positive");
    if (i > 0 && feature_counts[i] <= feature_counts[i - 1]) {
      throw std::invalid_argument("feature counts must be strictly ascending");
    }
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds");
  if (jobs == 0) throw std::invalid_argument("jobs must be >= 1");
}

namespace {

std::optional<double> red_or_empty(const data::SparseDataset& ds,
                                   const std::vector<FeatureIndex>& f) {
  if (f.size() < 2) return std::nullopt;
  return corr::redundancy_rate(ds, f);
}

SweepRow run_cell(const Split& split, std::size_t k, std::uint64_t seed, const SweepSpec& spec,
                  const GdmConfig& base) {
  SweepRow row;
  row.k = k;
  row.seed = seed;
  try {
    GdmConfig config = base;
    config.seed = seed;
    config.target_features = k;
    config.with_affiliated = false;

    const auto t0 = std::chrono::steady_clock::now();
    if (spec.time_standardization) (void)data::compute_stats(split.train);
    const auto fitted = fit(split.train, config);
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto& model = fitted.model;
    row.theta_final = fitted.state.theta;
    row.stop_reason = model.stop_reason;
    row.n_support = model.support.size();
    const auto selected = model.selected_with_affiliated();
    row.n_selected = selected.size();

    row.accuracy_support = accuracy(final_classifier(split.train, model, config), split.test);
    GdmConfig with_aff = config;
    with_aff.with_affiliated = true;
    row.accuracy_affiliated =
        accuracy(final_classifier(split.train, model, with_aff), split.test);
    row.red_support = red_or_empty(split.train, model.support);
    row.red_selected = red_or_empty(split.train, selected);
    if (split.truth) {
      const auto rec = synth::recovery_score(model, *split.truth, config.tau);
      row.hit_rate = rec.hit_rate;
      row.purity = rec.purity;
    }
  } catch (const std::exception& e) {
    SweepRow failed;
    failed.k = k;
    failed.seed = seed;
    failed.status = std::string("error: ") + e.what();
    return failed;
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SplitSource& source, const SweepSpec& spec,
                                const GdmConfig& base) {
  spec.validate();
  base.validate();
  const std::size_t nk = spec.feature_counts.size();
  std::vector<SweepRow> rows(spec.seeds.size() * nk);

  // Seeds are the unit of data generation; cells of one seed share it.
  std::vector<std::optional<Split>> splits(spec.seeds.size());
  std::vector<std::string> split_error(spec.seeds.size());
  std::vector<std::once_flag> made(spec.seeds.size());
  auto split_for = [&](std::size_t s) -> const Split* {
    std::call_once(made[s], [&] {
      try {
        splits[s].emplace(source(spec.seeds[s]));
      } catch (const std::exception& e) {
        split_error[s] = e.what();
      }
    });
    return splits[s] ? &*splits[s] : nullptr;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cell = next++; cell < rows.size(); cell = next++) {
      const std::size_t s = cell / nk;
      const std::size_t k = spec.feature_counts[cell % nk];
      if (const Split* split = split_for(s)) {
        rows[cell] = run_cell(*split, k, spec.seeds[s], spec, base);
      } else {
        rows[cell].k = k;
        rows[cell].seed = spec.seeds[s];
        rows[cell].status = "error: " + split_error[s];
      }
    }
  };

  const std::size_t workers = std::min(spec.jobs, rows.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::vector<SweepRow> run_sweep(const data::SparseDataset& train,
                                const data::SparseDataset& test, const SweepSpec& spec,
                                const GdmConfig& base) {
  const SplitSource same = [&train, &test](std::uint64_t) {
    return Split{train, test, std::nullopt};
  };
  return run_sweep(same, spec, base);
}

namespace {

void put(std::ostream& out, const std::optional<double>& v) {
  if (!v) {
    out << "NA";
    return;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, *v);
  out << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + '"';
}

}  // namespace

void write_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "# " << kSweepVersion << '\n';
  out << "k,seed,accuracy_support,accuracy_affiliated,red_support,red_selected,"
         "wall_time_s,theta_final,n_support,n_selected,hit_rate,purity,stop_reason,status\n";
  for (const auto& r : rows) {
    out << r.k << ',' << r.seed << ',';
    put(out, r.accuracy_support);
    out << ',';
    put(out, r.accuracy_affiliated);
    out << ',';
    put(out, r.red_support);
    out << ',';
    put(out, r.red_selected);
    out << ',';
    put(out, r.wall_time_s);
    out << ',';
    put(out, r.theta_final);
    out << ',' << r.n_support << ',' << r.n_selected << ',';
    put(out, r.hit_rate);
    out << ',';
    put(out, r.purity);
    out << ',' << csv_quote(r.stop_reason) << ',' << csv_quote(r.status) << '\n';
  }
}

nlohmann::ordered_json summary_json(const std::vector<SweepRow>& rows) {
  using Json = nlohmann::ordered_json;
  const std::pair<const char*, std::optional<double> SweepRow::*> metrics[] = {
      {"accuracy_support", &SweepRow::accuracy_support},
      {"accuracy_affiliated", &SweepRow::accuracy_affiliated},
      {"red_support", &SweepRow::red_support},
      {"red_selected", &SweepRow::red_selected},
      {"wall_time_s", &SweepRow::wall_time_s},
      {"theta_final", &SweepRow::theta_final},
      {"hit_rate", &SweepRow::hit_rate},
      {"purity", &SweepRow::purity},
  };
  std::map<std::size_t, std::vector<const SweepRow*>> by_k;
  for (const auto& r : rows) by_k[r.k].push_back(&r);

  Json out;
  out["version"] = kSweepVersion;
  Json cells = Json::array();
  for (const auto& [k, group] : by_k) {
    Json c;
    c["k"] = k;
    c["cells"] = group.size();
    c["failed"] = std::count_if(group.begin(), group.end(),
                                [](const SweepRow* r) { return r->status != "ok"; });
    for (const auto& [name, field] : metrics) {
      std::vector<double> v;
      for (const SweepRow* r : group) {
        if (r->*field) v.push_back(*(r->*field));
      }
      if (v.empty()) {
        c[name] = nullptr;
        continue;
      }
      double sum = 0.0;
      for (double x : v) sum += x;
      c[name] = {{"mean", sum / static_cast<double>(v.size())},
                 {"min", *std::min_element(v.begin(), v.end())},
                 {"max", *std::max_element(v.begin(), v.end())}};
    }
    cells.push_back(std::move(c));
  }
  out["by_k"] = std::move(cells);
  return out;
}

}  // namespace gdm::bench
