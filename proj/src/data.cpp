#include "gdm/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "gdm/errors.hpp"

namespace gdm::data {

namespace {

FeatureStats stats_for_row(FeatureRow row, std::size_t n, double eps) {
  FeatureStats s;
  if (n == 0) return s;
  double sum = 0.0;
  for (double v : row.values) sum += v;
  s.mean = sum / static_cast<double>(n);
  // Centered sum of squares over stored entries plus the implicit zeros.
  double sq = 0.0;
  for (double v : row.values) {
    const double d = v - s.mean;
    sq += d * d;
  }
  sq += static_cast<double>(n - row.size()) * s.mean * s.mean;
  s.centered_norm = std::sqrt(sq);
  s.is_degenerate = sq <= eps;
  return s;
}

std::vector<FeatureStats> stats_for_all(const SparseDataset& ds, double eps) {
  std::vector<FeatureStats> out(ds.n_features());
  const auto m = static_cast<std::ptrdiff_t>(ds.n_features());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    out[j] = stats_for_row(ds.row(static_cast<FeatureIndex>(j)), ds.n_samples(), eps);
  }
  return out;
}

}  // namespace

SparseDataset::SparseDataset(std::vector<double> labels, std::size_t n_features,
                             std::vector<std::size_t> row_ptr,
                             std::vector<SampleIndex> sample_index,
                             std::vector<double> values,
                             double variance_epsilon)
    : labels_(std::move(labels)),
      row_ptr_(std::move(row_ptr)),
      sample_index_(std::move(sample_index)),
      values_(std::move(values)) {
  for (double y : labels_) {
    if (y != 1.0 && y != -1.0) throw DataError("labels must be +1 or -1");
  }
  if (labels_.size() > std::numeric_limits<SampleIndex>::max()) {
    throw DataError("too many samples");
  }
  if (row_ptr_.size() != n_features + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != values_.size() ||
      sample_index_.size() != values_.size()) {
    throw DataError("inconsistent sparse row layout");
  }
  for (std::size_t j = 0; j < n_features; ++j) {
    if (row_ptr_[j] > row_ptr_[j + 1]) throw DataError("inconsistent sparse row layout");
    for (std::size_t p = row_ptr_[j]; p < row_ptr_[j + 1]; ++p) {
      if (sample_index_[p] >= labels_.size()) {
        throw DataError("sample index out of range in feature " + std::to_string(j));
      }
      if (p > row_ptr_[j] && sample_index_[p] <= sample_index_[p - 1]) {
        throw DataError("sample indices not strictly increasing in feature " +
                        std::to_string(j));
      }
      if (values_[p] == 0.0 || !std::isfinite(values_[p])) {
        throw DataError("explicit zero or non-finite value in feature " +
                        std::to_string(j));
      }
    }
  }
  stats_.resize(n_features);  // n_features() reads stats_.size()
  stats_ = stats_for_all(*this, variance_epsilon);
}

SparseDataset SparseDataset::from_dense(
    std::vector<double> labels,
    const std::vector<std::vector<double>>& feature_rows) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> row_ptr{0};
  std::vector<SampleIndex> idx;
  std::vector<double> vals;
  for (const auto& row : feature_rows) {
    if (row.size() != n) throw DataError("dense feature row length != n_samples");
    for (std::size_t i = 0; i < n; ++i) {
      if (row[i] != 0.0) {
        idx.push_back(static_cast<SampleIndex>(i));
        vals.push_back(row[i]);
      }
    }
    row_ptr.push_back(vals.size());
  }
  return SparseDataset(std::move(labels), feature_rows.size(), std::move(row_ptr),
                       std::move(idx), std::move(vals));
}

SparseDataset SparseDataset::from_samples(std::vector<double> labels,
                                          std::size_t n_features,
                                          const std::vector<SampleEntries>& samples) {
  if (samples.size() != labels.size()) throw DataError("samples/labels size mismatch");
  std::vector<std::size_t> count(n_features + 1, 0);
  for (const auto& s : samples) {
    for (std::size_t p = 0; p < s.size(); ++p) {
      if (s[p].first >= n_features) throw DataError("feature index out of range");
      if (p > 0 && s[p].first <= s[p - 1].first) {
        throw DataError("feature indices not strictly increasing");
      }
      if (s[p].second != 0.0) ++count[s[p].first + 1];
    }
  }
  for (std::size_t j = 0; j < n_features; ++j) count[j + 1] += count[j];
  std::vector<SampleIndex> idx(count.back());
  std::vector<double> vals(count.back());
  std::vector<std::size_t> cursor(count.begin(), count.end() - 1);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (const auto& [j, v] : samples[i]) {
      if (v == 0.0) continue;
      idx[cursor[j]] = static_cast<SampleIndex>(i);
      vals[cursor[j]] = v;
      ++cursor[j];
    }
  }
  return SparseDataset(std::move(labels), n_features, std::move(count),
                       std::move(idx), std::move(vals));
}

FeatureRow SparseDataset::row(FeatureIndex j) const {
  const std::size_t b = row_ptr_[j];
  const std::size_t e = row_ptr_[j + 1];
  return {std::span<const SampleIndex>(sample_index_).subspan(b, e - b),
          std::span<const double>(values_).subspan(b, e - b)};
}

std::vector<double> SparseDataset::standardized_dense(FeatureIndex j) const {
  std::vector<double> out(n_samples(), 0.0);
  const auto& s = stats_[j];
  if (s.is_degenerate) return out;
  std::fill(out.begin(), out.end(), -s.mean / s.centered_norm);
  const auto r = row(j);
  for (std::size_t p = 0; p < r.size(); ++p) {
    out[r.samples[p]] = (r.values[p] - s.mean) / s.centered_norm;
  }
  return out;
}

std::vector<SparseDataset::SampleEntries> SparseDataset::to_samples() const {
  std::vector<SampleEntries> out(n_samples());
  for (FeatureIndex j = 0; j < n_features(); ++j) {
    const auto r = row(j);
    for (std::size_t p = 0; p < r.size(); ++p) {
      out[r.samples[p]].emplace_back(j, r.values[p]);
    }
  }
  return out;
}

bool SparseDataset::operator==(const SparseDataset& other) const {
  return labels_ == other.labels_ && row_ptr_ == other.row_ptr_ &&
         sample_index_ == other.sample_index_ && values_ == other.values_ &&
         stats_ == other.stats_;
}

std::vector<FeatureStats> compute_stats(const SparseDataset& dataset,
                                        double variance_epsilon) {
  return stats_for_all(dataset, variance_epsilon);
}

double standardized_dot(const SparseDataset& dataset, FeatureIndex j,
                        std::span<const double> v, double sum_v) {
  const auto& s = dataset.stats(j);
  if (s.is_degenerate) return 0.0;
  const auto r = dataset.row(j);
  double acc = 0.0;
  for (std::size_t p = 0; p < r.size(); ++p) acc += r.values[p] * v[r.samples[p]];
  return (acc - s.mean * sum_v) / s.centered_norm;
}

// ---------------------------------------------------------------------------
// LIBSVM text

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

SparseDataset parse_libsvm(std::string_view text, std::optional<std::size_t> dimensions) {
  std::vector<double> labels;
  std::vector<SparseDataset::SampleEntries> samples;
  std::size_t max_index = 0;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      std::size_t b = i;
      while (i < line.size() && !is_space(line[i])) ++i;
      if (i > b) tokens.push_back(line.substr(b, i - b));
    }
    if (tokens.empty()) continue;

    double raw_label = 0.0;
    if (!parse_number(tokens[0], raw_label) || !std::isfinite(raw_label)) {
      throw ParseError("cannot parse label '" + std::string(tokens[0]) + "'", line_no);
    }

    SparseDataset::SampleEntries entries;
    std::size_t prev = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected idx:val, got '" + std::string(tok) + "'", line_no);
      }
      const auto key = tok.substr(0, colon);
      if (key == "qid") continue;
      std::size_t index = 0;
      double value = 0.0;
      if (!parse_number(key, index) || index == 0) {
        throw ParseError("bad feature index '" + std::string(key) + "'", line_no);
      }
      if (!parse_number(tok.substr(colon + 1), value) || !std::isfinite(value)) {
        throw ParseError("bad feature value in '" + std::string(tok) + "'", line_no);
      }
      if (index == prev) {
        throw ParseError("duplicate feature index " + std::to_string(index), line_no);
      }
      if (index < prev) {
        throw ParseError("feature indices not increasing at " + std::to_string(index),
                         line_no);
      }
      prev = index;
      max_index = std::max(max_index, index);
      if (value != 0.0) entries.emplace_back(index - 1, value);
    }
    labels.push_back(raw_label > 0.0 ? 1.0 : -1.0);
    samples.push_back(std::move(entries));
  }

  if (labels.empty()) throw ParseError("empty input", 0);
  std::size_t m = max_index;
  if (dimensions) {
    if (max_index > *dimensions) {
      throw DataError("feature index " + std::to_string(max_index) +
                      " exceeds the declared dimension " + std::to_string(*dimensions));
    }
    m = *dimensions;
  }
  return SparseDataset::from_samples(std::move(labels), m, samples);
}

SparseDataset parse_libsvm(std::istream& in, std::optional<std::size_t> dimensions) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_libsvm(std::string_view(buf.str()), dimensions);
}

SparseDataset load_libsvm(const std::filesystem::path& path,
                          std::optional<std::size_t> dimensions) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw DataError("cannot open " + path.string());
  std::string text;
  char buf[1 << 16];
  int got = 0;
  while ((got = gzread(f, buf, sizeof buf)) > 0) text.append(buf, static_cast<std::size_t>(got));
  const bool failed = got < 0;
  gzclose(f);
  if (failed) throw DataError("read error on " + path.string());
  return parse_libsvm(std::string_view(text), dimensions);
}

void write_libsvm(const SparseDataset& dataset, std::ostream& out) {
  const auto samples = dataset.to_samples();
  char buf[64];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << (dataset.label(i) > 0 ? "+1" : "-1");
    for (const auto& [j, v] : samples[i]) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out << ' ' << (j + 1) << ':' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

}  // namespace gdm::data
