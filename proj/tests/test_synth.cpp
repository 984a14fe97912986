#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "gdm/corr.hpp"
#include "gdm/model_io.hpp"
#include "gdm/synth.hpp"
#include "oracles.hpp"

namespace synth = gdm::synth;

TEST_CASE("desk default dimensions and truth partition") {
  synth::SynthConfig c;
  c.seed = 7;
  const auto gen = synth::generate(c);
  CHECK(gen.train.n_samples() == 512);
  CHECK(gen.train.n_features() == 2000);
  CHECK(gen.test.n_features() == 2000);
  CHECK(gen.truth.groups.size() == 40);
  std::set<std::size_t> seen;
  std::size_t correlated = 0;
  for (const auto& g : gen.truth.groups) {
    if (g.size() > 1) {
      ++correlated;
      CHECK(g.size() >= 4);
      CHECK(g.size() <= 8);
    }
    for (auto j : g) CHECK(seen.insert(j).second);
  }
  CHECK(correlated == 8);
  for (auto j : gen.truth.noise_indices) CHECK(seen.insert(j).second);
  CHECK(seen.size() == 2000);
}

TEST_CASE("labels are +-1 with both classes; generation is reproducible") {
  synth::SynthConfig c;
  c.n_samples = 100;
  c.n_test_samples = 50;
  c.n_features = 200;
  c.n_groups = 10;
  c.n_correlated_groups = 2;
  c.seed = 3;
  const auto a = synth::generate(c);
  const auto b = synth::generate(c);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.truth == b.truth);
  const auto y = a.train.labels();
  CHECK(std::count(y.begin(), y.end(), 1.0) > 0);
  CHECK(std::count(y.begin(), y.end(), -1.0) > 0);
  c.seed = 4;
  CHECK_FALSE(synth::generate(c).truth == a.truth);
}

TEST_CASE("no correlated groups gives singletons") {
  synth::SynthConfig c;
  c.n_samples = 64;
  c.n_features = 100;
  c.n_groups = 10;
  c.n_correlated_groups = 0;
  const auto gen = synth::generate(c);
  for (const auto& g : gen.truth.groups) CHECK(g.size() == 1);
}

TEST_CASE("infeasible configs are rejected") {
  synth::SynthConfig c;
  c.n_features = 50;
  CHECK_THROWS_AS(synth::generate(c), std::invalid_argument);
  c = {};
  c.n_correlated_groups = 41;
  CHECK_THROWS_AS(synth::generate(c), std::invalid_argument);
  c = {};
  c.within_group_corr = 1.0;
  CHECK_THROWS_AS(synth::generate(c), std::invalid_argument);
}

TEST_CASE("within-group correlation clears the target for 95% of pairs at n = 512") {
  std::size_t pairs = 0, above = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    synth::SynthConfig c;
    c.seed = seed;
    const auto gen = synth::generate(c);
    for (const auto& g : gen.truth.groups) {
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = a + 1; b < g.size(); ++b) {
          ++pairs;
          above += std::abs(gdm::corr::pearson(gen.train, g[a], g[b])) >= c.within_group_corr;
        }
    }
  }
  MESSAGE("in-group pairs above target: " << above << "/" << pairs);
  CHECK(static_cast<double>(above) >= 0.95 * static_cast<double>(pairs));
}

TEST_CASE("train and test feature means agree within sampling error") {
  synth::SynthConfig c;
  c.seed = 11;
  const auto gen = synth::generate(c);
  std::size_t outliers = 0;
  for (std::size_t j = 0; j < c.n_features; ++j) {
    const auto& a = gen.train.stats(j);
    const auto& b = gen.test.stats(j);
    const double sa = a.centered_norm / std::sqrt(512.0), sb = b.centered_norm / std::sqrt(512.0);
    const double z = (a.mean - b.mean) / std::sqrt(sa * sa / 512.0 + sb * sb / 512.0);
    outliers += std::abs(z) > 3.29;  // two-sided 0.1%
  }
  // Expect about 2 of 2000 by chance.
  CHECK(outliers <= 10);
}

TEST_CASE("recovery score definitions") {
  synth::GroundTruth t;
  t.n_features = 10;
  t.groups = {{0, 1, 2}, {3}};
  t.group_weights = {1.0, -1.0};
  t.noise_indices = {4, 5, 6, 7, 8, 9};

  gdm::SelectionModel perfect;
  perfect.support = {0, 3};
  perfect.groups = {{0, {0, 1, 2}}, {3, {3}}};
  auto r = synth::recovery_score(perfect, t, 0.25);
  CHECK(r.hit_rate == 1.0);
  CHECK(r.purity == 1.0);
  REQUIRE(r.coverage);
  CHECK(*r.coverage == 1.0);
  CHECK(r.exclusivity_violations == 0);

  gdm::SelectionModel noise;
  noise.support = {5, 6};
  noise.groups = {{5, {5}}, {6, {6}}};
  r = synth::recovery_score(noise, t, 0.25);
  CHECK(r.purity == 0.0);
  CHECK(r.hit_rate == 0.0);
  CHECK_FALSE(r.coverage);

  gdm::SelectionModel split;
  split.support = {0, 2, 7};
  split.groups = {{0, {0}}, {2, {2}}, {7, {7}}};
  r = synth::recovery_score(split, t, 0.25);
  CHECK(r.exclusivity_violations == 1);
  CHECK(r.hit_rate == 0.5);
  CHECK(r.purity == doctest::Approx(2.0 / 3.0));
  CHECK(*r.coverage == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("random supports give purity near the informative fraction") {
  double total = 0.0;
  double informative_fraction = 0.0;
  oracle::Rng rng(17);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    synth::SynthConfig c;
    c.n_samples = 32;
    c.n_test_samples = 16;
    c.seed = seed;
    const auto gen = synth::generate(c);
    std::size_t informative = 0;
    for (const auto& g : gen.truth.groups) informative += g.size();
    informative_fraction += static_cast<double>(informative) / 2000.0;
    gdm::SelectionModel m;
    std::set<std::size_t> picks;
    while (picks.size() < 200) picks.insert(rng.index(0, 1999));
    m.support.assign(picks.begin(), picks.end());
    total += synth::recovery_score(m, gen.truth, 0.25).purity;
  }
  CHECK(std::abs(total / 20.0 - informative_fraction / 20.0) < 0.02);
}

TEST_CASE("ground truth JSON round-trips with 1-based indices") {
  synth::SynthConfig c;
  c.n_samples = 16;
  c.n_test_samples = 4;
  c.n_features = 100;
  c.n_groups = 5;
  c.n_correlated_groups = 1;
  const auto gen = synth::generate(c);
  const auto j = gdm::io::to_json(gen.truth);
  CHECK(j["groups"][0][0].get<std::size_t>() == gen.truth.groups[0][0] + 1);
  CHECK(gdm::io::truth_from_json(gdm::io::Json::parse(j.dump())) == gen.truth);
}
