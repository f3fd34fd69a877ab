#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "loadgan/error.hpp"
#include "loadgan/kmeans.hpp"
#include "loadgan/random.hpp"
#include "loadgan/surrogate.hpp"

using namespace loadgan;
using namespace loadgan::corpus;

namespace {

std::vector<double> two_clouds(std::size_t per_cloud, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> pts;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < per_cloud; ++i) {
      pts.push_back(100.0 * static_cast<double>(c) + g(rng));
      pts.push_back(-50.0 * static_cast<double>(c) + g(rng));
    }
  }
  return pts;
}

}  // namespace

TEST(KMeans, SeparatesDistantClouds) {
  Rng rng = make_rng(1);
  const auto pts = two_clouds(40, rng);
  const auto r = kmeans(pts, 2, 2, 99);
  for (std::size_t i = 1; i < 40; ++i) EXPECT_EQ(r.assignments[i], r.assignments[0]);
  for (std::size_t i = 41; i < 80; ++i) EXPECT_EQ(r.assignments[i], r.assignments[40]);
  EXPECT_NE(r.assignments[0], r.assignments[40]);
}

TEST(KMeans, SingleClusterIsGlobalMean) {
  const std::vector<double> pts = {1, 2, 3, 4, 5, 9};
  const auto r = kmeans(pts, 2, 1, 5);
  EXPECT_NEAR(r.centroids[0], 3.0, 1e-15);
  EXPECT_NEAR(r.centroids[1], 5.0, 1e-15);
}

TEST(KMeans, InertiaNonIncreasingAndFixedPoint) {
  Rng rng = make_rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> pts(3 * 60);
    for (double& v : pts) v = u(rng);
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 4);
    const auto r = kmeans(pts, 3, k, static_cast<std::uint64_t>(trial));
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
      EXPECT_LE(r.inertia_trace[i], r.inertia_trace[i - 1] + 1e-12);
    }
    // Centroids are the means of their members and each point sits at its
    // nearest centroid.
    for (std::size_t c = 0; c < k; ++c) {
      double sum[3] = {0, 0, 0};
      std::size_t n = 0;
      for (std::size_t i = 0; i < 60; ++i) {
        if (r.assignments[i] != c) continue;
        ++n;
        for (int j = 0; j < 3; ++j) sum[j] += pts[i * 3 + j];
      }
      if (n == 0) continue;
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.centroids[c * 3 + j], sum[j] / static_cast<double>(n), 1e-12);
    }
    for (std::size_t i = 0; i < 60; ++i) {
      auto dist = [&](std::size_t c) {
        double d = 0;
        for (int j = 0; j < 3; ++j) d += (pts[i * 3 + j] - r.centroids[c * 3 + j]) * (pts[i * 3 + j] - r.centroids[c * 3 + j]);
        return d;
      };
      for (std::size_t c = 0; c < k; ++c) EXPECT_LE(dist(r.assignments[i]), dist(c) + 1e-12);
    }
  }
}

TEST(KMeans, DeterministicGivenSeed) {
  Rng rng = make_rng(4);
  const auto pts = two_clouds(25, rng);
  const auto a = kmeans(pts, 2, 3, 17);
  const auto b = kmeans(pts, 2, 3, 17);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.centroids, b.centroids);
}

TEST(KMeans, EmptyInput) {
  try {
    kmeans(std::vector<double>{}, 2, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(LoadTypes, RecoversSurrogateTypes) {
  const auto s = make_surrogate_corpus(SurrogateConfig{});
  std::vector<LoadProfile> profiles = profiles_from_series(s.series);
  const auto labeling = label_load_types(profiles, 42);
  std::size_t correct = 0;
  for (const auto& [id, type] : s.true_types) correct += labeling.types.at(id) == type;
  EXPECT_GE(correct, 11u);

  // The two largest raw k = 3 clusters alone already separate the types.
  std::map<std::size_t, std::map<LoadType, std::size_t>> votes;
  for (std::size_t i = 0; i < labeling.load_ids.size(); ++i) {
    ++votes[labeling.cluster_of_load[i]][s.true_types.at(labeling.load_ids[i])];
  }
  std::vector<std::pair<std::size_t, std::size_t>> by_size;  // (size, majority count)
  for (const auto& [c, v] : votes) {
    std::size_t size = 0, majority = 0;
    for (const auto& [t, n] : v) {
      size += n;
      majority = std::max(majority, n);
    }
    by_size.emplace_back(size, majority);
  }
  std::sort(by_size.rbegin(), by_size.rend());
  const std::size_t covered = by_size[0].first + (by_size.size() > 1 ? by_size[1].first : 0);
  const std::size_t agree = by_size[0].second + (by_size.size() > 1 ? by_size[1].second : 0);
  EXPECT_GE(static_cast<double>(agree), 0.9 * static_cast<double>(covered));
}

TEST(LoadTypes, IdenticalLoadsAreDegenerate) {
  std::vector<LoadProfile> profiles;
  for (int load = 0; load < 4; ++load) {
    profiles.push_back({std::vector<double>(168, 1.0), 10.0, make_date(2017, 1, 2), "L" + std::to_string(load)});
  }
  try {
    label_load_types(profiles, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ClusteringDegenerate);
  }
}
