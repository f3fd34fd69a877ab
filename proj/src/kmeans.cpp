#include "loadgan/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

#include "loadgan/dsp.hpp"
#include "loadgan/error.hpp"
#include "loadgan/random.hpp"

namespace loadgan::corpus {

namespace {

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double d = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double diff = a[j] - b[j];
    d += diff * diff;
  }
  return d;
}

std::vector<double> kmeanspp_centers(std::span<const double> points, std::size_t dim, std::size_t k, Rng& rng) {
  const std::size_t m = points.size() / dim;
  std::vector<double> centers;
  centers.reserve(k * dim);
  std::uniform_int_distribution<std::size_t> first(0, m - 1);
  std::size_t chosen = first(rng);
  centers.insert(centers.end(), points.begin() + static_cast<std::ptrdiff_t>(chosen * dim),
                 points.begin() + static_cast<std::ptrdiff_t>((chosen + 1) * dim));

  std::vector<double> nearest(m, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    const double* last = centers.data() + (c - 1) * dim;
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.data() + i * dim, last, dim));
      total += nearest[i];
    }
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double running = 0.0;
      chosen = m - 1;
      for (std::size_t i = 0; i < m; ++i) {
        running += nearest[i];
        if (running >= target && nearest[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      // Fewer distinct points than clusters; duplicate a center.
      chosen = first(rng);
    }
    centers.insert(centers.end(), points.begin() + static_cast<std::ptrdiff_t>(chosen * dim),
                   points.begin() + static_cast<std::ptrdiff_t>((chosen + 1) * dim));
  }
  return centers;
}

KMeansResult lloyd(std::span<const double> points, std::size_t dim, std::size_t k, std::vector<double> centers,
                   std::size_t max_iterations) {
  const std::size_t m = points.size() / dim;
  KMeansResult result;
  result.assignments.assign(m, 0);
  auto assign = [&] {
    double inertia = 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points.data() + i * dim, centers.data() + c * dim, dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed |= result.assignments[i] != best;
      result.assignments[i] = best;
      inertia += best_d;
    }
    return std::pair{inertia, changed};
  };

  auto [inertia, changed] = assign();
  result.inertia_trace.push_back(inertia);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t c = result.assignments[i];
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += points[i * dim + j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its center
      for (std::size_t j = 0; j < dim; ++j) centers[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
    }
    std::tie(inertia, changed) = assign();
    result.inertia_trace.push_back(inertia);
    if (!changed) break;
  }
  result.centroids = std::move(centers);
  result.inertia = inertia;
  return result;
}

}  // namespace

KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (dim == 0 || points.empty() || points.size() % dim != 0) {
    fail(ErrorCode::EmptyInput, "k-means needs at least one point");
  }
  const std::size_t m = points.size() / dim;
  if (k == 0 || k > m) {
    fail(ErrorCode::EmptyInput, "k-means needs 1 <= k <= number of points");
  }
  for (double v : points) {
    if (!std::isfinite(v)) fail(ErrorCode::NumericError, "k-means features must be finite");
  }

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, options.restarts); ++restart) {
    Rng rng = make_rng(seed, restart);
    auto result = lloyd(points, dim, k, kmeanspp_centers(points, dim, k, rng), options.max_iterations);
    if (result.inertia < best.inertia) best = std::move(result);
  }
  return best;
}

double diurnal_share(std::span<const double> profile) {
  const auto power = dsp::one_sided_periodogram(profile);
  const std::size_t daily_bin = profile.size() / 24;  // bins per 24 h cycle
  double total = 0.0, diurnal = 0.0;
  for (std::size_t k = 1; k < power.size(); ++k) {
    total += power[k];
    if (daily_bin > 0 && k % daily_bin == 0 && profile.size() % 24 == 0) diurnal += power[k];
  }
  return total > 0.0 ? diurnal / total : 0.0;
}

LoadTypeLabeling label_load_types(std::span<const LoadProfile> profiles, std::uint64_t seed, std::size_t clusters) {
  LoadTypeLabeling out;
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> sums;
  for (const auto& p : profiles) {
    auto& [sum, count] = sums[p.load_id];
    if (sum.empty()) sum.assign(kHoursPerWeek, 0.0);
    for (std::size_t h = 0; h < kHoursPerWeek; ++h) sum[h] += p.values[h];
    ++count;
  }
  if (sums.size() < 2) {
    fail(ErrorCode::EmptyInput, "load-type labeling needs at least two loads");
  }

  std::vector<double> features;
  for (auto& [id, entry] : sums) {
    out.load_ids.push_back(id);
    for (double v : entry.first) features.push_back(v / static_cast<double>(entry.second));
  }

  std::set<std::vector<double>> distinct;
  for (std::size_t i = 0; i < out.load_ids.size(); ++i) {
    distinct.emplace(features.begin() + static_cast<std::ptrdiff_t>(i * kHoursPerWeek),
                     features.begin() + static_cast<std::ptrdiff_t>((i + 1) * kHoursPerWeek));
  }
  if (distinct.size() < 2) {
    fail(ErrorCode::ClusteringDegenerate, "all loads have identical mean profiles");
  }

  const std::size_t k = std::min(clusters, out.load_ids.size());
  out.clustering = kmeans(features, kHoursPerWeek, k, seed);
  const auto& centroids = out.clustering.centroids;

  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t a : out.clustering.assignments) ++sizes[a];
  std::vector<std::size_t> occupied;
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] > 0) occupied.push_back(c);
  }
  if (occupied.size() < 2) {
    fail(ErrorCode::ClusteringDegenerate, "clustering produced a single group");
  }

  auto centroid = [&](std::size_t c) {
    return std::span<const double>(centroids.data() + c * kHoursPerWeek, kHoursPerWeek);
  };
  out.residential_cluster = *std::max_element(occupied.begin(), occupied.end(), [&](std::size_t a, std::size_t b) {
    return diurnal_share(centroid(a)) < diurnal_share(centroid(b));
  });
  std::size_t industrial = k;
  for (std::size_t c : occupied) {
    if (c == out.residential_cluster) continue;
    if (industrial == k || sizes[c] > sizes[industrial]) industrial = c;
  }
  out.industrial_cluster = industrial;

  for (std::size_t i = 0; i < out.load_ids.size(); ++i) {
    std::size_t c = out.clustering.assignments[i];
    if (c != out.residential_cluster && c != out.industrial_cluster) {
      const double* f = features.data() + i * kHoursPerWeek;
      const double to_res = squared_distance(f, centroid(out.residential_cluster).data(), kHoursPerWeek);
      const double to_ind = squared_distance(f, centroid(out.industrial_cluster).data(), kHoursPerWeek);
      c = to_res <= to_ind ? out.residential_cluster : out.industrial_cluster;
    }
    out.cluster_of_load.push_back(out.clustering.assignments[i]);
    out.types[out.load_ids[i]] = c == out.residential_cluster ? LoadType::Residential : LoadType::Industrial;
  }
  return out;
}

}  // namespace loadgan::corpus
