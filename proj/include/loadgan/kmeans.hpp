#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loadgan/corpus.hpp"

namespace loadgan::corpus {

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
};

struct KMeansResult {
  std::vector<std::size_t> assignments;
  std::vector<double> centroids;  // row-major k x dim
  double inertia = 0.0;
  /// Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;
};

/// Lloyd's algorithm seeded by k-means++; the restart with the lowest inertia
/// wins. `points` is row-major M x dim.
KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Share of non-DC periodogram power that sits on harmonics of the 24 h cycle.
double diurnal_share(std::span<const double> profile);

struct LoadTypeLabeling {
  std::map<std::string, LoadType> types;
  std::vector<std::string> load_ids;        // feature row order
  std::vector<std::size_t> cluster_of_load;  // parallel to load_ids
  std::size_t residential_cluster = 0;
  std::size_t industrial_cluster = 0;
  KMeansResult clustering;
};

LoadTypeLabeling label_load_types(std::span<const LoadProfile> profiles, std::uint64_t seed, std::size_t clusters = 3);

}  // namespace loadgan::corpus
