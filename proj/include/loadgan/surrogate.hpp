#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "loadgan/corpus.hpp"

namespace loadgan::corpus {

/// Parameters of the synthetic stand-in for measured bus loads.
struct SurrogateConfig {
  std::size_t loads = 12;
  std::size_t weeks = 104;
  double noise_sigma = 0.035;  // AR(1) innovation std, relative to the load level
  double step_rate = 0.02;     // industrial level changes per hour
  std::uint64_t seed = 2017;

  void validate() const;
  static SurrogateConfig from_key_values(const std::map<std::string, std::string>& values);
};

struct SurrogateCorpus {
  Corpus corpus;
  std::vector<RawSeries> series;
  std::map<std::string, LoadType> true_types;
};

/// Even-numbered loads are mainly residential, odd-numbered mainly industrial.
/// Series start Monday 2017-01-02 00:00.
SurrogateCorpus make_surrogate_corpus(const SurrogateConfig& config);

}  // namespace loadgan::corpus
