#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "loadgan/corpus.hpp"
#include "loadgan/kv_config.hpp"

namespace loadgan::corpus {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Header: load_id,week_start,weekly_mean,season,type,h000..h167
void write_profile_csv(std::ostream& out, const Corpus& corpus);
/// The scale record is not part of the CSV; it is left at its default.
Corpus read_profile_csv(std::istream& in);

/// Rows `timestamp,load_id,mw`; each load's rows must be hourly and contiguous.
std::vector<RawSeries> read_raw_series_csv(std::istream& in);

config::KeyValues corpus_manifest(const Corpus& corpus);
ScaleRecord scale_from_manifest(const config::KeyValues& manifest);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);
std::string format_key_values(const config::KeyValues& values);

/// Corpus CSV plus `<stem>.manifest` sidecar holding the scale record.
void save_corpus(const std::filesystem::path& csv_path, const Corpus& corpus, config::KeyValues extra_manifest = {});
Corpus load_corpus(const std::filesystem::path& csv_path);
std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path);

}  // namespace loadgan::corpus
