#include "loadgan/corpus_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "loadgan/error.hpp"

namespace loadgan::corpus {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const auto end = line.find(sep, begin);
    out.push_back(line.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin));
    if (end == std::string_view::npos) break;
    begin = end + 1;
  }
  return out;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::string profile_header() {
  std::string header = "load_id,week_start,weekly_mean,season,type";
  char buffer[8];
  for (std::size_t h = 0; h < kHoursPerWeek; ++h) {
    std::snprintf(buffer, sizeof(buffer), ",h%03zu", h);
    header += buffer;
  }
  return header;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::ParseError, "bad number '" + std::string(text) + "'");
  }
  return v;
}

void write_profile_csv(std::ostream& out, const Corpus& corpus) {
  out << profile_header() << '\n';
  for (std::size_t row = 0; row < corpus.rows(); ++row) {
    const auto& meta = corpus.meta[row];
    const auto& label = corpus.labels[row];
    out << meta.load_id << ',' << format_date(meta.week_start) << ',' << format_double(meta.weekly_mean) << ','
        << season_name(label.season) << ',' << type_name(label.type);
    for (double v : corpus.profile(row)) out << ',' << format_double(v);
    out << '\n';
  }
}

Corpus read_profile_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != profile_header()) {
    fail(ErrorCode::ParseError, "profile CSV header mismatch");
  }
  Corpus corpus;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = strip_cr(line);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 5 + kHoursPerWeek) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 173 fields");
    }
    try {
      ProfileMeta meta{std::string(fields[0]), parse_date(fields[1]), parse_double(fields[2])};
      corpus.labels.push_back({parse_season(fields[3]), parse_type(fields[4])});
      corpus.meta.push_back(std::move(meta));
      for (std::size_t h = 0; h < kHoursPerWeek; ++h) corpus.profiles.push_back(parse_double(fields[5 + h]));
    } catch (const Error& e) {
      fail(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

std::vector<RawSeries> read_raw_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "timestamp,load_id,mw") {
    fail(ErrorCode::ParseError, "raw series CSV must start with 'timestamp,load_id,mw'");
  }
  std::map<std::string, RawSeries> by_load;
  std::vector<std::string> order;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = strip_cr(line);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 3) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 3 fields");
    }
    const Timestamp ts = parse_timestamp(fields[0]);
    const std::string id(fields[1]);
    const double mw = parse_double(fields[2]);
    if (!std::isfinite(mw) || mw <= 0.0) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": load must be a positive number");
    }
    auto [it, inserted] = by_load.try_emplace(id);
    auto& series = it->second;
    if (inserted) {
      series.load_id = id;
      series.start = ts;
      order.push_back(id);
    } else if (ts != series.start + std::chrono::hours{static_cast<long>(series.values.size())}) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": samples of '" + id +
                                      "' are not contiguous hourly");
    }
    series.values.push_back(mw);
  }
  std::vector<RawSeries> out;
  for (const auto& id : order) out.push_back(std::move(by_load[id]));
  return out;
}

config::KeyValues corpus_manifest(const Corpus& corpus) {
  config::KeyValues m;
  m["rows"] = std::to_string(corpus.rows());
  m["scale_min"] = format_double(corpus.scale.min);
  m["scale_max"] = format_double(corpus.scale.max);
  std::vector<std::size_t> counts(kLabelCount, 0);
  for (const auto& label : corpus.labels) ++counts[label.index()];
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    const auto label = ConditionLabel::from_index(i);
    m["count." + std::string(season_name(label.season)) + "_" + std::string(type_name(label.type))] =
        std::to_string(counts[i]);
  }
  return m;
}

ScaleRecord scale_from_manifest(const config::KeyValues& manifest) {
  const auto lo = manifest.find("scale_min");
  const auto hi = manifest.find("scale_max");
  if (lo == manifest.end() || hi == manifest.end()) {
    fail(ErrorCode::MissingSection, "manifest lacks scale_min/scale_max");
  }
  return {parse_double(lo->second), parse_double(hi->second)};
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << contents;
  if (!out) fail(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string format_key_values(const config::KeyValues& values) {
  std::string out;
  for (const auto& [k, v] : values) out += k + " = " + v + "\n";
  return out;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".manifest");
  return p;
}

void save_corpus(const std::filesystem::path& csv_path, const Corpus& corpus, config::KeyValues extra_manifest) {
  std::ostringstream csv;
  write_profile_csv(csv, corpus);
  write_text_file(csv_path, csv.str());
  auto manifest = corpus_manifest(corpus);
  manifest.merge(extra_manifest);
  write_text_file(manifest_path_for(csv_path), format_key_values(manifest));
}

Corpus load_corpus(const std::filesystem::path& csv_path) {
  std::istringstream csv(read_text_file(csv_path));
  Corpus corpus = read_profile_csv(csv);
  const auto manifest_path = manifest_path_for(csv_path);
  if (std::filesystem::exists(manifest_path)) {
    corpus.scale = scale_from_manifest(config::load_key_values(manifest_path));
  }
  return corpus;
}

}  // namespace loadgan::corpus
