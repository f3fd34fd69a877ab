#include "loadgan/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "loadgan/error.hpp"

namespace loadgan::nn {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void pod(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  void doubles(const std::vector<double>& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    bytes.insert(bytes.end(), p, p + v.size() * sizeof(double));
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    const auto n = pod<std::uint64_t>();
    if (n > (data_.size() - pos_) / sizeof(double)) fail(ErrorCode::ParseError, "checkpoint truncated");
    std::vector<double> v(n);
    std::memcpy(v.data(), data_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  bool done() const { return pos_ == data_.size(); }
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail(ErrorCode::ParseError, "checkpoint truncated");
  }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace

bool operator==(const ModelBlock& a, const ModelBlock& b) {
  if (a.name != b.name || a.layers != b.layers || a.parameters != b.parameters) return false;
  if (a.optimizer.has_value() != b.optimizer.has_value()) return false;
  if (!a.optimizer) return true;
  const auto &x = *a.optimizer, &y = *b.optimizer;
  if (x.step != y.step || x.moments.size() != y.moments.size()) return false;
  if (x.config.learning_rate != y.config.learning_rate || x.config.beta1 != y.config.beta1 ||
      x.config.beta2 != y.config.beta2 || x.config.epsilon != y.config.epsilon) {
    return false;
  }
  for (std::size_t i = 0; i < x.moments.size(); ++i) {
    if (x.moments[i].first != y.moments[i].first || x.moments[i].second != y.moments[i].second) return false;
  }
  return true;
}

const ModelBlock& Checkpoint::model(const std::string& name) const {
  for (const auto& m : models) {
    if (m.name == name) return m;
  }
  fail(ErrorCode::MissingSection, "checkpoint has no model '" + name + "'");
}

std::vector<std::uint8_t> serialize(const Checkpoint& checkpoint) {
  Writer w;
  w.bytes.insert(w.bytes.end(), std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  w.pod(kCheckpointVersion);
  w.pod(static_cast<std::uint32_t>(checkpoint.meta.size()));
  for (const auto& [k, v] : checkpoint.meta) {
    w.str(k);
    w.str(v);
  }
  w.pod(static_cast<std::uint32_t>(checkpoint.models.size()));
  for (const auto& model : checkpoint.models) {
    w.str(model.name);
    w.pod(static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& spec : model.layers) {
      w.pod(static_cast<std::uint8_t>(spec.kind));
      w.pod(static_cast<std::uint8_t>(spec.activation));
      for (std::size_t v : {spec.in, spec.out, spec.kernel, spec.stride, spec.padding}) {
        w.pod(static_cast<std::uint64_t>(v));
      }
    }
    w.doubles(model.parameters);
    w.pod(static_cast<std::uint8_t>(model.optimizer.has_value()));
    if (model.optimizer) {
      const auto& opt = *model.optimizer;
      w.pod(opt.config.learning_rate);
      w.pod(opt.config.beta1);
      w.pod(opt.config.beta2);
      w.pod(opt.config.epsilon);
      w.pod(opt.step);
      w.pod(static_cast<std::uint64_t>(opt.moments.size()));
      for (const auto& m : opt.moments) {
        w.doubles(m.first);
        w.doubles(m.second);
      }
    }
  }
  return std::move(w.bytes);
}

Checkpoint deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    fail(ErrorCode::ParseError, "not a LOADGAN1 checkpoint");
  }
  Reader r(bytes.subspan(sizeof(kCheckpointMagic)));
  if (const auto version = r.pod<std::uint32_t>(); version != kCheckpointVersion) {
    fail(ErrorCode::ParseError, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint cp;
  const auto n_meta = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    auto key = r.str();
    cp.meta[key] = r.str();
  }
  const auto n_models = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_models; ++i) {
    ModelBlock block;
    block.name = r.str();
    const auto n_layers = r.pod<std::uint32_t>();
    for (std::uint32_t j = 0; j < n_layers; ++j) {
      LayerSpec spec;
      const auto kind = r.pod<std::uint8_t>();
      const auto act = r.pod<std::uint8_t>();
      if (kind > static_cast<std::uint8_t>(LayerKind::Activation) || act > static_cast<std::uint8_t>(Activation::Tanh)) {
        fail(ErrorCode::ParseError, "checkpoint has an unknown layer kind");
      }
      spec.kind = static_cast<LayerKind>(kind);
      spec.activation = static_cast<Activation>(act);
      spec.in = r.pod<std::uint64_t>();
      spec.out = r.pod<std::uint64_t>();
      spec.kernel = r.pod<std::uint64_t>();
      spec.stride = r.pod<std::uint64_t>();
      spec.padding = r.pod<std::uint64_t>();
      block.layers.push_back(spec);
    }
    block.parameters = r.doubles();
    if (r.pod<std::uint8_t>()) {
      OptimizerState opt;
      opt.config.learning_rate = r.pod<double>();
      opt.config.beta1 = r.pod<double>();
      opt.config.beta2 = r.pod<double>();
      opt.config.epsilon = r.pod<double>();
      opt.step = r.pod<std::uint64_t>();
      const auto n = r.pod<std::uint64_t>();
      for (std::uint64_t j = 0; j < n; ++j) {
        AdamMoments m;
        m.first = r.doubles();
        m.second = r.doubles();
        opt.moments.push_back(std::move(m));
      }
      block.optimizer = std::move(opt);
    }
    cp.models.push_back(std::move(block));
  }
  if (!r.done()) fail(ErrorCode::ParseError, "trailing bytes after checkpoint");
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto bytes = serialize(checkpoint);
  // Write-then-rename keeps the previous checkpoint intact on failure.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write checkpoint '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "checkpoint write failed");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

ModelBlock make_block(const std::string& name, const std::vector<Layer>& layers, const Adam* optimizer) {
  ModelBlock block;
  block.name = name;
  for (const auto& l : layers) block.layers.push_back(l.spec());
  block.parameters = flatten_parameters(collect_parameters(layers));
  if (optimizer) block.optimizer = optimizer->state();
  return block;
}

std::vector<Layer> layers_from_block(const ModelBlock& block) {
  std::vector<Layer> layers;
  for (const auto& spec : block.layers) layers.emplace_back(spec);
  assign_parameters(collect_parameters(layers), block.parameters);
  return layers;
}

}  // namespace loadgan::nn
