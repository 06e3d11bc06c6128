#include "abba/io/draws_file.hpp"

#include <bit>
#include <cstring>

#include "abba/errors.hpp"
#include "abba/io/csv.hpp"

namespace abba::io {
namespace {

constexpr char kMagic[8] = {'A', 'B', 'B', 'A', 'D', 'R', 'A', 'W'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  template <typename T>
  void scalar(T v) {
    if constexpr (std::endian::native == std::endian::big) {
      unsigned char b[sizeof(T)];
      std::memcpy(b, &v, sizeof(T));
      for (std::size_t i = sizeof(T); i > 0; --i) out_.push_back(static_cast<char>(b[i - 1]));
    } else {
      bytes(&v, sizeof(T));
    }
  }
  void string(const std::string& s) {
    scalar(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  void bytes(void* p, std::size_t n) {
    if (in_.size() - pos_ < n) throw MalformedInput("draws file truncated at byte " + std::to_string(pos_));
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T scalar() {
    T v;
    if constexpr (std::endian::native == std::endian::big) {
      unsigned char b[sizeof(T)], r[sizeof(T)];
      bytes(b, sizeof(T));
      for (std::size_t i = 0; i < sizeof(T); ++i) r[i] = b[sizeof(T) - 1 - i];
      std::memcpy(&v, r, sizeof(T));
    } else {
      bytes(&v, sizeof(T));
    }
    return v;
  }
  std::string string() {
    const auto n = scalar<std::uint32_t>();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

sampler::PosteriorDraws constrain_draws(const sampler::PosteriorDraws& draws,
                                        const models::ParameterLayout& layout) {
  sampler::PosteriorDraws out = draws;
  for (auto& chain : out.chains) {
    for (std::size_t it = 0; it < out.iterations; ++it) {
      for (std::size_t p = 0; p < out.dimension; ++p) {
        double& v = chain.draws[it * out.dimension + p];
        v = layout.constrain(p, v);
      }
    }
  }
  if (out.names.empty()) out.names = layout.names();
  return out;
}

std::string encode_draws(const DrawsFile& file) {
  const sampler::PosteriorDraws& d = file.draws;
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.scalar<std::uint32_t>(kDrawsVersion);
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(d.chains.size()));
  w.scalar<std::uint64_t>(d.iterations);
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(d.dimension));
  w.string(file.metadata);
  for (std::size_t p = 0; p < d.dimension; ++p) w.string(p < d.names.size() ? d.names[p] : "p" + std::to_string(p));
  for (const auto& c : d.chains) {
    w.scalar<double>(c.step_size);
    for (std::size_t p = 0; p < d.dimension; ++p) w.scalar<double>(p < c.inverse_metric.size() ? c.inverse_metric[p] : 0.0);
  }
  for (const auto& c : d.chains) {
    for (double v : c.log_density) w.scalar<double>(v);
    for (unsigned char v : c.divergent) w.scalar<std::uint8_t>(v);
    for (int v : c.tree_depth) w.scalar<std::uint8_t>(static_cast<std::uint8_t>(v));
    for (double v : c.accept_stat) w.scalar<double>(v);
  }
  for (std::size_t p = 0; p < d.dimension; ++p) {
    for (const auto& c : d.chains) {
      for (std::size_t it = 0; it < d.iterations; ++it) w.scalar<double>(c.draws[it * d.dimension + p]);
    }
  }
  return w.take();
}

DrawsFile decode_draws(std::string_view bytes) {
  Reader r(bytes);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw MalformedInput("not a draws file (bad magic)");
  const auto version = r.scalar<std::uint32_t>();
  if (version != kDrawsVersion) throw MalformedInput("unsupported draws file version " + std::to_string(version));
  DrawsFile file;
  sampler::PosteriorDraws& d = file.draws;
  const auto chains = r.scalar<std::uint32_t>();
  d.iterations = r.scalar<std::uint64_t>();
  d.dimension = r.scalar<std::uint32_t>();
  if (d.iterations > bytes.size() || d.dimension > bytes.size() || chains > bytes.size()) {
    throw MalformedInput("draws file header is inconsistent with its size");
  }
  file.metadata = r.string();
  for (std::size_t p = 0; p < d.dimension; ++p) d.names.push_back(r.string());
  d.chains.resize(chains);
  for (auto& c : d.chains) {
    c.step_size = r.scalar<double>();
    c.inverse_metric.resize(d.dimension);
    for (double& v : c.inverse_metric) v = r.scalar<double>();
  }
  for (auto& c : d.chains) {
    c.log_density.resize(d.iterations);
    c.divergent.resize(d.iterations);
    c.tree_depth.resize(d.iterations);
    c.accept_stat.resize(d.iterations);
    for (double& v : c.log_density) v = r.scalar<double>();
    for (unsigned char& v : c.divergent) v = r.scalar<std::uint8_t>();
    for (int& v : c.tree_depth) v = r.scalar<std::uint8_t>();
    for (double& v : c.accept_stat) v = r.scalar<double>();
  }
  for (auto& c : d.chains) c.draws.resize(d.iterations * d.dimension);
  for (std::size_t p = 0; p < d.dimension; ++p) {
    for (auto& c : d.chains) {
      for (std::size_t it = 0; it < d.iterations; ++it) c.draws[it * d.dimension + p] = r.scalar<double>();
    }
  }
  if (!r.done()) throw MalformedInput("draws file has trailing bytes");
  return file;
}

void write_draws(const std::filesystem::path& path, const DrawsFile& file) {
  write_file(path, encode_draws(file));
}

DrawsFile read_draws(const std::filesystem::path& path) {
  try {
    return decode_draws(read_file(path));
  } catch (const MalformedInput& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
}

}  // namespace abba::io
