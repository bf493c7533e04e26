#include "popmap/nn/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "popmap/errors.hpp"

namespace popmap::nn {

namespace {

constexpr std::uint32_t kLayerConv3x3 = 1;
constexpr std::uint32_t kLayerDense = 2;  // 1x1 conv / dense head

struct LayerRecord {
  std::uint32_t type, cin, cout, k;
  bool operator==(const LayerRecord&) const = default;
};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path.string()), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write " + path_);
  }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<char*>(b), 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<char*>(b), 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const char* data, std::size_t n) {
    out_.write(data, static_cast<std::streamsize>(n));
  }
  void finish() {
    if (!out_) throw IoError("write failed for " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : path_(path.string()), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path_);
  }
  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void bytes(char* data, std::size_t n) {
    read(reinterpret_cast<unsigned char*>(data), n);
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw IoError("corrupt model file " + path_ + ": " + msg);
  }

 private:
  void read(unsigned char* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated");
  }
  std::string path_;
  std::ifstream in_;
};

std::vector<LayerRecord> segnet_layers(const SegNetModel& m) {
  std::vector<LayerRecord> recs;
  for (const Conv3x3& c : m.enc)
    recs.push_back({kLayerConv3x3, static_cast<std::uint32_t>(c.cin),
                    static_cast<std::uint32_t>(c.cout), 3});
  for (const Conv3x3& c : m.dec)
    recs.push_back({kLayerConv3x3, static_cast<std::uint32_t>(c.cin),
                    static_cast<std::uint32_t>(c.cout), 3});
  recs.push_back({kLayerDense, static_cast<std::uint32_t>(m.head.cin),
                  static_cast<std::uint32_t>(m.head.cout), 1});
  return recs;
}

std::vector<LayerRecord> feedback_layers(const FeedbackModel& m) {
  std::vector<LayerRecord> recs;
  for (const Conv3x3& c : m.convs)
    recs.push_back({kLayerConv3x3, static_cast<std::uint32_t>(c.cin),
                    static_cast<std::uint32_t>(c.cout), 3});
  recs.push_back({kLayerDense, static_cast<std::uint32_t>(m.channels.back()), 1, 1});
  return recs;
}

void write_common(Writer& w, std::uint32_t kind, int input_px,
                  const std::vector<int>& channels,
                  const std::vector<LayerRecord>& layers,
                  const std::vector<double>& params) {
  w.bytes("SMV1", 4);
  w.u32(kind);
  w.u32(static_cast<std::uint32_t>(input_px));
  w.u32(static_cast<std::uint32_t>(channels.size()));
  for (int c : channels) w.u32(static_cast<std::uint32_t>(c));
  w.u32(static_cast<std::uint32_t>(layers.size()));
  for (const LayerRecord& r : layers) {
    w.u32(r.type);
    w.u32(r.cin);
    w.u32(r.cout);
    w.u32(r.k);
  }
  w.u64(params.size());
  for (double v : params) w.f64(v);
  w.finish();
}

struct Header {
  std::uint32_t kind = 0;
  int input_px = 0;
  std::vector<int> channels;
  std::vector<LayerRecord> layers;
  std::vector<double> params;
};

Header read_common(Reader& r) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "SMV1", 4) != 0) r.fail("bad magic (expected SMV1)");
  Header h;
  h.kind = r.u32();
  h.input_px = static_cast<int>(r.u32());
  const std::uint32_t nch = r.u32();
  if (nch == 0 || nch > 16) r.fail("unreasonable channel count");
  for (std::uint32_t i = 0; i < nch; ++i) h.channels.push_back(static_cast<int>(r.u32()));
  const std::uint32_t nl = r.u32();
  if (nl > 64) r.fail("unreasonable layer count");
  for (std::uint32_t i = 0; i < nl; ++i) {
    LayerRecord rec{r.u32(), r.u32(), r.u32(), r.u32()};
    h.layers.push_back(rec);
  }
  const std::uint64_t np = r.u64();
  if (np > (std::uint64_t{1} << 28)) r.fail("unreasonable parameter count");
  h.params.resize(np);
  for (std::uint64_t i = 0; i < np; ++i) h.params[i] = r.f64();
  return h;
}

}  // namespace

void save_model(const SegNetModel& m, const std::filesystem::path& path) {
  Writer w(path);
  write_common(w, kModelKindSegNet, m.input_px, m.channels, segnet_layers(m),
               m.params.w);
}

void save_model(const FeedbackModel& m, const std::filesystem::path& path) {
  Writer w(path);
  write_common(w, kModelKindFeedback, m.input_px, m.channels, feedback_layers(m),
               m.params.w);
}

SegNetModel load_segnet(const std::filesystem::path& path) {
  Reader r(path);
  Header h = read_common(r);
  if (h.kind != kModelKindSegNet) r.fail("not a patch classifier model");
  SegNetModel m = SegNetModel::make(h.input_px, h.channels, 0, 1.0);
  if (segnet_layers(m) != h.layers) r.fail("layer descriptor mismatch");
  if (h.params.size() != m.params.w.size()) r.fail("parameter count mismatch");
  m.params.w = std::move(h.params);
  return m;
}

FeedbackModel load_feedback(const std::filesystem::path& path) {
  Reader r(path);
  Header h = read_common(r);
  if (h.kind != kModelKindFeedback) r.fail("not a segmentation model");
  FeedbackModel m = FeedbackModel::make(h.input_px, h.channels, 0, 1.0);
  if (feedback_layers(m) != h.layers) r.fail("layer descriptor mismatch");
  if (h.params.size() != m.params.w.size()) r.fail("parameter count mismatch");
  m.params.w = std::move(h.params);
  return m;
}

std::uint32_t peek_model_kind(const std::filesystem::path& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "SMV1", 4) != 0) r.fail("bad magic (expected SMV1)");
  return r.u32();
}

}  // namespace popmap::nn
