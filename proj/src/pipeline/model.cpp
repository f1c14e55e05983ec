#include "foodrec/pipeline/model.hpp"

#include <cstring>
#include <fstream>

namespace foodrec::pipeline {

// ---------------------------------------------------------------------------
// Prediction

std::array<Vec, kChannelCount> RestaurantModel::quantize_bundle(
    const DescriptorBundle& bundle) const {
  std::array<Vec, kChannelCount> out;
  for (int c = 0; c < kChannelCount; ++c) {
    out[c] = quantize(codebooks[c], bundle.rows[c], bow_scaling).values;
  }
  return out;
}

Prediction RestaurantModel::predict_histograms(
    const std::array<Vec, kChannelCount>& histograms) const {
  std::vector<Mat> cross;
  cross.reserve(kChannelCount);
  for (int c = 0; c < kChannelCount; ++c) {
    const double effective_a = bandwidth[c].a / svm.gamma_scale;
    Mat row(1, histograms[c].size());
    row.row(0) = histograms[c].transpose();
    cross.push_back(kernel_matrix(row, train_histograms[c], effective_a));
  }
  return predict_rows(mkl, cross)[0];
}

// ---------------------------------------------------------------------------
// Binary IO: little-endian integers, doubles by bit pattern.

namespace {

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write " + path.string());
    path_ = path.string();
  }
  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("short write to " + path_);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void vec(const Vec& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  void mat(const Mat& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path.string());
    path_ = path.string();
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      throw FormatError("truncated model file " + path_);
    }
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    check_size(n);
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  Vec vec() {
    const std::uint64_t n = u64();
    check_size(n);
    Vec v(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = f64();
    return v;
  }
  Mat mat() {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    check_size(rows);
    check_size(cols);
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t r = 0; r < rows; ++r) {
      for (std::uint64_t c = 0; c < cols; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f64();
      }
    }
    return m;
  }

 private:
  void check_size(std::uint64_t n) const {
    if (n > (1ull << 32)) throw FormatError("implausible size field in " + path_);
  }
  std::ifstream in_;
  std::string path_;
};

}  // namespace

void save_model(const std::filesystem::path& path, const RestaurantModel& model) {
  Writer w(path);
  w.bytes(kModelMagic, sizeof(kModelMagic));
  w.u32(kModelVersion);
  w.str(model.restaurant_id);
  w.u64(model.seed);
  w.str(model.config_snapshot);
  w.f64(model.svm.c);
  w.f64(model.svm.kkt_tol);
  w.i64(model.svm.max_passes);
  w.f64(model.svm.gamma_scale);
  w.u8(model.bow_scaling == BowScaling::MaxNorm ? 0 : 1);
  w.f64(model.mkl_p);

  for (int c = 0; c < kChannelCount; ++c) {
    const Codebook& cb = model.codebooks[c];
    w.u32(static_cast<std::uint32_t>(cb.channel));
    w.u32(static_cast<std::uint32_t>(cb.k));
    w.mat(cb.centers);
    w.u64(cb.seed);
    w.f64(cb.inertia);
    w.f64(model.bandwidth[c].a);
    w.u8(model.bandwidth[c].degenerate ? 1 : 0);
    w.mat(model.train_histograms[c]);
  }

  w.f64(model.mkl.p);
  w.u32(static_cast<std::uint32_t>(model.mkl.class_labels.size()));
  for (const auto& s : model.mkl.class_labels) w.str(s);
  w.u64(model.mkl.sample_labels.size());
  for (int l : model.mkl.sample_labels) w.u32(static_cast<std::uint32_t>(l));
  for (const auto& cs : model.mkl.per_class) {
    w.vec(cs.alpha);
    w.f64(cs.bias);
    w.vec(cs.beta);
    w.f64(cs.objective);
    w.u64(cs.support.size());
    for (int s : cs.support) w.u32(static_cast<std::uint32_t>(s));
    w.u8(cs.converged ? 1 : 0);
  }
}

RestaurantModel load_model(const std::filesystem::path& path) {
  Reader r(path);
  char magic[6];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw FormatError("not a model file (bad magic): " + path.string());
  }
  const std::uint32_t version = r.u32();
  if (version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version) + " in " +
                      path.string());
  }

  RestaurantModel m;
  m.restaurant_id = r.str();
  m.seed = r.u64();
  m.config_snapshot = r.str();
  m.svm.c = r.f64();
  m.svm.kkt_tol = r.f64();
  m.svm.max_passes = r.i64();
  m.svm.gamma_scale = r.f64();
  m.bow_scaling = r.u8() == 0 ? BowScaling::MaxNorm : BowScaling::L1Norm;
  m.mkl_p = r.f64();

  for (int c = 0; c < kChannelCount; ++c) {
    Codebook& cb = m.codebooks[c];
    cb.channel = static_cast<Channel>(r.u32());
    cb.k = static_cast<int>(r.u32());
    cb.centers = r.mat();
    cb.seed = r.u64();
    cb.inertia = r.f64();
    m.bandwidth[c].a = r.f64();
    m.bandwidth[c].degenerate = r.u8() != 0;
    m.train_histograms[c] = r.mat();
  }

  m.mkl.p = r.f64();
  const std::uint32_t n_classes = r.u32();
  for (std::uint32_t i = 0; i < n_classes; ++i) m.mkl.class_labels.push_back(r.str());
  const std::uint64_t n_samples = r.u64();
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    m.mkl.sample_labels.push_back(static_cast<int>(r.u32()));
  }
  for (std::uint32_t i = 0; i < n_classes; ++i) {
    MklClassSolution cs;
    cs.alpha = r.vec();
    cs.bias = r.f64();
    cs.beta = r.vec();
    cs.objective = r.f64();
    const std::uint64_t ns = r.u64();
    for (std::uint64_t s = 0; s < ns; ++s) cs.support.push_back(static_cast<int>(r.u32()));
    cs.converged = r.u8() != 0;
    m.mkl.per_class.push_back(std::move(cs));
  }
  return m;
}

}  // namespace foodrec::pipeline
