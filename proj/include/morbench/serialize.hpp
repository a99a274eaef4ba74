#pragma once

// Model persistence.
//
// Layout (all integers and floats little-endian):
//   magic    8 bytes  "MORBENCH"
//   version  u32      1
//   kind     u32 length + bytes   ("svm", "mlp", "bilstm")
//   count    u32      number of tensors
//   tensor*  u64 rows, u64 cols, rows*cols f64 values in row-major order
// Scalars and flags are stored as 1x1 tensors.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "morbench/bilstm.hpp"
#include "morbench/error.hpp"
#include "morbench/mlp.hpp"
#include "morbench/svm.hpp"

namespace morbench {

inline constexpr char kModelMagic[8] = {'M', 'O', 'R', 'B', 'E', 'N', 'C', 'H'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  out.write(b, 8);
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  out.write(b, 4);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ValidationError("model file truncated");
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
  return v;
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ValidationError("model file truncated");
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | b[k];
  return v;
}

class TensorWriter {
 public:
  TensorWriter(std::ostream& out, const std::string& kind, std::uint32_t count) : out_(out) {
    out_.write(kModelMagic, 8);
    put_u32(out_, kModelVersion);
    put_u32(out_, static_cast<std::uint32_t>(kind.size()));
    out_.write(kind.data(), static_cast<std::streamsize>(kind.size()));
    put_u32(out_, count);
  }

  template <typename Derived>
  void tensor(const Eigen::DenseBase<Derived>& m) {
    put_u64(out_, static_cast<std::uint64_t>(m.rows()));
    put_u64(out_, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_u64(out_, std::bit_cast<std::uint64_t>(double(m(r, c))));
  }

  void scalar(double v) {
    Eigen::Matrix<double, 1, 1> m;
    m(0, 0) = v;
    tensor(m);
  }

 private:
  std::ostream& out_;
};

class TensorReader {
 public:
  TensorReader(std::istream& in, const std::string& expected_kind) : in_(in) {
    char magic[8];
    if (!in_.read(magic, 8) || !std::equal(magic, magic + 8, kModelMagic))
      throw ValidationError("not a model file (bad magic)");
    if (auto v = get_u32(in_); v != kModelVersion)
      throw ValidationError("unsupported model version " + std::to_string(v));
    const auto len = get_u32(in_);
    if (len > 64) throw ValidationError("model kind too long");
    std::string kind(len, '\0');
    if (!in_.read(kind.data(), len)) throw ValidationError("model file truncated");
    if (kind != expected_kind) throw ValidationError("model kind '" + kind + "' where '" + expected_kind + "' expected");
    remaining_ = get_u32(in_);
  }

  Eigen::MatrixXd tensor() {
    if (remaining_ == 0) throw ValidationError("model file has fewer tensors than expected");
    --remaining_;
    const auto rows = get_u64(in_), cols = get_u64(in_);
    if (rows > (1u << 30) || cols > (1u << 30) || rows * cols > (1ull << 32))
      throw ValidationError("model tensor shape too large");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = std::bit_cast<double>(get_u64(in_));
    return m;
  }

  Eigen::VectorXd vector() {
    Eigen::MatrixXd m = tensor();
    if (m.cols() != 1) throw ValidationError("expected a column tensor");
    return m.col(0);
  }

  double scalar() {
    Eigen::MatrixXd m = tensor();
    if (m.size() != 1) throw ValidationError("expected a scalar tensor");
    return m(0, 0);
  }

  void finish() const {
    if (remaining_ != 0) throw ValidationError("model file has unread tensors");
  }

 private:
  std::istream& in_;
  std::uint32_t remaining_ = 0;
};

inline void write_lstm(TensorWriter& w, const LstmParams& p) {
  w.tensor(p.W);
  w.tensor(p.U);
  w.tensor(p.b);
}

inline LstmParams read_lstm(TensorReader& r) {
  LstmParams p;
  p.W = r.tensor();
  p.U = r.tensor();
  p.b = r.vector();
  p.check();
  return p;
}

}  // namespace detail

inline void save_model(std::ostream& out, const SvmModel& m) {
  detail::TensorWriter w(out, "svm", 3);
  w.tensor(m.weights);
  w.scalar(m.bias);
  w.scalar(m.lambda);
}

inline void save_model(std::ostream& out, const MlpModel& m) {
  detail::TensorWriter w(out, "mlp", 4);
  w.tensor(m.w1);
  w.tensor(m.b1);
  w.tensor(m.w2);
  w.scalar(m.b2);
}

inline void save_model(std::ostream& out, const BiLstmModel& m) {
  detail::TensorWriter w(out, "bilstm", 16);
  w.tensor(m.embedding.rows);
  w.scalar(m.trainable ? 1.0 : 0.0);
  detail::write_lstm(w, m.l1_fwd);
  detail::write_lstm(w, m.l1_bwd);
  detail::write_lstm(w, m.l2_fwd);
  detail::write_lstm(w, m.l2_bwd);
  w.tensor(m.dense_w);
  w.scalar(m.dense_b);
}

inline SvmModel load_svm(std::istream& in) {
  detail::TensorReader r(in, "svm");
  SvmModel m;
  m.weights = r.vector();
  m.bias = r.scalar();
  m.lambda = r.scalar();
  r.finish();
  return m;
}

inline MlpModel load_mlp(std::istream& in) {
  detail::TensorReader r(in, "mlp");
  MlpModel m;
  m.w1 = r.tensor();
  m.b1 = r.vector();
  m.w2 = r.vector();
  m.b2 = r.scalar();
  r.finish();
  if (m.b1.size() != m.w1.rows() || m.w2.size() != m.w1.rows()) throw ValidationError("inconsistent MLP shapes");
  return m;
}

inline BiLstmModel load_bilstm(std::istream& in) {
  detail::TensorReader r(in, "bilstm");
  BiLstmModel m;
  m.embedding.rows = r.tensor();
  m.trainable = r.scalar() != 0.0;
  m.l1_fwd = detail::read_lstm(r);
  m.l1_bwd = detail::read_lstm(r);
  m.l2_fwd = detail::read_lstm(r);
  m.l2_bwd = detail::read_lstm(r);
  m.dense_w = r.vector();
  m.dense_b = r.scalar();
  r.finish();
  m.check();
  return m;
}

}  // namespace morbench
