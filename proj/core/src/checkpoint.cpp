#include "aac/checkpoint.hpp"

#include <cstring>
#include <stdexcept>

namespace aac {

BinaryWriter::BinaryWriter(const std::string& path, const char magic[4],
                           std::uint32_t version)
    : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  out_.write(magic, 4);
  write_u32(version);
}

void BinaryWriter::write_u32(std::uint32_t v) {
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void BinaryWriter::write_i64(std::int64_t v) {
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void BinaryWriter::write_f64(double v) {
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void BinaryWriter::write_string(const std::string& s) {
  write_u32(static_cast<std::uint32_t>(s.size()));
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void BinaryWriter::write_vector(const Vector& v) {
  write_i64(v.size());
  out_.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}
void BinaryWriter::write_matrix(const Matrix& m) {
  write_i64(m.rows());
  write_i64(m.cols());
  out_.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
}

BinaryReader::BinaryReader(const std::string& path, const char magic[4],
                           std::uint32_t version)
    : in_(path, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot open for reading: " + path);
  char got[4];
  in_.read(got, 4);
  if (std::memcmp(got, magic, 4) != 0) {
    throw std::runtime_error("bad magic in " + path);
  }
  const std::uint32_t got_version = read_u32();
  if (got_version != version) {
    throw std::runtime_error("unsupported version " + std::to_string(got_version) +
                             " in " + path);
  }
}

std::uint32_t BinaryReader::read_u32() {
  std::uint32_t v;
  in_.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in_) throw std::runtime_error("truncated checkpoint");
  return v;
}
std::int64_t BinaryReader::read_i64() {
  std::int64_t v;
  in_.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in_) throw std::runtime_error("truncated checkpoint");
  return v;
}
double BinaryReader::read_f64() {
  double v;
  in_.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in_) throw std::runtime_error("truncated checkpoint");
  return v;
}
std::string BinaryReader::read_string() {
  const auto n = read_u32();
  std::string s(n, '\0');
  in_.read(s.data(), n);
  if (!in_) throw std::runtime_error("truncated checkpoint");
  return s;
}
Vector BinaryReader::read_vector() {
  const auto n = read_i64();
  Vector v(n);
  in_.read(reinterpret_cast<char*>(v.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
  if (!in_) throw std::runtime_error("truncated checkpoint");
  return v;
}
Matrix BinaryReader::read_matrix() {
  const auto rows = read_i64();
  const auto cols = read_i64();
  Matrix m(rows, cols);
  in_.read(reinterpret_cast<char*>(m.data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in_) throw std::runtime_error("truncated checkpoint");
  return m;
}

std::pair<std::string, std::uint32_t> BinaryReader::peek_header(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  char magic[4];
  std::uint32_t version;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in) throw std::runtime_error("truncated checkpoint header");
  return {std::string(magic, 4), version};
}

void write_net(BinaryWriter& w, const DenseNet& net) {
  w.write_i64(static_cast<std::int64_t>(net.sizes().size()));
  for (int s : net.sizes()) w.write_i64(s);
  for (int l = 0; l < net.num_layers(); ++l) {
    w.write_matrix(net.weights()[l]);
    w.write_vector(net.biases()[l]);
  }
}

DenseNet read_net(BinaryReader& r) {
  const auto n = r.read_i64();
  std::vector<int> sizes(n);
  for (auto& s : sizes) s = static_cast<int>(r.read_i64());
  Rng scratch(0);
  DenseNet net(sizes, scratch);
  for (int l = 0; l < net.num_layers(); ++l) {
    net.weights()[l] = r.read_matrix();
    net.biases()[l] = r.read_vector();
  }
  return net;
}

void write_adam(BinaryWriter& w, const AdamState& s) {
  w.write_f64(s.lr);
  w.write_i64(s.step);
  w.write_i64(static_cast<std::int64_t>(s.mw.size()));
  for (std::size_t l = 0; l < s.mw.size(); ++l) {
    w.write_matrix(s.mw[l]);
    w.write_matrix(s.vw[l]);
    w.write_vector(s.mb[l]);
    w.write_vector(s.vb[l]);
  }
}

AdamState read_adam(BinaryReader& r) {
  AdamState s;
  s.lr = r.read_f64();
  s.step = r.read_i64();
  const auto layers = r.read_i64();
  for (std::int64_t l = 0; l < layers; ++l) {
    s.mw.push_back(r.read_matrix());
    s.vw.push_back(r.read_matrix());
    s.mb.push_back(r.read_vector());
    s.vb.push_back(r.read_vector());
  }
  return s;
}

void write_scalar_adam(BinaryWriter& w, const ScalarAdam& s) {
  w.write_f64(s.lr);
  w.write_i64(s.step);
  w.write_f64(s.m);
  w.write_f64(s.v);
}

ScalarAdam read_scalar_adam(BinaryReader& r) {
  ScalarAdam s;
  s.lr = r.read_f64();
  s.step = r.read_i64();
  s.m = r.read_f64();
  s.v = r.read_f64();
  return s;
}

}  // namespace aac
