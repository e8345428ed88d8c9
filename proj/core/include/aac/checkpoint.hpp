#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "aac/net.hpp"

namespace aac {

// Little-endian binary stream with a magic/version header. Doubles are
// written raw, so round-trips are bit-exact.
class BinaryWriter {
 public:
  BinaryWriter(const std::string& path, const char magic[4], std::uint32_t version);
  void write_u32(std::uint32_t v);
  void write_i64(std::int64_t v);
  void write_f64(double v);
  void write_string(const std::string& s);
  void write_vector(const Vector& v);
  void write_matrix(const Matrix& m);
  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
};

class BinaryReader {
 public:
  BinaryReader(const std::string& path, const char magic[4], std::uint32_t version);
  std::uint32_t read_u32();
  std::int64_t read_i64();
  double read_f64();
  std::string read_string();
  Vector read_vector();
  Matrix read_matrix();

  // Header peek without version enforcement, for `inspect-checkpoint`.
  static std::pair<std::string, std::uint32_t> peek_header(const std::string& path);

 private:
  std::ifstream in_;
};

void write_net(BinaryWriter& w, const DenseNet& net);
DenseNet read_net(BinaryReader& r);
void write_adam(BinaryWriter& w, const AdamState& s);
AdamState read_adam(BinaryReader& r);
void write_scalar_adam(BinaryWriter& w, const ScalarAdam& s);
ScalarAdam read_scalar_adam(BinaryReader& r);

}  // namespace aac
