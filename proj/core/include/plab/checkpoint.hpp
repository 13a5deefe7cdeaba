#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace plab {

// Versioned little-endian container: magic "PLAB", version u32, config digest
// u64, then a length-prefixed field table of named typed tensors.
struct Checkpoint {
  enum Dtype : std::uint8_t { F32 = 0, F64 = 1, I64 = 2, U64 = 3 };
  static constexpr std::uint32_t kVersion = 1;

  struct Field {
    std::string name;
    Dtype dtype = F64;
    std::vector<std::uint32_t> shape;
    std::vector<std::uint8_t> raw;

    size_t count() const;
  };

  std::uint32_t version = kVersion;
  std::uint64_t config_digest = 0;
  std::vector<Field> fields;

  void add_f32(const std::string& name, const float* data, std::vector<std::uint32_t> shape);
  void add_f64(const std::string& name, const double* data, std::vector<std::uint32_t> shape);
  void add_i64(const std::string& name, long long v);
  void add_u64(const std::string& name, std::uint64_t v);

  const Field& find(const std::string& name) const;  // throws naming the field
  bool has(const std::string& name) const;
  std::vector<float> f32(const std::string& name) const;
  std::vector<double> f64(const std::string& name) const;
  long long i64(const std::string& name) const;
  std::uint64_t u64(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
// Throws std::runtime_error naming the offending field on bad magic, version
// mismatch, or truncation.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace plab
