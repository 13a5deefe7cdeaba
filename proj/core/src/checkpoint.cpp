#include "plab/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace plab {
namespace {

constexpr char kMagic[4] = {'P', 'L', 'A', 'B'};

size_t dtype_size(Checkpoint::Dtype t) {
  switch (t) {
    case Checkpoint::F32: return 4;
    case Checkpoint::F64: return 8;
    case Checkpoint::I64: return 8;
    case Checkpoint::U64: return 8;
  }
  throw std::runtime_error("checkpoint: unknown dtype");
}

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is, const std::string& what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated while reading " + what);
  return v;
}

}  // namespace

size_t Checkpoint::Field::count() const {
  size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

void Checkpoint::add_f32(const std::string& name, const float* data,
                         std::vector<std::uint32_t> shape) {
  Field f;
  f.name = name;
  f.dtype = F32;
  f.shape = std::move(shape);
  f.raw.resize(f.count() * 4);
  std::memcpy(f.raw.data(), data, f.raw.size());
  fields.push_back(std::move(f));
}

void Checkpoint::add_f64(const std::string& name, const double* data,
                         std::vector<std::uint32_t> shape) {
  Field f;
  f.name = name;
  f.dtype = F64;
  f.shape = std::move(shape);
  f.raw.resize(f.count() * 8);
  std::memcpy(f.raw.data(), data, f.raw.size());
  fields.push_back(std::move(f));
}

void Checkpoint::add_i64(const std::string& name, long long v) {
  Field f;
  f.name = name;
  f.dtype = I64;
  f.shape = {1};
  f.raw.resize(8);
  std::memcpy(f.raw.data(), &v, 8);
  fields.push_back(std::move(f));
}

void Checkpoint::add_u64(const std::string& name, std::uint64_t v) {
  Field f;
  f.name = name;
  f.dtype = U64;
  f.shape = {1};
  f.raw.resize(8);
  std::memcpy(f.raw.data(), &v, 8);
  fields.push_back(std::move(f));
}

const Checkpoint::Field& Checkpoint::find(const std::string& name) const {
  for (const auto& f : fields)
    if (f.name == name) return f;
  throw std::runtime_error("checkpoint: missing field " + name);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& f : fields)
    if (f.name == name) return true;
  return false;
}

std::vector<float> Checkpoint::f32(const std::string& name) const {
  const Field& f = find(name);
  if (f.dtype != F32) throw std::runtime_error("checkpoint: dtype mismatch on " + name);
  std::vector<float> out(f.count());
  std::memcpy(out.data(), f.raw.data(), f.raw.size());
  return out;
}

std::vector<double> Checkpoint::f64(const std::string& name) const {
  const Field& f = find(name);
  if (f.dtype != F64) throw std::runtime_error("checkpoint: dtype mismatch on " + name);
  std::vector<double> out(f.count());
  std::memcpy(out.data(), f.raw.data(), f.raw.size());
  return out;
}

long long Checkpoint::i64(const std::string& name) const {
  const Field& f = find(name);
  if (f.dtype != I64) throw std::runtime_error("checkpoint: dtype mismatch on " + name);
  long long v;
  std::memcpy(&v, f.raw.data(), 8);
  return v;
}

std::uint64_t Checkpoint::u64(const std::string& name) const {
  const Field& f = find(name);
  if (f.dtype != U64) throw std::runtime_error("checkpoint: dtype mismatch on " + name);
  std::uint64_t v;
  std::memcpy(&v, f.raw.data(), 8);
  return v;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, 4);
  write_pod(os, ckpt.version);
  write_pod(os, ckpt.config_digest);
  write_pod(os, static_cast<std::uint32_t>(ckpt.fields.size()));
  for (const auto& f : ckpt.fields) {
    write_pod(os, static_cast<std::uint32_t>(f.name.size()));
    os.write(f.name.data(), static_cast<std::streamsize>(f.name.size()));
    write_pod(os, static_cast<std::uint8_t>(f.dtype));
    write_pod(os, static_cast<std::uint32_t>(f.shape.size()));
    for (auto s : f.shape) write_pod(os, s);
    write_pod(os, static_cast<std::uint64_t>(f.raw.size()));
    os.write(reinterpret_cast<const char*>(f.raw.data()),
             static_cast<std::streamsize>(f.raw.size()));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic bytes in " + path);
  Checkpoint ckpt;
  ckpt.version = read_pod<std::uint32_t>(is, "version");
  if (ckpt.version != Checkpoint::kVersion)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(ckpt.version));
  ckpt.config_digest = read_pod<std::uint64_t>(is, "config digest");
  std::uint32_t nfields = read_pod<std::uint32_t>(is, "field count");
  ckpt.fields.resize(nfields);
  for (auto& f : ckpt.fields) {
    std::uint32_t name_len = read_pod<std::uint32_t>(is, "field name length");
    f.name.resize(name_len);
    is.read(f.name.data(), name_len);
    if (!is) throw std::runtime_error("checkpoint: truncated field name");
    f.dtype = static_cast<Checkpoint::Dtype>(read_pod<std::uint8_t>(is, f.name));
    std::uint32_t ndim = read_pod<std::uint32_t>(is, f.name + " rank");
    f.shape.resize(ndim);
    for (auto& s : f.shape) s = read_pod<std::uint32_t>(is, f.name + " shape");
    std::uint64_t bytes = read_pod<std::uint64_t>(is, f.name + " size");
    if (bytes != f.count() * dtype_size(f.dtype))
      throw std::runtime_error("checkpoint: size/shape mismatch on field " + f.name);
    f.raw.resize(bytes);
    is.read(reinterpret_cast<char*>(f.raw.data()), static_cast<std::streamsize>(bytes));
    if (!is) throw std::runtime_error("checkpoint: truncated data in field " + f.name);
  }
  return ckpt;
}

}  // namespace plab
