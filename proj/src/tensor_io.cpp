#include "stylenorm/tensor_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace stylenorm {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'N', 'S'};
constexpr uint8_t kVersion = 1;

template <typename T>
constexpr uint8_t dtypeByte() {
  return std::is_same_v<T, float> ? 0 : 1;
}

void writeU32le(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t readU32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("ATNS: truncated dims");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

template <typename T>
void saveImpl(const std::string& path, const Tensor<T>& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ATNS: cannot open for write: " + path);
  os.write(kMagic, 4);
  os.put(static_cast<char>(kVersion));
  os.put(static_cast<char>(dtypeByte<T>()));
  os.put(static_cast<char>(t.rank()));
  for (int i = 0; i < t.rank(); ++i)
    writeU32le(os, static_cast<uint32_t>(t.dim(i)));
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  // little-endian host assumed; scalars written verbatim
  os.write(reinterpret_cast<const char*>(t.data()),
           static_cast<std::streamsize>(sizeof(T) * t.numel()));
  if (!os) throw std::runtime_error("ATNS: write failed: " + path);
}

struct Header {
  uint8_t dtype;
  std::vector<int64_t> shape;
};

Header readHeader(std::istream& is, const std::string& path) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("ATNS: bad magic in " + path);
  int version = is.get();
  if (version != kVersion)
    throw std::runtime_error("ATNS: unsupported version in " + path);
  int dtype = is.get();
  if (dtype != 0 && dtype != 1)
    throw std::runtime_error("ATNS: unknown dtype in " + path);
  int rank = is.get();
  if (rank < 0 || rank > 16)
    throw std::runtime_error("ATNS: implausible rank in " + path);
  Header h;
  h.dtype = static_cast<uint8_t>(dtype);
  for (int i = 0; i < rank; ++i)
    h.shape.push_back(static_cast<int64_t>(readU32le(is)));
  return h;
}

}  // namespace

void saveAtns(const std::string& path, const Tensor<float>& t) {
  saveImpl(path, t);
}
void saveAtns(const std::string& path, const Tensor<double>& t) {
  saveImpl(path, t);
}

int peekAtnsDtype(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ATNS: cannot open " + path);
  return readHeader(is, path).dtype;
}

template <std::floating_point T>
Tensor<T> loadAtns(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ATNS: cannot open " + path);
  Header h = readHeader(is, path);
  if (h.dtype != dtypeByte<T>())
    throw std::runtime_error("ATNS: dtype mismatch in " + path);
  int64_t n = 1;
  for (int64_t d : h.shape) n *= d;
  std::vector<T> data(static_cast<size_t>(n));
  is.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(sizeof(T) * n));
  if (!is) throw std::runtime_error("ATNS: truncated data in " + path);
  return Tensor<T>(std::move(h.shape), std::move(data));
}

template Tensor<float> loadAtns<float>(const std::string&);
template Tensor<double> loadAtns<double>(const std::string&);

}  // namespace stylenorm
