#include "stylenorm/image_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stylenorm {

namespace {

[[noreturn]] void fail(const std::string& path, std::streampos pos,
                       const std::string& what) {
  throw std::runtime_error("PPM: " + what + " in " + path + " at byte " +
                           std::to_string(static_cast<long long>(pos)));
}

// skips whitespace and '#' comments between header tokens
void skipSeparators(std::istream& is) {
  for (;;) {
    int c = is.peek();
    if (c == '#') {
      while (c != '\n' && c != EOF) c = is.get();
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      is.get();
    } else {
      return;
    }
  }
}

int readHeaderInt(std::istream& is, const std::string& path,
                  const std::string& field) {
  skipSeparators(is);
  int v = 0;
  if (!(is >> v) || v <= 0) fail(path, is.tellg(), "invalid " + field);
  return v;
}

}  // namespace

TensorD loadImagePPM(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("PPM: cannot open " + path);
  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  if (m0 != 'P' || m1 != '6') fail(path, 0, "bad magic (want P6)");

  int w = readHeaderInt(is, path, "width");
  int h = readHeaderInt(is, path, "height");
  skipSeparators(is);
  int maxval = 0;
  if (!(is >> maxval)) fail(path, is.tellg(), "invalid maxval");
  if (maxval != 255) fail(path, is.tellg(), "unsupported maxval (want 255)");
  is.get();  // single whitespace byte before raster data

  std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 3);
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!is) fail(path, is.tellg(), "truncated raster data");

  TensorD t({1, 3, h, w});
  for (int64_t i = 0; i < h; ++i)
    for (int64_t j = 0; j < w; ++j)
      for (int ch = 0; ch < 3; ++ch)
        t.at4(0, ch, i, j) =
            static_cast<double>(buf[(i * w + j) * 3 + ch]) / 127.5 - 1.0;
  return t;
}

void saveImagePPM(const std::string& path, const TensorD& t) {
  checkArg(t.rank() == 4 && t.dim(0) == 1 && t.dim(1) == 3,
           "saveImagePPM: (1,3,H,W) tensor required");
  const int64_t h = t.dim(2), w = t.dim(3);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("PPM: cannot open for write " + path);
  os << "P6\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 3);
  for (int64_t i = 0; i < h; ++i)
    for (int64_t j = 0; j < w; ++j)
      for (int ch = 0; ch < 3; ++ch) {
        double v = (t.at4(0, ch, i, j) + 1.0) * 127.5;
        v = std::round(v);
        if (v < 0) v = 0;
        if (v > 255) v = 255;
        buf[(i * w + j) * 3 + ch] = static_cast<unsigned char>(v);
      }
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("PPM: write failed " + path);
}

}  // namespace stylenorm
