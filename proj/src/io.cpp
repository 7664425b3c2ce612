#include "branchdepth/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace branchdepth {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// Netpbm header tokens, skipping whitespace and '#' comments.
class HeaderReader {
 public:
  HeaderReader(const std::string& data, const std::filesystem::path& path)
      : data_(data), path_(path) {}

  std::string token() {
    skip_space();
    std::string t;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      t.push_back(data_[pos_++]);
    }
    if (t.empty()) throw IoError("truncated header in '" + path_.string() + "'");
    return t;
  }

  long number() {
    const std::string t = token();
    try {
      std::size_t used = 0;
      const long v = std::stol(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw IoError("bad header field '" + t + "' in '" + path_.string() + "'");
    }
  }

  /// Consumes the single whitespace byte that ends a header.
  std::size_t payload_start() {
    if (pos_ >= data_.size()) throw IoError("missing pixel data in '" + path_.string() + "'");
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < data_.size()) {
      const char c = data_[pos_];
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& data_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};


}  // namespace

GrayImage read_image(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  HeaderReader header(data, path);
  const std::string magic = header.token();
  if (magic != "P5" && magic != "P6") {
    throw IoError("'" + path.string() + "' is not a binary PGM/PPM (magic " + magic + ")");
  }
  const long width = header.number();
  const long height = header.number();
  const long maxval = header.number();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw IoError("invalid image header in '" + path.string() + "'");
  }
  const std::size_t start = header.payload_start();
  const int channels = magic == "P6" ? 3 : 1;
  const int bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t needed = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                             static_cast<std::size_t>(channels * bytes_per_sample);
  if (data.size() < start + needed) throw IoError("truncated pixel data in '" + path.string() + "'");

  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data() + start);
  auto sample = [&](std::size_t i) -> double {
    double v = bytes_per_sample == 1 ? bytes[i] : (bytes[2 * i] << 8 | bytes[2 * i + 1]);
    return maxval == 255 ? v : v * 255.0 / static_cast<double>(maxval);
  };
  GrayImage img(static_cast<int>(width), static_cast<int>(height));
  std::size_t i = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (channels == 1) {
        img(x, y) = sample(i++);
      } else {
        const double r = sample(i++);
        const double g = sample(i++);
        const double b = sample(i++);
        img(x, y) = std::round(0.299 * r + 0.587 * g + 0.114 * b);
      }
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  out.reserve(out.size() + image.size());
  for (double v : image.pixels()) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(std::round(v), 0.0, 255.0))));
  }
  write_file(path, out);
}

void write_pgm(const std::filesystem::path& path, const Mask& mask) {
  GrayImage img(mask.width(), mask.height());
  auto src = mask.pixels();
  auto dst = img.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255.0 : 0.0;
  write_pgm(path, img);
}

Mask read_mask(const std::filesystem::path& path) {
  const GrayImage img = read_image(path);
  Mask mask(img.width(), img.height());
  auto src = img.pixels();
  auto dst = mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] != 0.0 ? 1 : 0;
  return mask;
}

void write_pfm(const std::filesystem::path& path, const DisparityMap& map) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  const bool little = std::endian::native == std::endian::little;
  std::string out = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n" +
                    (little ? "-1.0" : "1.0") + "\n";
  const std::size_t header = out.size();
  out.resize(header + map.size() * sizeof(float));
  char* dst = out.data() + header;
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      const double d = map(x, y);
      const float f = is_valid_disparity(d) ? static_cast<float>(d) : std::numeric_limits<float>::infinity();
      std::memcpy(dst, &f, sizeof(float));
      dst += sizeof(float);
    }
  }
  write_file(path, out);
}

DisparityMap read_pfm(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  HeaderReader header(data, path);
  const std::string magic = header.token();
  if (magic != "Pf") throw IoError("'" + path.string() + "' is not a greyscale PFM");
  const long width = header.number();
  const long height = header.number();
  const std::string scale_token = header.token();
  double scale = 0.0;
  try {
    scale = std::stod(scale_token);
  } catch (const std::exception&) {
    throw IoError("bad PFM scale '" + scale_token + "' in '" + path.string() + "'");
  }
  if (width <= 0 || height <= 0 || scale == 0.0) throw IoError("invalid PFM header in '" + path.string() + "'");
  const std::size_t start = header.payload_start();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (data.size() < start + count * sizeof(float)) {
    throw IoError("truncated PFM data in '" + path.string() + "'");
  }
  const bool file_little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;
  DisparityMap map(static_cast<int>(width), static_cast<int>(height));
  const char* src = data.data() + start;
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, src, sizeof(bits));
      src += sizeof(bits);
      if (file_little != host_little) bits = __builtin_bswap32(bits);
      const float f = std::bit_cast<float>(bits);
      map(x, y) = std::isfinite(f) ? static_cast<double>(f) : kInvalidDisparity;
    }
  }
  return map;
}

GrayImage disparity_preview(const DisparityMap& map) {
  double max_d = 0.0;
  for (double d : map.pixels()) {
    if (is_valid_disparity(d)) max_d = std::max(max_d, d);
  }
  GrayImage img(map.width(), map.height(), 0.0);
  auto src = map.pixels();
  auto dst = img.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (is_valid_disparity(src[i]) && max_d > 0.0) dst[i] = std::max(0.0, src[i]) * 255.0 / max_d;
  }
  return img;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("cannot parse JSON '" + path.string() + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file(path, j.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) { write_file(path, text); }

}  // namespace branchdepth
