#include "edr/io.hpp"

#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "edr/error.hpp"
#include "edr/raster.hpp"

namespace edr::io {

namespace {

cv::Mat as_mat(const GrayImage& img) {
  return cv::Mat(img.height(), img.width(), CV_8UC1, const_cast<std::uint8_t*>(img.pixels().data()));
}

GrayImage from_mat(const cv::Mat& m) {
  CV_Assert(m.type() == CV_8UC1);
  GrayImage out(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const std::uint8_t* src = m.ptr<std::uint8_t>(y);
    std::copy(src, src + m.cols, out.row(y).begin());
  }
  return out;
}

RgbImage rgb_from_bgr(const cv::Mat& m) {
  RgbImage rgb{m.cols, m.rows, {}, {}, {}};
  const auto n = static_cast<std::size_t>(m.cols) * m.rows;
  rgb.r.resize(n);
  rgb.g.resize(n);
  rgb.b.resize(n);
  std::size_t i = 0;
  for (int y = 0; y < m.rows; ++y) {
    const cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x, ++i) {
      rgb.b[i] = row[x][0];
      rgb.g[i] = row[x][1];
      rgb.r[i] = row[x][2];
    }
  }
  return rgb;
}

const std::vector<int> kPngParams{cv::IMWRITE_PNG_COMPRESSION, 6};

}  // namespace

RgbImage read_rgb(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw IoError("cannot read image " + path.string());
  return rgb_from_bgr(m);
}

GrayImage read_gray(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty()) throw IoError("cannot read image " + path.string());
  if (m.depth() != CV_8U) throw IoError("only 8-bit images are supported: " + path.string());
  if (m.channels() == 1) return from_mat(m);
  cv::Mat bgr;
  if (m.channels() == 4) {
    cv::Mat channels[4];
    cv::split(m, channels);
    cv::merge(channels, 3, bgr);
  } else {
    bgr = m;
  }
  return to_grayscale(rgb_from_bgr(bgr));
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  cv::Mat m(img.height, img.width, CV_8UC3);
  std::size_t i = 0;
  for (int y = 0; y < img.height; ++y) {
    cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x, ++i) row[x] = cv::Vec3b(img.b[i], img.g[i], img.r[i]);
  }
  if (!cv::imwrite(path.string(), m, kPngParams)) throw IoError("cannot write " + path.string());
}

std::vector<unsigned char> encode_png(const GrayImage& img) {
  std::vector<unsigned char> bytes;
  if (!cv::imencode(".png", as_mat(img), bytes, kPngParams)) throw IoError("PNG encoding failed");
  return bytes;
}

GrayImage decode_image(const std::vector<unsigned char>& bytes) {
  cv::Mat m = cv::imdecode(bytes, cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw IoError("cannot decode image bytes");
  return from_mat(m);
}

GrayImage jpeg_roundtrip(const GrayImage& img, int quality) {
  if (quality < 1 || quality > 100) throw ConfigError("JPEG quality must lie in [1, 100]");
  std::vector<unsigned char> bytes;
  const std::vector<int> params{cv::IMWRITE_JPEG_QUALITY, quality, cv::IMWRITE_JPEG_PROGRESSIVE, 0,
                                cv::IMWRITE_JPEG_OPTIMIZE, 0};
  if (!cv::imencode(".jpg", as_mat(img), bytes, params)) throw IoError("JPEG encoding failed");
  return decode_image(bytes);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace edr::io
