#include <algorithm>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "recallkit/corpus.hpp"
#include "recallkit/error.hpp"
#include "recallkit/text.hpp"

namespace recallkit {

PixelBuffer PixelBuffer::filled(int height, int width, float r, float g, float b) {
  PixelBuffer p;
  p.height = height;
  p.width = width;
  p.data.resize(static_cast<std::size_t>(height) * width * 3);
  for (std::size_t i = 0; i < p.data.size(); i += 3) {
    p.data[i] = r;
    p.data[i + 1] = g;
    p.data[i + 2] = b;
  }
  return p;
}

namespace {

bool is_jpeg(const std::string& bytes) {
  return bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
         static_cast<unsigned char>(bytes[1]) == 0xD8 && static_cast<unsigned char>(bytes[2]) == 0xFF;
}

// libjpeg pads a truncated stream with grey instead of failing, so require an EOI marker.
bool jpeg_has_end_marker(const std::string& bytes) {
  const std::size_t tail = std::min<std::size_t>(bytes.size(), 4096);
  for (std::size_t i = bytes.size() - tail; i + 1 < bytes.size(); ++i) {
    if (static_cast<unsigned char>(bytes[i]) == 0xFF &&
        static_cast<unsigned char>(bytes[i + 1]) == 0xD9) {
      return true;
    }
  }
  return false;
}

}  // namespace

PixelBuffer decode_image(const std::filesystem::path& path) {
  const std::string bytes = text::read_file(path);
  if (is_jpeg(bytes) && !jpeg_has_end_marker(bytes)) {
    throw IoError("truncated JPEG: " + path.string());
  }
  const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
                    const_cast<char*>(bytes.data()));
  cv::Mat bgr;
  try {
    bgr = cv::imdecode(raw, cv::IMREAD_COLOR | cv::IMREAD_IGNORE_ORIENTATION);
  } catch (const cv::Exception& e) {
    throw IoError("cannot decode " + path.string() + ": " + e.what());
  }
  if (bgr.empty() || bgr.rows <= 0 || bgr.cols <= 0) {
    throw IoError("cannot decode " + path.string());
  }
  PixelBuffer out;
  out.height = bgr.rows;
  out.width = bgr.cols;
  out.data.resize(static_cast<std::size_t>(out.height) * out.width * 3);
  for (int r = 0; r < bgr.rows; ++r) {
    const auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c) {
      out.at(r, c, 0) = static_cast<float>(row[c][2]) / 255.0f;
      out.at(r, c, 1) = static_cast<float>(row[c][1]) / 255.0f;
      out.at(r, c, 2) = static_cast<float>(row[c][0]) / 255.0f;
    }
  }
  return out;
}

PixelBuffer load_pixels(const ImageRecord& record) {
  try {
    return decode_image(record.pixel_source);
  } catch (const IoError& e) {
    throw IoError("image " + record.image_id + ": " + e.what());
  }
}

void write_png(const PixelBuffer& pixels, const std::filesystem::path& path) {
  cv::Mat bgr(pixels.height, pixels.width, CV_8UC3);
  for (int r = 0; r < pixels.height; ++r) {
    auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < pixels.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const float v = std::clamp(pixels.at(r, c, ch), 0.0f, 1.0f);
        row[c][2 - ch] = static_cast<unsigned char>(v * 255.0f + 0.5f);
      }
    }
  }
  std::vector<unsigned char> encoded;
  if (!cv::imencode(".png", bgr, encoded)) throw IoError("PNG encode failed for " + path.string());
  text::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(encoded.data()),
                                                 encoded.size()));
}

}  // namespace recallkit
