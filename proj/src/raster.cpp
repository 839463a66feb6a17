#include "aop/raster.hpp"

#include "aop/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace aop {

namespace {

void check_extent(int height, int width, std::size_t length, std::size_t channels,
                  const char* what) {
    if (height < 1 || width < 1) {
        throw Error(ErrorCode::InvalidInput, std::string(what) + ": extent must be at least 1x1");
    }
    const std::size_t expected =
        channels * static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    if (length != expected) {
        std::ostringstream os;
        os << what << ": expected " << expected << " values, got " << length;
        throw Error(ErrorCode::InvalidInput, os.str());
    }
}

[[noreturn]] void format_error(std::size_t offset, const std::string& message) {
    std::ostringstream os;
    os << message << " (byte offset " << offset << ")";
    throw Error(ErrorCode::FormatError, os.str());
}

// Cursor over a netpbm-style ASCII header.
class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const noexcept { return pos_; }

    void skip_whitespace_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_uint(const char* field) {
        skip_whitespace_and_comments();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > (1L << 30)) format_error(start, std::string(field) + " too large");
            ++pos_;
        }
        if (pos_ == start) format_error(start, std::string("expected ") + field);
        return value;
    }

    void expect_single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            format_error(pos_, "expected whitespace after header");
        }
        ++pos_;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void append(std::vector<std::uint8_t>& out, const std::string& text) {
    out.insert(out.end(), text.begin(), text.end());
}

void append_f32(std::vector<std::uint8_t>& out, double value) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::uint8_t>((bits >> shift) & 0xFFu));
    }
}

float read_f32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) {
        bits |= static_cast<std::uint32_t>(bytes[offset + k]) << (8 * k);
    }
    return std::bit_cast<float>(bits);
}

std::vector<std::uint8_t> f32r_bytes(int channels, int height, int width,
                                     std::span<const double> values) {
    std::vector<std::uint8_t> out;
    std::ostringstream header;
    header << "F32R " << channels << ' ' << height << ' ' << width << '\n';
    append(out, header.str());
    out.reserve(out.size() + 4 * values.size());
    for (double v : values) append_f32(out, v);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

LabelMask::LabelMask(int height, int width, std::vector<std::uint8_t> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
    check_extent(height, width, labels_.size(), 1, "LabelMask");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] > kFH) {
            throw Error(ErrorCode::InvalidInput,
                        "LabelMask: label " + std::to_string(labels_[i]) + " at index " +
                            std::to_string(i) + " is not a class id");
        }
    }
}

LabelMask::LabelMask(int height, int width)
    : LabelMask(height, width,
                std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(height, 0)) *
                                              static_cast<std::size_t>(std::max(width, 0)),
                                          kBackground)) {}

void LabelMask::set(int row, int col, std::uint8_t label) {
    if (label > kFH) throw Error(ErrorCode::InvalidInput, "LabelMask: label out of range");
    labels_[index(row, col)] = label;
}

ClassRaster::ClassRaster(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    check_extent(height, width, values_.size(), kNumClasses, "ClassRaster");
}

LogitMap::LogitMap(int height, int width, std::vector<double> values)
    : ClassRaster(height, width, std::move(values)) {
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "LogitMap: non-finite logit");
    }
}

LogitMap::LogitMap(int height, int width)
    : LogitMap(height, width,
               std::vector<double>(kNumClasses * static_cast<std::size_t>(std::max(height, 0)) *
                                       static_cast<std::size_t>(std::max(width, 0)),
                                   0.0)) {}

ConfMap::ConfMap(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    check_extent(height, width, values_.size(), 1, "ConfMap");
    for (double& v : values_) {
        if (std::isnan(v)) throw Error(ErrorCode::InvalidInput, "ConfMap: NaN confidence");
        v = std::clamp(v, kConfMin, kConfMax);
    }
}

ConfMap::ConfMap(int height, int width, double uniform_value)
    : ConfMap(height, width,
              std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                      static_cast<std::size_t>(std::max(width, 0)),
                                  uniform_value)) {}

PixelSpacing::PixelSpacing(double row, double col) : row_mm(row), col_mm(col) {
    if (!(row > 0.0) || !(col > 0.0) || !std::isfinite(row) || !std::isfinite(col)) {
        throw Error(ErrorCode::InvalidInput, "PixelSpacing: spacing must be positive");
    }
}

// ---------------------------------------------------------------------------

ProbMap softmax(const LogitMap& logits) {
    const std::size_t n = logits.pixels();
    std::vector<double> out(kNumClasses * n);
    const double* z0 = logits.plane(0);
    const double* z1 = logits.plane(1);
    const double* z2 = logits.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(z0[i]) || !std::isfinite(z1[i]) || !std::isfinite(z2[i])) {
            throw Error(ErrorCode::InvalidInput, "softmax: non-finite logit");
        }
        const double m = std::max({z0[i], z1[i], z2[i]});
        const double e0 = std::exp(z0[i] - m);
        const double e1 = std::exp(z1[i] - m);
        const double e2 = std::exp(z2[i] - m);
        const double s = e0 + e1 + e2;
        out[i] = e0 / s;
        out[n + i] = e1 / s;
        out[2 * n + i] = e2 / s;
    }
    return ProbMap(logits.height(), logits.width(), std::move(out));
}

LabelMask argmax_labels(const LogitMap& logits) {
    const std::size_t n = logits.pixels();
    std::vector<std::uint8_t> labels(n);
    const double* z0 = logits.plane(0);
    const double* z1 = logits.plane(1);
    const double* z2 = logits.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t best = kBackground;
        double best_value = z0[i];
        if (z1[i] > best_value) {
            best = kPS;
            best_value = z1[i];
        }
        if (z2[i] > best_value) best = kFH;
        labels[i] = best;
    }
    return LabelMask(logits.height(), logits.width(), std::move(labels));
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> write_mask_pgm(const LabelMask& mask) {
    std::vector<std::uint8_t> out;
    std::ostringstream header;
    header << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
    append(out, header.str());
    out.insert(out.end(), mask.labels().begin(), mask.labels().end());
    return out;
}

LabelMask read_mask_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 3 || bytes[0] != 'P' || bytes[1] != '5' || !std::isspace(bytes[2])) {
        format_error(0, "PGM: expected magic P5");
    }
    std::size_t pos = 2;
    HeaderReader body(bytes.subspan(pos));
    const long width = body.read_uint("width");
    const long height = body.read_uint("height");
    const std::size_t maxval_offset = pos + body.offset();
    const long maxval = body.read_uint("maxval");
    if (maxval != 255) format_error(maxval_offset, "PGM: maxval must be 255");
    body.expect_single_whitespace();
    pos += body.offset();
    if (width < 1 || height < 1) format_error(pos, "PGM: empty extent");

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - pos < count) format_error(bytes.size(), "PGM: truncated payload");
    if (bytes.size() - pos > count) format_error(pos + count, "PGM: trailing bytes after payload");

    std::vector<std::uint8_t> labels(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
    for (std::size_t i = 0; i < count; ++i) {
        if (labels[i] > kFH) {
            format_error(pos + i, "PGM: pixel value " + std::to_string(labels[i]) +
                                      " is not a class id");
        }
    }
    return LabelMask(static_cast<int>(height), static_cast<int>(width), std::move(labels));
}

std::vector<std::uint8_t> write_f32r(const LogitMap& logits) {
    return f32r_bytes(kNumClasses, logits.height(), logits.width(), logits.values());
}

std::vector<std::uint8_t> write_f32r(const ConfMap& conf) {
    return f32r_bytes(1, conf.height(), conf.width(), conf.values());
}

F32RRaster read_f32r(std::span<const std::uint8_t> bytes) {
    static constexpr char kMagic[] = "F32R ";
    if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 5) != 0) {
        format_error(0, "F32R: expected magic \"F32R \"");
    }
    // Header is strictly "F32R <C> <H> <W>\n": single spaces, no comments.
    std::size_t pos = 5;
    auto read_field = [&](const char* field, char terminator) {
        const std::size_t start = pos;
        long value = 0;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            value = value * 10 + (bytes[pos] - '0');
            if (value > (1L << 30)) format_error(start, std::string("F32R: ") + field + " too large");
            ++pos;
        }
        if (pos == start) format_error(start, std::string("F32R: expected ") + field);
        if (pos >= bytes.size() || bytes[pos] != static_cast<std::uint8_t>(terminator)) {
            format_error(pos, std::string("F32R: malformed header after ") + field);
        }
        ++pos;
        return value;
    };
    const long channels = read_field("channels", ' ');
    const long height = read_field("height", ' ');
    const long width = read_field("width", '\n');
    if (channels != 1 && channels != kNumClasses) {
        format_error(5, "F32R: channel count must be 1 or 3");
    }
    if (height < 1 || width < 1) format_error(pos, "F32R: empty extent");

    const std::size_t count = static_cast<std::size_t>(channels) *
                              static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    if (bytes.size() - pos != 4 * count) {
        format_error(pos, "F32R: payload length " + std::to_string(bytes.size() - pos) +
                              " bytes, expected " + std::to_string(4 * count));
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        const float v = read_f32(bytes, pos + 4 * i);
        if (!std::isfinite(v)) format_error(pos + 4 * i, "F32R: non-finite value");
        values[i] = static_cast<double>(v);
    }
    if (channels == 1) {
        return ConfMap(static_cast<int>(height), static_cast<int>(width), std::move(values));
    }
    return LogitMap(static_cast<int>(height), static_cast<int>(width), std::move(values));
}

LogitMap read_logits_f32r(std::span<const std::uint8_t> bytes) {
    auto raster = read_f32r(bytes);
    if (auto* logits = std::get_if<LogitMap>(&raster)) return std::move(*logits);
    format_error(5, "F32R: expected 3 channels (logits)");
}

ConfMap read_conf_f32r(std::span<const std::uint8_t> bytes) {
    auto raster = read_f32r(bytes);
    if (auto* conf = std::get_if<ConfMap>(&raster)) return std::move(*conf);
    format_error(5, "F32R: expected 1 channel (confidence)");
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path);
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
}

void write_file(const std::string& path, const std::string& text) {
    write_file(path, std::span<const std::uint8_t>(
                         reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace aop
