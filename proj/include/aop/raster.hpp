#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace aop {

/// Class ids carried by a LabelMask.
enum Label : std::uint8_t { kBackground = 0, kPS = 1, kFH = 2 };

inline constexpr int kNumClasses = 3;

/// H x W class labels in row-major order; every value is 0, 1 or 2.
class LabelMask {
public:
    LabelMask() = default;
    LabelMask(int height, int width, std::vector<std::uint8_t> labels);
    /// All-background mask.
    LabelMask(int height, int width);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }

    std::uint8_t at(int row, int col) const { return labels_[index(row, col)]; }
    void set(int row, int col, std::uint8_t label);
    bool contains(int row, int col) const noexcept {
        return row >= 0 && col >= 0 && row < height_ && col < width_;
    }
    std::span<const std::uint8_t> labels() const noexcept { return labels_; }

    bool operator==(const LabelMask&) const = default;

private:
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> labels_;
};

/// Three-channel raster stored channel-major, then row-major.
class ClassRaster {
public:
    ClassRaster() = default;
    ClassRaster(int height, int width, std::vector<double> values);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t pixels() const noexcept {
        return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
    }

    double at(int channel, int row, int col) const { return values_[index(channel, row, col)]; }
    double& at(int channel, int row, int col) { return values_[index(channel, row, col)]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Pointer to channel plane `c` (length pixels()).
    const double* plane(int channel) const noexcept {
        return values_.data() + static_cast<std::size_t>(channel) * pixels();
    }
    double* plane(int channel) noexcept {
        return values_.data() + static_cast<std::size_t>(channel) * pixels();
    }

    bool operator==(const ClassRaster&) const = default;

protected:
    std::size_t index(int channel, int row, int col) const noexcept {
        return static_cast<std::size_t>(channel) * pixels() +
               static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<double> values_;
};

/// Raw class logits; all values finite.
class LogitMap : public ClassRaster {
public:
    LogitMap() = default;
    LogitMap(int height, int width, std::vector<double> values);
    /// All-zero logits.
    LogitMap(int height, int width);
};

/// Per-pixel class probabilities; channels sum to one.
class ProbMap : public ClassRaster {
public:
    using ClassRaster::ClassRaster;
};

/// Spatial confidence in (0,1). Values are clamped to [kConfMin, kConfMax].
class ConfMap {
public:
    static constexpr double kConfMin = 1e-6;
    static constexpr double kConfMax = 1.0 - 1e-6;

    ConfMap() = default;
    ConfMap(int height, int width, std::vector<double> values);
    ConfMap(int height, int width, double uniform_value);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    double at(int row, int col) const {
        return values_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(col)];
    }
    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const ConfMap&) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<double> values_;
};

struct PixelSpacing {
    double row_mm = 1.0;
    double col_mm = 1.0;

    PixelSpacing() = default;
    PixelSpacing(double row, double col);
    explicit PixelSpacing(double isotropic) : PixelSpacing(isotropic, isotropic) {}

    bool isotropic() const noexcept { return row_mm == col_mm; }
};

ProbMap softmax(const LogitMap& logits);

/// Per-pixel index of the largest logit; ties go to the lowest class id.
LabelMask argmax_labels(const LogitMap& logits);

// ---------------------------------------------------------------------------
// File formats. Readers throw Error(FormatError) with the offending byte offset.

std::vector<std::uint8_t> write_mask_pgm(const LabelMask& mask);
LabelMask read_mask_pgm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> write_f32r(const LogitMap& logits);
std::vector<std::uint8_t> write_f32r(const ConfMap& conf);

using F32RRaster = std::variant<LogitMap, ConfMap>;

/// One channel loads as ConfMap (clamped), three as LogitMap.
F32RRaster read_f32r(std::span<const std::uint8_t> bytes);
LogitMap read_logits_f32r(std::span<const std::uint8_t> bytes);
ConfMap read_conf_f32r(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file(const std::string& path, const std::string& text);

}  // namespace aop
