#pragma once

#include "aop/error.hpp"
#include "aop/geometry.hpp"
#include "aop/raster.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aop::tta {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// Which parameter groups receive updates.
struct TrainableMask {
    bool gamma = true;
    bool beta = true;
    bool mix = true;

    bool operator==(const TrainableMask&) const = default;
};

/// Adaptation head: per-class affine (gamma, beta) followed by a 3x3 class-mixing
/// linear layer. z'_c = sum_k mix[c][k] * (gamma_k * z_k + beta_k).
struct AdaptParams {
    static constexpr std::size_t kScalarCount = 15;

    Vec3 gamma{1.0, 1.0, 1.0};
    Vec3 beta{0.0, 0.0, 0.0};
    Mat3 mix{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    TrainableMask trainable;

    bool operator==(const AdaptParams&) const = default;

    /// Flat order: gamma[0..2], beta[0..2], mix row-major.
    std::array<double, kScalarCount> flatten() const;
    void assign(const std::array<double, kScalarCount>& flat);
    bool is_trainable(std::size_t flat_index) const;
};

/// Gradient over all 15 head scalars; entries of frozen groups are zero.
using Gradient = std::array<double, AdaptParams::kScalarCount>;

struct TtaConfig {
    double lambda_ent = 1.0;
    double lambda_tv = 1.0;
    double lambda_aop = 1.0;
    double lr = 1e-4;
    int steps = 1;
    double epsilon = 1e-6;
    double fd_step = 1e-4;

    /// Throws InvalidInput on negative weights, non-positive lr/epsilon/fd_step or steps < 1.
    void validate() const;
};

/// One test-batch element.
struct Sample {
    LogitMap logits;
    ConfMap conf;
};

struct ImageMeasurement {
    std::optional<AopResult> aop;
    ErrorCode failure_code = ErrorCode::InvalidInput;  ///< meaningful only when !aop
    std::string failure_stage;
    std::string failure;
    double l_aop = 0.0;
};

struct LossComponents {
    double l_ent = 0.0;
    double l_tv = 0.0;
    double l_aop = 0.0;
    double l_tta = 0.0;
    std::vector<ImageMeasurement> images;

    /// Mean C_AoP / AoP over images that measured successfully.
    std::optional<double> mean_c_aop() const;
    std::optional<double> mean_aop_deg() const;
};

struct StepRecord {
    int step = 0;
    LossComponents losses;
};

struct TtaTrace {
    std::vector<StepRecord> records;
    AdaptParams before;
    AdaptParams after;
    /// Objective evaluated at `after`.
    LossComponents final_losses;
};

LogitMap apply_head(const LogitMap& logits, const AdaptParams& params);

/// Mean per-pixel entropy (natural log) over the batch population.
double entropy_loss(std::span<const ProbMap> probs);
/// Anisotropic total variation over anchors (i < H-1, j < W-1), divided by B*H*W.
double tv_loss(std::span<const ProbMap> probs);
/// -log(c_aop + epsilon).
double aop_conf_loss(double c_aop, double epsilon);

LossComponents total_loss(std::span<const Sample> batch, const AdaptParams& params,
                          const TtaConfig& config, const PixelSpacing& spacing = PixelSpacing{});

/// Analytic gradient of lambda_ent * L_ent + lambda_tv * L_tv.
Gradient grad_ent_tv(std::span<const Sample> batch, const AdaptParams& params,
                     const TtaConfig& config);

/// Central finite-difference gradient of lambda_aop * L_aop with step config.fd_step.
Gradient grad_aop_fd(std::span<const Sample> batch, const AdaptParams& params,
                     const TtaConfig& config, const PixelSpacing& spacing = PixelSpacing{});

/// config.steps plain gradient-descent steps on the trainable groups.
std::pair<AdaptParams, TtaTrace> adapt(std::span<const Sample> batch, const AdaptParams& params,
                                       const TtaConfig& config,
                                       const PixelSpacing& spacing = PixelSpacing{});

}  // namespace aop::tta
