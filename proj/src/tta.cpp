#include "aop/tta.hpp"

#include "aop/error.hpp"

#include <cmath>

namespace aop::tta {

namespace {

void check_batch(std::span<const Sample> batch) {
    if (batch.empty()) throw Error(ErrorCode::InvalidInput, "empty test batch");
    for (const Sample& s : batch) {
        if (s.logits.height() != batch.front().logits.height() ||
            s.logits.width() != batch.front().logits.width()) {
            throw Error(ErrorCode::InvalidInput, "batch members must share one extent");
        }
        if (s.conf.height() != s.logits.height() || s.conf.width() != s.logits.width()) {
            throw Error(ErrorCode::InvalidInput, "confidence map extent differs from logits");
        }
    }
}

void check_shared_extent(std::span<const ProbMap> probs) {
    if (probs.empty()) throw Error(ErrorCode::InvalidInput, "empty probability batch");
    for (const ProbMap& p : probs) {
        if (p.height() != probs.front().height() || p.width() != probs.front().width()) {
            throw Error(ErrorCode::InvalidInput, "probability maps must share one extent");
        }
    }
}

double population(std::span<const ProbMap> probs) {
    return static_cast<double>(probs.size()) * static_cast<double>(probs.front().pixels());
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

ImageMeasurement measure(const LogitMap& adapted, const ConfMap& conf, double epsilon,
                         const PixelSpacing& spacing) {
    ImageMeasurement m;
    try {
        m.aop = compute_aop(argmax_labels(adapted), conf, spacing);
        m.l_aop = aop_conf_loss(m.aop->c_aop, epsilon);
    } catch (const Error& e) {
        if (!is_geometric(e.code()) && e.code() != ErrorCode::InvalidInput) throw;
        m.failure_code = e.code();
        m.failure_stage = e.stage().empty() ? "compute_aop" : e.stage();
        m.failure = e.what();
        m.l_aop = -std::log(epsilon);
    }
    return m;
}

// Mean aop_conf_loss over the batch; nullopt if any image fails to measure.
std::optional<double> aop_term(std::span<const Sample> batch, const AdaptParams& params,
                               double epsilon, const PixelSpacing& spacing) {
    double sum = 0.0;
    for (const Sample& s : batch) {
        const ImageMeasurement m = measure(apply_head(s.logits, params), s.conf, epsilon, spacing);
        if (!m.aop) return std::nullopt;
        sum += m.l_aop;
    }
    return sum / static_cast<double>(batch.size());
}

}  // namespace

std::array<double, AdaptParams::kScalarCount> AdaptParams::flatten() const {
    std::array<double, kScalarCount> flat{};
    for (int k = 0; k < 3; ++k) {
        flat[k] = gamma[k];
        flat[3 + k] = beta[k];
        for (int j = 0; j < 3; ++j) flat[6 + 3 * k + j] = mix[k][j];
    }
    return flat;
}

void AdaptParams::assign(const std::array<double, kScalarCount>& flat) {
    for (int k = 0; k < 3; ++k) {
        gamma[k] = flat[k];
        beta[k] = flat[3 + k];
        for (int j = 0; j < 3; ++j) mix[k][j] = flat[6 + 3 * k + j];
    }
}

bool AdaptParams::is_trainable(std::size_t flat_index) const {
    if (flat_index < 3) return trainable.gamma;
    if (flat_index < 6) return trainable.beta;
    return trainable.mix;
}

void TtaConfig::validate() const {
    auto nonneg = [](double v) { return v >= 0.0 && std::isfinite(v); };
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!nonneg(lambda_ent) || !nonneg(lambda_tv) || !nonneg(lambda_aop)) {
        throw Error(ErrorCode::InvalidInput, "loss weights must be non-negative");
    }
    if (!nonneg(lr)) throw Error(ErrorCode::InvalidInput, "learning rate must be non-negative");
    if (!positive(epsilon)) throw Error(ErrorCode::InvalidInput, "epsilon must be positive");
    if (!positive(fd_step)) throw Error(ErrorCode::InvalidInput, "fd_step must be positive");
    if (steps < 1) throw Error(ErrorCode::InvalidInput, "steps must be at least 1");
}

std::optional<double> LossComponents::mean_c_aop() const {
    double sum = 0.0;
    int n = 0;
    for (const auto& m : images) {
        if (m.aop) {
            sum += m.aop->c_aop;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

std::optional<double> LossComponents::mean_aop_deg() const {
    double sum = 0.0;
    int n = 0;
    for (const auto& m : images) {
        if (m.aop) {
            sum += m.aop->aop_deg;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

LogitMap apply_head(const LogitMap& logits, const AdaptParams& params) {
    for (double v : params.flatten()) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "non-finite head parameter");
    }
    const std::size_t n = logits.pixels();
    std::vector<double> out(kNumClasses * n);
    for (std::size_t i = 0; i < n; ++i) {
        double h[3];
        for (int k = 0; k < 3; ++k) h[k] = params.gamma[k] * logits.plane(k)[i] + params.beta[k];
        for (int c = 0; c < 3; ++c) {
            out[c * n + i] =
                params.mix[c][0] * h[0] + params.mix[c][1] * h[1] + params.mix[c][2] * h[2];
        }
    }
    return LogitMap(logits.height(), logits.width(), std::move(out));
}

double entropy_loss(std::span<const ProbMap> probs) {
    check_shared_extent(probs);
    double sum = 0.0;
    for (const ProbMap& p : probs) {
        for (double v : p.values()) sum += plogp(v);
    }
    return -sum / population(probs);
}

double tv_loss(std::span<const ProbMap> probs) {
    check_shared_extent(probs);
    const int h = probs.front().height();
    const int w = probs.front().width();
    if (h < 2 || w < 2) throw Error(ErrorCode::InvalidInput, "tv_loss needs H >= 2 and W >= 2");
    double sum = 0.0;
    for (const ProbMap& p : probs) {
        for (int c = 0; c < kNumClasses; ++c) {
            for (int i = 0; i + 1 < h; ++i) {
                for (int j = 0; j + 1 < w; ++j) {
                    const double here = p.at(c, i, j);
                    sum += std::abs(p.at(c, i + 1, j) - here) + std::abs(p.at(c, i, j + 1) - here);
                }
            }
        }
    }
    return sum / population(probs);
}

double aop_conf_loss(double c_aop, double epsilon) { return -std::log(c_aop + epsilon); }

LossComponents total_loss(std::span<const Sample> batch, const AdaptParams& params,
                          const TtaConfig& config, const PixelSpacing& spacing) {
    check_batch(batch);
    std::vector<ProbMap> probs;
    probs.reserve(batch.size());
    LossComponents out;
    double aop_sum = 0.0;
    for (const Sample& s : batch) {
        const LogitMap adapted = apply_head(s.logits, params);
        probs.push_back(softmax(adapted));
        out.images.push_back(measure(adapted, s.conf, config.epsilon, spacing));
        aop_sum += out.images.back().l_aop;
    }
    out.l_ent = entropy_loss(probs);
    out.l_tv = tv_loss(probs);
    out.l_aop = aop_sum / static_cast<double>(batch.size());
    out.l_tta = config.lambda_ent * out.l_ent + config.lambda_tv * out.l_tv +
                config.lambda_aop * out.l_aop;
    return out;
}

Gradient grad_ent_tv(std::span<const Sample> batch, const AdaptParams& params,
                     const TtaConfig& config) {
    check_batch(batch);
    const int h = batch.front().logits.height();
    const int w = batch.front().logits.width();
    if (h < 2 || w < 2) throw Error(ErrorCode::InvalidInput, "tv_loss needs H >= 2 and W >= 2");
    const std::size_t n = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    const double inv_pop = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(n));

    Vec3 d_gamma{};
    Vec3 d_beta{};
    Mat3 d_mix{};
    std::vector<double> g_tv(kNumClasses * n);

    for (const Sample& s : batch) {
        const ProbMap p = softmax(apply_head(s.logits, params));

        // dL_tv / dp, subgradient 0 at exact ties.
        std::fill(g_tv.begin(), g_tv.end(), 0.0);
        if (config.lambda_tv != 0.0) {
            for (int c = 0; c < kNumClasses; ++c) {
                double* g = g_tv.data() + c * n;
                const double* pc = p.plane(c);
                for (int i = 0; i + 1 < h; ++i) {
                    for (int j = 0; j + 1 < w; ++j) {
                        const std::size_t at = static_cast<std::size_t>(i) * w + j;
                        const double down = sign(pc[at + w] - pc[at]) * inv_pop;
                        const double right = sign(pc[at + 1] - pc[at]) * inv_pop;
                        g[at + w] += down;
                        g[at + 1] += right;
                        g[at] -= down + right;
                    }
                }
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            const double pv[3] = {p.plane(0)[i], p.plane(1)[i], p.plane(2)[i]};
            // Entropy gradient w.r.t. head output: -p_c (log p_c - sum_k p_k log p_k) / N.
            const double neg_entropy = plogp(pv[0]) + plogp(pv[1]) + plogp(pv[2]);
            // TV gradient through the softmax Jacobian: p_c (g_c - sum_k p_k g_k).
            const double gt[3] = {g_tv[i], g_tv[n + i], g_tv[2 * n + i]};
            const double gt_mean = pv[0] * gt[0] + pv[1] * gt[1] + pv[2] * gt[2];
            double gz[3];
            for (int c = 0; c < 3; ++c) {
                const double ent =
                    pv[c] > 0.0 ? -pv[c] * (std::log(pv[c]) - neg_entropy) * inv_pop : 0.0;
                gz[c] = config.lambda_ent * ent + config.lambda_tv * pv[c] * (gt[c] - gt_mean);
            }
            double z[3];
            double hv[3];
            for (int k = 0; k < 3; ++k) {
                z[k] = s.logits.plane(k)[i];
                hv[k] = params.gamma[k] * z[k] + params.beta[k];
            }
            for (int c = 0; c < 3; ++c) {
                for (int k = 0; k < 3; ++k) d_mix[c][k] += gz[c] * hv[k];
            }
            for (int k = 0; k < 3; ++k) {
                const double dh =
                    params.mix[0][k] * gz[0] + params.mix[1][k] * gz[1] + params.mix[2][k] * gz[2];
                d_gamma[k] += dh * z[k];
                d_beta[k] += dh;
            }
        }
    }

    Gradient grad{};
    for (int k = 0; k < 3; ++k) {
        if (params.trainable.gamma) grad[k] = d_gamma[k];
        if (params.trainable.beta) grad[3 + k] = d_beta[k];
        if (params.trainable.mix) {
            for (int j = 0; j < 3; ++j) grad[6 + 3 * k + j] = d_mix[k][j];
        }
    }
    return grad;
}

Gradient grad_aop_fd(std::span<const Sample> batch, const AdaptParams& params,
                     const TtaConfig& config, const PixelSpacing& spacing) {
    check_batch(batch);
    Gradient grad{};
    if (config.lambda_aop == 0.0) return grad;
    const auto base = params.flatten();
    for (std::size_t k = 0; k < AdaptParams::kScalarCount; ++k) {
        if (!params.is_trainable(k)) continue;
        AdaptParams plus = params;
        AdaptParams minus = params;
        auto flat = base;
        flat[k] = base[k] + config.fd_step;
        plus.assign(flat);
        flat[k] = base[k] - config.fd_step;
        minus.assign(flat);
        const auto up = aop_term(batch, plus, config.epsilon, spacing);
        if (!up) continue;
        const auto down = aop_term(batch, minus, config.epsilon, spacing);
        if (!down) continue;
        grad[k] = config.lambda_aop * (*up - *down) / (2.0 * config.fd_step);
    }
    return grad;
}

std::pair<AdaptParams, TtaTrace> adapt(std::span<const Sample> batch, const AdaptParams& params,
                                       const TtaConfig& config, const PixelSpacing& spacing) {
    config.validate();
    check_batch(batch);
    TtaTrace trace;
    trace.before = params;
    AdaptParams current = params;
    for (int step = 0; step < config.steps; ++step) {
        StepRecord record;
        record.step = step;
        record.losses = total_loss(batch, current, config, spacing);
        const Gradient smooth = grad_ent_tv(batch, current, config);
        const Gradient geometric = grad_aop_fd(batch, current, config, spacing);
        auto flat = current.flatten();
        for (std::size_t k = 0; k < flat.size(); ++k) {
            if (!current.is_trainable(k)) continue;
            flat[k] -= config.lr * (smooth[k] + geometric[k]);
        }
        current.assign(flat);
        trace.records.push_back(std::move(record));
    }
    trace.after = current;
    trace.final_losses = total_loss(batch, current, config, spacing);
    return {current, std::move(trace)};
}

}  // namespace aop::tta
