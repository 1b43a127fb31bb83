#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace faithfill::diffusion {

enum class ScheduleKind { linear, cosine };

std::string_view schedule_kind_name(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

/// Cumulative signal coefficients alpha_1..alpha_T used directly as
///   z_t = sqrt(alpha_t) z_0 + sqrt(1 - alpha_t) eps.
///
/// linear: alpha_t = prod_{s<=t} (1 - beta_s), beta ramping linearly from
/// 1e-4 to 0.02 over T steps (beta_1 = 1e-4 when T = 1).
/// cosine: alpha_t = f(t) / f(0), f(t) = cos^2(((t/T) + s) / (1 + s) * pi/2),
/// s = 0.008, with per-step beta clipped to 0.999.
class NoiseSchedule {
public:
    static constexpr double kBetaStart = 1e-4;
    static constexpr double kBetaEnd = 0.02;

    NoiseSchedule(ScheduleKind kind, std::vector<double> alphas);

    ScheduleKind kind() const { return kind_; }
    std::size_t steps() const { return alphas_.size(); }

    /// alpha_t for t in [1, T]; t = 0 returns 1 (clean signal).
    double alpha(std::size_t t) const;
    const std::vector<double>& alphas() const { return alphas_; }

    /// FNV-1a over kind, T and the bit patterns of every alpha.
    std::uint64_t fingerprint() const;

private:
    ScheduleKind kind_;
    std::vector<double> alphas_;
};

/// Throws ValidationError when steps < 1.
NoiseSchedule build_schedule(std::size_t steps, ScheduleKind kind);

}  // namespace faithfill::diffusion
