#include "faithfill/diffusion/schedule.hpp"

#include "faithfill/core/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace faithfill::diffusion {

std::string_view schedule_kind_name(ScheduleKind kind) {
    return kind == ScheduleKind::linear ? "linear" : "cosine";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
    if (name == "linear") return ScheduleKind::linear;
    if (name == "cosine") return ScheduleKind::cosine;
    throw ValidationError("unknown schedule kind '" + std::string(name) + "'");
}

NoiseSchedule::NoiseSchedule(ScheduleKind kind, std::vector<double> alphas) : kind_(kind), alphas_(std::move(alphas)) {
    if (alphas_.empty()) throw ValidationError("noise schedule needs at least one step");
    for (std::size_t i = 0; i < alphas_.size(); ++i) {
        if (!(alphas_[i] > 0.0 && alphas_[i] <= 1.0)) throw ValidationError("schedule alpha outside (0, 1]");
        if (i > 0 && alphas_[i] > alphas_[i - 1]) throw ValidationError("schedule alphas must be non-increasing");
    }
}

double NoiseSchedule::alpha(std::size_t t) const {
    if (t == 0) return 1.0;
    if (t > alphas_.size()) {
        throw ValidationError("timestep " + std::to_string(t) + " outside [1, " + std::to_string(alphas_.size()) + "]");
    }
    return alphas_[t - 1];
}

std::uint64_t NoiseSchedule::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](std::uint64_t word) {
        for (int i = 0; i < 8; ++i) {
            h ^= (word >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(kind_));
    mix(alphas_.size());
    for (double a : alphas_) mix(std::bit_cast<std::uint64_t>(a));
    return h;
}

NoiseSchedule build_schedule(std::size_t steps, ScheduleKind kind) {
    if (steps < 1) throw ValidationError("schedule needs T >= 1");
    std::vector<double> alphas(steps);
    if (kind == ScheduleKind::linear) {
        double cumulative = 1.0;
        for (std::size_t i = 0; i < steps; ++i) {
            const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
            const double beta = NoiseSchedule::kBetaStart + (NoiseSchedule::kBetaEnd - NoiseSchedule::kBetaStart) * frac;
            cumulative *= 1.0 - beta;
            alphas[i] = cumulative;
        }
    } else {
        constexpr double offset = 0.008;
        const auto f = [&](double t) {
            const double c = std::cos((t / static_cast<double>(steps) + offset) / (1.0 + offset) * std::numbers::pi / 2);
            return c * c;
        };
        const double f0 = f(0.0);
        double previous = 1.0;
        double cumulative = 1.0;
        for (std::size_t i = 0; i < steps; ++i) {
            const double target = f(static_cast<double>(i + 1)) / f0;
            const double beta = std::min(1.0 - target / previous, 0.999);
            previous = target;
            cumulative *= 1.0 - beta;
            alphas[i] = cumulative;
        }
    }
    return NoiseSchedule(kind, std::move(alphas));
}

}  // namespace faithfill::diffusion
