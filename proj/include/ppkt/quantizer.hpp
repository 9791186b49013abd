// Packetization of a continuous bidirectional demand into per-slot source
// selections: the dynamic quantizer, its optimal design, the static
// nearest-level map, the continuous reference system, the triangular demand
// generator, and a brute-force optimal-sequence oracle.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "ppkt/plant.hpp"

namespace ppkt {

/// Dynamic quantizer
///     xi(k+1) = a_q xi(k) + b_q (v(k) - u(k))
///     v(k)    = q(c_q xi(k) + u(k))
/// The state accumulates weighted past quantization error; the output
/// equation feeds it back into the argument of the static quantizer q.
struct QuantizerParams {
    double a_q = 0.0;
    double b_q = 0.0;
    double c_q = 0.0;
    std::vector<double> levels;
};

struct QuantizerState {
    double xi = 0.0;
};

/// Optimal design from the plant constants: a_q = a, b_q = b, c_q = -a/b.
/// With a shared initial state the quantizer state then equals the
/// plant-vs-reference state error, and the one-step output error is bounded
/// by |c*b| * (max adjacent level gap) / 2 while the argument stays within
/// the level span (plus half a gap on each side).
inline QuantizerParams design_quantizer(const DiscretePlant& plant) {
    if (plant.b == 0.0) throw std::domain_error("design_quantizer: plant has zero input gain");
    QuantizerParams q;
    q.a_q = plant.a;
    q.b_q = plant.b;
    q.c_q = -plant.a / plant.b;
    q.levels = plant.levels;
    return q;
}

/// Nearest available level; exact midpoint ties break toward the lower voltage.
inline double static_quantize(std::span<const double> levels, double arg) {
    if (levels.empty()) throw std::invalid_argument("static_quantize: no levels");
    std::vector<double> sorted(levels.begin(), levels.end());
    std::sort(sorted.begin(), sorted.end());
    double best = sorted.front();
    double best_d = std::abs(arg - best);
    for (double v : sorted) {
        const double d = std::abs(arg - v);
        if (d < best_d) {
            best = v;
            best_d = d;
        }
    }
    return best;
}

struct QuantizeStep {
    double v = 0.0;
    QuantizerState next;
};

inline QuantizeStep quantizer_step(const QuantizerParams& params, QuantizerState state, double u) {
    if (!std::isfinite(u)) throw std::invalid_argument("quantizer_step: u must be finite");
    QuantizeStep r;
    r.v = static_quantize(params.levels, params.c_q * state.xi + u);
    r.next.xi = params.a_q * state.xi + params.b_q * (r.v - u);
    return r;
}

/// Reference system P': the same plant driven by the continuous input u.
inline StepResult reference_step(const DiscretePlant& plant, double x_ref, double u) {
    StepResult r;
    r.y = plant.c * x_ref;
    r.x_next = plant.a * x_ref + plant.b * u;
    return r;
}

enum class TriRange {
    unit,   // tri in [0, 1]: zero at multiples of pi, one at odd multiples of pi/2
    signed_ // tri in [-1, 1]: the standard bipolar triangle of period 2*pi
};

/// Triangular demand u(k) = offset + amplitude * tri(2*pi*k / K).
struct ReferenceSpec {
    double amplitude_a = 4.0;
    double offset_b = 8.0;
    std::int64_t period_slots_K = 125;
    TriRange range = TriRange::unit;

    void validate() const {
        if (period_slots_K < 2) throw std::invalid_argument("reference: period_slots must be >= 2");
        if (!std::isfinite(amplitude_a) || !std::isfinite(offset_b))
            throw std::invalid_argument("reference: amplitude/offset must be finite");
    }

    /// True when the swing stays inside [min(levels), max(levels)].
    bool within_levels(std::span<const double> levels) const {
        const auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
        const double swing_lo = range == TriRange::unit ? offset_b : offset_b - std::abs(amplitude_a);
        const double swing_hi = offset_b + std::abs(amplitude_a);
        return swing_lo >= *lo && swing_hi <= *hi;
    }
};

/// Evaluated in the slot domain (phase = k mod period) so the landmark values
/// at k = 0, K/4, K/2, ... are exact.
inline double triangular_reference(const ReferenceSpec& spec, std::int64_t k) {
    if (k < 0) throw std::invalid_argument("triangular_reference: k must be >= 0");
    const double kk = static_cast<double>(k);
    const double period = static_cast<double>(spec.period_slots_K);
    const double quarter = period / 4.0;
    double tri;
    if (spec.range == TriRange::unit) {
        const double ph = std::fmod(kk, period / 2.0);
        tri = ph <= quarter ? ph / quarter : (period / 2.0 - ph) / quarter;
    } else {
        const double ph = std::fmod(kk, period);
        if (ph <= quarter)
            tri = ph / quarter;
        else if (ph <= 3.0 * quarter)
            tri = (period / 2.0 - ph) / quarter;
        else
            tri = (ph - period) / quarter;
    }
    return spec.offset_b + spec.amplitude_a * tri;
}

struct BruteForceResult {
    std::vector<int> level_indices; // 0-based into plant.levels, lexicographically first among ties
    double minimax_cost = 0.0;      // max_k |y(k) - y_ref(k)|, k = 1..N
    double sse = 0.0;               // secondary metric, sum of squared output errors
};

/// Exhaustive search over all level sequences of length u.size(), both the
/// plant and the reference starting from x0. Horizon capped at 20
/// (levels^N enumerations).
inline BruteForceResult brute_force_optimal(const DiscretePlant& plant, std::span<const double> u,
                                            double x0) {
    const std::size_t n = u.size();
    const std::size_t n_levels = plant.levels.size();
    if (n_levels == 0) throw std::invalid_argument("brute_force_optimal: plant has no levels");
    if (n > 20) throw std::length_error("brute_force_optimal: horizon > 20");

    std::vector<double> y_ref(n);
    double xr = x0;
    for (std::size_t k = 0; k < n; ++k) {
        xr = plant.a * xr + plant.b * u[k];
        y_ref[k] = plant.c * xr;
    }

    std::vector<int> seq(n, 0);
    BruteForceResult best;
    best.minimax_cost = std::numeric_limits<double>::infinity();
    best.sse = std::numeric_limits<double>::infinity();

    // lexicographic enumeration; strict improvement keeps the first tie
    while (true) {
        double x = x0, mx = 0.0, sse = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            x = plant.a * x + plant.b * plant.levels[static_cast<std::size_t>(seq[k])];
            const double e = std::abs(plant.c * x - y_ref[k]);
            if (e > mx) mx = e;
            sse += e * e;
        }
        if (mx < best.minimax_cost || (mx == best.minimax_cost && sse < best.sse)) {
            best.minimax_cost = mx;
            best.sse = sse;
            best.level_indices = seq;
        }
        // next sequence in lexicographic order
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (seq[pos] + 1 < static_cast<int>(n_levels)) {
                ++seq[pos];
                std::fill(seq.begin() + static_cast<std::ptrdiff_t>(pos) + 1, seq.end(), 0);
                break;
            }
            if (pos == 0) return best;
        }
        if (n == 0) return best;
    }
}

} // namespace ppkt
