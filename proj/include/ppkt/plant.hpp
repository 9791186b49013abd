// Physical layer: the parallel-RC load circuit fed by switched sources and
// its slot-indexed discrete model x(k+1) = a x(k) + b V's(k), y = c x.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppkt/protocol.hpp"

namespace ppkt {

struct CircuitParams {
    std::vector<double> source_voltages{12.0, 3.6}; // [E_1, ..., E_N]
    std::vector<double> r_eq{3.3, 3.3};             // series path resistance per source
    double r_load = 10.0;
    double c_load = 9.9e-3;

    int n_sources() const { return static_cast<int>(source_voltages.size()); }

    void validate() const {
        if (n_sources() < 2) throw std::invalid_argument("circuit: need at least 2 sources");
        if (r_eq.size() != source_voltages.size())
            throw std::invalid_argument("circuit: r_eq needs one entry per source");
        for (double r : r_eq)
            if (!(r > 0.0)) throw std::invalid_argument("circuit: r_eq entries must be > 0");
        if (!(r_load > 0.0)) throw std::invalid_argument("circuit: r_load must be > 0");
        if (!(c_load > 0.0)) throw std::invalid_argument("circuit: c_load must be > 0");
        for (std::size_t i = 0; i < source_voltages.size(); ++i)
            for (std::size_t j = i + 1; j < source_voltages.size(); ++j)
                if (source_voltages[i] == source_voltages[j])
                    throw std::invalid_argument("circuit: source voltages must be pairwise distinct");
    }
};

enum class Discretization { forward_euler, zoh };

struct StabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SelectionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// State decay rate while source i conducts: alpha = (1/R_eq_i + 1/R_L) / C_L.
inline double decay_rate(const CircuitParams& p, int source_index) {
    if (source_index < 1 || source_index > p.n_sources())
        throw std::out_of_range("source_index outside [1, N]");
    return (1.0 / p.r_eq[static_cast<std::size_t>(source_index - 1)] + 1.0 / p.r_load) / p.c_load;
}

/// Slot-indexed scalar model. When the per-source path resistances differ the
/// scalar (a, b) are source averages and `averaged` is set; the fine model and
/// slot_current always use the exact per-source paths.
struct DiscretePlant {
    double a = 0.0;      // conducting-state coefficient
    double b = 0.0;      // input gain (volts of state increment per selected volt)
    double c = 1.0;      // output coefficient
    double a_idle = 0.0; // decay with every power switch open (R_L self-discharge)
    std::vector<double> levels; // copy of V
    double t_packet = 0.0;
    Discretization method = Discretization::forward_euler;
    bool averaged = false;
};

inline DiscretePlant discretize(const CircuitParams& p, double t_packet, Discretization method) {
    p.validate();
    if (!(t_packet > 0.0)) throw std::invalid_argument("discretize: t_packet must be > 0");

    DiscretePlant d;
    d.levels = p.source_voltages;
    d.t_packet = t_packet;
    d.method = method;
    d.c = 1.0;

    const double beta = 1.0 / (p.r_load * p.c_load); // idle self-discharge rate
    double a_sum = 0.0, b_sum = 0.0;
    for (int i = 1; i <= p.n_sources(); ++i) {
        const double alpha = decay_rate(p, i);
        const double r = p.r_eq[static_cast<std::size_t>(i - 1)];
        if (method == Discretization::forward_euler) {
            if (t_packet * alpha >= 1.0)
                throw StabilityError("forward Euler unstable: t_packet * alpha = " +
                                     std::to_string(t_packet * alpha) + " >= 1");
            a_sum += 1.0 - t_packet * alpha;
            b_sum += t_packet / (r * p.c_load);
        } else {
            const double a_i = std::exp(-t_packet * alpha);
            a_sum += a_i;
            b_sum += (1.0 - a_i) * p.r_load / (p.r_load + r);
        }
    }
    const double n = static_cast<double>(p.n_sources());
    d.a = a_sum / n;
    d.b = b_sum / n;
    d.averaged = false;
    for (std::size_t i = 1; i < p.r_eq.size(); ++i)
        if (p.r_eq[i] != p.r_eq[0]) d.averaged = true;

    if (method == Discretization::forward_euler) {
        if (t_packet * beta >= 1.0)
            throw StabilityError("forward Euler unstable for the idle slot: t_packet/(R_L C_L) >= 1");
        d.a_idle = 1.0 - t_packet * beta;
    } else {
        d.a_idle = std::exp(-t_packet * beta);
    }
    return d;
}

struct StepResult {
    double x_next = 0.0;
    double y = 0.0;
};

/// One slot of the coarse model. s must be one-hot (source conducting for the
/// whole slot) or all-zero (self-discharge only).
inline StepResult step(const DiscretePlant& plant, double x, std::span<const int> s) {
    if (s.size() != plant.levels.size())
        throw SelectionError("selection vector length != number of levels");
    int ones = 0;
    double v = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != 0 && s[i] != 1) throw SelectionError("selection vector entries must be 0 or 1");
        if (s[i] == 1) {
            ++ones;
            v = plant.levels[i];
        }
    }
    if (ones > 1) throw SelectionError("selection vector must be one-hot or all-zero");
    StepResult r;
    r.y = plant.c * x;
    r.x_next = ones == 0 ? plant.a_idle * x : plant.a * x + plant.b * v;
    return r;
}

/// Conduction-path current, positive into the load.
inline double slot_current(const CircuitParams& p, double x, int source_index) {
    if (source_index < 1 || source_index > p.n_sources())
        throw std::out_of_range("source_index outside [1, N]");
    const auto i = static_cast<std::size_t>(source_index - 1);
    return (p.source_voltages[i] - x) / p.r_eq[i];
}

/// One bit-resolved sample of the physical line during a slot.
struct FineSample {
    double time = 0.0;           // seconds, at bit start
    double load_voltage = 0.0;   // volts
    double line_potential = 0.0; // volts (tag logic level / load node / low)
    double current = 0.0;        // amperes into the load, nonzero only in payload
};

struct FineSlotResult {
    double x_next = 0.0;
    double payload_energy = 0.0; // joules into the load node, integral of x*i over the payload
    double rl_dissipation = 0.0; // joules burned in R_L over the whole slot
    double avg_current = 0.0;    // payload-window average
    std::vector<FineSample> samples; // one per bit
};

namespace detail {

// Exact segment update for dx/dt = -rate*(x - x_inf); accumulates the
// integrals of x and x^2 over the segment.
struct SegmentIntegrals {
    double x_end = 0.0;
    double int_x = 0.0;
    double int_x2 = 0.0;
};

inline SegmentIntegrals advance_exp(double x0, double x_inf, double rate, double dt) {
    const double e1 = std::exp(-rate * dt);
    const double d = x0 - x_inf;
    SegmentIntegrals s;
    s.x_end = x_inf + d * e1;
    s.int_x = x_inf * dt + d * (1.0 - e1) / rate;
    s.int_x2 = x_inf * x_inf * dt + 2.0 * x_inf * d * (1.0 - e1) / rate +
               d * d * (1.0 - e1 * e1) / (2.0 * rate);
    return s;
}

} // namespace detail

/// Bit-resolution slot simulation with exact exponential sub-steps: header and
/// footer bits conduct nothing (R_L self-discharge), payload bits conduct
/// through the selected source path. `line_bits` is what the tag transfer put
/// on the line (padded low / truncated to the header length when rendering).
inline FineSlotResult fine_step(const CircuitParams& p, const ProtocolSpec& spec, double x,
                                std::optional<int> source_index, double t0,
                                const Bits& line_bits) {
    p.validate();
    if (source_index && (*source_index < 1 || *source_index > p.n_sources()))
        throw std::out_of_range("source_index outside [1, N]");

    const double dt = spec.bit_duration();
    const double beta = 1.0 / (p.r_load * p.c_load);
    double alpha = 0.0, x_inf = 0.0, e_volt = 0.0, r_path = 1.0;
    if (source_index) {
        alpha = decay_rate(p, *source_index);
        const auto i = static_cast<std::size_t>(*source_index - 1);
        e_volt = p.source_voltages[i];
        r_path = p.r_eq[i];
        x_inf = e_volt * p.r_load / (p.r_load + r_path);
    }

    FineSlotResult out;
    out.samples.reserve(static_cast<std::size_t>(spec.packet_bit_length()));
    const int n_header = spec.header_bit_length();
    const int n_hp = n_header + spec.payload_bits;
    double int_payload_x = 0.0;

    for (int bit = 0; bit < spec.packet_bit_length(); ++bit) {
        const bool in_payload = bit >= n_header && bit < n_hp;
        FineSample smp;
        smp.time = t0 + static_cast<double>(bit) * dt;
        smp.load_voltage = x;
        if (bit < n_header) {
            const bool high = bit < static_cast<int>(line_bits.size()) && line_bits[static_cast<std::size_t>(bit)];
            smp.line_potential = high ? spec.signal_high_voltage : 0.0;
        } else if (in_payload) {
            smp.line_potential = source_index ? x : 0.0;
        } else {
            smp.line_potential = 0.0; // footer holds the line low
        }
        smp.current = (in_payload && source_index) ? (e_volt - x) / r_path : 0.0;
        out.samples.push_back(smp);

        detail::SegmentIntegrals seg =
            (in_payload && source_index) ? detail::advance_exp(x, x_inf, alpha, dt)
                                         : detail::advance_exp(x, 0.0, beta, dt);
        out.rl_dissipation += seg.int_x2 / p.r_load;
        if (in_payload && source_index) {
            int_payload_x += seg.int_x;
            out.payload_energy += (e_volt * seg.int_x - seg.int_x2) / r_path;
        }
        x = seg.x_end;
    }
    out.x_next = x;
    if (source_index) {
        const double t_pay = spec.payload_duration();
        out.avg_current = (e_volt * t_pay - int_payload_x) / (r_path * t_pay);
    }
    return out;
}

inline FineSlotResult fine_step(const CircuitParams& p, const ProtocolSpec& spec, double x,
                                std::optional<int> source_index, double t0 = 0.0) {
    Bits header;
    if (source_index) header = encode_header(spec, *source_index);
    return fine_step(p, spec, x, source_index, t0, header);
}

} // namespace ppkt
