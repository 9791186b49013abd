// Power packet tag protocol: bit-exact header/footer framing and the
// comparator-model conversion between line-potential waveforms and logic bits.
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ppkt {

/// Logic bit sequence, one byte per bit (values 0 or 1).
using Bits = std::vector<std::uint8_t>;

inline std::string to_string(const Bits& bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

inline Bits bits_from_string(std::string_view s) {
    Bits out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("bit string may contain only '0'/'1', got '" + std::string(1, c) + "'");
        out.push_back(c == '1' ? 1 : 0);
    }
    return out;
}

/// Raised when a waveform does not cover a requested sampling window.
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Network-wide packet framing: bit timing and field layout.
///
/// Bit timing is kept in integer nanoseconds so packet arithmetic is exact
/// (250 bits x 4000 ns == 1'000'000 ns == 1.0 ms with the default values).
struct ProtocolSpec {
    std::int64_t bit_duration_ns = 4000;
    Bits start_marker = {1, 0, 1};
    int index_bits = 3;
    int payload_bits = 240;
    int footer_bits = 4;
    double signal_high_voltage = 5.0;  // line potential of logic high during tag transfer
    double comparator_threshold = 2.5; // decision level of the signal reading module

    int header_bit_length() const { return static_cast<int>(start_marker.size()) + index_bits; }
    int packet_bit_length() const { return header_bit_length() + payload_bits + footer_bits; }
    int max_source_index() const { return (1 << index_bits) - 1; }

    std::int64_t header_duration_ns() const { return header_bit_length() * bit_duration_ns; }
    std::int64_t payload_duration_ns() const { return std::int64_t{1} * payload_bits * bit_duration_ns; }
    std::int64_t footer_duration_ns() const { return std::int64_t{1} * footer_bits * bit_duration_ns; }
    std::int64_t packet_duration_ns() const { return std::int64_t{1} * packet_bit_length() * bit_duration_ns; }

    double bit_duration() const { return static_cast<double>(bit_duration_ns) * 1e-9; }
    double packet_duration() const { return static_cast<double>(packet_duration_ns()) * 1e-9; }
    double payload_duration() const { return static_cast<double>(payload_duration_ns()) * 1e-9; }

    void validate() const {
        if (bit_duration_ns <= 0) throw std::invalid_argument("protocol: bit_duration must be > 0");
        if (start_marker.empty()) throw std::invalid_argument("protocol: start_marker must be non-empty");
        if (index_bits < 1 || payload_bits < 1 || footer_bits < 1)
            throw std::invalid_argument("protocol: all bit counts must be >= 1");
        if (index_bits >= 31) throw std::invalid_argument("protocol: index_bits too large");
        if (!(comparator_threshold > 0.0 && comparator_threshold < signal_high_voltage))
            throw std::invalid_argument("protocol: need 0 < comparator_threshold < signal_high_voltage");
    }
};

/// Decoded information tag: which source this slot's demand is allocated to.
struct Header {
    int source_index = 0; // 1-based; 0 is reserved as invalid
};

inline Bits encode_header(const ProtocolSpec& spec, int source_index) {
    if (source_index < 1 || source_index > spec.max_source_index())
        throw std::out_of_range("source_index " + std::to_string(source_index) + " outside [1, " +
                                std::to_string(spec.max_source_index()) + "]");
    Bits out = spec.start_marker;
    for (int i = spec.index_bits - 1; i >= 0; --i)
        out.push_back(static_cast<std::uint8_t>((source_index >> i) & 1));
    return out;
}

enum class DecodeStatus { ok, framing_error, invalid_index };

struct DecodeResult {
    DecodeStatus status = DecodeStatus::framing_error;
    Header header;
    bool ok() const { return status == DecodeStatus::ok; }
};

/// Verifies the start marker and decodes the source index. Any input that is
/// not a well-formed header (wrong length, wrong marker) is a framing error;
/// the reserved index 0 is reported separately so routers can fail safe.
inline DecodeResult decode_header(const ProtocolSpec& spec, const Bits& bits) {
    if (bits.size() != static_cast<std::size_t>(spec.header_bit_length()))
        return {DecodeStatus::framing_error, {}};
    if (!std::equal(spec.start_marker.begin(), spec.start_marker.end(), bits.begin()))
        return {DecodeStatus::framing_error, {}};
    int idx = 0;
    for (int i = 0; i < spec.index_bits; ++i)
        idx = (idx << 1) | bits[spec.start_marker.size() + i];
    if (idx == 0) return {DecodeStatus::invalid_index, {}};
    return {DecodeStatus::ok, Header{idx}};
}

/// Piecewise-constant line potential. Each sample holds from its time until
/// the next sample; the waveform is defined on [samples.front().time, end_time).
struct LogicWaveform {
    struct Sample {
        double time = 0.0;      // seconds
        double potential = 0.0; // volts
    };
    std::vector<Sample> samples;
    double end_time = 0.0;

    bool empty() const { return samples.empty(); }

    double potential_at(double t) const {
        if (samples.empty() || t < samples.front().time || t >= end_time)
            throw CoverageError("waveform does not cover t = " + std::to_string(t));
        // last sample with time <= t
        auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                   [](double v, const Sample& s) { return v < s.time; });
        return std::prev(it)->potential;
    }
};

inline LogicWaveform bits_to_waveform(const ProtocolSpec& spec, const Bits& bits, double t0) {
    LogicWaveform w;
    w.samples.reserve(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        w.samples.push_back({t0 + static_cast<double>(i) * spec.bit_duration(),
                             bits[i] ? spec.signal_high_voltage : 0.0});
    w.end_time = t0 + static_cast<double>(bits.size()) * spec.bit_duration();
    return w;
}

/// Comparator model: sample the line at each bit midpoint and threshold.
inline Bits waveform_to_bits(const ProtocolSpec& spec, const LogicWaveform& w, double t0, int n_bits) {
    Bits out;
    out.reserve(static_cast<std::size_t>(n_bits));
    for (int i = 0; i < n_bits; ++i) {
        const double mid = t0 + (static_cast<double>(i) + 0.5) * spec.bit_duration();
        out.push_back(w.potential_at(mid) > spec.comparator_threshold ? 1 : 0);
    }
    return out;
}

} // namespace ppkt
