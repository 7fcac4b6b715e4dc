#ifndef OFDMBB_TABLES_HPP
#define OFDMBB_TABLES_HPP

// Embedded 802.11 reference sequences: training-field frequency patterns,
// pilot positions and polarity sequence, active-subcarrier index sets.

#include <array>
#include <complex>
#include <cstdint>

namespace ofdmbb {

enum class Format : uint8_t { Legacy, Ht };
enum class GuardInterval : uint8_t { Long, Short };

inline constexpr int kNfft = 64;
inline constexpr int kLongGi = 16;
inline constexpr int kShortGi = 8;
// Receiver FFT windows start this many samples inside the guard interval,
// keeping the window clear of the next symbol boundary (clock-drift ICI
// margin) at the cost of the same amount of multipath delay-spread margin.
inline constexpr int kWindowAdvance = 2;
inline constexpr double kSampleRateHz = 20e6;

inline constexpr std::array<int, 4> kPilotIndices = {-21, -7, 7, 21};
inline constexpr std::array<int, 4> kPilotBase = {+1, +1, +1, -1};

// Sum of squared pilot indices, the PEG regression denominator.
inline constexpr int kPilotIdxSqSum = 2 * (21 * 21 + 7 * 7);  // 980

inline constexpr int kLegacyActive = 52;
inline constexpr int kHtActive = 56;
inline constexpr int kLegacyData = 48;
inline constexpr int kHtData = 52;

namespace tables {

/// L-LTF sign at subcarriers -26..26 (index i stored at [i + 26]; DC = 0).
inline constexpr std::array<int8_t, 53> kLltfSign = {
    1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1,
    -1, 1, 1, 1, 1,
    0,
    1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1,
    1, -1, 1, 1, 1, 1};

/// HT-LTF sign at subcarriers -28..28 ([i + 28]; DC = 0). Extends the
/// Legacy sequence with {1,1} below and {-1,-1} above.
inline constexpr std::array<int8_t, 57> kHtltfSign = [] {
    std::array<int8_t, 57> t{};
    t[0] = 1;
    t[1] = 1;
    for (int i = -26; i <= 26; ++i) t[i + 28] = kLltfSign[i + 26];
    t[55] = -1;
    t[56] = -1;
    return t;
}();

/// L-STF populated tones: every 4th subcarrier in +-{4..24}, value
/// sqrt(13/6) * (+-1 +- j). Returned as (index, re-sign, im-sign) triples.
struct StfTone {
    int index;
    int sign;  // tone = sign * sqrt(13/6) * (1 + j)
};
inline constexpr std::array<StfTone, 12> kStfTones = {{
    {-24, +1}, {-20, -1}, {-16, +1}, {-12, -1}, {-8, -1}, {-4, +1},
    {4, -1},   {8, -1},   {12, +1},  {16, +1},  {20, +1}, {24, +1},
}};

/// 127-element cyclic pilot polarity sequence.
inline constexpr std::array<int8_t, 127> kPolaritySeq = {
    1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, -1, 1, 1, -1, 1,
    -1, -1, 1, 1, -1, 1, 1, -1, 1, 1, 1, 1, 1, 1, -1, 1,
    1, 1, -1, 1, 1, -1, -1, 1, 1, 1, -1, 1, -1, -1, -1, 1,
    -1, 1, -1, -1, 1, -1, -1, 1, 1, 1, 1, 1, -1, -1, 1, 1,
    -1, -1, 1, -1, 1, -1, 1, 1, -1, -1, -1, 1, 1, -1, -1, -1,
    -1, 1, -1, -1, 1, -1, 1, 1, 1, 1, -1, 1, -1, 1, -1, 1,
    -1, -1, -1, -1, -1, 1, -1, 1, 1, -1, 1, -1, 1, 1, 1, -1,
    -1, 1, -1, -1, -1, 1, 1, 1, -1, -1, -1, -1, -1, -1, -1};

}  // namespace tables

inline int8_t lltf_sign(int subcarrier) {
    return tables::kLltfSign[subcarrier + 26];
}

inline int8_t htltf_sign(int subcarrier) {
    return tables::kHtltfSign[subcarrier + 28];
}

inline bool is_pilot_index(int subcarrier) {
    return subcarrier == -21 || subcarrier == -7 || subcarrier == 7 ||
           subcarrier == 21;
}

}  // namespace ofdmbb

#endif
