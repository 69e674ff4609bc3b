#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace seedmap {

// Base codes: A=0, C=1, G=2, T=3, anything ambiguous=4.
using BaseCode = std::uint8_t;

inline constexpr BaseCode kBaseA = 0;
inline constexpr BaseCode kBaseC = 1;
inline constexpr BaseCode kBaseG = 2;
inline constexpr BaseCode kBaseT = 3;
inline constexpr BaseCode kBaseAmbiguous = 4;

// Reserved code stored in occ-bucket BWT bytes for the sentinel row. It
// matches no base compare, same as an ambiguous base.
inline constexpr BaseCode kSentinelCode = 4;

namespace detail {
constexpr std::array<BaseCode, 256> make_encode_table() {
    std::array<BaseCode, 256> t{};
    for (auto& v : t) v = kBaseAmbiguous;
    t['A'] = t['a'] = kBaseA;
    t['C'] = t['c'] = kBaseC;
    t['G'] = t['g'] = kBaseG;
    t['T'] = t['t'] = kBaseT;
    return t;
}
inline constexpr std::array<BaseCode, 256> kEncodeTable = make_encode_table();
}  // namespace detail

inline BaseCode encode_base(char c) {
    return detail::kEncodeTable[static_cast<unsigned char>(c)];
}

// complement(A)=T, complement(C)=G, complement(G)=C, complement(T)=A,
// complement(ambiguous)=ambiguous.
inline BaseCode complement(BaseCode b) { return b < 4 ? BaseCode(3 - b) : b; }

inline char decode_base(BaseCode b) {
    static constexpr char tab[] = "ACGTN";
    return tab[b > 4 ? 4 : b];
}

inline std::vector<BaseCode> encode_string(const std::string& s) {
    std::vector<BaseCode> out;
    out.reserve(s.size());
    for (char c : s) out.push_back(encode_base(c));
    return out;
}

inline std::vector<BaseCode> reverse_complement(const std::vector<BaseCode>& s) {
    std::vector<BaseCode> out;
    out.reserve(s.size());
    for (auto it = s.rbegin(); it != s.rend(); ++it) out.push_back(complement(*it));
    return out;
}

}  // namespace seedmap
