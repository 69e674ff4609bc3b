#pragma once

#include <cstdint>
#include <vector>

#include "seedmap/errors.hpp"
#include "seedmap/fmindex.hpp"
#include "seedmap/smem.hpp"

namespace seedmap {

struct SeedHit {
    std::uint32_t q_begin = 0;
    std::uint32_t q_end = 0;
    std::uint64_t ref_pos = 0;        // leftmost base of the match, forward strand
    bool is_reverse = false;
    std::uint64_t interval_size = 0;  // s of the source interval
};

// Suffix-array lookup, Eq. j = S[i]: one array access, no decompression walk.
// Templated on the array provider so tests can count accesses.
template <class SuffixArrayLike>
inline std::uint64_t sal_lookup(const SuffixArrayLike& sa, std::uint64_t row) {
    return sa[row];
}

inline std::uint64_t lookup(const FMIndex& idx, std::uint64_t row) {
    if (row >= idx.n) throw InvariantError("sal: row out of range");
    return sal_lookup(idx.suffix_array, row);
}

// Converts a bi-interval to reference coordinates. Concat positions in the
// reverse-complement half are folded back to forward-strand coordinates.
// Intervals larger than max_occ are down-sampled uniformly by stride.
// Matches spanning the forward/revcomp junction are dropped.
inline void interval_to_hits(const FMIndex& idx, const Smem& smem, std::uint64_t max_occ,
                             std::vector<SeedHit>& out) {
    const std::uint64_t s = smem.interval.s;
    const std::uint64_t len = smem.q_end - smem.q_begin;
    const std::uint64_t take = s <= max_occ ? s : max_occ;
    for (std::uint64_t t = 0; t < take; ++t) {
        const std::uint64_t row = smem.interval.k + (s <= max_occ ? t : t * s / max_occ);
        const std::uint64_t p = lookup(idx, row);
        SeedHit hit;
        hit.q_begin = smem.q_begin;
        hit.q_end = smem.q_end;
        hit.interval_size = s;
        if (p + len <= idx.n_ref) {
            hit.ref_pos = p;
            hit.is_reverse = false;
        } else if (p >= idx.n_ref) {
            hit.ref_pos = 2 * idx.n_ref - p - len;
            hit.is_reverse = true;
        } else {
            continue;  // crosses the concat junction
        }
        out.push_back(hit);
    }
}

inline std::vector<SeedHit> interval_to_hits(const FMIndex& idx, const Smem& smem,
                                             std::uint64_t max_occ) {
    std::vector<SeedHit> out;
    interval_to_hits(idx, smem, max_occ, out);
    return out;
}

}  // namespace seedmap
