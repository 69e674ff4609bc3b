#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "seedmap/bases.hpp"
#include "seedmap/fmindex.hpp"

namespace seedmap {

// Bidirectional SA interval of a string X over the forward+revcomp concat:
// rows k..k+s-1 hold the suffixes starting with X, rows l..l+s-1 those
// starting with revcomp(X). s = 0 marks a dead interval.
struct BiInterval {
    std::uint64_t k = 0;
    std::uint64_t l = 0;
    std::uint64_t s = 0;

    friend bool operator==(const BiInterval&, const BiInterval&) = default;
};

struct Smem {
    std::uint32_t q_begin = 0;  // half-open match span on the read
    std::uint32_t q_end = 0;
    BiInterval interval;

    std::uint32_t length() const { return q_end - q_begin; }
};

struct SmemParams {
    std::uint32_t min_seed_len = 19;
    std::uint64_t max_occ = 500;   // SAL enumeration cap
    std::uint64_t min_intv = 1;    // minimum live interval size
    bool prefetch = true;
};

// Non-binding memory-touch hint for the occ bucket containing `row`.
// No observable semantic effect.
inline void prefetch_hint(const FMIndex& idx, std::uint64_t row) {
    if (row < idx.n) __builtin_prefetch(&idx.occ_buckets[row >> 5], 0, 1);
}

// Bi-interval of the single base b.
inline BiInterval base_interval(const FMIndex& idx, BaseCode b) {
    BiInterval iv;
    iv.k = idx.D[b] + 1;
    iv.l = idx.D[complement(b)] + 1;
    iv.s = idx.D[b + 1] - idx.D[b];
    return iv;
}

// Bi-intervals of bX for every base b. The k/s sides come straight from two
// rank queries per base; the l side is assigned cumulatively in complement
// order T,G,C,A, with a +1 adjustment when the sentinel row falls inside the
// source interval. The row convention (the +1 on D) is pinned by the
// "AC" -> SA interval [1,2] ground truth on ATACGAC$ and the brute-force
// interval oracle in the tests.
inline std::array<BiInterval, 4> backward_ext_all(const FMIndex& idx, const BiInterval& iv) {
    std::array<BiInterval, 4> out;
    std::uint64_t occ_lo[4], occ_hi[4];
    for (int c = 0; c < 4; ++c) {
        occ_lo[c] = idx.get_o(BaseCode(c), std::int64_t(iv.k) - 1);
        occ_hi[c] = idx.get_o(BaseCode(c), std::int64_t(iv.k + iv.s) - 1);
    }
    for (int c = 0; c < 4; ++c) {
        out[c].k = idx.D[c] + 1 + occ_lo[c];
        out[c].s = occ_hi[c] - occ_lo[c];
    }
    const std::uint64_t sentinel_adjust =
        (idx.sentinel_row >= iv.k && idx.sentinel_row < iv.k + iv.s) ? 1 : 0;
    out[kBaseT].l = iv.l + sentinel_adjust;
    out[kBaseG].l = out[kBaseT].l + out[kBaseT].s;
    out[kBaseC].l = out[kBaseG].l + out[kBaseG].s;
    out[kBaseA].l = out[kBaseC].l + out[kBaseC].s;
    return out;
}

inline BiInterval backward_ext(const FMIndex& idx, const BiInterval& iv, BaseCode b) {
    return backward_ext_all(idx, iv)[b];
}

// Bi-interval of Xb: swap (k,l), backward-extend by the complement, swap back.
inline BiInterval forward_ext(const FMIndex& idx, const BiInterval& iv, BaseCode b) {
    BiInterval swapped{iv.l, iv.k, iv.s};
    BiInterval ext = backward_ext(idx, swapped, complement(b));
    return BiInterval{ext.l, ext.k, ext.s};
}

namespace detail {
struct IntvEntry {
    BiInterval iv;
    std::uint32_t q_end;
};
}  // namespace detail

// Scratch arrays for SMEM search; one per worker, reused across reads.
struct SmemScratch {
    std::vector<detail::IntvEntry> curr, prev;
    std::vector<Smem> match;
    std::vector<Smem> all;
};

// All SMEMs overlapping position i0, unfiltered by min_seed_len. Appends to
// `out`; returns the q_end of the longest match through i0 (the driver's next
// start position), or i0+1 when read[i0] has no occurrence.
inline std::size_t smem_at_unfiltered(const FMIndex& idx, std::span<const BaseCode> read,
                                      std::size_t i0, const SmemParams& params,
                                      SmemScratch& scratch, std::vector<Smem>& out) {
    const std::size_t len = read.size();
    const BaseCode b0 = read[i0];
    if (b0 > 3) return i0 + 1;
    detail::IntvEntry ik{base_interval(idx, b0), std::uint32_t(i0 + 1)};
    if (ik.iv.s < params.min_intv) return i0 + 1;

    auto& curr = scratch.curr;
    auto& prev = scratch.prev;
    auto& match = scratch.match;
    curr.clear();
    match.clear();

    // Forward pass: collect an interval whenever the size changes.
    std::size_t i = i0 + 1;
    for (; i < len; ++i) {
        if (read[i] > 3) {  // ambiguous base terminates extension
            curr.push_back(ik);
            break;
        }
        BiInterval ok = forward_ext(idx, ik.iv, read[i]);
        if (params.prefetch) {
            prefetch_hint(idx, ok.l - 1);
            prefetch_hint(idx, ok.l + ok.s - 1);
        }
        if (ok.s != ik.iv.s) {
            curr.push_back(ik);
            if (ok.s < params.min_intv) break;
        }
        ik = {ok, std::uint32_t(i + 1)};
    }
    if (i == len) curr.push_back(ik);
    std::reverse(curr.begin(), curr.end());  // longest match first
    const std::size_t next_i0 = curr.front().q_end;
    curr.swap(prev);

    // Backward passes: a candidate becomes an SMEM when it can no longer be
    // extended and no longer match survived the same round.
    for (std::int64_t bi = std::int64_t(i0) - 1; bi >= -1; --bi) {
        const int c = bi >= 0 && read[std::size_t(bi)] < 4 ? int(read[std::size_t(bi)]) : -1;
        curr.clear();
        for (const detail::IntvEntry& p : prev) {
            BiInterval ok;
            if (c >= 0) ok = backward_ext(idx, p.iv, BaseCode(c));
            if (c < 0 || ok.s < params.min_intv) {
                if (curr.empty() &&
                    (match.empty() || std::uint32_t(bi + 1) < match.back().q_begin)) {
                    match.push_back(Smem{std::uint32_t(bi + 1), p.q_end, p.iv});
                }
            } else if (curr.empty() || ok.s != curr.back().iv.s) {
                if (params.prefetch) {
                    prefetch_hint(idx, ok.k - 1);
                    prefetch_hint(idx, ok.k + ok.s - 1);
                }
                curr.push_back({ok, p.q_end});
            }
        }
        if (curr.empty()) break;
        curr.swap(prev);
    }
    std::reverse(match.begin(), match.end());  // by start coordinate
    out.insert(out.end(), match.begin(), match.end());
    return next_i0;
}

// SMEMs overlapping i0 with length >= min_seed_len and interval >= min_intv.
inline std::vector<Smem> smem_at(const FMIndex& idx, std::span<const BaseCode> read,
                                 std::size_t i0, const SmemParams& params) {
    SmemScratch scratch;
    std::vector<Smem> out;
    smem_at_unfiltered(idx, read, i0, params, scratch, out);
    std::erase_if(out, [&](const Smem& m) { return m.length() < params.min_seed_len; });
    return out;
}

// Every SMEM of the read: repeated smem_at sweeps, restarting at the q_end of
// the longest SMEM of the previous sweep. Appends deduplicated, filtered
// results to `out`.
inline void all_smems_into(const FMIndex& idx, std::span<const BaseCode> read,
                           const SmemParams& params, SmemScratch& scratch,
                           std::vector<Smem>& out) {
    auto& all = scratch.all;
    all.clear();
    std::size_t i0 = 0;
    while (i0 < read.size()) {
        i0 = smem_at_unfiltered(idx, read, i0, params, scratch, all);
    }
    std::sort(all.begin(), all.end(), [](const Smem& a, const Smem& b) {
        if (a.q_begin != b.q_begin) return a.q_begin < b.q_begin;
        return a.q_end < b.q_end;
    });
    all.erase(std::unique(all.begin(), all.end(),
                          [](const Smem& a, const Smem& b) {
                              return a.q_begin == b.q_begin && a.q_end == b.q_end;
                          }),
              all.end());
    for (const Smem& m : all)
        if (m.length() >= params.min_seed_len) out.push_back(m);
}

inline std::vector<Smem> all_smems(const FMIndex& idx, std::span<const BaseCode> read,
                                   const SmemParams& params) {
    SmemScratch scratch;
    std::vector<Smem> out;
    all_smems_into(idx, read, params, scratch, out);
    return out;
}

}  // namespace seedmap
