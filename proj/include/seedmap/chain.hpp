#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "seedmap/sal.hpp"

namespace seedmap {

struct ChainParams {
    std::uint64_t max_chain_gap = 10000;
    std::uint64_t band_width = 100;   // diagonal drift bound, same w as BSW
    double drop_ratio = 0.5;
};

// A run of collinear, nearby seeds. Seeds live in ChainSet::seeds[begin,end),
// sorted by ref_pos.
struct Chain {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint64_t weight = 0;  // query coverage: sum of seed lengths minus overlaps
    std::uint32_t anchor = 0;  // index of the longest seed
    bool is_reverse = false;
};

// Flat chain storage, reusable across reads.
struct ChainSet {
    std::vector<SeedHit> seeds;
    std::vector<Chain> chains;

    // scratch
    std::vector<std::uint32_t> chain_of;
    std::vector<std::uint32_t> fill;
    std::vector<SeedHit> sorted;

    void clear() {
        seeds.clear();
        chains.clear();
    }
};

namespace detail {
inline bool chain_compatible(const SeedHit& last, const SeedHit& hit, const ChainParams& p) {
    if (hit.is_reverse != last.is_reverse) return false;
    if (hit.ref_pos <= last.ref_pos || hit.q_begin <= last.q_begin) return false;
    const std::uint64_t dr = hit.ref_pos - last.ref_pos;
    const std::uint64_t dq = hit.q_begin - last.q_begin;
    if (dr > p.max_chain_gap || dq > p.max_chain_gap) return false;
    const std::uint64_t drift = dr > dq ? dr - dq : dq - dr;
    return drift <= p.band_width;
}
}  // namespace detail

// Greedy single-linkage chaining. Hits are sorted by (strand, ref_pos); each
// hit joins the most recent compatible chain or starts a new one. Chains come
// out sorted by descending weight.
inline void chain_seeds(const std::vector<SeedHit>& hits, const ChainParams& params,
                        ChainSet& out) {
    out.clear();
    if (hits.empty()) return;

    auto& sorted = out.sorted;
    sorted = hits;
    std::sort(sorted.begin(), sorted.end(), [](const SeedHit& a, const SeedHit& b) {
        if (a.is_reverse != b.is_reverse) return !a.is_reverse;
        if (a.ref_pos != b.ref_pos) return a.ref_pos < b.ref_pos;
        if (a.q_begin != b.q_begin) return a.q_begin < b.q_begin;
        return a.q_end < b.q_end;
    });

    // Assign a chain id per hit; `last` tracks each open chain's tail seed.
    auto& chain_of = out.chain_of;
    chain_of.resize(sorted.size());
    std::vector<SeedHit>& tails = out.seeds;  // borrowed as scratch, rebuilt below
    tails.clear();
    for (std::uint32_t h = 0; h < sorted.size(); ++h) {
        bool placed = false;
        for (std::uint32_t c = std::uint32_t(tails.size()); c-- > 0;) {
            if (detail::chain_compatible(tails[c], sorted[h], params)) {
                chain_of[h] = c;
                tails[c] = sorted[h];
                placed = true;
                break;
            }
        }
        if (!placed) {
            chain_of[h] = std::uint32_t(tails.size());
            tails.push_back(sorted[h]);
        }
    }
    const std::uint32_t n_chains = std::uint32_t(tails.size());

    // Scatter hits into contiguous per-chain runs.
    auto& fill = out.fill;
    fill.assign(n_chains + 1, 0);
    for (std::uint32_t h = 0; h < sorted.size(); ++h) ++fill[chain_of[h] + 1];
    for (std::uint32_t c = 0; c < n_chains; ++c) fill[c + 1] += fill[c];
    out.seeds.assign(sorted.size(), SeedHit{});
    out.chains.assign(n_chains, Chain{});
    for (std::uint32_t c = 0; c < n_chains; ++c) {
        out.chains[c].begin = fill[c];
        out.chains[c].end = fill[c];
    }
    for (std::uint32_t h = 0; h < sorted.size(); ++h)
        out.seeds[out.chains[chain_of[h]].end++] = sorted[h];

    for (Chain& ch : out.chains) {
        ch.is_reverse = out.seeds[ch.begin].is_reverse;
        std::uint64_t covered_to = 0;
        std::uint32_t best_len = 0;
        for (std::uint32_t i = ch.begin; i < ch.end; ++i) {
            const SeedHit& s = out.seeds[i];
            const std::uint64_t from = std::max<std::uint64_t>(s.q_begin, covered_to);
            if (s.q_end > from) ch.weight += s.q_end - from;
            covered_to = std::max<std::uint64_t>(covered_to, s.q_end);
            const std::uint32_t len = s.q_end - s.q_begin;
            if (len > best_len) {
                best_len = len;
                ch.anchor = i;
            }
        }
    }
    std::sort(out.chains.begin(), out.chains.end(), [&](const Chain& a, const Chain& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        if (out.seeds[a.begin].ref_pos != out.seeds[b.begin].ref_pos)
            return out.seeds[a.begin].ref_pos < out.seeds[b.begin].ref_pos;
        return a.is_reverse < b.is_reverse;
    });
}

// One seed's extension work order, in oriented-read coordinates (reverse-
// strand seeds extend the reverse-complemented read against the forward
// reference, so every window stays in [0, n_ref)).
struct ExtensionJobDesc {
    SeedHit seed;
    std::uint32_t oriented_begin = 0;  // seed span on the oriented read
    std::uint32_t oriented_end = 0;
    bool has_left = false;
    bool has_right = false;
    std::uint64_t left_ref_begin = 0;    // left window is [left_ref_begin, seed ref_pos)
    std::uint64_t right_ref_begin = 0;   // right window is [right_ref_begin, right_ref_end)
    std::uint64_t right_ref_end = 0;
};

inline constexpr std::uint64_t kRefWindowSlack = 16;

// Drops chains lighter than drop_ratio x best weight, then emits left/right
// extension jobs for every surviving seed. Reference windows are query
// length + band + slack, clamped to [0, n_ref).
inline void select_extension_jobs(const ChainSet& chains, std::uint32_t read_len,
                                  std::uint64_t n_ref, const ChainParams& params,
                                  std::vector<ExtensionJobDesc>& out) {
    out.clear();
    if (chains.chains.empty()) return;
    const std::uint64_t best_weight = chains.chains.front().weight;
    for (const Chain& ch : chains.chains) {
        if (double(ch.weight) < params.drop_ratio * double(best_weight)) continue;
        for (std::uint32_t i = ch.begin; i < ch.end; ++i) {
            const SeedHit& seed = chains.seeds[i];
            ExtensionJobDesc job;
            job.seed = seed;
            if (seed.is_reverse) {
                job.oriented_begin = read_len - seed.q_end;
                job.oriented_end = read_len - seed.q_begin;
            } else {
                job.oriented_begin = seed.q_begin;
                job.oriented_end = seed.q_end;
            }
            const std::uint64_t seed_len = seed.q_end - seed.q_begin;
            if (job.oriented_begin > 0) {
                job.has_left = true;
                const std::uint64_t want =
                    std::uint64_t(job.oriented_begin) + params.band_width + kRefWindowSlack;
                job.left_ref_begin = seed.ref_pos >= want ? seed.ref_pos - want : 0;
            }
            if (job.oriented_end < read_len) {
                job.has_right = true;
                job.right_ref_begin = seed.ref_pos + seed_len;
                const std::uint64_t want = std::uint64_t(read_len - job.oriented_end) +
                                           params.band_width + kRefWindowSlack;
                job.right_ref_end = std::min<std::uint64_t>(n_ref, job.right_ref_begin + want);
                // The target window may come out empty for seeds flush at the
                // reference end; the kernel handles an empty target.
                job.right_ref_end = std::max(job.right_ref_end, job.right_ref_begin);
            }
            out.push_back(job);
        }
    }
}

}  // namespace seedmap
