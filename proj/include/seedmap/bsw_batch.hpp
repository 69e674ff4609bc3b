#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "seedmap/bsw.hpp"

namespace seedmap {

// Reusable buffers for the batched kernel: SoA cell/sequence arrays plus the
// shape-sort bookkeeping.
struct BswBatchScratch {
    BswScalarScratch scalar;
    std::vector<std::uint32_t> idx8, idx16, order_tmp, counts, rerun;
    std::vector<std::uint8_t> h8, e8;
    std::vector<std::int16_t> h16, e16;
    std::vector<std::uint8_t> qsoa, tsoa;
};

namespace detail {

// Stable counting sort of job indices by (qlen, tlen): LSD passes over tlen
// then qlen so same-shape jobs land in the same lane group.
inline void sort_by_shape(std::span<const BswJob> jobs, std::vector<std::uint32_t>& idx,
                          std::vector<std::uint32_t>& counts, std::vector<std::uint32_t>& tmp) {
    auto pass = [&](auto key) {
        std::uint32_t max_key = 0;
        for (std::uint32_t i : idx) max_key = std::max(max_key, key(i));
        counts.assign(std::size_t(max_key) + 1, 0);
        for (std::uint32_t i : idx) ++counts[key(i)];
        std::uint32_t sum = 0;
        for (std::uint32_t& c : counts) {
            const std::uint32_t here = c;
            c = sum;
            sum += here;
        }
        tmp.resize(idx.size());
        for (std::uint32_t i : idx) tmp[counts[key(i)]++] = i;
        idx.swap(tmp);
    };
    pass([&](std::uint32_t i) { return std::uint32_t(jobs[i].target.size()); });
    pass([&](std::uint32_t i) { return std::uint32_t(jobs[i].query.size()); });
}

// One group of up to W same-precision jobs, advanced row by row in lockstep.
// Every per-cell and per-row decision mirrors bsw_scalar exactly; lanes carry
// their own band bounds, trims and abort state, so results are bit-identical
// to the scalar kernel (modulo 8-bit saturation, which flags the lane for a
// rerun instead of producing a result).
template <int W, typename CellT>
inline void bsw_group(std::span<const BswJob> jobs, const std::uint32_t* lane_ids, int nlanes,
                      const BswParams& p, std::vector<CellT>& Hbuf, std::vector<CellT>& Ebuf,
                      std::vector<std::uint8_t>& qbuf, std::vector<std::uint8_t>& tbuf,
                      std::vector<BswResult>& results, std::vector<std::uint32_t>& rerun,
                      BswStats* stats) {
    constexpr std::int16_t kSat = std::is_same_v<CellT, std::uint8_t> ? 254 : 32766;
    const std::int32_t go = p.gap_open, ge = p.gap_extend;
    const std::int64_t w = p.band_width;
    const std::int16_t ma16 = std::int16_t(p.match), mm16 = std::int16_t(p.mismatch);
    const std::int16_t go16 = std::int16_t(go), ge16 = std::int16_t(ge);

    // All lockstep lane state is 16-bit so the lane loop runs as uniform
    // 16-bit SIMD; scores are capped at kSat and sequence lengths for grouped
    // jobs are capped by the dispatcher, so nothing here can overflow.
    std::int32_t qlen[W], tlen[W], h0v[W];
    std::int32_t beg[W], end[W], hi_water[W];
    std::int32_t gscore[W], gte[W], col0[W];
    std::int32_t done[W], ab[W];
    std::int16_t best[W], best_i[W], best_j[W], moff[W];
    std::int16_t f[W], hdiag[W];
    std::int16_t row_best[W], row_best_j[W], first_alive[W], right_alive[W];
    std::int16_t row_beg[W], row_end[W], spill[W], last_j[W];
    std::int16_t qrow[W];
    std::int16_t satf[W], rowlive[W];

    std::int32_t max_q = 0, max_t = 0;
    for (int l = 0; l < W; ++l) {
        if (l < nlanes) {
            const BswJob& job = jobs[lane_ids[l]];
            qlen[l] = std::int32_t(job.query.size());
            tlen[l] = std::int32_t(job.target.size());
            h0v[l] = job.h0;
            done[l] = 0;
        } else {
            qlen[l] = tlen[l] = 0;
            h0v[l] = 0;
            done[l] = 1;
        }
        max_q = std::max(max_q, qlen[l]);
        max_t = std::max(max_t, tlen[l]);
        ab[l] = satf[l] = 0;
        best[l] = std::int16_t(h0v[l]);
        best_i[l] = best_j[l] = 0;
        gscore[l] = -1;
        gte[l] = moff[l] = 0;
    }

    Hbuf.assign(std::size_t(max_t + 1) * W, CellT(0));
    Ebuf.assign(std::size_t(max_t + 1) * W, CellT(0));
    qbuf.assign(std::size_t(max_q) * W, 4);
    tbuf.assign(std::size_t(max_t) * W, 4);
    // Raw pointers: byte-typed stores through the vectors would otherwise be
    // assumed to clobber the vectors' own data pointers, blocking
    // vectorization of the lane loop.
    CellT* const H = Hbuf.data();
    CellT* const E = Ebuf.data();
    const std::uint8_t* const q = qbuf.data();
    const std::uint8_t* const t = tbuf.data();
    for (int l = 0; l < nlanes; ++l) {
        const BswJob& job = jobs[lane_ids[l]];
        for (std::int32_t i = 0; i < qlen[l]; ++i) qbuf[std::size_t(i) * W + l] = job.query[i];
        for (std::int32_t j = 0; j < tlen[l]; ++j) tbuf[std::size_t(j) * W + l] = job.target[j];
    }

    for (int l = 0; l < W; ++l) {
        if (done[l]) continue;
        H[std::size_t(0) * W + l] = CellT(h0v[l]);
        std::int32_t init_end = 0;
        for (std::int32_t j = 1; j <= tlen[l]; ++j) {
            const std::int32_t v = h0v[l] - (go + ge * j);
            if (v <= 0) break;
            H[std::size_t(j) * W + l] = CellT(v);
            init_end = j;
        }
        beg[l] = 1;
        end[l] = std::min(init_end + 1, tlen[l]);
        hi_water[l] = init_end;
    }

    for (std::int32_t i = 1; i <= max_q; ++i) {
        std::int32_t jmin = std::numeric_limits<std::int32_t>::max(), jcap = 0;
        bool any_row = false;
        int live_count = 0;
        for (int l = 0; l < W; ++l) {
            rowlive[l] = std::int16_t(!done[l] && i <= qlen[l]);
            if (!done[l]) ++live_count;
            if (!rowlive[l]) continue;
            row_beg[l] = std::int16_t(std::max<std::int64_t>({beg[l], std::int64_t(i) - w, 1}));
            row_end[l] =
                std::int16_t(std::min<std::int64_t>({end[l], std::int64_t(i) + w, tlen[l]}));
            spill[l] = std::int16_t(std::min<std::int64_t>(std::int64_t(i) + w, tlen[l]));
            col0[l] = std::max(h0v[l] - (go + ge * i), 0);
            f[l] = 0;
            hdiag[l] =
                row_beg[l] <= tlen[l] ? std::int16_t(H[std::size_t(row_beg[l] - 1) * W + l]) : std::int16_t(0);
            row_best[l] = 0;
            row_best_j[l] = -1;
            first_alive[l] = -1;
            right_alive[l] = std::int16_t(col0[l] > 0 ? 0 : -1);
            last_j[l] = std::int16_t(row_beg[l] - 1);
            qrow[l] = q[std::size_t(i - 1) * W + l];
            jmin = std::min<std::int32_t>(jmin, row_beg[l]);
            jcap = std::max<std::int32_t>(jcap, spill[l]);
            any_row = true;
        }
        if (live_count == 0) break;
        if (!any_row) continue;
        const std::int16_t ii = std::int16_t(i);

        for (std::int32_t j = jmin; j <= jcap; ++j) {
            const std::size_t hbase = std::size_t(j) * W;
            const std::size_t tbase = std::size_t(j - 1) * W;
            const std::int16_t jj = std::int16_t(j);
            std::int16_t active = 0;
            // Branch-free lane loop in uniform 16-bit arithmetic: inactive
            // lanes write their own old values back, so the compiler can
            // vectorize across lanes.
            for (int l = 0; l < W; ++l) {
                // All-ones when the cell is inside this lane's active window.
                const std::int16_t mask = std::int16_t(
                    -(std::int32_t(rowlive[l]) & std::int32_t(jj >= row_beg[l]) &
                      (std::int32_t(jj <= row_end[l]) |
                       (std::int32_t(f[l] > 0) & std::int32_t(jj <= spill[l])))));
                const std::int16_t old_h = std::int16_t(H[hbase + std::size_t(l)]);
                const std::int16_t e = std::int16_t(E[hbase + std::size_t(l)]);
                const std::int16_t tb = t[tbase + std::size_t(l)];
                const std::int16_t is_match =
                    std::int16_t(std::int32_t(qrow[l] == tb) & std::int32_t(qrow[l] < 4));
                const std::int16_t s =
                    std::int16_t(-mm16 + (std::int16_t(ma16 + mm16) & std::int16_t(-is_match)));
                const std::int16_t m =
                    std::int16_t((hdiag[l] + s) & -std::int16_t(hdiag[l] > 0));
                std::int16_t h = std::max(std::max(m, e), f[l]);
                satf[l] = std::int16_t(satf[l] | (mask & std::int16_t(-(h > kSat))));
                h = std::min(h, kSat);
                H[hbase + std::size_t(l)] = CellT((h & mask) | (old_h & ~mask));
                const std::int16_t new_e =
                    std::max(std::max(std::int16_t(h - go16), std::int16_t(e - ge16)),
                             std::int16_t(0));
                E[hbase + std::size_t(l)] = CellT((new_e & mask) | (e & ~mask));
                const std::int16_t new_f =
                    std::max(std::max(std::int16_t(h - go16), std::int16_t(f[l] - ge16)),
                             std::int16_t(0));
                f[l] = std::int16_t((new_f & mask) | (f[l] & ~mask));
                hdiag[l] = std::int16_t((old_h & mask) | (hdiag[l] & ~mask));
                last_j[l] = std::int16_t((jj & mask) | (last_j[l] & ~mask));
                const std::int16_t amask = std::int16_t(mask & std::int16_t(-(h > 0)));
                const std::int16_t famask =
                    std::int16_t(amask & std::int16_t(-(first_alive[l] < 0)));
                first_alive[l] = std::int16_t((jj & famask) | (first_alive[l] & ~famask));
                right_alive[l] = std::int16_t((jj & amask) | (right_alive[l] & ~amask));
                const std::int16_t off =
                    std::max(std::int16_t(jj - ii), std::int16_t(ii - jj));
                const std::int16_t omask =
                    std::int16_t(amask & std::int16_t(-(off > moff[l])));
                moff[l] = std::int16_t((off & omask) | (moff[l] & ~omask));
                const std::int16_t rmask =
                    std::int16_t(mask & std::int16_t(-(h > row_best[l])));
                row_best[l] = std::int16_t((h & rmask) | (row_best[l] & ~rmask));
                row_best_j[l] = std::int16_t((jj & rmask) | (row_best_j[l] & ~rmask));
                const std::int16_t bmask = std::int16_t(mask & std::int16_t(-(h > best[l])));
                best[l] = std::int16_t((h & bmask) | (best[l] & ~bmask));
                best_i[l] = std::int16_t((ii & bmask) | (best_i[l] & ~bmask));
                best_j[l] = std::int16_t((jj & bmask) | (best_j[l] & ~bmask));
                active = std::int16_t(active - mask);
            }
            if (active == 0) {
                // A lane past its window cannot re-enter it (f stays 0), so
                // the only future work starts at a not-yet-reached row_beg.
                std::int32_t next = std::numeric_limits<std::int32_t>::max();
                for (int l = 0; l < W; ++l)
                    if (rowlive[l] && row_beg[l] > j)
                        next = std::min<std::int32_t>(next, row_beg[l]);
                if (next == std::numeric_limits<std::int32_t>::max()) break;
                j = next - 1;
                continue;
            }
            if (stats) {
                stats->cells += W;
                stats->useful_cells += std::uint64_t(active);
            }
        }

        for (int l = 0; l < W; ++l) {
            if (!rowlive[l]) continue;
            for (std::int32_t j = last_j[l] + 1; j <= hi_water[l]; ++j)
                H[std::size_t(j) * W + l] = CellT(0);
            hi_water[l] = last_j[l];
            H[std::size_t(0) * W + l] = CellT(col0[l]);

            if (i == qlen[l]) {
                gscore[l] = col0[l];
                gte[l] = 0;
                for (std::int32_t j = row_beg[l]; j <= last_j[l]; ++j) {
                    const std::int32_t h = std::int32_t(H[std::size_t(j) * W + l]);
                    if (h > gscore[l]) {
                        gscore[l] = h;
                        gte[l] = j;
                    }
                }
            }
            if (first_alive[l] < 0 && col0[l] == 0) {
                ab[l] = i < qlen[l];
                done[l] = 1;
                continue;
            }
            if (row_best[l] > 0 && p.zdrop != std::numeric_limits<std::int32_t>::max()) {
                const std::int64_t drift = std::abs(std::int64_t(i - best_i[l]) -
                                                    std::int64_t(row_best_j[l] - best_j[l]));
                if (std::int64_t(best[l]) - row_best[l] > std::int64_t(p.zdrop) + drift * ge) {
                    ab[l] = 1;
                    done[l] = 1;
                    continue;
                }
            }
            if (i == qlen[l]) {
                done[l] = 1;
                continue;
            }
            beg[l] = col0[l] > 0 ? 1 : first_alive[l];
            end[l] = std::min(right_alive[l] + 1, tlen[l]);
        }
    }

    for (int l = 0; l < nlanes; ++l) {
        if (satf[l]) {
            rerun.push_back(lane_ids[l]);
            continue;
        }
        BswResult& r = results[lane_ids[l]];
        r.best_score = best[l];
        r.q_end = std::uint32_t(best_i[l]);
        r.t_end = std::uint32_t(best_j[l]);
        r.g_score = gscore[l];
        r.g_t_end = std::uint32_t(gte[l]);
        r.max_off = std::uint32_t(moff[l]);
        r.aborted = ab[l];
    }
}

template <int W>
inline void run_grouped(std::span<const BswJob> jobs, const BswParams& p, BswBatchScratch& s,
                        std::vector<BswResult>& results, BswStats* stats) {
    for (std::size_t g = 0; g < s.idx8.size(); g += W) {
        const int nl = int(std::min<std::size_t>(W, s.idx8.size() - g));
        bsw_group<W, std::uint8_t>(jobs, s.idx8.data() + g, nl, p, s.h8, s.e8, s.qsoa, s.tsoa,
                                   results, s.rerun, stats);
    }
    for (std::size_t g = 0; g < s.idx16.size(); g += W) {
        const int nl = int(std::min<std::size_t>(W, s.idx16.size() - g));
        bsw_group<W, std::int16_t>(jobs, s.idx16.data() + g, nl, p, s.h16, s.e16, s.qsoa, s.tsoa,
                                   results, s.rerun, stats);
    }
}

}  // namespace detail

// Batched extension over many independent jobs. Jobs are sorted by shape,
// packed W to a group at 8- or 16-bit precision per job score bound, and run
// in lockstep. Degenerate or 32-bit jobs run through the scalar kernel, as do
// lanes that saturate at 8 bits. results[i] corresponds to jobs[i].
inline void bsw_batch(std::span<const BswJob> jobs, const BswParams& p, std::uint32_t lane_width,
                      BswBatchScratch& scratch, std::vector<BswResult>& results,
                      BswStats* stats = nullptr) {
    results.assign(jobs.size(), BswResult{});
    scratch.idx8.clear();
    scratch.idx16.clear();
    scratch.rerun.clear();

    for (std::uint32_t i = 0; i < jobs.size(); ++i) {
        const BswJob& job = jobs[i];
        // Lane state is 16-bit, so grouped jobs must keep coordinates and
        // scores within int16 range; anything longer runs through scalar.
        if (lane_width == 1 || job.query.empty() || job.target.empty() ||
            job.query.size() > 32000 || job.target.size() > 32000) {
            results[i] = bsw_scalar(job, p, scratch.scalar, stats);
            continue;
        }
        switch (select_precision(job, p)) {
            case BswPrecision::Bits8: scratch.idx8.push_back(i); break;
            case BswPrecision::Bits16: scratch.idx16.push_back(i); break;
            case BswPrecision::Bits32: results[i] = bsw_scalar(job, p, scratch.scalar, stats); break;
        }
    }
    if (lane_width == 1) return;

    detail::sort_by_shape(jobs, scratch.idx8, scratch.counts, scratch.order_tmp);
    detail::sort_by_shape(jobs, scratch.idx16, scratch.counts, scratch.order_tmp);

    switch (lane_width) {
        case 8: detail::run_grouped<8>(jobs, p, scratch, results, stats); break;
        case 16: detail::run_grouped<16>(jobs, p, scratch, results, stats); break;
        case 32: detail::run_grouped<32>(jobs, p, scratch, results, stats); break;
        case 64: detail::run_grouped<64>(jobs, p, scratch, results, stats); break;
        default: throw InvariantError("bsw_batch: lane width must be 1, 8, 16, 32 or 64");
    }
    for (std::uint32_t id : scratch.rerun) results[id] = bsw_scalar(jobs[id], p, scratch.scalar, stats);
}

inline std::vector<BswResult> bsw_batch(std::span<const BswJob> jobs, const BswParams& p,
                                        std::uint32_t lane_width, BswStats* stats = nullptr) {
    BswBatchScratch scratch;
    std::vector<BswResult> results;
    bsw_batch(jobs, p, lane_width, scratch, results, stats);
    return results;
}

}  // namespace seedmap
