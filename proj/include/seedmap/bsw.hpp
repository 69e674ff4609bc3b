#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <vector>

#include "seedmap/bases.hpp"
#include "seedmap/errors.hpp"

namespace seedmap {

struct BswParams {
    std::int32_t match = 1;        // a
    std::int32_t mismatch = 4;     // penalty b; score contribution is -b
    std::int32_t gap_open = 6;     // g_o
    std::int32_t gap_extend = 1;   // g_e
    std::int32_t band_width = 100; // w (lambda)
    std::int32_t zdrop = 100;      // Z; pass INT32_MAX to disable
    std::int32_t end_bonus = 5;
};

// One extension task: query segment X against reference window Y, seeded
// with the score h0 of the seed being extended.
struct BswJob {
    std::span<const BaseCode> query;
    std::span<const BaseCode> target;
    std::int32_t h0 = 0;
    std::uint32_t job_id = 0;
};

struct BswResult {
    std::int32_t best_score = 0;   // best cell anywhere
    std::uint32_t q_end = 0;       // query bases consumed at the best cell
    std::uint32_t t_end = 0;       // target bases consumed at the best cell
    std::int32_t g_score = -1;     // best score in the last query row; -1 if never reached
    std::uint32_t g_t_end = 0;
    std::uint32_t max_off = 0;     // maximum diagonal offset with a live cell
    bool aborted = false;

    friend bool operator==(const BswResult&, const BswResult&) = default;
};

struct BswStats {
    std::uint64_t cells = 0;         // cells computed
    std::uint64_t useful_cells = 0;  // cells some lane actually required
};

// Row buffers for the scalar kernel, reusable across jobs.
struct BswScalarScratch {
    std::vector<std::int32_t> H;  // H[j] of the previous row; H[0] is the init column
    std::vector<std::int32_t> E;  // E[i+1,j] carried per column
};

// Scalar banded Smith-Waterman extension.
//
// Cells: H[i,j] = max(M, E[i,j], F[i,j]) with M = H[i-1,j-1] + S(X[i],Y[j])
// when the diagonal cell is live and 0 otherwise (the alignment must stay
// connected to the seed). E and F carry gap state with open/extend penalties.
// Column and row 0 are initialised from h0 per the gap penalties.
//
// Banding keeps |j - i| <= w. After each row the active column range is
// trimmed to the live (nonzero) cells; the range may extend to the right
// within the band while the horizontal gap state F stays positive.
//
// Aborts: a fully dead row stops the computation, as does a row whose best
// drops more than Z (diagonal-drift-adjusted) below the global best.
inline BswResult bsw_scalar(const BswJob& job, const BswParams& p, BswScalarScratch& scratch,
                            BswStats* stats = nullptr) {
    const std::int64_t qlen = std::int64_t(job.query.size());
    const std::int64_t tlen = std::int64_t(job.target.size());
    const std::int32_t go = p.gap_open, ge = p.gap_extend;

    BswResult r;
    r.best_score = job.h0;
    if (qlen == 0) {
        r.g_score = job.h0;
        return r;
    }

    std::uint64_t cell_count = 0;
    auto& H = scratch.H;
    auto& E = scratch.E;
    H.assign(std::size_t(tlen) + 1, 0);
    E.assign(std::size_t(tlen) + 1, 0);

    // Row 0 from Eq-style init: H[0,j] = max(0, h0 - (go + ge*j)).
    H[0] = job.h0;
    std::int64_t init_end = 0;
    for (std::int64_t j = 1; j <= tlen; ++j) {
        const std::int32_t v = job.h0 - (go + ge * std::int32_t(j));
        if (v <= 0) break;
        H[std::size_t(j)] = v;
        init_end = j;
    }

    std::int64_t beg = 1;
    std::int64_t end = std::min(init_end + 1, tlen);
    std::int64_t hi_water = init_end;  // H slots beyond hi_water are zero
    const std::int64_t w = p.band_width;

    std::int64_t best_i = 0, best_j = 0;
    for (std::int64_t i = 1; i <= qlen; ++i) {
        const std::int64_t row_beg = std::max<std::int64_t>({beg, i - w, 1});
        const std::int64_t row_end = std::min<std::int64_t>({end, i + w, tlen});
        const std::int64_t spill_limit = std::min<std::int64_t>(i + w, tlen);
        std::int32_t col0 = job.h0 - (go + ge * std::int32_t(i));
        if (col0 < 0) col0 = 0;

        const BaseCode qbase = job.query[std::size_t(i - 1)];
        std::int32_t f = 0;
        std::int32_t h_diag = row_beg <= tlen ? H[std::size_t(row_beg - 1)] : 0;
        std::int32_t row_best = 0;
        std::int64_t row_best_j = -1;
        std::int64_t first_alive = -1, right_alive = col0 > 0 ? 0 : -1;
        std::int64_t last_j = row_beg - 1;

        for (std::int64_t j = row_beg; j <= row_end || (f > 0 && j <= spill_limit); ++j) {
            const std::int32_t e = E[std::size_t(j)];
            const std::int32_t s =
                qbase == job.target[std::size_t(j - 1)] && qbase < 4 ? p.match : -p.mismatch;
            const std::int32_t m = h_diag > 0 ? h_diag + s : 0;
            const std::int32_t h = std::max({m, e, f});
            h_diag = H[std::size_t(j)];
            H[std::size_t(j)] = h;
            E[std::size_t(j)] = std::max({h - go, e - ge, 0});
            f = std::max({h - go, f - ge, 0});
            last_j = j;
            ++cell_count;
            if (h > 0) {
                if (first_alive < 0) first_alive = j;
                right_alive = j;
                const std::uint32_t off = std::uint32_t(std::abs(j - i));
                if (off > r.max_off) r.max_off = off;
            }
            if (h > row_best) {
                row_best = h;
                row_best_j = j;
            }
            if (h > r.best_score) {
                r.best_score = h;
                best_i = i;
                best_j = j;
                r.q_end = std::uint32_t(i);
                r.t_end = std::uint32_t(j);
            }
        }

        // Stale previous-row values beyond this row's reach are dead cells.
        for (std::int64_t j = last_j + 1; j <= hi_water; ++j) H[std::size_t(j)] = 0;
        hi_water = last_j;
        H[0] = col0;

        if (i == qlen) {
            r.g_score = col0;
            r.g_t_end = 0;
            for (std::int64_t j = row_beg; j <= last_j; ++j) {
                if (H[std::size_t(j)] > r.g_score) {
                    r.g_score = H[std::size_t(j)];
                    r.g_t_end = std::uint32_t(j);
                }
            }
        }

        if (first_alive < 0 && col0 == 0) {  // fully dead row
            r.aborted = i < qlen;
            break;
        }
        if (row_best > 0 && p.zdrop != std::numeric_limits<std::int32_t>::max()) {
            const std::int64_t drift =
                std::abs((i - best_i) - (row_best_j - best_j));
            if (std::int64_t(r.best_score) - row_best > std::int64_t(p.zdrop) + drift * ge) {
                r.aborted = true;
                break;
            }
        }

        beg = col0 > 0 ? 1 : first_alive;
        end = std::min(right_alive + 1, tlen);
    }

    if (stats) {
        stats->cells += cell_count;
        stats->useful_cells += cell_count;
    }
    return r;
}

inline BswResult bsw_scalar(const BswJob& job, const BswParams& p, BswStats* stats = nullptr) {
    BswScalarScratch scratch;
    return bsw_scalar(job, p, scratch, stats);
}

enum class BswPrecision : std::uint8_t { Bits8, Bits16, Bits32 };

// 8-bit lanes iff the maximum attainable score fits below the saturation
// margin; scores beyond 16 bits fall back to the 32-bit scalar path.
inline BswPrecision select_precision(const BswJob& job, const BswParams& p) {
    const std::int64_t bound =
        std::int64_t(job.h0) + p.match * std::int64_t(job.query.size()) + p.end_bonus;
    if (bound <= 254) return BswPrecision::Bits8;
    if (bound <= 32766) return BswPrecision::Bits16;
    return BswPrecision::Bits32;
}

}  // namespace seedmap
