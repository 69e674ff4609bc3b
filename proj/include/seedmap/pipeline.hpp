#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "seedmap/bsw_batch.hpp"
#include "seedmap/chain.hpp"
#include "seedmap/fmindex.hpp"
#include "seedmap/refseq.hpp"
#include "seedmap/sal.hpp"
#include "seedmap/smem.hpp"

namespace seedmap {

struct MapperParams {
    SmemParams smem;
    ChainParams chain;
    BswParams bsw;
    std::uint32_t lane_width = 16;
};

// One accepted alignment of a read, in forward-reference coordinates.
struct Alignment {
    std::int32_t score = 0;
    std::uint64_t ref_begin = 0;
    std::uint64_t ref_end = 0;
    std::uint32_t q_begin = 0;  // original read coordinates, half-open
    std::uint32_t q_end = 0;
    bool is_reverse = false;
    std::uint64_t interval_size = 0;  // occurrence count of the seed
};

struct MappingRecord {
    const ReadRecord* read = nullptr;
    std::vector<Alignment> alignments;  // sorted by descending score
};

// Keeps an alignment unless its query span is contained in an already-kept,
// higher-ranked alignment's span. Ordering (score desc, then position) makes
// the kept set independent of input order.
inline void post_filter(std::vector<Alignment>& alignments) {
    std::sort(alignments.begin(), alignments.end(), [](const Alignment& a, const Alignment& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.q_begin != b.q_begin) return a.q_begin < b.q_begin;
        if (a.q_end != b.q_end) return a.q_end < b.q_end;
        if (a.ref_begin != b.ref_begin) return a.ref_begin < b.ref_begin;
        return a.is_reverse < b.is_reverse;
    });
    std::size_t kept = 0;
    for (std::size_t i = 0; i < alignments.size(); ++i) {
        bool contained = false;
        for (std::size_t k = 0; k < kept && !contained; ++k)
            contained = alignments[k].q_begin <= alignments[i].q_begin &&
                        alignments[i].q_end <= alignments[k].q_end;
        if (!contained) alignments[kept++] = alignments[i];
    }
    alignments.resize(kept);
}

namespace detail {
inline void append_number(std::string& out, std::uint64_t v) {
    char buf[24];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, p);
}
inline void append_number(std::string& out, std::int64_t v) {
    char buf[24];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, p);
}
}  // namespace detail

// Tab-separated, one line per alignment:
// read_id  ref_record  pos(1-based)  strand  score  q_begin  q_end  occ
// Unmapped reads emit "read_id<TAB>*".
inline void format_record(const MappingRecord& rec,
                          const std::vector<RecordBoundary>& boundaries, std::string& out) {
    if (rec.alignments.empty()) {
        out += rec.read->id;
        out += "\t*\n";
        return;
    }
    for (const Alignment& a : rec.alignments) {
        // record containing the alignment start
        std::size_t lo = 0, hi = boundaries.size();
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (boundaries[mid].offset <= a.ref_begin) lo = mid; else hi = mid;
        }
        out += rec.read->id;
        out += '\t';
        out += boundaries[lo].name;
        out += '\t';
        detail::append_number(out, a.ref_begin - boundaries[lo].offset + 1);
        out += '\t';
        out += a.is_reverse ? '-' : '+';
        out += '\t';
        detail::append_number(out, std::int64_t(a.score));
        out += '\t';
        detail::append_number(out, std::uint64_t(a.q_begin));
        out += '\t';
        detail::append_number(out, std::uint64_t(a.q_end));
        out += '\t';
        detail::append_number(out, a.interval_size);
        out += '\n';
    }
}

// Per-stage wall-clock accumulators, filled when timing is enabled.
struct StageTimes {
    double smem_s = 0, sal_s = 0, chain_s = 0, bsw_s = 0, format_s = 0;
    std::uint64_t reads = 0, seeds = 0, ext_jobs = 0;
};

// Single-threaded batch mapper. All scratch lives in member arenas that only
// grow, so steady-state batches allocate nothing.
class MapperEngine {
  public:
    MapperEngine(const FMIndex& idx, std::span<const BaseCode> ref_bases,
                 const std::vector<RecordBoundary>& boundaries, const MapperParams& params)
        : idx_(idx), ref_(ref_bases), boundaries_(boundaries), params_(params) {}

    const MapperParams& params() const { return params_; }
    BswStats& bsw_stats() { return bsw_stats_; }

    // SMEM -> SAL -> CHAIN -> batched BSW (left then right phase) -> filter ->
    // format, each stage over the whole batch before the next. Appends output
    // lines for every read, in batch order, to `out`.
    void process_batch(std::span<const ReadRecord> reads, std::string& out) {
        seed_batch(reads);
        extend_batch(reads);
        emit_batch(reads, out);
    }

    // --- individual stages (exposed for the bench command) -----------------

    void seed_batch(std::span<const ReadRecord> reads) {
        rc_arena_.clear();
        rc_off_.assign(reads.size() + 1, 0);
        for (std::size_t r = 0; r < reads.size(); ++r) {
            for (auto it = reads[r].bases.rbegin(); it != reads[r].bases.rend(); ++it)
                rc_arena_.push_back(complement(*it));
            rc_off_[r + 1] = rc_arena_.size();
        }

        descs_.clear();
        desc_read_end_.assign(reads.size(), 0);
        for (std::size_t r = 0; r < reads.size(); ++r) {
            smems_.clear();
            all_smems_into(idx_, reads[r].bases, params_.smem, smem_scratch_, smems_);
            hits_.clear();
            for (const Smem& m : smems_)
                interval_to_hits(idx_, m, params_.smem.max_occ, hits_);
            chain_seeds(hits_, params_.chain, chains_);
            select_extension_jobs(chains_, std::uint32_t(reads[r].bases.size()), idx_.n_ref,
                                  params_.chain, jobs_tmp_);
            descs_.insert(descs_.end(), jobs_tmp_.begin(), jobs_tmp_.end());
            desc_read_end_[r] = std::uint32_t(descs_.size());
        }
    }

    void extend_batch(std::span<const ReadRecord> reads) {
        const std::int32_t a = params_.bsw.match;

        // Left phase: reversed query prefix vs reversed reference window,
        // seeded with the seed's own match score.
        lq_arena_.clear();
        lt_arena_.clear();
        lq_range_.assign(descs_.size(), {0, 0});
        lt_range_.assign(descs_.size(), {0, 0});
        desc_left_job_.assign(descs_.size(), kNoJob);
        left_jobs_.clear();
        for (std::size_t d = 0, r = 0; d < descs_.size(); ++d) {
            while (d >= desc_read_end_[r]) ++r;
            const ExtensionJobDesc& jd = descs_[d];
            if (!jd.has_left) continue;
            const std::span<const BaseCode> oriented = oriented_read(reads, r, jd);
            lq_range_[d] = {lq_arena_.size(), jd.oriented_begin};
            for (std::uint32_t i = jd.oriented_begin; i-- > 0;) lq_arena_.push_back(oriented[i]);
            const std::uint64_t t_len = jd.seed.ref_pos - jd.left_ref_begin;
            lt_range_[d] = {lt_arena_.size(), t_len};
            for (std::uint64_t i = jd.seed.ref_pos; i-- > jd.left_ref_begin;)
                lt_arena_.push_back(ref_[i]);
        }
        for (std::size_t d = 0; d < descs_.size(); ++d) {
            if (!descs_[d].has_left) continue;
            desc_left_job_[d] = std::uint32_t(left_jobs_.size());
            BswJob job;
            job.query = std::span(lq_arena_).subspan(lq_range_[d].first, lq_range_[d].second);
            job.target = std::span(lt_arena_).subspan(lt_range_[d].first, lt_range_[d].second);
            job.h0 = a * std::int32_t(descs_[d].seed.q_end - descs_[d].seed.q_begin);
            job.job_id = std::uint32_t(d);
            left_jobs_.push_back(job);
        }
        bsw_batch(left_jobs_, params_.bsw, params_.lane_width, bsw_scratch_, left_res_,
                  &bsw_stats_);

        // Resolve the left side per seed: prefer the full-prefix (last row)
        // score when it is within end_bonus of the best local score.
        left_score_.assign(descs_.size(), 0);
        left_q_.assign(descs_.size(), 0);
        left_t_.assign(descs_.size(), 0);
        for (std::size_t d = 0; d < descs_.size(); ++d) {
            const ExtensionJobDesc& jd = descs_[d];
            const std::int32_t seed_score = a * std::int32_t(jd.seed.q_end - jd.seed.q_begin);
            if (desc_left_job_[d] == kNoJob) {
                left_score_[d] = seed_score;
                continue;
            }
            const BswResult& res = left_res_[desc_left_job_[d]];
            if (res.g_score > 0 && res.g_score + params_.bsw.end_bonus >= res.best_score) {
                left_score_[d] = res.g_score;
                left_q_[d] = jd.oriented_begin;  // prefix fully consumed
                left_t_[d] = res.g_t_end;
            } else {
                left_score_[d] = res.best_score;
                left_q_[d] = res.q_end;
                left_t_[d] = res.t_end;
            }
        }

        // Right phase: query suffix (forward orientation) vs the window after
        // the seed, seeded with the resolved left-side score.
        desc_right_job_.assign(descs_.size(), kNoJob);
        right_jobs_.clear();
        for (std::size_t d = 0, r = 0; d < descs_.size(); ++d) {
            while (d >= desc_read_end_[r]) ++r;
            const ExtensionJobDesc& jd = descs_[d];
            if (!jd.has_right) continue;
            const std::span<const BaseCode> oriented = oriented_read(reads, r, jd);
            desc_right_job_[d] = std::uint32_t(right_jobs_.size());
            BswJob job;
            job.query = oriented.subspan(jd.oriented_end);
            job.target = std::span(ref_).subspan(jd.right_ref_begin,
                                                 jd.right_ref_end - jd.right_ref_begin);
            job.h0 = left_score_[d];
            job.job_id = std::uint32_t(d);
            right_jobs_.push_back(job);
        }
        bsw_batch(right_jobs_, params_.bsw, params_.lane_width, bsw_scratch_, right_res_,
                  &bsw_stats_);
    }

    void emit_batch(std::span<const ReadRecord> reads, std::string& out) {
        rec_.alignments.clear();
        for (std::size_t r = 0; r < reads.size(); ++r) {
            const std::uint32_t d_begin = r == 0 ? 0 : desc_read_end_[r - 1];
            const std::uint32_t d_end = desc_read_end_[r];
            const std::uint32_t read_len = std::uint32_t(reads[r].bases.size());
            rec_.read = &reads[r];
            rec_.alignments.clear();
            for (std::uint32_t d = d_begin; d < d_end; ++d)
                rec_.alignments.push_back(resolve(d, read_len));
            post_filter(rec_.alignments);
            format_record(rec_, boundaries_, out);
        }
    }

  private:
    static constexpr std::uint32_t kNoJob = 0xFFFFFFFFu;

    std::span<const BaseCode> oriented_read(std::span<const ReadRecord> reads, std::size_t r,
                                            const ExtensionJobDesc& jd) const {
        if (!jd.seed.is_reverse) return reads[r].bases;
        return std::span(rc_arena_).subspan(rc_off_[r], rc_off_[r + 1] - rc_off_[r]);
    }

    Alignment resolve(std::uint32_t d, std::uint32_t read_len) const {
        const ExtensionJobDesc& jd = descs_[d];
        const std::uint64_t seed_len = jd.seed.q_end - jd.seed.q_begin;

        std::int32_t score = left_score_[d];
        std::uint32_t oq_begin = jd.oriented_begin - left_q_[d];
        std::uint32_t oq_end = jd.oriented_end;
        const std::uint64_t ref_begin = jd.seed.ref_pos - left_t_[d];
        std::uint64_t ref_end = jd.seed.ref_pos + seed_len;

        if (desc_right_job_[d] != kNoJob) {
            const BswResult& res = right_res_[desc_right_job_[d]];
            if (res.g_score > 0 && res.g_score + params_.bsw.end_bonus >= res.best_score) {
                score = res.g_score;
                oq_end = read_len;  // suffix fully consumed
                ref_end = jd.right_ref_begin + res.g_t_end;
            } else {
                score = res.best_score;
                oq_end = jd.oriented_end + res.q_end;
                ref_end = jd.right_ref_begin + res.t_end;
            }
        }

        Alignment al;
        al.score = score;
        al.ref_begin = ref_begin;
        al.ref_end = ref_end;
        al.is_reverse = jd.seed.is_reverse;
        al.interval_size = jd.seed.interval_size;
        if (jd.seed.is_reverse) {  // back to original read coordinates
            al.q_begin = read_len - oq_end;
            al.q_end = read_len - oq_begin;
        } else {
            al.q_begin = oq_begin;
            al.q_end = oq_end;
        }
        return al;
    }

    const FMIndex& idx_;
    std::span<const BaseCode> ref_;
    const std::vector<RecordBoundary>& boundaries_;
    MapperParams params_;

    // arenas, reused across batches
    SmemScratch smem_scratch_;
    std::vector<Smem> smems_;
    std::vector<SeedHit> hits_;
    ChainSet chains_;
    std::vector<ExtensionJobDesc> jobs_tmp_, descs_;
    std::vector<std::uint32_t> desc_read_end_;
    std::vector<BaseCode> rc_arena_, lq_arena_, lt_arena_;
    std::vector<std::size_t> rc_off_;
    std::vector<std::pair<std::size_t, std::size_t>> lq_range_, lt_range_;
    std::vector<std::uint32_t> desc_left_job_, desc_right_job_;
    std::vector<BswJob> left_jobs_, right_jobs_;
    std::vector<BswResult> left_res_, right_res_;
    std::vector<std::int32_t> left_score_;
    std::vector<std::uint32_t> left_q_;
    std::vector<std::uint64_t> left_t_;
    BswBatchScratch bsw_scratch_;
    BswStats bsw_stats_;
    MappingRecord rec_;
};

// Maps a whole chunk with `workers` threads. Batches are claimed dynamically
// from a shared counter; per-batch outputs are concatenated in batch order,
// so the result is byte-identical for any worker count or schedule.
inline void process_chunk(const FMIndex& idx, std::span<const BaseCode> ref_bases,
                          const std::vector<RecordBoundary>& boundaries,
                          const MapperParams& params, std::span<const ReadRecord> reads,
                          std::size_t batch_size, unsigned workers, std::string& out) {
    if (batch_size < 1) throw InvariantError("pipeline: batch_size must be >= 1");
    if (workers < 1) throw InvariantError("pipeline: workers must be >= 1");
    const std::size_t n_batches = (reads.size() + batch_size - 1) / batch_size;
    std::vector<std::string> outputs(n_batches);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto work = [&] {
        MapperEngine engine(idx, ref_bases, boundaries, params);
        std::string buf;
        try {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_batches || failed.load()) break;
                buf.clear();
                const std::size_t lo = b * batch_size;
                const std::size_t hi = std::min(lo + batch_size, reads.size());
                engine.process_batch(reads.subspan(lo, hi - lo), buf);
                outputs[b] = buf;
            }
        } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    for (std::string& s : outputs) out += s;
}

}  // namespace seedmap
