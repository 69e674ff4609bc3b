#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

#include "seedmap/bases.hpp"
#include "seedmap/checksum.hpp"
#include "seedmap/errors.hpp"
#include "seedmap/refseq.hpp"

namespace seedmap {

// Occurrence-table bucket size. One bucket spans a full cache line:
// 16 bytes of absolute counts, 32 one-byte BWT codes, 16 bytes padding.
inline constexpr std::uint32_t kEta = 32;

struct alignas(64) OccBucket {
    std::uint32_t count[4];  // occurrences of A,C,G,T strictly before this bucket
    std::uint8_t bwt[kEta];  // raw BWT bytes of the bucket
    std::uint8_t pad[16];
};
static_assert(sizeof(OccBucket) == 64);

class FMIndex {
  public:
    std::uint64_t n = 0;             // indexed length including sentinel
    std::uint64_t n_ref = 0;         // original reference length
    std::uint64_t sentinel_row = 0;  // BW-matrix row of the '$' rotation
    std::array<std::uint64_t, 6> D{};
    std::vector<OccBucket> occ_buckets;
    std::vector<std::uint64_t> suffix_array;

    static constexpr std::uint32_t eta() { return kEta; }

    // --- construction -----------------------------------------------------

    // Sorted order of all suffixes of text·$ (prefix doubling). S[0] always
    // points at the sentinel suffix.
    static std::vector<std::uint64_t> build_suffix_array(const std::vector<BaseCode>& text) {
        const std::uint64_t n = text.size() + 1;
        std::vector<std::uint64_t> sa(n), rank(n), next(n);
        for (std::uint64_t i = 0; i + 1 < n; ++i) rank[i] = std::uint64_t(text[i]) + 1;
        rank[n - 1] = 0;  // sentinel, smaller than every base
        std::iota(sa.begin(), sa.end(), std::uint64_t(0));
        for (std::uint64_t k = 1;; k <<= 1) {
            auto key2 = [&](std::uint64_t i) {
                return i + k < n ? rank[i + k] + 1 : std::uint64_t(0);
            };
            std::sort(sa.begin(), sa.end(), [&](std::uint64_t a, std::uint64_t b) {
                if (rank[a] != rank[b]) return rank[a] < rank[b];
                return key2(a) < key2(b);
            });
            next[sa[0]] = 0;
            for (std::uint64_t j = 1; j < n; ++j) {
                bool differ = rank[sa[j]] != rank[sa[j - 1]] || key2(sa[j]) != key2(sa[j - 1]);
                next[sa[j]] = next[sa[j - 1]] + (differ ? 1 : 0);
            }
            rank.swap(next);
            if (rank[sa[n - 1]] == n - 1) break;
        }
        return sa;
    }

    // BWT as the last column of the sorted rotations of text·$. The byte at
    // the sentinel row stores kSentinelCode, which matches no base compare.
    static std::vector<BaseCode> build_bwt(const std::vector<BaseCode>& text,
                                           const std::vector<std::uint64_t>& sa,
                                           std::uint64_t& sentinel_row_out) {
        std::vector<BaseCode> bwt(sa.size());
        for (std::uint64_t i = 0; i < sa.size(); ++i) {
            if (sa[i] == 0) {
                bwt[i] = kSentinelCode;
                sentinel_row_out = i;
            } else {
                bwt[i] = text[sa[i] - 1];
            }
        }
        return bwt;
    }

    static FMIndex build(const std::vector<BaseCode>& text, std::uint64_t n_ref) {
        FMIndex idx;
        idx.n = text.size() + 1;
        idx.n_ref = n_ref;
        if (idx.n > 0xFFFFFFFFull)
            throw InvariantError("fmindex: input too large for 32-bit bucket counts");
        idx.suffix_array = build_suffix_array(text);
        std::vector<BaseCode> bwt = build_bwt(text, idx.suffix_array, idx.sentinel_row);
        idx.build_occ_buckets(bwt);
        idx.build_d(text);
        return idx;
    }

    static FMIndex build(const ConcatSequence& cat) { return build(cat.bases, cat.n_ref); }

    // --- queries ------------------------------------------------------------

    // O[c,t]: occurrences of base c in B[0..t]. t = -1 is permitted (empty
    // prefix). Bucket count plus a byte-compare-and-popcount over the first
    // (t mod eta)+1 bucket bytes.
    std::uint64_t get_o(BaseCode c, std::int64_t t) const {
        if (t < 0) return 0;
        if (std::uint64_t(t) >= n) throw InvariantError("get_o: position out of range");
        const std::uint64_t bucket = std::uint64_t(t) >> 5;
        const std::uint32_t y = std::uint32_t(t) & 31u;
        const OccBucket& ob = occ_buckets[bucket];
        const std::uint32_t keep = y == 31 ? 0xFFFFFFFFu : ((1u << (y + 1)) - 1u);
#if defined(__AVX2__)
        // bwt sits at offset 16 inside the cache-line bucket, so the load is
        // 16-byte aligned only.
        __m256i bytes = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ob.bwt));
        __m256i needle = _mm256_set1_epi8(char(c));
        std::uint32_t mask = std::uint32_t(_mm256_movemask_epi8(_mm256_cmpeq_epi8(bytes, needle)));
#else
        std::uint32_t mask = 0;
        for (std::uint32_t i = 0; i < kEta; ++i) mask |= std::uint32_t(ob.bwt[i] == c) << i;
#endif
        return ob.count[c] + std::uint64_t(std::popcount(mask & keep));
    }

    std::uint64_t sa_lookup(std::uint64_t row) const {
        if (row >= n) throw InvariantError("sa_lookup: row out of range");
        return suffix_array[row];
    }

    // Reconstructs the indexed text by the standard LF walk, starting from
    // the sentinel-suffix row (row 0, whose BWT byte is the last text base).
    std::vector<BaseCode> inverse_bwt() const {
        std::vector<BaseCode> out(n - 1);
        std::uint64_t row = 0;
        for (std::uint64_t pos = n - 1; pos > 0; --pos) {
            const BaseCode c = bwt_at(row);
            out[pos - 1] = c;
            row = D[c] + get_o(c, std::int64_t(row));  // LF mapping
        }
        return out;
    }

    BaseCode bwt_at(std::uint64_t row) const {
        return occ_buckets[row >> 5].bwt[row & 31u];
    }

    // --- serialization ------------------------------------------------------
    // Little-endian: magic "SMIX", u32 version=1, u64 n_ref, u64 n,
    // u64 sentinel_row, 4xu64 D, u64 bucket_count, buckets (64B each),
    // suffix array (n x u64), u64 checksum of all preceding payload bytes.

    static constexpr char kMagic[4] = {'S', 'M', 'I', 'X'};
    static constexpr std::uint32_t kVersion = 1;

    void serialize(std::ostream& out) const {
        std::vector<char> payload;
        payload.reserve(4 + 4 + 8 * 8 + occ_buckets.size() * 64 + suffix_array.size() * 8);
        append(payload, kMagic, 4);
        append_u32(payload, kVersion);
        append_u64(payload, n_ref);
        append_u64(payload, n);
        append_u64(payload, sentinel_row);
        for (int c = 0; c < 4; ++c) append_u64(payload, D[c]);
        append_u64(payload, occ_buckets.size());
        append(payload, occ_buckets.data(), occ_buckets.size() * sizeof(OccBucket));
        append(payload, suffix_array.data(), suffix_array.size() * 8);
        const std::uint64_t sum = Xxh64::hash(payload.data(), payload.size());
        out.write(payload.data(), std::streamsize(payload.size()));
        out.write(reinterpret_cast<const char*>(&sum), 8);
        if (!out) throw IoError("fmindex: write failed");
    }

    static FMIndex deserialize(std::istream& in) {
        std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
        if (raw.size() < 4 || std::memcmp(raw.data(), kMagic, 4) != 0)
            throw ParseError("index: bad magic");
        if (raw.size() < 8 + 8 * 8 + 8) throw ParseError("index: truncated header");
        const std::uint64_t stored_sum = read_u64(raw.data() + raw.size() - 8);
        if (Xxh64::hash(raw.data(), raw.size() - 8) != stored_sum)
            throw ParseError("index: checksum mismatch");

        const char* p = raw.data() + 4;
        const std::uint32_t version = read_u32(p);
        p += 4;
        if (version != kVersion)
            throw ParseError("index: unsupported version " + std::to_string(version));
        FMIndex idx;
        idx.n_ref = read_u64(p); p += 8;
        idx.n = read_u64(p); p += 8;
        idx.sentinel_row = read_u64(p); p += 8;
        for (int c = 0; c < 4; ++c) { idx.D[c] = read_u64(p); p += 8; }
        const std::uint64_t bucket_count = read_u64(p); p += 8;
        const std::uint64_t need =
            std::uint64_t(p - raw.data()) + bucket_count * 64 + idx.n * 8 + 8;
        if (bucket_count != (idx.n + kEta - 1) / kEta || raw.size() != need)
            throw ParseError("index: truncated or inconsistent payload");
        idx.occ_buckets.resize(bucket_count);
        std::memcpy(idx.occ_buckets.data(), p, bucket_count * 64);
        p += bucket_count * 64;
        idx.suffix_array.resize(idx.n);
        std::memcpy(idx.suffix_array.data(), p, idx.n * 8);
        // D[4] and D[5] are derivable; only D[0..3] travel in the file.
        idx.D[4] = idx.D[3] + idx.get_o(kBaseT, std::int64_t(idx.n) - 1);
        idx.D[5] = idx.n - 1;
        return idx;
    }

  private:
    void build_occ_buckets(const std::vector<BaseCode>& bwt) {
        const std::uint64_t bucket_count = (n + kEta - 1) / kEta;
        occ_buckets.assign(bucket_count, OccBucket{});
        std::uint32_t running[4] = {0, 0, 0, 0};
        for (std::uint64_t b = 0; b < bucket_count; ++b) {
            OccBucket& ob = occ_buckets[b];
            std::memcpy(ob.count, running, sizeof(running));
            for (std::uint32_t i = 0; i < kEta; ++i) {
                const std::uint64_t pos = b * kEta + i;
                const BaseCode c = pos < n ? bwt[pos] : kSentinelCode;
                ob.bwt[i] = c;
                if (c < 4) ++running[c];
            }
        }
    }

    void build_d(const std::vector<BaseCode>& text) {
        std::uint64_t tally[5] = {0, 0, 0, 0, 0};
        for (BaseCode c : text) ++tally[c];
        D[0] = 0;
        for (int c = 0; c < 5; ++c) D[c + 1] = D[c] + tally[c];
    }

    static void append(std::vector<char>& v, const void* data, std::size_t len) {
        const char* p = static_cast<const char*>(data);
        v.insert(v.end(), p, p + len);
    }
    static void append_u32(std::vector<char>& v, std::uint32_t x) { append(v, &x, 4); }
    static void append_u64(std::vector<char>& v, std::uint64_t x) { append(v, &x, 8); }
    static std::uint32_t read_u32(const char* p) {
        std::uint32_t x;
        std::memcpy(&x, p, 4);
        return x;
    }
    static std::uint64_t read_u64(const char* p) {
        std::uint64_t x;
        std::memcpy(&x, p, 8);
        return x;
    }
};

inline std::uint64_t estimate_index_bytes(std::uint64_t text_len) {
    const std::uint64_t n = text_len + 1;
    return n * 8 + ((n + kEta - 1) / kEta) * 64;
}

}  // namespace seedmap
