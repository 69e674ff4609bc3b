#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "seedmap/bases.hpp"
#include "seedmap/errors.hpp"

namespace seedmap {

inline constexpr std::size_t kMaxReadLength = 512;

// One named record inside a flattened multi-record FASTA.
struct RecordBoundary {
    std::string name;
    std::uint64_t offset = 0;  // start position in the flattened coordinate space
};

// Reference flattened to a single coordinate space. `boundaries` keeps the
// per-record names and start offsets for presentation only.
struct ReferenceSequence {
    std::vector<BaseCode> bases;
    std::vector<RecordBoundary> boundaries;

    std::uint64_t size() const { return bases.size(); }

    // Maps a flattened position to (record index, offset within record).
    std::pair<std::size_t, std::uint64_t> locate(std::uint64_t pos) const {
        std::size_t lo = 0, hi = boundaries.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (boundaries[mid].offset <= pos) lo = mid; else hi = mid;
        }
        return {lo, pos - boundaries[lo].offset};
    }
};

// Reference concatenated with its reverse complement. bases[n_ref + i] is the
// complement of bases[n_ref - 1 - i].
struct ConcatSequence {
    std::vector<BaseCode> bases;
    std::uint64_t n_ref = 0;
};

struct ReadRecord {
    std::string id;
    std::vector<BaseCode> bases;
    std::vector<std::uint8_t> qualities;  // empty when absent
    std::uint64_t ordinal = 0;
};

inline ReferenceSequence parse_fasta(std::istream& in) {
    ReferenceSequence ref;
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '>') {
            std::string name = line.substr(1);
            auto ws = name.find_first_of(" \t");
            if (ws != std::string::npos) name.resize(ws);
            ref.boundaries.push_back({std::move(name), ref.bases.size()});
            seen_header = true;
        } else {
            if (!seen_header)
                throw ParseError("fasta: line " + std::to_string(line_no) +
                                 ": sequence data before any '>' header");
            for (char c : line) ref.bases.push_back(encode_base(c));
        }
    }
    if (!seen_header) throw ParseError("fasta: empty or header-less file");
    if (ref.bases.empty()) throw ParseError("fasta: no sequence data");
    return ref;
}

inline ConcatSequence build_concat(const ReferenceSequence& ref) {
    ConcatSequence cat;
    cat.n_ref = ref.bases.size();
    cat.bases.reserve(2 * cat.n_ref);
    cat.bases = ref.bases;
    for (std::uint64_t i = 0; i < cat.n_ref; ++i)
        cat.bases.push_back(complement(ref.bases[cat.n_ref - 1 - i]));
    return cat;
}

// Streaming 4-line FASTQ reader producing batches of at most batch_size reads
// in file order. Ordinals are assigned 0,1,2,...
class FastqBatchReader {
  public:
    FastqBatchReader(std::istream& in, std::size_t batch_size)
        : in_(in), batch_size_(batch_size) {
        if (batch_size_ < 1) throw InvariantError("fastq: batch_size must be >= 1");
    }

    // Fills `batch` (cleared first). Returns false when the stream is done.
    bool next_batch(std::vector<ReadRecord>& batch) {
        batch.clear();
        ReadRecord rec;
        while (batch.size() < batch_size_ && read_record(rec)) batch.push_back(std::move(rec));
        return !batch.empty();
    }

  private:
    bool read_record(ReadRecord& rec) {
        std::string header, seq, plus, qual;
        if (!std::getline(in_, header)) return false;
        strip_cr(header);
        if (header.empty() || header[0] != '@')
            throw ParseError("fastq: record header must start with '@' (read #" +
                             std::to_string(next_ordinal_) + ")");
        if (!std::getline(in_, seq) || !std::getline(in_, plus) || !std::getline(in_, qual))
            throw ParseError("fastq: truncated record '" + header.substr(1) + "'");
        strip_cr(seq);
        strip_cr(qual);
        std::string id = header.substr(1);
        auto ws = id.find_first_of(" \t");
        if (ws != std::string::npos) id.resize(ws);
        if (seq.size() != qual.size())
            throw ParseError("fastq: sequence/quality length mismatch in read '" + id + "'");
        if (seq.empty()) throw ParseError("fastq: empty sequence in read '" + id + "'");
        if (seq.size() > kMaxReadLength)
            throw ParseError("fastq: read '" + id + "' longer than " +
                             std::to_string(kMaxReadLength) + " bases");
        rec.id = std::move(id);
        rec.bases.clear();
        rec.bases.reserve(seq.size());
        for (char c : seq) rec.bases.push_back(encode_base(c));
        rec.qualities.assign(qual.begin(), qual.end());
        rec.ordinal = next_ordinal_++;
        return true;
    }

    static void strip_cr(std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    }

    std::istream& in_;
    std::size_t batch_size_;
    std::uint64_t next_ordinal_ = 0;
};

}  // namespace seedmap
