#include "ocshield/ocspace.hpp"

#include <atomic>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ocshield/parallel.hpp"

namespace ocshield::ocspace {

std::uint32_t hamming(const OutputConfig& a, const OutputConfig& b) {
    if (a.ids.size() != b.ids.size())
        raise(ErrorCode::LengthMismatch, "output configurations have different lengths");
    std::uint32_t count = 0;
    for (std::size_t m = 0; m < a.ids.size(); ++m)
        count += a.ids[m] != b.ids[m];
    return count;
}

// ----------------------------------------------------------- ReferenceSet

OutputConfig ReferenceSet::Partition::row(std::size_t i, std::size_t n_trees) const {
    std::vector<std::uint8_t> ids(n_trees);
    for (std::size_t m = 0; m < n_trees; ++m)
        ids[m] = bytes[m * physical_rows + i];
    return OutputConfig(std::move(ids));
}

namespace {

void fill_partition(ReferenceSet::Partition& p, std::size_t n_trees,
                    const std::vector<OutputConfig>& rows) {
    p.rows = rows.size();
    p.physical_rows =
        (p.rows + ReferenceSet::kBlockRows - 1) / ReferenceSet::kBlockRows *
        ReferenceSet::kBlockRows;
    p.bytes.assign(p.physical_rows * n_trees, 0);
    for (std::size_t i = 0; i < p.physical_rows; ++i) {
        // Padding rows cycle through the real rows, so the block minimum
        // is unchanged.
        const OutputConfig& oc = rows[i % p.rows];
        if (oc.ids.size() != n_trees)
            raise(ErrorCode::LengthMismatch, "reference row has wrong length");
        for (std::size_t m = 0; m < n_trees; ++m)
            p.bytes[m * p.physical_rows + i] = oc.ids[m];
    }
}

} // namespace

ReferenceSet ReferenceSet::from_rows(std::size_t n_trees,
                                     const std::vector<OutputConfig>& class0,
                                     const std::vector<OutputConfig>& class1) {
    if (n_trees == 0 || n_trees > model::kMaxTrees)
        raise(ErrorCode::LimitExceeded, "reference set needs 1..255 trees");
    if (class0.empty())
        raise(ErrorCode::EmptyClassPartition, "no reference rows for class 0");
    if (class1.empty())
        raise(ErrorCode::EmptyClassPartition, "no reference rows for class 1");
    ReferenceSet r(n_trees);
    fill_partition(r.partitions_[0], n_trees, class0);
    fill_partition(r.partitions_[1], n_trees, class1);
    return r;
}

const ReferenceSet::Partition& ReferenceSet::partition(int label) const {
    if (label != 0 && label != 1)
        raise(ErrorCode::InvalidArgument, "label must be 0 or 1");
    const Partition& p = partitions_[label];
    if (p.rows == 0)
        raise(ErrorCode::EmptyClassPartition, "empty reference partition");
    return p;
}

ReferenceSet build_reference(const model::Ensemble& e, const Matrix& X,
                             const std::vector<int>& y) {
    if (X.rows != y.size())
        raise(ErrorCode::DimensionMismatch, "X rows and y length differ");
    std::vector<OutputConfig> by_class[2];
    for (std::size_t i = 0; i < X.rows; ++i) {
        if (y[i] != 0 && y[i] != 1)
            raise(ErrorCode::InvalidArgument, "labels must be binary");
        const auto x = X.row(i);
        if (e.evaluate(x).label != y[i]) continue; // keep correctly classified only
        by_class[y[i]].emplace_back(e.leaf_path(x));
    }
    return ReferenceSet::from_rows(e.tree_count(), by_class[0], by_class[1]);
}

// -------------------------------------------------------------- file I/O
//
// Layout (all integers little-endian):
//   4 bytes magic "OCRS", u32 version (1), u32 M,
//   per class label 0 then 1: u64 rows, u64 physical_rows,
//   then the two raw column-major byte blocks (physical_rows * M each).

namespace {

constexpr char kMagic[4] = {'O', 'C', 'R', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<T>(buf[i]) << (8 * i);
    return value;
}

} // namespace

void ReferenceSet::save(std::ostream& out) const {
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(n_trees_));
    for (const Partition& p : partitions_) {
        write_le<std::uint64_t>(out, p.rows);
        write_le<std::uint64_t>(out, p.physical_rows);
    }
    for (const Partition& p : partitions_)
        out.write(reinterpret_cast<const char*>(p.bytes.data()),
                  static_cast<std::streamsize>(p.bytes.size()));
    if (!out) raise(ErrorCode::IoError, "failed writing reference set");
}

ReferenceSet ReferenceSet::load(std::istream& in) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        raise(ErrorCode::IoError, "not a reference set file (bad magic)");
    if (read_le<std::uint32_t>(in) != kVersion)
        raise(ErrorCode::IoError, "unsupported reference set version");
    const auto n_trees = read_le<std::uint32_t>(in);
    if (n_trees == 0 || n_trees > model::kMaxTrees)
        raise(ErrorCode::IoError, "reference set has invalid tree count");

    ReferenceSet r(n_trees);
    for (Partition& p : r.partitions_) {
        p.rows = read_le<std::uint64_t>(in);
        p.physical_rows = read_le<std::uint64_t>(in);
        if (p.rows == 0 || p.physical_rows % kBlockRows != 0 || p.physical_rows < p.rows)
            raise(ErrorCode::IoError, "reference set has invalid row counts");
    }
    for (Partition& p : r.partitions_) {
        p.bytes.resize(p.physical_rows * n_trees);
        in.read(reinterpret_cast<char*>(p.bytes.data()),
                static_cast<std::streamsize>(p.bytes.size()));
    }
    if (!in) raise(ErrorCode::IoError, "truncated reference set file");
    return r;
}

void ReferenceSet::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot write reference set: " + path);
    save(out);
}

ReferenceSet ReferenceSet::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open reference set: " + path);
    return load(in);
}

// ------------------------------------------------------------------ scans

namespace detail {

std::uint32_t scan_scalar(const std::uint8_t* col_major, std::size_t physical_rows,
                          std::size_t n_trees, const std::uint8_t* oc) {
    // Reference semantics: one row at a time, byte mismatch count,
    // running minimum starting at 255 (the widest value the byte
    // accumulator of the block kernel can hold).
    std::uint8_t best = 255;
    for (std::size_t i = 0; i < physical_rows; ++i) {
        std::uint8_t count = 0;
        for (std::size_t m = 0; m < n_trees; ++m)
            count = static_cast<std::uint8_t>(count +
                (col_major[m * physical_rows + i] != oc[m]));
        best = std::min(best, count);
    }
    return best;
}

bool avx2_available() {
#if defined(OCSHIELD_HAVE_AVX2)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

} // namespace detail

namespace {

std::atomic<bool> g_simd_enabled{true};

std::uint32_t scan_partition(const ReferenceSet::Partition& p, std::size_t n_trees,
                             const std::uint8_t* oc, bool want_simd) {
#if defined(OCSHIELD_HAVE_AVX2)
    static const bool has_avx2 = detail::avx2_available();
    if (want_simd && has_avx2)
        return detail::scan_avx2(p.bytes.data(), p.physical_rows, n_trees, oc);
#else
    (void)want_simd;
#endif
    return detail::scan_scalar(p.bytes.data(), p.physical_rows, n_trees, oc);
}

std::uint32_t score_impl(const ReferenceSet& r, const OutputConfig& oc,
                         int predicted_label, bool want_simd) {
    if (oc.ids.size() != r.n_trees())
        raise(ErrorCode::LengthMismatch, "query configuration has wrong length");
    return scan_partition(r.partition(predicted_label), r.n_trees(), oc.ids.data(),
                          want_simd);
}

} // namespace

void set_simd_enabled(bool enabled) { g_simd_enabled.store(enabled); }
bool simd_enabled() { return g_simd_enabled.load(); }

std::uint32_t oc_score(const ReferenceSet& r, const OutputConfig& oc, int predicted_label) {
    return score_impl(r, oc, predicted_label, false);
}

std::uint32_t oc_score_simd(const ReferenceSet& r, const OutputConfig& oc,
                            int predicted_label) {
    return score_impl(r, oc, predicted_label, simd_enabled());
}

std::vector<std::uint32_t> batch_oc_scores(const ReferenceSet& r,
                                           std::span<const OutputConfig> ocs,
                                           std::span<const int> labels) {
    if (ocs.size() != labels.size())
        raise(ErrorCode::LengthMismatch, "scores batch: ocs and labels differ in length");
    std::vector<std::uint32_t> out(ocs.size(), 0);
    parallel_for(ocs.size(), [&](std::size_t i) {
        try {
            out[i] = oc_score_simd(r, ocs[i], labels[i]);
        } catch (const Error& e) {
            throw Error(e.code(), "element " + std::to_string(i) + ": " + e.what());
        }
    });
    return out;
}

} // namespace ocshield::ocspace
