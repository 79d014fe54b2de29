#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ocshield/data.hpp"
#include "ocshield/errors.hpp"
#include "ocshield/model.hpp"

namespace ocshield::ocspace {

/// The ordered leaf identifiers an example reaches, one byte per tree.
struct OutputConfig {
    std::vector<std::uint8_t> ids;

    OutputConfig() = default;
    explicit OutputConfig(std::vector<std::uint8_t> v) : ids(std::move(v)) {}

    std::size_t size() const { return ids.size(); }
    bool operator==(const OutputConfig&) const = default;
};

inline OutputConfig encode(const model::Ensemble& e, std::span<const double> x) {
    return OutputConfig(e.leaf_path(x));
}

/// Number of coordinates where the two configurations differ.
std::uint32_t hamming(const OutputConfig& a, const OutputConfig& b);

/// Reference output configurations of correctly classified training
/// examples, one contiguous column-major byte block per class label.
/// Blocks are padded to a multiple of 32 rows by duplicating existing
/// rows of the same class, which leaves every minimum-distance scan
/// unchanged. Immutable after construction; scans are read-only.
class ReferenceSet {
public:
    static constexpr std::size_t kBlockRows = 32;

    struct Partition {
        std::vector<std::uint8_t> bytes; // column-major: bytes[m * physical_rows + i]
        std::size_t rows = 0;            // rows before padding
        std::size_t physical_rows = 0;   // multiple of kBlockRows

        std::size_t padding() const { return physical_rows - rows; }
        const std::uint8_t* column(std::size_t m) const {
            return bytes.data() + m * physical_rows;
        }
        OutputConfig row(std::size_t i, std::size_t n_trees) const;
    };

    /// Build directly from per-class configuration lists (all of length
    /// n_trees). Used by build_reference and by reference-set subsampling.
    static ReferenceSet from_rows(std::size_t n_trees,
                                  const std::vector<OutputConfig>& class0,
                                  const std::vector<OutputConfig>& class1);

    std::size_t n_trees() const { return n_trees_; }
    const Partition& partition(int label) const;

    /// Total padding rows across both class partitions.
    std::size_t padded_rows() const {
        return partitions_[0].padding() + partitions_[1].padding();
    }

    void save(std::ostream& out) const;
    static ReferenceSet load(std::istream& in);
    void save_file(const std::string& path) const;
    static ReferenceSet load_file(const std::string& path);

private:
    explicit ReferenceSet(std::size_t n_trees) : n_trees_(n_trees) {}

    std::size_t n_trees_ = 0;
    Partition partitions_[2];
};

/// Encode every correctly classified (X, y) row and group by label.
/// Throws EmptyClassPartition when a class ends up with no rows.
ReferenceSet build_reference(const model::Ensemble& e, const Matrix& X,
                             const std::vector<int>& y);

/// Minimum Hamming distance between `oc` and the rows of the
/// predicted-label partition. Plain scalar scan; this is the reference
/// semantics the wide kernel must reproduce bit-exactly.
std::uint32_t oc_score(const ReferenceSet& r, const OutputConfig& oc, int predicted_label);

/// Same result as oc_score, computed 32 rows at a time with byte-wide
/// SIMD when the CPU supports it (and SIMD is not disabled); falls back
/// to the scalar scan otherwise.
std::uint32_t oc_score_simd(const ReferenceSet& r, const OutputConfig& oc,
                            int predicted_label);

/// Element-wise oc_score_simd, order preserving; work is split across
/// worker threads. Element errors are rethrown with the offending index.
std::vector<std::uint32_t> batch_oc_scores(const ReferenceSet& r,
                                           std::span<const OutputConfig> ocs,
                                           std::span<const int> labels);

/// Process-wide switch for the wide kernel (the CLI's --no-simd).
void set_simd_enabled(bool enabled);
bool simd_enabled();

namespace detail {

std::uint32_t scan_scalar(const std::uint8_t* col_major, std::size_t physical_rows,
                          std::size_t n_trees, const std::uint8_t* oc);

bool avx2_available();

#if defined(OCSHIELD_HAVE_AVX2)
std::uint32_t scan_avx2(const std::uint8_t* col_major, std::size_t physical_rows,
                        std::size_t n_trees, const std::uint8_t* oc);
#endif

} // namespace detail

} // namespace ocshield::ocspace
