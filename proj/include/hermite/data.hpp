#ifndef HERMITE_DATA_HPP
#define HERMITE_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hermite/tensor.hpp"

namespace hermite::data {

/// Dense feature matrix with integer class labels.
struct Dataset {
    Tensor features; // [N x D]
    std::vector<int> labels;
    int num_classes = 0;

    std::size_t size() const { return features.rank() == 2 ? features.rows() : 0; }
    std::size_t dim() const { return features.rank() == 2 ? features.cols() : 0; }

    void validate() const;
};

/// Labeled/unlabeled index split for semi-supervised runs. True labels of the
/// unlabeled part stay in the parent dataset for evaluation only.
struct SslSplit {
    std::vector<std::size_t> labeled;
    std::vector<std::size_t> unlabeled;
};

// --- IDX binary format -----------------------------------------------------

/// Parse IDX files (big-endian magic, dimension sizes, unsigned-byte
/// payload). Pixels are scaled to [0,1]; label bytes map to classes directly.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

Tensor load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::size_t n, std::size_t rows, std::size_t cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

// --- Synthetic generators ---------------------------------------------------

/// Gaussian clusters at random centers in [-2,2]^D, mean-normalized.
Dataset synth_blobs(int k, int per_class, int dim, double spread, std::uint64_t seed);

/// Two interleaved half-circles with Gaussian coordinate noise,
/// mean-normalized.
Dataset synth_two_moons(int n, double noise, std::uint64_t seed);

/// 28x28 surrogate image set built by upscaling and jittering a small source
/// image set (shift + pixel noise), written through the same Dataset path as
/// IDX-loaded data. Used when no full-size handwriting corpus is on disk.
Dataset make_jittered_images28(const Dataset& source8x8, int n, std::uint64_t seed);

// --- Transformations ---------------------------------------------------------

/// Subtract the per-feature mean in place; returns the subtracted means.
std::vector<double> mean_normalize(Dataset& ds);

/// Class-balanced labeled subset where possible; remaining indices unlabeled.
SslSplit make_ssl_split(const Dataset& ds, std::size_t n_labeled, std::uint64_t seed);

/// Reassign a floor(p*N)-sized uniformly chosen subset to labels drawn
/// uniformly over all classes (redraw may equal the original). Returns the
/// flip mask of selected indices.
std::vector<bool> inject_label_noise(std::vector<int>& labels, int num_classes, double p,
                                     std::uint64_t seed);

/// Rows of `ds` selected by `idx` as a new dataset.
Dataset subset(const Dataset& ds, const std::vector<std::size_t>& idx);

/// First n indices of a seeded permutation of [0, N).
std::vector<std::size_t> sample_indices(std::size_t n_total, std::size_t n, std::uint64_t seed);

/// `label,feat_0,...,feat_{D-1}` rows.
void write_csv(const Dataset& ds, const std::string& path);

} // namespace hermite::data

#endif
