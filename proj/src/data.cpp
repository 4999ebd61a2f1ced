#include "hermite/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hermite/common.hpp"
#include "hermite/kernels.hpp"
#include "hermite/rng.hpp"

namespace hermite::data {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::ifstream& in, const std::string& path, std::size_t& offset) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (in.gcount() != 4) throw FormatError(path + ": truncated header", offset);
    offset += 4;
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

} // namespace

void Dataset::validate() const {
    if (features.rank() != 2 || features.rows() == 0)
        throw std::invalid_argument("dataset: features must be a nonempty [N x D] matrix");
    if (labels.size() != features.rows())
        throw std::invalid_argument("dataset: label count does not match feature rows");
    if (num_classes <= 0) throw std::invalid_argument("dataset: class count must be positive");
    for (int label : labels)
        if (label < 0 || label >= num_classes)
            throw std::invalid_argument("dataset: label out of range");
    if (!kernels::all_finite(features.numel(), features.data()))
        throw NumericError("dataset: non-finite feature value");
}

Tensor load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open", 0);
    std::size_t offset = 0;
    const std::uint32_t magic = read_be32(in, path, offset);
    if (magic != kImagesMagic) throw FormatError(path + ": bad image magic", 0);
    const std::uint32_t n = read_be32(in, path, offset);
    const std::uint32_t rows = read_be32(in, path, offset);
    const std::uint32_t cols = read_be32(in, path, offset);
    const std::size_t count = std::size_t(n) * rows * cols;
    std::vector<unsigned char> bytes(count);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw FormatError(path + ": truncated pixel payload",
                          offset + static_cast<std::size_t>(in.gcount()));
    Tensor features({n, std::size_t(rows) * cols});
    for (std::size_t i = 0; i < count; ++i) features[i] = bytes[i] / 255.0;
    return features;
}

std::vector<int> load_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open", 0);
    std::size_t offset = 0;
    const std::uint32_t magic = read_be32(in, path, offset);
    if (magic != kLabelsMagic) throw FormatError(path + ": bad label magic", 0);
    const std::uint32_t n = read_be32(in, path, offset);
    std::vector<unsigned char> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), n);
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw FormatError(path + ": truncated label payload",
                          offset + static_cast<std::size_t>(in.gcount()));
    return std::vector<int>(bytes.begin(), bytes.end());
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    Dataset ds;
    ds.features = load_idx_images(images_path);
    ds.labels = load_idx_labels(labels_path);
    if (ds.labels.size() != ds.features.rows())
        throw FormatError(images_path + ": image/label count mismatch", 0);
    int max_label = 0;
    for (int label : ds.labels) max_label = std::max(max_label, label);
    ds.num_classes = max_label + 1;
    ds.validate();
    return ds;
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::size_t n, std::size_t rows, std::size_t cols) {
    if (pixels.size() != n * rows * cols)
        throw std::invalid_argument("write_idx_images: pixel count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path + ": cannot open for writing", 0);
    write_be32(out, kImagesMagic);
    write_be32(out, static_cast<std::uint32_t>(n));
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path + ": cannot open for writing", 0);
    write_be32(out, kLabelsMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
}

Dataset synth_blobs(int k, int per_class, int dim, double spread, std::uint64_t seed) {
    if (k <= 0 || per_class <= 0 || dim <= 0)
        throw std::invalid_argument("synth_blobs: counts must be positive");
    Rng rng(seed);
    std::vector<double> centers(static_cast<std::size_t>(k) * dim);
    for (auto& c : centers) c = rng.uniform(-2.0, 2.0);

    const std::size_t n = static_cast<std::size_t>(k) * per_class;
    Dataset ds;
    ds.features = Tensor({n, static_cast<std::size_t>(dim)});
    ds.labels.resize(n);
    ds.num_classes = k;
    std::size_t row = 0;
    for (int cls = 0; cls < k; ++cls) {
        for (int s = 0; s < per_class; ++s, ++row) {
            ds.labels[row] = cls;
            for (int d = 0; d < dim; ++d)
                ds.features.at(row, d) =
                    centers[static_cast<std::size_t>(cls) * dim + d] + spread * rng.gaussian();
        }
    }
    mean_normalize(ds);
    ds.validate();
    return ds;
}

Dataset synth_two_moons(int n, double noise, std::uint64_t seed) {
    if (n <= 1) throw std::invalid_argument("synth_two_moons: need at least 2 samples");
    Rng rng(seed);
    const int n_outer = n / 2;
    const int n_inner = n - n_outer;
    Dataset ds;
    ds.features = Tensor({static_cast<std::size_t>(n), 2});
    ds.labels.resize(n);
    ds.num_classes = 2;
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < n_outer; ++i) {
        const double t = pi * i / (n_outer - 1.0);
        ds.features.at(i, 0) = std::cos(t) + noise * rng.gaussian();
        ds.features.at(i, 1) = std::sin(t) + noise * rng.gaussian();
        ds.labels[i] = 0;
    }
    for (int i = 0; i < n_inner; ++i) {
        const double t = pi * i / (n_inner - 1.0);
        const std::size_t row = static_cast<std::size_t>(n_outer + i);
        ds.features.at(row, 0) = 1.0 - std::cos(t) + noise * rng.gaussian();
        ds.features.at(row, 1) = 0.5 - std::sin(t) + noise * rng.gaussian();
        ds.labels[row] = 1;
    }
    mean_normalize(ds);
    ds.validate();
    return ds;
}

Dataset make_jittered_images28(const Dataset& source, int n, std::uint64_t seed) {
    source.validate();
    const std::size_t side = 8;
    if (source.dim() != side * side)
        throw std::invalid_argument("make_jittered_images28: source must be 8x8 images");
    Rng rng(seed);
    const std::size_t out_side = 28;
    Dataset ds;
    ds.features = Tensor({static_cast<std::size_t>(n), out_side * out_side});
    ds.labels.resize(n);
    ds.num_classes = source.num_classes;
    for (int i = 0; i < n; ++i) {
        const std::size_t src = rng.uniform_int(source.size());
        ds.labels[i] = source.labels[src];
        // 3x nearest-neighbor upscale (24x24) placed at a jittered offset,
        // plus intensity scaling and pixel noise
        const std::size_t off_r = rng.uniform_int(5);
        const std::size_t off_c = rng.uniform_int(5);
        const double gain = 0.7 + 0.3 * rng.uniform();
        for (std::size_t r = 0; r < 24; ++r) {
            for (std::size_t c = 0; c < 24; ++c) {
                const double v = source.features.at(src, (r / 3) * side + (c / 3));
                ds.features.at(i, (r + off_r) * out_side + (c + off_c)) = gain * v;
            }
        }
        for (std::size_t p = 0; p < out_side * out_side; ++p) {
            double v = ds.features.at(i, p) + 0.12 * rng.gaussian();
            ds.features.at(i, p) = std::min(1.0, std::max(0.0, v));
        }
    }
    ds.validate();
    return ds;
}

std::vector<double> mean_normalize(Dataset& ds) {
    const std::size_t n = ds.features.rows(), d = ds.features.cols();
    std::vector<double> means(d, 0.0);
    kernels::col_sum(n, d, ds.features.data(), means.data());
    for (auto& m : means) m /= static_cast<double>(n);
    double* f = ds.features.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) f[i * d + j] -= means[j];
    return means;
}

SslSplit make_ssl_split(const Dataset& ds, std::size_t n_labeled, std::uint64_t seed) {
    ds.validate();
    const std::size_t n = ds.size();
    const std::size_t k = static_cast<std::size_t>(ds.num_classes);
    if (n_labeled > n) throw std::invalid_argument("make_ssl_split: n_labeled exceeds dataset");
    if (n_labeled < k)
        throw std::invalid_argument("make_ssl_split: need at least one labeled sample per class");

    // shuffle within each class, then round-robin classes for balance
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> per_class(k);
    for (std::size_t i = 0; i < n; ++i) per_class[ds.labels[i]].push_back(i);
    for (auto& idx : per_class) rng.shuffle(idx);

    SslSplit split;
    std::vector<std::size_t> cursor(k, 0);
    while (split.labeled.size() < n_labeled) {
        bool advanced = false;
        for (std::size_t cls = 0; cls < k && split.labeled.size() < n_labeled; ++cls) {
            if (cursor[cls] < per_class[cls].size()) {
                split.labeled.push_back(per_class[cls][cursor[cls]++]);
                advanced = true;
            }
        }
        if (!advanced) break;
    }
    for (std::size_t cls = 0; cls < k; ++cls)
        for (std::size_t i = cursor[cls]; i < per_class[cls].size(); ++i)
            split.unlabeled.push_back(per_class[cls][i]);
    std::sort(split.labeled.begin(), split.labeled.end());
    std::sort(split.unlabeled.begin(), split.unlabeled.end());
    return split;
}

std::vector<bool> inject_label_noise(std::vector<int>& labels, int num_classes, double p,
                                     std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("inject_label_noise: p must be in [0,1]");
    if (num_classes <= 0) throw std::invalid_argument("inject_label_noise: bad class count");
    const std::size_t n = labels.size();
    const std::size_t count = static_cast<std::size_t>(std::floor(p * static_cast<double>(n)));
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<bool> mask(n, false);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t idx = order[i];
        mask[idx] = true;
        labels[idx] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(num_classes)));
    }
    return mask;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.features = Tensor({idx.size(), ds.dim()});
    out.labels.resize(idx.size());
    out.num_classes = ds.num_classes;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= ds.size()) throw std::invalid_argument("subset: index out of range");
        out.labels[i] = ds.labels[idx[i]];
        for (std::size_t j = 0; j < ds.dim(); ++j)
            out.features.at(i, j) = ds.features.at(idx[i], j);
    }
    return out;
}

std::vector<std::size_t> sample_indices(std::size_t n_total, std::size_t n, std::uint64_t seed) {
    if (n > n_total) throw std::invalid_argument("sample_indices: n exceeds total");
    std::vector<std::size_t> order(n_total);
    for (std::size_t i = 0; i < n_total; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    order.resize(n);
    return order;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw FormatError(path + ": cannot open for writing", 0);
    std::fprintf(f, "label");
    for (std::size_t j = 0; j < ds.dim(); ++j) std::fprintf(f, ",feat_%zu", j);
    std::fprintf(f, "\n");
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::fprintf(f, "%d", ds.labels[i]);
        for (std::size_t j = 0; j < ds.dim(); ++j)
            std::fprintf(f, ",%.17g", ds.features.at(i, j));
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

} // namespace hermite::data
