#ifndef HERMITE_CHECKPOINT_HPP
#define HERMITE_CHECKPOINT_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hermite/tensor.hpp"

namespace hermite::ckpt {

// Flat binary container of named float64 arrays: a one-line magic, a JSON
// header (names, shapes, byte offsets into the data section), then raw
// little-endian float64 payload. Round trips are bit-exact.

struct Checkpoint {
    std::map<std::string, std::string> meta;
    std::vector<std::pair<std::string, Tensor>> arrays;

    const Tensor* find(const std::string& name) const;
};

void save(const std::string& path, const Checkpoint& ckpt);
Checkpoint load(const std::string& path);

} // namespace hermite::ckpt

#endif
