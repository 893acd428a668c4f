#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mofkit/optim.hpp"
#include "mofkit/tensor.hpp"

namespace mofkit::ad {

// Single-file binary container: one JSON header line describing named
// float64 arrays (name, rows, cols, byte offset) plus free-form metadata,
// followed by the raw array payload. Used for model checkpoints, latent
// code sets and optimizer state.
struct Container {
  std::map<std::string, Tensor> arrays;
  std::map<std::string, std::string> meta;  // string metadata (seed, config json, ...)

  void put(const std::string& name, Tensor t) { arrays[name] = std::move(t); }
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const { return arrays.count(name) > 0; }

  void save(const std::string& path) const;
  static Container load(const std::string& path);
};

// checkpoint = parameters (+ optional optimizer moments) + metadata
Container checkpoint_pack(const std::vector<Parameter*>& params,
                          const OptimState* opt = nullptr, uint64_t seed = 0);
void checkpoint_unpack(const Container& c, const std::vector<Parameter*>& params,
                       OptimState* opt = nullptr);

// Writes to <path>.tmp then renames, so readers never observe partial files.
void atomic_write_text(const std::string& path, const std::string& text);

}  // namespace mofkit::ad
