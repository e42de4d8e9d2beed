#pragma once

#include <string>
#include <vector>

#include "cforge/dataset.hpp"
#include "cforge/model.hpp"

namespace cforge {

u32 crc32(const void* data, size_t len);

/// Model container: a directory holding manifest.json plus one raw
/// little-endian float32 blob per weight/bias tensor. CRC32 of every blob is
/// recorded in the manifest and verified on load.
void save_model(const std::string& dir, const ModelGraph& model);
ModelGraph load_model(const std::string& dir);

/// Dataset container: data.bin ("CFDS" magic, u32 count, u32 ndim, dims,
/// float32 samples) + labels.bin (u32 ids). Split tags live in an optional
/// splits.json sidecar; without it every sample is tagged validation.
void save_dataset(const std::string& dir, const Dataset& data);
Dataset load_dataset(const std::string& dir);

std::vector<unsigned char> read_file(const std::string& path);
void write_file(const std::string& path, const void* data, size_t len);

}  // namespace cforge
