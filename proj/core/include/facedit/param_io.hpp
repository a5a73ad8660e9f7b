#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <torch/torch.h>

namespace facedit {

/// Parameter blob layout (little endian):
///   "FDPB" | u32 version | u32 count |
///   count x { u32 name_len | name | u8 dtype | u32 ndim | i64 dims[ndim] | u64 nbytes | data }
/// Entries are the module's parameters followed by its buffers, in registration order.
inline constexpr std::uint32_t kParamBlobVersion = 1;

std::string serialize_parameters(const torch::nn::Module& module);
void deserialize_parameters(torch::nn::Module& module, const std::string& blob);

/// Returns the FNV-1a digest of the written bytes.
std::uint64_t save_parameters(const torch::nn::Module& module, const std::filesystem::path& path);
/// Throws CheckpointError on a missing file or any name, dtype or shape mismatch.
/// The module is left untouched unless every entry validates.
void load_parameters(torch::nn::Module& module, const std::filesystem::path& path);

/// Digest of names, shapes and raw values of all parameters and buffers.
std::uint64_t parameter_hash(const torch::nn::Module& module);

void set_trainable(torch::nn::Module& module, bool trainable);

}  // namespace facedit
