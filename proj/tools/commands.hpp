#pragma once

#include <functional>

#include <CLI11.hpp>

namespace facedit::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kTrainingAborted = 3;

/// Adds the `serve` subcommand; the returned callback runs it after parsing.
std::function<int()> add_serve_command(CLI::App& app);

}  // namespace facedit::cli
