#pragma once

// Subcommand front end: generate | check | lyapunov | fit | sweep | campaign | windows.

#include "heterodyn/graphgen.hpp"
#include "heterodyn/serialize.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace heterodyn::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeError = 1, kConfigError = 2 };

/// Hex SHA-1 of "blob <size>\0<content>", as computed by git hash-object.
[[nodiscard]] std::string git_blob_sha1(std::string_view content);

/// Graph from a config entry:
///   "star:K"            hub plus K leaves
///   "stars:K1,K2,..."   disjoint stars, hubs first
///   "complete:N"
///   "file:PATH"         a graph.json written by `generate` (relative to `base`)
///   {"weights": [...], "seed": S}                       Chung-Lu sample of the given weights
///   {"params": {...}, "n": N, "w_max": W, "seed": S}    heterogeneous sequence, then a sample
///   {"n": N, "edges": [[i, j], ...]}
[[nodiscard]] graphgen::Graph graph_from_spec(const io::Json& spec, const std::filesystem::path& base = {});

/// Parses arguments, runs one subcommand and returns its exit code. Messages
/// go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heterodyn::cli
