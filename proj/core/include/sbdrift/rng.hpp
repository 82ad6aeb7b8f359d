#pragma once

#include "sbdrift/models.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace sbdrift::rng {

/// Labels identifying one independent stream.
struct StreamLabels {
  std::string experiment;
  std::string testbed;
  std::uint64_t sample_size = 0;
  std::uint64_t rep = 0;
};

std::uint64_t fnv1a(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the stream for (master seed, labels). Identical labels give identical seeds.
std::uint64_t stream_seed(std::uint64_t master_seed, const StreamLabels& labels);

Rng derive_stream(std::uint64_t master_seed, const StreamLabels& labels);

}  // namespace sbdrift::rng
