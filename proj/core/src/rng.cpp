#include "sbdrift/rng.hpp"

namespace sbdrift::rng {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master_seed, const StreamLabels& labels) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ fnv1a(labels.experiment));
  h = splitmix64(h ^ fnv1a(labels.testbed));
  h = splitmix64(h ^ labels.sample_size);
  h = splitmix64(h ^ labels.rep);
  return h;
}

Rng derive_stream(std::uint64_t master_seed, const StreamLabels& labels) {
  const std::uint64_t s = stream_seed(master_seed, labels);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s) >> 32)};
  return Rng(seq);
}

}  // namespace sbdrift::rng
