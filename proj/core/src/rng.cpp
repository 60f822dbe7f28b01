#include "sae/rng.hpp"

#include <cmath>
#include <numbers>

namespace sae {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix_label(std::uint64_t key, std::uint64_t label) noexcept {
  std::uint64_t s = key ^ (label * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  splitmix64(s);
  return splitmix64(s);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : RngStream(mix_label(0x5ae0f1e1d0c0ffeeULL, seed), true) {}

RngStream::RngStream(std::uint64_t key, bool) : key_(key) {
  std::uint64_t s = key;
  for (auto& word : state_) word = splitmix64(s);
}

RngStream RngStream::substream(std::uint64_t label) const {
  return RngStream(mix_label(key_, label), true);
}

RngStream RngStream::substream(std::initializer_list<std::uint64_t> labels) const {
  std::uint64_t k = key_;
  for (auto label : labels) k = mix_label(k, label);
  return RngStream(k, true);
}

double RngStream::normal() noexcept {
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sae
