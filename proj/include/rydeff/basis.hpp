#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydeff {

// Classical-basis indexing. Configurations are words of length N with site 0
// as the most significant digit.
//
// Two-level alphabet:   down = 0, up = 1.
// Three-level alphabet: up = 0, mid = 1, down = 2, matching the
// (up, mid, down) single-site matrix convention used throughout.

using ConfigIndex = std::uint64_t;

inline constexpr int kThreeLevelUp = 0;
inline constexpr int kThreeLevelMid = 1;
inline constexpr int kThreeLevelDown = 2;

// --- two-level helpers (hot paths, bit arithmetic) ---

inline std::size_t two_level_dim(int n_sites) {
  if (n_sites < 0 || n_sites > 62) throw std::invalid_argument("two_level_dim: n_sites out of range");
  return std::size_t{1} << n_sites;
}

inline int occ2(ConfigIndex c, int site, int n_sites) {
  return static_cast<int>((c >> (n_sites - 1 - site)) & 1u);
}

inline ConfigIndex flip2(ConfigIndex c, int site, int n_sites) {
  return c ^ (ConfigIndex{1} << (n_sites - 1 - site));
}

inline int popcount_diff(ConfigIndex a, ConfigIndex b) {
  return __builtin_popcountll(a ^ b);
}

// --- generic base-b indexing (b = 2 or 3) ---

class Basis {
 public:
  Basis(int n_sites, int base) : n_sites_(n_sites), base_(base) {
    if (n_sites < 1) throw std::invalid_argument("Basis: n_sites must be >= 1");
    if (base != 2 && base != 3) throw std::invalid_argument("Basis: base must be 2 or 3");
    place_.resize(n_sites_);
    std::size_t p = 1;
    for (int s = n_sites_ - 1; s >= 0; --s) {
      place_[s] = p;
      p *= base;
    }
    dim_ = p;
  }

  int n_sites() const { return n_sites_; }
  int base() const { return base_; }
  std::size_t dim() const { return dim_; }

  int digit(std::size_t idx, int site) const { return static_cast<int>(idx / place_[site] % base_); }

  std::size_t with_digit(std::size_t idx, int site, int value) const {
    return idx + (value - digit(idx, site)) * place_[site];
  }

  // Rydberg occupation of a site: two-level digit 1, three-level digit 0.
  int occupation(std::size_t idx, int site) const {
    const int d = digit(idx, site);
    return base_ == 2 ? d : (d == kThreeLevelUp ? 1 : 0);
  }

  std::vector<int> decode(std::size_t idx) const {
    std::vector<int> word(n_sites_);
    for (int s = 0; s < n_sites_; ++s) word[s] = digit(idx, s);
    return word;
  }

  std::size_t encode(const std::vector<int>& word) const {
    if (static_cast<int>(word.size()) != n_sites_) throw std::invalid_argument("Basis::encode: wrong word length");
    std::size_t idx = 0;
    for (int s = 0; s < n_sites_; ++s) {
      if (word[s] < 0 || word[s] >= base_) throw std::invalid_argument("Basis::encode: digit out of range");
      idx += static_cast<std::size_t>(word[s]) * place_[s];
    }
    return idx;
  }

 private:
  int n_sites_;
  int base_;
  std::size_t dim_ = 0;
  std::vector<std::size_t> place_;
};

}  // namespace rydeff
