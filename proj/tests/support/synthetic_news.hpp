#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntc/text.hpp"

namespace ntc::testing {

// Deterministic news-like corpus in the HuffPost line layout, used where a
// real dataset download is not available. Four categories with disjoint
// keyword pools over a shared filler vocabulary; a tunable share of records
// carries no strongly indicative token, and a small label-noise rate keeps
// the task from being separable.
struct SyntheticConfig {
  std::size_t records_per_class = 2000;
  std::uint64_t seed = 7;
  double label_noise = 0.02;  // fraction of records with a flipped label
  double p_zero_strong = 0.25;
  double p_one_strong = 0.50;  // remainder gets two strong keywords
};

const std::vector<std::string>& synthetic_categories();

std::vector<NewsRecord> make_synthetic_news(const SyntheticConfig& config);

// Writes the corpus as line-delimited JSON (category/headline/
// short_description fields only, like the public dataset).
void write_synthetic_news(const std::string& path, const SyntheticConfig& config);

}  // namespace ntc::testing
