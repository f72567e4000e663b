#pragma once

#include "corpus.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace xrat {

struct SynthConfig {
  int n_classes = 5;
  int n_instances = 1400;
  int vocab_size = 60;
  int signature_tokens_per_class = 3;
  int words_per_instance = 8;
  int grid_rows = 4;
  int grid_cols = 4;
  int patch_size = 4;   // P
  int channels = 1;     // C
  int signature_patches_per_class = 2;  // distinct prototype vectors per class
  double noise_std = 0.15;
  std::uint64_t seed = 17;

  void validate() const;
};

// Synthetic ground truth that cannot ride on the instance schema: which
// patch cells of each instance hold a planted class prototype.
struct SynthGold {
  std::map<std::string, std::vector<int>> signature_patches;  // id -> cell indices
};

struct SynthResult {
  Dataset dataset;
  SynthGold gold;
};

// Deterministic aligned corpus: every instance's text carries >=1 signature
// word of its class (those words are the gold rationales) and its patch grid
// carries >=1 planted prototype of the class among noise patches. One seed
// fully determines the output bytes.
SynthResult synth_generate(const SynthConfig& cfg);

// Signature word strings for one class; exposed so evaluations can recover
// the planted text signal.
std::vector<std::string> synth_signature_words(const SynthConfig& cfg, int cls);

void save_gold_patches(const SynthGold& gold, const std::string& path);
SynthGold load_gold_patches(const std::string& path);

}  // namespace xrat
